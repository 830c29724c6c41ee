#include "ri/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <thread>

#include "ri/bridge.hpp"
#include "ri/clusters.hpp"
#include "ri/excursion.hpp"
#include "ri/interlacement.hpp"
#include "ri/potential.hpp"
#include "ri/rng.hpp"
#include "ri/walk.hpp"

namespace ri {

using nlohmann::json;

namespace {

template <class T>
std::vector<T> scalar_or_list(const json& v, const char* key) {
  try {
    if (v.is_array()) return v.get<std::vector<T>>();
    return {v.get<T>()};
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

template <class T>
T get(const json& v, const char* key) {
  try {
    return v.get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Runs body(i) for i in [0, n) over `threads` workers; results are indexed
// by trial so the merge order never depends on scheduling.
template <class F>
void fan_out(std::uint64_t n, unsigned threads, F&& body) {
  threads = std::max(1u, threads);
  if (threads == 1 || n < 2) {
    for (std::uint64_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::uint64_t i = w; i < n; i += threads) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::string fmt_double(double x) {
  std::ostringstream os;
  os << std::setprecision(10) << x;
  return os.str();
}

}  // namespace

// ---- config ----

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig c;
  for (const auto& [k, v] : j.items()) {
    const char* key = k.c_str();
    if (k == "d") c.d = get<int>(v, key);
    else if (k == "window") c.window = get<Coord>(v, key);
    else if (k == "u") c.u = scalar_or_list<double>(v, key);
    else if (k == "delta") c.delta = get<double>(v, key);
    else if (k == "events") c.events = scalar_or_list<std::string>(v, key);
    else if (k == "trials") c.trials = get<std::uint64_t>(v, key);
    else if (k == "seed") c.seed = get<std::uint64_t>(v, key);
    else if (k == "truncation") c.truncation = get<Coord>(v, key);
    else if (k == "path_mode") c.path_mode = get<std::string>(v, key);
    else if (k == "out") c.out = get<std::string>(v, key);
    else if (k == "gamma_M") c.gamma_M = get<double>(v, key);
    else if (k == "r") c.r = scalar_or_list<Coord>(v, key);
    else if (k == "M") c.M = scalar_or_list<Coord>(v, key);
    else if (k == "j") c.j = get<int>(v, key);
    else if (k == "fe_radius") c.fe_radius = get<Coord>(v, key);
    else if (k == "r0") c.r0 = get<Coord>(v, key);
    else if (k == "threads") c.threads = get<unsigned>(v, key);
    else if (k == "xi") c.xi = scalar_or_list<double>(v, key);
    else if (k == "instances") c.instances = get<std::uint64_t>(v, key);
    else if (k == "L_max") c.L_max = get<Coord>(v, key);
    else if (k == "m") c.m = get<double>(v, key);
    else if (k == "bridge_dim") c.bridge_dim = get<int>(v, key);
    else if (k == "cluster_steps") c.cluster_steps = get<int>(v, key);
    else throw ConfigError("unknown config key '" + k + "'");
  }
  c.validate();
  return c;
}

json ExperimentConfig::to_json() const {
  return json{{"d", d},
              {"window", window},
              {"u", u},
              {"delta", delta},
              {"events", events},
              {"trials", trials},
              {"seed", seed},
              {"truncation", truncation},
              {"path_mode", path_mode},
              {"out", out},
              {"gamma_M", gamma_M},
              {"r", r},
              {"M", M},
              {"j", j},
              {"fe_radius", fe_radius},
              {"r0", r0},
              {"threads", threads},
              {"xi", xi},
              {"instances", instances},
              {"L_max", L_max},
              {"m", m},
              {"bridge_dim", bridge_dim},
              {"cluster_steps", cluster_steps}};
}

void ExperimentConfig::validate() const {
  auto bad = [](const std::string& m) { throw ConfigError(m); };
  if (d < 3 || d > kMaxDim) bad("d must be in [3, " + std::to_string(kMaxDim) + "]");
  if (window < 0) bad("window must be >= 0");
  if (u.empty()) bad("u grid is empty");
  for (double x : u)
    if (!(x > 0) || !std::isfinite(x)) bad("u values must be positive");
  if (!(delta >= 0) || !std::isfinite(delta)) bad("delta must be >= 0");
  for (const auto& e : events)
    if (std::find(known_events().begin(), known_events().end(), e) == known_events().end())
      bad("unknown event '" + e + "'");
  if (truncation < 0) bad("truncation must be >= 0");
  if (path_mode != "trace" && path_mode != "full") bad("path_mode must be 'trace' or 'full'");
  if (gamma_M != 0 && !(gamma_M > 1)) bad("gamma_M must be > 1");
  if (r.empty() || M.empty()) bad("r and M grids must be non-empty");
  for (Coord x : r)
    if (x < 1) bad("r values must be >= 1");
  for (Coord x : M)
    if (x < 1) bad("M values must be >= 1");
  if (j < 0) bad("j must be >= 0");
  for (Coord x : M)
    if (static_cast<double>(j) > std::floor(std::sqrt(static_cast<double>(x)))) bad("j must be <= floor(sqrt(M))");
  if (fe_radius < 0 || r0 < 1) bad("fe_radius must be >= 0 and r0 >= 1");
  if (threads < 1) bad("threads must be >= 1");
  for (double x : xi)
    if (!(x > 0.5 && x < 1)) bad("xi values must lie in (1/2, 1)");
  if (xi.empty()) bad("xi grid is empty");
  if (L_max < 2) bad("L_max must be >= 2");
  if (m < 0) bad("m must be >= 0");
  if (bridge_dim < 3 || bridge_dim > kMaxDim) bad("bridge_dim out of range");
  if (cluster_steps < 0) bad("cluster_steps must be >= 0");
  const bool needs_sprinkle = std::find(events.begin(), events.end(), "unique") != events.end() ||
                              std::find(events.begin(), events.end(), "uc") != events.end() ||
                              std::find(events.begin(), events.end(), "finite_energy") != events.end();
  if (needs_sprinkle && !(delta > 0)) bad("sprinkled events need delta > 0");
  if (std::find(events.begin(), events.end(), "class_counts") != events.end())
    for (double x : u)
      if (x < delta) bad("class_counts needs u >= delta");
  if (std::find(events.begin(), events.end(), "finite_energy") != events.end())
    for (double x : u)
      if (!(x > delta)) bad("finite_energy needs u > delta");
  if (window > 0 && window < required_window())
    bad("window " + std::to_string(window) + " is smaller than the " + std::to_string(required_window()) +
        " the selected events need");
}

Coord ExperimentConfig::required_window() const {
  const Coord rmax = *std::max_element(r.begin(), r.end());
  const Coord Mmax = *std::max_element(M.begin(), M.end());
  Coord need = 1;
  for (const auto& e : events) {
    if (e == "exist" || e == "vacant_ball") need = std::max(need, rmax);
    else if (e == "unique") need = std::max(need, 2 * rmax);
    else if (e == "uc") need = std::max(need, 6 * Mmax);
    else if (e == "disconnect") need = std::max(need, Mmax);
    else if (e == "class_counts") need = std::max(need, 4 * Mmax);
    else if (e == "finite_energy") need = std::max(need, fe_radius + 8 * r0);
  }
  return need;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  return ExperimentConfig::from_json(j);
}

// ---- sweep ----

namespace {

struct Slot {
  std::string event;
  Coord r = 0, M = 0;
  double u = 0, v = 0;
};

std::vector<Slot> make_slots(const ExperimentConfig& c) {
  std::vector<Slot> out;
  for (const auto& e : c.events) {
    for (double u : c.u) {
      const double v = std::max(0.0, u - c.delta);
      if (e == "exist" || e == "vacant_ball") {
        for (Coord r : c.r) out.push_back({e, r, 0, u, u});
      } else if (e == "unique") {
        for (Coord r : c.r) out.push_back({e, r, 0, u, v});
      } else if (e == "uc") {
        for (Coord M : c.M) out.push_back({e, 0, M, u, v});
      } else if (e == "disconnect") {
        for (Coord r : c.r)
          for (Coord M : c.M)
            if (M > r) out.push_back({e, r, M, u, u});
      } else if (e == "class_counts") {
        for (Coord M : c.M) out.push_back({e, 0, M, u, v});
      } else if (e == "finite_energy") {
        for (const char* part : {"fe1", "fe2", "fe3", "finite_energy"}) out.push_back({part, c.fe_radius, c.r0, u, v});
      }
    }
  }
  return out;
}

bool ball_vacant(const LevelField& f, Coord r, double u) {
  const Box b = ball(f.dim(), r);
  for (const auto& p : b.cuboid().points())
    if (!f.vacant(p, u)) return false;
  return true;
}

}  // namespace

SweepResult run_sweep(const ExperimentConfig& c) {
  c.validate();
  const auto t0 = std::chrono::steady_clock::now();
  SweepResult res;
  const auto slots = make_slots(c);
  if (c.trials == 0 || slots.empty()) return res;

  const Coord wr = c.window > 0 ? c.window : c.required_window();
  SamplerOptions opt;
  opt.truncation_radius = c.truncation;
  opt.mode = c.path_mode == "full" ? PathMode::kFull : PathMode::kTrace;
  const InterlacementSampler sampler(Window::box(ball(c.d, wr)), opt);
  const double u_max = *std::max_element(c.u.begin(), c.u.end());

  // Class rows: (u, M) -> accumulated U_i.
  std::vector<std::pair<double, Coord>> class_keys;
  for (const auto& s : slots)
    if (s.event == "class_counts") class_keys.emplace_back(s.u, s.M);

  constexpr std::uint8_t kFailed = 2;
  std::vector<std::vector<std::uint8_t>> outcome(c.trials);
  std::vector<std::vector<std::vector<std::size_t>>> class_U(c.trials);
  std::vector<std::string> failure_msg(c.trials);

  fan_out(c.trials, c.threads, [&](std::uint64_t t) {
    auto& out = outcome[t];
    out.assign(slots.size(), kFailed);
    RngStream rng(c.seed, t);
    InterlacementSample s;
    try {
      s = sampler.sample(u_max, rng);
    } catch (const RejectionFailure& e) {
      failure_msg[t] = e.what();
      return;
    }
    const LevelField f = LevelField::from_sample(s);
    std::size_t ck = 0;
    class_U[t].resize(class_keys.size());
    for (std::size_t k = 0; k < slots.size(); ++k) {
      const Slot& sl = slots[k];
      bool ok = false;
      if (sl.event == "exist") ok = detect_exist(f, sl.r, sl.u);
      else if (sl.event == "vacant_ball") ok = ball_vacant(f, sl.r, sl.u);
      else if (sl.event == "unique") ok = detect_unique(f, sl.r, sl.u, sl.v);
      else if (sl.event == "uc") ok = detect_uc(f, sl.M, sl.u, sl.v);
      else if (sl.event == "disconnect") ok = detect_disconnect(f, sl.r, sl.M, sl.u);
      else if (sl.event == "class_counts") {
        const ClassCounts cc = class_counts(f, sl.M, c.j, sl.u, c.delta);
        ok = !cc.U_eta.empty() && cc.U_eta.front() <= 1;
        class_U[t][ck++] = cc.U_eta;
      } else {
        const Box B = ball(c.d, c.fe_radius);
        const auto fe = detect_finite_energy_good(s, B, c.r0, FiniteEnergyLevels::standard(sl.u, c.delta));
        if (sl.event == "fe1") ok = fe.f1;
        else if (sl.event == "fe2") ok = fe.f2;
        else if (sl.event == "fe3") ok = fe.f3;
        else ok = fe.all();
      }
      out[k] = ok ? 1 : 0;
    }
  });

  for (std::uint64_t t = 0; t < c.trials; ++t)
    if (!failure_msg[t].empty()) ++res.sampler_failures;
  if (static_cast<double>(res.sampler_failures) > 0.01 * static_cast<double>(c.trials)) {
    std::string first;
    for (const auto& m : failure_msg)
      if (!m.empty()) {
        first = m;
        break;
      }
    throw SamplerFailureRate("sampler failed in " + std::to_string(res.sampler_failures) + " of " +
                             std::to_string(c.trials) + " trials; first: " + first);
  }

  res.wall_seconds = seconds_since(t0);
  for (std::size_t k = 0; k < slots.size(); ++k) {
    TallyRecord tr;
    tr.event = slots[k].event;
    tr.r = slots[k].r;
    tr.M = slots[k].M;
    tr.u = slots[k].u;
    tr.v = slots[k].v;
    tr.trials = c.trials;
    tr.seed = c.seed;
    for (std::uint64_t t = 0; t < c.trials; ++t) {
      const auto o = outcome[t][k];
      if (o == 1) ++tr.successes;
      else if (o == 0) ++tr.failures_false;
      else ++tr.sampler_failures;
    }
    tr.p_hat = static_cast<double>(tr.successes) / static_cast<double>(tr.trials);
    tr.stderr_ = std::sqrt(tr.p_hat * (1 - tr.p_hat) / static_cast<double>(tr.trials));
    tr.wall_seconds = res.wall_seconds;
    res.tallies.push_back(tr);
  }
  for (std::size_t ck = 0; ck < class_keys.size(); ++ck) {
    std::vector<double> sum;
    std::uint64_t n = 0;
    for (std::uint64_t t = 0; t < c.trials; ++t) {
      if (!failure_msg[t].empty()) continue;
      const auto& U = class_U[t][ck];
      if (sum.size() < U.size()) sum.resize(U.size(), 0.0);
      for (std::size_t i = 0; i < U.size(); ++i) sum[i] += static_cast<double>(U[i]);
      ++n;
    }
    for (std::size_t i = 0; i < sum.size(); ++i)
      res.class_rows.push_back({class_keys[ck].first, class_keys[ck].second, c.j, static_cast<int>(i),
                                n ? sum[i] / static_cast<double>(n) : 0.0});
  }
  return res;
}

void write_tallies_csv(std::ostream& os, const std::vector<TallyRecord>& t) {
  os << "event,r,M,u,v,n_trials,n_true,n_false,n_failed,p_hat,stderr,seed\n";
  for (const auto& x : t)
    os << x.event << ',' << x.r << ',' << x.M << ',' << fmt_double(x.u) << ',' << fmt_double(x.v) << ',' << x.trials
       << ',' << x.successes << ',' << x.failures_false << ',' << x.sampler_failures << ',' << fmt_double(x.p_hat)
       << ',' << fmt_double(x.stderr_) << ',' << x.seed << '\n';
}

std::vector<TallyRecord> read_tallies_csv(std::istream& is) {
  std::vector<TallyRecord> out;
  std::string line;
  if (!std::getline(is, line)) return out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 12) throw ConfigError("tally CSV: expected 12 columns in '" + line + "'");
    try {
      TallyRecord r;
      r.event = f[0];
      r.r = std::stoll(f[1]);
      r.M = std::stoll(f[2]);
      r.u = std::stod(f[3]);
      r.v = std::stod(f[4]);
      r.trials = std::stoull(f[5]);
      r.successes = std::stoull(f[6]);
      r.failures_false = std::stoull(f[7]);
      r.sampler_failures = std::stoull(f[8]);
      r.p_hat = std::stod(f[9]);
      r.stderr_ = std::stod(f[10]);
      r.seed = std::stoull(f[11]);
      out.push_back(r);
    } catch (const std::logic_error&) {
      throw ConfigError("tally CSV: bad number in '" + line + "'");
    }
  }
  return out;
}

void write_disconnection_csv(std::ostream& os, const std::vector<TallyRecord>& t, int d) {
  os << "r,M,u,weighted_p,stderr\n";
  for (const auto& x : t) {
    if (x.event != "disconnect") continue;
    const double w = std::pow(static_cast<double>(x.M) / static_cast<double>(x.r), d);
    os << x.r << ',' << x.M << ',' << fmt_double(x.u) << ',' << fmt_double(w * x.p_hat) << ','
       << fmt_double(w * x.stderr_) << '\n';
  }
}

void write_uc_csv(std::ostream& os, const std::vector<TallyRecord>& t) {
  std::vector<TallyRecord> uc;
  for (const auto& x : t)
    if (x.event == "uc") uc.push_back(x);
  std::stable_sort(uc.begin(), uc.end(),
                   [](const TallyRecord& a, const TallyRecord& b) { return std::tie(a.u, a.M) < std::tie(b.u, b.M); });
  os << "u,M,v,n_trials,p_hat,stderr\n";
  for (const auto& x : uc)
    os << fmt_double(x.u) << ',' << x.M << ',' << fmt_double(x.v) << ',' << x.trials << ',' << fmt_double(x.p_hat)
       << ',' << fmt_double(x.stderr_) << '\n';
}

void write_class_csv(std::ostream& os, const std::vector<SweepResult::ClassRow>& rows) {
  os << "u,M,j,i,mean_U\n";
  for (const auto& x : rows)
    os << fmt_double(x.u) << ',' << x.M << ',' << x.j << ',' << x.i << ',' << fmt_double(x.mean_U) << '\n';
}

void emit_plots(const std::vector<TallyRecord>& t, int d, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  {
    std::ofstream os(fs::path(dir) / "plot_data.csv");
    os << "event,r,M,u,v,p_hat,lo,hi\n";
    for (const auto& x : t)
      os << x.event << ',' << x.r << ',' << x.M << ',' << fmt_double(x.u) << ',' << fmt_double(x.v) << ','
         << fmt_double(x.p_hat) << ',' << fmt_double(std::max(0.0, x.p_hat - 2 * x.stderr_)) << ','
         << fmt_double(std::min(1.0, x.p_hat + 2 * x.stderr_)) << '\n';
  }
  {
    std::ofstream os(fs::path(dir) / "disconnection_curve.csv");
    write_disconnection_csv(os, t, d);
  }
  {
    std::ofstream os(fs::path(dir) / "uc_sweep.csv");
    write_uc_csv(os, t);
  }
  std::ofstream os(fs::path(dir) / "plot_script.txt");
  os << "# Plot description for plot_data.csv, disconnection_curve.csv and uc_sweep.csv.\n"
        "# Any plotting tool works: each block names the file, the axes and how rows group into series.\n\n"
        "figure event_probabilities\n"
        "  file plot_data.csv\n"
        "  panel_by event\n"
        "  series_by r, M\n"
        "  x u (linear)\n"
        "  y p_hat (linear, 0..1)\n"
        "  band lo, hi  # p_hat +- 2 stderr, clipped to [0, 1]\n\n"
        "figure weighted_disconnection\n"
        "  file disconnection_curve.csv\n"
        "  series_by r, M\n"
        "  x u (linear)\n"
        "  y weighted_p (log)  # (M/r)^d * P[disconnect]\n"
        "  errorbar stderr\n\n"
        "figure unique_crossing\n"
        "  file uc_sweep.csv\n"
        "  series_by M\n"
        "  x u (linear)\n"
        "  y p_hat (linear, 0..1)\n"
        "  errorbar stderr\n";
}

// ---- vacancy law ----

std::vector<VacancyRow> run_vacancy_check(int d, Coord window, const std::vector<Coord>& ks,
                                          const std::vector<double>& us, std::uint64_t trials, std::uint64_t seed,
                                          unsigned threads) {
  check_dim(d);
  for (Coord k : ks)
    if (k < 0 || k > window) throw std::invalid_argument("vacancy check: need 0 <= k <= window");
  if (us.empty() || ks.empty()) return {};
  const double u_max = *std::max_element(us.begin(), us.end());
  SamplerOptions opt;
  opt.mode = PathMode::kTrace;
  const InterlacementSampler sampler(Window::box(ball(d, window)), opt);
  // Per trial and K, the smallest label visiting K.
  std::vector<std::vector<double>> first(trials, std::vector<double>(ks.size(), kNeverVisited));
  std::vector<std::vector<std::size_t>> members(ks.size());
  for (std::size_t i = 0; i < ks.size(); ++i)
    for (const auto& p : ball(d, ks[i]).cuboid().points())
      members[i].push_back(static_cast<std::size_t>(sampler.window().index_of(p)));
  fan_out(trials, threads, [&](std::uint64_t t) {
    RngStream rng(seed, t);
    const InterlacementSample s = sampler.sample(u_max, rng);
    for (std::size_t i = 0; i < ks.size(); ++i)
      for (auto k : members[i]) first[t][i] = std::min(first[t][i], s.first_label[k]);
  });
  std::vector<VacancyRow> out;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const double cap = capacity(PointSet::from_box(ball(d, ks[i])));
    for (double u : us) {
      VacancyRow r;
      r.k = ks[i];
      r.u = u;
      r.trials = trials;
      for (std::uint64_t t = 0; t < trials; ++t) r.vacant += first[t][i] > u;
      r.p_hat = trials ? static_cast<double>(r.vacant) / static_cast<double>(trials) : 0.0;
      r.expected = std::exp(-u * cap);
      r.stderr_ = trials ? std::sqrt(r.expected * (1 - r.expected) / static_cast<double>(trials)) : 0.0;
      r.z = r.stderr_ > 0 ? (r.p_hat - r.expected) / r.stderr_ : 0.0;
      out.push_back(r);
    }
  }
  return out;
}

void write_vacancy_csv(std::ostream& os, const std::vector<VacancyRow>& rows) {
  os << "k,u,n_trials,n_vacant,p_hat,expected,stderr,z\n";
  for (const auto& r : rows)
    os << r.k << ',' << fmt_double(r.u) << ',' << r.trials << ',' << r.vacant << ',' << fmt_double(r.p_hat) << ','
       << fmt_double(r.expected) << ',' << fmt_double(r.stderr_) << ',' << fmt_double(r.z) << '\n';
}

// ---- bridge corpus ----

namespace {

PointSet walk_cluster(RngStream& g, const Tube& T, int steps) {
  const Cuboid c = T.cuboid();
  Point p(T.dim());
  for (int i = 0; i < T.dim(); ++i)
    p.x[i] = c.lo.x[i] + static_cast<Coord>(g.below(static_cast<std::uint32_t>(c.hi.x[i] - c.lo.x[i] + 1)));
  std::vector<Point> v{p};
  for (int t = 0; t < steps; ++t) {
    const int a = static_cast<int>(g.below(static_cast<std::uint32_t>(T.dim())));
    p.x[a] += g.below(2) ? 1 : -1;
    v.push_back(p);
  }
  return PointSet(std::move(v));
}

bool meets(const PointSet& S, const Tube& T) {
  for (const auto& p : S)
    if (T.contains(p)) return true;
  return false;
}

}  // namespace

CorpusReport run_bridge_corpus(const ExperimentConfig& c) {
  c.validate();
  const auto t0 = std::chrono::steady_clock::now();
  CorpusReport rep;
  rep.rows.resize(c.instances);
  const int d = c.bridge_dim;
  fan_out(c.instances, c.threads, [&](std::uint64_t i) {
    RngStream g(c.seed, i);
    CorpusRow& row = rep.rows[i];
    row.instance = i;
    row.xi = c.xi[i % c.xi.size()];
    row.d = d;
    const double s_min = default_s_min(row.xi);
    if (2 * s_min > static_cast<double>(c.L_max)) {
      row.error = "L_max below 2 s_min";
      return;
    }
    const double s_hi = std::min(4 * s_min, 0.5 * static_cast<double>(c.L_max));
    row.s = s_min + g.uniform() * (s_hi - s_min);
    Tube T;
    T.base = Point(d);
    T.axis = static_cast<int>(g.below(static_cast<std::uint32_t>(d)));
    const Coord L_lo = static_cast<Coord>(std::ceil(2 * row.s));
    T.L = L_lo + static_cast<Coord>(g.below(static_cast<std::uint32_t>(c.L_max - L_lo + 1)));
    T.N = static_cast<Coord>(g.below(static_cast<std::uint32_t>(3 * T.L + 1)));
    row.axis = T.axis;
    row.L = T.L;
    row.N = T.N;
    PointSet C, D;
    do {
      C = walk_cluster(g, T, c.cluster_steps);
      D = walk_cluster(g, T, c.cluster_steps);
    } while (!meets(C, T) || !meets(D, T) || !set_intersection(C, D).empty());
    BridgeParams prm;
    prm.xi = row.xi;
    prm.m = c.m;
    prm.validate = false;
    try {
      const Bridge b = general_bridge(C, D, T, row.s, prm);
      const BridgeReport r = validate_bridge(b, C, D);
      row.m = b.m;
      row.J = r.J;
      row.boxes = r.boxes;
      row.J_bound = r.J_bound;
      row.box_bound = r.box_bound;
      row.ok = r.ok();
      if (!row.ok) row.error = r.summary();
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });
  for (const auto& r : rep.rows) {
    if (!r.ok) ++rep.failures;
    if (r.ok && r.m > 0) {
      const double ll = std::log(std::log(std::exp(2.0) * static_cast<double>(r.L)));
      rep.max_J_ratio = std::max(rep.max_J_ratio, static_cast<double>(r.J) / (r.m * ll));
    }
  }
  rep.wall_seconds = seconds_since(t0);
  return rep;
}

void write_corpus_csv(std::ostream& os, const CorpusReport& r) {
  os << "instance,xi,d,axis,L,N,s,m,J,J_bound,J_headroom,boxes,box_bound,box_headroom,ok,error\n";
  for (const auto& x : r.rows) {
    std::string err = x.error.substr(0, x.error.find('\n'));
    std::replace(err.begin(), err.end(), ',', ';');
    const double hj = x.J ? x.J_bound / static_cast<double>(x.J) : 0.0;
    const double hb = x.boxes ? x.box_bound / static_cast<double>(x.boxes) : 0.0;
    os << x.instance << ',' << fmt_double(x.xi) << ',' << x.d << ',' << x.axis << ',' << x.L << ',' << x.N << ','
       << fmt_double(x.s) << ',' << fmt_double(x.m) << ',' << x.J << ',' << fmt_double(x.J_bound) << ','
       << fmt_double(hj) << ',' << x.boxes << ',' << fmt_double(x.box_bound) << ',' << fmt_double(hb) << ','
       << (x.ok ? 1 : 0) << ',' << err << '\n';
  }
}

}  // namespace ri
