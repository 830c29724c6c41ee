// Command-line front end: capacity, sample, events, bridge, excursions, sweep, plots.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ri/bridge.hpp"
#include "ri/clusters.hpp"
#include "ri/excursion.hpp"
#include "ri/experiment.hpp"
#include "ri/interlacement.hpp"
#include "ri/potential.hpp"
#include "ri/rng.hpp"
#include "ri/walk.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ri;

namespace {

constexpr int kOk = 0;
constexpr int kConfig = 2;
constexpr int kValidation = 3;
constexpr int kSampler = 4;

const std::vector<std::string> kListKeys{"u", "events", "r", "M", "xi"};

json parse_value(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception&) {
    return text;
  }
}

/// Config file plus flag overrides; flag names equal config keys.
struct ConfigFlags {
  std::string path;
  std::map<std::string, std::string> raw;

  void attach(CLI::App* app, const std::vector<std::string>& keys) {
    app->add_option("--config", path, "JSON config file");
    for (const auto& k : keys) app->add_option("--" + k, raw[k], "override config key '" + k + "'");
  }

  ExperimentConfig resolve(CLI::App* app) const {
    json j = json::object();
    if (!path.empty()) {
      std::ifstream in(path);
      if (!in) throw ConfigError("cannot open config " + path);
      try {
        in >> j;
      } catch (const json::exception& e) {
        throw ConfigError("config " + path + ": " + e.what());
      }
    }
    for (const auto& [k, v] : raw) {
      if (app->count("--" + k) == 0) continue;
      const bool list = std::find(kListKeys.begin(), kListKeys.end(), k) != kListKeys.end();
      if (list && v.find(',') != std::string::npos && v.front() != '[') {
        json arr = json::array();
        std::stringstream ss(v);
        std::string cell;
        while (std::getline(ss, cell, ',')) arr.push_back(parse_value(cell));
        j[k] = arr;
      } else {
        j[k] = parse_value(v);
      }
    }
    return ExperimentConfig::from_json(j);
  }
};

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  return os;
}

PointSet read_points(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  return read_points_ndjson(in);
}

void print_m_of_r(double gamma, const std::vector<double>& rs) {
  std::cout << "r,M\n";
  for (double r : rs) {
    bool overflow = false;
    const Coord M = m_of_r(r, gamma, &overflow);
    std::cout << r << ',' << M << '\n';
    if (overflow) std::cerr << "warning: M(" << r << ") overflows 2^62 at gamma_M = " << gamma << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random interlacement experiments"};
  app.require_subcommand(0, 1);
  double m_of_r_gamma = 0;
  std::vector<double> m_of_r_values{2, 4, 8, 16, 32, 64, 128};
  app.add_option("--m-of-r", m_of_r_gamma, "print M(r) = floor(exp((log r)^gamma)) and exit");
  app.add_option("--m-of-r-values", m_of_r_values, "r values for --m-of-r")->delimiter(',');

  // capacity
  auto* cap = app.add_subcommand("capacity", "capacity of B_k or a point set; optional vacancy-law check");
  int cap_d = 3;
  std::vector<Coord> cap_k{0, 1, 2};
  std::string cap_points, cap_out;
  std::vector<double> cap_u{0.5, 1.0, 2.0};
  bool cap_check = false;
  std::uint64_t cap_trials = 10000, cap_seed = 1;
  Coord cap_window = 0;
  unsigned cap_threads = 1;
  cap->add_option("--d", cap_d, "dimension");
  cap->add_option("--k", cap_k, "radii of the boxes B_k")->delimiter(',');
  cap->add_option("--points", cap_points, "NDJSON point set instead of boxes");
  cap->add_option("--u", cap_u, "levels for exp(-u cap)")->delimiter(',');
  cap->add_flag("--check", cap_check, "Monte Carlo P[B_k in V^u] against exp(-u cap)");
  cap->add_option("--trials", cap_trials);
  cap->add_option("--seed", cap_seed);
  cap->add_option("--window", cap_window, "sampling window radius (default: max k)");
  cap->add_option("--threads", cap_threads);
  cap->add_option("--out", cap_out, "CSV output (default stdout)");

  // sample
  auto* smp = app.add_subcommand("sample", "draw one configuration; NDJSON trajectories and occupancy CSV");
  ConfigFlags smp_cfg;
  smp_cfg.attach(smp, {"d", "window", "u", "seed", "truncation", "path_mode", "out", "events", "r", "M"});
  std::uint64_t smp_index = 0;
  smp->add_option("--index", smp_index, "trial index (RNG stream)");

  // events
  auto* evt = app.add_subcommand("events", "evaluate detectors on one configuration");
  ConfigFlags evt_cfg;
  evt_cfg.attach(evt, {"d", "window", "u", "delta", "events", "seed", "truncation", "path_mode", "r", "M", "j",
                       "fe_radius", "r0"});

  // bridge
  auto* brg = app.add_subcommand("bridge", "build and validate a bridge, or run the fuzz corpus");
  ConfigFlags brg_cfg;
  brg_cfg.attach(brg, {"xi", "instances", "seed", "L_max", "m", "bridge_dim", "cluster_steps", "threads", "out"});
  bool brg_corpus = false, brg_faces = false;
  std::string brg_C, brg_D, brg_svg;
  std::vector<Coord> brg_base;
  int brg_axis = 0;
  Coord brg_L = 0, brg_N = 0;
  double brg_s = 0;
  brg->add_flag("--corpus", brg_corpus, "run the fuzz corpus and write bridge_corpus.csv");
  brg->add_flag("--faces", brg_faces, "faces case: C and D are the tube faces");
  brg->add_option("--C", brg_C, "NDJSON point set C");
  brg->add_option("--D", brg_D, "NDJSON point set D");
  brg->add_option("--base", brg_base, "tube base point")->delimiter(',');
  brg->add_option("--axis", brg_axis, "tube axis (0-based)");
  brg->add_option("--L", brg_L, "tube half-width");
  brg->add_option("--N", brg_N, "tube length");
  brg->add_option("--s", brg_s, "hole scale s");
  brg->add_option("--svg", brg_svg, "write a 2-D slice through the tube base");

  // excursions
  auto* exc = app.add_subcommand("excursions", "clothesline of one configuration and the inner-set identity");
  ConfigFlags exc_cfg;
  exc_cfg.attach(exc, {"d", "window", "u", "seed", "truncation", "out"});
  Coord exc_B = 2, exc_A = 3, exc_U = 4, exc_rounded = 0;
  exc->add_option("--B", exc_B, "radius of the inner box B");
  exc->add_option("--A", exc_A, "radius of the box A");
  exc->add_option("--U", exc_U, "radius of the box U");
  exc->add_option("--rounded", exc_rounded, "use rounded boxes around B_r instead of --A/--U");

  // sweep
  auto* swp = app.add_subcommand("sweep", "Monte Carlo sweep over the configured grid");
  ConfigFlags swp_cfg;
  swp_cfg.attach(swp, {"d", "window", "u", "delta", "events", "trials", "seed", "truncation", "path_mode", "out",
                       "gamma_M", "r", "M", "j", "fe_radius", "r0", "threads"});

  // plots
  auto* plt = app.add_subcommand("plots", "plot data and script from a tally CSV");
  std::string plt_in, plt_out = "plots";
  int plt_d = 3;
  plt->add_option("--tallies", plt_in, "tallies.csv from sweep")->required();
  plt->add_option("--out", plt_out, "output directory");
  plt->add_option("--d", plt_d, "dimension used for the (M/r)^d weight");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (m_of_r_gamma != 0) {
      if (!(m_of_r_gamma > 1)) throw ConfigError("--m-of-r needs gamma > 1");
      print_m_of_r(m_of_r_gamma, m_of_r_values);
      return kOk;
    }

    if (*cap) {
      std::ofstream file;
      std::ostream* os = &std::cout;
      if (!cap_out.empty()) {
        file = open_out(cap_out);
        os = &file;
      }
      if (cap_check) {
        if (!cap_points.empty()) throw ConfigError("--check works with boxes only");
        Coord w = cap_window;
        for (Coord k : cap_k) w = std::max(w, k);
        const auto rows = run_vacancy_check(cap_d, w, cap_k, cap_u, cap_trials, cap_seed, cap_threads);
        write_vacancy_csv(*os, rows);
        return kOk;
      }
      std::vector<CapacityRow> rows;
      auto add = [&](const std::string& id, const PointSet& K) {
        const EquilibriumMeasure em = equilibrium_measure(K);
        rows.push_back({id, K.size(), em.capacity, em.condition_estimate});
      };
      if (!cap_points.empty()) add(cap_points, read_points(cap_points));
      else
        for (Coord k : cap_k) add("B_" + std::to_string(k), PointSet::from_box(ball(cap_d, k)));
      write_capacity_csv(*os, rows);
      return kOk;
    }

    if (*smp) {
      const ExperimentConfig c = smp_cfg.resolve(smp);
      SamplerOptions opt;
      opt.truncation_radius = c.truncation;
      opt.mode = c.path_mode == "full" ? PathMode::kFull : PathMode::kTrace;
      const Coord wr = c.window > 0 ? c.window : c.required_window();
      const InterlacementSampler sampler(Window::box(ball(c.d, wr)), opt);
      RngStream rng(c.seed, smp_index);
      const double u = *std::max_element(c.u.begin(), c.u.end());
      const InterlacementSample s = sampler.sample(u, rng);
      auto nd = open_out(fs::path(c.out) / "sample.ndjson");
      write_sample_ndjson(nd, s);
      auto occ = open_out(fs::path(c.out) / "occupancy.csv");
      write_occupancy_csv(occ, s, u);
      std::cout << json{{"trajectories", s.trajectories.size()},
                        {"capacity", s.capacity},
                        {"window", wr},
                        {"R", s.R},
                        {"exact_return", s.exact_return},
                        {"bias_bound", s.bias_bound}}
                       .dump()
                << '\n';
      return kOk;
    }

    if (*evt) {
      ExperimentConfig c = evt_cfg.resolve(evt);
      c.trials = 1;
      const SweepResult res = run_sweep(c);
      write_tallies_csv(std::cout, res.tallies);
      return res.sampler_failures ? kSampler : kOk;
    }

    if (*brg) {
      const ExperimentConfig c = brg_cfg.resolve(brg);
      if (brg_corpus) {
        const CorpusReport rep = run_bridge_corpus(c);
        auto os = open_out(fs::path(c.out) / "bridge_corpus.csv");
        write_corpus_csv(os, rep);
        std::cout << json{{"instances", rep.rows.size()},
                          {"failures", rep.failures},
                          {"max_J_ratio", rep.max_J_ratio},
                          {"seconds", rep.wall_seconds}}
                         .dump()
                  << '\n';
        return rep.failures ? kValidation : kOk;
      }
      if (brg_L < 1 || !(brg_s > 0)) throw ConfigError("bridge needs --L and --s");
      Tube T;
      T.base = brg_base.empty() ? Point(c.bridge_dim) : Point(static_cast<int>(brg_base.size()));
      for (std::size_t i = 0; i < brg_base.size(); ++i) T.base.x[i] = brg_base[i];
      T.axis = brg_axis;
      T.L = brg_L;
      T.N = brg_N;
      if (brg_axis < 0 || brg_axis >= T.dim()) throw ConfigError("--axis out of range");
      const double xi = c.xi.front();
      Bridge b;
      try {
        if (brg_faces) {
          b = specialized_bridge(T, brg_s, xi);
          const BridgeReport r = validate_bridge(b, CuboidUnion::of_cuboid(T.left_face()),
                                                 CuboidUnion::of_cuboid(T.right_face()));
          if (!r.ok()) throw BridgeError(r.summary());
        } else {
          if (brg_C.empty() || brg_D.empty()) throw ConfigError("bridge needs --C and --D (or --faces / --corpus)");
          BridgeParams prm;
          prm.xi = xi;
          prm.m = c.m;
          b = general_bridge(read_points(brg_C), read_points(brg_D), T, brg_s, prm);
        }
      } catch (const BridgeError& e) {
        std::cerr << e.what() << '\n';
        return kValidation;
      }
      auto os = open_out(fs::path(c.out) / "bridge.json");
      write_bridge_json(os, b);
      if (!brg_svg.empty()) {
        auto svg = open_out(brg_svg);
        write_bridge_svg(svg, b, T.axis == 0 ? 1 : 0, T.base.x[T.axis == 0 ? 1 : 0]);
      }
      std::cout << json{{"J", b.J()}, {"boxes", b.box_count()}, {"holes", b.holes().size()}, {"m", b.m}}.dump()
                << '\n';
      return kOk;
    }

    if (*exc) {
      ExperimentConfig c = exc_cfg.resolve(exc);
      PointSet B = PointSet::from_box(ball(c.d, exc_B)), A, U;
      if (exc_rounded > 0) {
        B = PointSet::from_box(ball(c.d, exc_rounded));
        RoundedBoxes rb = rounded_boxes(c.d, exc_rounded);
        A = std::move(rb.A);
        U = std::move(rb.U);
      } else {
        A = PointSet::from_box(ball(c.d, exc_A));
        U = PointSet::from_box(ball(c.d, exc_U));
      }
      Coord need = 0;
      for (const auto& p : A) need = std::max(need, linf_norm(p));
      const Coord wr = std::max(c.window, need);
      SamplerOptions opt;
      opt.mode = PathMode::kFull;
      opt.truncation_radius = c.truncation;
      const InterlacementSampler sampler(Window::box(ball(c.d, wr)), opt);
      RngStream rng(c.seed, 0);
      const double u = *std::max_element(c.u.begin(), c.u.end());
      const InterlacementSample s = sampler.sample(u, rng);
      const Clothesline cl = build_clothesline(s, A, U);
      auto os = open_out(fs::path(c.out) / "clothesline.csv");
      write_clothesline_csv(os, cl, c.d);
      const InnerView v = restrict_to_inner(s, B, A, U, u);
      const bool identity = v.range_in_B == occupied_in(s, B, u);
      std::size_t live = 0;
      for (const auto& r : v.records) live += !r.cemetery;
      std::cout << json{{"records", cl.records.size()},
                        {"pending", cl.pending},
                        {"inner_records", v.records.size()},
                        {"inner_non_cemetery", live},
                        {"identity", identity}}
                       .dump()
                << '\n';
      return identity && cl.pending == 0 ? kOk : kValidation;
    }

    if (*swp) {
      const ExperimentConfig c = swp_cfg.resolve(swp);
      const SweepResult res = run_sweep(c);
      const fs::path out(c.out);
      {
        auto os = open_out(out / "tallies.csv");
        write_tallies_csv(os, res.tallies);
      }
      {
        auto os = open_out(out / "disconnection_weighted.csv");
        write_disconnection_csv(os, res.tallies, c.d);
      }
      {
        auto os = open_out(out / "uc.csv");
        write_uc_csv(os, res.tallies);
      }
      if (!res.class_rows.empty()) {
        auto os = open_out(out / "class_counts.csv");
        write_class_csv(os, res.class_rows);
      }
      {
        json meta{{"config", c.to_json()},
                  {"rng", std::string(RngStream::kAlgorithm)},
                  {"sampler_failures", res.sampler_failures},
                  {"seconds", res.wall_seconds}};
        if (c.gamma_M > 0) {
          json mr = json::array();
          for (Coord r : c.r) {
            bool of = false;
            const Coord M = m_of_r(static_cast<double>(r), c.gamma_M, &of);
            mr.push_back({{"r", r}, {"M_of_r", M}, {"overflow", of}});
            if (of) std::cerr << "warning: M(" << r << ") overflows at gamma_M = " << c.gamma_M << "\n";
          }
          meta["m_of_r"] = mr;
        }
        auto os = open_out(out / "run.json");
        os << meta.dump(2) << '\n';
      }
      std::cout << "wrote " << res.tallies.size() << " tallies to " << (out / "tallies.csv").string() << '\n';
      return kOk;
    }

    if (*plt) {
      std::ifstream in(plt_in);
      if (!in) throw ConfigError("cannot open " + plt_in);
      emit_plots(read_tallies_csv(in), plt_d, plt_out);
      return kOk;
    }

    std::cout << app.help();
    return kOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const SamplerFailureRate& e) {
    std::cerr << e.what() << '\n';
    return kSampler;
  } catch (const RejectionFailure& e) {
    std::cerr << e.what() << '\n';
    return kSampler;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
