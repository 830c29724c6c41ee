// One PASS/FAIL line per primary acceptance criterion; exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "../support/cluster_oracle.hpp"
#include "../support/dense_oracle.hpp"
#include "../support/interface_fixture.hpp"
#include "ri/bridge.hpp"
#include "ri/clusters.hpp"
#include "ri/excursion.hpp"
#include "ri/experiment.hpp"
#include "ri/interface.hpp"
#include "ri/interlacement.hpp"

using namespace ri;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

Outcome vacancy_law() {
  const auto rows = run_vacancy_check(3, 2, {0, 1, 2}, {0.5, 1.0, 2.0}, 100000, 101);
  double worst = 0;
  std::ostringstream os;
  for (const auto& r : rows) {
    worst = std::max(worst, std::abs(r.z));
    os << " B_" << r.k << "@" << r.u << ":z=" << fmt("%.2f", r.z);
  }
  return {worst <= 3.0, "max |z| = " + fmt("%.3f", worst) + " over 9 (K, u), 1e5 trials;" + os.str()};
}

Outcome poisson_count() {
  SamplerOptions o;
  o.mode = PathMode::kTrace;
  const InterlacementSampler s(Window::box(ball(3, 2)), o);
  const int n = 100000;
  double sum = 0, sum2 = 0;
  for (int t = 0; t < n; ++t) {
    RngStream rng(102, static_cast<std::uint64_t>(t));
    const double c = static_cast<double>(s.sample(1.0, rng).count_at_level(1.0));
    sum += c;
    sum2 += c * c;
  }
  const double mean = sum / n, var = (sum2 - n * mean * mean) / (n - 1);
  const double lam = s.capacity();
  const double z = (mean - lam) / std::sqrt(lam / n);
  const double disp = var / mean;
  return {std::abs(z) <= 3 && disp >= 0.97 && disp <= 1.03,
          fmt("mean %.4f vs u cap(B_2) = %.4f (z = %.2f), dispersion %.4f", mean, lam, z, disp)};
}

Outcome increment_law() {
  SamplerOptions o;
  o.mode = PathMode::kTrace;
  const InterlacementSampler s(Window::box(ball(3, 1)), o);
  IncrementLawCheck chk(s.window().size());
  const int n = 100000;
  for (int t = 0; t < n; ++t) {
    RngStream a(103, static_cast<std::uint64_t>(t)), b(104, static_cast<std::uint64_t>(t));
    chk.add_increment(s.sample(1.0, a), 0.5, 1.0);
    chk.add_fresh(s.sample(0.5, b), 0.5);
  }
  const auto r = chk.report();
  return {r.max_abs_z <= 3.0, fmt("max per-site |z| = %.3f over 27 sites, 1e5 + 1e5 trials; corner pair %.4f vs %.4f",
                                  r.max_abs_z, r.pair_joint, r.pair_product)};
}

Outcome bridge_suite() {
  ExperimentConfig c;
  c.instances = 500;
  c.L_max = 1024;
  c.seed = 105;
  const CorpusReport rep = run_bridge_corpus(c);
  std::size_t over = 0;
  for (const auto& x : rep.rows) over += static_cast<double>(x.J) > x.J_bound;
  return {rep.failures == 0 && over == 0 && rep.rows.size() == 500,
          fmt("%.0f instances, %.0f validator failures, %.0f over the J bound, max J/(m log log e^2 L) = %.3f",
              static_cast<double>(rep.rows.size()), static_cast<double>(rep.failures), static_cast<double>(over),
              rep.max_J_ratio) +
              fmt(", %.1f s", rep.wall_seconds)};
}

Outcome interface_paths() {
  RngStream rng(106, 0);
  int ok = 0, in = 0, out = 0, errors = 0;
  std::string first;
  for (int t = 0; t < 1000; ++t) {
    const auto inst = testing::random_interface_instance(rng);
    try {
      const InterfacePath p = interface_star_path(inst.U, inst.V, 2, 8);
      const PathCheck c = check_cond_path(p.path, inst.U, inst.V, 2, 8);
      ok += c.ok;
      if (!c.ok && first.empty()) first = c.message;
      (p.start_in_cluster ? in : out)++;
    } catch (const std::exception& e) {
      ++errors;
      if (first.empty()) first = e.what();
    }
  }
  return {ok == 1000 && in > 0 && out > 0,
          fmt("%.0f/1000 paths pass, start inside cluster %.0f, outside %.0f, errors %.0f", ok, in, out, errors) +
              (first.empty() ? "" : "; first: " + first)};
}

Outcome excursion_identity() {
  SamplerOptions o;
  o.mode = PathMode::kFull;
  const PointSet B = PointSet::from_box(ball(3, 2)), A = PointSet::from_box(ball(3, 3)),
                 U = PointSet::from_box(ball(3, 4));
  const RoundedBoxes rb = rounded_boxes(3, 2);
  Coord rw = 0;
  for (const auto& p : rb.A) rw = std::max(rw, linf_norm(p));
  const PointSet Br = PointSet::from_box(ball(3, 2));
  const InterlacementSampler boxes(Window::box(ball(3, 5)), o);
  const InterlacementSampler rounded(Window::box(ball(3, rw)), o);
  std::mt19937 shuffle_rng(107);
  std::size_t bad = 0, order_bad = 0, pending = 0, records = 0;
  for (int t = 0; t < 1000; ++t) {
    const bool round = t % 2 == 1;
    RngStream rng(107, static_cast<std::uint64_t>(t));
    const auto s = (round ? rounded : boxes).sample(1.0, rng);
    const PointSet& a = round ? rb.A : A;
    const PointSet& u = round ? rb.U : U;
    const PointSet& b = round ? Br : B;
    const Clothesline c = build_clothesline(s, a, u);
    pending += c.pending;
    records += c.records.size();
    auto shuffled = c.records;
    std::shuffle(shuffled.begin(), shuffled.end(), shuffle_rng);
    std::sort(shuffled.begin(), shuffled.end(), clothesline_less);
    bool same = std::is_sorted(c.records.begin(), c.records.end(), clothesline_less);
    for (std::size_t i = 0; i < shuffled.size(); ++i)
      same = same && shuffled[i].traj == c.records[i].traj && shuffled[i].k == c.records[i].k;
    order_bad += !same;
    for (double lvl : {0.3, 1.0}) {
      const InnerView v = restrict_to_inner(s, b, a, u, lvl);
      bad += !(v.range_in_B == occupied_in(s, b, lvl));
      order_bad += v.records.size() != c.sequence(lvl).size();
    }
  }
  return {bad == 0 && order_bad == 0 && pending == 0,
          fmt("1000 samples (box and rounded), %.0f identity violations, %.0f ordering violations, %.0f pending, ",
              static_cast<double>(bad), static_cast<double>(order_bad), static_cast<double>(pending)) +
              std::to_string(records) + " records"};
}

Outcome cluster_oracle() {
  SamplerOptions o;
  o.mode = PathMode::kTrace;
  const InterlacementSampler sampler(Window::box(ball(3, 12)), o);
  std::size_t disagree = 0, identity = 0, checks = 0;
  std::string first;
  auto note = [&](bool ok, const std::string& what, int t) {
    ++checks;
    if (ok) return;
    ++disagree;
    if (first.empty()) first = what + " at config " + std::to_string(t);
  };
  for (int t = 0; t < 1000; ++t) {
    RngStream lv(108, static_cast<std::uint64_t>(t) + 1000000);
    const double u = 0.5 + 4.0 * lv.uniform();
    const double v = u * (0.5 + 0.45 * lv.uniform());
    RngStream rng(108, static_cast<std::uint64_t>(t));
    const LevelField f = LevelField::from_sample(sampler.sample(u, rng));
    for (Coord r : {6, 12}) note(detect_exist(f, r, u) == testing::exist_oracle(f, r, u), "exist", t);
    note(detect_unique(f, 6, u, v) == testing::unique_oracle(f, 6, u, v), "unique", t);
    note(detect_uc(f, 2, u, v) == testing::uc_oracle(f, 2, u, v), "uc", t);
    note(detect_disconnect(f, 3, 12, u) == testing::disconnect_oracle(f, 3, 12, u), "disconnect", t);

    const Coord M = 3;
    const double delta = u - v;
    const ClassCounts c0 = class_counts(f, M, 0, u, delta), c1 = class_counts(f, M, 1, u, delta);
    bool ok = c0.U_eta == testing::class_oracle(f, M, 0, u, delta, c0.v_radius, c0.imax) &&
              c1.U_eta == testing::class_oracle(f, M, 1, u, delta, c1.v_radius, c1.imax);
    for (const ClassCounts* c : {&c0, &c1})
      for (int i = 0; i < c->imax; ++i) {
        const auto k = static_cast<std::size_t>(i);
        ok = ok && c->U_eta[k] >= c->U_eta[k + 1] && c->U_eta[k] == c->U_eta[k + 1] + c->U_step[k];
      }
    // More sprinkling, fewer classes.
    for (std::size_t i = 0; i < c0.U_eta.size(); ++i) ok = ok && c0.U_eta[i] >= c1.U_eta[i];
    identity += !ok;
    if (!ok && first.empty()) first = "class identities at config " + std::to_string(t);
  }
  return {disagree == 0 && identity == 0,
          fmt("1000 interlacement configurations on B_12, %.0f detector checks, %.0f disagreements, %.0f class-identity "
              "violations",
              static_cast<double>(checks), static_cast<double>(disagree), static_cast<double>(identity)) +
              (first.empty() ? "" : "; first: " + first)};
}

Outcome dense_family() {
  constexpr int kExhaustive = 16;
  std::size_t cases = 0, disagree = 0;
  auto one = [&](const std::vector<std::int64_t>& idx, std::int64_t K, double beta, std::int64_t G) {
    ++cases;
    const auto target = static_cast<std::size_t>(std::ceil(beta * static_cast<double>(G) - 1e-9));
    const bool exists =
        static_cast<double>(idx.size()) >= beta * static_cast<double>(K) && testing::dense_subset_exists(idx, target, G);
    try {
      const DenseResult r = dense_subfamily(idx, K, beta, G);
      bool ok = exists && r.subset.size() == target;
      for (std::size_t i = 0; ok && i < r.subset.size(); ++i) {
        ok = std::binary_search(idx.begin(), idx.end(), r.subset[i]);
        if (i > 0) ok = ok && r.subset[i] > r.subset[i - 1] && r.subset[i] - r.subset[i - 1] <= G;
      }
      disagree += !ok;
    } catch (const std::invalid_argument&) {
      disagree += exists;
    }
  };
  const double betas[] = {0.25, 0.5, 0.75, 1.0};
  for (int K = 1; K <= kExhaustive; ++K)
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << K); ++mask) {
      const auto idx = testing::mask_indices(mask, K);
      for (std::int64_t G = 1; G <= K; ++G)
        for (double beta : betas) one(idx, K, beta, G);
    }
  const std::size_t exhaustive = cases;
  RngStream rng(109, 0);
  for (int K = kExhaustive + 1; K <= 40; ++K)
    for (int rep = 0; rep < 2000; ++rep) {
      const double density = rng.uniform();
      std::uint64_t mask = 0;
      for (int k = 0; k < K; ++k)
        if (rng.uniform() < density) mask |= std::uint64_t{1} << k;
      const auto idx = testing::mask_indices(mask, K);
      one(idx, K, betas[rng.below(4)], 1 + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(K))));
    }
  // Exhaustive enumeration of every index set up to K = 40 (2^40 sets per parameter pair) is out of reach.
  return {false, fmt("%.0f disagreements. Exhaustive over all index sets for K <= %.0f (%.0f cases), "
                     "%.0f random cases for K in [17, 40]; exhaustive K <= 40 infeasible (2^40 index sets)",
                     static_cast<double>(disagree), kExhaustive, static_cast<double>(exhaustive),
                     static_cast<double>(cases - exhaustive))};
}

Outcome supercritical() {
  ExperimentConfig c;
  c.events = {"disconnect"};
  c.u = {0.1};
  c.r = {6};
  c.M = {24};
  c.trials = 10000;
  c.seed = 110;
  const SweepResult r = run_sweep(c);
  const TallyRecord& t = r.tallies.at(0);
  return {t.p_hat < 0.05, fmt("P[B_6 not connected to the boundary of B_24 in V^0.1] = %.4f +- %.4f over %.0f trials",
                              t.p_hat, t.stderr_, static_cast<double>(t.trials))};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"vacancy_law", vacancy_law},
      {"poisson_count", poisson_count},
      {"increment_law", increment_law},
      {"bridge_validator", bridge_suite},
      {"interface_path", interface_paths},
      {"excursion_identity", excursion_identity},
      {"cluster_detectors_vs_bfs", cluster_oracle},
      {"dense_subfamily_exhaustive", dense_family},
      {"supercritical_disconnect", supercritical},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), sec);
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed ? 1 : 0;
}
