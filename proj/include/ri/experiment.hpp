#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "ri/lattice.hpp"

namespace ri {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SamplerFailureRate : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  int d = 3;
  Coord window = 0;  // 0: smallest box the selected events need
  std::vector<double> u{1.0};
  double delta = 0.1;  // sprinkled level v = u - delta
  std::vector<std::string> events{"exist"};
  std::uint64_t trials = 100;
  std::uint64_t seed = 1;
  Coord truncation = 0;  // 0: sampler default
  std::string path_mode = "trace";
  std::string out = ".";
  double gamma_M = 0;
  std::vector<Coord> r{6};
  std::vector<Coord> M{24};
  int j = 0;            // class_counts stage
  Coord fe_radius = 1;  // finite-energy box B(0, fe_radius)
  Coord r0 = 1;
  unsigned threads = 1;
  // bridge corpus
  std::vector<double> xi{0.55, 0.6, 0.75};
  std::uint64_t instances = 500;
  Coord L_max = 1024;
  double m = 0;  // 0: default_m(xi)
  int bridge_dim = 3;
  int cluster_steps = 200;

  /// Unknown keys and out-of-range values raise ConfigError.
  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  void validate() const;
  Coord required_window() const;
};

ExperimentConfig load_config(const std::string& path);

inline const std::vector<std::string>& known_events() {
  static const std::vector<std::string> e{"exist",        "unique",        "uc", "disconnect",
                                          "class_counts", "finite_energy", "vacant_ball"};
  return e;
}

struct TallyRecord {
  std::string event;
  Coord r = 0, M = 0;
  double u = 0, v = 0;
  std::uint64_t trials = 0, successes = 0, failures_false = 0, sampler_failures = 0;
  double p_hat = 0, stderr_ = 0;
  double wall_seconds = 0;
  std::uint64_t seed = 0;
};

struct SweepResult {
  std::vector<TallyRecord> tallies;
  /// Mean U_i(eta_j) per (u, M), i = 0..floor(sqrt M); class_counts only.
  struct ClassRow {
    double u = 0;
    Coord M = 0;
    int j = 0, i = 0;
    double mean_U = 0;
  };
  std::vector<ClassRow> class_rows;
  std::uint64_t sampler_failures = 0;
  double wall_seconds = 0;
};

/// Coupled Monte Carlo over the configured grid; one sample per trial serves
/// every level. Throws SamplerFailureRate when more than 1% of trials fail.
SweepResult run_sweep(const ExperimentConfig& c);

void write_tallies_csv(std::ostream& os, const std::vector<TallyRecord>& t);
std::vector<TallyRecord> read_tallies_csv(std::istream& is);
/// Columns r, M, u, weighted_p, stderr with weight (M/r)^d.
void write_disconnection_csv(std::ostream& os, const std::vector<TallyRecord>& t, int d);
/// UC rows sorted by (u, M).
void write_uc_csv(std::ostream& os, const std::vector<TallyRecord>& t);
void write_class_csv(std::ostream& os, const std::vector<SweepResult::ClassRow>& rows);

/// Writes plot_data.csv, disconnection_curve.csv, uc_sweep.csv and
/// plot_script.txt into `dir`.
void emit_plots(const std::vector<TallyRecord>& t, int d, const std::string& dir);

// ---- vacancy law ----

struct VacancyRow {
  Coord k = 0;  // K = B_k
  double u = 0;
  std::uint64_t trials = 0, vacant = 0;
  double p_hat = 0, expected = 0, stderr_ = 0, z = 0;
};

/// P[B_k ⊆ V^u] from coupled samples on the window B_window against
/// exp(-u cap(B_k)) from the Green-matrix capacity.
std::vector<VacancyRow> run_vacancy_check(int d, Coord window, const std::vector<Coord>& ks,
                                          const std::vector<double>& us, std::uint64_t trials, std::uint64_t seed,
                                          unsigned threads = 1);
void write_vacancy_csv(std::ostream& os, const std::vector<VacancyRow>& rows);

// ---- bridge corpus ----

struct CorpusRow {
  std::uint64_t instance = 0;
  double xi = 0, s = 0, m = 0;
  int d = 0, axis = 0;
  Coord L = 0, N = 0;
  std::size_t J = 0, boxes = 0;
  double J_bound = 0, box_bound = 0;
  bool ok = false;
  std::string error;
};

struct CorpusReport {
  std::vector<CorpusRow> rows;
  std::size_t failures = 0;
  double max_J_ratio = 0;  // J / (m log log e^2 L)
  double wall_seconds = 0;
};

/// Instances cycle through c.xi; s is drawn in [s_min, 4 s_min] with
/// L in [2s, L_max], N in [0, 3L], and both endpoint sets are short random
/// walks started inside the tube.
CorpusReport run_bridge_corpus(const ExperimentConfig& c);
void write_corpus_csv(std::ostream& os, const CorpusReport& r);

}  // namespace ri
