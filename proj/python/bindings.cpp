#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "ri/bridge.hpp"
#include "ri/clusters.hpp"
#include "ri/excursion.hpp"
#include "ri/experiment.hpp"
#include "ri/interface.hpp"
#include "ri/interlacement.hpp"
#include "ri/potential.hpp"

namespace py = pybind11;
using namespace ri;

namespace {

Point to_point(const std::vector<Coord>& v) { return Point::from_vector(v); }

PointSet to_set(const std::vector<std::vector<Coord>>& pts) {
  std::vector<Point> v;
  v.reserve(pts.size());
  for (const auto& p : pts) v.push_back(to_point(p));
  return PointSet(std::move(v));
}

std::vector<std::vector<Coord>> from_points(const std::vector<Point>& pts) {
  std::vector<std::vector<Coord>> out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.push_back(p.to_vector());
  return out;
}

py::dict sample_dict(const InterlacementSample& s) {
  py::dict d;
  d["sites"] = from_points(s.window->sites().points());
  d["first_label"] = s.first_label;
  d["occupation"] = s.occupation;
  std::vector<double> labels;
  for (const auto& t : s.trajectories) labels.push_back(t.label);
  d["labels"] = labels;
  d["capacity"] = s.capacity;
  d["R"] = s.R;
  d["exact_return"] = s.exact_return;
  return d;
}

InterlacementSample draw(int d, Coord window, double u, std::uint64_t seed, std::uint64_t stream, const std::string& mode,
                         Coord truncation) {
  SamplerOptions o;
  if (mode != "trace" && mode != "full") throw std::invalid_argument("mode must be 'trace' or 'full'");
  o.mode = mode == "full" ? PathMode::kFull : PathMode::kTrace;
  o.truncation_radius = truncation;
  const InterlacementSampler s(Window::box(ball(d, window)), o);
  RngStream rng(seed, stream);
  return s.sample(u, rng);
}

std::string tallies_csv(const std::vector<TallyRecord>& t) {
  std::ostringstream os;
  write_tallies_csv(os, t);
  return os.str();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Random interlacements on Z^d: sampling, capacities, cluster events and bridge constructions";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<BridgeError>(m, "BridgeError", PyExc_RuntimeError);

  m.def("green", [](const std::vector<Coord>& x) {
    const Point p = to_point(x);
    return GreenTable::shared(p.d, static_cast<int>(std::max<Coord>(linf_norm(p), 1)))->at(p);
  }, py::arg("x"), "Green function of the simple random walk at x.");

  m.def("capacity", [](const std::vector<std::vector<Coord>>& pts) { return capacity(to_set(pts)); }, py::arg("points"));
  m.def("box_capacity", [](int d, Coord k) { return box_equilibrium_measure(ball(d, k)).capacity; }, py::arg("d"),
        py::arg("k"));
  m.def("vacancy_probability",
        [](const std::vector<std::vector<Coord>>& pts, double u) { return vacancy_probability(to_set(pts), u); },
        py::arg("points"), py::arg("u"));

  m.def("sample",
        [](int d, Coord window, double u, std::uint64_t seed, std::uint64_t stream, const std::string& mode,
           Coord truncation) { return sample_dict(draw(d, window, u, seed, stream, mode, truncation)); },
        py::arg("d") = 3, py::arg("window") = 2, py::arg("u") = 1.0, py::arg("seed") = 1, py::arg("stream") = 0,
        py::arg("mode") = "trace", py::arg("truncation") = 0,
        "One interlacement sample on the box B(0, window); labels up to u.");

  m.def("events",
        [](int d, Coord window, double u, double v, Coord r, Coord M, std::uint64_t seed, std::uint64_t stream) {
          const LevelField f = LevelField::from_sample(draw(d, window, u, seed, stream, "trace", 0));
          py::dict out;
          if (f.covers(r)) out["exist"] = detect_exist(f, r, u);
          if (f.covers(2 * r) && v < u) out["unique"] = detect_unique(f, r, u, v);
          if (f.covers(6 * M) && v < u) out["uc"] = detect_uc(f, M, u, v);
          if (f.covers(M) && r <= M) out["disconnect"] = detect_disconnect(f, r, M, u);
          return out;
        },
        py::arg("d") = 3, py::arg("window") = 12, py::arg("u") = 1.0, py::arg("v") = 0.9, py::arg("r") = 6,
        py::arg("M") = 2, py::arg("seed") = 1, py::arg("stream") = 0,
        "Cluster events on one sample; events whose boxes do not fit are omitted.");

  m.def("sweep", [](const std::string& config_json) {
    const ExperimentConfig c = ExperimentConfig::from_json(nlohmann::json::parse(config_json));
    return tallies_csv(run_sweep(c).tallies);
  }, py::arg("config_json"), "Runs a sweep and returns tallies.csv as text.");

  m.def("bridge_corpus", [](const std::string& config_json) {
    const ExperimentConfig c = ExperimentConfig::from_json(nlohmann::json::parse(config_json));
    const CorpusReport r = run_bridge_corpus(c);
    py::dict d;
    d["instances"] = r.rows.size();
    d["failures"] = r.failures;
    d["max_J_ratio"] = r.max_J_ratio;
    return d;
  }, py::arg("config_json"));

  m.def("faces_bridge",
        [](int d, int axis, Coord L, Coord N, double s, double xi) {
          Tube T;
          T.base = Point(d);
          T.axis = axis;
          T.L = L;
          T.N = N;
          const Bridge b = specialized_bridge(T, s, xi);
          const BridgeReport r =
              validate_bridge(b, CuboidUnion::of_cuboid(T.left_face()), CuboidUnion::of_cuboid(T.right_face()));
          py::dict out;
          out["J"] = b.J();
          out["boxes"] = b.box_count();
          out["ok"] = r.ok();
          out["J_bound"] = r.J_bound;
          return out;
        },
        py::arg("d") = 3, py::arg("axis") = 0, py::arg("L") = 64, py::arg("N") = 0, py::arg("s") = 64.0,
        py::arg("xi") = 0.6);

  m.def("interface_path",
        [](const std::vector<std::vector<Coord>>& U, const std::vector<std::vector<Coord>>& V, Coord n, Coord mm) {
          const PointSet Us = to_set(U), Vs = to_set(V);
          const InterfacePath p = interface_star_path(Us, Vs, n, mm);
          py::dict out;
          out["path"] = from_points(p.path);
          out["ok"] = check_cond_path(p.path, Us, Vs, n, mm).ok;
          out["start_in_cluster"] = p.start_in_cluster;
          return out;
        },
        py::arg("U"), py::arg("V"), py::arg("n"), py::arg("m"));

  m.def("dense_subfamily",
        [](std::vector<std::int64_t> idx, std::int64_t K, double beta, std::int64_t Gamma) {
          return dense_subfamily(std::move(idx), K, beta, Gamma).subset;
        },
        py::arg("indices"), py::arg("K"), py::arg("beta"), py::arg("Gamma"));

  m.def("m_of_r", [](double r, double gamma) { return m_of_r(r, gamma); }, py::arg("r"), py::arg("gamma"));
}
