// Python bindings for the hklab core. Profiles travel as float64 arrays of
// shape (n, d) (1-D input means d = 1); graphs as boolean (n, n) adjacency
// arrays with adjacency[i, j] true iff j is in N_i.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hk/async_engine.hpp"
#include "hk/experiment.hpp"
#include "hk/game.hpp"
#include "hk/hetero_engine.hpp"
#include "hk/spectral.hpp"
#include "hk/sync_engine.hpp"

namespace py = pybind11;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

hk::OpinionProfile to_profile(const Array& a) {
  if (a.ndim() == 1) {
    std::vector<double> v(a.data(), a.data() + a.shape(0));
    return hk::OpinionProfile::scalar(v);
  }
  if (a.ndim() != 2) throw hk::SizeError("profile must be a 1-D or 2-D array");
  hk::Matrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
  std::copy(a.data(), a.data() + a.size(), m.row(0).begin());
  return hk::OpinionProfile(std::move(m));
}

Array to_array(const hk::Matrix& m) {
  Array out({static_cast<py::ssize_t>(m.rows()), static_cast<py::ssize_t>(m.cols())});
  std::copy(m.values().begin(), m.values().end(), out.mutable_data());
  return out;
}

Array to_array(const hk::OpinionProfile& x) { return to_array(x.matrix()); }

Array to_array(const std::vector<hk::OpinionProfile>& profiles) {
  const auto t = static_cast<py::ssize_t>(profiles.size());
  const auto n = static_cast<py::ssize_t>(profiles.front().agents());
  const auto d = static_cast<py::ssize_t>(profiles.front().dimension());
  Array out({t, n, d});
  double* dst = out.mutable_data();
  for (const hk::OpinionProfile& x : profiles) dst = std::copy(x.matrix().values().begin(), x.matrix().values().end(), dst);
  return out;
}

hk::CommunicationGraph to_graph(const py::array_t<bool, py::array::c_style | py::array::forcecast>& adj) {
  if (adj.ndim() != 2 || adj.shape(0) != adj.shape(1)) throw hk::SizeError("adjacency must be a square matrix");
  const auto n = static_cast<std::size_t>(adj.shape(0));
  hk::CommunicationGraph g(n);
  const bool* p = adj.data();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (p[i * n + j]) g.add_observation(i, j);
  return g;
}

py::array_t<bool> graph_array(const hk::CommunicationGraph& g) {
  const auto n = static_cast<py::ssize_t>(g.size());
  py::array_t<bool> out({n, n});
  bool* p = out.mutable_data();
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = 0; j < g.size(); ++j) p[i * g.size() + j] = g.observes(i, j);
  return out;
}

hk::ConfidenceBounds to_bounds(const std::vector<double>& eps, std::size_t n) {
  if (eps.size() == 1) return hk::ConfidenceBounds::uniform(n, eps.front());
  return hk::ConfidenceBounds(eps);
}

hk::Scheduler to_scheduler(const std::string& kind, std::uint64_t seed, const std::vector<std::size_t>& script) {
  if (kind == "uniform") return hk::Scheduler::uniform(seed);
  if (kind == "roundrobin") return hk::Scheduler::round_robin(0);
  if (kind == "scripted") return hk::Scheduler::scripted(script);
  throw hk::DomainError("scheduler must be 'uniform', 'roundrobin' or 'scripted'");
}

py::dict audit_dict(const hk::AuditReport& r) {
  py::dict d;
  d["passed"] = r.passed();
  d["checks"] = r.checks;
  d["violations"] = r.violations.size();
  d["worst_margin"] = r.worst_margin;
  return d;
}

}  // namespace

PYBIND11_MODULE(_hklab, m) {
  m.doc() = "Bounded-confidence opinion dynamics: engines, game quantities and spectral audits";

  m.def("build_neighborhoods", [](const Array& x, const std::vector<double>& eps) {
    const hk::OpinionProfile p = to_profile(x);
    return graph_array(hk::build_neighborhoods(p, to_bounds(eps, p.agents())));
  }, py::arg("x"), py::arg("eps"), "Adjacency with [i, j] true iff |x_i - x_j| <= eps_i.");
  m.def("connected_components", [](const py::array_t<bool>& adj) { return hk::connected_components(to_graph(adj)); },
        py::arg("adjacency"));
  m.def("set_diameter", [](const Array& p) { return hk::set_diameter(to_profile(p).matrix()); }, py::arg("points"));
  m.def("hull_distance", [](const Array& p, const Array& q) {
    return hk::hull_distance(to_profile(p).matrix(), to_profile(q).matrix());
  }, py::arg("p"), py::arg("q"));
  m.def("is_steady_state", [](const Array& x, const std::vector<double>& eps, double tol) {
    const hk::OpinionProfile p = to_profile(x);
    return hk::is_steady_state(p, to_bounds(eps, p.agents()), tol);
  }, py::arg("x"), py::arg("eps"), py::arg("tol") = hk::kCoincidenceTol);

  m.def("sync_matrix", [](const Array& x, double eps) { return to_array(hk::sync_matrix(to_profile(x), eps).matrix()); },
        py::arg("x"), py::arg("eps"));
  m.def("sync_step", [](const Array& x, double eps) { return to_array(hk::sync_step(to_profile(x), eps)); },
        py::arg("x"), py::arg("eps"));
  m.def("lyapunov_V", [](const Array& x, double eps) { return hk::lyapunov_V(to_profile(x), eps); },
        py::arg("x"), py::arg("eps"));
  m.def("run_sync", [](const Array& x, double eps, std::uint64_t cap) {
    hk::SyncOptions options;
    options.cap = cap;
    const hk::SyncRunTrace t = hk::run_sync(to_profile(x), eps, options);
    std::vector<double> v;
    for (const auto& s : t.steps) v.push_back(s.lyapunov);
    const hk::LyapunovAudit lyap = hk::lyapunov_decrease_audit(t);
    py::dict d;
    d["profiles"] = to_array(t.profiles);
    d["V"] = v;
    d["T"] = t.termination_time;
    d["complete"] = t.complete;
    d["merges"] = t.events.merge_events.size();
    d["singleton_counts"] = t.events.singleton_counts;
    d["singleton_accumulator"] = t.singleton_accumulator;
    d["singleton_bound_ok"] = hk::singleton_bound_audit(t);
    d["lyapunov"] = audit_dict(lyap.monotone);
    d["decrease_floor"] = audit_dict(lyap.floor);
    d["spectral_chain_ok"] = hk::spectral_chain_audit(t).passed();
    return d;
  }, py::arg("x"), py::arg("eps"), py::arg("cap") = 0, "Synchronous run to exact termination (cap 0: default).");

  m.def("async_step", [](const Array& x, double eps, std::size_t i) {
    return to_array(hk::async_step(to_profile(x), eps, i));
  }, py::arg("x"), py::arg("eps"), py::arg("i"));
  m.def("is_delta_equilibrium", [](const Array& x, double eps, double delta) -> py::object {
    const auto p = hk::is_delta_equilibrium(to_profile(x), eps, delta);
    if (!p) return py::none();
    py::dict d;
    d["clusters"] = p->clusters;
    d["diameters"] = p->diameters;
    d["hull_distances"] = to_array(p->hull_distances);
    return std::move(d);
  }, py::arg("x"), py::arg("eps"), py::arg("delta"), "Cluster partition, or None when not a delta-equilibrium.");
  m.def("run_async", [](const Array& x, double eps, double delta, const std::string& scheduler, std::uint64_t seed,
                        const std::vector<std::size_t>& script, std::uint64_t cap) {
    hk::AsyncOptions options;
    options.cap = cap;
    const hk::AsyncRunTrace t = hk::run_async(to_profile(x), eps, to_scheduler(scheduler, seed, script), delta, options);
    py::dict d;
    d["steps"] = t.steps;
    d["complete"] = t.complete;
    d["hitting_time"] = t.hitting_time ? py::cast(*t.hitting_time) : py::none();
    d["updaters"] = t.updaters;
    d["U"] = t.potentials;
    d["gain_floors"] = t.gain_floors;
    d["switch_times"] = t.events.switch_times;
    d["final"] = to_array(t.final_profile);
    return d;
  }, py::arg("x"), py::arg("eps"), py::arg("delta"), py::arg("scheduler") = "uniform", py::arg("seed") = 0,
     py::arg("script") = std::vector<std::size_t>{}, py::arg("cap") = hk::kDefaultAsyncCap);
  m.def("monte_carlo_hitting", [](std::size_t n, std::size_t d, double eps, double delta, std::size_t trials,
                                  std::uint64_t seed, const std::string& generator, std::size_t workers) {
    hk::GeneratorSpec spec;
    spec.name = generator;
    hk::MonteCarloConfig c;
    c.n = n;
    c.d = d;
    c.eps = eps;
    c.delta = delta;
    c.trials = trials;
    c.seed = seed;
    c.workers = workers;
    c.generator = [spec, n, d](std::uint64_t s) { return hk::generate_initial(spec, n, d, s).profile; };
    const hk::MonteCarloSummary s = hk::monte_carlo_hitting(c);
    py::dict out;
    out["mean_hit"] = s.mean_hit;
    out["max_hit"] = s.max_hit;
    out["mean_switches"] = s.mean_switches;
    out["max_switches"] = s.max_switches;
    out["incomplete"] = s.incomplete;
    out["bound_hit"] = s.bound_hit;
    out["bound_switches"] = s.bound_switches;
    out["all_within_bounds"] = s.all_within_bounds;
    return out;
  }, py::arg("n"), py::arg("d"), py::arg("eps"), py::arg("delta"), py::arg("trials"), py::arg("seed"),
     py::arg("generator") = "uniform-box", py::arg("workers") = 1);

  m.def("utility", [](const Array& x, double eps, std::size_t i) { return hk::utility(hk::GameState(to_profile(x), eps), i); },
        py::arg("x"), py::arg("eps"), py::arg("i"));
  m.def("potential", [](const Array& x, double eps) { return hk::potential(hk::GameState(to_profile(x), eps)); },
        py::arg("x"), py::arg("eps"));
  m.def("best_response", [](const Array& x, double eps, std::size_t i) {
    return hk::best_response(hk::GameState(to_profile(x), eps), i);
  }, py::arg("x"), py::arg("eps"), py::arg("i"));
  m.def("is_nash", [](const Array& x, double eps, double tol) { return hk::is_nash(hk::GameState(to_profile(x), eps), tol); },
        py::arg("x"), py::arg("eps"), py::arg("tol") = hk::kNashTol);
  m.def("team_offset", [](const Array& x, double eps, std::size_t i) {
    return hk::team_offset(hk::GameState(to_profile(x), eps), i);
  }, py::arg("x"), py::arg("eps"), py::arg("i"));

  m.def("laplacian", [](const py::array_t<bool>& adj) { return to_array(hk::laplacian(to_graph(adj)).matrix()); },
        py::arg("adjacency"));
  m.def("eigenvalues", [](const Array& a) { return hk::symmetric_eigenvalues(hk::SymmetricMatrix(to_profile(a).matrix())); },
        py::arg("matrix"), "Ascending eigenvalues of a symmetric matrix (cyclic Jacobi).");
  m.def("lambda2", [](const Array& a) { return hk::lambda2(hk::SymmetricMatrix(to_profile(a).matrix())); },
        py::arg("matrix"));
  m.def("isoperimetric", [](const py::array_t<bool>& adj) { return hk::isoperimetric(to_graph(adj)); },
        py::arg("adjacency"));
  m.def("cheeger_audit", [](const py::array_t<bool>& adj) {
    const hk::CheegerAudit a = hk::cheeger_audit(to_graph(adj));
    py::dict d;
    d["phi"] = a.phi;
    d["lambda2"] = a.lambda2;
    d["max_degree"] = a.max_degree;
    d["lower_ok"] = a.lower_ok;
    d["upper_ok"] = a.upper_ok;
    d["floor_ok"] = a.floor_ok;
    d["fiedler_ok"] = a.fiedler_ok;
    return d;
  }, py::arg("adjacency"));
  m.def("factorization_residual", [](const Array& x, double eps) { return hk::factorization_residual(to_profile(x), eps); },
        py::arg("x"), py::arg("eps"));
  m.def("scrambling_coefficient", [](const Array& c) { return hk::scrambling_coefficient(to_profile(c).matrix()); },
        py::arg("matrix"));
  m.def("consensus_residual", [](const Array& x) { return hk::consensus_residual(to_profile(x)); }, py::arg("x"));

  m.def("hetero_sync_step", [](const Array& x, const std::vector<double>& eps) {
    const hk::OpinionProfile p = to_profile(x);
    return to_array(hk::hetero_sync_step(p, to_bounds(eps, p.agents())));
  }, py::arg("x"), py::arg("eps"));
  m.def("run_hetero", [](const Array& x, const std::vector<double>& eps, double movement_tol, std::uint64_t cap) {
    const hk::OpinionProfile p = to_profile(x);
    hk::HeteroOptions options;
    options.cap = cap;
    options.movement_tol = movement_tol;
    const hk::HeteroRunTrace t = hk::run_hetero(p, to_bounds(eps, p.agents()), options);
    const hk::SilenceReport s = hk::silence_report(t);
    py::dict d;
    d["profiles"] = to_array(t.profiles);
    d["steps"] = t.steps;
    d["status"] = hk::to_string(t.status);
    d["finite_termination"] = s.finite_termination;
    d["max_silence_streak"] = s.max_streak;
    d["T_star"] = s.global_max;
    return d;
  }, py::arg("x"), py::arg("eps"), py::arg("movement_tol") = hk::kDefaultMovementTol, py::arg("cap") = 10000);

  m.def("generate_initial", [](const std::string& name, std::size_t n, std::size_t d, std::uint64_t seed) {
    hk::GeneratorSpec spec;
    spec.name = name;
    return to_array(hk::generate_initial(spec, n, d, seed).profile);
  }, py::arg("name"), py::arg("n") = 0, py::arg("d") = 1, py::arg("seed") = 0);
}
