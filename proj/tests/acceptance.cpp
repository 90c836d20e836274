// Acceptance checks, one line per criterion:
//
//   hk_acceptance          run all criteria
//   hk_acceptance 3 5      run the listed criteria
//
// Exit status is 0 iff every requested criterion passed.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hk/async_engine.hpp"
#include "hk/experiment.hpp"
#include "hk/game.hpp"
#include "hk/hetero_engine.hpp"
#include "hk/spectral.hpp"
#include "hk/sync_engine.hpp"
#include "oracles.hpp"

namespace {

using hk::ConfidenceBounds;
using hk::OpinionProfile;

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// The synchronous suite shared by criteria 2 to 4: 100 seeded uniform-box runs
// over n in {5, 10, 25, 50} and d in {1, 2, 3}, eps drawn per run.
struct SuiteRun {
  std::size_t n, d;
  double eps;
  hk::SyncRunTrace trace;
};

const std::vector<SuiteRun>& sync_suite(double* build_seconds = nullptr) {
  static std::vector<SuiteRun> runs;
  static double elapsed = 0.0;
  if (runs.empty()) {
    const auto start = std::chrono::steady_clock::now();
    const std::size_t ns[] = {5, 10, 25, 50};
    std::mt19937_64 eps_rng(20240601);
    std::uniform_real_distribution<double> eps_dist(0.15, 0.5);
    for (std::size_t r = 0; r < 100; ++r) {
      const std::size_t n = ns[r % 4], d = 1 + (r / 4) % 3;
      const double eps = eps_dist(eps_rng);
      hk::GeneratorSpec spec;
      const auto x = hk::generate_initial(spec, n, d, hk::derive_seed(2024, r, 0)).profile;
      runs.push_back({n, d, eps, hk::run_sync(x, eps)});
    }
    elapsed = seconds_since(start);
  }
  if (build_seconds) *build_seconds = elapsed;
  return runs;
}

Outcome example_trajectory() {
  const auto start = std::chrono::steady_clock::now();
  const auto s = hk::three_agent_example();
  hk::HeteroOptions options;
  options.cap = 10'000;
  options.movement_tol = 0.0;
  const auto trace = hk::run_hetero(s.profile, s.bounds, options);
  double worst = 0.0;
  bool ends_exact = trace.profiles.size() > 25;
  for (std::size_t t = 0; t <= 25 && t < trace.profiles.size(); ++t) {
    const auto& x = trace.profiles[t];
    worst = std::max(worst, std::fabs(x(1, 0) - std::pow(3.0, -static_cast<double>(t + 1))));
    ends_exact = ends_exact && x(0, 0) == -1.0 && x(2, 0) == 1.0;
  }
  const bool exact_termination = trace.terminated();
  const double secs = seconds_since(start);
  const bool ok = worst <= 1e-12 && ends_exact && !exact_termination && secs < 1.0;
  return {ok, fmt("max |x2(t) - 3^-(t+1)| = %.3g over t<=25 (tol 1e-12), ends exact: %s, status %s after %zu steps "
                  "(finite termination: %s), %.3f s (limit 1 s)",
                  worst, ends_exact ? "yes" : "no", hk::to_string(trace.status).c_str(), trace.steps,
                  exact_termination ? "yes" : "no", secs)};
}

Outcome lyapunov_suite() {
  double build = 0.0;
  const auto& runs = sync_suite(&build);
  std::size_t steps = 0, failures = 0;
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& r : runs) {
    const auto audit = hk::lyapunov_decrease_audit(r.trace).monotone;
    steps += r.trace.termination_time;
    failures += audit.violations.size();
    worst = std::min(worst, audit.worst_margin);
  }
  const bool ok = failures == 0 && build < 30.0;
  return {ok, fmt("%zu runs, %zu steps, %zu violations, tightest margin %.3g (tol 1e-9), suite %.2f s (limit 30 s)",
                  runs.size(), steps, failures, worst, build)};
}

Outcome termination_machinery() {
  const auto& runs = sync_suite();
  std::size_t components = 0, floor_bad = 0, fact_bad = 0, qfloor_bad = 0, qvl_bad = 0, resid_bad = 0;
  std::size_t lfloor_bad = 0, move_bad = 0, incomplete = 0, floor_checks = 0;
  double max_ratio = 0.0;
  for (const auto& r : runs) {
    const auto lyap = hk::lyapunov_decrease_audit(r.trace).floor;
    floor_checks += lyap.checks;
    floor_bad += lyap.violations.size();
    const auto chain = hk::spectral_chain_audit(r.trace);
    components += chain.components_checked;
    fact_bad += chain.factorization.violations.size();
    qfloor_bad += chain.q_floor.violations.size();
    qvl_bad += chain.q_vs_laplacian.violations.size();
    resid_bad += chain.residual.violations.size();
    lfloor_bad += chain.laplacian_floor.violations.size();
    move_bad += chain.movement.violations.size();
    if (!r.trace.complete) ++incomplete;
    max_ratio = std::max(max_ratio, static_cast<double>(r.trace.termination_time) / hk::termination_bound(r.n));
  }
  const bool ok = floor_bad + fact_bad + qfloor_bad + qvl_bad + resid_bad == 0 && incomplete == 0;
  return {ok, fmt("%zu component-steps: decrease floor %zu/%zu bad, factorization %zu, lambda2(Q) floor %zu, "
                  "Q vs L %zu, residual %zu bad; [info: lambda2(L) floor %zu, movement %zu bad]; incomplete runs %zu, "
                  "max T/(n^8+n) = %.3g",
                  components, floor_bad, floor_checks, fact_bad, qfloor_bad, qvl_bad, resid_bad, lfloor_bad, move_bad,
                  incomplete, max_ratio)};
}

Outcome singleton_suite() {
  const auto& runs = sync_suite();
  std::size_t acc_bad = 0, merge_bad = 0, max_merges = 0;
  double max_ratio = 0.0;
  for (const auto& r : runs) {
    if (!hk::singleton_bound_audit(r.trace)) ++acc_bad;
    const std::size_t merges = r.trace.events.merge_events.size();
    if (merges > r.n) ++merge_bad;
    max_merges = std::max(max_merges, merges);
    max_ratio = std::max(max_ratio, r.trace.singleton_accumulator / (8.0 * std::pow(static_cast<double>(r.n), 6)));
  }
  return {acc_bad == 0 && merge_bad == 0,
          fmt("%zu runs: accumulator bound violated %zu times (max accumulator/8n^6 = %.3g), merge count > n %zu "
              "times (max merges %zu)",
              runs.size(), acc_bad, max_ratio, merge_bad, max_merges)};
}

Outcome cheeger_suite() {
  const auto start = std::chrono::steady_clock::now();
  std::vector<oracle::Adjacency> graphs;
  std::mt19937_64 rng(5150);
  std::uniform_int_distribution<std::size_t> size(2, 10);
  std::uniform_real_distribution<double> density(0.15, 0.9);
  for (int k = 0; k < 500; ++k) graphs.push_back(oracle::random_connected_graph(rng, size(rng), density(rng)));
  for (std::size_t n = 2; n <= 12; ++n) {
    graphs.push_back(oracle::path_graph(n));
    if (n >= 3) graphs.push_back(oracle::cycle_graph(n));
    graphs.push_back(oracle::complete_graph(n));
  }

  std::size_t lower_bad = 0, upper_bad = 0, floor_bad = 0, nphi_bad = 0, solver_bad = 0;
  std::string first_upper;
  double worst_solver = 0.0;
  for (std::size_t k = 0; k < graphs.size(); ++k) {
    const auto a = hk::cheeger_audit(oracle::to_graph(graphs[k]));
    lower_bad += a.lower_ok ? 0 : 1;
    floor_bad += a.floor_ok ? 0 : 1;
    nphi_bad += a.fiedler_ok ? 0 : 1;
    if (!a.upper_ok) {
      if (upper_bad == 0)
        first_upper = fmt("n=%zu lambda2=%.6f 2*phi=%.6f", a.n, a.lambda2, 2.0 * a.phi);
      ++upper_bad;
    }
    const double diff = std::fabs(a.lambda2 - oracle::rayleigh_lambda2(oracle::laplacian(graphs[k]), k + 1));
    worst_solver = std::max(worst_solver, diff);
    if (diff > 1e-6) ++solver_bad;
  }
  const double secs = seconds_since(start);
  const bool ok = lower_bad + upper_bad + floor_bad + solver_bad == 0 && secs < 60.0;
  return {ok, fmt("%zu graphs: lower bound %zu bad, upper bound lambda2 <= 2 phi %zu bad (first: %s), lambda2 >= 2/n^2 "
                  "%zu bad, Rayleigh cross-check worst %.2g (tol 1e-6, %zu bad); [info: lambda2 <= n phi %zu bad]; "
                  "%.2f s (limit 60 s)",
                  graphs.size(), lower_bad, upper_bad, first_upper.empty() ? "none" : first_upper.c_str(), floor_bad,
                  worst_solver, solver_bad, nphi_bad, secs)};
}

Outcome game_identities() {
  std::mt19937_64 rng(6006);
  std::uniform_int_distribution<std::size_t> size(1, 8), dim(1, 3);
  std::uniform_real_distribution<double> eps_dist(0.1, 0.6);
  double sum_err = 0.0, v_err = 0.0, team_err = 0.0, gain_margin = std::numeric_limits<double>::infinity();
  std::size_t br_bad = 0, gain_bad = 0;
  for (int k = 0; k < 1000; ++k) {
    const std::size_t n = size(rng), d = dim(rng);
    const double eps = eps_dist(rng);
    const auto x = oracle::random_profile(rng, n, d);
    const hk::GameState s(x, eps);
    const double u = hk::potential(s);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += hk::utility(s, i);
    sum_err = std::max(sum_err, std::fabs(u - sum));
    v_err = std::max(v_err, std::fabs(u - (static_cast<double>(n * (n - 1)) * eps * eps - hk::lyapunov_V(x, eps))));
    for (std::size_t i = 0; i < n; ++i) {
      team_err = std::max(team_err, std::fabs(2.0 * hk::utility(s, i) + hk::team_offset(s, i) - u));
      const auto br = hk::best_response(s, i);
      const auto next = hk::async_step(x, eps, i);
      if (!std::equal(br.begin(), br.end(), next.opinion(i).begin())) ++br_bad;
      const auto g = hk::potential_gain_audit(s, i);
      gain_margin = std::min(gain_margin, g.gain - g.floor);
      if (!(g.gain >= g.floor - 1e-9)) ++gain_bad;
    }
  }
  const bool ok = sum_err <= 1e-9 && v_err <= 1e-9 && team_err <= 1e-9 && br_bad == 0 && gain_bad == 0;
  return {ok, fmt("1000 states: |U - sum U_i| <= %.2g, |U - (n(n-1)eps^2 - V)| <= %.2g, |2U_i + beta - U| <= %.2g "
                  "(tol 1e-9); best response mismatches %zu; gain below floor %zu (tightest margin %.3g)",
                  sum_err, v_err, team_err, br_bad, gain_bad, gain_margin)};
}

OpinionProfile constructed_equilibrium(std::mt19937_64& rng, double eps, std::size_t d) {
  std::uniform_int_distribution<std::size_t> clusters(1, 4), members(1, 3);
  std::uniform_real_distribution<double> extra(0.01, 0.5), jitter(0.0, 1.0);
  std::vector<std::vector<double>> rows;
  double position = 0.0;
  const std::size_t m = clusters(rng);
  for (std::size_t c = 0; c < m; ++c) {
    std::vector<double> point(d, 0.0);
    point[0] = position;
    for (std::size_t k = 1; k < d; ++k) point[k] = jitter(rng);
    for (std::size_t j = members(rng); j > 0; --j) rows.push_back(point);
    position += eps + 1.0 + extra(rng);  // separation exceeds eps in every coordinate layout
  }
  return OpinionProfile::from_rows(rows);
}

Outcome nash_agreement() {
  std::mt19937_64 rng(7007);
  const double eps = 0.3;
  std::size_t disagreements = 0, nash_count = 0, total = 0;
  auto check = [&](const OpinionProfile& x) {
    const bool nash = hk::is_nash(hk::GameState(x, eps));
    const bool steady = hk::is_steady_state(x, ConfidenceBounds::uniform(x.agents(), eps));
    disagreements += nash != steady ? 1 : 0;
    nash_count += nash ? 1 : 0;
    ++total;
  };
  std::uniform_int_distribution<std::size_t> size(1, 8), dim(1, 3);
  for (int k = 0; k < 1000; ++k) check(oracle::random_profile(rng, size(rng), dim(rng), 3.0));
  std::size_t constructed_nash = 0;
  for (int k = 0; k < 100; ++k) {
    const auto x = constructed_equilibrium(rng, eps, dim(rng));
    const std::size_t before = nash_count;
    check(x);
    constructed_nash += nash_count - before;
  }
  std::size_t near_miss_nash = 0;
  for (int k = 0; k < 100; ++k) {
    auto x = constructed_equilibrium(rng, eps, dim(rng));
    std::vector<std::vector<double>> rows = oracle::rows_of(x);
    const double last = rows.back()[0];
    std::vector<double> neighbor;
    for (const auto& r : rows)
      if (r[0] < last && (neighbor.empty() || r[0] > neighbor[0])) neighbor = r;
    if (k % 2 == 0 || neighbor.empty()) {
      // A twin placed 1e-6 away: distinct yet within eps.
      auto twin = rows.back();
      twin[0] += 1e-6;
      rows.push_back(twin);
    } else {
      // Move the last cluster to eps - 1e-6 from its neighbor: still distinct,
      // now mutually visible.
      for (auto& r : rows)
        if (r[0] == last) {
          r = neighbor;
          r[0] += eps - 1e-6;
        }
    }
    const std::size_t before = nash_count;
    check(OpinionProfile::from_rows(rows));
    near_miss_nash += nash_count - before;
  }
  return {disagreements == 0,
          fmt("%zu profiles (1000 random, 100 constructed, 100 near misses): %zu disagreements; constructed "
              "equilibria judged Nash %zu/100, near misses judged Nash %zu/100",
              total, disagreements, constructed_nash, near_miss_nash)};
}

Outcome monte_carlo_suite() {
  const auto start = std::chrono::steady_clock::now();
  const double eps = 0.3;
  bool ok = true;
  std::ostringstream detail;
  for (std::size_t n : {3u, 5u, 8u}) {
    for (std::size_t d : {1u, 2u}) {
      std::vector<double> deltas{eps / 10.0};
      if (d == 1) deltas.push_back(eps / static_cast<double>(n));
      for (double delta : deltas) {
        hk::MonteCarloConfig c;
        c.n = n;
        c.d = d;
        c.eps = eps;
        c.delta = delta;
        c.trials = 200;
        c.seed = 8008 + 10 * n + d;
        c.generator = [n, d](std::uint64_t s) { return hk::generate_initial(hk::GeneratorSpec{}, n, d, s).profile; };
        const auto m = hk::monte_carlo_hitting(c);
        bool switches_ok = true;
        for (const auto& t : m.per_trial) switches_ok = switches_ok && static_cast<double>(t.switches) <= m.bound_switches;
        bool cell_ok = m.incomplete == 0 && m.mean_hit <= m.bound_hit && static_cast<double>(m.max_hit) <= m.bound_hit &&
                       switches_ok && m.gains_ok;
        if (detail.tellp() > 0) detail << ' ';
        detail << fmt("n=%zu d=%zu delta=%.3g: mean %.1f max %zu slack %.3g sw-slack %.3g", n, d, delta, m.mean_hit,
                      m.max_hit, m.bound_hit / std::max(m.mean_hit, 1.0),
                      m.bound_switches / std::max<double>(static_cast<double>(m.max_switches), 1.0));
        if (m.scalar_case) {
          const bool scalar_ok = m.mean_hit <= m.bound_scalar;
          cell_ok = cell_ok && scalar_ok;
          detail << fmt(" scalar-slack %.3g", m.bound_scalar / std::max(m.mean_hit, 1.0));
        }
        if (!cell_ok) detail << " [FAILED]";
        detail << ';';
        ok = ok && cell_ok;
      }
    }
  }
  const double secs = seconds_since(start);
  ok = ok && secs < 300.0;
  detail << fmt(" %.2f s (limit 300 s)", secs);
  return {ok, detail.str()};
}

Outcome two_agent_asymptotics() {
  // eps = 1 keeps every midpoint exactly representable, so the recursion is
  // checked without rounding; the non-dyadic case is reported for reference.
  auto measure = [](double eps, std::size_t* first_off) {
    OpinionProfile x = OpinionProfile::scalar({0.0, eps / 2.0});
    hk::Scheduler sched = hk::Scheduler::round_robin();
    double worst = 0.0;
    bool positive = true;
    *first_off = 0;
    for (std::size_t k = 1; k <= 50; ++k) {
      x = hk::async_step(x, eps, sched.next(2));
      const double gap = std::fabs(x(1, 0) - x(0, 0));
      const double want = (eps / 2.0) * std::ldexp(1.0, -static_cast<int>(k));
      const double rel = std::fabs(gap - want) / want;
      if (rel > 1e-9 && *first_off == 0) *first_off = k;
      worst = std::max(worst, rel);
      positive = positive && gap > 0.0;
    }
    return std::pair{worst, positive};
  };
  std::size_t off1 = 0, off2 = 0;
  const auto [worst, positive] = measure(1.0, &off1);
  const auto [worst03, positive03] = measure(0.3, &off2);
  const bool ok = worst <= 1e-9 && positive;
  return {ok, fmt("eps=1, x=(0, 0.5): max relative error %.3g over k<=50 (tol 1e-9), gap always > 0: %s; "
                  "[info: eps=0.3 max relative error %.3g, first k above 1e-9: %zu, gap > 0: %s]",
                  worst, positive ? "yes" : "no", worst03, off2, positive03 ? "yes" : "no")};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome reproducibility() {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "hk_acceptance_repro";
  fs::remove_all(root);
  std::vector<hk::ExperimentConfig> configs(3);
  configs[0].mode = hk::Mode::mc;
  configs[0].n = 6;
  configs[0].d = 2;
  configs[0].eps = {0.3};
  configs[0].delta = 0.03;
  configs[0].trials = 100;
  configs[0].seed = 1234;
  configs[1].mode = hk::Mode::sync;
  configs[1].n = 20;
  configs[1].d = 2;
  configs[1].eps = {0.25};
  configs[1].seed = 99;
  configs[2].mode = hk::Mode::async;
  configs[2].n = 8;
  configs[2].d = 1;
  configs[2].eps = {0.3};
  configs[2].delta = 0.03;
  configs[2].seed = 5;
  std::size_t identical = 0;
  std::string mismatch;
  for (std::size_t c = 0; c < configs.size(); ++c) {
    std::string text[2];
    for (int rep = 0; rep < 2; ++rep) {
      auto cfg = configs[c];
      cfg.out_dir = (root / (std::to_string(c) + "_" + std::to_string(rep))).string();
      cfg.workers = rep == 0 ? 1 : 4;
      hk::run_experiment(cfg);
      text[rep] = slurp(fs::path(cfg.out_dir) / "summary.json") + slurp(fs::path(cfg.out_dir) / "trace.jsonl");
    }
    if (text[0] == text[1] && !text[0].empty())
      ++identical;
    else
      mismatch += " " + hk::to_string(configs[c].mode);
  }
  fs::remove_all(root);
  return {identical == configs.size(),
          fmt("%zu/%zu seeded configurations (mc, sync, async) byte-identical across reruns and worker counts%s%s",
              identical, configs.size(), mismatch.empty() ? "" : "; differing:", mismatch.c_str())};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "three-agent example regression", example_trajectory},
      {2, "Lyapunov suite", lyapunov_suite},
      {3, "termination machinery", termination_machinery},
      {4, "singleton accumulator and merge count", singleton_suite},
      {5, "Cheeger sandwich suite", cheeger_suite},
      {6, "game identities", game_identities},
      {7, "Nash and steady-state agreement", nash_agreement},
      {8, "Monte Carlo hitting times and switches", monte_carlo_suite},
      {9, "two-agent asymptotics", two_agent_asymptotics},
      {10, "reproducibility", reproducibility},
  };
  std::vector<int> wanted;
  for (int a = 1; a < argc; ++a) wanted.push_back(std::atoi(argv[a]));

  bool all = true;
  for (const auto& c : criteria) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.id) == wanted.end()) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %d %s: %s: %s\n", c.id, o.passed ? "PASS" : "FAIL", c.name, o.detail.c_str());
    std::fflush(stdout);
    all = all && o.passed;
  }
  return all ? 0 : 1;
}
