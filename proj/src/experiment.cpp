#include "hk/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "hk/async_engine.hpp"
#include "hk/game.hpp"
#include "hk/hetero_engine.hpp"
#include "hk/spectral.hpp"
#include "hk/sync_engine.hpp"

namespace hk {

namespace {

constexpr std::uint64_t kDefaultHeteroCap = 10'000;
constexpr std::size_t kExampleCheckSteps = 25;
constexpr double kExampleTol = 1e-12;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_real(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw UsageError(key + ": not a number: '" + text + "'");
  }
  if (used != text.size() || !std::isfinite(v)) throw UsageError(key + ": not a finite number: '" + text + "'");
  return v;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& text) {
  if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos)
    throw UsageError(key + ": expected a non-negative integer, got '" + text + "'");
  try {
    return std::stoull(text);
  } catch (const std::exception&) {
    throw UsageError(key + ": integer out of range: '" + text + "'");
  }
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::string spaced = text;
  std::replace(spaced.begin(), spaced.end(), ',', ' ');
  std::istringstream in(spaced);
  std::vector<double> out;
  std::string token;
  while (in >> token) out.push_back(parse_real(key, token));
  if (out.empty()) throw UsageError(key + ": empty value");
  return out;
}

bool parse_switch(const std::string& key, const std::string& text) {
  if (text == "on" || text == "true" || text == "1") return true;
  if (text == "off" || text == "false" || text == "0") return false;
  throw UsageError(key + ": expected on or off, got '" + text + "'");
}

std::string normalize_key(std::string key) {
  std::replace(key.begin(), key.end(), '-', '_');
  return key;
}

class AuditList {
 public:
  explicit AuditList(bool enabled) : enabled_(enabled) {}

  bool enabled() const noexcept { return enabled_; }

  void add(const std::string& tag, const std::string& check, bool passed, double measured, double bound,
           Json extra = Json::object()) {
    Json entry = Json::object();
    entry["tag"] = tag;
    entry["check"] = check;
    entry["passed"] = passed;
    entry["measured"] = measured;
    entry["bound"] = bound;
    for (auto it = extra.begin(); it != extra.end(); ++it) entry[it.key()] = it.value();
    entries_.push_back(std::move(entry));
    if (!passed) failed_.push_back(tag + ": " + check);
  }

  void add(const AuditReport& report, const std::string& check) {
    Json extra = Json::object();
    extra["instances"] = report.checks;
    extra["violations"] = report.violations.size();
    if (!report.violations.empty()) {
      extra["first_violation_step"] = report.violations.front().step;
      extra["first_violation_residual"] = report.violations.front().residual;
    }
    add(report.tag, check, report.passed(), report.measured, report.bound, std::move(extra));
  }

  Json json() const { return entries_; }
  const std::vector<std::string>& failed() const noexcept { return failed_; }

 private:
  bool enabled_;
  Json entries_ = Json::array();
  std::vector<std::string> failed_;
};

std::filesystem::path prepare_out_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir + ": " + ec.message());
  return dir;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("error while writing " + path.string());
}

class JsonLines {
 public:
  void add(const Json& record) {
    text_ += to_json_text(record, 0);
    text_ += '\n';
  }
  const std::string& text() const noexcept { return text_; }

 private:
  std::string text_;
};

Json profile_json(const OpinionProfile& x) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < x.agents(); ++i) {
    Json row = Json::array();
    for (std::size_t k = 0; k < x.dimension(); ++k) row.push_back(x(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::uint64_t required_seed(const ExperimentConfig& config) {
  if (!config.seed) throw UsageError(to_string(config.mode) + ": --seed is required for randomized runs");
  return *config.seed;
}

InitialData initial_data(const ExperimentConfig& config) {
  if (!config.profile_path.empty()) {
    try {
      OpinionProfile x = load_profile(config.profile_path);
      if (config.n != 0 && config.n != x.agents())
        throw UsageError("profile " + config.profile_path + " has " + std::to_string(x.agents()) +
                         " agents but n = " + std::to_string(config.n));
      return {std::move(x), std::nullopt};
    } catch (const DomainError& e) {
      throw std::runtime_error(config.profile_path + ": " + e.what());
    }
  }
  const std::uint64_t seed = generator_is_random(config.generator.name) ? required_seed(config) : 0;
  return generate_initial(config.generator, config.n, config.d, seed);
}

double homogeneous_eps(const ExperimentConfig& config, const InitialData& data) {
  if (config.eps.empty()) {
    if (data.bounds && data.bounds->homogeneous()) return (*data.bounds)[0];
    throw UsageError(to_string(config.mode) + ": --eps is required");
  }
  if (!std::all_of(config.eps.begin(), config.eps.end(), [&](double e) { return e == config.eps.front(); }))
    throw UsageError(to_string(config.mode) + ": this mode needs a single confidence bound");
  if (!(config.eps.front() > 0.0)) throw UsageError("eps must be > 0");
  return config.eps.front();
}

ConfidenceBounds hetero_bounds(const ExperimentConfig& config, const InitialData& data) {
  const std::size_t n = data.profile.agents();
  if (!config.bounds_path.empty()) {
    ConfidenceBounds b = [&] {
      try {
        return load_bounds(config.bounds_path);
      } catch (const DomainError& e) {
        throw std::runtime_error(config.bounds_path + ": " + e.what());
      }
    }();
    if (b.size() != n) throw UsageError("bounds file " + config.bounds_path + " does not have n entries");
    return b;
  }
  if (!config.eps.empty()) {
    for (double e : config.eps)
      if (!(e > 0.0)) throw UsageError("eps must be > 0");
    if (config.eps.size() == 1) return ConfidenceBounds::uniform(n, config.eps.front());
    if (config.eps.size() != n) throw UsageError("eps list must have one entry per agent");
    return ConfidenceBounds(config.eps);
  }
  if (data.bounds) return *data.bounds;
  throw UsageError("hetero: --eps or a bounds file is required");
}

Scheduler make_scheduler(const ExperimentConfig& config) {
  const std::string& spec = config.scheduler;
  if (spec == "uniform") return Scheduler::uniform(derive_seed(required_seed(config), 0, 1));
  if (spec == "roundrobin") return Scheduler::round_robin(0);
  if (spec.rfind("script:", 0) == 0) {
    const std::string path = spec.substr(7);
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scheduler script: " + path);
    std::vector<std::size_t> seq;
    std::string token;
    while (in >> token) {
      try {
        seq.push_back(static_cast<std::size_t>(parse_unsigned("scheduler script", token)));
      } catch (const UsageError& e) {
        throw std::runtime_error(path + ": " + e.what());
      }
    }
    if (seq.empty()) throw std::runtime_error(path + ": scheduler script is empty");
    return Scheduler::scripted(std::move(seq));
  }
  throw UsageError("unknown scheduler '" + spec + "' (expected uniform, roundrobin or script:PATH)");
}

Json common_header(const ExperimentConfig& config, const OpinionProfile& x) {
  Json s = Json::object();
  s["mode"] = to_string(config.mode);
  s["n"] = x.agents();
  s["d"] = x.dimension();
  if (config.seed) s["seed"] = *config.seed;
  s["source"] = config.profile_path.empty() ? config.generator.name : config.profile_path;
  return s;
}

void finish(ExperimentResult& result, Json summary, const AuditList& audits, const ExperimentConfig& config) {
  summary["audit"] = audits.enabled() ? "on" : "off";
  summary["audits"] = audits.json();
  summary["passed"] = audits.failed().empty();
  result.failed_audits = audits.failed();
  result.exit_code = (audits.enabled() && !audits.failed().empty()) ? kExitAuditFailure : kExitPass;
  const auto out = prepare_out_dir(config.out_dir);
  write_text(out / "summary.json", to_json_text(summary) + "\n");
  result.summary = std::move(summary);
}

ExperimentResult run_sync_mode(const ExperimentConfig& config) {
  const InitialData data = initial_data(config);
  const double eps = homogeneous_eps(config, data);
  SyncOptions options;
  options.cap = config.cap;
  options.tol = config.tol;
  const SyncRunTrace trace = run_sync(data.profile, eps, options);
  const std::size_t n = data.profile.agents();
  const double nn = static_cast<double>(n);

  AuditList audits(config.audit);
  if (audits.enabled()) {
    const LyapunovAudit lyap = lyapunov_decrease_audit(trace);
    audits.add(lyap.monotone, "V(t)-V(t+1) >= 4 sum |dx|^2 and V non-increasing");
    audits.add(lyap.floor, "component decrease >= eps^2/n_c^6 on non-trivial non-merging steps");
    audits.add("thm2", "T <= n^8 + n with exact termination",
               trace.complete && static_cast<double>(trace.termination_time) <= termination_bound(n),
               static_cast<double>(trace.termination_time), termination_bound(n));
    audits.add("thm1", "sum (1/2)^|S0(t)| < 8 n^6", singleton_bound_audit(trace), trace.singleton_accumulator,
               8.0 * std::pow(nn, 6.0));
    audits.add("thm1", "merge count <= n", trace.events.merge_events.size() <= n,
               static_cast<double>(trace.events.merge_events.size()), nn);
    audits.add(contraction_audit(trace), "diam(x(t+1)) <= (1 - mu(A)) diam(x(t))");
    const SpectralChainAudit chain = spectral_chain_audit(trace);
    audits.add(chain.factorization, "I - A = D^-1 L");
    audits.add(chain.laplacian_floor, "lambda2(L) >= 2/n_c^2");
    audits.add(chain.q_vs_laplacian, "lambda2(Q) >= lambda2(L)^2/n_c^2");
    audits.add(chain.q_floor, "lambda2(Q) >= 4/n_c^6");
    audits.add(chain.residual, "consensus residual > eps^2/4");
    audits.add(chain.movement, "sum |dx|^2 >= lambda2(Q) * residual");
  }

  JsonLines lines;
  Json v_curve = Json::array();
  for (const SyncStepRecord& r : trace.steps) {
    Json rec = Json::object();
    rec["t"] = r.t;
    rec["V"] = r.lyapunov;
    rec["num_merges"] = r.merges;
    rec["singletons"] = r.singletons;
    rec["connected"] = r.connected;
    rec["epsilon_trivial"] = r.epsilon_trivial;
    lines.add(rec);
    v_curve.push_back(r.lyapunov);
  }

  Json s = common_header(config, data.profile);
  s["eps"] = eps;
  s["cap"] = trace.cap;
  s["T"] = trace.termination_time;
  s["complete"] = trace.complete;
  s["termination_bound"] = termination_bound(n);
  s["merges"] = trace.events.merge_events.size();
  s["merging_times"] = trace.events.merging_times;
  s["singleton_accumulator"] = trace.singleton_accumulator;
  s["V"] = v_curve;

  ExperimentResult result;
  const auto out = prepare_out_dir(config.out_dir);
  write_text(out / "trace.jsonl", lines.text());
  save_profile((out / "profile_final.txt").string(), trace.final_profile());
  finish(result, std::move(s), audits, config);
  return result;
}

ExperimentResult run_async_mode(const ExperimentConfig& config) {
  const InitialData data = initial_data(config);
  const double eps = homogeneous_eps(config, data);
  if (!config.delta) throw UsageError("async: --delta is required");
  const double delta = *config.delta;
  AsyncOptions options;
  options.cap = config.cap ? config.cap : kDefaultAsyncCap;
  const AsyncRunTrace trace = run_async(data.profile, eps, make_scheduler(config), delta, options);
  const std::size_t n = data.profile.agents();

  AuditList audits(config.audit);
  if (audits.enabled()) {
    AuditReport gain;
    gain.tag = "thm3";
    AuditReport monotone;
    monotone.tag = "thm3";
    for (std::size_t t = 0; t < trace.steps; ++t) {
      const double du = trace.potentials[t + 1] - trace.potentials[t];
      gain.require_at_least(t, "U(t+1)-U(t) >= 2|N_i*| |move|^2", du, trace.gain_floors[t]);
      monotone.require_at_least(t, "U(t+1) >= U(t)", trace.potentials[t + 1], trace.potentials[t]);
    }
    audits.add(gain, "U(t+1) - U(t) >= 2 |N_i*| |move|^2");
    audits.add(monotone, "U non-decreasing");

    const UpdaterEnumeration e = enumerate_updater_gains(data.profile, eps);
    audits.add("thm4", "mean gain over updaters >= (2/n) sum |move_i|^2 at x(0)",
               e.expected_gain >= e.expected_floor - kAuditTol, e.expected_gain, e.expected_floor);
    const double hit_bound = hitting_time_bound(n, eps, delta);
    audits.add("thm4", "hitting time <= 2 n^9 (eps/delta)^2",
               trace.complete && static_cast<double>(trace.steps) <= hit_bound, static_cast<double>(trace.steps),
               hit_bound);
    audits.add("thm5", "switch count <= 16 n^9",
               static_cast<double>(trace.events.switch_times.size()) <= switch_count_bound(n),
               static_cast<double>(trace.events.switch_times.size()), switch_count_bound(n));

    const ConfidenceBounds bounds = ConfidenceBounds::uniform(n, eps);
    std::size_t disagreements = 0;
    double worst_identity = 0.0;
    for (const OpinionProfile* x : {&trace.initial, &trace.final_profile}) {
      const GameState state(*x, eps);
      if (is_nash(state) != is_steady_state(*x, bounds)) ++disagreements;
      const double u = potential(state);
      for (std::size_t i = 0; i < n; ++i)
        worst_identity = std::max(worst_identity, std::abs(2.0 * utility(state, i) + team_offset(state, i) - u));
    }
    audits.add("prop1", "is_nash == is_steady_state at x(0) and x(T)", disagreements == 0,
               static_cast<double>(disagreements), 0.0);
    audits.add("cor1", "|2 U_i + beta_i - U| <= 1e-9 at x(0) and x(T)", worst_identity <= kAuditTol,
               worst_identity, kAuditTol);
  }

  JsonLines lines;
  const std::set<std::size_t> switches(trace.events.switch_times.begin(), trace.events.switch_times.end());
  for (std::size_t t = 0; t < trace.steps; ++t) {
    Json rec = Json::object();
    rec["t"] = t;
    rec["updater"] = trace.updaters[t];
    rec["U"] = trace.potentials[t + 1];
    rec["gain_floor"] = trace.gain_floors[t];
    rec["switched"] = switches.count(t + 1) > 0;
    lines.add(rec);
  }

  Json s = common_header(config, data.profile);
  s["eps"] = eps;
  s["delta"] = delta;
  s["scheduler"] = config.scheduler;
  s["cap"] = trace.cap;
  s["steps"] = trace.steps;
  s["complete"] = trace.complete;
  s["hitting_time"] = trace.hitting_time ? Json(*trace.hitting_time) : Json(nullptr);
  s["switches"] = trace.events.switch_times.size();
  s["clusters"] = trace.complete ? Json(trace.final_partition.clusters.size()) : Json(nullptr);
  s["U_initial"] = trace.potentials.front();
  s["U_final"] = trace.potentials.back();
  s["bound_hit"] = hitting_time_bound(n, eps, delta);
  s["bound_switches"] = switch_count_bound(n);

  ExperimentResult result;
  const auto out = prepare_out_dir(config.out_dir);
  write_text(out / "trace.jsonl", lines.text());
  save_profile((out / "profile_final.txt").string(), trace.final_profile);
  finish(result, std::move(s), audits, config);
  return result;
}

ExperimentResult run_hetero_mode(const ExperimentConfig& config) {
  const InitialData data = initial_data(config);
  const ConfidenceBounds bounds = hetero_bounds(config, data);
  HeteroOptions options;
  options.cap = config.cap ? config.cap : kDefaultHeteroCap;
  options.movement_tol = config.movement_tol;
  options.tol = config.tol;
  const HeteroRunTrace trace = run_hetero(data.profile, bounds, options);
  const SilenceReport silence = silence_report(trace);

  AuditList audits(config.audit);
  const Scenario example = three_agent_example();
  const bool is_example = config.profile_path.empty() && config.generator.name == example.name &&
                          data.profile == example.profile && bounds == example.bounds;
  if (audits.enabled() && is_example) {
    double worst = 0.0;
    bool ends_fixed = true;
    const std::size_t last = std::min(kExampleCheckSteps, trace.profiles.size() - 1);
    for (std::size_t t = 0; t <= last; ++t) {
      const OpinionProfile& x = trace.profiles[t];
      worst = std::max(worst, std::abs(x(1, 0) - std::pow(3.0, -static_cast<double>(t + 1))));
      ends_fixed = ends_fixed && x(0, 0) == -1.0 && x(2, 0) == 1.0;
    }
    const bool covered = last == kExampleCheckSteps;
    audits.add("example1", "|x_2(t) - 3^-(t+1)| <= 1e-12 for t <= 25", covered && worst <= kExampleTol, worst,
               kExampleTol);
    audits.add("example1", "x_1(t) = -1 and x_3(t) = 1 exactly for t <= 25", covered && ends_fixed,
               ends_fixed ? 0.0 : 1.0, 0.0);
    audits.add("example1", "no exact finite termination", !trace.terminated(), static_cast<double>(trace.steps),
               static_cast<double>(options.cap));
  }

  JsonLines lines;
  for (std::size_t t = 0; t < trace.steps; ++t) {
    Json rec = Json::object();
    rec["t"] = t;
    rec["max_movement"] = trace.max_movement[t];
    rec["silent"] = trace.events.singleton_counts[t];
    if (t + 1 < trace.profiles.size()) rec["x"] = profile_json(trace.profiles[t + 1]);
    lines.add(rec);
  }

  Json s = common_header(config, data.profile);
  Json radii = Json::array();
  for (double e : bounds.radii()) radii.push_back(e);
  s["eps"] = radii;
  s["cap"] = options.cap;
  s["movement_tol"] = options.movement_tol;
  s["steps"] = trace.steps;
  s["status"] = to_string(trace.status);
  s["finite_termination"] = trace.terminated();
  s["max_silence_streak"] = silence.max_streak;
  s["T_star"] = silence.global_max;
  s["silent_whole_run"] = silence.unbounded_agents;

  ExperimentResult result;
  const auto out = prepare_out_dir(config.out_dir);
  write_text(out / "trace.jsonl", lines.text());
  save_profile((out / "profile_final.txt").string(), trace.final_profile);
  finish(result, std::move(s), audits, config);
  return result;
}

ExperimentResult run_spectral_mode(const ExperimentConfig& config) {
  const InitialData data = initial_data(config);
  const double eps = homogeneous_eps(config, data);
  const SpectralReport r = spectral_report(data.profile, eps, config.seed.value_or(0));
  const double n = static_cast<double>(r.n);

  AuditList audits(config.audit);
  if (audits.enabled()) {
    const CommunicationGraph graph = build_neighborhoods(data.profile, eps);
    const double dmax = static_cast<double>(max_degree(graph));
    if (!r.phi_sampled)
      audits.add("lem2", "phi^2/(2 d_max) <= lambda2(L)", r.cheeger_lower_ok, r.lambda2_L,
                 dmax > 0 ? r.phi * r.phi / (2.0 * dmax) : 0.0);
    audits.add("lem2", "lambda2(L) <= 2 phi", r.cheeger_upper_ok, r.lambda2_L, 2.0 * r.phi);
    audits.add("thm2", "I - A = D^-1 L", r.factorization_ok, factorization_residual(graph), 1e-12);
    if (r.connected && r.n > 1) {
      audits.add("thm2", "lambda2(L) >= 2/n^2", r.lambda2_L >= 2.0 / (n * n) - kAuditTol, r.lambda2_L,
                 2.0 / (n * n));
      audits.add("thm2", "lambda2(Q) >= lambda2(L)^2/n^2", r.lambda2_Q >= r.lambda2_L * r.lambda2_L / (n * n) - kAuditTol,
                 r.lambda2_Q, r.lambda2_L * r.lambda2_L / (n * n));
      audits.add("thm2", "lambda2(Q) >= 4/n^6", r.lambda2_Q >= r.lambda2Q_floor - kAuditTol, r.lambda2_Q,
                 r.lambda2Q_floor);
    }
  }

  Json report = Json::object();
  report["n"] = r.n;
  report["connected"] = r.connected;
  report["lambda2_L"] = r.lambda2_L;
  report["lambda2_Q"] = r.lambda2_Q;
  report["phi"] = r.phi;
  report["phi_method"] = r.phi_sampled ? "sampled" : "exact";
  report["cheeger_ok"] = r.cheeger_ok;
  report["factorization_ok"] = r.factorization_ok;
  report["lambda2Q_floor"] = r.lambda2Q_floor;

  JsonLines lines;
  lines.add(report);

  Json s = common_header(config, data.profile);
  s["eps"] = eps;
  s["report"] = report;

  ExperimentResult result;
  const auto out = prepare_out_dir(config.out_dir);
  write_text(out / "trace.jsonl", lines.text());
  save_profile((out / "profile_final.txt").string(), data.profile);
  finish(result, std::move(s), audits, config);
  return result;
}

ExperimentResult run_mc_mode(const ExperimentConfig& config) {
  if (config.n == 0) throw UsageError("mc: --n is required");
  if (config.trials == 0) throw UsageError("mc: --trials must be >= 1");
  if (!config.delta) throw UsageError("mc: --delta is required");
  if (!config.profile_path.empty()) throw UsageError("mc: trials use a generator, not a profile file");
  const std::uint64_t seed = required_seed(config);
  if (config.eps.size() != 1 || !(config.eps.front() > 0.0)) throw UsageError("mc: a single --eps > 0 is required");

  MonteCarloConfig mc;
  mc.n = config.n;
  mc.d = config.d;
  mc.eps = config.eps.front();
  mc.delta = *config.delta;
  mc.trials = config.trials;
  mc.seed = seed;
  mc.cap = config.cap ? config.cap : kDefaultAsyncCap;
  mc.workers = config.workers;
  const GeneratorSpec spec = config.generator;
  generate_initial(spec, mc.n, mc.d, 0);  // surfaces parameter errors before threads start
  mc.generator = [spec, n = mc.n, d = mc.d](std::uint64_t s) { return generate_initial(spec, n, d, s).profile; };
  const MonteCarloSummary m = monte_carlo_hitting(mc);

  AuditList audits(config.audit);
  if (audits.enabled()) {
    audits.add("thm4", "every trial reaches a delta-equilibrium", m.incomplete == 0,
               static_cast<double>(m.incomplete), 0.0);
    audits.add("thm4", "mean hitting time <= 2 n^9 (eps/delta)^2", m.mean_hit <= m.bound_hit, m.mean_hit,
               m.bound_hit);
    audits.add("thm4", "max hitting time <= 2 n^9 (eps/delta)^2", static_cast<double>(m.max_hit) <= m.bound_hit,
               static_cast<double>(m.max_hit), m.bound_hit);
    audits.add("thm5", "max switch count <= 16 n^9", static_cast<double>(m.max_switches) <= m.bound_switches,
               static_cast<double>(m.max_switches), m.bound_switches);
    audits.add("thm3", "every realized gain >= 2 |N_i*| |move|^2", m.gains_ok, m.gains_ok ? 1.0 : 0.0, 1.0);
    if (m.scalar_case)
      audits.add("lem7", "mean steps to an eps/n-equilibrium <= n^5 (n+1)^2 + n", m.mean_hit <= m.bound_scalar,
                 m.mean_hit, m.bound_scalar);
  }

  JsonLines lines;
  for (const TrialResult& r : m.per_trial) {
    Json rec = Json::object();
    rec["trial"] = r.index;
    rec["profile_seed"] = r.profile_seed;
    rec["schedule_seed"] = r.schedule_seed;
    rec["complete"] = r.complete;
    rec["steps"] = r.steps;
    rec["switches"] = r.switches;
    lines.add(rec);
  }

  Json s = Json::object();
  s["mode"] = "mc";
  s["n"] = m.n;
  s["d"] = m.d;
  s["eps"] = m.eps;
  s["delta"] = m.delta;
  s["trials"] = m.trials;
  s["seed"] = m.seed;
  s["generator"] = spec.name;
  s["mean_hit"] = m.mean_hit;
  s["max_hit"] = m.max_hit;
  s["mean_switches"] = m.mean_switches;
  s["max_switches"] = m.max_switches;
  s["bound_hit"] = m.bound_hit;
  s["bound_switches"] = m.bound_switches;
  s["all_within_bounds"] = m.all_within_bounds;
  s["completed"] = m.completed;
  s["incomplete"] = m.incomplete;
  s["slack_hit"] = m.mean_hit > 0 ? Json(m.bound_hit / m.mean_hit) : Json(nullptr);
  s["slack_switches"] = m.mean_switches > 0 ? Json(m.bound_switches / m.mean_switches) : Json(nullptr);
  if (m.scalar_case) {
    s["bound_scalar"] = m.bound_scalar;
    s["slack_scalar"] = m.mean_hit > 0 ? Json(m.bound_scalar / m.mean_hit) : Json(nullptr);
  }

  ExperimentResult result;
  const auto out = prepare_out_dir(config.out_dir);
  write_text(out / "trace.jsonl", lines.text());
  finish(result, std::move(s), audits, config);
  return result;
}

}  // namespace

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::sync:
      return "sync";
    case Mode::async:
      return "async";
    case Mode::hetero:
      return "hetero";
    case Mode::spectral_audit:
      return "spectral-audit";
    case Mode::mc:
      return "mc";
  }
  return "unknown";
}

Mode parse_mode(const std::string& name) {
  if (name == "sync" || name == "sync-run") return Mode::sync;
  if (name == "async" || name == "async-run") return Mode::async;
  if (name == "hetero" || name == "hetero-run") return Mode::hetero;
  if (name == "spectral-audit" || name == "spectral") return Mode::spectral_audit;
  if (name == "mc") return Mode::mc;
  throw UsageError("unknown mode '" + name + "'");
}

bool generator_is_random(const std::string& name) { return name == "uniform-box" || name == "clustered"; }

InitialData generate_initial(const GeneratorSpec& spec, std::size_t n, std::size_t d, std::uint64_t seed) {
  if (spec.name == "paper-example-1") {
    Scenario s = three_agent_example();
    return {std::move(s.profile), std::move(s.bounds)};
  }
  if (n == 0) throw UsageError(spec.name + ": --n is required");
  if (d == 0) throw UsageError(spec.name + ": --d must be >= 1");
  Matrix m(n, d);
  std::mt19937_64 rng(seed);
  auto unit = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

  if (spec.name == "uniform-box") {
    if (!(spec.side > 0.0)) throw UsageError("uniform-box: L must be > 0");
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < d; ++k) m(i, k) = spec.side * unit();
  } else if (spec.name == "line-chain") {
    if (!(spec.spacing > 0.0)) throw UsageError("line-chain: spacing must be > 0");
    for (std::size_t i = 0; i < n; ++i) m(i, 0) = static_cast<double>(i) * spec.spacing;
  } else if (spec.name == "clustered") {
    if (spec.clusters < 1) throw UsageError("clustered: k must be >= 1");
    if (!(spec.spread >= 0.0) || !(spec.gap > 0.0)) throw UsageError("clustered: need spread >= 0 and gap > 0");
    for (std::size_t i = 0; i < n; ++i) {
      const double center = static_cast<double>(i % spec.clusters) * spec.gap;
      for (std::size_t k = 0; k < d; ++k) m(i, k) = (k == 0 ? center : 0.0) + spec.spread * (unit() - 0.5);
    }
  } else {
    throw UsageError("unknown generator '" + spec.name +
                     "' (expected uniform-box, line-chain, clustered or paper-example-1)");
  }
  return {OpinionProfile(std::move(m)), std::nullopt};
}

std::vector<Setting> parse_settings(std::istream& in) {
  std::vector<Setting> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError("config line " + std::to_string(number) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw UsageError("config line " + std::to_string(number) + ": empty key or value");
    out.emplace_back(key, value);
  }
  return out;
}

std::vector<Setting> load_settings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  try {
    return parse_settings(in);
  } catch (const UsageError& e) {
    throw UsageError(path + ": " + e.what());
  }
}

void apply_setting(ExperimentConfig& c, const std::string& raw_key, const std::string& value) {
  const std::string key = normalize_key(raw_key);
  if (key == "mode") {
    c.mode = parse_mode(value);
  } else if (key == "n") {
    c.n = static_cast<std::size_t>(parse_unsigned(key, value));
  } else if (key == "d") {
    c.d = static_cast<std::size_t>(parse_unsigned(key, value));
  } else if (key == "eps") {
    c.eps = parse_list(key, value);
  } else if (key == "delta") {
    c.delta = parse_real(key, value);
  } else if (key == "scheduler") {
    c.scheduler = value;
  } else if (key == "seed") {
    c.seed = parse_unsigned(key, value);
  } else if (key == "trials") {
    c.trials = static_cast<std::size_t>(parse_unsigned(key, value));
  } else if (key == "cap") {
    c.cap = parse_unsigned(key, value);
  } else if (key == "tol") {
    c.tol = parse_real(key, value);
  } else if (key == "movement_tol") {
    c.movement_tol = parse_real(key, value);
  } else if (key == "profile") {
    c.profile_path = value;
  } else if (key == "bounds") {
    c.bounds_path = value;
  } else if (key == "generator") {
    c.generator.name = value;
  } else if (key == "l" || key == "L" || key == "side") {
    c.generator.side = parse_real(key, value);
  } else if (key == "spacing") {
    c.generator.spacing = parse_real(key, value);
  } else if (key == "k" || key == "clusters") {
    c.generator.clusters = static_cast<std::size_t>(parse_unsigned(key, value));
  } else if (key == "spread") {
    c.generator.spread = parse_real(key, value);
  } else if (key == "gap") {
    c.generator.gap = parse_real(key, value);
  } else if (key == "out") {
    c.out_dir = value;
  } else if (key == "audit") {
    c.audit = parse_switch(key, value);
  } else if (key == "workers") {
    c.workers = static_cast<std::size_t>(parse_unsigned(key, value));
  } else {
    throw UsageError("unknown setting '" + raw_key + "'");
  }
}

void validate(const ExperimentConfig& c) {
  for (double e : c.eps)
    if (!(e > 0.0)) throw UsageError("eps must be > 0");
  if (c.delta && !(*c.delta > 0.0)) throw UsageError("delta must be > 0");
  if (c.d == 0) throw UsageError("d must be >= 1");
  if (!(c.tol > 0.0)) throw UsageError("tol must be > 0");
  if (!(c.movement_tol >= 0.0)) throw UsageError("movement_tol must be >= 0");
  if (c.out_dir.empty()) throw UsageError("out must not be empty");
  const bool random_profile = c.profile_path.empty() && generator_is_random(c.generator.name);
  const bool random_schedule = c.mode == Mode::async && c.scheduler == "uniform";
  if ((c.mode == Mode::mc || random_profile || random_schedule) && !c.seed)
    throw UsageError(to_string(c.mode) + ": --seed is required for randomized runs");
  if ((c.mode == Mode::async || c.mode == Mode::mc) && !c.delta)
    throw UsageError(to_string(c.mode) + ": --delta is required");
  if (c.mode == Mode::mc && c.trials == 0) throw UsageError("mc: --trials must be >= 1");
  if (c.mode == Mode::mc && c.eps.size() != 1) throw UsageError("mc: a single --eps > 0 is required");
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  validate(config);
  switch (config.mode) {
    case Mode::sync:
      return run_sync_mode(config);
    case Mode::async:
      return run_async_mode(config);
    case Mode::hetero:
      return run_hetero_mode(config);
    case Mode::spectral_audit:
      return run_spectral_mode(config);
    case Mode::mc:
      return run_mc_mode(config);
  }
  throw UsageError("unknown mode");
}

}  // namespace hk
