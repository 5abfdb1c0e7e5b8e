#pragma once

// Command-line driver: analyze, solve-hjb, sim-wcp, sim-qcp, verify-bound.
// Reports are JSON (stdout, or <out>/<command>.json); traces are long-form CSV
// with header t,series,name,value.
//
// Exit status: 0 ok; 2 usage; 10 instance parse error; 21/22/23 EHTC / full
// load / dual uniqueness failure; 30 HJB non-convergence; 40 bound check FAIL.

#include "pss/hjb.hpp"
#include "pss/instance_io.hpp"
#include "pss/lp_core.hpp"
#include "pss/qcp_sim.hpp"
#include "pss/wcp_sim.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace pss::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kParse = 10,
  kEhtc = 21,
  kFullLoad = 22,
  kDualUnique = 23,
  kSolver = 30,
  kBoundFail = 40,
};

struct RunConfig {
  std::string command;
  std::string instance_path;
  std::string output_dir;  // empty: report to stdout
  std::uint64_t seed = 1;
  std::size_t grid_n = 4000;
  std::optional<double> z_max;    // default from the mode coefficients
  double step = 1e-3;
  std::optional<double> horizon;  // default 12 / gamma
  long long n = 100;
  std::vector<long long> n_list{25, 100, 400};
  std::optional<std::string> policy;
  std::optional<std::size_t> reps;
  bool crn = true;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// FNV-1a over the canonical serialization, so formatting of the input file does not matter.
inline std::string instance_hash(const PssInstance& inst) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : save_instance(inst)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << h;
  return ss.str();
}

namespace detail {

using nlohmann::json;

inline json rational_json(const Rational& r) { return {{"exact", to_string(r)}, {"decimal", to_double(r)}}; }

inline json rational_vector_json(const RationalVector& v) {
  json out = json::array();
  for (const auto& r : v) out.push_back(rational_json(r));
  return out;
}

inline json dual_json(const DualSolution& d) {
  return {{"y", rational_vector_json(d.y)}, {"z", rational_vector_json(d.z)}};
}

inline json activity_labels(const PssInstance& inst) {
  json out = json::array();
  for (const auto& a : inst.activities) out.push_back({a.class_index + 1, a.server_index + 1});
  return out;
}

inline json analysis_json(const PssInstance& inst, const LpAnalysis& an) {
  json j;
  j["activities"] = activity_labels(inst);
  j["rho_star"] = rational_json(an.primal.rho_star);
  j["assumptions"] = {{"ehtc", an.assumptions.ehtc},
                      {"full_load", an.assumptions.full_load},
                      {"dual_unique", an.assumptions.dual_unique}};
  if (!an.assumptions.full_load_witness.empty()) j["assumptions"]["full_load_witness"] = an.assumptions.full_load_witness;
  if (an.assumptions.dual_witnesses) {
    j["assumptions"]["dual_witnesses"] = {dual_json(an.assumptions.dual_witnesses->first),
                                          dual_json(an.assumptions.dual_witnesses->second)};
  }
  j["modes"] = json::array();
  for (std::size_t m = 0; m < an.modes.size(); ++m) {
    json mode{{"index", m + 1}, {"xi", rational_vector_json(an.modes[m].xi)}, {"degenerate", bool(an.degenerate[m])}};
    if (m < an.coefficients.size()) {
      mode["b"] = an.coefficients[m].b;
      mode["sigma2"] = an.coefficients[m].sigma2;
    }
    j["modes"].push_back(std::move(mode));
  }
  j["dual_value"] = rational_json(an.dual_optima.value);
  if (an.dual) j["dual"] = dual_json(*an.dual);
  if (!an.classification.empty()) {
    j["classification"] = json::array();
    for (auto c : an.classification) j["classification"].push_back(to_string(c));
  }
  const auto& d = an.decomposition;
  j["decomposition"] = {{"status", to_string(d.status)}, {"full_grid", d.full_grid}};
  if (d.decomposition) {
    j["decomposition"]["alpha"] = rational_vector_json(d.decomposition->alpha);
    j["decomposition"]["beta"] = rational_vector_json(d.decomposition->beta);
  }
  if (d.lambda_over_alpha) j["decomposition"]["lambda_over_alpha"] = rational_json(*d.lambda_over_alpha);
  if (d.matches_dual) j["decomposition"]["matches_dual"] = *d.matches_dual;
  if (!d.note.empty()) j["decomposition"]["note"] = d.note;
  if (an.q) j["q"] = *an.q + 1;
  return j;
}

inline json estimate_json(const McEstimate& e) {
  return {{"mean", e.mean},       {"half_width_95", e.half_width_95}, {"n_paths", e.n_paths},
          {"step", e.step},       {"horizon", e.horizon},             {"truncation_bound", e.truncation_bound}};
}

inline json policy_json(const FeedbackPolicy& p) {
  json out = json::array();
  for (const auto& iv : p.intervals) {
    json item{{"lo", iv.lo}, {"mode", iv.mode + 1}};
    if (std::isfinite(iv.hi)) item["hi"] = iv.hi;
    else item["hi"] = "inf";
    out.push_back(std::move(item));
  }
  return out;
}

inline int assumption_exit(const AssumptionReport& a) {
  if (!a.ehtc) return kEhtc;
  if (!a.full_load) return kFullLoad;
  if (!a.dual_unique) return kDualUnique;
  return kOk;
}

inline std::string assumption_message(const AssumptionReport& a) {
  if (!a.ehtc) return "EHTC fails (rho* = " + to_string(a.rho_star) + ")";
  if (!a.full_load) return "full load fails: " + a.full_load_witness;
  if (!a.dual_unique) return "dual not unique";
  return "";
}

// "mode:<m>" (one-based) -> zero-based index.
inline std::optional<std::size_t> parse_mode(const std::string& s, std::size_t n_modes) {
  if (s.rfind("mode:", 0) != 0) return std::nullopt;
  std::size_t m = 0;
  try {
    m = std::stoul(s.substr(5));
  } catch (...) {
    throw UsageError("bad policy '" + s + "'");
  }
  if (m < 1 || m > n_modes) throw UsageError("policy '" + s + "': instance has " + std::to_string(n_modes) + " modes");
  return m - 1;
}

struct Context {
  RunConfig cfg;
  PssInstance inst;
  LpAnalysis an;
  std::string hash;
};

inline HjbConfig hjb_config(const Context& c) {
  auto h = HjbConfig::defaults_for(c.an.coefficients, c.inst.gamma);
  h.grid_n = c.cfg.grid_n;
  if (c.cfg.z_max) h.z_max = *c.cfg.z_max;
  return h;
}

inline double horizon_of(const Context& c) { return c.cfg.horizon.value_or(12.0 / c.inst.gamma); }

inline json header(const Context& c, json config) {
  return {{"tool", "pss"},
          {"version", kVersion},
          {"command", c.cfg.command},
          {"instance", {{"path", std::filesystem::path(c.cfg.instance_path).filename().string()}, {"hash", c.hash}}},
          {"seed", c.cfg.seed},
          {"config", std::move(config)}};
}

class CsvTrace {
 public:
  void add(double t, const std::string& series, const std::string& name, double value) {
    rows_ << t << ',' << series << ',' << name << ',' << value << '\n';
    ++count_;
  }
  std::string str() const { return "t,series,name,value\n" + rows_.str(); }
  bool empty() const { return count_ == 0; }

 private:
  std::size_t count_ = 0;
  std::ostringstream rows_ = [] {
    std::ostringstream s;
    s << std::setprecision(17);
    return s;
  }();
};

inline std::vector<PolicySpec> qcp_policies(const Context& c, const std::optional<HjbSolution>& hjb,
                                            const std::string& spec) {
  std::vector<PolicySpec> out;
  auto threshold = [&] {
    if (!hjb) throw UsageError("threshold policy needs an HJB solution");
    return PolicySpec::workload_threshold(extract_policy(*hjb));
  };
  if (spec == "all") {
    for (std::size_t m = 0; m < c.an.modes.size(); ++m) out.push_back(PolicySpec::static_mode(m));
    out.push_back(threshold());
    return out;
  }
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "threshold") {
      out.push_back(threshold());
    } else if (item == "priority") {
      out.push_back(PolicySpec::server_priority(cmu_priority(c.inst)));
    } else if (item.size() > 5 && item.substr(item.size() - 5) == ":idle") {
      const auto m = parse_mode(item.substr(0, item.size() - 5), c.an.modes.size());
      if (!m) throw UsageError("bad policy '" + item + "'");
      out.push_back(PolicySpec::static_mode(*m, false));
    } else if (auto m = parse_mode(item, c.an.modes.size())) {
      out.push_back(PolicySpec::static_mode(*m));
    } else {
      throw UsageError("unknown policy '" + item + "' (mode:<m>, mode:<m>:idle, threshold, priority, all)");
    }
  }
  if (out.empty()) throw UsageError("no policy given");
  return out;
}

struct Outcome {
  json report;
  int code = kOk;
  std::string trace;  // CSV, may be empty
  std::string message;
};

inline Outcome cmd_analyze(const Context& c) {
  Outcome o;
  o.report = header(c, json::object());
  o.report["analysis"] = analysis_json(c.inst, c.an);
  o.code = assumption_exit(c.an.assumptions);
  o.message = assumption_message(c.an.assumptions);
  return o;
}

inline Outcome cmd_solve_hjb(const Context& c) {
  const auto hc = hjb_config(c);
  Outcome o;
  o.report = header(c, {{"grid_n", hc.grid_n}, {"z_max", hc.z_max}, {"tol_residual", hc.tol_residual}});
  const auto sol = solve_hjb(c.an.coefficients, c.inst.gamma, hc);
  o.report["hjb"] = {{"u0", sol.u0},
                     {"v0", compute_v0(c.inst, c.an, sol)},
                     {"switch_points", sol.switch_points},
                     {"policy", policy_json(extract_policy(sol))},
                     {"residual_max", sol.residual_max},
                     {"min_excess", sol.min_excess},
                     {"iterations", sol.iterations}};
  if (auto d = dominant_mode(c.an.coefficients)) o.report["hjb"]["dominant_mode"] = *d + 1;
  CsvTrace csv;
  const std::size_t stride = std::max<std::size_t>(1, sol.grid.size() / 1000);
  for (std::size_t i = 0; i < sol.grid.size(); i += stride) {
    csv.add(sol.grid[i], "hjb", "u", sol.u[i]);
    csv.add(sol.grid[i], "hjb", "du", sol.du[i]);
    csv.add(sol.grid[i], "hjb", "mode", static_cast<double>(sol.mode_at[i] + 1));
  }
  o.trace = csv.str();
  return o;
}

inline Outcome cmd_sim_wcp(const Context& c) {
  const auto hc = hjb_config(c);
  const auto sol = solve_hjb(c.an.coefficients, c.inst.gamma, hc);
  const double horizon = horizon_of(c);
  const std::size_t paths = c.cfg.reps.value_or(100000);
  const std::string spec = c.cfg.policy.value_or("all");

  std::vector<std::pair<std::string, FeedbackPolicy>> policies;
  auto add_mode = [&](std::size_t m) { policies.emplace_back("static_mode_" + std::to_string(m + 1), FeedbackPolicy::constant(m)); };
  if (spec == "all" || spec == "hjb") policies.emplace_back("hjb", extract_policy(sol));
  if (spec == "all") {
    for (std::size_t m = 0; m < c.an.coefficients.size(); ++m) add_mode(m);
  } else if (spec != "hjb") {
    const auto m = parse_mode(spec, c.an.coefficients.size());
    if (!m) throw UsageError("unknown wcp policy '" + spec + "' (hjb, mode:<m>, all)");
    add_mode(*m);
  }

  Outcome o;
  o.report = header(c, {{"step", c.cfg.step},
                        {"horizon", horizon},
                        {"paths", paths},
                        {"policy", spec},
                        {"crn", c.cfg.crn},
                        {"scheme", "bridge_reflection"}});
  o.report["hjb_u0"] = sol.u0;
  o.report["estimates"] = json::array();
  for (std::size_t p = 0; p < policies.size(); ++p) {
    const std::uint64_t seed = c.cfg.crn ? c.cfg.seed : hash_combine(c.cfg.seed, p);
    const auto e = estimate_wcp_cost(policies[p].second, c.an.coefficients, c.inst.gamma, 0.0, c.cfg.step, horizon,
                                     paths, seed);
    auto item = estimate_json(e);
    item["policy"] = policies[p].first;
    item["gap_to_u0"] = e.mean - sol.u0;
    o.report["estimates"].push_back(std::move(item));
  }
  // One projected-Euler sample path under the first policy.
  const auto path = simulate_wcp(policies.front().second, c.an.coefficients, 0.0, c.cfg.step, horizon, c.cfg.seed);
  CsvTrace csv;
  const std::size_t stride = std::max<std::size_t>(1, path.times.size() / 2000);
  for (std::size_t k = 0; k < path.times.size(); k += stride) {
    csv.add(path.times[k], "wcp", "Z", path.values[k]);
    csv.add(path.times[k], "wcp", "L", path.local_time[k]);
    csv.add(path.times[k], "wcp", "mode", static_cast<double>(path.mode_trace[k] + 1));
  }
  o.trace = csv.str();
  return o;
}

inline Outcome cmd_sim_qcp(const Context& c) {
  std::optional<HjbSolution> sol;
  const std::string spec = c.cfg.policy.value_or("threshold");
  if (spec.find("threshold") != std::string::npos || spec == "all") {
    sol = solve_hjb(c.an.coefficients, c.inst.gamma, hjb_config(c));
  }
  const auto policies = qcp_policies(c, sol, spec);
  const double horizon = horizon_of(c);
  const std::size_t reps = c.cfg.reps.value_or(1000);

  Outcome o;
  o.report = header(c, {{"n", c.cfg.n}, {"horizon", horizon}, {"reps", reps}, {"policy", spec}});
  o.report["runs"] = json::array();
  CsvTrace csv;
  for (const auto& p : policies) {
    const auto tr = run_qcp(c.inst, c.an, c.cfg.n, p, horizon, c.cfg.seed);
    const auto s = compute_scaled(tr, c.inst, c.an);
    const auto chk = check_trace_inequalities(s, c.inst, c.an);
    json run{{"policy", p.name()}, {"events", tr.size()}};
    auto viol = [](const Violation& v) { return json{{"max_abs", v.max_abs}, {"max_rel", v.max_rel}}; };
    run["checks"] = {{"scale", chk.scale},
                     {"workload_cost", viol(chk.workload_cost)},
                     {"reflection", viol(chk.reflection)},
                     {"identity", viol(chk.identity)},
                     {"nonnegative_queue", viol(chk.nonnegative_queue)},
                     {"idleness", viol(chk.idleness)},
                     {"min_reflection_slack", chk.min_reflection_slack}};
    if (reps >= 2) run["estimate"] = estimate_json(estimate_qcp_cost(c.inst, c.an, c.cfg.n, p, reps, horizon, c.cfg.seed));
    o.report["runs"].push_back(std::move(run));

    const std::size_t stride = std::max<std::size_t>(1, s.size() / 4000);
    for (std::size_t k = 0; k < s.size(); k += stride) {
      if (s.pre[k]) continue;
      const std::string series = p.name();
      for (std::size_t i = 0; i < c.inst.num_classes; ++i) csv.add(s.times[k], series, "X_hat_" + std::to_string(i + 1), s.x_hat[k][i]);
      csv.add(s.times[k], series, "W_hat", s.w_hat[k]);
      csv.add(s.times[k], series, "F_hat", s.f_hat[k]);
      csv.add(s.times[k], series, "L_hat", s.l_hat[k]);
      csv.add(s.times[k], series, "L_AN_hat", s.l_an[k]);
      csv.add(s.times[k], series, "H_hat", s.h_hat[k]);
    }
  }
  o.trace = csv.str();
  return o;
}

inline Outcome cmd_verify_bound(const Context& c) {
  const auto hc = hjb_config(c);
  const auto sol = solve_hjb(c.an.coefficients, c.inst.gamma, hc);
  const std::string spec = c.cfg.policy.value_or("all");
  const auto policies = qcp_policies(c, sol, spec);
  const double horizon = horizon_of(c);
  const std::size_t reps = c.cfg.reps.value_or(1000);
  const auto rep = verify_lower_bound(c.inst, c.an, sol, c.cfg.n_list, policies, reps, c.cfg.seed, horizon);

  Outcome o;
  o.report = header(c, {{"n_list", c.cfg.n_list},
                        {"reps", reps},
                        {"horizon", horizon},
                        {"policy", spec},
                        {"grid_n", hc.grid_n},
                        {"z_max", hc.z_max}});
  o.report["v0"] = rep.v0;
  o.report["hjb"] = {{"u0", sol.u0}, {"switch_points", sol.switch_points}, {"policy", policy_json(extract_policy(sol))}};
  o.report["entries"] = json::array();
  for (const auto& e : rep.entries) {
    o.report["entries"].push_back({{"n", e.n},
                                   {"policy", e.policy},
                                   {"estimate", estimate_json(e.estimate)},
                                   {"margin", e.margin},
                                   {"pass", e.pass}});
  }
  o.report["best_by_n"] = json::array();
  for (const auto& [n, v] : rep.best_by_n) o.report["best_by_n"].push_back({{"n", n}, {"cost", v}});
  o.report["best_nonincreasing_in_n"] = rep.best_nonincreasing;
  o.report["verdict"] = rep.pass ? "PASS" : "FAIL";
  o.code = rep.pass ? kOk : kBoundFail;
  if (!rep.pass) o.message = "lower-bound check FAIL";
  return o;
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << text;
}

}  // namespace detail

inline int execute(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  detail::Context c;
  c.cfg = cfg;
  try {
    c.inst = load_instance_file(cfg.instance_path);
  } catch (const InstanceError& e) {
    err << "error: " << (e.field().empty() ? "" : e.field() + ": ") << e.what() << '\n';
    return kParse;
  }
  c.hash = instance_hash(c.inst);
  c.an = analyze(c.inst);

  detail::Outcome o;
  try {
    if (cfg.command != "analyze") {
      if (const int code = detail::assumption_exit(c.an.assumptions)) {
        err << "error: " << detail::assumption_message(c.an.assumptions) << '\n';
        return code;
      }
    }
    if (cfg.command == "analyze") o = detail::cmd_analyze(c);
    else if (cfg.command == "solve-hjb") o = detail::cmd_solve_hjb(c);
    else if (cfg.command == "sim-wcp") o = detail::cmd_sim_wcp(c);
    else if (cfg.command == "sim-qcp") o = detail::cmd_sim_qcp(c);
    else if (cfg.command == "verify-bound") o = detail::cmd_verify_bound(c);
    else throw UsageError("unknown command '" + cfg.command + "'");
  } catch (const HjbError& e) {
    err << "error: " << e.what() << " (last residual " << e.last_residual() << ")\n";
    return kSolver;
  } catch (const NegativeRateError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  const std::string text = o.report.dump(2) + "\n";
  if (cfg.output_dir.empty()) {
    out << text;
  } else {
    std::filesystem::create_directories(cfg.output_dir);
    const auto dir = std::filesystem::path(cfg.output_dir);
    detail::write_file(dir / (cfg.command + ".json"), text);
    if (!o.trace.empty()) detail::write_file(dir / (cfg.command + "_trace.csv"), o.trace);
  }
  if (!o.message.empty()) err << (o.code == kOk ? "" : "error: ") << o.message << '\n';
  return o.code;
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Parallel server system toolkit: LP analysis, workload HJB, WCP and queueing simulation"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::string n_list;
  std::optional<double> z_max, horizon;
  std::optional<std::size_t> reps;
  std::optional<std::string> policy;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--instance", cfg.instance_path, "instance JSON file")->required();
    sub->add_option("--out", cfg.output_dir, "output directory (default: report on stdout)");
    sub->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
  };
  auto hjb_opts = [&](CLI::App* sub) {
    sub->add_option("--grid-n", cfg.grid_n, "HJB grid intervals")->capture_default_str()->check(CLI::Range(3, 100000000));
    sub->add_option("--z-max", z_max, "HJB truncation (default 20 max sigma/sqrt(gamma) + 20 max|b|/gamma)");
  };

  auto* analyze_cmd = app.add_subcommand("analyze", "LP analysis and standing assumptions");
  common(analyze_cmd);
  auto* hjb_cmd = app.add_subcommand("solve-hjb", "solve the workload HJB equation");
  common(hjb_cmd);
  hjb_opts(hjb_cmd);
  auto* wcp_cmd = app.add_subcommand("sim-wcp", "Monte Carlo cost of the workload control problem");
  common(wcp_cmd);
  hjb_opts(wcp_cmd);
  wcp_cmd->add_option("--step", cfg.step, "time step")->capture_default_str();
  wcp_cmd->add_option("--horizon", horizon, "time horizon (default 12/gamma)");
  wcp_cmd->add_option("--reps", reps, "number of paths (default 100000)");
  wcp_cmd->add_option("--policy", policy, "hjb, mode:<m> or all (default all)");
  wcp_cmd->add_flag("--crn,!--no-crn", cfg.crn, "common random numbers across policies (default on)");
  auto* qcp_cmd = app.add_subcommand("sim-qcp", "simulate the n-th queueing system and check the pathwise inequalities");
  common(qcp_cmd);
  hjb_opts(qcp_cmd);
  qcp_cmd->add_option("--n", cfg.n, "scaling parameter")->capture_default_str()->check(CLI::PositiveNumber);
  qcp_cmd->add_option("--horizon", horizon, "time horizon (default 12/gamma)");
  qcp_cmd->add_option("--reps", reps, "replications for the cost estimate (default 1000; < 2 skips it)");
  qcp_cmd->add_option("--policy", policy, "comma list of mode:<m>[:idle], threshold, priority; or all (default threshold)");
  auto* bound_cmd = app.add_subcommand("verify-bound", "statistical check of the asymptotic lower bound");
  common(bound_cmd);
  hjb_opts(bound_cmd);
  bound_cmd->add_option("--n-list", n_list, "comma-separated n values (default 25,100,400)");
  bound_cmd->add_option("--horizon", horizon, "time horizon (default 12/gamma)");
  bound_cmd->add_option("--reps", reps, "replications per (n, policy) (default 1000)");
  bound_cmd->add_option("--policy", policy, "as sim-qcp (default all: every static mode and threshold)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    const int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? kOk : kUsage;
  }

  for (auto* sub : {analyze_cmd, hjb_cmd, wcp_cmd, qcp_cmd, bound_cmd}) {
    if (sub->parsed()) cfg.command = sub->get_name();
  }
  cfg.z_max = z_max;
  cfg.horizon = horizon;
  cfg.reps = reps;
  cfg.policy = policy;
  if (!n_list.empty()) {
    cfg.n_list.clear();
    std::stringstream ss(n_list);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        const long long v = std::stoll(item);
        if (v < 1) throw std::invalid_argument("n");
        cfg.n_list.push_back(v);
      } catch (...) {
        err << "error: bad --n-list entry '" << item << "'\n";
        return kUsage;
      }
    }
  }
  if (!(cfg.step > 0.0) || (cfg.horizon && !(*cfg.horizon >= 0.0)) || (cfg.z_max && !(*cfg.z_max > 0.0))) {
    err << "error: step and z-max must be positive, horizon nonnegative\n";
    return kUsage;
  }
  return execute(cfg, out, err);
}

}  // namespace pss::cli
