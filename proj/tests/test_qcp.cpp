#include "pss/qcp_sim.hpp"
#include "random_instances.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace pss;
using pss::test::load;
using pss::test::Qv;

namespace {

struct Loaded {
  PssInstance inst;
  LpAnalysis an;
};

Loaded load_analyzed(const std::string& name) {
  Loaded l{load(name), {}};
  l.an = analyze(l.inst);
  return l;
}

}  // namespace

TEST(RenewalSource, ExponentialMean) {
  auto src = make_renewal_source({RenewalFamily::Gamma, 1.0}, 5.0, 1);
  double sum = 0.0;
  for (int k = 0; k < 1000000; ++k) sum += src.next();
  EXPECT_NEAR(sum / 1e6, 0.2, 0.002);
}

TEST(RenewalSource, GammaScv) {
  auto src = make_renewal_source({RenewalFamily::Gamma, 4.0}, 3.0, 2);
  double s1 = 0.0, s2 = 0.0;
  const int n = 1000000;
  for (int k = 0; k < n; ++k) {
    const double v = src.next();
    s1 += v;
    s2 += v * v;
  }
  const double mean = s1 / n, var = s2 / n - mean * mean;
  EXPECT_NEAR(mean, 1.0 / 3.0, 0.01 / 3.0);
  EXPECT_NEAR(var / (mean * mean), 4.0, 0.12);
}

TEST(RenewalSource, DeterministicAndErrors) {
  auto src = make_renewal_source({RenewalFamily::Deterministic, 0.0}, 2.0, 3);
  for (int k = 0; k < 5; ++k) EXPECT_EQ(src.next(), 0.5);
  EXPECT_THROW(make_renewal_source({RenewalFamily::Gamma, 0.0}, 1.0, 1), std::invalid_argument);
  EXPECT_THROW(make_renewal_source({RenewalFamily::Deterministic, 1.0}, 1.0, 1), std::invalid_argument);
  EXPECT_THROW(make_renewal_source({RenewalFamily::Gamma, 1.0}, 0.0, 1), std::invalid_argument);
  auto a = make_renewal_source({RenewalFamily::Gamma, 0.5}, 1.0, 9);
  auto b = make_renewal_source({RenewalFamily::Gamma, 0.5}, 1.0, 9);
  for (int k = 0; k < 10; ++k) EXPECT_EQ(a.next(), b.next());
}

TEST(PolicyAllocation, StaticModeExamples) {
  const auto [inst, an] = load_analyzed("example_a1");
  ASSERT_EQ(an.modes[0].xi, Qv({"1", "1/2", "0", "1/2"}));
  EXPECT_EQ(policy_allocation(PolicySpec::static_mode(0), {3, 2}, 0.0, inst, an),
            (std::vector<double>{1.0, 0.5, 0.0, 0.5}));
  // Class 2 empty: its activities are masked; nothing else changes.
  EXPECT_EQ(policy_allocation(PolicySpec::static_mode(0, false), {3, 0}, 0.0, inst, an),
            (std::vector<double>{1.0, 0.5, 0.0, 0.0}));
  // Work conserving: server 2 hands the masked half to activity (1,2).
  EXPECT_EQ(policy_allocation(PolicySpec::static_mode(0, true), {3, 0}, 0.0, inst, an),
            (std::vector<double>{1.0, 1.0, 0.0, 0.0}));
  // Class 1 empty: server 1's activity (2,1) has xi = 0, so the freed time is split equally.
  EXPECT_EQ(policy_allocation(PolicySpec::static_mode(0, true), {0, 4}, 0.0, inst, an),
            (std::vector<double>{0.0, 0.0, 1.0, 1.0}));
  EXPECT_EQ(policy_allocation(PolicySpec::static_mode(0, true), {0, 0}, 0.0, inst, an),
            (std::vector<double>{0.0, 0.0, 0.0, 0.0}));
}

TEST(PolicyAllocation, WorkloadThresholdAndPriority) {
  const auto [inst, an] = load_analyzed("example_a2");
  const auto sol = solve_hjb(an.coefficients, inst.gamma, HjbConfig::defaults_for(an.coefficients, inst.gamma));
  const auto pol = PolicySpec::workload_threshold(extract_policy(sol));
  std::vector<double> below, above;
  for (const auto& v : an.modes[1].xi) below.push_back(to_double(v));
  for (const auto& v : an.modes[0].xi) above.push_back(to_double(v));
  EXPECT_EQ(policy_allocation(pol, {5, 5}, 0.0, inst, an), below);
  EXPECT_EQ(policy_allocation(pol, {5, 5}, 10.0, inst, an), above);

  const auto prio = PolicySpec::server_priority(cmu_priority(inst));
  // cmu with h = 1: server 1 prefers (2,1) mu=6, server 2 prefers (2,2) mu=8.
  EXPECT_EQ(policy_allocation(prio, {1, 1}, 0.0, inst, an), (std::vector<double>{0, 0, 1, 1}));
  EXPECT_EQ(policy_allocation(prio, {1, 0}, 0.0, inst, an), (std::vector<double>{1, 1, 0, 0}));
  EXPECT_THROW(policy_allocation(PolicySpec::static_mode(7), {1, 1}, 0.0, inst, an), std::invalid_argument);
  EXPECT_THROW(policy_allocation(PolicySpec::server_priority({{1}, {0}}), {1, 1}, 0.0, inst, an),
               std::invalid_argument);
}

TEST(PolicyAllocation, AdmissibleOnRandomStates) {
  const auto [inst, an] = load_analyzed("example_e");
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> q(0, 2);
  std::vector<PolicySpec> policies{PolicySpec::server_priority(cmu_priority(inst))};
  for (std::size_t m = 0; m < an.modes.size(); ++m) {
    policies.push_back(PolicySpec::static_mode(m, true));
    policies.push_back(PolicySpec::static_mode(m, false));
  }
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<long long> x{q(rng), q(rng), q(rng)};
    for (const auto& p : policies) {
      const auto xi = policy_allocation(p, x, 0.0, inst, an);
      std::vector<double> load(inst.num_servers, 0.0);
      for (std::size_t j = 0; j < xi.size(); ++j) {
        ASSERT_GE(xi[j], 0.0);
        if (xi[j] > 0.0) ASSERT_GE(x[inst.activities[j].class_index], 1);
        load[inst.activities[j].server_index] += xi[j];
      }
      for (double l : load) ASSERT_LE(l, 1.0 + 1e-12);
    }
  }
}

TEST(RunQcp, TraceInvariants) {
  const auto [inst, an] = load_analyzed("example_e");
  const auto tr = run_qcp(inst, an, 25, PolicySpec::server_priority(cmu_priority(inst)), 4.0, 12);
  ASSERT_GT(tr.size(), 100u);
  EXPECT_EQ(tr.times.front(), 0.0);
  EXPECT_EQ(tr.times.back(), 4.0);
  for (std::size_t e = 0; e < tr.size(); ++e) {
    for (std::size_t i = 0; i < inst.num_classes; ++i) {
      long long served = 0;
      for (std::size_t j : inst.activities_of_class(i)) served += tr.d[e][j];
      ASSERT_EQ(tr.x[e][i], tr.a[e][i] - served);
      ASSERT_GE(tr.x[e][i], 0);
    }
    for (std::size_t k = 0; k < inst.num_servers; ++k) {
      double busy = 0.0;
      for (std::size_t j : inst.activities_of_server(k)) busy += tr.busy[e][j];
      ASSERT_NEAR(tr.idle[e][k], tr.times[e] - busy, 1e-12);
      ASSERT_GE(tr.idle[e][k], -1e-12);
    }
    if (e == 0) continue;
    const double dt = tr.times[e] - tr.times[e - 1];
    ASSERT_GE(dt, 0.0);
    for (std::size_t j = 0; j < inst.num_activities(); ++j) {
      const double dT = tr.busy[e][j] - tr.busy[e - 1][j];
      ASSERT_GE(dT, 0.0);
      ASSERT_LE(dT, dt * (1.0 + 1e-12) + 1e-12);
      ASSERT_NEAR(dT, tr.alloc[e][j] * dt, 1e-9);
    }
    for (std::size_t k = 0; k < inst.num_servers; ++k) ASSERT_GE(tr.idle[e][k], tr.idle[e - 1][k] - 1e-12);
  }
}

TEST(RunQcp, EmptyHorizonAndDeterminism) {
  const auto [inst, an] = load_analyzed("example_a1");
  const auto empty = run_qcp(inst, an, 100, PolicySpec::static_mode(0), 0.0, 1);
  ASSERT_EQ(empty.size(), 1u);
  EXPECT_EQ(empty.x[0], (std::vector<long long>{0, 0}));
  EXPECT_EQ(empty.busy[0], (std::vector<double>(4, 0.0)));
  const auto s = compute_scaled(empty, inst, an);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s.w_hat[0], 0.0);
  EXPECT_EQ(s.f_hat[0], 0.0);
  EXPECT_EQ(s.l_hat[0], 0.0);
  EXPECT_EQ(s.h_hat[0], 0.0);
  EXPECT_EQ(estimate_qcp_cost(inst, an, 100, PolicySpec::static_mode(0), 4, 0.0, 1).mean, 0.0);

  const auto a = run_qcp(inst, an, 25, PolicySpec::static_mode(1), 3.0, 5);
  const auto b = run_qcp(inst, an, 25, PolicySpec::static_mode(1), 3.0, 5);
  const auto c = run_qcp(inst, an, 25, PolicySpec::static_mode(1), 3.0, 6);
  EXPECT_EQ(a.times, b.times);
  EXPECT_EQ(a.x, b.x);
  EXPECT_NE(a.times, c.times);
}

TEST(RunQcp, ScalingConsistency) {
  const auto [inst, an] = load_analyzed("example_a1");
  for (long long n : {25LL, 100LL}) {
    const auto tr = run_qcp(inst, an, n, PolicySpec::static_mode(0), 2.0, 3);
    const auto s = compute_scaled(tr, inst, an);
    for (std::size_t e = 0; e < tr.size(); ++e) {
      for (std::size_t i = 0; i < inst.num_classes; ++i) {
        ASSERT_NEAR(s.x_hat[2 * e][i] * std::sqrt(double(n)), double(tr.x[e][i]), 1e-9);
      }
    }
  }
}

TEST(RunQcp, NegativeRateGuard) {
  auto inst = pss::test::single_activity("1", "1");
  inst.hat_lambda[0] = -20.0;
  const auto an = analyze(inst);
  EXPECT_EQ(minimal_admissible_n(inst), 401);
  try {
    run_qcp(inst, an, 25, PolicySpec::static_mode(0), 1.0, 1);
    FAIL() << "expected NegativeRateError";
  } catch (const NegativeRateError& e) {
    EXPECT_EQ(e.min_n(), 401);
    EXPECT_NE(std::string(e.what()).find("n >= 401"), std::string::npos);
  }
  EXPECT_NO_THROW(run_qcp(inst, an, 401, PolicySpec::static_mode(0), 0.1, 1));
  inst.hat_lambda[0] = 0.0;
  inst.hat_mu[0] = -3.0;
  EXPECT_EQ(minimal_admissible_n(inst), 10);
}

TEST(RunQcp, RefusesWhenAssumptionsFail) {
  const auto [inst, an] = load_analyzed("example_d");
  EXPECT_THROW(run_qcp(inst, an, 25, PolicySpec::static_mode(0), 1.0, 1), std::domain_error);
  auto over = pss::test::single_activity("2", "1");
  EXPECT_THROW(run_qcp(over, analyze(over), 25, PolicySpec::static_mode(0), 1.0, 1), std::domain_error);
}

TEST(RunQcp, SingleServerMatchesReflectedBrownianMean) {
  // λ = μ = 1, C² = 1: X̂ ≈ reflected BM with σ² = 2 from 0, E = σ sqrt(2t/π).
  const auto [inst, an] = load_analyzed("mm1");
  const double t0 = 5.0, t1 = 50.0, sigma = std::sqrt(2.0);
  const double exact = sigma * std::sqrt(2.0 / std::numbers::pi) * (2.0 / 3.0) *
                       (std::pow(t1, 1.5) - std::pow(t0, 1.5)) / (t1 - t0);
  const std::size_t reps = 200;
  std::vector<double> avg(reps);
  parallel_for(reps, [&](std::size_t r) {
    const auto tr = run_qcp(inst, an, 100, PolicySpec::static_mode(0), t1, 31, r);
    double area = 0.0;
    for (std::size_t e = 1; e < tr.size(); ++e) {
      const double lo = std::max(t0, tr.times[e - 1]), hi = tr.times[e];
      if (hi > lo) area += (hi - lo) * static_cast<double>(tr.x[e - 1][0]) / 10.0;
    }
    avg[r] = area / (t1 - t0);
  });
  const auto st = sample_stats(avg);
  EXPECT_NEAR(st.mean, exact, 3.0 * st.std_error);
}

TEST(RunQcp, StaticModeTracksFluidAllocation) {
  const auto [inst, an] = load_analyzed("example_a1");
  const auto tr = run_qcp(inst, an, 100, PolicySpec::static_mode(0, false), 50.0, 8);
  const auto& T = tr.busy.back();
  for (std::size_t j = 0; j < T.size(); ++j) {
    const double xi = to_double(an.modes[0].xi[j]);
    EXPECT_LE(T[j] / 50.0, xi + 1e-12);
    EXPECT_GE(T[j] / 50.0, 0.95 * xi);
  }
}

TEST(ComputeScaled, IdentityAndExactShadow) {
  for (const char* name : {"example_a1", "example_a2", "example_b", "example_e", "mm1"}) {
    const auto [inst, an] = load_analyzed(name);
    const auto tr = run_qcp(inst, an, 100, PolicySpec::static_mode(0), 3.0, 2);
    const auto s = compute_scaled(tr, inst, an);
    EXPECT_LT(s.identity_residual_max / s.scale, 1e-8) << name;
    for (long long n : {4LL, 9LL}) {
      const auto small = run_qcp(inst, an, n, PolicySpec::server_priority(cmu_priority(inst)), 2.0, 2);
      const auto exact = compute_scaled<Rational>(small, inst, an);
      EXPECT_EQ(exact.identity_residual_max, 0) << name;
    }
  }
  const auto [inst, an] = load_analyzed("example_a1");
  EXPECT_THROW(compute_scaled<Rational>(run_qcp(inst, an, 5, PolicySpec::static_mode(0), 1.0, 1), inst, an),
               std::invalid_argument);
}

TEST(ComputeScaled, NoAlwaysNonbasicMeansZeroLan) {
  const auto [inst, an] = load_analyzed("example_a1");
  for (auto c : an.classification) ASSERT_EQ(c, ActivityClass::PotentiallyBasic);
  const auto s = compute_scaled(run_qcp(inst, an, 100, PolicySpec::static_mode(1), 3.0, 4), inst, an);
  for (double v : s.l_an) ASSERT_EQ(v, 0.0);
}

TEST(ComputeScaled, AlwaysNonbasicTermIsNondecreasing) {
  std::mt19937_64 rng(77);
  int with_an = 0;
  for (int trial = 0; trial < 40 && with_an < 5; ++trial) {
    auto inst = pss::test::random_general(rng, 3, 3);
    if (!inst) continue;
    const auto an = analyze(*inst);
    bool any = false;
    for (auto c : an.classification) any |= c == ActivityClass::AlwaysNonbasic;
    if (!any) continue;
    ++with_an;
    const auto s = compute_scaled(run_qcp(*inst, an, 25, PolicySpec::server_priority(cmu_priority(*inst)), 2.0, 3),
                                  *inst, an);
    for (std::size_t k = 1; k < s.size(); ++k) ASSERT_GE(s.l_an[k], s.l_an[k - 1] - 1e-12);
    EXPECT_GT(s.l_an.back(), 0.0);
  }
  EXPECT_GE(with_an, 1);
}

TEST(CheckTrace, InequalitiesHoldOnExamples) {
  for (const char* name : {"example_a1", "example_a2", "example_e"}) {
    const auto [inst, an] = load_analyzed(name);
    const auto sol = solve_hjb(an.coefficients, inst.gamma, HjbConfig::defaults_for(an.coefficients, inst.gamma));
    for (const auto& pol : {PolicySpec::static_mode(0), PolicySpec::workload_threshold(extract_policy(sol)),
                            PolicySpec::server_priority(cmu_priority(inst))}) {
      const auto s = compute_scaled(run_qcp(inst, an, 25, pol, 3.0, 6), inst, an);
      const auto r = check_trace_inequalities(s, inst, an);
      EXPECT_LE(r.max_rel(), 1e-9) << name << " " << pol.name();
    }
  }
}

TEST(CheckTrace, SingleClassEqualityBranch) {
  auto inst = pss::test::single_activity("1", "1");
  inst.h[0] = 2.5;
  const auto an = analyze(inst);
  const auto s = compute_scaled(run_qcp(inst, an, 100, PolicySpec::static_mode(0), 5.0, 1), inst, an);
  const double c = 2.5 / to_double(an.dual->y[0]);
  for (std::size_t k = 0; k < s.size(); ++k) ASSERT_NEAR(s.h_hat[k], c * s.w_hat[k], 1e-12 * (1.0 + s.h_hat[k]));
  const auto r = check_trace_inequalities(s, inst, an);
  EXPECT_LE(r.workload_cost.max_rel, 1e-12);
  // A single work-conserving server idles only when empty, so Ŵ is exactly the reflection of F̂.
  EXPECT_LE(std::abs(r.min_reflection_slack), 1e-9 * r.scale);
}

TEST(CheckTrace, IdlingMakesReflectionStrict) {
  const auto [inst, an] = load_analyzed("example_a1");
  const auto s = compute_scaled(run_qcp(inst, an, 100, PolicySpec::static_mode(0, false), 5.0, 3), inst, an);
  const auto r = check_trace_inequalities(s, inst, an);
  EXPECT_LE(r.reflection.max_rel, 1e-9);
  const auto gamma1 = skorokhod_map(s.f_hat).phi;
  double slack = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) slack = std::max(slack, s.w_hat[k] - gamma1[k]);
  EXPECT_GT(slack, 0.1);
}

TEST(EstimateQcpCost, ThreadIndependentAndTruncationReported) {
  const auto [inst, an] = load_analyzed("mm1");
  setenv("PSS_THREADS", "1", 1);
  const auto one = estimate_qcp_cost(inst, an, 25, PolicySpec::static_mode(0), 20, 12.0, 4);
  setenv("PSS_THREADS", "3", 1);
  const auto three = estimate_qcp_cost(inst, an, 25, PolicySpec::static_mode(0), 20, 12.0, 4);
  unsetenv("PSS_THREADS");
  EXPECT_EQ(one.mean, three.mean);
  EXPECT_EQ(one.half_width_95, three.half_width_95);
  EXPECT_GT(one.truncation_bound, 0.0);
  EXPECT_LT(one.truncation_bound, 1e-3);
  EXPECT_THROW(estimate_qcp_cost(inst, an, 25, PolicySpec::static_mode(0), 1, 12.0, 4), std::invalid_argument);
}

TEST(EstimateQcpCost, MatchesTheSingleServerOracle) {
  // Exact discounted cost of the n-scaled M/M/1 started empty (resolvent of the
  // birth-death chain truncated far out), computed here independently.
  const auto [inst, an] = load_analyzed("mm1");
  const long long n = 25;
  const double rate = 25.0, g = 1.0;
  const std::size_t N = 4000;
  // Solve (g + 2 rate) v_x - rate v_{x+1} - rate v_{x-1} = x / sqrt(n), reflecting at 0.
  std::vector<double> a(N + 1, -rate), d(N + 1, g + 2.0 * rate), c(N + 1, -rate), r(N + 1);
  for (std::size_t x = 0; x <= N; ++x) r[x] = static_cast<double>(x) / 5.0;
  d[0] = g + rate;
  d[N] = g + rate;
  const double v0 = detail::solve_tridiagonal(a, d, c, r)[0];
  const auto e = estimate_qcp_cost(inst, an, n, PolicySpec::static_mode(0), 2000, 16.0, 11);
  EXPECT_NEAR(e.mean, v0, 1.5 * e.half_width_95 + 1e-6);
}

TEST(VerifyLowerBound, RefusalsAndSmoke) {
  {
    const auto [inst, an] = load_analyzed("example_d");
    HjbSolution dummy;
    try {
      verify_lower_bound(inst, an, dummy, {25}, {PolicySpec::static_mode(0)}, 4, 1, 1.0);
      FAIL();
    } catch (const std::domain_error& e) {
      EXPECT_NE(std::string(e.what()).find("dual not unique"), std::string::npos);
    }
  }
  {
    auto over = pss::test::single_activity("3", "1");
    EXPECT_THROW(verify_lower_bound(over, analyze(over), HjbSolution{}, {25}, {PolicySpec::static_mode(0)}, 4, 1, 1.0),
                 std::domain_error);
  }
  const auto [inst, an] = load_analyzed("example_a1");
  const auto sol = solve_hjb(an.coefficients, inst.gamma, HjbConfig::defaults_for(an.coefficients, inst.gamma));
  const auto rep = verify_lower_bound(inst, an, sol, {25, 100}, default_bound_policies(an, sol), 40, 3, 12.0);
  EXPECT_NEAR(rep.v0, 7.0 * 0.39123, 1e-3);
  ASSERT_EQ(rep.entries.size(), 6u);
  ASSERT_EQ(rep.best_by_n.size(), 2u);
  EXPECT_EQ(rep.entries[2].policy, "workload_threshold");
  for (const auto& e : rep.entries) EXPECT_EQ(e.pass, e.margin >= -2.0 * e.estimate.half_width_95);
}
