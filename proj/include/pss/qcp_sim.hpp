#pragma once

// Event-driven simulation of the n-th prelimit parallel server system.
//
// Arrivals to class i form a renewal process of rate nλ_i + √n λ̂_i. Each
// activity j owns a renewal service clock of rate nμ_j + √n μ̂_j that runs at
// speed Ξ_j(t) (processor sharing at activity level), so D_j = S_j(T_j).
// Renewals are gamma with shape 1/C² and scale C² (mean 1) divided by the
// rate; services with C² = 0 are deterministic.

#include "pss/hjb.hpp"
#include "pss/lp_core.hpp"
#include "pss/parallel.hpp"
#include "pss/rng.hpp"
#include "pss/wcp_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace pss {

// --- renewal sources --------------------------------------------------------

enum class RenewalFamily { Gamma, Deterministic };

struct DistributionSpec {
  RenewalFamily family = RenewalFamily::Gamma;
  double scv = 1.0;

  static DistributionSpec for_scv(double scv) {
    return scv == 0.0 ? DistributionSpec{RenewalFamily::Deterministic, 0.0} : DistributionSpec{RenewalFamily::Gamma, scv};
  }
};

class RenewalSource {
 public:
  RenewalSource(const DistributionSpec& spec, double rate, std::uint64_t seed)
      : family_(spec.family), mean_(1.0 / rate), gen_(seed) {
    if (!(rate > 0.0) || !std::isfinite(rate)) throw std::invalid_argument("renewal rate must be positive");
    if (spec.family == RenewalFamily::Gamma) {
      if (!(spec.scv > 0.0) || !std::isfinite(spec.scv)) {
        throw std::invalid_argument("gamma renewal needs a positive squared coefficient of variation");
      }
      gamma_ = std::gamma_distribution<double>(1.0 / spec.scv, spec.scv);
    } else if (spec.scv != 0.0) {
      throw std::invalid_argument("deterministic renewal has squared coefficient of variation 0");
    }
  }

  double next() { return family_ == RenewalFamily::Deterministic ? mean_ : mean_ * gamma_(gen_); }

 private:
  RenewalFamily family_;
  double mean_;
  std::mt19937_64 gen_;
  std::gamma_distribution<double> gamma_;
};

inline RenewalSource make_renewal_source(const DistributionSpec& spec, double rate, std::uint64_t seed) {
  return RenewalSource(spec, rate, seed);
}

// --- policies ---------------------------------------------------------------

enum class PolicyKind { StaticMode, WorkloadThreshold, ServerPriority };

struct PolicySpec {
  PolicyKind kind = PolicyKind::StaticMode;
  std::size_t mode = 0;                            // StaticMode
  FeedbackPolicy thresholds;                       // WorkloadThreshold: Ŵ -> mode
  std::vector<std::vector<std::size_t>> priority;  // ServerPriority: per server, activity indices
  bool work_conserving = true;

  static PolicySpec static_mode(std::size_t m, bool work_conserving = true) {
    PolicySpec p;
    p.kind = PolicyKind::StaticMode;
    p.mode = m;
    p.work_conserving = work_conserving;
    return p;
  }
  static PolicySpec workload_threshold(FeedbackPolicy f, bool work_conserving = true) {
    PolicySpec p;
    p.kind = PolicyKind::WorkloadThreshold;
    p.thresholds = std::move(f);
    p.work_conserving = work_conserving;
    return p;
  }
  static PolicySpec server_priority(std::vector<std::vector<std::size_t>> order) {
    PolicySpec p;
    p.kind = PolicyKind::ServerPriority;
    p.priority = std::move(order);
    return p;
  }

  std::string name() const {
    switch (kind) {
      case PolicyKind::StaticMode: return "static_mode_" + std::to_string(mode + 1);
      case PolicyKind::WorkloadThreshold: return "workload_threshold";
      case PolicyKind::ServerPriority: return "server_priority";
    }
    return "?";
  }
};

// Each server ranks its activities by h_i μ_ij, highest first (ties by index).
inline std::vector<std::vector<std::size_t>> cmu_priority(const PssInstance& inst) {
  std::vector<std::vector<std::size_t>> order(inst.num_servers);
  for (std::size_t k = 0; k < inst.num_servers; ++k) {
    order[k] = inst.activities_of_server(k);
    std::stable_sort(order[k].begin(), order[k].end(), [&](std::size_t a, std::size_t b) {
      return inst.h[inst.activities[a].class_index] * to_double(inst.mu[a]) >
             inst.h[inst.activities[b].class_index] * to_double(inst.mu[b]);
    });
  }
  return order;
}

namespace detail {

class Allocator {
 public:
  Allocator(const PssInstance& inst, const LpAnalysis& analysis, const PolicySpec& policy)
      : policy_(policy), cls_(inst.num_activities()), by_server_(inst.num_servers) {
    for (std::size_t j = 0; j < inst.num_activities(); ++j) cls_[j] = inst.activities[j].class_index;
    for (std::size_t k = 0; k < inst.num_servers; ++k) by_server_[k] = inst.activities_of_server(k);
    for (const auto& m : analysis.modes) {
      std::vector<double> xi;
      for (const auto& v : m.xi) xi.push_back(to_double(v));
      modes_.push_back(std::move(xi));
    }
    auto check_mode = [&](std::size_t m) {
      if (m >= modes_.size()) throw std::invalid_argument("policy refers to mode " + std::to_string(m + 1) +
                                                          " but the instance has " + std::to_string(modes_.size()));
    };
    switch (policy.kind) {
      case PolicyKind::StaticMode: check_mode(policy.mode); break;
      case PolicyKind::WorkloadThreshold:
        if (policy.thresholds.intervals.empty()) throw std::invalid_argument("workload threshold policy is empty");
        for (const auto& iv : policy.thresholds.intervals) check_mode(iv.mode);
        break;
      case PolicyKind::ServerPriority:
        if (policy.priority.size() != inst.num_servers) throw std::invalid_argument("priority list per server expected");
        for (std::size_t k = 0; k < inst.num_servers; ++k) {
          for (std::size_t j : policy.priority[k]) {
            if (j >= inst.num_activities() || inst.activities[j].server_index != k) {
              throw std::invalid_argument("priority list of server " + std::to_string(k + 1) +
                                          " names an activity of another server");
            }
          }
        }
        break;
    }
  }

  // Mode in force for the given workload, or nullopt for ServerPriority.
  std::optional<std::size_t> mode_for(double w_hat) const {
    switch (policy_.kind) {
      case PolicyKind::StaticMode: return policy_.mode;
      case PolicyKind::WorkloadThreshold: return policy_.thresholds(w_hat);
      case PolicyKind::ServerPriority: return std::nullopt;
    }
    return std::nullopt;
  }

  void allocate(const std::vector<long long>& x, double w_hat, std::vector<double>& out) const {
    std::fill(out.begin(), out.end(), 0.0);
    if (policy_.kind == PolicyKind::ServerPriority) {
      for (const auto& order : policy_.priority) {
        for (std::size_t j : order) {
          if (x[cls_[j]] >= 1) {
            out[j] = 1.0;
            break;
          }
        }
      }
      return;
    }
    const auto& xi = modes_[*mode_for(w_hat)];
    for (const auto& acts : by_server_) {
      double kept = 0.0, dropped = 0.0;
      std::size_t n_active = 0;
      for (std::size_t j : acts) {
        if (x[cls_[j]] >= 1) {
          out[j] = xi[j];
          kept += xi[j];
          ++n_active;
        } else {
          dropped += xi[j];
        }
      }
      if (!policy_.work_conserving || n_active == 0 || dropped <= 0.0) continue;
      for (std::size_t j : acts) {
        if (x[cls_[j]] < 1) continue;
        out[j] += kept > 0.0 ? dropped * xi[j] / kept : dropped / static_cast<double>(n_active);
      }
    }
  }

 private:
  PolicySpec policy_;
  std::vector<std::size_t> cls_;
  std::vector<std::vector<std::size_t>> by_server_;
  std::vector<std::vector<double>> modes_;
};

}  // namespace detail

// Per-activity fractions Ξ for queue lengths x and scaled workload w_hat.
inline std::vector<double> policy_allocation(const PolicySpec& policy, const std::vector<long long>& x, double w_hat,
                                             const PssInstance& inst, const LpAnalysis& analysis) {
  std::vector<double> out(inst.num_activities());
  detail::Allocator(inst, analysis, policy).allocate(x, w_hat, out);
  return out;
}

// --- rates ------------------------------------------------------------------

class NegativeRateError : public std::invalid_argument {
 public:
  NegativeRateError(const std::string& what, long long min_n) : std::invalid_argument(what), min_n_(min_n) {}
  long long min_n() const noexcept { return min_n_; }

 private:
  long long min_n_;
};

struct ScaledRates {
  std::vector<double> lambda;  // nλ + √n λ̂
  std::vector<double> mu;      // nμ + √n μ̂
};

// Smallest n with n r + √n r̂ > 0 for every (r, r̂) pair.
inline long long minimal_admissible_n(const PssInstance& inst) {
  long long best = 1;
  auto need = [&](double r, double rhat) {
    if (rhat >= 0.0) return;
    const double ratio = -rhat / r;  // need √n > ratio
    long long n = static_cast<long long>(std::floor(ratio * ratio));
    while (std::sqrt(static_cast<double>(n)) * r + rhat <= 0.0 || n < 1) ++n;
    best = std::max(best, n);
  };
  for (std::size_t i = 0; i < inst.num_classes; ++i) need(to_double(inst.lambda[i]), inst.hat_lambda[i]);
  for (std::size_t j = 0; j < inst.num_activities(); ++j) need(to_double(inst.mu[j]), inst.hat_mu[j]);
  return best;
}

inline ScaledRates scaled_rates(const PssInstance& inst, long long n) {
  if (n < 1) throw std::invalid_argument("n must be at least 1");
  const double nd = static_cast<double>(n), rn = std::sqrt(nd);
  ScaledRates r;
  bool ok = true;
  for (std::size_t i = 0; i < inst.num_classes; ++i) {
    r.lambda.push_back(nd * to_double(inst.lambda[i]) + rn * inst.hat_lambda[i]);
    ok = ok && r.lambda.back() > 0.0;
  }
  for (std::size_t j = 0; j < inst.num_activities(); ++j) {
    r.mu.push_back(nd * to_double(inst.mu[j]) + rn * inst.hat_mu[j]);
    ok = ok && r.mu.back() > 0.0;
  }
  if (!ok) {
    const long long m = minimal_admissible_n(inst);
    throw NegativeRateError("scaled rate is not positive at n = " + std::to_string(n) + "; use n >= " +
                                std::to_string(m),
                            m);
  }
  return r;
}

// --- engine -----------------------------------------------------------------

struct QcpState {
  double t = 0.0;
  std::vector<long long> x;  // queue lengths per class
  std::vector<long long> a;  // arrivals per class
  std::vector<long long> d;  // departures per activity
  std::vector<double> busy;  // T_j
};

namespace detail {

class QcpEngine {
 public:
  QcpEngine(const PssInstance& inst, const LpAnalysis& analysis, long long n, const PolicySpec& policy,
            std::uint64_t seed, std::uint64_t rep)
      : inst_(inst),
        dual_(analysis.unique_dual()),
        rates_(scaled_rates(inst, n)),
        alloc_(inst, analysis, policy),
        sqrt_n_(std::sqrt(double(n))) {
    for (const auto& v : dual_.y) y_.push_back(to_double(v));
    for (std::size_t i = 0; i < inst.num_classes; ++i) {
      if (!(inst.c2_arrival[i] > 0.0)) throw std::invalid_argument("arrival c2_a must be positive");
    }
    const std::uint64_t key = hash_combine(seed, rep);
    for (std::size_t i = 0; i < inst.num_classes; ++i) {
      arrivals_.emplace_back(DistributionSpec::for_scv(inst.c2_arrival[i]), rates_.lambda[i], hash_combine(key, i));
    }
    for (std::size_t j = 0; j < inst.num_activities(); ++j) {
      services_.emplace_back(DistributionSpec::for_scv(inst.c2_service[j]), rates_.mu[j],
                             hash_combine(key, inst.num_classes + j));
    }
  }

  const ScaledRates& rates() const { return rates_; }

  double workload(const std::vector<long long>& x) const {
    double w = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) w += y_[i] * static_cast<double>(x[i]);
    return w / sqrt_n_;
  }

  // on_segment(t0, t1, x) for each interval of constant state; on_event(state,
  // allocation used up to this point) after every jump and at the horizon.
  template <class OnSegment, class OnEvent>
  void run(double horizon, OnSegment&& on_segment, OnEvent&& on_event) {
    const std::size_t I = inst_.num_classes, J = inst_.num_activities(), K = inst_.num_servers;
    QcpState s;
    s.x.assign(I, 0);
    s.a.assign(I, 0);
    s.d.assign(J, 0);
    s.busy.assign(J, 0.0);
    std::vector<double> next_arrival(I), next_completion(J), xi(J);
    for (std::size_t i = 0; i < I; ++i) next_arrival[i] = arrivals_[i].next();
    for (std::size_t j = 0; j < J; ++j) next_completion[j] = services_[j].next();
    xi.assign(J, 0.0);
    on_event(s, xi);
    if (!(horizon > 0.0)) return;

    for (;;) {
      alloc_.allocate(s.x, workload(s.x), xi);
      check_admissible(s, xi, K);

      enum { End, Arrival, Departure } kind = End;
      std::size_t who = 0;
      double dt = horizon - s.t;
      for (std::size_t i = 0; i < I; ++i) {
        const double d = next_arrival[i] - s.t;
        if (d < dt) {
          dt = d;
          kind = Arrival;
          who = i;
        }
      }
      for (std::size_t j = 0; j < J; ++j) {
        if (xi[j] <= 0.0) continue;
        const double d = std::max(0.0, (next_completion[j] - s.busy[j]) / xi[j]);
        if (d < dt) {
          dt = d;
          kind = Departure;
          who = j;
        }
      }
      dt = std::max(0.0, dt);
      const double t1 = kind == End ? horizon : kind == Arrival ? next_arrival[who] : s.t + dt;
      on_segment(s.t, t1, s.x);
      for (std::size_t j = 0; j < J; ++j) {
        if (xi[j] > 0.0) s.busy[j] += xi[j] * dt;
      }
      s.t = t1;
      if (kind == End) {
        on_event(s, xi);
        return;
      }
      if (kind == Arrival) {
        ++s.x[who];
        ++s.a[who];
        next_arrival[who] += arrivals_[who].next();
      } else {
        s.busy[who] = next_completion[who];
        --s.x[inst_.activities[who].class_index];
        ++s.d[who];
        next_completion[who] += services_[who].next();
      }
      on_event(s, xi);
    }
  }

 private:
  void check_admissible(const QcpState& s, const std::vector<double>& xi, std::size_t K) const {
    std::vector<double> load(K, 0.0);
    for (std::size_t j = 0; j < xi.size(); ++j) {
      if (xi[j] < 0.0 || (xi[j] > 0.0 && s.x[inst_.activities[j].class_index] < 1)) {
        throw std::logic_error("inadmissible allocation: activity serves an empty class");
      }
      load[inst_.activities[j].server_index] += xi[j];
    }
    for (double l : load) {
      if (l > 1.0 + 1e-12) throw std::logic_error("inadmissible allocation: server load exceeds one");
    }
  }

  const PssInstance& inst_;
  const DualSolution& dual_;
  ScaledRates rates_;
  Allocator alloc_;
  double sqrt_n_;
  std::vector<double> y_;
  std::vector<RenewalSource> arrivals_;
  std::vector<RenewalSource> services_;
};

}  // namespace detail

// --- traces -----------------------------------------------------------------

struct QcpTrace {
  long long n = 1;
  ScaledRates rates;
  std::vector<double> times;
  std::vector<std::vector<long long>> x;     // X_i at each event (after the jump)
  std::vector<std::vector<long long>> a;     // A_i
  std::vector<std::vector<long long>> d;     // D_j = S_j(T_j)
  std::vector<std::vector<double>> busy;     // T_j
  std::vector<std::vector<double>> idle;     // I_k = t - (G T)_k
  std::vector<std::vector<double>> alloc;    // Ξ in force on the interval ending at this event

  std::size_t size() const { return times.size(); }
};

inline QcpTrace run_qcp(const PssInstance& inst, const LpAnalysis& analysis, long long n, const PolicySpec& policy,
                        double horizon, std::uint64_t seed, std::uint64_t rep = 0) {
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("horizon must be nonnegative");
  detail::QcpEngine engine(inst, analysis, n, policy, seed, rep);
  QcpTrace tr;
  tr.n = n;
  tr.rates = engine.rates();
  engine.run(
      horizon, [](double, double, const std::vector<long long>&) {},
      [&](const QcpState& s, const std::vector<double>& xi) {
        tr.times.push_back(s.t);
        tr.x.push_back(s.x);
        tr.a.push_back(s.a);
        tr.d.push_back(s.d);
        tr.busy.push_back(s.busy);
        std::vector<double> idle(inst.num_servers, s.t);
        for (std::size_t j = 0; j < inst.num_activities(); ++j) idle[inst.activities[j].server_index] -= s.busy[j];
        tr.idle.push_back(std::move(idle));
        tr.alloc.push_back(xi);
      });
  return tr;
}

// --- scaled series ----------------------------------------------------------

namespace detail {

template <class S>
S to_scalar(double v) {
  return S(v);
}

template <class S>
S to_scalar(const Rational& v) {
  if constexpr (std::is_same_v<S, Rational>) {
    return v;
  } else {
    return to_double(v);
  }
}

template <class S>
S sqrt_of(long long n) {
  if constexpr (std::is_same_v<S, Rational>) {
    const long long r = std::llround(std::sqrt(static_cast<double>(n)));
    if (r * r != n) throw std::invalid_argument("exact scaled series need n to be a perfect square");
    return Rational(r);
  } else {
    return std::sqrt(static_cast<double>(n));
  }
}

template <class S>
S abs_of(const S& v) {
  return v < 0 ? S(-v) : v;
}

}  // namespace detail

// Samples are taken just before each jump (pre = true) and just after it, so
// the piecewise-linear F̂ is represented by all its breakpoints.
template <class S>
struct ScaledSeriesT {
  long long n = 1;
  std::vector<double> times;
  std::vector<bool> pre;
  std::vector<std::vector<S>> x_hat;  // per sample, per class
  std::vector<std::vector<S>> a_hat;
  std::vector<std::vector<S>> s_hat;  // Ŝ_j(T_j), per activity
  std::vector<std::vector<S>> i_hat;  // per server
  std::vector<S> w_hat, f_hat, l_hat, l_an, h_hat;
  S identity_residual_max = S(0);  // max |Ŵ - F̂ - L̂ - L̂_AN|
  S scale = S(1);                  // max(1, max magnitude of the series entering the identity)

  std::size_t size() const { return times.size(); }
};

using ScaledSeries = ScaledSeriesT<double>;

template <class S = double>
ScaledSeriesT<S> compute_scaled(const QcpTrace& tr, const PssInstance& inst, const LpAnalysis& analysis) {
  using detail::to_scalar;
  const DualSolution& dual = analysis.unique_dual();
  const std::size_t I = inst.num_classes, J = inst.num_activities(), K = inst.num_servers;
  const S rn = detail::sqrt_of<S>(tr.n);
  const S nn = S(tr.n);

  std::vector<S> y(I), lam_n(I), lam_hat(I), h(I), z(K), mu_n(J), mu_hat(J), an_weight(J, S(0));
  for (std::size_t i = 0; i < I; ++i) {
    y[i] = to_scalar<S>(dual.y[i]);
    lam_hat[i] = to_scalar<S>(inst.hat_lambda[i]);
    lam_n[i] = nn * to_scalar<S>(inst.lambda[i]) + rn * lam_hat[i];
    h[i] = to_scalar<S>(inst.h[i]);
  }
  for (std::size_t k = 0; k < K; ++k) z[k] = to_scalar<S>(dual.z[k]);
  for (std::size_t j = 0; j < J; ++j) {
    mu_hat[j] = to_scalar<S>(inst.hat_mu[j]);
    mu_n[j] = nn * to_scalar<S>(inst.mu[j]) + rn * mu_hat[j];
    if (analysis.classification[j] == ActivityClass::AlwaysNonbasic) {
      const auto& act = inst.activities[j];
      an_weight[j] = z[act.server_index] - y[act.class_index] * to_scalar<S>(inst.mu[j]);
    }
  }

  ScaledSeriesT<S> out;
  out.n = tr.n;
  auto sample = [&](double td, bool is_pre, const std::vector<long long>& x, const std::vector<long long>& a,
                    const std::vector<long long>& d, const std::vector<double>& busyd) {
    const S t = to_scalar<S>(td);
    std::vector<S> busy(J);
    for (std::size_t j = 0; j < J; ++j) busy[j] = to_scalar<S>(busyd[j]);
    std::vector<S> xh(I), ah(I), sh(J), ih(K);
    for (std::size_t i = 0; i < I; ++i) {
      xh[i] = S(x[i]) / rn;
      ah[i] = (S(a[i]) - lam_n[i] * t) / rn;
    }
    for (std::size_t j = 0; j < J; ++j) sh[j] = (S(d[j]) - mu_n[j] * busy[j]) / rn;
    for (std::size_t k = 0; k < K; ++k) ih[k] = t;
    for (std::size_t j = 0; j < J; ++j) ih[inst.activities[j].server_index] -= busy[j];
    for (std::size_t k = 0; k < K; ++k) ih[k] *= rn;

    S w(0), f(0), l(0), lan(0), hh(0);
    for (std::size_t i = 0; i < I; ++i) {
      w += y[i] * xh[i];
      hh += h[i] * xh[i];
      S term = ah[i] + lam_hat[i] * t;
      for (std::size_t j : inst.activities_of_class(i)) term -= sh[j] + mu_hat[j] * busy[j];
      f += y[i] * term;
    }
    for (std::size_t k = 0; k < K; ++k) l += z[k] * ih[k];
    for (std::size_t j = 0; j < J; ++j) lan += an_weight[j] * busy[j];
    lan *= rn;

    const S residual = detail::abs_of<S>(w - f - l - lan);
    if (residual > out.identity_residual_max) out.identity_residual_max = residual;
    for (const S& v : {w, f, l, lan, hh}) {
      const S m = detail::abs_of<S>(v);
      if (m > out.scale) out.scale = m;
    }
    out.times.push_back(td);
    out.pre.push_back(is_pre);
    out.x_hat.push_back(std::move(xh));
    out.a_hat.push_back(std::move(ah));
    out.s_hat.push_back(std::move(sh));
    out.i_hat.push_back(std::move(ih));
    out.w_hat.push_back(w);
    out.f_hat.push_back(f);
    out.l_hat.push_back(l);
    out.l_an.push_back(lan);
    out.h_hat.push_back(hh);
  };

  for (std::size_t e = 0; e < tr.size(); ++e) {
    if (e > 0) sample(tr.times[e], true, tr.x[e - 1], tr.a[e - 1], tr.d[e - 1], tr.busy[e]);
    sample(tr.times[e], false, tr.x[e], tr.a[e], tr.d[e], tr.busy[e]);
  }
  return out;
}

struct Violation {
  double max_abs = 0.0;
  double max_rel = 0.0;  // max_abs / series scale
  std::size_t worst_sample = 0;
};

struct TraceCheckReport {
  Violation workload_cost;      // Ĥ >= h_q / y_q Ŵ, equality when only class q is nonempty
  Violation reflection;         // Ŵ >= Γ1[F̂]
  Violation identity;           // Ŵ = F̂ + L̂ + L̂_AN
  Violation nonnegative_queue;  // X̂ >= 0
  Violation idleness;           // Î >= 0 and nondecreasing
  double scale = 1.0;
  double min_reflection_slack = 0.0;  // min over samples of Ŵ - Γ1[F̂]

  double max_rel() const {
    return std::max({workload_cost.max_rel, reflection.max_rel, identity.max_rel, nonnegative_queue.max_rel,
                     idleness.max_rel});
  }
};

inline TraceCheckReport check_trace_inequalities(const ScaledSeries& s, const PssInstance& inst,
                                                 const LpAnalysis& analysis) {
  const DualSolution& dual = analysis.unique_dual();
  const std::size_t q = analysis.q.value_or(select_q(inst.h, dual));
  const double c = inst.h[q] / to_double(dual.y[q]);
  TraceCheckReport r;
  r.scale = s.scale;
  auto note = [&](Violation& v, double amount, std::size_t k) {
    if (amount > v.max_abs) {
      v.max_abs = amount;
      v.worst_sample = k;
    }
  };

  const auto gamma1 = skorokhod_map(s.f_hat).phi;
  r.min_reflection_slack = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double bound = c * s.w_hat[k];
    bool only_q = true;
    for (std::size_t i = 0; i < inst.num_classes; ++i) {
      if (i != q && s.x_hat[k][i] != 0.0) only_q = false;
    }
    note(r.workload_cost, only_q ? std::abs(s.h_hat[k] - bound) : std::max(0.0, bound - s.h_hat[k]), k);
    note(r.reflection, std::max(0.0, gamma1[k] - s.w_hat[k]), k);
    r.min_reflection_slack = std::min(r.min_reflection_slack, s.w_hat[k] - gamma1[k]);
    note(r.identity, std::abs(s.w_hat[k] - s.f_hat[k] - s.l_hat[k] - s.l_an[k]), k);
    for (double v : s.x_hat[k]) note(r.nonnegative_queue, std::max(0.0, -v), k);
    for (std::size_t m = 0; m < s.i_hat[k].size(); ++m) {
      note(r.idleness, std::max(0.0, -s.i_hat[k][m]), k);
      if (k > 0) note(r.idleness, std::max(0.0, s.i_hat[k - 1][m] - s.i_hat[k][m]), k);
    }
  }
  if (s.size() == 0) r.min_reflection_slack = 0.0;
  for (Violation* v : {&r.workload_cost, &r.reflection, &r.identity, &r.nonnegative_queue, &r.idleness}) {
    v->max_rel = v->max_abs / s.scale;
  }
  return r;
}

// --- cost estimation --------------------------------------------------------

// Discounted cost of one replication, integrated exactly between events, and
// Ĥ at the horizon.
struct QcpRepCost {
  double cost = 0.0;
  double h_at_horizon = 0.0;
};

inline QcpRepCost qcp_rep_cost(const PssInstance& inst, const LpAnalysis& analysis, long long n,
                               const PolicySpec& policy, double horizon, std::uint64_t seed, std::uint64_t rep) {
  detail::QcpEngine engine(inst, analysis, n, policy, seed, rep);
  const double g = inst.gamma, rn = std::sqrt(static_cast<double>(n));
  QcpRepCost out;
  double last_h = 0.0;
  engine.run(
      horizon,
      [&](double t0, double t1, const std::vector<long long>& x) {
        double hx = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) hx += inst.h[i] * static_cast<double>(x[i]);
        if (hx == 0.0 || t1 <= t0) return;
        out.cost += hx / rn * std::exp(-g * t0) * -std::expm1(-g * (t1 - t0)) / g;
      },
      [&](const QcpState& s, const std::vector<double>&) {
        double hx = 0.0;
        for (std::size_t i = 0; i < s.x.size(); ++i) hx += inst.h[i] * static_cast<double>(s.x[i]);
        last_h = hx / rn;
      });
  out.h_at_horizon = last_h;
  return out;
}

inline double default_qcp_horizon(const PssInstance& inst) { return 12.0 / inst.gamma; }

inline McEstimate estimate_qcp_cost(const PssInstance& inst, const LpAnalysis& analysis, long long n,
                                    const PolicySpec& policy, std::size_t n_reps, double horizon, std::uint64_t seed) {
  if (n_reps < 2) throw std::invalid_argument("n_reps must be at least 2");
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("horizon must be nonnegative");
  // Fail fast on the calling thread for bad input.
  detail::QcpEngine probe(inst, analysis, n, policy, seed, 0);
  std::vector<double> cost(n_reps), tail(n_reps);
  parallel_for(n_reps, [&](std::size_t r) {
    const auto c = qcp_rep_cost(inst, analysis, n, policy, horizon, seed, r);
    cost[r] = c.cost;
    tail[r] = c.h_at_horizon;
  });
  const auto stats = sample_stats(cost);
  McEstimate e;
  e.mean = stats.mean;
  e.half_width_95 = stats.half_width_95;
  e.n_paths = n_reps;
  e.step = 0.0;
  e.horizon = horizon;
  e.truncation_bound = std::exp(-inst.gamma * horizon) * sample_stats(tail).mean / inst.gamma;
  return e;
}

// --- lower-bound verification -----------------------------------------------

struct BoundEntry {
  long long n = 0;
  std::string policy;
  McEstimate estimate;
  double margin = 0.0;  // Ĵ - V0
  bool pass = false;    // margin >= -2 CI
};

struct BoundReport {
  double v0 = 0.0;
  std::vector<BoundEntry> entries;
  std::vector<std::pair<long long, double>> best_by_n;  // min over policies of Ĵ
  bool best_nonincreasing = false;
  bool pass = false;
};

inline BoundReport verify_lower_bound(const PssInstance& inst, const LpAnalysis& analysis, const HjbSolution& hjb,
                                      const std::vector<long long>& n_list, const std::vector<PolicySpec>& policies,
                                      std::size_t n_reps, std::uint64_t seed, double horizon) {
  analysis.unique_dual();
  BoundReport rep;
  rep.v0 = compute_v0(inst, analysis, hjb);
  rep.pass = true;
  for (long long n : n_list) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : policies) {
      BoundEntry e;
      e.n = n;
      e.policy = p.name();
      e.estimate = estimate_qcp_cost(inst, analysis, n, p, n_reps, horizon, seed);
      e.margin = e.estimate.mean - rep.v0;
      e.pass = e.margin >= -2.0 * e.estimate.half_width_95;
      rep.pass = rep.pass && e.pass;
      best = std::min(best, e.estimate.mean);
      rep.entries.push_back(std::move(e));
    }
    rep.best_by_n.emplace_back(n, best);
  }
  rep.best_nonincreasing = true;
  for (std::size_t k = 1; k < rep.best_by_n.size(); ++k) {
    if (rep.best_by_n[k].second > rep.best_by_n[k - 1].second) rep.best_nonincreasing = false;
  }
  return rep;
}

// Static modes in index order followed by the HJB workload-threshold policy.
inline std::vector<PolicySpec> default_bound_policies(const LpAnalysis& analysis, const HjbSolution& hjb) {
  std::vector<PolicySpec> out;
  for (std::size_t m = 0; m < analysis.modes.size(); ++m) out.push_back(PolicySpec::static_mode(m));
  out.push_back(PolicySpec::workload_threshold(extract_policy(hjb)));
  return out;
}

}  // namespace pss
