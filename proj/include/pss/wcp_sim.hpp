#pragma once

// Reflected controlled diffusion dZ = b(m) dt + sigma(m) dB + dL on [0, inf)
// under a stationary feedback policy, the one-sided Skorokhod map, and a
// Monte Carlo estimate of E int_0^T e^{-gamma t} Z_t dt.
//
// Two discretizations:
//   ProjectedEuler    Z' = max(0, Z + b dt + sigma sqrt(dt) N); L picks up the clipped part.
//   BridgeReflection  draws the minimum of the Brownian bridge over the step and
//                     reflects it, which is exact in law for a constant mode.

#include "pss/hjb.hpp"
#include "pss/parallel.hpp"
#include "pss/rng.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace pss {

enum class WcpScheme { ProjectedEuler, BridgeReflection };

struct SamplePath1D {
  std::vector<double> times;
  std::vector<double> values;
  std::vector<double> local_time;
  std::vector<std::size_t> mode_trace;  // policy(values[k]), used on step k
};

struct SkorokhodResult {
  std::vector<double> phi;
  std::vector<double> eta;
};

// eta_k = max_{j <= k} (psi_j)^-, phi = psi + eta.
inline SkorokhodResult skorokhod_map(const std::vector<double>& psi) {
  SkorokhodResult r;
  r.phi.resize(psi.size());
  r.eta.resize(psi.size());
  double eta = 0.0;
  for (std::size_t k = 0; k < psi.size(); ++k) {
    eta = std::max(eta, -psi[k]);
    r.eta[k] = eta;
    r.phi[k] = psi[k] + eta;
  }
  return r;
}

struct McEstimate {
  double mean = 0.0;
  double half_width_95 = 0.0;
  std::size_t n_paths = 0;
  double step = 0.0;
  double horizon = 0.0;
  double truncation_bound = 0.0;
};

namespace detail {

inline std::size_t step_count(double step, double horizon) {
  if (!(step > 0.0) || !std::isfinite(step)) throw std::invalid_argument("step must be positive");
  if (!(horizon >= step) || !std::isfinite(horizon)) throw std::invalid_argument("horizon must be at least one step");
  return static_cast<std::size_t>(std::llround(horizon / step));
}

inline void check_wcp_inputs(const FeedbackPolicy& policy, const std::vector<ModeCoefficients>& coeffs, double z0) {
  if (coeffs.empty()) throw std::invalid_argument("no modes");
  for (const auto& c : coeffs) {
    if (!(c.sigma2 > 0.0) || !std::isfinite(c.b)) throw std::invalid_argument("sigma2 must be positive for every mode");
  }
  if (policy.intervals.empty()) throw std::invalid_argument("empty policy");
  for (const auto& iv : policy.intervals) {
    if (iv.mode >= coeffs.size()) throw std::invalid_argument("policy refers to an unknown mode");
  }
  if (!(z0 >= 0.0) || !std::isfinite(z0)) throw std::invalid_argument("z0 must be nonnegative");
}

class WcpStepper {
 public:
  WcpStepper(const std::vector<ModeCoefficients>& coeffs, double step, WcpScheme scheme) : scheme_(scheme) {
    for (const auto& c : coeffs) {
      drift_.push_back(c.b * step);
      vol_.push_back(std::sqrt(c.sigma2 * step));
      var_.push_back(c.sigma2 * step);
    }
  }

  // Runs one path; visit(k, Z_k, L_k, mode_k) is called for k = 0..n.
  template <class Visit>
  void run(const FeedbackPolicy& policy, double z0, std::size_t n, const CounterRng& normals,
           const CounterRng& uniforms, Visit&& visit) const {
    double z = z0;
    double local = 0.0;
    double spare = 0.0;
    for (std::size_t k = 0;; ++k) {
      const std::size_t m = policy(z);
      visit(k, z, local, m);
      if (k == n) break;
      double g;
      if (k % 2 == 0) {
        const auto [a, b] = normals.normal_pair(k / 2);
        g = a;
        spare = b;
      } else {
        g = spare;
      }
      const double x = drift_[m] + vol_[m] * g;
      double push;
      if (scheme_ == WcpScheme::ProjectedEuler) {
        push = std::max(0.0, -(z + x));
      } else {
        // P(bridge minimum below -z) = exp(-2 z (z + x) / (sigma^2 dt)); skip the
        // draw when that is negligible.
        const double expo = 2.0 * z * (z + x) / var_[m];
        if (z + x > 0.0 && expo > 40.0) {
          push = 0.0;
        } else {
          const double u = uniforms.uniform(k);
          const double low = 0.5 * (x - std::sqrt(x * x - 2.0 * var_[m] * std::log(u)));
          push = std::max(0.0, -(z + low));
        }
      }
      z = z + x + push;
      local += push;
    }
  }

 private:
  WcpScheme scheme_;
  std::vector<double> drift_;
  std::vector<double> vol_;
  std::vector<double> var_;
};

}  // namespace detail

inline SamplePath1D simulate_wcp(const FeedbackPolicy& policy, const std::vector<ModeCoefficients>& coeffs, double z0,
                                 double step, double horizon, std::uint64_t seed,
                                 WcpScheme scheme = WcpScheme::ProjectedEuler, std::uint64_t path_id = 0) {
  detail::check_wcp_inputs(policy, coeffs, z0);
  const std::size_t n = detail::step_count(step, horizon);
  SamplePath1D path;
  path.times.reserve(n + 1);
  path.values.reserve(n + 1);
  path.local_time.reserve(n + 1);
  path.mode_trace.reserve(n + 1);
  detail::WcpStepper stepper(coeffs, step, scheme);
  stepper.run(policy, z0, n, CounterRng(seed, path_id, 0), CounterRng(seed, path_id, 1),
              [&](std::size_t k, double z, double l, std::size_t m) {
                path.times.push_back(step * static_cast<double>(k));
                path.values.push_back(z);
                path.local_time.push_back(l);
                path.mode_trace.push_back(m);
              });
  return path;
}

// Bound on E int_T^inf e^{-gamma t} Z_t dt from E Z_t <= z0 + 2 b+ t + 4 sigma sqrt(t)
// (reflection at most doubles the excursion of the free path; Doob for the martingale).
inline double wcp_truncation_bound(const std::vector<ModeCoefficients>& coeffs, double gamma, double z0,
                                   double horizon) {
  double bplus = 0.0, smax = 0.0;
  for (const auto& c : coeffs) {
    bplus = std::max(bplus, c.b);
    smax = std::max(smax, std::sqrt(c.sigma2));
  }
  const double T = horizon;
  return std::exp(-gamma * T) * ((z0 + 2.0 * bplus * T + 4.0 * smax * std::sqrt(T)) / gamma +
                                 (2.0 * bplus + 2.0 * smax / std::sqrt(T)) / (gamma * gamma));
}

// Discounted area of one path by the trapezoid rule on the simulation grid.
inline double wcp_path_cost(const detail::WcpStepper& stepper, const FeedbackPolicy& policy, double gamma, double z0,
                            double step, std::size_t n, std::uint64_t seed, std::uint64_t path_id) {
  const double decay = std::exp(-gamma * step);
  double disc = 1.0;
  double prev = 0.0;
  double area = 0.0;
  stepper.run(policy, z0, n, CounterRng(seed, path_id, 0), CounterRng(seed, path_id, 1),
              [&](std::size_t k, double z, double, std::size_t) {
                const double cur = disc * z;
                if (k > 0) area += 0.5 * step * (prev + cur);
                prev = cur;
                disc *= decay;
              });
  return area;
}

inline McEstimate estimate_wcp_cost(const FeedbackPolicy& policy, const std::vector<ModeCoefficients>& coeffs,
                                    double gamma, double z0, double step, double horizon, std::size_t n_paths,
                                    std::uint64_t seed, WcpScheme scheme = WcpScheme::BridgeReflection) {
  detail::check_wcp_inputs(policy, coeffs, z0);
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  if (n_paths < 2) throw std::invalid_argument("n_paths must be at least 2");
  const std::size_t n = detail::step_count(step, horizon);
  const detail::WcpStepper stepper(coeffs, step, scheme);
  std::vector<double> cost(n_paths);
  parallel_for(n_paths, [&](std::size_t p) { cost[p] = wcp_path_cost(stepper, policy, gamma, z0, step, n, seed, p); });
  const auto stats = sample_stats(cost);
  McEstimate e;
  e.mean = stats.mean;
  e.half_width_95 = stats.half_width_95;
  e.n_paths = n_paths;
  e.step = step;
  e.horizon = step * static_cast<double>(n);
  e.truncation_bound = wcp_truncation_bound(coeffs, gamma, z0, e.horizon);
  return e;
}

}  // namespace pss
