#pragma once

// One-dimensional HJB equation of the workload control problem,
//
//   min_m [ b_m u' + (sigma2_m / 2) u'' ] + z - gamma u = 0,   z > 0,
//   u'(0) = 0,  u of linear growth,
//
// solved on [0, z_max] by Howard policy iteration over a monotone
// finite-difference scheme, plus the closed-form single-mode value used as an
// oracle and the lower-bound constant V0.

#include "pss/lp_core.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pss {

// u(z) = c1 + c2 z + (c2 / c3) exp(-c3 z): cost of always using one mode.
struct SingleModeValue {
  double b = 0.0;
  double sigma2 = 0.0;
  double gamma = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;

  double value(double z) const { return c1 + c2 * z + (c2 / c3) * std::exp(-c3 * z); }
  double derivative(double z) const { return c2 * (1.0 - std::exp(-c3 * z)); }
  double second_derivative(double z) const { return c2 * c3 * std::exp(-c3 * z); }
  double u0() const { return c1 + c2 / c3; }

  // b u' + (sigma2/2) u'' + z - gamma u; zero up to rounding.
  double ode_residual(double z) const {
    return b * derivative(z) + 0.5 * sigma2 * second_derivative(z) + z - gamma * value(z);
  }
};

inline SingleModeValue single_mode_value(double b, double sigma2, double gamma) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("single_mode_value: sigma2 must be positive");
  if (!(gamma > 0.0)) throw std::invalid_argument("single_mode_value: gamma must be positive");
  SingleModeValue v{b, sigma2, gamma, 0.0, 0.0, 0.0};
  v.c2 = 1.0 / gamma;
  v.c1 = b / (gamma * gamma);
  // Positive root of (sigma2/2) c^2 - b c - gamma = 0, written to avoid
  // cancellation when b is large and negative.
  const double disc = std::sqrt(b * b + 2.0 * sigma2 * gamma);
  v.c3 = b >= 0.0 ? (b + disc) / sigma2 : 2.0 * gamma / (disc - b);
  return v;
}

// Mode that is no worse in both drift and variance than every other mode.
inline std::optional<std::size_t> dominant_mode(const std::vector<ModeCoefficients>& coeffs) {
  for (std::size_t m = 0; m < coeffs.size(); ++m) {
    bool dominates = true;
    for (const auto& other : coeffs) {
      if (coeffs[m].b > other.b || coeffs[m].sigma2 > other.sigma2) {
        dominates = false;
        break;
      }
    }
    if (dominates) return m;
  }
  return std::nullopt;
}

struct HjbConfig {
  double z_max = 20.0;
  std::size_t grid_n = 4000;
  double tol_policy = 1e-12;   // relative tie tolerance in the argmin / stopping test
  double tol_residual = 1e-7;  // bound on the discrete HJB residual
  std::size_t max_iterations = 100;

  // z_max = 20 max sigma / sqrt(gamma) + 20 max |b| / gamma.
  static HjbConfig defaults_for(const std::vector<ModeCoefficients>& coeffs, double gamma) {
    HjbConfig c;
    double smax = 0.0, bmax = 0.0;
    for (const auto& m : coeffs) {
      smax = std::max(smax, std::sqrt(m.sigma2));
      bmax = std::max(bmax, std::abs(m.b));
    }
    c.z_max = 20.0 * smax / std::sqrt(gamma) + 20.0 * bmax / gamma;
    return c;
  }
};

class HjbError : public std::runtime_error {
 public:
  HjbError(const std::string& what, double last_residual)
      : std::runtime_error(what), last_residual_(last_residual) {}
  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

struct HjbSolution {
  std::vector<double> grid;
  std::vector<double> u;
  std::vector<double> du;
  std::vector<double> d2u;
  std::vector<std::size_t> mode_at;
  std::vector<double> switch_points;
  double u0 = 0.0;
  double residual_max = 0.0;
  double min_excess = 0.0;  // min over points and non-selected modes of H_m - H_selected
  std::size_t iterations = 0;
  double gamma = 0.0;
  std::vector<ModeCoefficients> coefficients;

  double step() const { return grid.size() > 1 ? grid[1] - grid[0] : 0.0; }
};

namespace detail {

// Discrete b D1 u + (sigma2/2) D2 u at grid point i for one mode. Central
// differences when they keep the scheme monotone (|b| dz <= sigma2), upwind
// otherwise. Ghost points impose u'(0) = 0 and u'(z_max) = 1/gamma.
struct ModeStencil {
  double lower = 0.0;  // coefficient of u[i-1]
  double centre = 0.0;
  double upper = 0.0;  // coefficient of u[i+1]
  double constant = 0.0;
};

inline ModeStencil stencil(const ModeCoefficients& c, double gamma, double dz, std::size_t i, std::size_t n) {
  const double diff = 0.5 * c.sigma2 / (dz * dz);
  ModeStencil s;
  if (i == 0) {
    s.centre = -2.0 * diff;
    s.upper = 2.0 * diff;
    return s;
  }
  if (i == n) {
    s.lower = 2.0 * diff;
    s.centre = -2.0 * diff;
    s.constant = 2.0 * diff * dz / gamma + c.b / gamma;
    return s;
  }
  s.lower = diff;
  s.centre = -2.0 * diff;
  s.upper = diff;
  if (std::abs(c.b) * dz <= c.sigma2) {
    s.lower -= 0.5 * c.b / dz;
    s.upper += 0.5 * c.b / dz;
  } else if (c.b > 0.0) {
    s.upper += c.b / dz;
    s.centre -= c.b / dz;
  } else {
    s.lower -= c.b / dz;
    s.centre += c.b / dz;
  }
  return s;
}

inline double apply(const ModeStencil& s, const std::vector<double>& u, std::size_t i) {
  double v = s.centre * u[i] + s.constant;
  if (i > 0) v += s.lower * u[i - 1];
  if (i + 1 < u.size()) v += s.upper * u[i + 1];
  return v;
}

// Thomas algorithm; a = sub-diagonal, d = diagonal, c = super-diagonal.
inline std::vector<double> solve_tridiagonal(std::vector<double> a, std::vector<double> d, std::vector<double> c,
                                             std::vector<double> r) {
  const std::size_t n = d.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double w = a[i] / d[i - 1];
    d[i] -= w * c[i - 1];
    r[i] -= w * r[i - 1];
  }
  std::vector<double> x(n);
  x[n - 1] = r[n - 1] / d[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = (r[i] - c[i] * x[i + 1]) / d[i];
  return x;
}

}  // namespace detail

inline HjbSolution solve_hjb(const std::vector<ModeCoefficients>& coeffs, double gamma, const HjbConfig& config) {
  if (coeffs.empty()) throw std::invalid_argument("solve_hjb: no modes");
  for (const auto& c : coeffs) {
    if (!(c.sigma2 > 0.0)) throw std::invalid_argument("solve_hjb: sigma2 must be positive for every mode");
  }
  if (!(gamma > 0.0)) throw std::invalid_argument("solve_hjb: gamma must be positive");
  if (config.grid_n < 3 || !(config.z_max > 0.0) || !(config.tol_policy > 0.0) || !(config.tol_residual > 0.0)) {
    throw std::invalid_argument("solve_hjb: invalid configuration");
  }

  const std::size_t n = config.grid_n;
  const std::size_t M = coeffs.size();
  const double dz = config.z_max / static_cast<double>(n);

  HjbSolution sol;
  sol.gamma = gamma;
  sol.coefficients = coeffs;
  sol.grid.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) sol.grid[i] = dz * static_cast<double>(i);

  std::vector<std::vector<detail::ModeStencil>> stencils(M, std::vector<detail::ModeStencil>(n + 1));
  for (std::size_t m = 0; m < M; ++m) {
    for (std::size_t i = 0; i <= n; ++i) stencils[m][i] = detail::stencil(coeffs[m], gamma, dz, i, n);
  }

  // Start from the smallest-variance mode everywhere.
  std::size_t start = 0;
  for (std::size_t m = 1; m < M; ++m) {
    if (coeffs[m].sigma2 < coeffs[start].sigma2) start = m;
  }
  std::vector<std::size_t> policy(n + 1, start);
  std::vector<double> u;

  // Modes whose H value lies within the rounding band of the minimum. The band
  // scales with the size of the stencil terms, since far from the origin u''
  // drops below what the differences can resolve.
  auto near_min = [&](std::size_t i) {
    std::vector<double> h(M);
    double hmin = std::numeric_limits<double>::infinity();
    double scale = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
      const auto& s = stencils[m][i];
      h[m] = detail::apply(s, u, i);
      hmin = std::min(hmin, h[m]);
      double mag = std::abs(s.centre * u[i]) + std::abs(s.constant);
      if (i > 0) mag += std::abs(s.lower * u[i - 1]);
      if (i < n) mag += std::abs(s.upper * u[i + 1]);
      scale = std::max(scale, mag);
    }
    const double tie = config.tol_policy * (1.0 + scale);
    std::vector<bool> in(M);
    for (std::size_t m = 0; m < M; ++m) in[m] = h[m] <= hmin + tie;
    return in;
  };
  auto first_of = [](const std::vector<bool>& in) {
    std::size_t m = 0;
    while (!in[m]) ++m;
    return m;
  };
  auto solve_policy = [&](const std::vector<std::size_t>& pol) {
    std::vector<double> a(n + 1), d(n + 1), c(n + 1), r(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      const auto& s = stencils[pol[i]][i];
      a[i] = s.lower;
      d[i] = s.centre - gamma;
      c[i] = s.upper;
      r[i] = -sol.grid[i] - s.constant;
    }
    return detail::solve_tridiagonal(a, d, c, r);
  };

  bool stable = false;
  for (sol.iterations = 1; sol.iterations <= config.max_iterations; ++sol.iterations) {
    u = solve_policy(policy);
    std::vector<std::size_t> next(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      const auto in = near_min(i);
      next[i] = in[policy[i]] ? policy[i] : first_of(in);
    }
    if (next == policy) {
      stable = true;
      break;
    }
    policy = std::move(next);
  }

  // Among near-minimal modes keep the one used just to the left, so that
  // unresolvable differences do not flip the policy; smallest index at z = 0
  // or when the left mode is not a candidate.
  for (std::size_t i = 0; i <= n; ++i) {
    const auto in = near_min(i);
    policy[i] = (i > 0 && in[policy[i - 1]]) ? policy[i - 1] : first_of(in);
  }
  u = solve_policy(policy);

  sol.u = u;
  sol.mode_at = policy;
  sol.u0 = u[0];
  sol.du.resize(n + 1);
  sol.d2u.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    const double left = i == 0 ? u[1] : u[i - 1];
    const double right = i == n ? u[n - 1] + 2.0 * dz / gamma : u[i + 1];
    sol.du[i] = (right - left) / (2.0 * dz);
    sol.d2u[i] = (right - 2.0 * u[i] + left) / (dz * dz);
  }

  sol.residual_max = 0.0;
  sol.min_excess = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i <= n; ++i) {
    const double hsel = detail::apply(stencils[policy[i]][i], u, i);
    for (std::size_t m = 0; m < M; ++m) {
      if (m != policy[i]) sol.min_excess = std::min(sol.min_excess, detail::apply(stencils[m][i], u, i) - hsel);
    }
    if (i > 0 && i < n) sol.residual_max = std::max(sol.residual_max, std::abs(hsel + sol.grid[i] - gamma * u[i]));
  }
  if (M == 1) sol.min_excess = 0.0;

  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t a = policy[i], b = policy[i + 1];
    if (a == b) continue;
    const double d0 = detail::apply(stencils[a][i], u, i) - detail::apply(stencils[b][i], u, i);
    const double d1 = detail::apply(stencils[a][i + 1], u, i + 1) - detail::apply(stencils[b][i + 1], u, i + 1);
    double frac = 0.5;
    if (d0 != d1) frac = std::clamp(d0 / (d0 - d1), 0.0, 1.0);
    sol.switch_points.push_back(sol.grid[i] + frac * dz);
  }

  if (!stable) {
    throw HjbError("policy iteration did not converge within " + std::to_string(config.max_iterations) +
                       " iterations",
                   sol.residual_max);
  }
  if (sol.residual_max > config.tol_residual) {
    throw HjbError("HJB residual " + std::to_string(sol.residual_max) + " exceeds tolerance; refine grid_n",
                   sol.residual_max);
  }
  return sol;
}

// Piecewise-constant feedback map z -> mode index.
struct FeedbackPolicy {
  struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t mode = 0;
  };
  std::vector<Interval> intervals;  // contiguous from 0; the last extends to +infinity

  static FeedbackPolicy constant(std::size_t mode) {
    return FeedbackPolicy{{{0.0, std::numeric_limits<double>::infinity(), mode}}};
  }

  std::size_t operator()(double z) const {
    for (const auto& iv : intervals) {
      if (z < iv.hi) return iv.mode;
    }
    return intervals.back().mode;
  }

  std::vector<double> thresholds() const {
    std::vector<double> out;
    for (std::size_t k = 0; k + 1 < intervals.size(); ++k) out.push_back(intervals[k].hi);
    return out;
  }
};

// Maximal intervals of constant mode; boundaries are the interpolated switch points.
inline FeedbackPolicy extract_policy(const HjbSolution& sol) {
  FeedbackPolicy p;
  double lo = 0.0;
  std::size_t sw = 0;
  std::size_t mode = sol.mode_at.front();
  for (std::size_t i = 0; i + 1 < sol.mode_at.size(); ++i) {
    if (sol.mode_at[i + 1] != sol.mode_at[i]) {
      const double boundary = sol.switch_points.at(sw++);
      p.intervals.push_back({lo, boundary, mode});
      lo = boundary;
      mode = sol.mode_at[i + 1];
    }
  }
  p.intervals.push_back({lo, std::numeric_limits<double>::infinity(), mode});
  return p;
}

// V0 = h_q / y*_q * u(0).
inline double compute_v0(const PssInstance& inst, const LpAnalysis& analysis, const HjbSolution& sol) {
  const DualSolution& dual = analysis.unique_dual();
  const std::size_t q = analysis.q.value_or(select_q(inst.h, dual));
  return inst.h[q] / to_double(dual.y[q]) * sol.u0;
}

}  // namespace pss
