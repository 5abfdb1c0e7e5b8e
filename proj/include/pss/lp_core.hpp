#pragma once

// Static allocation LP, its dual, the optimal face and everything derived
// from them: modes, activity classification, standing-assumption checks,
// decomposability of the service rates and per-mode drift/variance.
//
// All LP quantities are exact rationals. Only the mode coefficients (which mix
// in second-order data) are floating point.

#include "pss/model.hpp"
#include "pss/simplex.hpp"

#include <algorithm>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pss {

struct PrimalSolution {
  Rational rho_star;
  RationalVector xi;  // a feasible allocation attaining rho_star
};

struct DualSolution {
  RationalVector y;  // per class
  RationalVector z;  // per server

  friend bool operator==(const DualSolution&, const DualSolution&) = default;
};

struct CoordinateRange {
  Rational min;
  Rational max;
};

// Description of the dual optimal face. When `unique` is false, `witnesses`
// holds two distinct optimal points.
struct DualOptima {
  Rational value;
  bool unique = false;
  DualSolution point;
  std::optional<std::pair<DualSolution, DualSolution>> witnesses;
  std::vector<CoordinateRange> y_range;
  std::vector<CoordinateRange> z_range;
};

struct Mode {
  std::size_t index = 0;
  RationalVector xi;
};

enum class ActivityClass { PotentiallyBasic, AlwaysNonbasic };

inline const char* to_string(ActivityClass c) {
  return c == ActivityClass::PotentiallyBasic ? "potentially_basic" : "always_nonbasic";
}

struct AssumptionReport {
  bool ehtc = false;
  bool full_load = false;
  bool dual_unique = false;
  Rational rho_star;
  std::string full_load_witness;    // empty when full load holds
  std::optional<std::pair<DualSolution, DualSolution>> dual_witnesses;

  bool all() const { return ehtc && full_load && dual_unique; }
};

enum class Decomposability { Decomposable, NotDecomposable, NotApplicable };

inline const char* to_string(Decomposability d) {
  switch (d) {
    case Decomposability::Decomposable: return "decomposable";
    case Decomposability::NotDecomposable: return "not_decomposable";
    case Decomposability::NotApplicable: return "not_applicable";
  }
  return "?";
}

struct Decomposition {
  RationalVector alpha;  // per class
  RationalVector beta;   // per server, sums to one
};

struct DecompositionReport {
  Decomposability status = Decomposability::NotApplicable;
  bool full_grid = false;
  bool rank_one_consistent = false;  // mu_ik alpha/beta relation holds on every present entry
  std::optional<Decomposition> decomposition;
  std::optional<Rational> lambda_over_alpha;  // sum_i lambda_i / alpha_i
  std::optional<bool> matches_dual;           // (1/alpha, beta) == unique dual
  std::string note;
};

struct ModeCoefficients {
  double b = 0.0;
  double sigma2 = 0.0;
};

struct LpAnalysis {
  PrimalSolution primal;
  std::vector<Mode> modes;
  std::vector<bool> degenerate;
  DualOptima dual_optima;
  std::optional<DualSolution> dual;  // set iff the dual is unique
  std::vector<ActivityClass> classification;
  AssumptionReport assumptions;
  DecompositionReport decomposition;
  std::optional<std::size_t> q;
  std::vector<ModeCoefficients> coefficients;

  // Unique dual; throws when the standing assumptions fail.
  const DualSolution& unique_dual() const {
    if (!assumptions.ehtc) throw std::domain_error("EHTC fails (rho* != 1)");
    if (!assumptions.full_load) throw std::domain_error("full load fails");
    if (!dual) throw std::domain_error("dual not unique");
    return *dual;
  }
};

// --- primal -----------------------------------------------------------------

inline PrimalSolution solve_primal(const PssInstance& inst) {
  const std::size_t I = inst.num_classes, K = inst.num_servers, J = inst.num_activities();
  const MatrixPair m = build_matrices(inst);
  // x = (xi[J], rho, s[K]); rows: R xi = lambda ; G xi - rho + s = 0.
  const std::size_t n = J + 1 + K;
  RationalMatrix A(I + K, RationalVector(n, Rational(0)));
  RationalVector b(I + K, Rational(0));
  for (std::size_t i = 0; i < I; ++i) {
    for (std::size_t j = 0; j < J; ++j) A[i][j] = m.R[i][j];
    b[i] = inst.lambda[i];
  }
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t j = 0; j < J; ++j) A[I + k][j] = m.G[k][j];
    A[I + k][J] = -1;
    A[I + k][J + 1 + k] = 1;
  }
  RationalVector c(n, Rational(0));
  c[J] = 1;
  LpResult r = solve_standard_lp(A, b, c);
  if (r.status != LpStatus::Optimal) {
    throw std::logic_error("static allocation LP has no optimum; instance validation should prevent this");
  }
  return {r.objective, RationalVector(r.x.begin(), r.x.begin() + static_cast<std::ptrdiff_t>(J))};
}

// --- dual -------------------------------------------------------------------

namespace detail {

// Standard-form encoding of the dual over x = (y+[I], y-[I], z[K], t[J]).
struct DualLp {
  RationalMatrix A;
  RationalVector b;
  std::size_t I, K, J;

  std::size_t size() const { return 2 * I + K + J; }

  static DualLp make(const PssInstance& inst) {
    DualLp d;
    d.I = inst.num_classes;
    d.K = inst.num_servers;
    d.J = inst.num_activities();
    const std::size_t n = d.size();
    RationalVector row(n, Rational(0));
    for (std::size_t k = 0; k < d.K; ++k) row[2 * d.I + k] = 1;
    d.A.push_back(row);
    d.b.push_back(1);
    for (std::size_t j = 0; j < d.J; ++j) {
      const auto [i, k] = inst.activities[j];
      RationalVector r(n, Rational(0));
      r[i] = inst.mu[j];
      r[d.I + i] = -inst.mu[j];
      r[2 * d.I + k] = -1;
      r[2 * d.I + d.K + j] = 1;
      d.A.push_back(std::move(r));
      d.b.push_back(0);
    }
    return d;
  }

  RationalVector y_objective(const RationalVector& weights) const {
    RationalVector c(size(), Rational(0));
    for (std::size_t i = 0; i < I; ++i) {
      c[i] = weights[i];
      c[I + i] = -weights[i];
    }
    return c;
  }

  DualSolution extract(const RationalVector& x) const {
    DualSolution s;
    for (std::size_t i = 0; i < I; ++i) s.y.push_back(x[i] - x[I + i]);
    for (std::size_t k = 0; k < K; ++k) s.z.push_back(x[2 * I + k]);
    return s;
  }
};

}  // namespace detail

// Optimal value, one optimal point, and per-coordinate min/max over the dual
// optimal face (2(I+K) auxiliary exact LPs).
inline DualOptima solve_dual(const PssInstance& inst) {
  detail::DualLp d = detail::DualLp::make(inst);
  RationalVector neg_lambda(d.I);
  for (std::size_t i = 0; i < d.I; ++i) neg_lambda[i] = -inst.lambda[i];
  LpResult top = solve_standard_lp(d.A, d.b, d.y_objective(neg_lambda));
  if (top.status != LpStatus::Optimal) throw std::logic_error("dual LP has no optimum");

  DualOptima out;
  out.value = -top.objective;
  out.point = d.extract(top.x);

  // Restrict to the optimal face: y . lambda = value.
  RationalMatrix A = d.A;
  RationalVector b = d.b;
  RationalVector face = d.y_objective(inst.lambda);
  A.push_back(face);
  b.push_back(out.value);

  auto optimize = [&](const RationalVector& c) {
    LpResult r = solve_standard_lp(A, b, c);
    if (r.status != LpStatus::Optimal) throw std::logic_error("dual face LP has no optimum");
    return d.extract(r.x);
  };

  out.unique = true;
  const std::size_t n = d.size();
  for (std::size_t coord = 0; coord < d.I + d.K; ++coord) {
    RationalVector c(n, Rational(0));
    if (coord < d.I) {
      c[coord] = 1;
      c[d.I + coord] = -1;
    } else {
      c[2 * d.I + (coord - d.I)] = 1;
    }
    DualSolution lo = optimize(c);
    for (auto& v : c) v = -v;
    DualSolution hi = optimize(c);
    const Rational vlo = coord < d.I ? lo.y[coord] : lo.z[coord - d.I];
    const Rational vhi = coord < d.I ? hi.y[coord] : hi.z[coord - d.I];
    (coord < d.I ? out.y_range : out.z_range).push_back({vlo, vhi});
    if (vlo != vhi && out.unique) {
      out.unique = false;
      out.witnesses = std::make_pair(lo, hi);
    }
  }
  return out;
}

inline bool is_dual_feasible(const PssInstance& inst, const DualSolution& s) {
  Rational sum = 0;
  for (const auto& z : s.z) {
    if (z < 0) return false;
    sum += z;
  }
  if (sum != 1) return false;
  for (std::size_t j = 0; j < inst.num_activities(); ++j) {
    const auto [i, k] = inst.activities[j];
    if (s.y[i] * inst.mu[j] > s.z[k]) return false;
  }
  return true;
}

inline Rational dual_objective(const PssInstance& inst, const DualSolution& s) {
  Rational v = 0;
  for (std::size_t i = 0; i < inst.num_classes; ++i) v += s.y[i] * inst.lambda[i];
  return v;
}

// --- optimal face -----------------------------------------------------------

namespace detail {

// Equality system [R 0; G I] (xi, s) = (lambda, rho 1) describing the face at rho.
struct FaceSystem {
  RationalMatrix M;
  RationalVector rhs;
  std::size_t J = 0;
};

inline FaceSystem face_system(const PssInstance& inst, const Rational& rho) {
  const std::size_t I = inst.num_classes, K = inst.num_servers, J = inst.num_activities();
  const MatrixPair mp = build_matrices(inst);
  FaceSystem f;
  f.J = J;
  f.M.assign(I + K, RationalVector(J + K, Rational(0)));
  f.rhs.assign(I + K, Rational(0));
  for (std::size_t i = 0; i < I; ++i) {
    for (std::size_t j = 0; j < J; ++j) f.M[i][j] = mp.R[i][j];
    f.rhs[i] = inst.lambda[i];
  }
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t j = 0; j < J; ++j) f.M[I + k][j] = mp.G[k][j];
    f.M[I + k][J + k] = 1;
    f.rhs[I + k] = rho;
  }
  return f;
}

inline RationalMatrix select_columns(const RationalMatrix& M, const std::vector<std::size_t>& cols) {
  RationalMatrix out(M.size(), RationalVector(cols.size()));
  for (std::size_t r = 0; r < M.size(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) out[r][c] = M[r][cols[c]];
  }
  return out;
}

inline bool lex_greater(const RationalVector& a, const RationalVector& b) {
  return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
}

}  // namespace detail

// Vertex test: columns of [R 0; G I] on the positive support of (xi, s) are
// linearly independent, where s = rho 1 - G xi.
inline bool is_face_vertex(const PssInstance& inst, const RationalVector& xi, const Rational& rho) {
  const detail::FaceSystem f = detail::face_system(inst, rho);
  const std::size_t K = inst.num_servers;
  std::vector<std::size_t> support;
  for (std::size_t j = 0; j < f.J; ++j) {
    if (xi[j] < 0) return false;
    if (xi[j] > 0) support.push_back(j);
  }
  for (std::size_t k = 0; k < K; ++k) {
    Rational load = 0;
    for (std::size_t j = 0; j < f.J; ++j) load += f.M[inst.num_classes + k][j] * xi[j];
    if (load > rho) return false;
    if (load < rho) support.push_back(f.J + k);
  }
  const RationalMatrix cols = detail::select_columns(f.M, support);
  return rank_of(cols) == support.size();
}

// Extreme points of {xi >= 0 : R xi = lambda, G xi <= rho 1} by exhaustive
// basis enumeration, sorted in descending lexicographic order of xi.
inline std::vector<RationalVector> enumerate_face_vertices(const PssInstance& inst, const Rational& rho) {
  detail::FaceSystem f = detail::face_system(inst, rho);
  const std::size_t cols = f.M[0].size();

  // Keep a maximal set of independent rows (the system is consistent).
  RationalMatrix rows;
  RationalVector rhs;
  for (std::size_t r = 0; r < f.M.size(); ++r) {
    RationalMatrix trial = rows;
    trial.push_back(f.M[r]);
    if (rank_of(trial) == trial.size()) {
      rows.push_back(f.M[r]);
      rhs.push_back(f.rhs[r]);
    }
  }
  const std::size_t rank = rows.size();

  std::vector<RationalVector> found;
  std::vector<std::size_t> pick(rank);
  for (std::size_t k = 0; k < rank; ++k) pick[k] = k;
  while (true) {
    if (auto x = solve_square(detail::select_columns(rows, pick), rhs)) {
      if (std::all_of(x->begin(), x->end(), [](const Rational& v) { return v >= 0; })) {
        RationalVector xi(f.J, Rational(0));
        for (std::size_t k = 0; k < rank; ++k) {
          if (pick[k] < f.J) xi[pick[k]] = (*x)[k];
        }
        if (std::find(found.begin(), found.end(), xi) == found.end()) found.push_back(std::move(xi));
      }
    }
    // next combination
    std::size_t k = rank;
    while (k > 0 && pick[k - 1] == cols - rank + (k - 1)) --k;
    if (k == 0) break;
    ++pick[k - 1];
    for (std::size_t t = k; t < rank; ++t) pick[t] = pick[t - 1] + 1;
  }
  std::sort(found.begin(), found.end(), detail::lex_greater);
  for (const auto& xi : found) {
    if (!is_face_vertex(inst, xi, rho)) throw std::logic_error("enumerated point is not a vertex");
  }
  return found;
}

// Modes of the optimal face; requires rho* = 1.
inline std::vector<Mode> enumerate_modes(const PssInstance& inst, const Rational& rho_star) {
  if (rho_star != 1) throw std::domain_error("modes are defined under EHTC (rho* = 1)");
  std::vector<Mode> modes;
  for (auto& xi : enumerate_face_vertices(inst, rho_star)) modes.push_back({modes.size(), std::move(xi)});
  return modes;
}

inline std::vector<Mode> enumerate_modes(const PssInstance& inst) {
  return enumerate_modes(inst, solve_primal(inst).rho_star);
}

// Positive support strictly below I + K - 1 activities.
inline bool is_degenerate(const PssInstance& inst, const Mode& mode) {
  std::size_t support = 0;
  for (const auto& v : mode.xi) support += v > 0 ? 1 : 0;
  return support + 1 < inst.num_classes + inst.num_servers;
}

// --- classification ---------------------------------------------------------

// Tags from the unique dual, cross-checked against the support union of the
// modes. Throws std::logic_error on a mismatch.
inline std::vector<ActivityClass> classify_activities(const PssInstance& inst, const DualSolution& dual,
                                                      const std::vector<Mode>& modes) {
  std::vector<ActivityClass> tags;
  for (std::size_t j = 0; j < inst.num_activities(); ++j) {
    const auto [i, k] = inst.activities[j];
    const Rational lhs = dual.y[i] * inst.mu[j];
    if (lhs > dual.z[k]) throw std::logic_error("dual infeasible at activity " + std::to_string(j));
    const auto tag = lhs == dual.z[k] ? ActivityClass::PotentiallyBasic : ActivityClass::AlwaysNonbasic;
    const bool used = std::any_of(modes.begin(), modes.end(), [&](const Mode& m) { return m.xi[j] > 0; });
    if (used != (tag == ActivityClass::PotentiallyBasic)) {
      throw std::logic_error("strict complementary slackness violated at activity " + std::to_string(j));
    }
    tags.push_back(tag);
  }
  return tags;
}

// Classification from the mode supports alone (definition of potentially basic).
inline std::vector<ActivityClass> classify_by_support(const PssInstance& inst, const std::vector<Mode>& modes) {
  std::vector<ActivityClass> tags(inst.num_activities(), ActivityClass::AlwaysNonbasic);
  for (const auto& m : modes) {
    for (std::size_t j = 0; j < m.xi.size(); ++j) {
      if (m.xi[j] > 0) tags[j] = ActivityClass::PotentiallyBasic;
    }
  }
  return tags;
}

// --- assumptions ------------------------------------------------------------

namespace detail {

inline AssumptionReport assess(const PssInstance& inst, const PrimalSolution& primal,
                               const std::vector<Mode>& modes, const DualOptima& dual) {
  AssumptionReport rep;
  rep.rho_star = primal.rho_star;
  rep.ehtc = primal.rho_star == 1;
  if (rep.ehtc) {
    // (G xi)_k is affine in xi: equal to one at every vertex iff on the whole face.
    rep.full_load = true;
    for (const auto& m : modes) {
      for (std::size_t k = 0; k < inst.num_servers && rep.full_load; ++k) {
        Rational load = 0;
        for (std::size_t j : inst.activities_of_server(k)) load += m.xi[j];
        if (load != 1) {
          rep.full_load = false;
          rep.full_load_witness = "mode " + std::to_string(m.index + 1) + " loads server " +
                                  std::to_string(k + 1) + " at " + to_string(load);
        }
      }
      if (!rep.full_load) break;
    }
  } else {
    rep.full_load_witness = "not evaluated: rho* = " + to_string(primal.rho_star);
  }
  rep.dual_unique = dual.unique;
  rep.dual_witnesses = dual.witnesses;
  return rep;
}

}  // namespace detail

inline AssumptionReport validate_assumptions(const PssInstance& inst) {
  const PrimalSolution primal = solve_primal(inst);
  std::vector<Mode> modes;
  if (primal.rho_star == 1) modes = enumerate_modes(inst, primal.rho_star);
  return detail::assess(inst, primal, modes, solve_dual(inst));
}

// --- decomposability --------------------------------------------------------

inline DecompositionReport check_decomposable(const PssInstance& inst) {
  const std::size_t I = inst.num_classes, K = inst.num_servers, J = inst.num_activities();
  DecompositionReport rep;
  rep.full_grid = J == I * K;

  // Propagate alpha/beta over the bipartite class-server graph from beta_0 = 1.
  std::vector<std::optional<Rational>> alpha(I), beta(K);
  beta[0] = Rational(1);
  bool progress = true;
  bool consistent = true;
  while (progress) {
    progress = false;
    for (std::size_t j = 0; j < J; ++j) {
      const auto [i, k] = inst.activities[j];
      if (beta[k] && !alpha[i]) {
        alpha[i] = inst.mu[j] / *beta[k];
        progress = true;
      } else if (alpha[i] && !beta[k]) {
        beta[k] = inst.mu[j] / *alpha[i];
        progress = true;
      }
    }
  }
  const bool connected = std::all_of(alpha.begin(), alpha.end(), [](const auto& a) { return a.has_value(); }) &&
                         std::all_of(beta.begin(), beta.end(), [](const auto& b) { return b.has_value(); });
  if (!connected) {
    rep.status = Decomposability::NotApplicable;
    rep.note = "activity graph is disconnected; scale of alpha, beta is not determined";
    return rep;
  }
  for (std::size_t j = 0; j < J && consistent; ++j) {
    const auto [i, k] = inst.activities[j];
    consistent = *alpha[i] * *beta[k] == inst.mu[j];
  }
  rep.rank_one_consistent = consistent;
  if (!consistent) {
    rep.status = Decomposability::NotDecomposable;
    rep.note = "mu_ik = alpha_i beta_k has no solution on the activity set";
    return rep;
  }

  Rational total = 0;
  for (const auto& b : beta) total += *b;
  Decomposition d;
  for (const auto& b : beta) d.beta.push_back(*b / total);
  for (const auto& a : alpha) d.alpha.push_back(*a * total);
  rep.status = Decomposability::Decomposable;
  if (!rep.full_grid) rep.note = "rank-one relation holds on all present activities (partial grid)";

  Rational sum = 0;
  for (std::size_t i = 0; i < I; ++i) sum += inst.lambda[i] / d.alpha[i];
  rep.lambda_over_alpha = sum;
  rep.decomposition = std::move(d);
  return rep;
}

// --- coefficients and q -----------------------------------------------------

inline ModeCoefficients mode_coefficients(const PssInstance& inst, const Mode& mode, const DualSolution& dual) {
  ModeCoefficients out;
  for (std::size_t i = 0; i < inst.num_classes; ++i) {
    const double y = to_double(dual.y[i]);
    double drift = inst.hat_lambda[i];
    double var = to_double(inst.lambda[i]) * inst.c2_arrival[i];
    for (std::size_t j : inst.activities_of_class(i)) {
      const double xi = to_double(mode.xi[j]);
      drift -= inst.hat_mu[j] * xi;
      var += to_double(inst.mu[j]) * inst.c2_service[j] * xi;
    }
    out.b += y * drift;
    out.sigma2 += y * y * var;
  }
  return out;
}

// argmin_i h_i / y_i, smallest index on ties.
inline std::size_t select_q(const std::vector<double>& h, const DualSolution& dual) {
  std::size_t q = 0;
  double best = h[0] / to_double(dual.y[0]);
  for (std::size_t i = 1; i < h.size(); ++i) {
    const double v = h[i] / to_double(dual.y[i]);
    if (v < best) {
      best = v;
      q = i;
    }
  }
  return q;
}

// --- full analysis ----------------------------------------------------------

inline LpAnalysis analyze(const PssInstance& inst) {
  validate(inst);
  LpAnalysis a;
  a.primal = solve_primal(inst);
  if (a.primal.rho_star == 1) {
    a.modes = enumerate_modes(inst, a.primal.rho_star);
    for (const auto& m : a.modes) a.degenerate.push_back(is_degenerate(inst, m));
  }
  a.dual_optima = solve_dual(inst);
  a.assumptions = detail::assess(inst, a.primal, a.modes, a.dual_optima);
  a.decomposition = check_decomposable(inst);

  if (a.dual_optima.unique) a.dual = a.dual_optima.point;
  if (a.assumptions.all()) {
    a.classification = classify_activities(inst, *a.dual, a.modes);
    a.q = select_q(inst.h, *a.dual);
    for (const auto& m : a.modes) a.coefficients.push_back(mode_coefficients(inst, m, *a.dual));
  } else if (!a.modes.empty()) {
    a.classification = classify_by_support(inst, a.modes);
  }
  if (a.decomposition.decomposition && a.dual) {
    const auto& d = *a.decomposition.decomposition;
    bool match = d.beta == a.dual->z;
    for (std::size_t i = 0; i < inst.num_classes && match; ++i) match = d.alpha[i] * a.dual->y[i] == 1;
    a.decomposition.matches_dual = match;
  }
  return a;
}

}  // namespace pss
