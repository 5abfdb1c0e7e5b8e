#pragma once

// Dense two-phase tableau simplex over exact rationals, Bland's rule.
//
//   minimize c.x  subject to  A x = b,  x >= 0
//
// Sized for the handful of rows/columns of a desk-scale parallel server
// system; no attempt is made at sparsity or numerical pivoting.

#include "pss/rational.hpp"

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

namespace pss {

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  Rational objective;
  RationalVector x;
};

namespace detail {

class Tableau {
 public:
  // rows x (cols + 1); last column is the right-hand side. Row `rows` is the
  // reduced-cost row with the negated objective value in its last entry.
  Tableau(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), t_(rows + 1, RationalVector(cols + 1, Rational(0))),
        basis_(rows, 0) {}

  Rational& at(std::size_t r, std::size_t c) { return t_[r][c]; }
  const Rational& at(std::size_t r, std::size_t c) const { return t_[r][c]; }
  Rational& rhs(std::size_t r) { return t_[r][cols_]; }
  const Rational& rhs(std::size_t r) const { return t_[r][cols_]; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::vector<std::size_t>& basis() { return basis_; }
  const std::vector<std::size_t>& basis() const { return basis_; }

  void pivot(std::size_t pr, std::size_t pc) {
    const Rational p = t_[pr][pc];
    for (auto& v : t_[pr]) v /= p;
    for (std::size_t r = 0; r <= rows_; ++r) {
      if (r == pr || t_[r][pc] == 0) continue;
      const Rational f = t_[r][pc];
      for (std::size_t c = 0; c <= cols_; ++c) {
        if (t_[pr][c] != 0) t_[r][c] -= f * t_[pr][c];
      }
    }
    basis_[pr] = pc;
  }

  // Sets the cost row from `cost` (length cols) and prices out the basis.
  void set_cost(const RationalVector& cost) {
    auto& z = t_[rows_];
    for (std::size_t c = 0; c < cols_; ++c) z[c] = cost[c];
    z[cols_] = 0;
    for (std::size_t r = 0; r < rows_; ++r) {
      const Rational cb = cost[basis_[r]];
      if (cb == 0) continue;
      for (std::size_t c = 0; c <= cols_; ++c) {
        if (t_[r][c] != 0) z[c] -= cb * t_[r][c];
      }
    }
  }

  // Bland's rule iterations restricted to columns with allowed[c] == true.
  // Returns false if the problem is unbounded.
  bool optimize(const std::vector<bool>& allowed) {
    for (;;) {
      std::optional<std::size_t> enter;
      for (std::size_t c = 0; c < cols_; ++c) {
        if (allowed[c] && t_[rows_][c] < 0) {
          enter = c;
          break;
        }
      }
      if (!enter) return true;
      std::optional<std::size_t> leave;
      Rational best_ratio;
      for (std::size_t r = 0; r < rows_; ++r) {
        if (t_[r][*enter] <= 0) continue;
        Rational ratio = t_[r][cols_] / t_[r][*enter];
        if (!leave || ratio < best_ratio || (ratio == best_ratio && basis_[r] < basis_[*leave])) {
          leave = r;
          best_ratio = ratio;
        }
      }
      if (!leave) return false;
      pivot(*leave, *enter);
    }
  }

  // Removes row r (used for redundant equality rows after phase one).
  void drop_row(std::size_t r) {
    t_.erase(t_.begin() + static_cast<std::ptrdiff_t>(r));
    basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(r));
    --rows_;
  }

 private:
  std::size_t rows_;
  std::size_t cols_;
  RationalMatrix t_;
  std::vector<std::size_t> basis_;
};

}  // namespace detail

inline LpResult solve_standard_lp(const RationalMatrix& A, const RationalVector& b,
                                  const RationalVector& c) {
  const std::size_t m = A.size();
  const std::size_t n = c.size();
  if (b.size() != m) throw std::invalid_argument("solve_standard_lp: b has wrong size");
  for (const auto& row : A) {
    if (row.size() != n) throw std::invalid_argument("solve_standard_lp: ragged A");
  }

  // Phase one: artificial column n + r for each row r.
  detail::Tableau tab(m, n + m);
  for (std::size_t r = 0; r < m; ++r) {
    const bool flip = b[r] < 0;
    for (std::size_t col = 0; col < n; ++col) tab.at(r, col) = flip ? Rational(-A[r][col]) : A[r][col];
    tab.at(r, n + r) = 1;
    tab.rhs(r) = flip ? Rational(-b[r]) : b[r];
    tab.basis()[r] = n + r;
  }
  RationalVector phase1(n + m, Rational(0));
  for (std::size_t r = 0; r < m; ++r) phase1[n + r] = 1;
  tab.set_cost(phase1);
  std::vector<bool> all(n + m, true);
  tab.optimize(all);

  LpResult result;
  if (tab.rhs(tab.rows()) != 0) {  // -(sum of artificials) at optimum
    result.status = LpStatus::Infeasible;
    return result;
  }

  // Drive remaining artificials out of the basis; drop redundant rows.
  for (std::size_t r = 0; r < tab.rows();) {
    if (tab.basis()[r] < n) {
      ++r;
      continue;
    }
    std::optional<std::size_t> col;
    for (std::size_t k = 0; k < n; ++k) {
      if (tab.at(r, k) != 0) {
        col = k;
        break;
      }
    }
    if (col) {
      tab.pivot(r, *col);
      ++r;
    } else {
      tab.drop_row(r);
    }
  }

  RationalVector phase2(n + m, Rational(0));
  for (std::size_t k = 0; k < n; ++k) phase2[k] = c[k];
  tab.set_cost(phase2);
  std::vector<bool> structural(n + m, false);
  for (std::size_t k = 0; k < n; ++k) structural[k] = true;
  if (!tab.optimize(structural)) {
    result.status = LpStatus::Unbounded;
    return result;
  }

  result.status = LpStatus::Optimal;
  result.x.assign(n, Rational(0));
  for (std::size_t r = 0; r < tab.rows(); ++r) {
    if (tab.basis()[r] < n) result.x[tab.basis()[r]] = tab.rhs(r);
  }
  result.objective = 0;
  for (std::size_t k = 0; k < n; ++k) result.objective += c[k] * result.x[k];
  return result;
}

// Gaussian elimination helpers shared by the vertex enumeration.

inline std::size_t rank_of(RationalMatrix M) {
  std::size_t rank = 0;
  const std::size_t rows = M.size();
  const std::size_t cols = rows ? M[0].size() : 0;
  for (std::size_t c = 0; c < cols && rank < rows; ++c) {
    std::size_t p = rank;
    while (p < rows && M[p][c] == 0) ++p;
    if (p == rows) continue;
    std::swap(M[p], M[rank]);
    for (std::size_t r = 0; r < rows; ++r) {
      if (r == rank || M[r][c] == 0) continue;
      const Rational f = M[r][c] / M[rank][c];
      for (std::size_t k = c; k < cols; ++k) M[r][k] -= f * M[rank][k];
    }
    ++rank;
  }
  return rank;
}

// Solves the square system B x = rhs; nullopt if B is singular.
inline std::optional<RationalVector> solve_square(RationalMatrix B, RationalVector rhs) {
  const std::size_t n = B.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    while (p < n && B[p][c] == 0) ++p;
    if (p == n) return std::nullopt;
    std::swap(B[p], B[c]);
    std::swap(rhs[p], rhs[c]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || B[r][c] == 0) continue;
      const Rational f = B[r][c] / B[c][c];
      for (std::size_t k = c; k < n; ++k) B[r][k] -= f * B[c][k];
      rhs[r] -= f * rhs[c];
    }
  }
  for (std::size_t r = 0; r < n; ++r) rhs[r] /= B[r][r];
  return rhs;
}

}  // namespace pss
