#pragma once

// Exact rational linear programming in standard form: min c^T x, M x = b, x >= 0.
// Dense two-phase simplex with Bland's rule; intended for small systems.

#include <cstddef>
#include <optional>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace diamond {

using Rational = boost::multiprecision::cpp_rational;

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  Rational value;
  std::vector<Rational> x;
};

namespace detail {

class Tableau {
 public:
  // rows x (cols + 1); last column is the right-hand side.
  std::vector<std::vector<Rational>> t;
  std::vector<std::size_t> basis;
  std::size_t cols = 0;

  void pivot(std::size_t r, std::size_t c) {
    const Rational p = t[r][c];
    for (auto& v : t[r]) v /= p;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (i == r || t[i][c] == 0) continue;
      const Rational f = t[i][c];
      for (std::size_t j = 0; j <= cols; ++j)
        if (t[r][j] != 0) t[i][j] -= f * t[r][j];
    }
    basis[r] = c;
  }

  /// Minimizes cost over the current basis using only columns where allowed[j] is true.
  /// Returns false when unbounded.
  bool minimize(const std::vector<Rational>& cost, const std::vector<bool>& allowed) {
    const std::size_t m = t.size();
    while (true) {
      // Reduced costs d_j = c_j - c_B^T B^{-1} A_j; first negative (Bland).
      std::optional<std::size_t> enter;
      for (std::size_t j = 0; j < cols && !enter; ++j) {
        if (!allowed[j]) continue;
        Rational d = cost[j];
        for (std::size_t i = 0; i < m; ++i)
          if (t[i][j] != 0) d -= cost[basis[i]] * t[i][j];
        if (d < 0) enter = j;
      }
      if (!enter) return true;
      std::optional<std::size_t> leave;
      Rational best_ratio;
      for (std::size_t i = 0; i < m; ++i) {
        if (t[i][*enter] <= 0) continue;
        Rational ratio = t[i][cols] / t[i][*enter];
        if (!leave || ratio < best_ratio || (ratio == best_ratio && basis[i] < basis[*leave])) {
          leave = i;
          best_ratio = ratio;
        }
      }
      if (!leave) return false;
      pivot(*leave, *enter);
    }
  }
};

}  // namespace detail

/// Solves min cost^T x subject to m x = b, x >= 0, exactly.
inline LpResult solve_standard_form(const std::vector<std::vector<Rational>>& m, const std::vector<Rational>& b,
                                    const std::vector<Rational>& cost) {
  const std::size_t rows = m.size();
  const std::size_t n = cost.size();
  detail::Tableau tab;
  tab.cols = n + rows;
  tab.t.assign(rows, std::vector<Rational>(tab.cols + 1));
  tab.basis.resize(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    const bool flip = b[i] < 0;
    for (std::size_t j = 0; j < n; ++j) tab.t[i][j] = flip ? Rational(-m[i][j]) : m[i][j];
    tab.t[i][n + i] = 1;
    tab.t[i][tab.cols] = flip ? Rational(-b[i]) : b[i];
    tab.basis[i] = n + i;
  }

  // Phase 1: minimize the sum of artificials.
  std::vector<Rational> phase1(tab.cols, Rational(0));
  for (std::size_t i = 0; i < rows; ++i) phase1[n + i] = 1;
  std::vector<bool> all(tab.cols, true);
  tab.minimize(phase1, all);
  Rational infeas = 0;
  for (std::size_t i = 0; i < rows; ++i)
    if (tab.basis[i] >= n) infeas += tab.t[i][tab.cols];
  LpResult res;
  if (infeas > 0) {
    res.status = LpStatus::Infeasible;
    return res;
  }
  // Drive remaining (zero-valued) artificials out of the basis where possible.
  for (std::size_t i = 0; i < rows; ++i) {
    if (tab.basis[i] < n) continue;
    for (std::size_t j = 0; j < n; ++j)
      if (tab.t[i][j] != 0) {
        tab.pivot(i, j);
        break;
      }
  }

  // Phase 2 on the original columns; artificials stuck in the basis sit on redundant rows at zero.
  std::vector<Rational> phase2(tab.cols, Rational(0));
  for (std::size_t j = 0; j < n; ++j) phase2[j] = cost[j];
  std::vector<bool> originals(tab.cols, false);
  for (std::size_t j = 0; j < n; ++j) originals[j] = true;
  if (!tab.minimize(phase2, originals)) {
    res.status = LpStatus::Unbounded;
    return res;
  }
  res.status = LpStatus::Optimal;
  res.x.assign(n, Rational(0));
  for (std::size_t i = 0; i < rows; ++i)
    if (tab.basis[i] < n) res.x[tab.basis[i]] = tab.t[i][tab.cols];
  res.value = 0;
  for (std::size_t j = 0; j < n; ++j) res.value += cost[j] * res.x[j];
  return res;
}

/// Row of a system a^T x <= b.
struct LeRow {
  std::vector<Rational> a;
  Rational b;
};

/// True iff {x : a_i^T x <= b_i for all rows} is nonempty (Farkas alternative).
inline bool is_feasible(const std::vector<LeRow>& rows, std::size_t nvars) {
  if (rows.empty()) return true;
  // Infeasible iff some lambda >= 0 with A^T lambda = 0, sum lambda = 1, b^T lambda < 0.
  const std::size_t k = rows.size();
  std::vector<std::vector<Rational>> m(nvars + 1, std::vector<Rational>(k));
  std::vector<Rational> rhs(nvars + 1, Rational(0));
  std::vector<Rational> cost(k);
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t v = 0; v < nvars; ++v) m[v][r] = rows[r].a[v];
    m[nvars][r] = 1;
    cost[r] = rows[r].b;
  }
  rhs[nvars] = 1;
  const auto res = solve_standard_form(m, rhs, cost);
  return !(res.status == LpStatus::Optimal && res.value < 0);
}

/// True iff the feasible system rows implies a^T x <= b (Farkas: a = A^T lambda, b^T lambda <= b).
/// An infeasible system implies everything.
inline bool implies(const std::vector<LeRow>& rows, const LeRow& target, std::size_t nvars) {
  if (!is_feasible(rows, nvars)) return true;
  const std::size_t k = rows.size();
  std::vector<std::vector<Rational>> m(nvars, std::vector<Rational>(k));
  std::vector<Rational> cost(k);
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t v = 0; v < nvars; ++v) m[v][r] = rows[r].a[v];
    cost[r] = rows[r].b;
  }
  if (k == 0) {
    for (const auto& c : target.a)
      if (c != 0) return false;
    return target.b >= 0;
  }
  const auto res = solve_standard_form(m, target.a, cost);
  return res.status == LpStatus::Optimal && res.value <= target.b;
}

}  // namespace diamond
