#pragma once

// Three-relay diamond network with conferencing, symmetric Gaussian parameterization.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "diamond/bounds_two_relay.hpp"
#include "diamond/errors.hpp"
#include "diamond/gaussian_model.hpp"
#include "diamond/optimize.hpp"

namespace diamond {

/// c[w][w] is the fronthaul of relay w, c[w][v] the conferencing link from relay w to relay v.
struct LinkCaps3 {
  std::array<std::array<double, 3>, 3> c{};

  static LinkCaps3 symmetric(double diag, double off) {
    LinkCaps3 caps;
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) caps.c[i][j] = (i == j) ? diag : off;
    return caps;
  }
};

inline void validate(const LinkCaps3& caps) {
  for (const auto& row : caps.c)
    for (double v : row)
      if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("link capacities must be finite and nonnegative");
}

struct SubsetTermReport {
  unsigned subset = 0;  // bit k set when relay k+1 is in S
  std::vector<std::string> labels;
  std::vector<double> term_values;
};

inline std::string subset_name(unsigned mask) {
  std::string s = "{";
  for (unsigned k = 0; k < 3; ++k)
    if (mask & (1u << k)) {
      if (s.size() > 1) s += ",";
      s += std::to_string(k + 1);
    }
  return s + "}";
}

namespace detail {

inline Labels relay_labels(unsigned mask) {
  Labels out;
  for (unsigned k = 0; k < 3; ++k)
    if (mask & (1u << k)) out.push_back("X" + std::to_string(k + 1));
  return out;
}

inline Labels aux_labels(const ThreeRelaySymParams& p) {
  return p.with_t ? Labels{"U", "T"} : Labels{"U"};
}

inline Labels joined(Labels a, const Labels& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

inline int popcount3(unsigned mask) {
  return static_cast<int>((mask & 1u) + ((mask >> 1) & 1u) + ((mask >> 2) & 1u));
}

/// Sum of c[k][w] over k in S and all w.
inline double row_sum(const LinkCaps3& caps, unsigned mask) {
  double s = 0.0;
  for (unsigned k = 0; k < 3; ++k)
    if (mask & (1u << k))
      for (unsigned w = 0; w < 3; ++w) s += caps.c[k][w];
  return s;
}

inline double diag_sum(const LinkCaps3& caps, unsigned mask) {
  double s = 0.0;
  for (unsigned k = 0; k < 3; ++k)
    if (mask & (1u << k)) s += caps.c[k][k];
  return s;
}

/// Sum of c[w][v] over all w and v in S^c with w != v.
inline double inflow_to_complement(const LinkCaps3& caps, unsigned mask) {
  double s = 0.0;
  for (unsigned v = 0; v < 3; ++v)
    if (!(mask & (1u << v)))
      for (unsigned w = 0; w < 3; ++w)
        if (w != v) s += caps.c[w][v];
  return s;
}

/// I(X_{S^c}; Y | aux, X_S); zero when S is the full set.
inline double mi_complement(const CovarianceMatrix& cov, unsigned mask, const Labels& aux) {
  const Labels sc = relay_labels(~mask & 7u);
  if (sc.empty()) return 0.0;
  return gaussian_mi(cov, sc, {"Y"}, joined(aux, relay_labels(mask)));
}

}  // namespace detail

/// All lower-bound constraints at a parameter point; the bound is the minimum.
inline SubsetTermReport lower_bound3_terms(const ThreeRelaySymParams& params, const LinkCaps3& caps) {
  validate(caps);
  ThreeRelaySymParams p = params;
  p.with_t = false;
  const auto cov = assemble_sigma3(p);
  const Labels all = detail::relay_labels(7u);
  const double gamma_all = gaussian_total_correlation(cov, all, {"U"});
  const double iy_u = gaussian_mi(cov, all, {"Y"}, {"U"});
  SubsetTermReport r;
  r.subset = 7u;
  auto add = [&](std::string label, double v) {
    r.labels.push_back(std::move(label));
    r.term_values.push_back(v);
  };
  add("sum C_ww - Gamma(X|U)", detail::diag_sum(caps, 7u) - gamma_all);
  for (unsigned mask = 1; mask < 7; ++mask) {
    const double g = gaussian_total_correlation(cov, detail::relay_labels(mask), {"U"});
    const double i = detail::mi_complement(cov, mask, {"U"});
    add("S=" + subset_name(mask) + ": sum C_kw + I(X_Sc;Y|U,X_S) - Gamma(X_S|U)",
        detail::row_sum(caps, mask) + i - g);
  }
  add("I(X;Y)", gaussian_mi(cov, all, {"Y"}));
  for (unsigned mask = 1; mask < 7; ++mask) {
    if (detail::popcount3(mask) != 2) continue;
    const double g = gaussian_total_correlation(cov, detail::relay_labels(mask), {"U"});
    const double i = detail::mi_complement(cov, mask, {"U"});
    add("S=" + subset_name(mask) + ": (sum C_kw + I(X_Sc;Y|U,X_S) + I(X;Y|U) - Gamma(X_S|U))/2",
        0.5 * (detail::row_sum(caps, mask) + i + iy_u - g));
  }
  add("(sum C + 2 I(X;Y|U) - Gamma(X|U))/3", (detail::row_sum(caps, 7u) + 2.0 * iy_u - gamma_all) / 3.0);
  return r;
}

/// Quantities the upper bound needs at a correlation point; the V-term depends on N analytically.
struct Upper3Point {
  std::vector<std::string> labels;
  std::vector<double> fixed_terms;  // subset family and I(X;Y)
  double diag = 0.0;                // sum of fronthaul capacities
  double s_all = 0.0;               // var(X1+X2+X3 | aux)
  std::array<double, 3> s_pair{};   // var(X_a+X_b | aux, X_c), indexed by the excluded relay c

  /// sum C_ww - 2 I(X;V|aux) + sum over pairs I(X_pair;V|aux,X_other).
  double v_term(double n) const {
    const double n1 = 1.0 + n;
    double v = diag - std::log2((n1 + s_all) / n1);
    for (double s : s_pair) v += 0.5 * std::log2((n1 + s) / n1);
    return v;
  }
};

inline Upper3Point upper_bound3_point(const ThreeRelaySymParams& params, const LinkCaps3& caps) {
  validate(caps);
  ThreeRelaySymParams p = params;
  p.n_aux = 0.0;
  const auto cov = assemble_sigma3(p);
  const Labels aux = detail::aux_labels(p);
  Upper3Point u;
  for (unsigned mask = 0; mask < 8; ++mask) {
    u.labels.push_back("S=" + subset_name(mask) + ": sum_S C_ww + conferencing into S^c + I(X_Sc;Y|aux,X_S)");
    u.fixed_terms.push_back(detail::diag_sum(caps, mask) + detail::inflow_to_complement(caps, mask) +
                            detail::mi_complement(cov, mask, aux));
  }
  u.labels.push_back("I(X;Y)");
  u.fixed_terms.push_back(gaussian_mi(cov, detail::relay_labels(7u), {"Y"}));
  u.labels.push_back("V-term");
  u.diag = detail::diag_sum(caps, 7u);
  // With V = Y at N = 0, I(X_A;Y|aux,X_rest) = 1/2 log2(1 + var(sum_A X | aux, X_rest)).
  auto spread = [&](unsigned mask) {
    return std::exp2(2.0 * detail::mi_complement(cov, ~mask & 7u, aux)) - 1.0;
  };
  u.s_all = spread(7u);
  for (unsigned c = 0; c < 3; ++c) u.s_pair[c] = spread(7u & ~(1u << c));
  return u;
}

/// V-term evaluated directly with the log-det engine (used to check the analytic N dependence).
inline double upper_bound3_v_term_logdet(const ThreeRelaySymParams& params, const LinkCaps3& caps) {
  const auto cov = assemble_sigma3(params);
  const Labels aux = detail::aux_labels(params);
  double v = detail::diag_sum(caps, 7u) - 2.0 * gaussian_mi(cov, detail::relay_labels(7u), {"V"}, aux);
  for (unsigned c = 0; c < 3; ++c) {
    const unsigned pair = 7u & ~(1u << c);
    v += gaussian_mi(cov, detail::relay_labels(pair), {"V"}, detail::joined(aux, detail::relay_labels(1u << c)));
  }
  return v;
}

inline double cut_set3(const LinkCaps3& caps, double p) {
  validate(caps);
  if (!(p > 0.0)) throw DomainError("power must be positive");
  double best = 0.5 * std::log2(1.0 + 9.0 * p);
  for (unsigned mask = 0; mask < 8; ++mask) {
    const int nc = 3 - detail::popcount3(mask);
    best = std::min(best, detail::diag_sum(caps, mask) + detail::inflow_to_complement(caps, mask) +
                              0.5 * std::log2(1.0 + nc * nc * p));
  }
  return best;
}

struct Search3 {
  std::size_t points_per_axis = 41;
  std::size_t top_k = 5;
  bool with_t = false;
};

namespace detail {

inline ThreeRelaySymParams params3_from(const std::vector<double>& x, double p, bool with_t) {
  ThreeRelaySymParams q;
  q.rho = x[0];
  q.rho_c = x[1];
  q.p = p;
  q.with_t = with_t;
  q.rho_t = with_t ? x[2] : 0.0;
  return q;
}

inline PointValue lower3_value(const ThreeRelaySymParams& p, const LinkCaps3& caps) {
  auto r = lower_bound3_terms(p, caps);
  return {*std::min_element(r.term_values.begin(), r.term_values.end()),
          std::numeric_limits<double>::quiet_NaN(), r.term_values};
}

inline PointValue upper3_value(const ThreeRelaySymParams& p, const LinkCaps3& caps) {
  const auto u = upper_bound3_point(p, caps);
  auto best = golden_section_minimize([&](double n) { return u.v_term(n); }, 0.0, kNInnerBracket, 1e-9);
  std::vector<double> terms = u.fixed_terms;
  terms.push_back(best.value);
  return {*std::min_element(terms.begin(), terms.end()), best.x, terms};
}

template <class PointFn>
BoundResult optimize3(const PointFn& point, double p, const Search3& search) {
  if (search.points_per_axis < 2) throw DomainError("grid resolution must be at least 2 per axis");
  const std::size_t dims = search.with_t ? 3 : 2;
  auto objective = [&](const std::vector<double>& x) {
    const auto q = params3_from(x, p, search.with_t);
    if (!is_feasible(q)) return -std::numeric_limits<double>::infinity();
    return point(q).value;
  };
  GridMaxOptions opt;
  opt.points_per_axis = search.points_per_axis;
  opt.top_k = search.top_k;
  const auto best = grid_then_refine_maximize(objective, dims, opt);
  const auto q = params3_from(best.x, p, search.with_t);
  BoundResult r;
  r.param_names = search.with_t ? std::vector<std::string>{"rho", "rho_c", "rho_t"}
                                : std::vector<std::string>{"rho", "rho_c"};
  r.argmax_params = best.x;
  if (!is_feasible(q)) return r;
  const auto pv = point(q);
  r.terms = pv.terms;
  r.binding_index = argmin_index(pv.terms);
  r.value_bits = clamp_rate(pv.terms[r.binding_index]);
  r.argmin_n = pv.n;
  return r;
}

}  // namespace detail

/// Lower bound at a fixed parameter point.
inline BoundResult lower_bound3(const ThreeRelaySymParams& params, const LinkCaps3& caps) {
  const auto rep = lower_bound3_terms(params, caps);
  BoundResult r;
  r.terms = rep.term_values;
  r.term_labels = rep.labels;
  r.binding_index = detail::argmin_index(r.terms);
  r.binding_label = r.term_labels[r.binding_index];
  r.value_bits = detail::clamp_rate(r.terms[r.binding_index]);
  r.param_names = {"rho", "rho_c"};
  r.argmax_params = {params.rho, params.rho_c};
  return r;
}

inline BoundResult lower_bound3_opt(const LinkCaps3& caps, double p, const Search3& search = {}) {
  validate(caps);
  Search3 s = search;
  s.with_t = false;
  auto r = detail::optimize3([&](const ThreeRelaySymParams& q) { return detail::lower3_value(q, caps); }, p, s);
  const auto labels = lower_bound3_terms(detail::params3_from(r.argmax_params, p, false), caps).labels;
  r.term_labels = labels;
  if (!r.terms.empty()) r.binding_label = labels[r.binding_index];
  return r;
}

inline BoundResult upper_bound3(const LinkCaps3& caps, const Search3& search = {}, double p = 1.0) {
  validate(caps);
  auto r = detail::optimize3([&](const ThreeRelaySymParams& q) { return detail::upper3_value(q, caps); }, p,
                             search);
  r.term_labels = upper_bound3_point(detail::params3_from(r.argmax_params, p, search.with_t), caps).labels;
  if (!r.terms.empty()) r.binding_label = r.term_labels[r.binding_index];
  return r;
}

/// The eight subset terms of the upper bound at a parameter point, one report per S.
inline std::vector<SubsetTermReport> upper_bound3_subset_reports(const ThreeRelaySymParams& params,
                                                                 const LinkCaps3& caps) {
  const auto u = upper_bound3_point(params, caps);
  std::vector<SubsetTermReport> out;
  for (unsigned mask = 0; mask < 8; ++mask) out.push_back({mask, {u.labels[mask]}, {u.fixed_terms[mask]}});
  return out;
}

struct SweepRow {
  double c0 = 0.0;
  double c = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double cutset = 0.0;
  std::string binding_lower;
  std::string binding_upper;
};

inline void sort_rows(std::vector<SweepRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return a.c0 != b.c0 ? a.c0 < b.c0 : a.c < b.c;
  });
}

/// Symmetric three-relay sweep: diagonal C, off-diagonal C0.
inline std::vector<SweepRow> sweep3(const std::vector<double>& c_values, const std::vector<double>& c0_values,
                                    double p, const Search3& search = {}) {
  if (c_values.empty() || c0_values.empty()) throw DomainError("sweep needs nonempty value lists");
  std::vector<SweepRow> rows;
  for (double c0 : c0_values)
    for (double c : c_values) {
      const auto caps = LinkCaps3::symmetric(c, c0);
      const auto lo = lower_bound3_opt(caps, p, search);
      const auto up = upper_bound3(caps, search, p);
      rows.push_back({c0, c, lo.value_bits, up.value_bits, cut_set3(caps, p), lo.binding_label, up.binding_label});
    }
  sort_rows(rows);
  return rows;
}

/// Symmetric two-relay sweep: C11 = C22 = C, C12 = C21 = C0. The upper column is min(UB1, UB2).
inline std::vector<SweepRow> sweep2(const std::vector<double>& c_values, const std::vector<double>& c0_values,
                                    double p, const GridSpec& search = {}) {
  if (c_values.empty() || c0_values.empty()) throw DomainError("sweep needs nonempty value lists");
  std::vector<SweepRow> rows;
  for (double c0 : c0_values)
    for (double c : c_values) {
      const LinkCaps2 caps{c, c, c0, c0};
      const auto b = bounds2(caps, p, p, search);
      const bool first = b.upper1.value_bits <= b.upper2.value_bits;
      const auto& up = first ? b.upper1 : b.upper2;
      rows.push_back({c0, c, b.lower.value_bits, up.value_bits, b.cutset, b.lower.binding_label,
                      std::string(first ? "UB1:" : "UB2:") + up.binding_label});
    }
  sort_rows(rows);
  return rows;
}

}  // namespace diamond
