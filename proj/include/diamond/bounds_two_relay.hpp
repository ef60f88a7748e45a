#pragma once

// Two-relay diamond network with conferencing: Gaussian lower and upper bounds.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "diamond/errors.hpp"
#include "diamond/gaussian_model.hpp"
#include "diamond/optimize.hpp"

namespace diamond {

struct LinkCaps2 {
  double c11 = 0.0;
  double c22 = 0.0;
  double c12 = 0.0;
  double c21 = 0.0;

  double total() const { return c11 + c22 + c12 + c21; }
};

inline void validate(const LinkCaps2& c) {
  for (double v : {c.c11, c.c22, c.c12, c.c21})
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("link capacities must be finite and nonnegative");
}

/// (1 - rho_k^2) is the default; Linear selects the (1 - rho_k)^2 printing of phi_k for comparison.
enum class PhiVariant { Squared, Linear };

struct GridSpec {
  std::size_t points_per_axis = 41;
  std::size_t top_k = 5;
  PhiVariant phi = PhiVariant::Squared;
};

struct BoundResult {
  double value_bits = 0.0;
  std::size_t binding_index = 0;
  std::string binding_label;
  std::vector<std::string> param_names;
  std::vector<double> argmax_params;
  double argmin_n = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> terms;
  std::vector<std::string> term_labels;
};

namespace detail {

inline double half_log2(double x) { return 0.5 * std::log2(x); }

inline constexpr double kNBracket = 1e6;
inline constexpr double kNInnerBracket = 1e3;

// Conditional second moments of (X1, X2) given U and derived quantities.
struct TwoRelayMoments {
  double a1, a2, d;  // 1 - rho1^2, 1 - rho2^2, det of the correlation matrix
  double k1, k2, c;  // var(X1|U), var(X2|U), cov(X1,X2|U)
  double v1, v2;     // var(X1|U,X2), var(X2|U,X1)
  double varphi;     // var(Y|U)
  bool dead1, dead2; // X_k deterministic given U
};

inline TwoRelayMoments moments(const TwoRelayParams& p) {
  TwoRelayMoments m{};
  m.a1 = 1.0 - p.rho1 * p.rho1;
  m.a2 = 1.0 - p.rho2 * p.rho2;
  m.d = std::max(p.det_corr(), 0.0);
  m.k1 = p.p1 * m.a1;
  m.k2 = p.p2 * m.a2;
  m.c = (p.rho - p.rho1 * p.rho2) * std::sqrt(p.p1 * p.p2);
  m.dead1 = m.k1 <= kRankTolerance * std::max(1.0, p.p1);
  m.dead2 = m.k2 <= kRankTolerance * std::max(1.0, p.p2);
  m.v1 = m.dead2 ? (m.dead1 ? 0.0 : m.k1) : p.p1 * m.d / m.a2;
  m.v2 = m.dead1 ? (m.dead2 ? 0.0 : m.k2) : p.p2 * m.d / m.a1;
  if (m.dead1) m.v1 = 0.0;
  if (m.dead2) m.v2 = 0.0;
  m.varphi = 1.0 + m.k1 + m.k2 + 2.0 * m.c;
  return m;
}

/// I(X1;X2|U), closed form.
inline double mi_x1x2_u(const TwoRelayMoments& m) {
  if (m.dead1 || m.dead2) return 0.0;
  const double gap = m.d / (m.a1 * m.a2);
  if (gap <= kDependenceTolerance) return std::numeric_limits<double>::infinity();
  return std::max(-half_log2(gap), 0.0);
}

/// I(X1;X2|U,V) with V = Y + W, var(W) = n.
inline double mi_x1x2_uv(const TwoRelayMoments& m, double n) {
  if (m.dead1 || m.dead2) return 0.0;
  const double s = m.varphi + n;
  const double b1 = m.k1 + m.c, b2 = m.k2 + m.c;
  const double q11 = m.k1 - b1 * b1 / s;
  const double q22 = m.k2 - b2 * b2 / s;
  const double q12 = m.c - b1 * b2 / s;
  if (q11 <= 0.0 || q22 <= 0.0) return 0.0;
  const double gap = 1.0 - q12 * q12 / (q11 * q22);
  if (gap <= kDependenceTolerance) return std::numeric_limits<double>::infinity();
  return std::max(-half_log2(gap), 0.0);
}

inline double phi_k_raw(const TwoRelayParams& p, int k, double p_other, PhiVariant variant) {
  const double r = k == 1 ? p.rho1 : p.rho2;
  const double lead = variant == PhiVariant::Squared ? 1.0 - r * r : (1.0 - r) * (1.0 - r);
  return lead * (1.0 + p.n_aux) + p.det_corr() * p_other;
}

/// Last-term log argument shared by both upper bounds:
/// phi1 phi2 / ((1 - rho1^2)(1 - rho2^2)(1 + N)), evaluated stably through var(X_k|U,X_other).
inline double phi_ratio(const TwoRelayParams& p, const TwoRelayMoments& m, PhiVariant variant) {
  const double n1 = 1.0 + p.n_aux;
  if (variant == PhiVariant::Linear && !m.dead1 && !m.dead2)
    return phi_k_raw(p, 1, p.p2, variant) * phi_k_raw(p, 2, p.p1, variant) / (m.a1 * m.a2 * n1);
  return (n1 + m.v1) * (n1 + m.v2) / n1;
}

}  // namespace detail

inline double phi_k(const TwoRelayParams& params, int k, double p_other,
                    PhiVariant variant = PhiVariant::Squared) {
  validate(params);
  if (k != 1 && k != 2) throw DomainError("phi_k index must be 1 or 2");
  return detail::phi_k_raw(params, k, p_other, variant);
}

inline double varphi(const TwoRelayParams& params) {
  validate(params);
  return detail::moments(params).varphi;
}

inline const std::vector<std::string>& lower_bound2_labels() {
  static const std::vector<std::string> labels{
      "C11+C22-I(X1;X2|U)", "C11+C12+I(X2;Y|U,X1)", "C22+C21+I(X1;Y|U,X2)", "I(X1,X2;Y)",
      "(C11+C22+C12+C21+I(X1,X2;Y|U)-I(X1;X2|U))/2"};
  return labels;
}

inline const std::vector<std::string>& upper_bound_labels() {
  static const std::vector<std::string> labels{
      "C11+C22",    "C11+C12+I(X2;Y|U,X1)", "C22+C21+I(X1;Y|U,X2)", "I(X1,X2;Y)",
      "C12+C21+I(X1,X2;Y|U)", "V-term"};
  return labels;
}

/// The five lower-bound terms, each evaluated by the log-det engine on the assembled covariance.
inline std::array<double, 5> lower_bound2_terms(const TwoRelayParams& params, const LinkCaps2& caps) {
  validate(caps);
  const auto cov = assemble_sigma2(params);
  const double i12 = gaussian_mi(cov, {"X1"}, {"X2"}, {"U"});
  const double iy_u = gaussian_mi(cov, {"X1", "X2"}, {"Y"}, {"U"});
  return {caps.c11 + caps.c22 - i12, caps.c11 + caps.c12 + gaussian_mi(cov, {"X2"}, {"Y"}, {"U", "X1"}),
          caps.c22 + caps.c21 + gaussian_mi(cov, {"X1"}, {"Y"}, {"U", "X2"}),
          gaussian_mi(cov, {"X1", "X2"}, {"Y"}),
          0.5 * (caps.total() + iy_u - i12)};
}

/// Closed-form version of lower_bound2_terms used inside the optimizer.
inline std::array<double, 5> lower_bound2_terms_closed(const TwoRelayParams& p, const LinkCaps2& caps) {
  const auto m = detail::moments(p);
  const double i12 = detail::mi_x1x2_u(m);
  const double iy_u = detail::half_log2(m.varphi);
  return {caps.c11 + caps.c22 - i12, caps.c11 + caps.c12 + detail::half_log2(1.0 + m.v2),
          caps.c22 + caps.c21 + detail::half_log2(1.0 + m.v1),
          detail::half_log2(1.0 + p.p1 + p.p2 + 2.0 * p.rho * std::sqrt(p.p1 * p.p2)),
          0.5 * (caps.total() + iy_u - i12)};
}

/// Six right-hand sides of the first upper bound at the given (rho, rho1, rho2, N).
inline std::array<double, 6> upper_bound1_terms(const TwoRelayParams& params, const LinkCaps2& caps,
                                                PhiVariant variant = PhiVariant::Squared) {
  validate(params);
  validate(caps);
  const auto m = detail::moments(params);
  const double n1 = 1.0 + params.n_aux;
  const double t6 =
      0.5 * (caps.total() + detail::half_log2(detail::phi_ratio(params, m, variant) / n1) +
             detail::half_log2(m.varphi * n1 / (m.varphi + params.n_aux)));
  return {caps.c11 + caps.c22,
          caps.c11 + caps.c12 + detail::half_log2(1.0 + m.v2),
          caps.c22 + caps.c21 + detail::half_log2(1.0 + m.v1),
          detail::half_log2(1.0 + params.p1 + params.p2 + 2.0 * params.rho * std::sqrt(params.p1 * params.p2)),
          caps.c12 + caps.c21 + detail::half_log2(m.varphi),
          t6};
}

/// Objective minimized by nstar: I(X1;X2|U,V) as a function of N.
inline double nstar_objective(const TwoRelayParams& params, double n) {
  return detail::mi_x1x2_uv(detail::moments(params), n);
}

/// argmin over N >= 0 of I(X1;X2|U,V), V = Y + W_N. params.n_aux is ignored.
inline double nstar(const TwoRelayParams& params) {
  validate(params);
  const auto m = detail::moments(params);
  if (m.dead1 || m.dead2 || !std::isfinite(detail::mi_x1x2_u(m))) return 0.0;
  auto best = golden_section_minimize([&](double n) { return detail::mi_x1x2_uv(m, n); }, 0.0,
                                      detail::kNBracket, 1e-9);
  if (m.c > 0.0) {
    const double nullifying = (m.k1 + m.c) * (m.k2 + m.c) / m.c - m.varphi;
    if (nullifying >= 0.0 && nullifying <= detail::kNBracket &&
        detail::mi_x1x2_uv(m, nullifying) <= best.value)
      return nullifying;
  }
  return best.x;
}

/// Last constraint of the second upper bound, solved for R (positive root in xi = 2^{2R}).
inline double upper_bound2_last_term_closed_form(const TwoRelayParams& params, const LinkCaps2& caps,
                                                 PhiVariant variant = PhiVariant::Squared) {
  validate(params);
  validate(caps);
  const auto m = detail::moments(params);
  // xi^2 + a N xi <= K with a = 2^{2(C12+C21)}, K = 2^{2(C11+C22+C12+C21)} F.
  const double log_k = 2.0 * caps.total() + std::log2(detail::phi_ratio(params, m, variant));
  const double n = params.n_aux;
  if (n == 0.0) return 0.25 * log_k;
  const double log_q = 2.0 * (caps.c12 + caps.c21) + std::log2(n) - 1.0;  // q = a N / 2
  // xi = K / (sqrt(K + q^2) + q), evaluated with a common scale to avoid overflow.
  const double s = std::max(0.5 * log_k, log_q);
  const double kk = std::exp2(log_k - 2.0 * s), qq = std::exp2(log_q - s);
  const double log_xi = log_k - s - std::log2(std::sqrt(kk + qq * qq) + qq);
  return 0.5 * log_xi;
}

/// Implicit form of the same constraint: R <= rhs(R). Exposed for oracle checks.
inline double upper_bound2_last_term_rhs(const TwoRelayParams& params, const LinkCaps2& caps, double r,
                                         PhiVariant variant = PhiVariant::Squared) {
  const auto m = detail::moments(params);
  return caps.c11 + caps.c22 -
         detail::half_log2(std::exp2(2.0 * (r - caps.c12 - caps.c21)) + params.n_aux) +
         detail::half_log2(detail::phi_ratio(params, m, variant));
}

inline double cut_set2(const LinkCaps2& caps, double p1, double p2) {
  validate(caps);
  if (!(p1 > 0.0) || !(p2 > 0.0)) throw DomainError("powers must be positive");
  return std::min({caps.c11 + caps.c22, caps.c11 + caps.c12 + detail::half_log2(1.0 + p2),
                   caps.c22 + caps.c21 + detail::half_log2(1.0 + p1),
                   detail::half_log2(1.0 + p1 + p2 + 2.0 * std::sqrt(p1 * p2))});
}

struct PointValue {
  double value;
  double n;
  std::vector<double> terms;
};

namespace detail {

inline std::size_t argmin_index(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::min_element(v.begin(), v.end()) - v.begin());
}

inline double clamp_rate(double v) { return std::isnan(v) ? 0.0 : std::max(v, 0.0); }

inline TwoRelayParams params_from(const std::vector<double>& x, double p1, double p2) {
  TwoRelayParams p;
  p.rho = x[0];
  p.rho1 = x[1];
  p.rho2 = x[2];
  p.p1 = p1;
  p.p2 = p2;
  return p;
}

inline PointValue lower2_point(const TwoRelayParams& p, const LinkCaps2& caps) {
  const auto t = lower_bound2_terms_closed(p, caps);
  std::vector<double> terms(t.begin(), t.end());
  return {*std::min_element(terms.begin(), terms.end()), std::numeric_limits<double>::quiet_NaN(), terms};
}

inline PointValue upper1_point(TwoRelayParams p, const LinkCaps2& caps, PhiVariant variant) {
  p.n_aux = nstar(p);
  const auto t = upper_bound1_terms(p, caps, variant);
  std::vector<double> terms(t.begin(), t.end());
  return {*std::min_element(terms.begin(), terms.end()), p.n_aux, terms};
}

inline PointValue upper2_point(TwoRelayParams p, const LinkCaps2& caps, PhiVariant variant) {
  p.n_aux = 0.0;
  const auto t = upper_bound1_terms(p, caps, variant);
  auto last = [&](double n) {
    TwoRelayParams q = p;
    q.n_aux = n;
    return upper_bound2_last_term_closed_form(q, caps, variant);
  };
  auto best = golden_section_minimize(last, 0.0, kNInnerBracket, 1e-9);
  for (double cand : {0.0, std::min(nstar(p), kNBracket)}) {
    const double v = last(cand);
    if (v < best.value) best = {cand, v};
  }
  std::vector<double> terms(t.begin(), t.begin() + 5);
  terms.push_back(best.value);
  return {*std::min_element(terms.begin(), terms.end()), best.x, terms};
}

template <class PointFn>
BoundResult optimize2(const PointFn& point, double p1, double p2, const GridSpec& search,
                      const std::vector<std::string>& labels) {
  if (search.points_per_axis < 2) throw DomainError("grid resolution must be at least 2 per axis");
  auto objective = [&](const std::vector<double>& x) {
    const auto p = params_from(x, p1, p2);
    if (!is_feasible(p)) return -std::numeric_limits<double>::infinity();
    return point(p).value;
  };
  GridMaxOptions opt;
  opt.points_per_axis = search.points_per_axis;
  opt.top_k = search.top_k;
  const auto best = grid_then_refine_maximize(objective, 3, opt);
  const auto p = params_from(best.x, p1, p2);
  const auto pv = point(p);
  BoundResult r;
  r.terms = pv.terms;
  r.term_labels = labels;
  r.binding_index = argmin_index(pv.terms);
  r.binding_label = labels[r.binding_index];
  r.value_bits = clamp_rate(pv.terms[r.binding_index]);
  r.param_names = {"rho", "rho1", "rho2"};
  r.argmax_params = best.x;
  r.argmin_n = pv.n;
  return r;
}

}  // namespace detail

/// Lower bound at a fixed parameter point (min of the five terms, clamped at zero).
inline BoundResult lower_bound2(const TwoRelayParams& params, const LinkCaps2& caps) {
  const auto t = lower_bound2_terms(params, caps);
  BoundResult r;
  r.terms.assign(t.begin(), t.end());
  r.term_labels = lower_bound2_labels();
  r.binding_index = detail::argmin_index(r.terms);
  r.binding_label = r.term_labels[r.binding_index];
  r.value_bits = detail::clamp_rate(r.terms[r.binding_index]);
  r.param_names = {"rho", "rho1", "rho2"};
  r.argmax_params = {params.rho, params.rho1, params.rho2};
  return r;
}

/// Lower bound maximized over (rho, rho1, rho2).
inline BoundResult lower_bound2_opt(const LinkCaps2& caps, double p1, double p2, const GridSpec& search = {}) {
  validate(caps);
  return detail::optimize2([&](const TwoRelayParams& p) { return detail::lower2_point(p, caps); }, p1, p2,
                           search, lower_bound2_labels());
}

/// First upper bound: max over correlations of the six terms with N = N*.
inline BoundResult upper_bound1(const LinkCaps2& caps, const GridSpec& search = {}, double p1 = 1.0,
                                double p2 = 1.0) {
  validate(caps);
  return detail::optimize2(
      [&](const TwoRelayParams& p) { return detail::upper1_point(p, caps, search.phi); }, p1, p2, search,
      upper_bound_labels());
}

/// Second upper bound: max over correlations, min over N of the six terms.
inline BoundResult upper_bound2(const LinkCaps2& caps, const GridSpec& search = {}, double p1 = 1.0,
                                double p2 = 1.0) {
  validate(caps);
  return detail::optimize2(
      [&](const TwoRelayParams& p) { return detail::upper2_point(p, caps, search.phi); }, p1, p2, search,
      upper_bound_labels());
}

struct Bounds2Summary {
  BoundResult lower, upper1, upper2;
  double cutset = 0.0;
};

inline Bounds2Summary bounds2(const LinkCaps2& caps, double p1, double p2, const GridSpec& search = {}) {
  return {lower_bound2_opt(caps, p1, p2, search), upper_bound1(caps, search, p1, p2),
          upper_bound2(caps, search, p1, p2), cut_set2(caps, p1, p2)};
}

}  // namespace diamond
