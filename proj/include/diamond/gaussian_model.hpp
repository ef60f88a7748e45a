#pragma once

// Covariance assembly for the Gaussian diamond models and log-det information measures.
// U has unit variance and the receiver noise Z has unit variance throughout.

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "diamond/errors.hpp"
#include "diamond/info_measures.hpp"

namespace diamond {

inline constexpr double kPsdTolerance = 1e-10;
inline constexpr double kSymmetryTolerance = 1e-12;
inline constexpr double kParamTolerance = 1e-12;
// Eigenvalues below kRankTolerance * scale count as zero.
inline constexpr double kRankTolerance = 1e-10;
// Canonical correlations with 1 - sigma^2 below this are treated as exact dependence.
inline constexpr double kDependenceTolerance = 1e-12;

class CovarianceMatrix {
 public:
  CovarianceMatrix(Labels names, Eigen::MatrixXd entries)
      : names_(std::move(names)), m_(std::move(entries)) {
    if (m_.rows() != m_.cols()) throw DomainError("covariance matrix must be square");
    if (static_cast<std::size_t>(m_.rows()) != names_.size())
      throw DomainError("covariance dimension does not match label count");
    for (std::size_t i = 0; i < names_.size(); ++i)
      for (std::size_t j = i + 1; j < names_.size(); ++j)
        if (names_[i] == names_[j]) throw DomainError("duplicate covariance label '" + names_[i] + "'");
    if (!m_.allFinite()) throw DomainError("covariance entries must be finite");
    const double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
    if ((m_ - m_.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance * scale)
      throw DomainError("covariance matrix is not symmetric");
    m_ = 0.5 * (m_ + m_.transpose());
    if (m_.rows() > 0) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m_, Eigen::EigenvaluesOnly);
      const double min_eig = es.eigenvalues().minCoeff();
      if (min_eig < -kPsdTolerance * scale) {
        std::ostringstream os;
        os << "covariance matrix is not positive semidefinite (min eigenvalue " << min_eig << ")";
        throw DomainError(os.str());
      }
    }
  }

  const Labels& names() const { return names_; }
  const Eigen::MatrixXd& matrix() const { return m_; }
  std::size_t size() const { return names_.size(); }

  std::size_t index_of(const std::string& label) const {
    auto it = std::find(names_.begin(), names_.end(), label);
    if (it == names_.end()) throw DomainError("unknown covariance label '" + label + "'");
    return static_cast<std::size_t>(it - names_.begin());
  }

  double operator()(const std::string& a, const std::string& b) const {
    return m_(static_cast<Eigen::Index>(index_of(a)), static_cast<Eigen::Index>(index_of(b)));
  }

  nlohmann::json to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m_.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index j = 0; j < m_.cols(); ++j) row.push_back(m_(i, j));
      rows.push_back(row);
    }
    return {{"vars", names_}, {"cov", rows}};
  }

 private:
  Labels names_;
  Eigen::MatrixXd m_;
};

struct TwoRelayParams {
  double rho = 0.0;
  double rho1 = 0.0;
  double rho2 = 0.0;
  double p1 = 1.0;
  double p2 = 1.0;
  double n_aux = 0.0;

  /// 1 - rho^2 - rho1^2 - rho2^2 + 2 rho rho1 rho2, i.e. det of the (U,X1,X2) correlation matrix.
  double det_corr() const {
    return 1.0 - rho * rho - rho1 * rho1 - rho2 * rho2 + 2.0 * rho * rho1 * rho2;
  }
};

struct ThreeRelaySymParams {
  double rho = 0.0;
  double rho_c = 0.0;
  double p = 1.0;
  double n_aux = 0.0;
  // Optional second auxiliary T: uncorrelated with U, correlation rho_t with every X_k.
  bool with_t = false;
  double rho_t = 0.0;
};

namespace detail {

inline void require_unit_interval(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) throw DomainError(std::string(name) + " must lie in [0,1]");
}

inline Eigen::MatrixXd principal(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (std::size_t j = 0; j < idx.size(); ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(idx[i], idx[j]);
  return out;
}

inline Eigen::MatrixXd block(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& rows,
                             const std::vector<Eigen::Index>& cols) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(rows[i], cols[j]);
  return out;
}

inline std::vector<Eigen::Index> resolve(const CovarianceMatrix& cov, const Labels& labels) {
  std::vector<Eigen::Index> out;
  for (const auto& l : labels) {
    auto idx = static_cast<Eigen::Index>(cov.index_of(l));
    if (std::find(out.begin(), out.end(), idx) != out.end())
      throw DomainError("label '" + l + "' listed twice");
    out.push_back(idx);
  }
  return out;
}

inline double rank_threshold(const Eigen::MatrixXd& m) {
  return kRankTolerance * std::max(1.0, m.diagonal().cwiseAbs().maxCoeff());
}

/// Covariance of X given C via the pseudo-inverse of Sigma_CC.
inline Eigen::MatrixXd conditional_cov(const Eigen::MatrixXd& full, const std::vector<Eigen::Index>& x,
                                       const std::vector<Eigen::Index>& c) {
  Eigen::MatrixXd sxx = principal(full, x);
  if (c.empty()) return sxx;
  Eigen::MatrixXd scc = principal(full, c);
  Eigen::MatrixXd sxc = block(full, x, c);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(scc);
  const double tol = rank_threshold(scc);
  const auto& lam = es.eigenvalues();
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(lam.size());
  for (Eigen::Index i = 0; i < lam.size(); ++i)
    if (lam(i) > tol) inv(i) = 1.0 / lam(i);
  Eigen::MatrixXd proj = sxc * es.eigenvectors();
  Eigen::MatrixXd out = sxx - proj * inv.asDiagonal() * proj.transpose();
  return 0.5 * (out + out.transpose());
}

/// Rows map a block onto an orthonormal whitened basis of its range.
inline Eigen::MatrixXd whitener(const Eigen::MatrixXd& m, double tol) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  const auto& lam = es.eigenvalues();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < lam.size(); ++i)
    if (lam(i) > tol) keep.push_back(i);
  Eigen::MatrixXd w(static_cast<Eigen::Index>(keep.size()), m.cols());
  for (std::size_t r = 0; r < keep.size(); ++r)
    w.row(static_cast<Eigen::Index>(r)) =
        es.eigenvectors().col(keep[r]).transpose() / std::sqrt(lam(keep[r]));
  return w;
}

inline void require_disjoint(const std::vector<Eigen::Index>& a, const std::vector<Eigen::Index>& b) {
  for (auto i : a)
    if (std::find(b.begin(), b.end(), i) != b.end()) throw DomainError("subsets overlap");
}

}  // namespace detail

/// I(A;B|C) in bits. Components with zero conditional variance carry no information;
/// an exact linear dependence between A and B given C yields +infinity.
inline double gaussian_mi(const CovarianceMatrix& cov, const Labels& a, const Labels& b,
                          const Labels& cond = {}) {
  if (a.empty() || b.empty()) throw DomainError("gaussian_mi needs nonempty subsets");
  const auto ia = detail::resolve(cov, a);
  const auto ib = detail::resolve(cov, b);
  const auto ic = detail::resolve(cov, cond);
  detail::require_disjoint(ia, ib);
  detail::require_disjoint(ia, ic);
  detail::require_disjoint(ib, ic);

  std::vector<Eigen::Index> ab = ia;
  ab.insert(ab.end(), ib.begin(), ib.end());
  const Eigen::MatrixXd m = detail::conditional_cov(cov.matrix(), ab, ic);
  const auto na = static_cast<Eigen::Index>(ia.size());
  const auto nb = static_cast<Eigen::Index>(ib.size());
  const Eigen::MatrixXd wa = detail::whitener(
      m.topLeftCorner(na, na), detail::rank_threshold(detail::principal(cov.matrix(), ia)));
  const Eigen::MatrixXd wb = detail::whitener(
      m.bottomRightCorner(nb, nb), detail::rank_threshold(detail::principal(cov.matrix(), ib)));
  if (wa.rows() == 0 || wb.rows() == 0) return 0.0;

  const Eigen::MatrixXd k = wa * m.topRightCorner(na, nb) * wb.transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(k);
  double bits = 0.0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    const double s = std::min(svd.singularValues()(i), 1.0);
    const double gap = 1.0 - s * s;
    if (gap <= kDependenceTolerance) return std::numeric_limits<double>::infinity();
    bits -= 0.5 * std::log1p(-s * s) / std::log(2.0);
  }
  return std::max(bits, 0.0);
}

/// Differential entropy in bits; -infinity when the subset covariance is singular.
inline double gaussian_entropy(const CovarianceMatrix& cov, const Labels& subset) {
  if (subset.empty()) throw DomainError("gaussian_entropy needs a nonempty subset");
  const auto idx = detail::resolve(cov, subset);
  const Eigen::MatrixXd s = detail::principal(cov.matrix(), idx);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s, Eigen::EigenvaluesOnly);
  const double tol = detail::rank_threshold(s);
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double lam = es.eigenvalues()(i);
    if (lam <= tol) return -std::numeric_limits<double>::infinity();
    logdet += std::log2(lam);
  }
  const double k = static_cast<double>(idx.size());
  return 0.5 * (k * std::log2(2.0 * M_PI * M_E) + logdet);
}

/// Gaussian total correlation: 1/2 log2(prod var(X_w|C) / det Sigma_{X_S|C}).
/// Components with zero conditional variance are dropped; exact dependence among the rest gives +infinity.
inline double gaussian_total_correlation(const CovarianceMatrix& cov, const Labels& subset,
                                         const Labels& cond = {}) {
  if (subset.empty()) throw DomainError("total correlation of an empty subset");
  const auto is = detail::resolve(cov, subset);
  const auto ic = detail::resolve(cov, cond);
  detail::require_disjoint(is, ic);
  const Eigen::MatrixXd m = detail::conditional_cov(cov.matrix(), is, ic);
  std::vector<Eigen::Index> live;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    if (m(i, i) > kRankTolerance * std::max(1.0, std::abs(cov.matrix()(is[i], is[i]))))
      live.push_back(i);
  if (live.size() < 2) return 0.0;
  Eigen::MatrixXd r = detail::principal(m, live);
  const Eigen::VectorXd inv_sd = r.diagonal().cwiseSqrt().cwiseInverse();
  r = inv_sd.asDiagonal() * r * inv_sd.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r, Eigen::EigenvaluesOnly);
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double lam = es.eigenvalues()(i);
    if (lam <= kDependenceTolerance) return std::numeric_limits<double>::infinity();
    logdet += std::log2(lam);
  }
  return std::max(-0.5 * logdet, 0.0);
}

inline void validate(const TwoRelayParams& p) {
  detail::require_unit_interval(p.rho, "rho");
  detail::require_unit_interval(p.rho1, "rho1");
  detail::require_unit_interval(p.rho2, "rho2");
  if (!(p.p1 > 0.0) || !(p.p2 > 0.0) || !std::isfinite(p.p1) || !std::isfinite(p.p2))
    throw DomainError("powers P1, P2 must be positive and finite");
  if (!(p.n_aux >= 0.0) || !std::isfinite(p.n_aux)) throw DomainError("N must be nonnegative and finite");
  const double d = p.det_corr();
  if (d < -kParamTolerance) {
    std::ostringstream os;
    os << "parameters violate 1 - rho^2 - rho1^2 - rho2^2 + 2 rho rho1 rho2 >= 0 (value " << d << ")";
    throw DomainError(os.str());
  }
}

inline bool is_feasible(const TwoRelayParams& p) {
  try {
    validate(p);
    return true;
  } catch (const DomainError&) {
    return false;
  }
}

/// Minimum eigenvalue condition for the symmetric (U,X1,X2,X3[,T]) covariance.
inline void validate(const ThreeRelaySymParams& p) {
  detail::require_unit_interval(p.rho, "rho");
  detail::require_unit_interval(p.rho_c, "rho_c");
  if (p.with_t) detail::require_unit_interval(p.rho_t, "rho_t");
  if (!(p.p > 0.0) || !std::isfinite(p.p)) throw DomainError("power P must be positive and finite");
  if (!(p.n_aux >= 0.0) || !std::isfinite(p.n_aux)) throw DomainError("N must be nonnegative and finite");
  // X|U,T has correlation-matrix entries a = 1 - rho_c^2 - rho_t^2 (diag), b = rho - rho_c^2 - rho_t^2.
  const double t2 = p.with_t ? p.rho_t * p.rho_t : 0.0;
  const double a = 1.0 - p.rho_c * p.rho_c - t2;
  const double b = p.rho - p.rho_c * p.rho_c - t2;
  if (a < -kParamTolerance) {
    std::ostringstream os;
    os << "parameters violate rho_c^2 + rho_t^2 <= 1 (value " << 1.0 - a << ")";
    throw DomainError(os.str());
  }
  if (a + 2.0 * b < -kParamTolerance) {
    std::ostringstream os;
    os << "parameters violate 1 + 2 rho - 3 (rho_c^2 + rho_t^2) >= 0 (value " << 1.0 + 2.0 * p.rho - 3.0 * (p.rho_c * p.rho_c + t2)
       << ")";
    throw DomainError(os.str());
  }
}

inline bool is_feasible(const ThreeRelaySymParams& p) {
  try {
    validate(p);
    return true;
  } catch (const DomainError&) {
    return false;
  }
}

namespace detail {

// Base vector (sources..., Z, W) mapped to (sources..., Y, V) with Y = sum X + Z, V = Y + W.
inline Eigen::MatrixXd channel_map(std::size_t n_sources, const std::vector<std::size_t>& relay_idx) {
  const auto ns = static_cast<Eigen::Index>(n_sources);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(ns + 2, ns + 2);
  a.topLeftCorner(ns, ns).setIdentity();
  for (auto r : relay_idx) {
    a(ns, static_cast<Eigen::Index>(r)) = 1.0;
    a(ns + 1, static_cast<Eigen::Index>(r)) = 1.0;
  }
  a(ns, ns) = 1.0;
  a(ns + 1, ns) = 1.0;
  a(ns + 1, ns + 1) = 1.0;
  return a;
}

inline Eigen::MatrixXd with_noises(const Eigen::MatrixXd& sources, double n_aux) {
  const auto ns = sources.rows();
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(ns + 2, ns + 2);
  b.topLeftCorner(ns, ns) = sources;
  b(ns, ns) = 1.0;
  b(ns + 1, ns + 1) = n_aux;
  return b;
}

}  // namespace detail

/// Covariance of (U, X1, X2, Y, V).
inline CovarianceMatrix assemble_sigma2(const TwoRelayParams& p) {
  validate(p);
  Eigen::Matrix3d s;
  const double s1 = std::sqrt(p.p1), s2 = std::sqrt(p.p2);
  s << 1.0, p.rho1 * s1, p.rho2 * s2,
       p.rho1 * s1, p.p1, p.rho * s1 * s2,
       p.rho2 * s2, p.rho * s1 * s2, p.p2;
  const Eigen::MatrixXd a = detail::channel_map(3, {1, 2});
  Eigen::MatrixXd full = a * detail::with_noises(s, p.n_aux) * a.transpose();
  return CovarianceMatrix({"U", "X1", "X2", "Y", "V"}, full);
}

/// Covariance of (U, X1, X2, X3, Y, V), or (U, T, X1, X2, X3, Y, V) when with_t is set.
inline CovarianceMatrix assemble_sigma3(const ThreeRelaySymParams& p) {
  validate(p);
  const double sp = std::sqrt(p.p);
  const std::size_t off = p.with_t ? 2 : 1;
  const auto n = static_cast<Eigen::Index>(off + 3);
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
  s(0, 0) = 1.0;
  if (p.with_t) s(1, 1) = 1.0;
  for (std::size_t k = 0; k < 3; ++k) {
    const auto xk = static_cast<Eigen::Index>(off + k);
    s(0, xk) = s(xk, 0) = p.rho_c * sp;
    if (p.with_t) s(1, xk) = s(xk, 1) = p.rho_t * sp;
    for (std::size_t l = 0; l < 3; ++l) {
      const auto xl = static_cast<Eigen::Index>(off + l);
      s(xk, xl) = (k == l) ? p.p : p.rho * p.p;
    }
  }
  const Eigen::MatrixXd a = detail::channel_map(off + 3, {off, off + 1, off + 2});
  Eigen::MatrixXd full = a * detail::with_noises(s, p.n_aux) * a.transpose();
  Labels names = p.with_t ? Labels{"U", "T", "X1", "X2", "X3", "Y", "V"}
                          : Labels{"U", "X1", "X2", "X3", "Y", "V"};
  return CovarianceMatrix(std::move(names), full);
}

}  // namespace diamond
