#pragma once

// Exact Shannon measures (base 2) over a dense joint pmf.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "diamond/errors.hpp"

namespace diamond {

using Labels = std::vector<std::string>;

inline constexpr std::size_t kMaxTensorSize = 10'000'000;
inline constexpr double kNormalizationTolerance = 1e-9;

class DiscreteJointDist {
 public:
  DiscreteJointDist(Labels names, std::vector<std::size_t> sizes, std::vector<double> probs)
      : names_(std::move(names)), sizes_(std::move(sizes)), probs_(std::move(probs)) {
    if (names_.empty()) throw DomainError("joint distribution needs at least one variable");
    if (names_.size() != sizes_.size())
      throw DomainError("variable count does not match alphabet size count");
    for (std::size_t i = 0; i < names_.size(); ++i)
      for (std::size_t j = i + 1; j < names_.size(); ++j)
        if (names_[i] == names_[j]) throw DomainError("duplicate variable label '" + names_[i] + "'");
    std::size_t total = 1;
    for (auto s : sizes_) {
      if (s == 0) throw DomainError("alphabet sizes must be positive");
      if (total > kMaxTensorSize / s) throw GuardError("probability tensor larger than 1e7 entries");
      total *= s;
    }
    if (probs_.size() != total)
      throw DomainError("probability tensor has " + std::to_string(probs_.size()) +
                        " entries, expected " + std::to_string(total));
    double mass = 0.0;
    for (double p : probs_) {
      if (!(p >= 0.0) || !std::isfinite(p)) throw DomainError("probabilities must be finite and nonnegative");
      mass += p;
    }
    if (std::abs(mass - 1.0) > kNormalizationTolerance)
      throw DomainError("probabilities sum to " + std::to_string(mass) + ", not 1");
    for (double& p : probs_) p /= mass;

    strides_.assign(sizes_.size(), 1);
    for (std::size_t i = sizes_.size(); i-- > 1;) strides_[i - 1] = strides_[i] * sizes_[i];
  }

  const Labels& names() const { return names_; }
  const std::vector<std::size_t>& sizes() const { return sizes_; }
  const std::vector<double>& probs() const { return probs_; }
  std::size_t num_vars() const { return names_.size(); }
  std::size_t num_outcomes() const { return probs_.size(); }

  std::size_t index_of(const std::string& label) const {
    auto it = std::find(names_.begin(), names_.end(), label);
    if (it == names_.end()) throw DomainError("unknown variable label '" + label + "'");
    return static_cast<std::size_t>(it - names_.begin());
  }

  /// Symbol of variable `var` in the flat (row-major) outcome `flat`.
  std::size_t symbol(std::size_t flat, std::size_t var) const {
    return (flat / strides_[var]) % sizes_[var];
  }

  std::size_t flat_index(const std::vector<std::size_t>& symbols) const {
    std::size_t flat = 0;
    for (std::size_t i = 0; i < symbols.size(); ++i) flat += symbols[i] * strides_[i];
    return flat;
  }

  /// Marginal pmf on the listed variable positions, row-major in the given order.
  std::vector<double> marginal(const std::vector<std::size_t>& vars) const {
    std::size_t out_size = 1;
    for (auto v : vars) out_size *= sizes_[v];
    std::vector<double> out(out_size, 0.0);
    for (std::size_t flat = 0; flat < probs_.size(); ++flat) {
      if (probs_[flat] == 0.0) continue;
      std::size_t idx = 0;
      for (auto v : vars) idx = idx * sizes_[v] + symbol(flat, v);
      out[idx] += probs_[flat];
    }
    return out;
  }

 private:
  Labels names_;
  std::vector<std::size_t> sizes_;
  std::vector<double> probs_;
  std::vector<std::size_t> strides_;
};

namespace detail {

inline std::vector<std::size_t> resolve(const DiscreteJointDist& dist, const Labels& labels) {
  std::vector<std::size_t> out;
  out.reserve(labels.size());
  for (const auto& l : labels) {
    auto idx = dist.index_of(l);
    if (std::find(out.begin(), out.end(), idx) != out.end())
      throw DomainError("label '" + l + "' listed twice");
    out.push_back(idx);
  }
  return out;
}

inline void require_disjoint(const Labels& a, const Labels& b) {
  for (const auto& x : a)
    if (std::find(b.begin(), b.end(), x) != b.end())
      throw DomainError("subsets overlap on '" + x + "'");
}

inline Labels join(const Labels& a, const Labels& b) {
  Labels out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

inline double entropy_of(const std::vector<double>& pmf) {
  double h = 0.0;
  for (double p : pmf)
    if (p > 0.0) h -= p * std::log2(p);
  return h;
}

// H of a possibly empty label set; H(empty) = 0.
inline double joint_entropy(const DiscreteJointDist& dist, const Labels& labels) {
  if (labels.empty()) return 0.0;
  return entropy_of(dist.marginal(resolve(dist, labels)));
}

}  // namespace detail

inline double entropy(const DiscreteJointDist& dist, const Labels& subset) {
  if (subset.empty()) throw DomainError("entropy of an empty subset");
  return detail::joint_entropy(dist, subset);
}

/// H(A|B) = H(A,B) - H(B). B may be empty.
inline double conditional_entropy(const DiscreteJointDist& dist, const Labels& a, const Labels& b) {
  if (a.empty()) throw DomainError("conditional entropy needs a nonempty target subset");
  detail::require_disjoint(a, b);
  detail::resolve(dist, b);
  double h = detail::joint_entropy(dist, detail::join(a, b)) - detail::joint_entropy(dist, b);
  return std::max(h, 0.0);
}

/// I(A;B|C), clamped at zero to absorb rounding noise.
inline double mutual_information(const DiscreteJointDist& dist, const Labels& a, const Labels& b,
                                 const Labels& cond = {}) {
  if (a.empty() || b.empty()) throw DomainError("mutual information needs nonempty subsets");
  detail::require_disjoint(a, b);
  detail::require_disjoint(a, cond);
  detail::require_disjoint(b, cond);
  const double hc = detail::joint_entropy(dist, cond);
  const double hac = detail::joint_entropy(dist, detail::join(a, cond));
  const double hbc = detail::joint_entropy(dist, detail::join(b, cond));
  const double habc = detail::joint_entropy(dist, detail::join(detail::join(a, b), cond));
  return std::max(hac + hbc - hc - habc, 0.0);
}

/// Total correlation: sum_w H(w|C) - H(S|C). Zero for singletons.
inline double total_correlation(const DiscreteJointDist& dist, const Labels& subset,
                                const Labels& cond = {}) {
  if (subset.empty()) throw DomainError("total correlation of an empty subset");
  detail::require_disjoint(subset, cond);
  detail::resolve(dist, subset);
  const double hc = detail::joint_entropy(dist, cond);
  double sum = 0.0;
  for (const auto& w : subset) sum += detail::joint_entropy(dist, detail::join({w}, cond)) - hc;
  const double joint = detail::joint_entropy(dist, detail::join(subset, cond)) - hc;
  return std::max(sum - joint, 0.0);
}

/// |I(X;Y|Z) - [I(X,Y;U|Z) - I(Y;U|X,Z) + I(X;Y|U,Z) - I(X;U|Y,Z)]|.
inline double auxiliary_identity_residual(const DiscreteJointDist& dist, const Labels& x,
                                          const Labels& y, const Labels& z, const Labels& u) {
  if (x.empty() || y.empty() || z.empty() || u.empty())
    throw DomainError("auxiliary identity needs four nonempty label sets");
  const std::vector<const Labels*> sets{&x, &y, &z, &u};
  for (std::size_t i = 0; i < sets.size(); ++i)
    for (std::size_t j = i + 1; j < sets.size(); ++j) detail::require_disjoint(*sets[i], *sets[j]);

  using detail::join;
  // Unclamped differences so the identity is checked on the raw entropies.
  auto mi = [&](const Labels& a, const Labels& b, const Labels& c) {
    return detail::joint_entropy(dist, join(a, c)) + detail::joint_entropy(dist, join(b, c)) -
           detail::joint_entropy(dist, c) - detail::joint_entropy(dist, join(join(a, b), c));
  };
  const double lhs = mi(x, y, z);
  const double rhs = mi(join(x, y), u, z) - mi(y, u, join(x, z)) + mi(x, y, join(u, z)) -
                     mi(x, u, join(y, z));
  return std::abs(lhs - rhs);
}

namespace detail {

inline void flatten_probs(const nlohmann::json& node, std::size_t depth,
                          const std::vector<std::size_t>& sizes, std::vector<double>& out) {
  if (depth == sizes.size()) {
    if (!node.is_number()) throw ParseError("probability entries must be numbers");
    out.push_back(node.get<double>());
    return;
  }
  if (!node.is_array() || node.size() != sizes[depth])
    throw ParseError("probs nesting at depth " + std::to_string(depth) + " must be an array of " +
                     std::to_string(sizes[depth]));
  for (const auto& child : node) flatten_probs(child, depth + 1, sizes, out);
}

}  // namespace detail

/// Parses {"vars":[...], "sizes":[...], "probs":[[...],...]} (row-major nesting in vars order).
/// A flat "probs" array of the full tensor size is accepted as well.
inline DiscreteJointDist joint_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("vars") || !doc.contains("sizes") || !doc.contains("probs"))
    throw ParseError("joint pmf document needs 'vars', 'sizes' and 'probs'");
  Labels vars;
  std::vector<std::size_t> sizes;
  try {
    vars = doc.at("vars").get<Labels>();
    sizes = doc.at("sizes").get<std::vector<std::size_t>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad 'vars'/'sizes': ") + e.what());
  }
  if (vars.size() != sizes.size()) throw ParseError("'vars' and 'sizes' differ in length");
  std::vector<double> probs;
  const auto& p = doc.at("probs");
  std::size_t total = 1;
  for (auto s : sizes) total *= s;
  if (p.is_array() && p.size() == total && (p.empty() || p.front().is_number()) && sizes.size() > 1) {
    for (const auto& v : p) {
      if (!v.is_number()) throw ParseError("probability entries must be numbers");
      probs.push_back(v.get<double>());
    }
  } else {
    detail::flatten_probs(p, 0, sizes, probs);
  }
  return DiscreteJointDist(std::move(vars), std::move(sizes), std::move(probs));
}

inline nlohmann::json joint_to_json(const DiscreteJointDist& dist) {
  nlohmann::json doc;
  doc["vars"] = dist.names();
  doc["sizes"] = dist.sizes();
  doc["probs"] = dist.probs();
  return doc;
}

}  // namespace diamond
