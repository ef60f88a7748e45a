#pragma once

// Robust typicality and seeded Monte Carlo checks of the covering, packing and
// codebook-size lemmas at small blocklengths.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "diamond/errors.hpp"
#include "diamond/info_measures.hpp"
#include "diamond/optimize.hpp"

namespace diamond {

inline constexpr double kMaxCodebookSize = 1048576.0;  // 2^20
inline constexpr double kWorkGuard = 1e8;

struct TypicalityConfig {
  double epsilon = 0.1;
  std::size_t n = 64;
};

struct EmpiricalEstimate {
  double mean = 0.0;
  double half_width_95 = 0.0;
  std::size_t trials = 0;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Independent stream per trial index, so results do not depend on scheduling.
inline std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial) {
  return splitmix64(seed ^ splitmix64(trial + 1));
}

/// Uniform double in [0,1) from the top 53 bits.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Inverse-CDF draw from a pmf.
inline std::size_t sample_index(const std::vector<double>& pmf, std::mt19937_64& rng) {
  const double u = uniform01(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < pmf.size(); ++i) {
    acc += pmf[i];
    if (u < acc) return i;
  }
  for (std::size_t i = pmf.size(); i-- > 0;)
    if (pmf[i] > 0.0) return i;
  return 0;
}

inline EmpiricalEstimate summarize(const std::vector<double>& values) {
  EmpiricalEstimate e;
  e.trials = values.size();
  if (values.empty()) return e;
  double sum = 0.0;
  for (double v : values) sum += v;
  e.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - e.mean) * (v - e.mean);
    const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    e.half_width_95 = 1.96 * sd / std::sqrt(static_cast<double>(values.size()));
  }
  return e;
}

namespace detail {

/// Allowed count range [lo, hi] for a cell of probability p under robust typicality.
inline std::pair<long, long> count_range(double p, std::size_t n, double eps) {
  if (p <= 0.0) return {0, 0};
  const double nd = static_cast<double>(n);
  const long lo = std::max(0L, static_cast<long>(std::ceil(nd * p * (1.0 - eps) - 1e-9)));
  const long hi = static_cast<long>(std::floor(nd * p * (1.0 + eps) + 1e-9));
  return {lo, hi};
}

inline bool counts_typical(const std::vector<std::size_t>& counts, const std::vector<double>& pmf,
                           std::size_t n, double eps) {
  for (std::size_t i = 0; i < pmf.size(); ++i) {
    const auto [lo, hi] = count_range(pmf[i], n, eps);
    const auto c = static_cast<long>(counts[i]);
    if (c < lo || c > hi) return false;
  }
  return true;
}

inline void check_epsilon(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("epsilon must lie in (0,1)");
}

inline double codebook_size(std::size_t n, double rate) {
  if (!(rate >= 0.0)) throw DomainError("rates must be nonnegative");
  return std::ceil(std::exp2(static_cast<double>(n) * rate) - 1e-9);
}

inline double log2_sum_exp(const std::vector<double>& logs) {
  if (logs.empty()) return -std::numeric_limits<double>::infinity();
  const double m = *std::max_element(logs.begin(), logs.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double l : logs) s += std::exp2(l - m);
  return m + std::log2(s);
}

}  // namespace detail

/// Robust typicality: |pi(u) - p(u)| <= eps p(u) for every joint symbol u.
/// sequences[v] is the sequence of variable v (in dist's variable order).
inline bool is_typical(const std::vector<std::vector<std::size_t>>& sequences, const DiscreteJointDist& joint,
                       double epsilon) {
  detail::check_epsilon(epsilon);
  if (sequences.size() != joint.num_vars()) throw DomainError("one sequence per variable is required");
  const std::size_t n = sequences.front().size();
  if (n == 0) throw DomainError("sequences must be nonempty");
  for (std::size_t v = 0; v < sequences.size(); ++v) {
    if (sequences[v].size() != n) throw DomainError("sequence lengths differ");
    for (auto s : sequences[v])
      if (s >= joint.sizes()[v]) throw DomainError("symbol outside the alphabet of " + joint.names()[v]);
  }
  std::vector<std::size_t> counts(joint.num_outcomes(), 0);
  std::vector<std::size_t> sym(sequences.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t v = 0; v < sequences.size(); ++v) sym[v] = sequences[v][i];
    ++counts[joint.flat_index(sym)];
  }
  return detail::counts_typical(counts, joint.probs(), n, epsilon);
}

// ---------------------------------------------------------------------------------------------
// Exact conditional probability that an i.i.d. sequence is typical together with a fixed sequence.

/// Joint pmf split as (candidate variable A, conditioning variables Z): pmf[a][z].
struct SplitPmf {
  std::size_t a_size = 0, z_size = 0;
  std::vector<std::vector<double>> pmf;  // [a][z]
  std::vector<double> a_marginal;
  std::vector<double> z_marginal;
};

inline SplitPmf split_pmf(const DiscreteJointDist& joint, const Labels& a, const Labels& z) {
  Labels all = a;
  all.insert(all.end(), z.begin(), z.end());
  if (all.size() != joint.num_vars()) throw DomainError("candidate and conditioning sets must cover the joint");
  detail::require_disjoint(a, z);
  std::vector<std::size_t> ia, iz;
  for (const auto& l : a) ia.push_back(joint.index_of(l));
  for (const auto& l : z) iz.push_back(joint.index_of(l));
  SplitPmf s;
  s.a_size = 1;
  for (auto i : ia) s.a_size *= joint.sizes()[i];
  s.z_size = 1;
  for (auto i : iz) s.z_size *= joint.sizes()[i];
  s.pmf.assign(s.a_size, std::vector<double>(s.z_size, 0.0));
  for (std::size_t flat = 0; flat < joint.num_outcomes(); ++flat) {
    std::size_t ai = 0, zi = 0;
    for (auto i : ia) ai = ai * joint.sizes()[i] + joint.symbol(flat, i);
    for (auto i : iz) zi = zi * joint.sizes()[i] + joint.symbol(flat, i);
    s.pmf[ai][zi] += joint.probs()[flat];
  }
  s.a_marginal.assign(s.a_size, 0.0);
  s.z_marginal.assign(s.z_size, 0.0);
  for (std::size_t ai = 0; ai < s.a_size; ++ai)
    for (std::size_t zi = 0; zi < s.z_size; ++zi) {
      s.a_marginal[ai] += s.pmf[ai][zi];
      s.z_marginal[zi] += s.pmf[ai][zi];
    }
  return s;
}

/// log2 P(A^n i.i.d. from `law` is typical with a fixed z^n whose symbol counts are z_counts).
/// The probability factorizes over z symbols; each factor sums multinomial terms over the
/// admissible compositions.
inline double log2_conditional_typical_prob(const SplitPmf& s, const std::vector<double>& law,
                                            const std::vector<std::size_t>& z_counts, std::size_t n, double eps) {
  double total = 0.0;
  for (std::size_t zi = 0; zi < s.z_size; ++zi) {
    const auto nz = static_cast<long>(z_counts[zi]);
    std::vector<std::pair<long, long>> range(s.a_size);
    long lo_sum = 0, hi_sum = 0;
    for (std::size_t ai = 0; ai < s.a_size; ++ai) {
      range[ai] = detail::count_range(s.pmf[ai][zi], n, eps);
      if (law[ai] <= 0.0) range[ai] = {0, std::min(range[ai].second, 0L)};
      range[ai].second = std::min(range[ai].second, nz);
      if (range[ai].first > range[ai].second) return -std::numeric_limits<double>::infinity();
      lo_sum += range[ai].first;
      hi_sum += range[ai].second;
    }
    if (nz < lo_sum || nz > hi_sum) return -std::numeric_limits<double>::infinity();
    if (nz == 0) continue;
    const double log2e = 1.0 / std::log(2.0);
    std::vector<double> log_law(s.a_size);
    for (std::size_t ai = 0; ai < s.a_size; ++ai)
      log_law[ai] = law[ai] > 0.0 ? std::log2(law[ai]) : -std::numeric_limits<double>::infinity();
    const double lg_nz = std::lgamma(static_cast<double>(nz) + 1.0) * log2e;
    std::vector<double> terms;
    std::vector<long> comp(s.a_size, 0);
    // Remaining-capacity bounds prune the enumeration.
    std::vector<long> suffix_lo(s.a_size + 1, 0), suffix_hi(s.a_size + 1, 0);
    for (std::size_t ai = s.a_size; ai-- > 0;) {
      suffix_lo[ai] = suffix_lo[ai + 1] + range[ai].first;
      suffix_hi[ai] = suffix_hi[ai + 1] + range[ai].second;
    }
    auto rec = [&](auto&& self, std::size_t ai, long left, double acc) -> void {
      if (ai + 1 == s.a_size) {
        if (left < range[ai].first || left > range[ai].second) return;
        double t = acc - std::lgamma(static_cast<double>(left) + 1.0) * log2e;
        if (left > 0) t += static_cast<double>(left) * log_law[ai];
        terms.push_back(t);
        return;
      }
      const long lo = std::max(range[ai].first, left - suffix_hi[ai + 1]);
      const long hi = std::min(range[ai].second, left - suffix_lo[ai + 1]);
      for (long c = lo; c <= hi; ++c) {
        double t = acc - std::lgamma(static_cast<double>(c) + 1.0) * log2e;
        if (c > 0) t += static_cast<double>(c) * log_law[ai];
        self(self, ai + 1, left - c, t);
      }
    };
    rec(rec, 0, nz, lg_nz);
    const double lz = detail::log2_sum_exp(terms);
    if (!std::isfinite(lz)) return lz;
    total += lz;
  }
  return total;
}

/// True iff z^n alone passes the z-marginal part of every cell check (necessary condition).
inline std::vector<std::size_t> count_symbols(const std::vector<std::size_t>& seq, std::size_t alphabet) {
  std::vector<std::size_t> c(alphabet, 0);
  for (auto s : seq) ++c[s];
  return c;
}

// ---------------------------------------------------------------------------------------------
// Covering lemma

struct CoveringExperiment {
  DiscreteJointDist joint;
  std::vector<double> rates;  // per variable of joint, in its order
  double bin_rate = 0.0;
  TypicalityConfig config;
  std::size_t trials = 400;
  std::uint64_t seed = 7;
};

/// Per trial: independent codebooks from the marginals, uniform binning of index tuples, and
/// the indicator that bin 1 holds no jointly typical tuple. Exhaustive within the guards.
inline EmpiricalEstimate sim_covering(const CoveringExperiment& exp) {
  const auto& joint = exp.joint;
  const std::size_t k = joint.num_vars();
  const std::size_t n = exp.config.n;
  detail::check_epsilon(exp.config.epsilon);
  if (n == 0) throw DomainError("blocklength must be positive");
  if (exp.rates.size() != k) throw DomainError("one rate per variable is required");
  if (exp.trials == 0) throw DomainError("trials must be positive");

  std::vector<double> sizes_d(k);
  double tuples = 1.0;
  for (std::size_t v = 0; v < k; ++v) {
    sizes_d[v] = detail::codebook_size(n, exp.rates[v]);
    if (sizes_d[v] > kMaxCodebookSize) {
      std::ostringstream os;
      os << "experiment too large: codebook of " << joint.names()[v] << " has 2^" << n * exp.rates[v]
         << " entries (limit 2^20); lower n or the rate";
      throw GuardError(os.str());
    }
    tuples *= sizes_d[v];
  }
  const double bins = detail::codebook_size(n, exp.bin_rate);
  const double work = tuples / bins;
  if (work > kWorkGuard) {
    std::ostringstream os;
    os << "experiment too large: " << work << " expected tuple checks per trial (limit 1e8); lower n or the rates";
    throw GuardError(os.str());
  }

  std::vector<std::size_t> sizes(k);
  for (std::size_t v = 0; v < k; ++v) sizes[v] = static_cast<std::size_t>(sizes_d[v]);
  std::vector<std::vector<double>> marginals(k);
  for (std::size_t v = 0; v < k; ++v) marginals[v] = joint.marginal({v});
  std::vector<std::size_t> strides(k, 1);
  for (std::size_t v = k; v-- > 1;) strides[v - 1] = strides[v] * joint.sizes()[v];
  // Per-cell count ceilings allow early rejection.
  std::vector<std::size_t> upper(joint.num_outcomes());
  for (std::size_t c = 0; c < upper.size(); ++c)
    upper[c] = static_cast<std::size_t>(std::max(0L, detail::count_range(joint.probs()[c], n, exp.config.epsilon).second));

  std::vector<double> outcome(exp.trials);
  parallel_for(exp.trials, [&](std::size_t t) {
    std::mt19937_64 rng(trial_seed(exp.seed, t));
    // books[v][index * n + i]
    std::vector<std::vector<std::uint16_t>> books(k);
    for (std::size_t v = 0; v < k; ++v) {
      books[v].resize(sizes[v] * n);
      for (auto& s : books[v]) s = static_cast<std::uint16_t>(sample_index(marginals[v], rng));
    }
    const double p_bin = 1.0 / bins;
    const double log_miss = bins > 1.0 ? std::log1p(-p_bin) : 0.0;
    const std::size_t total = static_cast<std::size_t>(tuples);
    std::vector<std::size_t> counts(joint.num_outcomes());
    std::vector<std::size_t> idx(k);
    std::vector<const std::uint16_t*> rows(k);
    bool found = false;
    std::size_t flat = 0;
    auto next_member = [&]() -> bool {
      if (bins <= 1.0) return flat < total;
      const double u = 1.0 - uniform01(rng);
      const double skip = std::floor(std::log(u) / log_miss);
      if (skip >= static_cast<double>(total - flat)) return false;
      flat += static_cast<std::size_t>(skip);
      return flat < total;
    };
    std::size_t decoded = total;  // flat index currently held in idx
    while (!found && next_member()) {
      if (decoded + 1 == flat) {
        for (std::size_t v = k; v-- > 0;) {
          if (++idx[v] < sizes[v]) break;
          idx[v] = 0;
        }
      } else if (decoded != flat) {
        std::size_t rem = flat;
        for (std::size_t v = k; v-- > 0;) {
          idx[v] = rem % sizes[v];
          rem /= sizes[v];
        }
      }
      decoded = flat;
      std::fill(counts.begin(), counts.end(), 0);
      for (std::size_t v = 0; v < k; ++v) rows[v] = books[v].data() + idx[v] * n;
      bool over = false;
      for (std::size_t i = 0; i < n && !over; ++i) {
        std::size_t cell = 0;
        for (std::size_t v = 0; v < k; ++v) cell += rows[v][i] * strides[v];
        over = ++counts[cell] > upper[cell];
      }
      found = !over && detail::counts_typical(counts, joint.probs(), n, exp.config.epsilon);
      ++flat;
    }
    outcome[t] = found ? 0.0 : 1.0;
  });
  return summarize(outcome);
}

// ---------------------------------------------------------------------------------------------
// Packing lemma

enum class McMethod { Auto, Exact, BruteForce };

struct PackingExperiment {
  DiscreteJointDist joint;  // over (U_S, U_Sc, Y)
  Labels s;                 // labels of U_S
  std::vector<double> rates;  // per label of s
  TypicalityConfig config;
  std::size_t trials = 400;
  std::uint64_t seed = 7;
  McMethod method = McMethod::Auto;
};

/// Probability that some wrong U_S tuple is jointly typical with (U_Sc^n, Y^n) drawn from the joint.
/// For a single codebook (|S| = 1) each trial contributes the exact conditional probability
/// 1 - (1 - q)^M given the drawn sequences; otherwise candidates are enumerated.
inline EmpiricalEstimate sim_packing(const PackingExperiment& exp) {
  const auto& joint = exp.joint;
  const std::size_t n = exp.config.n;
  const double eps = exp.config.epsilon;
  detail::check_epsilon(eps);
  if (n == 0) throw DomainError("blocklength must be positive");
  if (exp.s.empty()) throw DomainError("packing set S must be nonempty");
  if (exp.rates.size() != exp.s.size()) throw DomainError("one rate per member of S is required");
  if (exp.trials == 0) throw DomainError("trials must be positive");
  Labels z;
  for (const auto& name : joint.names())
    if (std::find(exp.s.begin(), exp.s.end(), name) == exp.s.end()) z.push_back(name);
  if (z.empty()) throw DomainError("packing needs conditioning variables besides S");

  const bool exact = exp.method == McMethod::Exact || (exp.method == McMethod::Auto && exp.s.size() == 1);
  if (exact && exp.s.size() != 1) throw DomainError("the exact conditional method needs |S| = 1");

  std::vector<double> sizes_d;
  double tuples = 1.0;
  for (std::size_t j = 0; j < exp.s.size(); ++j) {
    sizes_d.push_back(detail::codebook_size(n, exp.rates[j]));
    tuples *= sizes_d.back();
  }
  if (!exact) {
    for (std::size_t j = 0; j < sizes_d.size(); ++j)
      if (sizes_d[j] > kMaxCodebookSize) {
        std::ostringstream os;
        os << "experiment too large: codebook of " << exp.s[j] << " has 2^" << n * exp.rates[j]
           << " entries (limit 2^20)";
        throw GuardError(os.str());
      }
    if (tuples > kWorkGuard) {
      std::ostringstream os;
      os << "experiment too large: " << tuples << " tuple checks per trial (limit 1e8)";
      throw GuardError(os.str());
    }
  }

  const SplitPmf sp = split_pmf(joint, exp.s, z);
  std::vector<double> values(exp.trials);
  parallel_for(exp.trials, [&](std::size_t t) {
    std::mt19937_64 rng(trial_seed(exp.seed, t));
    std::vector<std::size_t> zseq(n);
    for (auto& zs : zseq) {
      const std::size_t flat = sample_index(joint.probs(), rng);
      // Joint flat index to (a, z) split.
      std::size_t zi = 0;
      for (const auto& l : z) {
        const auto v = joint.index_of(l);
        zi = zi * joint.sizes()[v] + joint.symbol(flat, v);
      }
      zs = zi;
    }
    if (exact) {
      const auto zc = count_symbols(zseq, sp.z_size);
      const double lq = log2_conditional_typical_prob(sp, sp.a_marginal, zc, n, eps);
      const double q = std::exp2(lq);
      const double m = tuples;
      values[t] = q >= 1.0 ? 1.0 : -std::expm1(m * std::log1p(-q));
      return;
    }
    // Brute force: independent codebooks per member of S, every index tuple is a candidate.
    const std::size_t k = exp.s.size();
    std::vector<std::size_t> sizes(k);
    std::vector<std::vector<double>> marg(k);
    std::vector<std::size_t> sidx(k);
    for (std::size_t j = 0; j < k; ++j) {
      sizes[j] = static_cast<std::size_t>(sizes_d[j]);
      sidx[j] = joint.index_of(exp.s[j]);
      marg[j] = joint.marginal({sidx[j]});
    }
    std::vector<std::vector<std::uint16_t>> books(k);
    for (std::size_t j = 0; j < k; ++j) {
      books[j].resize(sizes[j] * n);
      for (auto& s : books[j]) s = static_cast<std::uint16_t>(sample_index(marg[j], rng));
    }
    // Combined index over the S alphabet, matching split_pmf ordering.
    std::vector<std::size_t> counts(sp.a_size * sp.z_size);
    std::vector<double> flat_pmf(sp.a_size * sp.z_size);
    for (std::size_t a = 0; a < sp.a_size; ++a)
      for (std::size_t zz = 0; zz < sp.z_size; ++zz) flat_pmf[a * sp.z_size + zz] = sp.pmf[a][zz];
    bool hit = false;
    const auto total = static_cast<std::size_t>(tuples);
    std::vector<std::size_t> idx(k);
    for (std::size_t flat = 0; flat < total && !hit; ++flat) {
      std::size_t rem = flat;
      for (std::size_t j = k; j-- > 0;) {
        idx[j] = rem % sizes[j];
        rem /= sizes[j];
      }
      std::fill(counts.begin(), counts.end(), 0);
      for (std::size_t i = 0; i < n; ++i) {
        std::size_t a = 0;
        for (std::size_t j = 0; j < k; ++j) a = a * joint.sizes()[sidx[j]] + books[j][idx[j] * n + i];
        ++counts[a * sp.z_size + zseq[i]];
      }
      hit = detail::counts_typical(counts, flat_pmf, n, eps);
    }
    values[t] = hit ? 1.0 : 0.0;
  });
  return summarize(values);
}

// ---------------------------------------------------------------------------------------------
// Expected codebook size

struct CodebookSizeExperiment {
  DiscreteJointDist joint;  // over (U, V)
  std::string u = "U";
  std::string v = "V";
  double rate = 0.5;
  TypicalityConfig config;
  std::size_t trials = 400;
  std::uint64_t seed = 7;
  McMethod method = McMethod::Auto;
};

/// delta(eps) = eps (H(U) + H(V)).
inline double codebook_delta(const DiscreteJointDist& joint, const std::string& u, const std::string& v,
                             double eps) {
  return eps * (entropy(joint, {u}) + entropy(joint, {v}));
}

/// Mean of |D|, the number of codewords typical with V^n. Each trial contributes
/// E[|D| | V^n] = M q(V^n) exactly (Auto/Exact) or the enumerated count (BruteForce).
inline EmpiricalEstimate sim_codebook_size(const CodebookSizeExperiment& exp) {
  const auto& joint = exp.joint;
  const std::size_t n = exp.config.n;
  const double eps = exp.config.epsilon;
  detail::check_epsilon(eps);
  if (n == 0) throw DomainError("blocklength must be positive");
  if (joint.num_vars() != 2) throw DomainError("codebook-size experiment needs a joint over (U,V)");
  if (exp.trials == 0) throw DomainError("trials must be positive");
  const double m = detail::codebook_size(n, exp.rate);
  const bool exact = exp.method != McMethod::BruteForce;
  if (!exact && m > kMaxCodebookSize) {
    std::ostringstream os;
    os << "experiment too large: codebook has 2^" << n * exp.rate << " entries (limit 2^20)";
    throw GuardError(os.str());
  }
  const SplitPmf sp = split_pmf(joint, {exp.u}, {exp.v});
  std::vector<double> values(exp.trials);
  parallel_for(exp.trials, [&](std::size_t t) {
    std::mt19937_64 rng(trial_seed(exp.seed, t));
    std::vector<std::size_t> vseq(n);
    for (auto& s : vseq) s = sample_index(sp.z_marginal, rng);
    if (exact) {
      const double lq = log2_conditional_typical_prob(sp, sp.a_marginal, count_symbols(vseq, sp.z_size), n, eps);
      values[t] = std::exp2(std::log2(m) + lq);
      return;
    }
    const auto msz = static_cast<std::size_t>(m);
    std::vector<std::size_t> counts(sp.a_size * sp.z_size);
    std::vector<double> flat_pmf(sp.a_size * sp.z_size);
    for (std::size_t a = 0; a < sp.a_size; ++a)
      for (std::size_t zz = 0; zz < sp.z_size; ++zz) flat_pmf[a * sp.z_size + zz] = sp.pmf[a][zz];
    double hits = 0.0;
    for (std::size_t c = 0; c < msz; ++c) {
      std::fill(counts.begin(), counts.end(), 0);
      for (std::size_t i = 0; i < n; ++i) ++counts[sample_index(sp.a_marginal, rng) * sp.z_size + vseq[i]];
      if (detail::counts_typical(counts, flat_pmf, n, eps)) hits += 1.0;
    }
    values[t] = hits;
  });
  return summarize(values);
}

// ---------------------------------------------------------------------------------------------
// Phase scan

struct PhaseRow {
  std::size_t n = 0;
  EmpiricalEstimate estimate;
  std::uint64_t seed = 0;
};

/// One estimate per blocklength; the seed for blocklength n is seed xor n.
template <class Experiment, class Sim>
std::vector<PhaseRow> phase_scan(const Experiment& templ, const std::vector<std::size_t>& n_values, Sim&& sim) {
  if (n_values.empty()) throw DomainError("phase scan needs at least one blocklength");
  std::vector<PhaseRow> rows;
  for (auto n : n_values) {
    Experiment e = templ;
    e.config.n = n;
    e.seed = templ.seed ^ static_cast<std::uint64_t>(n);
    rows.push_back({n, sim(e), e.seed});
  }
  return rows;
}

}  // namespace diamond

namespace diamond {

namespace detail {

inline const nlohmann::json& require_key(const nlohmann::json& doc, const char* key) {
  if (!doc.is_object() || !doc.contains(key)) throw ParseError(std::string("experiment spec lacks '") + key + "'");
  return doc.at(key);
}

inline McMethod method_from(const nlohmann::json& doc) {
  if (!doc.contains("method")) return McMethod::Auto;
  const auto m = doc.at("method").get<std::string>();
  if (m == "auto") return McMethod::Auto;
  if (m == "exact") return McMethod::Exact;
  if (m == "brute") return McMethod::BruteForce;
  throw ParseError("method must be auto, exact or brute, got '" + m + "'");
}

inline TypicalityConfig config_from(const nlohmann::json& doc) {
  TypicalityConfig c;
  c.epsilon = doc.value("epsilon", 0.1);
  c.n = doc.value("n", std::size_t{64});
  return c;
}

template <class F>
auto parse_guarded(F&& f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("experiment spec: ") + e.what());
  }
}

}  // namespace detail

/// {"joint": {...}, "rates": {"U1": 0.8, ...}, "bin_rate": 0, "epsilon": 0.1, "n": 64, "trials": 400, "seed": 7}
inline CoveringExperiment covering_from_json(const nlohmann::json& doc) {
  return detail::parse_guarded([&] {
    auto joint = joint_from_json(detail::require_key(doc, "joint"));
    const auto& rates = detail::require_key(doc, "rates");
    std::vector<double> r;
    for (const auto& name : joint.names()) {
      if (!rates.contains(name)) throw ParseError("rates lack variable '" + name + "'");
      r.push_back(rates.at(name).get<double>());
    }
    return CoveringExperiment{std::move(joint), std::move(r), doc.value("bin_rate", 0.0), detail::config_from(doc),
                              doc.value("trials", std::size_t{400}), doc.value("seed", std::uint64_t{7})};
  });
}

/// {"joint": {...}, "s": ["U1"], "rates": {"U1": 0.478}, ...}
inline PackingExperiment packing_from_json(const nlohmann::json& doc) {
  return detail::parse_guarded([&] {
    auto joint = joint_from_json(detail::require_key(doc, "joint"));
    auto s = detail::require_key(doc, "s").get<Labels>();
    const auto& rates = detail::require_key(doc, "rates");
    std::vector<double> r;
    for (const auto& name : s) {
      joint.index_of(name);
      if (!rates.contains(name)) throw ParseError("rates lack variable '" + name + "'");
      r.push_back(rates.at(name).get<double>());
    }
    return PackingExperiment{std::move(joint), std::move(s), std::move(r), detail::config_from(doc),
                             doc.value("trials", std::size_t{400}), doc.value("seed", std::uint64_t{7}),
                             detail::method_from(doc)};
  });
}

/// {"joint": {...}, "u": "U", "v": "V", "rate": 0.5, ...}
inline CodebookSizeExperiment codebook_size_from_json(const nlohmann::json& doc) {
  return detail::parse_guarded([&] {
    auto joint = joint_from_json(detail::require_key(doc, "joint"));
    const auto u = doc.value("u", std::string("U"));
    const auto v = doc.value("v", std::string("V"));
    joint.index_of(u);
    joint.index_of(v);
    return CodebookSizeExperiment{std::move(joint), u, v, detail::require_key(doc, "rate").get<double>(),
                                  detail::config_from(doc), doc.value("trials", std::size_t{400}),
                                  doc.value("seed", std::uint64_t{7}), detail::method_from(doc)};
  });
}

}  // namespace diamond
