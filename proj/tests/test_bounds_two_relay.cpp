#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "diamond/bounds_two_relay.hpp"

using namespace diamond;

namespace {

constexpr double kHalfLog3 = 0.792481250360578091;
constexpr double kHalfLog5 = 1.160964047443681174;

TwoRelayParams point(double rho, double r1, double r2, double n = 0.0, double p1 = 1.0, double p2 = 1.0) {
  TwoRelayParams p;
  p.rho = rho;
  p.rho1 = r1;
  p.rho2 = r2;
  p.n_aux = n;
  p.p1 = p1;
  p.p2 = p2;
  return p;
}

// Upper-bound terms written as information expressions on the assembled covariance.
std::array<double, 6> logdet_upper_terms(const TwoRelayParams& p, const LinkCaps2& c) {
  const auto cov = assemble_sigma2(p);
  return {c.c11 + c.c22,
          c.c11 + c.c12 + gaussian_mi(cov, {"X2"}, {"Y"}, {"U", "X1"}),
          c.c22 + c.c21 + gaussian_mi(cov, {"X1"}, {"Y"}, {"U", "X2"}),
          gaussian_mi(cov, {"X1", "X2"}, {"Y"}),
          c.c12 + c.c21 + gaussian_mi(cov, {"X1", "X2"}, {"Y"}, {"U"}),
          0.5 * (c.total() + gaussian_mi(cov, {"X1"}, {"V"}, {"U", "X2"}) +
                 gaussian_mi(cov, {"X1", "X2"}, {"Y"}, {"U", "V"}) + gaussian_mi(cov, {"X2"}, {"V"}, {"U", "X1"}))};
}

// Bisection on the implicit last constraint R <= rhs(R), rhs built from log-det quantities.
double bisect_last_term(const TwoRelayParams& p, const LinkCaps2& c) {
  const auto cov = assemble_sigma2(p);
  const double n = p.n_aux;
  const double gain = gaussian_mi(cov, {"X1"}, {"V"}, {"U", "X2"}) + gaussian_mi(cov, {"X2"}, {"V"}, {"U", "X1"}) +
                      0.5 * std::log2(1.0 + n);
  auto g = [&](double r) {
    return r - (c.c11 + c.c22 - 0.5 * std::log2(std::exp2(2.0 * (r - c.c12 - c.c21)) + n) + gain);
  };
  double lo = -200.0, hi = 200.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

GridSpec coarse() {
  GridSpec g;
  g.points_per_axis = 21;
  return g;
}

}  // namespace

TEST(PhiK, Substitutions) {
  EXPECT_DOUBLE_EQ(phi_k(point(0, 0, 0), 1, 1.0), 2.0);
  EXPECT_DOUBLE_EQ(phi_k(point(0, 0, 0, 1.0), 2, 1.0), 3.0);
  EXPECT_DOUBLE_EQ(phi_k(point(0.5, 0.5, 0.5), 1, 1.0), 1.25);
}

TEST(PhiK, LinearVariantDiffers) {
  const auto p = point(0.5, 0.5, 0.5);
  EXPECT_DOUBLE_EQ(phi_k(p, 1, 1.0, PhiVariant::Linear), 0.25 + 0.5);
  EXPECT_THROW(phi_k(p, 3, 1.0), DomainError);
}

TEST(Varphi, Substitutions) {
  EXPECT_DOUBLE_EQ(varphi(point(0, 0, 0)), 3.0);
  EXPECT_DOUBLE_EQ(varphi(point(1, 0, 0)), 5.0);
  EXPECT_DOUBLE_EQ(varphi(point(0.5, 0.5, 0.5)), 3.0);
}

TEST(LowerBound2, NoFronthaul) {
  const auto r = lower_bound2(point(0.3, 0.2, 0.1), {0, 0, 0, 0});
  EXPECT_EQ(r.value_bits, 0.0);
  EXPECT_EQ(r.binding_index, 0u);
}

TEST(LowerBound2, LargeCapsBindAtMac) {
  const auto r = lower_bound2(point(0, 0, 0), {20, 20, 20, 20});
  EXPECT_NEAR(r.value_bits, kHalfLog3, 1e-12);
  EXPECT_EQ(r.binding_label, "I(X1,X2;Y)");
}

TEST(LowerBound2, TermByTerm) {
  const LinkCaps2 c{0.3, 0.3, 0, 0};
  const auto r = lower_bound2(point(0, 0, 0), c);
  const std::vector<double> oracle{0.6, 0.8, 0.8, kHalfLog3, 0.5 * (0.6 + std::log2(3.0) / 2.0)};
  ASSERT_EQ(r.terms.size(), oracle.size());
  for (std::size_t i = 0; i < oracle.size(); ++i) EXPECT_NEAR(r.terms[i], oracle[i], 1e-12) << i;
  EXPECT_NEAR(r.value_bits, 0.6, 1e-12);
}

TEST(LowerBound2, ClosedFormMatchesLogDet) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const LinkCaps2 c{0.7, 0.4, 0.2, 0.3};
  int n = 0;
  while (n < 300) {
    const auto p = point(u(rng), u(rng), u(rng), 0.0, 0.5 + u(rng), 0.5 + u(rng));
    if (p.det_corr() < 1e-6) continue;
    const auto a = lower_bound2_terms(p, c);
    const auto b = lower_bound2_terms_closed(p, c);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(a[i], b[i], 1e-9);
    ++n;
  }
}

TEST(UpperBound1Terms, MacTermAtFullCoherence) {
  EXPECT_NEAR(upper_bound1_terms(point(1, 0, 0), {1, 1, 1, 1})[3], kHalfLog5, 1e-12);
}

TEST(UpperBound1Terms, FirstTermConstant) {
  const LinkCaps2 c{0.8, 1.1, 0.2, 0.3};
  for (double rho : {0.0, 0.4, 0.9}) EXPECT_DOUBLE_EQ(upper_bound1_terms(point(rho, 0.1, 0.2), c)[0], 1.9);
}

TEST(UpperBound1Terms, MatchLogDetComposition) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const LinkCaps2 c{0.5, 0.9, 0.25, 0.1};
  int n = 0;
  while (n < 200) {
    const auto p = point(u(rng), u(rng), u(rng), 5.0 * u(rng), 0.2 + 2 * u(rng), 0.2 + 2 * u(rng));
    if (p.det_corr() < 1e-6) continue;
    const auto a = upper_bound1_terms(p, c);
    const auto b = logdet_upper_terms(p, c);
    for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(a[i], b[i], 1e-9) << "term " << i + 1;
    ++n;
  }
}

TEST(UpperBound1Terms, RemarkFormOfLastTerm) {
  // 1/2 [sum C + I(X1,X2;Y|U) + I(X1;X2|U,V) - I(X1;X2|U)].
  const LinkCaps2 c{0.5, 0.5, 0.1, 0.2};
  const auto p = point(0.6, 0.3, 0.2, 0.7);
  const auto cov = assemble_sigma2(p);
  const double remark = 0.5 * (c.total() + gaussian_mi(cov, {"X1", "X2"}, {"Y"}, {"U"}) +
                               gaussian_mi(cov, {"X1"}, {"X2"}, {"U", "V"}) -
                               gaussian_mi(cov, {"X1"}, {"X2"}, {"U"}));
  EXPECT_NEAR(upper_bound1_terms(p, c)[5], remark, 1e-9);
}

TEST(Nstar, IndependentGivenUGivesNearZeroObjective) {
  const auto p = point(0.09, 0.3, 0.3);
  EXPECT_LE(nstar_objective(p, nstar(p)), 1e-6);
}

TEST(Nstar, MatchesDenseScan) {
  const auto p = point(0.8, 0.3, 0.3);
  double best_n = 0.0, best_v = nstar_objective(p, 0.0);
  for (int i = 1; i <= 100000; ++i) {
    const double n = 100.0 * i / 100000.0;
    const double v = nstar_objective(p, n);
    if (v < best_v) {
      best_v = v;
      best_n = n;
    }
  }
  EXPECT_NEAR(nstar(p), best_n, 1e-4);
}

TEST(Nstar, NullifyingNoiseWhenPositive) {
  // Positive conditional covariance: some N makes X1, X2 independent given (U, V).
  const auto p = point(0.3, 0.0, 0.0);
  const double n = nstar(p);
  EXPECT_NEAR(nstar_objective(p, n), 0.0, 1e-9);
}

TEST(Nstar, InvalidParameters) { EXPECT_THROW(nstar(point(0, 0.9, 0.9)), DomainError); }

TEST(UpperBound2LastTerm, ZeroCapsZeroCorrelation) {
  EXPECT_NEAR(upper_bound2_last_term_closed_form(point(0, 0, 0), {0, 0, 0, 0}), 0.5, 1e-12);
}

TEST(UpperBound2LastTerm, ZeroNoiseSubstitution) {
  const LinkCaps2 c{0.6, 0.4, 0.3, 0.2};
  const auto p = point(0.5, 0.4, 0.3);
  const double f = phi_k(p, 1, p.p2) * phi_k(p, 2, p.p1) / ((1 - 0.16) * (1 - 0.09));
  EXPECT_NEAR(upper_bound2_last_term_closed_form(p, c), 0.5 * c.total() + 0.25 * std::log2(f), 1e-12);
}

TEST(UpperBound2LastTerm, MatchesBisection) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int n = 0;
  while (n < 1000) {
    const auto p = point(u(rng), u(rng), u(rng), 10.0 * u(rng), 0.1 + 3 * u(rng), 0.1 + 3 * u(rng));
    if (p.det_corr() < 1e-6) continue;
    const LinkCaps2 c{2 * u(rng), 2 * u(rng), u(rng), u(rng)};
    EXPECT_NEAR(upper_bound2_last_term_closed_form(p, c), bisect_last_term(p, c), 1e-9);
    ++n;
  }
}

TEST(CutSet2, Cases) {
  EXPECT_NEAR(cut_set2({100, 100, 100, 100}, 1, 1), kHalfLog5, 1e-12);
  EXPECT_EQ(cut_set2({0, 0, 0, 0}, 1, 1), 0.0);
  EXPECT_NEAR(cut_set2({0.5, 0.5, 0, 0}, 1, 1), 1.0, 1e-12);
  EXPECT_THROW(cut_set2({-1, 0, 0, 0}, 1, 1), DomainError);
}

TEST(UpperBound1, ZeroFronthaul) { EXPECT_EQ(upper_bound1({0, 0, 0.4, 0.7}, coarse()).value_bits, 0.0); }

TEST(UpperBound2, ZeroCaps) { EXPECT_EQ(upper_bound2({0, 0, 0, 0}, coarse()).value_bits, 0.0); }

TEST(Bounds2, SaturationLimit) {
  const auto b = bounds2({10, 10, 10, 10}, 1, 1);
  EXPECT_NEAR(b.lower.value_bits, kHalfLog5, 1e-3);
  EXPECT_NEAR(b.upper1.value_bits, kHalfLog5, 1e-3);
  EXPECT_NEAR(b.upper2.value_bits, kHalfLog5, 1e-3);
  EXPECT_NEAR(b.cutset, kHalfLog5, 1e-12);
}

TEST(Bounds2, OrderingAndSelfConsistency) {
  const LinkCaps2 c{1, 1, 0.25, 0.25};
  const auto b = bounds2(c, 1, 1, coarse());
  EXPECT_LE(b.lower.value_bits, b.upper1.value_bits + 1e-6);
  EXPECT_LE(b.lower.value_bits, b.upper2.value_bits + 1e-6);
  EXPECT_LE(b.upper1.value_bits, b.cutset + 1e-9);
  EXPECT_LE(b.upper2.value_bits, b.cutset + 1e-9);
  // Binding term re-evaluates to the reported value at the reported maximizer.
  for (const auto* r : {&b.upper1, &b.upper2, &b.lower}) {
    EXPECT_NEAR(r->terms[r->binding_index], r->value_bits, 1e-9);
    EXPECT_EQ(r->binding_label, r->term_labels[r->binding_index]);
  }
  auto p = point(b.upper2.argmax_params[0], b.upper2.argmax_params[1], b.upper2.argmax_params[2]);
  p.n_aux = b.upper2.argmin_n;
  const double last = upper_bound2_last_term_closed_form(p, c);
  const auto t = upper_bound1_terms(p, c);
  EXPECT_NEAR(std::min({t[0], t[1], t[2], t[3], t[4], last}), b.upper2.value_bits, 1e-9);
}

TEST(Bounds2, UpperAboveLowerAsymmetric) {
  const LinkCaps2 c{0.5, 0.5, 0, 0};
  const auto lo = lower_bound2_opt(c, 1, 1, coarse());
  const auto up = upper_bound1(c, coarse());
  EXPECT_GE(up.value_bits, lo.value_bits - 1e-6);
}

TEST(Bounds2, OptimizerNeverBelowGrid) {
  // A grid point evaluated directly never exceeds the optimized lower bound.
  const LinkCaps2 c{0.8, 0.6, 0.3, 0.1};
  const auto opt = lower_bound2_opt(c, 1, 1, coarse());
  for (double rho : {0.0, 0.5, 1.0})
    for (double r : {0.0, 0.3, 0.6}) {
      const auto p = point(rho, r, r);
      if (!is_feasible(p)) continue;
      EXPECT_LE(lower_bound2(p, c).value_bits, opt.value_bits + 1e-9);
    }
}

TEST(Bounds2, DeterministicRepeat) {
  const LinkCaps2 c{0.9, 0.7, 0.2, 0.4};
  const auto a = bounds2(c, 1, 1, coarse());
  const auto b = bounds2(c, 1, 1, coarse());
  EXPECT_EQ(a.lower.value_bits, b.lower.value_bits);
  EXPECT_EQ(a.upper1.value_bits, b.upper1.value_bits);
  EXPECT_EQ(a.upper2.value_bits, b.upper2.value_bits);
}

TEST(Errors, NegativeCapacity) {
  EXPECT_THROW(lower_bound2(point(0, 0, 0), {-0.1, 0, 0, 0}), DomainError);
  EXPECT_THROW(upper_bound1({0, 0, -1, 0}), DomainError);
}
