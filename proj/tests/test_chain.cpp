#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "sqglab/chain.hpp"

using namespace sqglab;

TEST(Chain, ExponentsAtReferenceAlphas) {
  const Exponents e9 = select_exponents(0.9, 2);
  EXPECT_DOUBLE_EQ(e9.beta, 0.5);
  EXPECT_DOUBLE_EQ(e9.q, 32.0);
  EXPECT_DOUBLE_EQ(e9.p, 32.0 / 31.0);
  const Exponents e7 = select_exponents(0.7, 2);
  EXPECT_DOUBLE_EQ(e7.beta, 0.5);
  EXPECT_DOUBLE_EQ(e7.q, 64.0);
}

class ChainAlphas : public ::testing::TestWithParam<double> {};

TEST_P(ChainAlphas, ExponentMarginsHold) {
  const double alpha = GetParam();
  const Exponents e = select_exponents(alpha, 2);
  EXPECT_GE(e.beta - (1.0 - alpha), 0.05 - 1e-12);
  EXPECT_GE(e.beta + alpha - 2.0 / e.q - 1.0, 0.05 - 1e-12);
  EXPECT_LE(2.0 / e.q, (e.beta + alpha - 1.0) / 4.0 + 1e-15);
  EXPECT_NEAR(1.0 / e.p + 1.0 / e.q, 1.0, 1e-15);
  const ParameterChain ch = build_chain(alpha, 2, 1.0, KernelConstants{});
  EXPECT_TRUE(verify_chain(ch, KernelConstants{}).all_positive());
}

INSTANTIATE_TEST_SUITE_P(Alphas, ChainAlphas, ::testing::Values(0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99));

TEST(Chain, SmallAlphaHasNoAdmissibleExponent) {
  EXPECT_THROW(select_exponents(0.1, 2), std::domain_error);
  EXPECT_THROW(select_exponents(1.0, 2), std::invalid_argument);
  EXPECT_THROW(select_exponents(0.0, 2), std::invalid_argument);
  EXPECT_THROW(select_exponents(0.5, 0), std::invalid_argument);
}

TEST(Chain, AIsSmallestSafeInteger) {
  const KernelConstants k;
  const double p = 32.0 / 31.0;
  EXPECT_DOUBLE_EQ(solve_A(k, p), 5.0);
  EXPECT_DOUBLE_EQ(solve_A(k, p), std::ceil(1.05 * std::pow(4.0, p)));
  const double A = solve_A(k, p);
  EXPECT_GT(1.0 - 2.0 * std::pow(A, -1.0 / p), 0.5);
}

TEST(Chain, DeltaClosedForm) {
  const KernelConstants k;
  // f = 1 / (1 + 2 / (0.5 * 32)) = 8/9; min(0.5 ln 2, (8/9) ln 2, 8/9) = 0.5 ln 2.
  EXPECT_NEAR(delta_bound(0.5, 32.0, 2, k), 0.5 * std::numbers::ln2, 1e-15);
  EXPECT_NEAR(solve_delta(0.5, 32.0, 2, k), 0.99 * 0.5 * std::numbers::ln2, 1e-15);
  KernelConstants slow = k;
  slow.c = 0.1;
  EXPECT_NEAR(delta_bound(0.5, 32.0, 2, slow), 0.1 * 8.0 / 9.0, 1e-15);
}

TEST(Chain, R0SolvesItsEquation) {
  const KernelConstants k;
  const double alpha = 0.9, beta = 0.5, p = 32.0 / 31.0, q = 32.0, A = 5.0;
  const double delta = solve_delta(beta, q, 2, k);
  const double r0 = solve_r0(alpha, beta, p, q, 2, A, delta, k);
  const double e = beta - 2.0 / q - 1.0 + alpha;
  EXPECT_NEAR(k.C_q * std::pow(A, 1.0 / p) * std::pow(r0, e), delta * (1.0 / beta - 1.0), 1e-14);
  EXPECT_THROW(solve_r0(0.4, 0.5, p, q, 2, A, delta, k), std::domain_error);
  KernelConstants tiny = k;
  tiny.C_q = 1e-9;
  EXPECT_DOUBLE_EQ(solve_r0(alpha, beta, p, q, 2, A, delta, tiny), 1.0);
}

TEST(Chain, T0FormulaAndReferenceValues) {
  const ParameterChain ch = build_chain(0.9, 2, 1.0, KernelConstants{});
  EXPECT_DOUBLE_EQ(ch.A, 5.0);
  EXPECT_NEAR(ch.delta, 0.3431, 1e-4);
  const double emb = std::pow(2.0 * std::numbers::pi, 2.0 / ch.q);
  const double T0 = ch.q * std::log(emb * std::pow(ch.A, 1.0 / ch.p) * std::pow(ch.r0, -(ch.beta + 2.0 / ch.q)));
  EXPECT_NEAR(ch.T0, T0, 1e-10 * T0);
  EXPECT_NEAR(ch.T0, 193.95, 0.01);
  EXPECT_EQ(compute_T0(0.0, 0.5, 2.0, 2.0, 2, 5.0, 0.1), 0.0);
}

TEST(Chain, PartialSumsIncreaseToT) {
  const ParameterChain ch = build_chain(0.9, 2, 1.0, KernelConstants{});
  const double tail = ch.beta * std::pow(ch.r0, ch.alpha) / (1.0 - std::exp(-ch.delta * ch.alpha));
  EXPECT_NEAR(ch.T, ch.T0 + tail, 1e-12 * ch.T);
  ASSERT_EQ(ch.T_k.size(), 20u);
  EXPECT_DOUBLE_EQ(ch.T_k[0], ch.T0);
  for (std::size_t k = 1; k < ch.T_k.size(); ++k) EXPECT_GT(ch.T_k[k], ch.T_k[k - 1]);
  EXPECT_LT(ch.T_k.back(), ch.T);
}

TEST(Chain, TimeGrowsWithInitialSize) {
  const KernelConstants k;
  const ParameterChain a = build_chain(0.9, 2, 1.0, k), b = build_chain(0.9, 2, 10.0, k);
  EXPECT_NEAR(b.T - a.T, a.q * std::log(10.0), 1e-9 * b.T);
  EXPECT_EQ(build_chain(0.9, 2, 0.0, k).T0, 0.0);
}

TEST(Chain, ThetaSupElasticityIsQOverT) {
  const KernelConstants k;
  const ParameterChain ch = build_chain(0.9, 2, 1.0, k);
  const auto sens = chain_sensitivities(0.9, 2, 1.0, k);
  ASSERT_EQ(sens.size(), 4u);
  EXPECT_EQ(sens[0].name, "C");
  EXPECT_EQ(sens[3].name, "theta_sup");
  EXPECT_NEAR(sens[3].dlogT_dlogx, ch.q / ch.T, 1e-4 * ch.q / ch.T);
  // A is an integer ceiling: a 1% change in C does not move it here.
  EXPECT_EQ(sens[0].dlogT_dlogx, 0.0);
}

TEST(Chain, VerifyFlagsViolations) {
  const KernelConstants k;
  ParameterChain ch = build_chain(0.9, 2, 1.0, k);
  EXPECT_TRUE(verify_chain(ch, k).all_positive());
  ParameterChain bad = ch;
  bad.A = 2.0;
  EXPECT_FALSE(verify_chain(bad, k).all_positive());
  bad = ch;
  bad.delta = 1.01 * delta_bound(ch.beta, ch.q, 2, k);
  EXPECT_LT(verify_chain(bad, k).delta, 0.0);
  bad = ch;
  bad.r0 = ch.r0 / 0.99 * 1.01;
  EXPECT_LT(verify_chain(bad, k).r0, 0.0);
}

TEST(Chain, RejectsNonpositiveConstants) {
  KernelConstants k;
  k.C_q = 0.0;
  EXPECT_THROW(build_chain(0.9, 2, 1.0, k), std::invalid_argument);
  KernelConstants kc;
  kc.C = -1.0;
  EXPECT_THROW(solve_A(kc, 2.0), std::invalid_argument);
}
