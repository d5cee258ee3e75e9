#include "pontrol/model.hpp"

#include <gtest/gtest.h>

#include <random>

#include "pontrol/errors.hpp"

namespace pontrol {
namespace {

EpidemicParams hand_params() {
  EpidemicParams p;
  p.beta1 = 0.2;
  p.beta2 = 0.02;
  return p;
}

NormalizedState hand_state() { return {0.5, 0.1, 0.2, 0.1, 0.1, 1.0}; }

TEST(NormalizeTest, ReferencePopulation) {
  const auto out = normalize(reference_population());
  EXPECT_NEAR(out.state.s, 0.99985, 1e-15);
  EXPECT_NEAR(out.state.e, 5.0e-5, 1e-18);
  EXPECT_NEAR(out.state.i, 8.0e-5, 1e-18);
  EXPECT_NEAR(out.state.j, 2.0e-5, 1e-18);
  EXPECT_EQ(out.state.r, 0.0);
  EXPECT_EQ(out.state.n, 1.0);
  EXPECT_EQ(out.state, reference_initial_state());
}

TEST(NormalizeTest, FullySusceptible) {
  RawPopulation raw{.S = 100, .E = 0, .I = 0, .J = 0, .R = 0, .N = 100};
  const auto out = normalize(raw);
  EXPECT_EQ(out.state, (NormalizedState{1.0, 0.0, 0.0, 0.0, 0.0, 1.0}));
}

TEST(NormalizeTest, RatesScaleWithPopulation) {
  RawPopulation raw = reference_population();
  raw.beta1_tilde = 2.5e-8;
  raw.beta2_tilde = 2.5e-9;
  const auto out = normalize(raw);
  EXPECT_NEAR(out.rates.beta1, 0.25, 1e-15);
  EXPECT_NEAR(out.rates.beta2, 0.025, 1e-15);
}

TEST(NormalizeTest, PreservesSumIdentity) {
  RawPopulation raw{.S = 7e5, .E = 1e4, .I = 2.5e4, .J = 5e3, .R = 2.6e5,
                    .N = 1e6};
  const auto out = normalize(raw);
  EXPECT_NEAR(out.state.conservation_residual(), 0.0, 1e-15);
}

TEST(NormalizeTest, RejectsBadCounts) {
  RawPopulation raw = reference_population();
  raw.N = 0.0;
  EXPECT_THROW(normalize(raw), InvalidInput);
  raw.N = -5.0;
  EXPECT_THROW(normalize(raw), InvalidInput);
  raw = reference_population();
  raw.S += 100.0;  // counts no longer add up to N
  EXPECT_THROW(normalize(raw), InvalidInput);
  raw = reference_population();
  raw.E = -1.0;
  raw.S += 501.0;
  EXPECT_THROW(normalize(raw), InvalidInput);
}

TEST(ParamsTest, Validation) {
  EXPECT_NO_THROW(hand_params().validate());
  EpidemicParams p = hand_params();
  p.sigma2 = 0.3;
  EXPECT_THROW(p.validate(), InvalidInput);
  p = hand_params();
  p.q = 1.5;
  EXPECT_THROW(p.validate(), InvalidInput);
  p = hand_params();
  p.gamma = -0.1;
  EXPECT_THROW(p.validate(), InvalidInput);
  p = hand_params();
  p.beta2 = 0.3;
  EXPECT_THROW(p.validate(), InvalidInput);
}

TEST(BoundsTest, Validation) {
  EXPECT_NO_THROW(ControlBounds{0.9}.validate());
  EXPECT_THROW(ControlBounds{0.0}.validate(), InvalidInput);
  EXPECT_THROW(ControlBounds{1.0}.validate(), InvalidInput);
  EXPECT_EQ(ControlBounds{0.9}.clamp(1.2), 0.9);
  EXPECT_EQ(ControlBounds{0.9}.clamp(-0.2), 0.0);
  EXPECT_THROW((ObjectiveWeights{1.0, 1.0, 0.0}.validate()), InvalidInput);
  EXPECT_THROW((ObjectiveWeights{-1.0, 1.0, 1.0}.validate()), InvalidInput);
}

TEST(RhsTest, HandEvaluationModel1) {
  const auto d = rhs_uncontrolled(ModelKind::Model1, hand_state(), hand_params());
  EXPECT_NEAR(d.s, -0.021, 1e-15);
  EXPECT_NEAR(d.e, 0.003, 1e-15);
  EXPECT_NEAR(d.i, 0.8 * 0.18 * 0.1 - 0.2 / 14.0, 1e-15);
  EXPECT_NEAR(d.i, 0.000114285714285714, 1e-15);
  EXPECT_NEAR(d.j, 0.0036 - 0.1 / 21.0, 1e-15);
  EXPECT_NEAR(d.j, -0.00116190476190476, 1e-15);
  EXPECT_NEAR(d.r, 0.2 / 14.0 + 0.85 * 0.1 / 21.0, 1e-15);
  EXPECT_NEAR(d.n, -0.15 * 0.1 / 21.0, 1e-15);
}

TEST(RhsTest, ControlledHandEvaluation) {
  const auto d =
      rhs_controlled(ModelKind::Model1, hand_state(), 0.5, hand_params());
  EXPECT_NEAR(d.s, -0.5 * (0.2 * 0.25 * 0.2 + 0.02 * 0.5 * 0.1), 1e-15);
  EXPECT_NEAR(d.s, -0.0055, 1e-15);
}

TEST(RhsTest, DiseaseFreeEquilibrium) {
  const NormalizedState x{0.7, 0.0, 0.0, 0.0, 0.3, 1.0};
  for (auto kind : {ModelKind::Model1, ModelKind::Model2}) {
    EXPECT_EQ(rhs_uncontrolled(kind, x, hand_params()), NormalizedState{});
    EXPECT_EQ(rhs_controlled(kind, x, 0.4, hand_params()), NormalizedState{});
  }
}

TEST(RhsTest, Model2ReducesToModel1AtUnitPopulation) {
  const auto a = rhs_uncontrolled(ModelKind::Model1, hand_state(), hand_params());
  const auto b = rhs_uncontrolled(ModelKind::Model2, hand_state(), hand_params());
  EXPECT_EQ(a, b);
}

TEST(RhsTest, ZeroControlMatchesUncontrolled) {
  for (auto kind : {ModelKind::Model1, ModelKind::Model2}) {
    EXPECT_EQ(rhs_controlled(kind, hand_state(), 0.0, hand_params()),
              rhs_uncontrolled(kind, hand_state(), hand_params()));
  }
}

TEST(RhsTest, FullQuarantineLimitStopsModel1Infection) {
  const double u = 1.0 - 1e-9;
  const auto d = rhs_controlled(ModelKind::Model1, hand_state(), u, hand_params());
  EXPECT_NEAR(d.s, 0.0, 1e-10);
}

TEST(RhsTest, Model2StandardIncidence) {
  NormalizedState x{0.4, 0.1, 0.2, 0.1, 0.1, 0.9};
  const auto d = rhs_controlled(ModelKind::Model2, x, 0.5, hand_params());
  EXPECT_NEAR(d.s, -0.4 * (0.2 * 0.5 * 0.2 + 0.02 * 0.1) / 0.9, 1e-15);
}

TEST(RhsTest, Errors) {
  EXPECT_THROW(rhs_controlled(ModelKind::Model1, hand_state(), 1.0, hand_params()),
               InvalidControl);
  EXPECT_THROW(rhs_controlled(ModelKind::Model1, hand_state(), -0.1, hand_params()),
               InvalidControl);
  NormalizedState x = hand_state();
  x.n = 0.0;
  EXPECT_THROW(rhs_uncontrolled(ModelKind::Model2, x, hand_params()),
               SingularityError);
  EXPECT_NO_THROW(rhs_uncontrolled(ModelKind::Model1, x, hand_params()));
}

TEST(RhsTest, DerivativesConserveTotal) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto p = reference_params(6.0);
  for (int t = 0; t < 1000; ++t) {
    NormalizedState x{unit(rng), unit(rng), unit(rng), unit(rng), unit(rng), 0.0};
    x.n = x.s + x.e + x.i + x.j + x.r;
    const double u = 0.999 * unit(rng);
    for (auto kind : {ModelKind::Model1, ModelKind::Model2}) {
      const auto d = rhs_controlled(kind, x, u, p);
      EXPECT_NEAR(d.s + d.e + d.i + d.j + d.r, d.n, 1e-12);
      EXPECT_LE(d.s, 0.0);
    }
  }
}

TEST(ReproductionTest, ReferenceBasicRatios) {
  EpidemicParams p;
  p.beta1 = 0.258176;
  p.beta2 = 0.025818;
  EXPECT_NEAR(r0_basic(p), 3.0, 1e-4);
  p.beta1 = 0.516351;
  p.beta2 = 0.051635;
  EXPECT_NEAR(r0_basic(p), 6.0, 1e-4);
  p.beta1 = p.beta2 = 0.0;
  EXPECT_EQ(r0_basic(p), 0.0);
}

TEST(ReproductionTest, ZeroRemovalRateIsRejected) {
  EpidemicParams p = hand_params();
  p.rho1 = 0.0;
  EXPECT_THROW(r0_basic(p), InvalidInput);
}

TEST(ReproductionTest, ReferenceInversions) {
  const EpidemicParams p;
  const struct {
    double r0, beta1, beta2;
  } table[] = {{2.5, 0.215146, 0.021515},
               {3.0, 0.258176, 0.025818},
               {4.0, 0.344234, 0.034423},
               {6.0, 0.516351, 0.051635}};
  for (const auto& row : table) {
    const auto b = beta_from_r0(row.r0, p);
    EXPECT_NEAR(b.beta1, row.beta1, 1e-6) << row.r0;
    EXPECT_NEAR(b.beta2, row.beta2, 1e-6) << row.r0;
    EXPECT_NEAR(row.r0 / b.beta1, 11.62, 1e-12);
  }
}

TEST(ReproductionTest, InversionRoundTrip) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dist(1e-6, 10.0);
  for (int t = 0; t < 200; ++t) {
    const double x = dist(rng);
    EXPECT_NEAR(r0_basic(with_r0(EpidemicParams{}, x)), x, 1e-10);
  }
  EXPECT_THROW(beta_from_r0(0.0, EpidemicParams{}), InvalidInput);
  EXPECT_THROW(beta_from_r0(-1.0, EpidemicParams{}), InvalidInput);
}

TEST(ReproductionTest, ControlledRatiosAtUpperBound) {
  const auto p = reference_params(3.0);
  EXPECT_NEAR(r0_controlled(ModelKind::Model1, p, 0.9), 0.154 * p.beta1, 1e-12);
  EXPECT_NEAR(r0_controlled(ModelKind::Model2, p, 0.9), 1.54 * p.beta1, 1e-12);
  for (auto kind : {ModelKind::Model1, ModelKind::Model2}) {
    EXPECT_DOUBLE_EQ(r0_controlled(kind, p, 0.0), r0_basic(p));
  }
}

TEST(ReproductionTest, ControlledRatioDecreasesInControl) {
  const auto p = reference_params(4.0);
  for (auto kind : {ModelKind::Model1, ModelKind::Model2}) {
    double prev = r0_controlled(kind, p, 0.0);
    for (int k = 1; k < 100; ++k) {
      const double cur = r0_controlled(kind, p, 0.01 * k);
      EXPECT_LT(cur, prev);
      prev = cur;
    }
  }
}

TEST(ModelKindTest, Names) {
  EXPECT_EQ(to_string(ModelKind::Model1), "model1");
  EXPECT_EQ(to_string(ModelKind::Model2), "model2");
}

}  // namespace
}  // namespace pontrol
