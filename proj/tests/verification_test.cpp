#include "pontrol/verification.hpp"

#include <gtest/gtest.h>

#include <vector>

#include "pontrol/errors.hpp"
#include "pontrol/solvers.hpp"

namespace pontrol {
namespace {

StateTrajectory reference_path(ModelKind kind, double r0, double horizon) {
  return integrate_forward(kind, reference_params(r0), reference_initial_state(),
                           TimeGrid(horizon, 5000));
}

TEST(Lemma1Test, PassesOnReferenceTrajectories) {
  for (auto kind : {ModelKind::Model1, ModelKind::Model2}) {
    for (double r0 : {3.0, 6.0}) {
      for (double T : {15.0, 30.0, 60.0, 120.0}) {
        const auto r = probe_lemma1(reference_path(kind, r0, T));
        EXPECT_TRUE(r.pass) << r.detail;
        EXPECT_EQ(r.trials, 5001u);
      }
    }
  }
}

TEST(Lemma1Test, InjectedDefectIsCounted) {
  auto traj = reference_path(ModelKind::Model1, 3.0, 15.0);
  traj.states[5].e = -0.01;
  const auto r = probe_lemma1(traj);
  EXPECT_FALSE(r.pass);
  EXPECT_EQ(r.violations, 1u);
  EXPECT_NE(r.detail.find("node 5"), std::string::npos);
}

TEST(Lemma1Test, RisingPopulationIsCounted) {
  auto traj = reference_path(ModelKind::Model2, 3.0, 15.0);
  traj.states[100].n += 1e-6;
  traj.states[100].r += 1e-6;
  EXPECT_EQ(probe_lemma1(traj).violations, 1u);
}

TEST(Lemma1Test, DiseaseFreeIsExact) {
  const NormalizedState x{1.0, 0.0, 0.0, 0.0, 0.0, 1.0};
  const auto traj = integrate_forward(ModelKind::Model1, reference_params(3.0),
                                      x, TimeGrid(10.0, 100));
  const auto r = probe_lemma1(traj);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.worst_residual, 0.0);
}

TEST(Lemma3Test, SyntheticCoefficients) {
  const ControlBounds b{0.9};
  const std::vector<HamiltonianCoeffs> ok{{-0.1, -0.2, 0.0}};
  const auto pass = probe_lemma3(ok, b);
  EXPECT_TRUE(pass.pass);
  EXPECT_FALSE(pass.vacuous);
  EXPECT_EQ(pass.trials, 1u);
  const std::vector<HamiltonianCoeffs> bad{{-0.1, -0.06, 0.0}};  // lambda 0.3
  const auto fail = probe_lemma3(bad, b);
  EXPECT_FALSE(fail.pass);
  EXPECT_EQ(fail.violations, 1u);
  const std::vector<HamiltonianCoeffs> none{{0.1, 0.5, 0.0}};
  const auto vac = probe_lemma3(none, b);
  EXPECT_TRUE(vac.pass);
  EXPECT_TRUE(vac.vacuous);
}

TEST(Lemma3Test, HoldsAlongOcp1Solution) {
  const auto report =
      solve_fbsm(OcpProblem::reference(ModelKind::Model1, 3.0, 30.0));
  ASSERT_TRUE(report.converged);
  const auto r = probe_lemma3(report);
  EXPECT_TRUE(r.pass);
  EXPECT_THROW(probe_lemma3(solve_fbsm(OcpProblem::reference(
                   ModelKind::Model2, 3.0, 15.0, 500))),
               InvalidInput);
}

TEST(TerminalControlTest, Cases) {
  const TimeGrid g(1.0, 4);
  EXPECT_TRUE(probe_terminal_control(ControlTrajectory(g, {0, 0, 0, 0, 0.2}),
                                     ObjectiveWeights{})
                  .pass);
  EXPECT_FALSE(probe_terminal_control(ControlTrajectory(g, {0.5, 0.5, 0.5, 0.5, 0}),
                                      ObjectiveWeights{})
                   .pass);
  const auto vac = probe_terminal_control(ControlTrajectory::constant(g, 0.0),
                                          ObjectiveWeights{0.0, 1.0, 1e-4});
  EXPECT_TRUE(vac.pass);
  EXPECT_TRUE(vac.vacuous);
}

TEST(ConvexityTest, MidpointEdgeCases) {
  EXPECT_EQ(convexity_midpoint(0.02, 0.001, 0.4, 0.4, 0.3), 0.4);
  EXPECT_EQ(convexity_midpoint(0.02, 0.001, 0.4, 0.7, 1.0), 0.4);
  EXPECT_EQ(convexity_midpoint(0.02, 0.001, 0.4, 0.7, 0.0), 0.7);
  const double w = convexity_midpoint(0.0, 0.5, 0.2, 0.6, 0.5);
  EXPECT_DOUBLE_EQ(w, 0.4);  // f linear: the root is the plain mix
  EXPECT_THROW(convexity_midpoint(0.0, 0.0, 0.2, 0.6, 0.5), InvalidInput);
}

TEST(ConvexityTest, MidpointSolvesQuadratic) {
  const double M = 0.03, L = 0.004, a = 0.15, b = 0.95, lam = 0.37;
  const double w = convexity_midpoint(M, L, a, b, lam);
  const double f = [&](double x) { return M * x * x + L * x; }(w);
  EXPECT_NEAR(f, lam * (M * a * a + L * a) + (1 - lam) * (M * b * b + L * b),
              1e-16);
  EXPECT_GE(w, lam * a + (1 - lam) * b);
}

TEST(ConvexityTest, SeededTrials) {
  const auto r = probe_convexity();
  EXPECT_EQ(r.trials, 10000u);
  EXPECT_EQ(r.violations, 0u);
  EXPECT_TRUE(r.pass);
  const auto again = probe_convexity();
  EXPECT_EQ(again.worst_residual, r.worst_residual);
  ConvexityProbeConfig six;
  const auto p = reference_params(6.0);
  six.beta1 = p.beta1;
  six.beta2 = p.beta2;
  six.seed = 99;
  EXPECT_TRUE(probe_convexity(six).pass);
}

TEST(GradientProbeTest, BothModelsPass) {
  for (auto kind : {ModelKind::Model1, ModelKind::Model2}) {
    const auto problem = OcpProblem::reference(kind, 3.0, 15.0);
    const auto r =
        probe_gradient(problem, ControlTrajectory::constant(problem.grid, 0.4));
    EXPECT_EQ(r.trials, 20u);
    EXPECT_TRUE(r.pass) << r.worst_residual;
  }
}

TEST(GradientProbeTest, ControlCostOnly) {
  auto problem = OcpProblem::reference(ModelKind::Model1, 3.0, 15.0, 500);
  problem.weights = ObjectiveWeights{0.0, 0.0, 5e-5};
  const auto u = ControlTrajectory::constant(problem.grid, 0.4);
  const Sweep sweep = sweep_once(problem, u);
  for (double g : objective_gradient(problem, u, sweep.states, sweep.costates)) {
    EXPECT_DOUBLE_EQ(g, problem.weights.alpha3 * 0.4);
  }
  EXPECT_TRUE(probe_gradient(problem, u).pass);
}

TEST(GradientProbeTest, Deterministic) {
  const auto problem = OcpProblem::reference(ModelKind::Model2, 6.0, 30.0, 1000);
  const auto u = ControlTrajectory::constant(problem.grid, 0.25);
  EXPECT_EQ(probe_gradient(problem, u).worst_residual,
            probe_gradient(problem, u).worst_residual);
  EXPECT_THROW(probe_gradient(problem, ControlTrajectory::constant(problem.grid, 0.0)),
               InvalidInput);
}

TEST(ContinuityProbeTest, DetectsJumpThatDoesNotShrink) {
  const TimeGrid coarse(1.0, 4), fine(1.0, 8);
  const ControlTrajectory step_c(coarse, {0.8, 0.8, 0.1, 0.1, 0.1});
  const ControlTrajectory step_f(fine, {0.8, 0.8, 0.8, 0.8, 0.1, 0.1, 0.1, 0.1, 0.1});
  EXPECT_FALSE(probe_continuity(step_f, step_c).pass);
  EXPECT_TRUE(probe_continuity(step_c.resampled(TimeGrid(1.0, 8)), step_c).pass);
  EXPECT_THROW(probe_continuity(step_c, step_f), InvalidInput);
}

}  // namespace
}  // namespace pontrol
