#include "hdiv/diagnostics.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace hdiv;
using namespace hdiv::test;

namespace {

FieldState state_of(const Eigen::VectorXd& u, double t = 0.0)
{
   FieldState s;
   s.u = u;
   s.t = t;
   return s;
}

// Closed-form Q of the 3D lattice initial field from its analytic gradient.
double lattice3d_q(const Point& x)
{
   const double w = 2 * kPi;
   const double sx = std::sin(w * x[0]), cx = std::cos(w * x[0]);
   const double sy = std::sin(w * x[1]), cy = std::cos(w * x[1]);
   const double r = std::sqrt(2.0) / w;
   Mat3 g{};
   g[0][0] = w * cx * sy;
   g[0][1] = w * sx * cy;
   g[1][0] = -w * sx * cy;
   g[1][1] = -w * cx * sy;
   g[2][0] = r * w * cx * cy;
   g[2][1] = -r * w * sx * sy;
   // Q = -1/2 tr(G G) for a trace-free gradient.
   double tr = 0.0;
   for (int i = 0; i < 3; ++i)
      for (int a = 0; a < 3; ++a) { tr += g[i][a] * g[a][i]; }
   return -0.5 * tr;
}

} // namespace

TEST(Diagnostics, ZeroFieldGivesZeroObservables)
{
   const CaseSpec c = lattice2d(1e-2);
   const auto ops = case_operators(c, {3, 3, 1}, 2);
   const Diagnostics d(ops, std::nullopt);
   const DiagnosticsRecord r = d.record(state_of(Eigen::VectorXd::Zero(ops->num_velocity())), nullptr);
   for (double v : {r.ke, r.enstrophy, r.palinstrophy, r.eps_visc, r.eps_upw, r.dke_dt, r.budget_residual, r.div_max})
   {
      EXPECT_EQ(v, 0.0);
   }
   EXPECT_TRUE(std::isnan(r.err_l2));
   EXPECT_TRUE(std::isnan(r.err_h1));
   EXPECT_FALSE(d.has_exact());
}

TEST(Diagnostics, LatticeInitialEnergyEnstrophyPalinstrophy)
{
   const CaseSpec c = lattice2d(1e-2);
   const auto ops = case_operators(c, {8, 8, 1}, 6);
   const Diagnostics d(ops, c.exact);
   const DiagnosticsRecord r = d.record(initial_state(*ops, c.initial), nullptr);
   EXPECT_NEAR(r.ke, 1.0, 1e-8);
   EXPECT_NEAR(r.enstrophy, 8 * kPi * kPi, 1e-6);
   // grad(omega) = -8 pi^2 (cos a cos b, -sin a sin b): 1/2 * 64 pi^4 * 2
   EXPECT_NEAR(r.palinstrophy / (64 * std::pow(kPi, 4)), 1.0, 1e-3);
   EXPECT_LE(r.err_l2, 1e-6);
   EXPECT_LE(r.div_max, 1e-12);
   EXPECT_GE(r.eps_upw, 0.0);
   EXPECT_NEAR(r.eps_visc, 1e-2 * 2 * 8 * kPi * kPi, 1e-3);
}

TEST(Diagnostics, LatticeEnstrophyConvergesWithOrder)
{
   const CaseSpec c = lattice2d(1e-2);
   double prev = 1.0;
   for (int k : {5, 6, 7})
   {
      const auto v = build_velocity_space(make_case_mesh(c, {16, 16, 1}), k);
      const double e = std::abs(FieldIntegrator(v).vorticity_norms(v->interpolate(c.initial)).enstrophy - 8 * kPi * kPi);
      EXPECT_LT(e, prev) << "k=" << k;
      prev = e;
   }
   EXPECT_LE(prev, 1e-6);
}

TEST(Diagnostics, Lattice3dInitialEnergy)
{
   const CaseSpec c = lattice3d(1e-2);
   const auto v = build_velocity_space(make_case_mesh(c, {4, 4, 4}), 5);
   const FieldIntegrator fi(v);
   EXPECT_NEAR(fi.kinetic_energy(v->interpolate(c.initial)), 0.25 + 1.0 / (16 * kPi * kPi), 1e-8);
}

TEST(Diagnostics, ErrorOfSpaceMemberIsQuadratureNoise)
{
   MeshSpec s = box_spec(2, {3, 3, 1});
   s.bc[0] = AxisBc::Wall;
   const auto v = build_velocity_space(build_cartesian_mesh(s), 4);
   AnalyticField f;
   f.velocity = [](double, const Point& x) { return Vec3{0.0, x[0] * x[0] * (1 - x[0]) * (1 - x[0]), 0.0}; };
   f.gradient = [](double, const Point& x) {
      Mat3 g{};
      g[1][0] = 2 * x[0] * (1 - x[0]) * (1 - 2 * x[0]);
      return g;
   };
   const Eigen::VectorXd u = v->interpolate(f.velocity);
   const ErrorNorms e = error_vs_exact(*v, u, f, 0.0);
   EXPECT_LE(e.l2, 1e-12);
   EXPECT_LE(e.h1, 1e-12);
}

TEST(Diagnostics, ErrorNormsDetectPerturbation)
{
   const CaseSpec c = lattice2d(1e-2);
   const auto v = build_velocity_space(make_case_mesh(c, {4, 4, 1}), 2);
   Eigen::VectorXd u = v->interpolate(c.initial);
   const ErrorNorms e0 = error_vs_exact(*v, u, *c.exact, 0.0);
   // Scaling by (1+eps) adds eps ||u|| = eps sqrt(2) to the L2 error to first order.
   u *= 1.01;
   const ErrorNorms e1 = error_vs_exact(*v, u, *c.exact, 0.0);
   EXPECT_NEAR(e1.l2, 0.01 * std::sqrt(2.0), 2 * e0.l2 + 1e-4);
   EXPECT_GT(e1.h1, e0.h1);
}

TEST(Diagnostics, RecordUsesStepReport)
{
   const CaseSpec c = lattice2d(1e-2);
   const auto ops = case_operators(c, {2, 2, 1}, 1);
   const Diagnostics d(ops, c.exact);
   StepReport rep;
   rep.eps_upw = 0.5;
   rep.dke_dt = -2.0;
   rep.budget_residual = 1e-15;
   rep.div_max = 3e-14;
   const DiagnosticsRecord r = d.record(initial_state(*ops, c.initial), &rep);
   EXPECT_EQ(r.eps_upw, 0.5);
   EXPECT_EQ(r.dke_dt, -2.0);
   EXPECT_EQ(r.budget_residual, 1e-15);
   EXPECT_EQ(r.div_max, 3e-14);
   EXPECT_FALSE(std::isnan(r.err_l2));
}

TEST(Diagnostics, CumulativeDissipationIsTrapezoidal)
{
   std::vector<DiagnosticsRecord> rs(3);
   rs[0].t = 0.0;
   rs[0].eps_visc = 1.0;
   rs[1].t = 0.5;
   rs[1].eps_visc = 2.0;
   rs[1].eps_upw = 1.0;
   rs[2].t = 1.5;
   rs[2].eps_visc = 0.0;
   EXPECT_DOUBLE_EQ(cumulative_dissipation(rs), 0.5 * 0.5 * 4.0 + 0.5 * 1.0 * 3.0);
   EXPECT_EQ(cumulative_dissipation({}), 0.0);
}

TEST(SampleGridTest, CellCentredRowMajor)
{
   SampleGrid g;
   g.dim = 3;
   g.m = {2, 3, 4};
   g.lower = {0.0, -1.0, 0.0};
   g.upper = {1.0, 1.0, 2.0};
   EXPECT_EQ(g.size(), 24);
   const Point p = g.point(0);
   EXPECT_DOUBLE_EQ(p[0], 0.25);
   EXPECT_DOUBLE_EQ(p[1], -1.0 + 1.0 / 3.0);
   EXPECT_DOUBLE_EQ(p[2], 0.25);
   // Last axis fastest: flat 1 advances x3, flat 4 advances x2, flat 12 advances x1.
   EXPECT_DOUBLE_EQ(g.point(1)[2], 0.75);
   EXPECT_DOUBLE_EQ(g.point(4)[1], -1.0 + 1.0);
   EXPECT_DOUBLE_EQ(g.point(12)[0], 0.75);
}

TEST(SampleGridTest, DefaultDensityIsCellsTimesOrderPlusOne)
{
   const auto v = build_velocity_space(box_mesh(3, {2, 3, 4}), 2);
   const SampleGrid g = default_sample_grid(*v);
   EXPECT_EQ(g.m, (std::array<int, 3>{6, 9, 12}));
   EXPECT_EQ(default_sample_grid(*v, 5).m, (std::array<int, 3>{5, 5, 5}));
}

TEST(QCriterion, RotationAndShear)
{
   Mat3 rot{};
   rot[0][1] = -1.0;
   rot[1][0] = 1.0;
   EXPECT_DOUBLE_EQ(q_value(rot), 1.0);
   Mat3 shear{};
   shear[0][1] = 1.0;
   EXPECT_DOUBLE_EQ(q_value(shear), 0.0);
   Mat3 strain{};
   strain[0][0] = 1.0;
   strain[1][1] = -1.0;
   EXPECT_DOUBLE_EQ(q_value(strain), -1.0);
}

TEST(QCriterion, TwoDimensionalStateIsUnsupported)
{
   const auto v = build_velocity_space(box_mesh(2, {2, 2, 1}), 1);
   EXPECT_THROW(q_criterion(*v, Eigen::VectorXd::Zero(v->num_dofs()), default_sample_grid(*v)), std::domain_error);
}

TEST(QCriterion, Lattice3dMatchesClosedForm)
{
   const CaseSpec c = lattice3d(1e-2);
   const auto v = build_velocity_space(make_case_mesh(c, {4, 4, 1}), 7);
   const Eigen::VectorXd u = v->interpolate(c.initial);
   SampleGrid g = default_sample_grid(*v, 6);
   const std::vector<double> q = q_criterion(*v, u, g);
   double err = 0.0, scale = 0.0;
   for (int i = 0; i < g.size(); ++i)
   {
      err = std::max(err, std::abs(q[i] - lattice3d_q(g.point(i))));
      scale = std::max(scale, std::abs(lattice3d_q(g.point(i))));
   }
   EXPECT_LE(err, 1e-5 * scale) << "err " << err << " max |Q| " << scale;
}

TEST(Vorticity, TwoAndThreeDimensions)
{
   FieldJet j;
   j.grad[1][0] = 3.0;
   j.grad[0][1] = 1.0;
   EXPECT_EQ(vorticity(j, 2)[2], 2.0);
   j.grad[2][1] = 5.0;
   j.grad[1][2] = 1.0;
   const Vec3 w = vorticity(j, 3);
   EXPECT_EQ(w[0], 4.0);
   EXPECT_EQ(w[2], 2.0);
}
