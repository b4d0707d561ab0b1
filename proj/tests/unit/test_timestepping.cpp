#include "hdiv/timestepping.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace hdiv;
using namespace hdiv::test;

namespace {

SchemeConfig scheme(Scheme s, double dt, double t_end)
{
   SchemeConfig c;
   c.scheme = s;
   c.dt = dt;
   c.t_end = t_end;
   return c;
}

TimeIntegrator integrator(const CaseSpec& c, std::shared_ptr<const AssembledOperators> ops, const SchemeConfig& cfg)
{
   return TimeIntegrator(std::move(ops), cfg, c.force, c.zero_force, c.steady_force);
}

Eigen::VectorXd advance(const CaseSpec& c, std::shared_ptr<const AssembledOperators> ops, const SchemeConfig& cfg)
{
   TimeIntegrator ti = integrator(c, ops, cfg);
   FieldState s = initial_state(*ops, c.initial);
   for (int i = 0; i < step_count(cfg); ++i) { ti.step(s); }
   return s.u;
}

} // namespace

TEST(Scheme, NamesAndValidation)
{
   EXPECT_EQ(parse_scheme("BE"), Scheme::BackwardEuler);
   EXPECT_EQ(parse_scheme("bdf2-imex"), Scheme::Bdf2);
   EXPECT_EQ(parse_scheme(scheme_name(Scheme::Bdf2)), Scheme::Bdf2);
   EXPECT_THROW(parse_scheme("rk4"), std::invalid_argument);
   SchemeConfig c = scheme(Scheme::BackwardEuler, -1e-3, 1.0);
   EXPECT_THROW(validate(c), std::invalid_argument);
   c.dt = 1e-3;
   c.t_end = -1.0;
   EXPECT_THROW(validate(c), std::invalid_argument);
   c.t_end = 0.0;
   EXPECT_NO_THROW(validate(c));
   c.solver.restart = 0;
   EXPECT_THROW(validate(c), std::invalid_argument);
}

TEST(Scheme, StepCountLandsOnEndTime)
{
   EXPECT_EQ(step_count(scheme(Scheme::BackwardEuler, 1e-3, 0.1)), 100);
   EXPECT_EQ(step_count(scheme(Scheme::BackwardEuler, 0.3, 1.0)), 4);
   EXPECT_EQ(step_count(scheme(Scheme::BackwardEuler, 0.01, 0.0)), 0);
}

TEST(Step, ZeroStaysZero)
{
   const CaseSpec c = lattice2d(1e-2);
   const auto ops = case_operators(c, {3, 3, 1}, 2);
   for (Scheme sc : {Scheme::BackwardEuler, Scheme::Bdf2})
   {
      TimeIntegrator ti = integrator(c, ops, scheme(sc, 1e-2, 0.03));
      FieldState s = initial_state(*ops, [](double, const Point&) { return Vec3{0, 0, 0}; });
      for (int i = 0; i < 3; ++i) { ti.step(s); }
      EXPECT_EQ(s.u.cwiseAbs().maxCoeff(), 0.0);
      EXPECT_EQ(s.step, 3);
      EXPECT_NEAR(s.t, 0.03, 1e-15);
   }
}

TEST(Step, EnergyIdentityAndDivergencePerStep)
{
   struct Setup { CaseSpec c; std::array<int, 3> n; int k; };
   for (const Setup& s : {Setup{lattice2d(1e-3), {4, 4, 1}, 3}, Setup{lattice3d(1e-2), {2, 2, 2}, 1},
                          Setup{manufactured(1e-2, "taylor_cells", true), {3, 3, 1}, 2}})
   {
      const auto ops = case_operators(s.c, s.n, s.k);
      for (Scheme sc : {Scheme::BackwardEuler, Scheme::Bdf2})
      {
         TimeIntegrator ti = integrator(s.c, ops, scheme(sc, 2e-3, 0.02));
         FieldState st = initial_state(*ops, s.c.initial);
         double ke = 0.5 * st.u.dot(ops->mass * st.u);
         for (int i = 0; i < 10; ++i)
         {
            const StepReport r = ti.step(st);
            EXPECT_LE(r.budget_relative(), 1e-10) << s.c.name << " step " << i;
            EXPECT_LE(r.div_max, 1e-10);
            EXPECT_GE(r.eps_upw, 0.0);
            EXPECT_EQ(r.bootstrap, sc == Scheme::Bdf2 && i == 0);
            const double ke_new = 0.5 * st.u.dot(ops->mass * st.u);
            EXPECT_NEAR(r.dke_dt, (ke_new - ke) / 2e-3, 1e-9 * (1 + std::abs(r.dke_dt)));
            if (s.c.zero_force) { EXPECT_LE(ke_new, ke); }
            ke = ke_new;
         }
      }
   }
}

TEST(Step, IterativeBackendMatchesDirect)
{
   const CaseSpec c = lattice2d(1e-3);
   const auto ops = case_operators(c, {4, 4, 1}, 2);
   SchemeConfig cfg = scheme(Scheme::Bdf2, 5e-3, 0.05);
   const Eigen::VectorXd a = advance(c, ops, cfg);
   cfg.solver.kind = SolverKind::Iterative;
   const Eigen::VectorXd b = advance(c, ops, cfg);
   EXPECT_LE((a - b).norm(), 1e-10 * a.norm());
}

TEST(Step, ReusedFactorizationMatchesFreshOne)
{
   const CaseSpec c = lattice2d(1e-3);
   const auto ops = case_operators(c, {4, 4, 1}, 3);
   SchemeConfig cfg = scheme(Scheme::Bdf2, 1e-2, 0.2);
   const Eigen::VectorXd a = advance(c, ops, cfg);
   cfg.solver.lu_reuse = 8;
   const Eigen::VectorXd b = advance(c, ops, cfg);
   EXPECT_LE((a - b).norm(), 1e-12 * a.norm());
}

TEST(Step, PressureRobustness)
{
   // Forcing f and f + grad psi must give the same velocity.
   CaseSpec base = manufactured(1e-2, "taylor_cells", true);
   CaseSpec shifted = base;
   shifted.force = [f = base.force](double t, const Point& x) {
      Vec3 v = f(t, x);
      v[0] += 2 * kPi * std::cos(2 * kPi * x[0]) * std::cos(2 * kPi * x[1]);
      v[1] -= 2 * kPi * std::sin(2 * kPi * x[0]) * std::sin(2 * kPi * x[1]);
      return v;
   };
   const auto ops = case_operators(base, {4, 4, 1}, 2);
   const SchemeConfig cfg = scheme(Scheme::Bdf2, 1e-2, 0.1);
   TimeIntegrator ta = integrator(base, ops, cfg);
   TimeIntegrator tb = integrator(shifted, ops, cfg);
   FieldState a = initial_state(*ops, base.initial);
   FieldState b = initial_state(*ops, base.initial);
   const Eigen::VectorXd psi = ops->pressure->project(
      [](double, const Point& x) { return std::sin(2 * kPi * x[0]) * std::cos(2 * kPi * x[1]); });
   for (int i = 0; i < 10; ++i)
   {
      ta.step(a);
      tb.step(b);
      EXPECT_LE((a.u - b.u).norm(), 1e-9 * a.u.norm());
      EXPECT_LE((b.p - a.p - psi).norm(), 1e-8 * psi.norm());
   }
}

TEST(Step, TemporalSelfConvergenceOrders)
{
   // Richardson orders from three step sizes on a coarse fixed mesh.
   const CaseSpec c = lattice2d(1e-2);
   const auto ops = case_operators(c, {4, 4, 1}, 2);
   for (Scheme sc : {Scheme::BackwardEuler, Scheme::Bdf2})
   {
      const Eigen::VectorXd u1 = advance(c, ops, scheme(sc, 0.02, 0.4));
      const Eigen::VectorXd u2 = advance(c, ops, scheme(sc, 0.01, 0.4));
      const Eigen::VectorXd u3 = advance(c, ops, scheme(sc, 0.005, 0.4));
      const double order = std::log2(std::sqrt((u1 - u2).dot(ops->mass * (u1 - u2))) /
                                     std::sqrt((u2 - u3).dot(ops->mass * (u2 - u3))));
      EXPECT_GE(order, sc == Scheme::Bdf2 ? 1.8 : 0.9) << scheme_name(sc);
   }
}

TEST(Run, EndTimeZeroGivesOnlyInitialRecord)
{
   const CaseSpec c = lattice2d(1e-2);
   const auto ops = case_operators(c, {2, 2, 1}, 1);
   TimeIntegrator ti = integrator(c, ops, scheme(Scheme::BackwardEuler, 1e-3, 0.0));
   FieldState s = initial_state(*ops, c.initial);
   int records = 0;
   RunObserver obs;
   obs.on_record = [&](const FieldState& st, const StepReport* r) {
      ++records;
      EXPECT_EQ(r, nullptr);
      EXPECT_EQ(st.t, 0.0);
   };
   const RunSummary sum = run(ti, s, {}, obs);
   EXPECT_EQ(records, 1);
   EXPECT_EQ(sum.steps, 0);
}

TEST(Run, ScheduleAndMonotoneDecay)
{
   const CaseSpec c = lattice2d(1e-3);
   const auto ops = case_operators(c, {4, 4, 1}, 2);
   TimeIntegrator ti = integrator(c, ops, scheme(Scheme::BackwardEuler, 1e-2, 0.25));
   FieldState s = initial_state(*ops, c.initial);
   std::vector<double> times, ke;
   int snaps = 0;
   RunObserver obs;
   obs.on_record = [&](const FieldState& st, const StepReport*) {
      times.push_back(st.t);
      ke.push_back(0.5 * st.u.dot(ops->mass * st.u));
   };
   obs.on_snapshot = [&](const FieldState&) { ++snaps; };
   const RunSummary sum = run(ti, s, RunSchedule{.record_every = 10, .snapshot_every = 20}, obs);
   EXPECT_EQ(sum.steps, 25);
   ASSERT_EQ(times.size(), 4u);  // 0, 10, 20, 25
   EXPECT_NEAR(times.back(), 0.25, 1e-14);
   EXPECT_EQ(snaps, 3);          // 0, 20, 25
   for (std::size_t i = 1; i < ke.size(); ++i) { EXPECT_LT(ke[i], ke[i - 1]); }
   EXPECT_LE(sum.max_div, 1e-10);
   EXPECT_LE(sum.max_budget_relative, 1e-10);
}

TEST(Run, Deterministic)
{
   const CaseSpec c = lattice3d(1e-2);
   const auto ops = case_operators(c, {2, 2, 2}, 1);
   const SchemeConfig cfg = scheme(Scheme::Bdf2, 1e-2, 0.05);
   const Eigen::VectorXd a = advance(c, ops, cfg);
   const Eigen::VectorXd b = advance(c, ops, cfg);
   EXPECT_EQ(a, b);
}

TEST(Run, RejectsBadSchedule)
{
   const CaseSpec c = lattice2d(1e-2);
   const auto ops = case_operators(c, {2, 2, 1}, 1);
   TimeIntegrator ti = integrator(c, ops, scheme(Scheme::BackwardEuler, 1e-3, 0.0));
   FieldState s = initial_state(*ops, c.initial);
   EXPECT_THROW(run(ti, s, RunSchedule{.record_every = 0}, {}), std::invalid_argument);
}
