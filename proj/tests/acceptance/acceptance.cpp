// Runs the acceptance checks and prints one PASS/FAIL line per criterion.
// Usage: hdiv_acceptance [criterion numbers...]   (default: all)

#include "hdiv/channel_stats.hpp"
#include "hdiv/diagnostics.hpp"
#include "hdiv/spectrum.hpp"
#include "hdiv/timestepping.hpp"

#include "test_support.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace hdiv;
using namespace hdiv::test;

namespace {

struct Outcome
{
   bool pass = true;
   std::ostringstream detail;

   void check(bool ok, const std::string& what)
   {
      if (!ok)
      {
         pass = false;
         detail << " [failed: " << what << "]";
      }
   }
};

std::string sci(double v)
{
   char b[32];
   std::snprintf(b, sizeof(b), "%.3e", v);
   return b;
}

std::shared_ptr<const AssembledOperators> operators(const CaseSpec& c, std::array<int, 3> cells, int k)
{
   return case_operators(c, cells, k);
}

SchemeConfig scheme(Scheme s, double dt, double t_end, SolverKind kind = SolverKind::Direct, int lu_reuse = 20)
{
   SchemeConfig c;
   c.scheme = s;
   c.dt = dt;
   c.t_end = t_end;
   c.solver.kind = kind;
   c.solver.lu_reuse = lu_reuse;
   return c;
}

struct Trajectory
{
   std::vector<DiagnosticsRecord> records;
   std::vector<StepReport> steps;
   std::vector<double> step_t;
   RunSummary summary;
   FieldState final_state;
   double ke0 = 0.0;
};

Trajectory simulate(const CaseSpec& c, std::shared_ptr<const AssembledOperators> ops, const SchemeConfig& cfg,
                    int record_every, bool with_exact = true)
{
   TimeIntegrator ti(ops, cfg, c.force, c.zero_force, c.steady_force);
   const Diagnostics diag(ops, with_exact ? c.exact : std::nullopt);
   FieldState s = initial_state(*ops, c.initial);
   Trajectory tr;
   tr.ke0 = 0.5 * s.u.dot(ops->mass * s.u);
   RunObserver obs;
   obs.on_record = [&](const FieldState& st, const StepReport* r) { tr.records.push_back(diag.record(st, r)); };
   obs.on_step = [&](const FieldState& st, const StepReport& r) {
      tr.steps.push_back(r);
      tr.step_t.push_back(st.t);
   };
   RunSchedule sched;
   sched.record_every = record_every;
   tr.summary = run(ti, s, sched, obs);
   tr.final_state = s;
   return tr;
}

// 1. Pointwise divergence-free velocity on every benchmark configuration.
Outcome c1()
{
   Outcome o;
   struct Run
   {
      std::string label;
      CaseSpec c;
      std::array<int, 3> cells;
      int k;
      double dt;
      int steps;
      SolverKind solver = SolverKind::Direct;
   };
   ChannelOptions ch;
   ch.dim = 3;
   ch.re_tau = 180.0;
   ch.nu = 1.0 / 180.0;
   const std::vector<Run> runs{
      {"lattice2d k=2 N=8", lattice2d(1e-3), {8, 8, 1}, 2, 1e-2, 20},
      {"lattice2d k=4 N=8", lattice2d(1e-3), {8, 8, 1}, 4, 1e-2, 20},
      {"lattice3d k=1 N=4", lattice3d(1e-3), {4, 4, 4}, 1, 1e-2, 20},
      {"tgv3d k=1 N=8", tgv3d(1600.0), {8, 8, 8}, 1, 2e-2, 10, SolverKind::Iterative},
      {"channel laminar k=2", channel(ch), {2, 8, 2}, 2, 1e-2, 10},
   };
   double worst = 0.0;
   for (const Run& r : runs)
   {
      const auto ops = operators(r.c, r.cells, r.k);
      const Trajectory tr = simulate(r.c, ops, scheme(Scheme::Bdf2, r.dt, r.dt * r.steps, r.solver), 1, false);
      double m = tr.summary.max_div;
      for (const auto& rec : tr.records) { m = std::max(m, rec.div_max); }
      worst = std::max(worst, m);
      o.detail << " " << r.label << ": " << sci(m) << ";";
      o.check(m <= 1e-9, r.label);
   }
   o.detail << " max scaled div " << sci(worst) << " (tol 1e-9)";
   return o;
}

// 2. a_h(w,w) >= 1/2 ||w||_{1,h}^2 for random coefficient vectors.
Outcome c2()
{
   Outcome o;
   Rng rng(20240502);
   int total = 0, violations = 0;
   double min_ratio = 1e300;
   for (AxisBc bc : {AxisBc::Periodic, AxisBc::Wall})
   {
      for (int k : {1, 2})
      {
         const auto v = build_velocity_space(box_mesh(2, {4, 4, 1}, 0.0, 1.0, bc), k);
         const SipParts parts = assemble_sip_parts(*v);
         const SparseMatrix a = assemble_sip(*v, 1.0, 4.0 * (k + 1) * (k + 1));
         for (int t = 0; t < 200; ++t)
         {
            const Eigen::VectorXd w = random_vector(v->num_dofs(), rng);
            const double h1 = w.dot(parts.gradient * w) + w.dot(parts.jump * w);
            const double aw = w.dot(a * w);
            min_ratio = std::min(min_ratio, aw / h1);
            violations += aw < 0.5 * h1;
            ++total;
         }
      }
   }
   o.check(violations == 0, "coercivity violations");
   o.detail << " " << total << " vectors (periodic and walled, k=1,2), violations " << violations
            << ", min a(w,w)/||w||^2 " << sci(min_ratio);
   return o;
}

// 3. c_h(b; v, v) equals the upwind seminorm.
Outcome c3()
{
   Outcome o;
   Rng rng(31337);
   double worst = 0.0;
   int pairs = 0;
   struct Setup { int d, n, k; };
   for (const Setup& s : {Setup{2, 4, 2}, Setup{3, 2, 1}})
   {
      const auto v = build_velocity_space(box_mesh(s.d, {s.n, s.n, s.n}), s.k);
      const ConvectionAssembler conv(v);
      for (int t = 0; t < 50; ++t, ++pairs)
      {
         const Eigen::VectorXd b = random_divfree_coefficients(*v, rng);
         const Eigen::VectorXd x = random_vector(v->num_dofs(), rng);
         const double lhs = x.dot(conv.assemble(b) * x);
         const double upw = upwind_seminorm_sq(*v, b, x);
         worst = std::max(worst, std::abs(lhs - upw) / std::max(std::abs(upw), 1e-300));
      }
   }
   o.check(worst <= 1e-11, "relative discrepancy");
   o.detail << " " << pairs << " pairs, max relative discrepancy " << sci(worst) << " (tol 1e-11)";
   return o;
}

// 4. Discrete energy balance of BE-IMEX without forcing.
Outcome c4()
{
   Outcome o;
   const CaseSpec c = lattice2d(1e-3);
   const auto ops = operators(c, {8, 8, 1}, 2);
   const Trajectory tr = simulate(c, ops, scheme(Scheme::BackwardEuler, 1e-2, 1.0), 1, false);
   const double budget = tr.summary.max_budget_relative;
   bool monotone = true;
   for (std::size_t i = 1; i < tr.records.size(); ++i) { monotone &= tr.records[i].ke <= tr.records[i - 1].ke; }
   double cum = 0.0;
   for (const StepReport& r : tr.steps) { cum += 1e-2 * (r.eps_visc + r.eps_upw + r.numerical); }
   const double ke_end = tr.records.back().ke;
   o.check(tr.steps.size() == 100, "100 steps");
   o.check(budget <= 1e-10, "budget residual");
   o.check(monotone, "KE monotone");
   o.check(cum <= tr.ke0, "cumulative dissipation");
   o.detail << " " << tr.steps.size() << " steps, max relative budget residual " << sci(budget)
            << " (tol 1e-10), KE monotone " << (monotone ? "yes" : "no") << ", cumulative dissipation " << sci(cum)
            << " <= KE0 " << sci(tr.ke0) << ", KE(T)+dissipation-KE0 " << sci(ke_end + cum - tr.ke0);
   return o;
}

// 5. Accuracy against the exact lattice solution.
Outcome c5()
{
   Outcome o;
   const double nu = 1e-2;
   const CaseSpec c = lattice2d(nu);
   const auto ops = operators(c, {8, 8, 1}, 4);
   const Trajectory tr = simulate(c, ops, scheme(Scheme::Bdf2, 1e-3, 0.1), 10);
   double err = 0.0, ke_rel = 0.0, ke_rel_true = 0.0;
   for (const DiagnosticsRecord& r : tr.records)
   {
      err = std::max(err, r.err_l2);
      ke_rel = std::max(ke_rel, std::abs(r.ke - std::exp(-8 * kPi * kPi * nu * r.t) * tr.ke0) /
                                   (std::exp(-8 * kPi * kPi * nu * r.t) * tr.ke0));
      ke_rel_true = std::max(ke_rel_true, std::abs(r.ke - std::exp(-16 * kPi * kPi * nu * r.t) * tr.ke0) /
                                             (std::exp(-16 * kPi * kPi * nu * r.t) * tr.ke0));
   }
   o.check(err <= 1e-4, "L2 error");
   o.check(ke_rel <= 1e-4, "KE vs exp(-8 pi^2 nu t)");
   o.detail << " max L2 error " << sci(err) << " (tol 1e-4; the t=0 interpolant alone has "
            << sci(tr.records.front().err_l2) << "); max relative KE gap to exp(-8 pi^2 nu t) KE0 "
            << sci(ke_rel) << " (tol 1e-4); for reference, gap to exp(-16 pi^2 nu t) KE0 (decay of the exact "
            << "solution's energy) " << sci(ke_rel_true);
   return o;
}

// 6. Spatial and temporal convergence orders.
Outcome c6()
{
   Outcome o;
   const double nu = 1e-2;
   const CaseSpec c = lattice2d(nu);
   for (int k : {1, 2})
   {
      std::vector<double> err;
      for (int n : {4, 8, 16})
      {
         const auto ops = operators(c, {n, n, 1}, k);
         const Trajectory tr = simulate(c, ops, scheme(Scheme::Bdf2, 1e-3, 0.05), 1000);
         err.push_back(tr.records.back().err_l2);
      }
      const double r1 = std::log2(err[0] / err[1]);
      const double r2 = std::log2(err[1] / err[2]);
      o.check(r2 >= k + 0.7, "spatial order k=" + std::to_string(k));
      o.detail << " k=" << k << " errors " << sci(err[0]) << "," << sci(err[1]) << "," << sci(err[2]) << " orders "
               << std::to_string(r1).substr(0, 4) << "," << std::to_string(r2).substr(0, 4) << " (need >= "
               << k + 0.7 << " on the finest pair);";
   }
   const auto ops = operators(c, {8, 8, 1}, 4);
   std::vector<Eigen::VectorXd> u;
   std::vector<double> err;
   for (double dt : {4e-3, 2e-3, 1e-3})
   {
      const Trajectory tr = simulate(c, ops, scheme(Scheme::Bdf2, dt, 0.2), 100000);
      u.push_back(tr.final_state.u);
      err.push_back(tr.records.back().err_l2);
   }
   const double rt = std::log2(l2_norm(*ops->velocity, u[0] - u[1]) / l2_norm(*ops->velocity, u[1] - u[2]));
   o.check(rt >= 1.8, "BDF2 temporal order");
   o.detail << " BDF2 self-convergence order (dt 4e-3/2e-3/1e-3, k=4 N=8, t=0.2) " << std::to_string(rt).substr(0, 4)
            << " (need >= 1.8); errors vs exact " << sci(err[0]) << "," << sci(err[1]) << "," << sci(err[2]);
   return o;
}

// 7. Gradient forcing changes only the pressure.
Outcome c7()
{
   Outcome o;
   const CaseSpec base = manufactured(1e-2, "taylor_cells", false);
   CaseSpec shifted = base;
   shifted.force = [f = base.force](double t, const Point& x) {
      Vec3 v = f(t, x);
      v[0] += 2 * kPi * std::cos(2 * kPi * x[0]) * std::cos(2 * kPi * x[1]);
      v[1] -= 2 * kPi * std::sin(2 * kPi * x[0]) * std::sin(2 * kPi * x[1]);
      return v;
   };
   const auto ops = operators(base, {8, 8, 1}, 2);
   const Eigen::VectorXd psi =
      ops->pressure->project([](double, const Point& x) { return std::sin(2 * kPi * x[0]) * std::cos(2 * kPi * x[1]); });

   // Stokes data: -nu lap u0 = 8 pi^2 nu u0 for the lattice field.
   const VectorFunction f_stokes = [&base](double, const Point& x) {
      Vec3 v = base.initial(0.0, x);
      for (double& c : v) { c *= 8 * kPi * kPi * 1e-2; }
      return v;
   };
   const VectorFunction f_shift = [&f_stokes](double t, const Point& x) {
      Vec3 v = f_stokes(t, x);
      v[0] += 2 * kPi * std::cos(2 * kPi * x[0]) * std::cos(2 * kPi * x[1]);
      v[1] -= 2 * kPi * std::sin(2 * kPi * x[0]) * std::sin(2 * kPi * x[1]);
      return v;
   };
   const SaddleSolution sa = solve_stokes(*ops, assemble_load(*ops->velocity, f_stokes, 0.0));
   const SaddleSolution sb = solve_stokes(*ops, assemble_load(*ops->velocity, f_shift, 0.0));
   const double stokes_u = l2_norm(*ops->velocity, sa.u - sb.u) / l2_norm(*ops->velocity, sa.u);
   const double stokes_p = (sb.p - sa.p - psi).norm() / psi.norm();

   const SchemeConfig cfg = scheme(Scheme::Bdf2, 1e-2, 0.2, SolverKind::Direct, 0);
   TimeIntegrator ta(ops, cfg, base.force, false, false);
   TimeIntegrator tb(ops, cfg, shifted.force, false, false);
   FieldState a = initial_state(*ops, base.initial);
   FieldState b = initial_state(*ops, base.initial);
   double ns_u = 0.0, ns_p = 0.0;
   for (int i = 0; i < 20; ++i)
   {
      ta.step(a);
      tb.step(b);
      ns_u = std::max(ns_u, l2_norm(*ops->velocity, a.u - b.u) / l2_norm(*ops->velocity, a.u));
      ns_p = std::max(ns_p, (b.p - a.p - psi).norm() / psi.norm());
   }
   o.check(stokes_u <= 1e-9 && ns_u <= 1e-9, "velocity agreement");
   o.check(stokes_p <= 1e-8 && ns_p <= 1e-8, "pressure shift");
   o.detail << " Stokes: velocity " << sci(stokes_u) << ", pressure " << sci(stokes_p) << "; 20 BDF2 steps: velocity "
            << sci(ns_u) << ", pressure " << sci(ns_p) << " (tol 1e-9 / 1e-8)";
   return o;
}

// 8. Laminar channel on a graded mesh.
Outcome c8()
{
   Outcome o;
   ChannelOptions opt;
   opt.dim = 3;
   opt.re_tau = 180.0;
   opt.nu = 1.0 / 180.0;
   const CaseSpec c = channel(opt);
   const auto ops = operators(c, {2, 8, 2}, 2);
   const double f = c.parameters.at("F");
   const double h = c.parameters.at("H");
   const double umax = f * h * h / (2 * c.nu);

   const SaddleSolution steady = solve_stokes(*ops, assemble_load(*ops->velocity, c.force, 0.0));
   const Trajectory tr = simulate(c, ops, scheme(Scheme::Bdf2, 0.05, 1.0), 5);
   ChannelStatsAccumulator acc(ops->velocity, c.nu);
   acc.add(steady.u, 0.0);
   const ChannelStats s_steady = acc.result();
   ChannelStatsAccumulator acc_run(ops->velocity, c.nu);
   acc_run.add(tr.final_state.u, tr.final_state.t);
   const ChannelStats s_run = acc_run.result();

   double prof = 0.0;
   for (const ChannelStats* s : {&s_steady, &s_run})
   {
      for (std::size_t i = 0; i < s->y.size(); ++i)
      {
         prof = std::max(prof, std::abs(s->mean[0][i] - f * (h * h - s->y[i] * s->y[i]) / (2 * c.nu)) / umax);
      }
   }
   const double ut = std::sqrt(f * h);
   const double ut_err = std::max(std::abs(s_steady.u_tau - ut), std::abs(s_run.u_tau - ut)) / ut;
   o.check(prof <= 1e-8, "mean profile");
   o.check(ut_err <= 1e-8, "U_tau");
   o.detail << " k=2 graded 2x8x2 mesh: max relative <u1> error " << sci(prof) << ", U_tau relative error "
            << sci(ut_err) << " (tol 1e-8), Re_tau " << s_run.re_tau;
   return o;
}

// 9a. Breakdown of the nearly inviscid lattice flow.
Outcome c9a()
{
   Outcome o;
   const double nu = 1e-6;
   const CaseSpec c = lattice2d(nu);
   const auto ops = operators(c, {8, 8, 1}, 4);
   const Trajectory tr = simulate(c, ops, scheme(Scheme::Bdf2, 1e-2, 30.0), 100);
   bool increasing = true;
   double departure = 0.0, t_dep = -1.0;
   for (std::size_t i = 0; i < tr.records.size(); ++i)
   {
      const DiagnosticsRecord& r = tr.records[i];
      if (i > 0) { increasing &= r.err_l2 > tr.records[i - 1].err_l2; }
      const double exact = std::exp(-16 * kPi * kPi * nu * r.t) * tr.ke0;
      const double d = std::abs(r.ke - exact) / exact;
      if (d > departure) { departure = d; }
      if (d > 0.05 && t_dep < 0.0) { t_dep = r.t; }
   }
   o.check(increasing, "err_L2 strictly increasing");
   o.check(departure > 0.05, "KE departure > 5%");
   o.detail << " k=4 N=8 nu=1e-6 dt=1e-2 to t=30, " << tr.records.size() << " records: err_L2 "
            << sci(tr.records.front().err_l2) << " -> " << sci(tr.records.back().err_l2) << ", strictly increasing "
            << (increasing ? "yes" : "no") << "; max KE departure " << sci(departure);
   if (t_dep >= 0.0) { o.detail << " (first above 5% at t=" << t_dep << ")"; }
   return o;
}

// 9b. Dissipation peak of the Taylor-Green vortex.
Outcome c9b()
{
   Outcome o;
   const CaseSpec c = tgv3d(1600.0);
   const auto ops = operators(c, {8, 8, 8}, 1);
   const Trajectory tr = simulate(c, ops, scheme(Scheme::Bdf2, 0.02, 15.0, SolverKind::Iterative), 25, false);
   double peak = -1.0, t_peak = 0.0;
   for (std::size_t i = 0; i < tr.steps.size(); ++i)
   {
      const double eps = tr.steps[i].eps_visc + tr.steps[i].eps_upw;
      if (eps > peak)
      {
         peak = eps;
         t_peak = tr.step_t[i];
      }
   }
   const double vol = std::pow(2 * kPi, 3);
   o.check(t_peak >= 6.0 && t_peak <= 12.0, "peak time in [6,12]");
   o.detail << " k=1 N=8 dt=0.02 to t=15: peak total dissipation rate " << sci(peak / vol)
            << " (per unit volume) at t=" << t_peak;
   const SpectrumRecord sp = spectrum(*ops->velocity, tr.final_state.u, tr.final_state.t);
   o.detail << "; final spectrum Parseval gap " << sci(std::abs(sp.total() - sp.grid_ke) / sp.grid_ke);
   return o;
}

// 10. Spectrum: Parseval and single-mode localisation.
Outcome c10()
{
   Outcome o;
   SampleGrid g;
   g.dim = 2;
   g.m = {16, 16, 1};
   std::vector<std::vector<double>> v(2, std::vector<double>(g.size(), 0.0));
   for (int i = 0; i < g.size(); ++i) { v[0][i] = std::sin(2 * kPi * g.point(i)[1]); }
   const SpectrumRecord s1 = spectrum_from_samples(g, v);
   double others = 0.0;
   for (std::size_t j = 0; j < s1.energy.size(); ++j)
   {
      if (j != 1) { others = std::max(others, std::abs(s1.energy[j])); }
   }
   o.check(others <= 1e-12 && std::abs(s1.energy[1] - 0.25) <= 1e-12, "single mode");

   Rng rng(99);
   double parseval = 0.0;
   for (int d : {2, 3})
   {
      const auto sp = build_velocity_space(box_mesh(d, {4, 4, 4}), 2);
      const Eigen::VectorXd u = random_divfree_coefficients(*sp, rng) + 1e-2 * random_vector(sp->num_dofs(), rng);
      const SpectrumRecord s = spectrum(*sp, u);
      parseval = std::max(parseval, std::abs(s.total() - s.grid_ke) / s.grid_ke);
   }
   o.check(parseval <= 1e-6, "Parseval");
   o.detail << " single mode: shell-1 energy " << s1.energy[1] << ", other shells max " << sci(others)
            << " (tol 1e-12); Parseval relative gap " << sci(parseval) << " (tol 1e-6)";
   return o;
}

} // namespace

int main(int argc, char** argv)
{
   const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1", c1}, {"2", c2}, {"3", c3}, {"4", c4}, {"5", c5}, {"6", c6}, {"7", c7}, {"8", c8}, {"9a", c9a},
      {"9b", c9b}, {"10", c10}};
   const std::vector<std::string> names{"divergence-free velocity",
                                        "SIP coercivity",
                                        "upwind identity",
                                        "discrete energy balance",
                                        "exact-solution accuracy",
                                        "convergence orders",
                                        "pressure robustness",
                                        "laminar channel",
                                        "lattice breakdown",
                                        "Taylor-Green dissipation peak",
                                        "spectrum sanity"};
   std::set<std::string> selected;
   for (int i = 1; i < argc; ++i) { selected.insert(argv[i]); }
   int failed = 0;
   for (std::size_t i = 0; i < criteria.size(); ++i)
   {
      const std::string& id = criteria[i].first;
      const std::string group = id.substr(0, id.find_first_not_of("0123456789"));
      if (!selected.empty() && !selected.count(id) && !selected.count(group)) { continue; }
      const auto start = std::chrono::steady_clock::now();
      Outcome o;
      try
      {
         o = criteria[i].second();
      }
      catch (const std::exception& e)
      {
         o.pass = false;
         o.detail << " exception: " << e.what();
      }
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      failed += !o.pass;
      std::cout << "criterion " << id << " " << (o.pass ? "PASS" : "FAIL") << " " << names[i] << ":"
                << o.detail.str() << " (" << std::to_string(secs).substr(0, 6) << " s)" << std::endl;
   }
   return failed == 0 ? 0 : 1;
}
