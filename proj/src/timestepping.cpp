#include "hdiv/timestepping.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

namespace hdiv {

std::string scheme_name(Scheme s)
{
   return s == Scheme::BackwardEuler ? "be-imex" : "bdf2-imex";
}

Scheme parse_scheme(const std::string& s)
{
   std::string l = s;
   std::transform(l.begin(), l.end(), l.begin(), [](unsigned char c) { return std::tolower(c); });
   if (l == "be" || l == "be-imex" || l == "be_imex") { return Scheme::BackwardEuler; }
   if (l == "bdf2" || l == "bdf2-imex" || l == "bdf2_imex") { return Scheme::Bdf2; }
   throw std::invalid_argument("unknown scheme '" + s + "'");
}

void validate(const SchemeConfig& cfg)
{
   if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) { throw std::invalid_argument("dt must be > 0"); }
   if (!(cfg.t_end >= 0.0) || !std::isfinite(cfg.t_end)) { throw std::invalid_argument("t_end must be >= 0"); }
   if (!(cfg.div_tol > 0.0)) { throw std::invalid_argument("div_tol must be > 0"); }
   if (!(cfg.linear_tol > 0.0)) { throw std::invalid_argument("linear_tol must be > 0"); }
   if (!(cfg.solver.tolerance > 0.0)) { throw std::invalid_argument("solver tolerance must be > 0"); }
   if (cfg.solver.restart < 1) { throw std::invalid_argument("solver restart must be >= 1"); }
   if (cfg.solver.max_iterations < 1) { throw std::invalid_argument("solver max_iterations must be >= 1"); }
}

int step_count(const SchemeConfig& cfg)
{
   return static_cast<int>(std::ceil(cfg.t_end / cfg.dt - 1e-9));
}

double divergence_max(const AssembledOperators& ops, const Eigen::VectorXd& u)
{
   const double norm2 = u.dot(ops.mass * u);
   if (norm2 <= 0.0) { return 0.0; }
   return (ops.div.transpose() * u).lpNorm<Eigen::Infinity>() / std::max(std::sqrt(norm2), kDivergenceNormFloor);
}

TimeIntegrator::TimeIntegrator(std::shared_ptr<const AssembledOperators> ops, SchemeConfig cfg, VectorFunction force,
                               bool zero_force, bool steady_force)
   : ops_(std::move(ops)), cfg_(cfg), force_(std::move(force)), zero_force_(zero_force), steady_force_(steady_force),
     conv_(ops_->velocity)
{
   validate(cfg_);
   const SparseMatrix c0 = conv_.assemble(Eigen::VectorXd::Zero(ops_->num_velocity()));
   const SparseMatrix pattern = pattern_union({&ops_->mass, &ops_->sip, &c0});
   solver_ = std::make_unique<SaddlePointSolver>(*ops_, pattern, cfg_.gauge, false, cfg_.solver);
   if (!zero_force_ && steady_force_) { steady_load_ = assemble_load(*ops_->velocity, force_, 0.0); }
}

Eigen::VectorXd TimeIntegrator::load(double t) const
{
   if (zero_force_) { return Eigen::VectorXd::Zero(ops_->num_velocity()); }
   if (steady_force_) { return steady_load_; }
   return assemble_load(*ops_->velocity, force_, t);
}

StepReport TimeIntegrator::step(FieldState& s)
{
   const AssembledOperators& ops = *ops_;
   const double dt = cfg_.dt;
   const bool bdf2 = cfg_.scheme == Scheme::Bdf2 && s.has_prev;
   const double t_new = (s.step + 1) * dt;

   Eigen::VectorXd b;
   Eigen::VectorXd rhs;
   double mass_factor;
   if (bdf2)
   {
      b = 2.0 * s.u - s.u_prev;
      rhs = ops.mass * (4.0 * s.u - s.u_prev) / (2.0 * dt);
      mass_factor = 1.5 / dt;
   }
   else
   {
      b = s.u;
      rhs = ops.mass * s.u / dt;
      mass_factor = 1.0 / dt;
   }
   const Eigen::VectorXd f = load(t_new);
   rhs += f;

   const SparseMatrix c = conv_.assemble(b, cfg_.div_tol);
   const SparseMatrix k = mass_factor * ops.mass + ops.sip + c;
   solver_->factorize(k);
   // Solving for the increment keeps the absolute error proportional to the
   // change over one step.
   const Eigen::VectorXd p_old = s.p.size() == ops.num_pressure() ? s.p : Eigen::VectorXd::Zero(ops.num_pressure());
   const SaddleSolution sol =
      solver_->solve(rhs - k * s.u - ops.div * p_old, -(ops.div.transpose() * s.u));
   if (!(sol.residual <= cfg_.linear_tol))
   {
      throw LinearSolveError("linear residual " + std::to_string(sol.residual) + " exceeds tolerance");
   }

   const Eigen::VectorXd a = s.u + sol.u;
   StepReport r;
   r.bootstrap = cfg_.scheme == Scheme::Bdf2 && !s.has_prev;
   r.linear_residual = sol.residual;
   r.linear_iterations = sol.iterations;
   const Eigen::VectorXd ma = ops.mass * a;
   const Eigen::VectorXd diff = a - s.u;
   const Eigen::VectorXd mdiff = ops.mass * diff;
   r.dke_dt = 0.5 * mdiff.dot(a + s.u) / dt;
   if (bdf2)
   {
      const Eigen::VectorXd x1 = 2.0 * a - s.u;
      const Eigen::VectorXd x0 = 2.0 * s.u - s.u_prev;
      const Eigen::VectorXd second = a - 2.0 * s.u + s.u_prev;
      r.storage = (mdiff.dot(a + s.u) + (ops.mass * (x1 - x0)).dot(x1 + x0)) / (4.0 * dt);
      r.numerical = (ops.mass * second).dot(second) / (4.0 * dt);
   }
   else
   {
      r.storage = r.dke_dt;
      r.numerical = 0.5 * mdiff.dot(diff) / dt;
   }
   r.eps_visc = a.dot(ops.sip * a);
   r.eps_upw = conv_.upwind_seminorm_sq(b, a);
   r.forcing = f.dot(a);
   r.budget_residual = std::abs(r.storage + r.numerical + r.eps_visc + r.eps_upw - r.forcing);
   r.budget_scale = std::max({std::abs(r.storage), r.numerical, std::abs(r.eps_visc), r.eps_upw, std::abs(r.forcing)});
   const double norm2 = a.dot(ma);
   r.div_max = norm2 > 0.0 ? (ops.div.transpose() * a).lpNorm<Eigen::Infinity>() /
                                std::max(std::sqrt(norm2), kDivergenceNormFloor)
                           : 0.0;
   if (r.div_max > cfg_.div_tol)
   {
      throw std::runtime_error("divergence invariant violated after step " + std::to_string(s.step + 1) +
                               " (scaled div " + std::to_string(r.div_max) + ")");
   }

   s.u_prev = s.u;
   s.has_prev = true;
   s.u = a;
   s.p = p_old + sol.p;
   s.step += 1;
   s.t = t_new;
   return r;
}

SaddleSolution solve_stokes(const AssembledOperators& ops, const Eigen::VectorXd& rhs, GaugeMode gauge)
{
   const bool periodic = ops.velocity->mesh().fully_periodic();
   SaddlePointSolver solver(ops, ops.sip, gauge, periodic);
   solver.factorize(ops.sip);
   SaddleSolution s = solver.solve(rhs);
   // When the velocity is itself at roundoff level (gradient forcing) the
   // pressure sets the scale of the continuity residual.
   const double un = l2_norm(*ops.velocity, s.u);
   const double pn = s.p.norm();
   const double div = un > 0.0 ? (ops.div.transpose() * s.u).lpNorm<Eigen::Infinity>() / std::max(un, 1e-4 * pn) : 0.0;
   if (div > kDefaultDivTol)
   {
      throw std::runtime_error("Stokes solution violates the divergence tolerance (" + std::to_string(div) + ")");
   }
   return s;
}

FieldState initial_state(const AssembledOperators& ops, const VectorFunction& u0)
{
   FieldState s;
   s.u = ops.velocity->interpolate(u0, 0.0);
   s.p = Eigen::VectorXd::Zero(ops.num_pressure());
   s.u_prev = s.u;
   return s;
}

RunSummary run(TimeIntegrator& integrator, FieldState& state, const RunSchedule& schedule,
               const RunObserver& observer)
{
   if (schedule.record_every < 1) { throw std::invalid_argument("record_every must be >= 1"); }
   if (schedule.snapshot_every < 0) { throw std::invalid_argument("snapshot_every must be >= 0"); }
   RunSummary summary;
   summary.max_div = divergence_max(integrator.operators(), state.u);
   if (observer.on_record) { observer.on_record(state, nullptr); }
   if (observer.on_snapshot && schedule.snapshot_every > 0) { observer.on_snapshot(state); }
   const int n = step_count(integrator.config());
   for (int i = 0; i < n; ++i)
   {
      const StepReport r = integrator.step(state);
      ++summary.steps;
      summary.max_div = std::max(summary.max_div, r.div_max);
      summary.max_budget_relative = std::max(summary.max_budget_relative, r.budget_relative());
      if (observer.on_step) { observer.on_step(state, r); }
      const bool last = i + 1 == n;
      if (observer.on_record && (state.step % schedule.record_every == 0 || last)) { observer.on_record(state, &r); }
      if (observer.on_snapshot && schedule.snapshot_every > 0 && (state.step % schedule.snapshot_every == 0 || last))
      {
         observer.on_snapshot(state);
      }
   }
   return summary;
}

} // namespace hdiv
