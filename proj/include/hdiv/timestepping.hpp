#pragma once

// Linearly implicit time integration of
//
//   M du/dt + A u + C(b) u + B p = F,   B^T u = 0
//
// with an exactly divergence-free extrapolated advecting field b, and a
// steady Stokes solver.

#include "hdiv/cases.hpp"
#include "hdiv/forms.hpp"
#include "hdiv/linear_solver.hpp"

#include <functional>
#include <memory>
#include <string>

namespace hdiv {

enum class Scheme { BackwardEuler, Bdf2 };

std::string scheme_name(Scheme s);
/// Accepts "be", "be-imex", "bdf2", "bdf2-imex" (case-insensitive).
Scheme parse_scheme(const std::string& s);

struct SchemeConfig
{
   Scheme scheme = Scheme::BackwardEuler;
   double dt = 1e-3;
   double t_end = 0.0;
   double div_tol = kDefaultDivTol;
   double linear_tol = 1e-10;
   GaugeMode gauge = GaugeMode::MeanZero;
   SolverOptions solver;
};

/// Throws std::invalid_argument naming the offending field.
void validate(const SchemeConfig& cfg);

/// Number of steps needed to reach t_end (the last step lands on n * dt).
int step_count(const SchemeConfig& cfg);

struct FieldState
{
   double t = 0.0;
   int step = 0;
   Eigen::VectorXd u;
   Eigen::VectorXd p;
   Eigen::VectorXd u_prev;
   bool has_prev = false;
};

/// Algebraic energy budget of one step, obtained by testing the discrete
/// momentum equation with the new velocity a:
///
///   storage + numerical + eps_visc + eps_upw - forcing = 0
///
/// BE:   storage = (|a|^2 - |b|^2) / (2 dt),  numerical = |a - b|^2 / (2 dt)
/// BDF2: storage = (|a|^2 + |2a-b|^2 - |b|^2 - |2b-c|^2) / (4 dt),
///       numerical = |a - 2b + c|^2 / (4 dt)
/// with |.| the M-norm, b = u^n, c = u^{n-1}.
struct StepReport
{
   double dke_dt = 0.0;           ///< (KE^{n+1} - KE^n) / dt
   double storage = 0.0;
   double numerical = 0.0;
   double eps_visc = 0.0;         ///< a^T A a
   double eps_upw = 0.0;          ///< |a|^2_{b,upw} by direct face quadrature
   double forcing = 0.0;          ///< F^T a
   double budget_residual = 0.0;  ///< absolute
   double budget_scale = 0.0;     ///< largest magnitude among the budget terms
   double div_max = 0.0;          ///< ||B^T a||_inf / ||a||_L2
   double linear_residual = 0.0;
   int linear_iterations = 0;
   bool bootstrap = false;        ///< BE start-up step of BDF2

   double budget_relative() const { return budget_scale > 0.0 ? budget_residual / budget_scale : budget_residual; }
};

/// ||B^T u||_inf / ||u||_L2 (0 for u = 0).
double divergence_max(const AssembledOperators& ops, const Eigen::VectorXd& u);

class TimeIntegrator
{
public:
   TimeIntegrator(std::shared_ptr<const AssembledOperators> ops, SchemeConfig cfg, VectorFunction force,
                  bool zero_force, bool steady_force);

   /// Advances `state` by one step. Throws LinearSolveError on a failed
   /// solve and std::runtime_error when the new velocity violates div_tol.
   StepReport step(FieldState& state);

   const SchemeConfig& config() const { return cfg_; }
   const AssembledOperators& operators() const { return *ops_; }
   const ConvectionAssembler& convection() const { return conv_; }
   /// Load vector at time t.
   Eigen::VectorXd load(double t) const;

private:
   std::shared_ptr<const AssembledOperators> ops_;
   SchemeConfig cfg_;
   VectorFunction force_;
   bool zero_force_;
   bool steady_force_;
   Eigen::VectorXd steady_load_;
   ConvectionAssembler conv_;
   std::unique_ptr<SaddlePointSolver> solver_;
};

/// Steady Stokes problem A u + B p = rhs, B^T u = 0 with the requested gauge.
/// On a fully periodic mesh the velocity mean is fixed to zero as well.
SaddleSolution solve_stokes(const AssembledOperators& ops, const Eigen::VectorXd& rhs,
                            GaugeMode gauge = GaugeMode::MeanZero);

/// Initial state: interpolated velocity, zero pressure.
FieldState initial_state(const AssembledOperators& ops, const VectorFunction& u0);

struct RunSchedule
{
   int record_every = 1;
   int snapshot_every = 0;  ///< 0 disables snapshots
};

struct RunObserver
{
   /// Called at t = 0 (report == nullptr), every record_every steps and after the last step.
   std::function<void(const FieldState&, const StepReport*)> on_record;
   std::function<void(const FieldState&)> on_snapshot;
   /// Called after every step.
   std::function<void(const FieldState&, const StepReport&)> on_step;
};

struct RunSummary
{
   int steps = 0;
   double max_div = 0.0;
   double max_budget_relative = 0.0;
};

RunSummary run(TimeIntegrator& integrator, FieldState& state, const RunSchedule& schedule,
               const RunObserver& observer);

} // namespace hdiv
