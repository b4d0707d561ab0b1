#pragma once

// Scalar and sampled-field observables of a discrete velocity.
//
// Curls and gradients are broken (elementwise); no face terms enter the
// enstrophy or palinstrophy.

#include "hdiv/cases.hpp"
#include "hdiv/forms.hpp"
#include "hdiv/timestepping.hpp"

#include <limits>
#include <optional>
#include <vector>

namespace hdiv {

struct DiagnosticsRecord
{
   static constexpr double kUnknown = std::numeric_limits<double>::quiet_NaN();

   double t = 0.0;
   double ke = 0.0;               ///< 1/2 u^T M u
   double enstrophy = 0.0;        ///< 1/2 ||curl_h u||^2
   double palinstrophy = 0.0;     ///< 1/2 ||grad_h curl_h u||^2
   double eps_visc = 0.0;         ///< u^T A u
   double eps_upw = 0.0;          ///< |u|^2_{b,upw}
   double dke_dt = 0.0;
   double budget_residual = 0.0;  ///< absolute residual of the step energy identity
   double div_max = 0.0;          ///< ||B^T u||_inf / ||u||_L2
   double err_l2 = kUnknown;
   double err_h1 = kUnknown;
};

struct ErrorNorms
{
   double l2 = 0.0;
   double h1 = 0.0;  ///< broken H1 error including the tangential-jump face terms
};

struct VorticityNorms
{
   double enstrophy = 0.0;
   double palinstrophy = 0.0;
};

/// Evaluates volume integrals of a discrete velocity with reference tables
/// computed once.
class FieldIntegrator
{
public:
   /// `points_per_axis` <= 0 selects the data quadrature of the space.
   explicit FieldIntegrator(std::shared_ptr<const VelocitySpace> space, int points_per_axis = 0);

   double kinetic_energy(const Eigen::VectorXd& u) const;
   VorticityNorms vorticity_norms(const Eigen::VectorXd& u) const;
   /// L2 and broken H1 errors against an exact field at time t.
   ErrorNorms error(const Eigen::VectorXd& u, const VectorFunction& velocity, const GradientFunction& gradient,
                    double t) const;

   const VelocitySpace& space() const { return *space_; }

private:
   struct CellSamples;
   void sample_cell(const Eigen::VectorXd& u, int cell, bool hessian, CellSamples& out) const;

   std::shared_ptr<const VelocitySpace> space_;
   QuadratureRule rule_;
   ReferenceTable table_;
};

ErrorNorms error_vs_exact(const VelocitySpace& space, const Eigen::VectorXd& u, const AnalyticField& exact,
                          double t);

/// Builds records from integrator states.
class Diagnostics
{
public:
   Diagnostics(std::shared_ptr<const AssembledOperators> ops, std::optional<AnalyticField> exact);

   /// With a step report the rates and budget come from the step; at t = 0
   /// (report == nullptr) eps_upw = |u|^2_{u,upw} and the rates are zero.
   DiagnosticsRecord record(const FieldState& state, const StepReport* report) const;
   bool has_exact() const { return exact_.has_value(); }

private:
   std::shared_ptr<const AssembledOperators> ops_;
   std::optional<AnalyticField> exact_;
   FieldIntegrator integrator_;
   ConvectionAssembler conv_;
};

/// Trapezoidal time integral of eps_visc + eps_upw over a record series.
double cumulative_dissipation(const std::vector<DiagnosticsRecord>& records);

/// Uniform cell-centred sampling grid of the mesh box: sample i along an axis
/// sits at lower + (i + 1/2) L / m.
struct SampleGrid
{
   int dim = 2;
   std::array<int, 3> m{1, 1, 1};
   Point lower{0.0, 0.0, 0.0};
   Point upper{1.0, 1.0, 1.0};

   int size() const { return m[0] * m[1] * (dim == 3 ? m[2] : 1); }
   /// Row-major flat index, the last axis running fastest.
   Point point(int flat) const;
};

/// m = N_a (k+1) per axis, or `samples_per_axis` on every axis when positive.
SampleGrid default_sample_grid(const VelocitySpace& space, int samples_per_axis = 0);

/// Value and gradient of u_h at every grid point.
std::vector<FieldJet> sample_field(const VelocitySpace& space, const Eigen::VectorXd& u, const SampleGrid& grid);

/// Broken curl from a sampled jet (component 2 only in 2D).
Vec3 vorticity(const FieldJet& jet, int dim);

/// Q = 1/2 (|Omega|_F^2 - |S|_F^2) at a velocity gradient.
double q_value(const Mat3& grad);

/// Q-criterion samples; throws std::domain_error for 2D states.
std::vector<double> q_criterion(const VelocitySpace& space, const Eigen::VectorXd& u, const SampleGrid& grid);

} // namespace hdiv
