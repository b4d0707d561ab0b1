#pragma once

// Benchmark flows: initial data, body forces, domains and, where known,
// exact solutions with analytic derivatives.

#include "hdiv/fespace.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>

namespace hdiv {

using GradientFunction = std::function<Mat3(double, const Point&)>;

/// Analytic velocity/pressure pair with the derivatives needed for PDE residuals.
struct AnalyticField
{
   VectorFunction velocity;
   GradientFunction gradient;         ///< grad[i][a] = d u_i / d x_a
   VectorFunction laplacian;
   VectorFunction time_derivative;
   ScalarFunction pressure;
   VectorFunction pressure_gradient;
};

struct CaseSpec
{
   std::string name;
   double nu = 0.0;
   MeshSpec domain;                  ///< cells are filled in by make_case_mesh
   VectorFunction initial;
   VectorFunction force;
   bool zero_force = true;
   bool steady_force = true;
   std::optional<AnalyticField> exact;
   /// The attached exact solution solves the PDE but the discrete flow is not
   /// expected to stay close to it (unstable Beltrami state).
   bool formal_exact = false;
   std::map<std::string, double> parameters;
};

/// Taylor cells on (-1,1)^2 with their exact decaying solution.
CaseSpec lattice2d(double nu);
/// Three-component lattice flow on (0,1)^3.
CaseSpec lattice3d(double nu);
/// Taylor-Green vortex on (0, 2 pi L)^3 with U = L = 1 and nu = 1/Re.
CaseSpec tgv3d(double re);

struct ChannelOptions
{
   int dim = 3;
   double re_tau = 180.0;
   double nu = 1.0 / 180.0;
   double height = 1.0;              ///< half width H
   bool laminar = true;
   double grading_gamma = 1.8;       ///< <= 0 for a uniform wall-normal mesh
   double perturbation = 0.1;        ///< relative to the bulk velocity
   double bulk_ratio = 15.7;         ///< initial bulk velocity in units of U_tau
   std::uint64_t seed = 1;
   std::array<double, 3> extent{2.0 * 3.14159265358979323846, 2.0, 3.14159265358979323846};  ///< in units of H
};

/// Channel between walls at x2 = -H, H, periodic in x1 (and x3), driven by
/// f = (F,0,0) with F = Re_tau^2 nu^2 / H^3.
CaseSpec channel(const ChannelOptions& opt);

/// Builds f = du/dt - nu lap u + (u.grad)u + grad p for a given field and
/// attaches it as exact solution. Throws std::invalid_argument when the field
/// is not divergence free at sampled points of the box.
CaseSpec manufactured(double nu, const AnalyticField& field, const MeshSpec& domain, std::string name = "manufactured");

/// Named manufactured fields: "taylor_cells" (2D, with its Beltrami pressure)
/// and "lattice3d". `extra_pressure` adds sin(2 pi x1) to the pressure.
AnalyticField manufactured_field(const std::string& choice, double nu, bool extra_pressure = false);
CaseSpec manufactured(double nu, const std::string& choice, bool extra_pressure = false);

/// du/dt - nu lap u + (u.grad)u + grad p - f of the attached exact solution.
Vec3 pde_residual(const CaseSpec& c, double t, const Point& x);

/// Mesh of the case domain with the given cell counts.
std::shared_ptr<const CartesianMesh> make_case_mesh(const CaseSpec& c, const std::array<int, 3>& cells);

/// Case selection as it appears in a run configuration.
struct CaseParameters
{
   std::string name = "lattice2d";
   double nu = 1e-2;                 ///< ignored by tgv3d (nu = 1/re)
   double re = 1600.0;
   double re_tau = 180.0;
   int channel_dim = 3;
   double grading_gamma = 1.8;
   double perturbation = 0.1;
   double bulk_ratio = 15.7;
   std::string field = "taylor_cells";
   bool extra_pressure = false;
   std::uint64_t seed = 1;

   bool operator==(const CaseParameters&) const = default;
};

/// Names: lattice2d, lattice3d, tgv3d, channel_laminar, channel_turbulent, manufactured.
CaseSpec make_case(const CaseParameters& p);

} // namespace hdiv
