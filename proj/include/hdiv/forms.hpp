#pragma once

// Discrete operators of the H(div)-conforming dG scheme.
//
// With the SIP form
//
//   a_h(u,w) = sum_K (grad u, grad w)_K + sum_E sigma/h_E ([u]_t, [w]_t)_E
//              - sum_E ({grad u . mu_E}, [w]_t)_E + ({grad w . mu_E}, [u]_t)_E
//
// and the upwind convection form c_h(b; u, v), the semidiscrete system reads
//
//   M du/dt + A u + C(b) u + B p = F,   B^T u = 0,   A = nu * a_h.
//
// Boundary (wall) faces use the one-sided trace as both jump and average,
// periodic faces are interior faces.

#include "hdiv/fespace.hpp"

#include <Eigen/SparseCore>

#include <memory>

namespace hdiv {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

/// Pieces of a_h assembled separately so that the discrete norms can be
/// evaluated: a_h = gradient + sigma * jump + consistency.
struct SipParts
{
   SparseMatrix gradient;      ///< sum_K (grad u, grad w)_K
   SparseMatrix jump;          ///< sum_E h_E^-1 ([u]_t, [w]_t)_E
   SparseMatrix consistency;   ///< the two symmetric flux terms (with their minus sign)
   SparseMatrix flux_average;  ///< sum_E h_E ({grad u . mu}, {grad w . mu})_E
};

/// Default penalty 4 (k+1)^2.
double default_penalty(int k);

SparseMatrix assemble_mass(const VelocitySpace& space);
SipParts assemble_sip_parts(const VelocitySpace& space);
/// nu * a_h; throws std::invalid_argument for sigma <= 0.
SparseMatrix assemble_sip(const VelocitySpace& space, double nu, double sigma);
/// B with (B^T u) . q = -(q, div u_h).
SparseMatrix assemble_div(const VelocitySpace& velocity, const PressureSpace& pressure);
/// Load vector (f(t), phi_i).
Eigen::VectorXd assemble_load(const VelocitySpace& space, const VectorFunction& f, double t);

inline constexpr double kDefaultDivTol = 1e-10;

/// Assembles the upwind convection matrix C(b) for a divergence-free advecting
/// field. Reference tables are built once; the sparsity pattern of the result
/// does not depend on b.
class ConvectionAssembler
{
public:
   explicit ConvectionAssembler(std::shared_ptr<const VelocitySpace> space);

   /// Throws std::domain_error when scaled_divergence(b) exceeds div_tol.
   SparseMatrix assemble(const Eigen::VectorXd& b, double div_tol = kDefaultDivTol) const;

   /// |v|^2_{b,upw} by face quadrature with the cached traces.
   double upwind_seminorm_sq(const Eigen::VectorXd& b, const Eigen::VectorXd& v) const;

   const VelocitySpace& space() const { return *space_; }

private:
   std::shared_ptr<const VelocitySpace> space_;
   QuadratureRule volume_rule_;
   QuadratureRule face_rule_;
   ReferenceTable volume_;
   std::array<ReferenceTable, 6> trace_;
};

SparseMatrix assemble_upwind_convection(const Eigen::VectorXd& b, std::shared_ptr<const VelocitySpace> space,
                                        double div_tol = kDefaultDivTol);

/// |v|^2_{b,upw} = 1/2 sum_{interior E} (|b . mu_E| [v], [v])_E, by direct quadrature.
double upwind_seminorm_sq(const VelocitySpace& space, const Eigen::VectorXd& b, const Eigen::VectorXd& v);

struct NormReport
{
   double h1 = 0.0;          ///< ||v||_{1,h}
   double h1_star = 0.0;     ///< ||v||_{1,h,*}
   double upwind = 0.0;      ///< |v|_{b,upw}
   double energy = 0.0;      ///< ||v||_e = sqrt(a_h(v,v))
};

NormReport compute_norms(const VelocitySpace& space, const SipParts& parts, double sigma,
                         const Eigen::VectorXd& v, const Eigen::VectorXd& b);

/// Everything that stays fixed during a run.
struct AssembledOperators
{
   std::shared_ptr<const VelocitySpace> velocity;
   std::shared_ptr<const PressureSpace> pressure;
   double nu = 0.0;
   double sigma = 0.0;
   SparseMatrix mass;
   SparseMatrix sip;        ///< A = nu * a_h
   SparseMatrix div;        ///< B
   SipParts parts;

   int num_velocity() const { return velocity->num_dofs(); }
   int num_pressure() const { return pressure->num_dofs(); }
};

AssembledOperators assemble_operators(std::shared_ptr<const VelocitySpace> velocity,
                                      std::shared_ptr<const PressureSpace> pressure, double nu,
                                      double sigma);

} // namespace hdiv
