#pragma once

// Tensor-product Raviart-Thomas velocity space RT_k and discontinuous Q_k
// pressure space on Cartesian meshes.
//
// Every local velocity basis function has exactly one nonzero component c:
//
//     phi_j = e_c * s_c * L_m(xhat_c) * prod_{b != c} T_{n_b}(xhat_b)
//
// where L_m is the hierarchical Lobatto family of degree k+1 (m = 0, 1 are the
// lower/upper face functions, m >= 2 interior bubbles), T_n the orthonormal
// Legendre family of degree k and s_c = 1 / prod_{b != c} h_b the contravariant
// Piola factor of a box cell. Face functions of neighbouring cells share a
// global degree of freedom, which makes the normal component single valued.

#include "hdiv/mesh.hpp"
#include "hdiv/quadrature.hpp"

#include <Eigen/Core>
#include <Eigen/LU>

#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace hdiv {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;

/// Axes spanning a face normal to `axis`, in increasing order (-1 padded).
inline std::array<int, 2> tangential_axes(int axis, int dim)
{
   std::array<int, 2> t{-1, -1};
   int n = 0;
   for (int b = 0; b < dim; ++b)
   {
      if (b != axis) { t[n++] = b; }
   }
   return t;
}

/// Vector field of (t, x).
using VectorFunction = std::function<Vec3(double, const Point&)>;
/// Scalar field of (t, x).
using ScalarFunction = std::function<double(double, const Point&)>;

struct LocalBasisFunction
{
   int component = 0;
   std::array<int, 3> degree{0, 0, 0};  ///< Lobatto index along `component`, Legendre degree otherwise
   int local_face = -1;                 ///< 2*component+side for face functions, -1 for bubbles
   int tangential_index = 0;            ///< index within the face (or bubble) tangential block
};

/// Values of the reference scalar factors g_j at a set of reference points.
struct ReferenceTable
{
   int num_points = 0;
   Eigen::MatrixXd value;                 ///< basis x points
   std::array<Eigen::MatrixXd, 3> grad;   ///< d/dxhat_a, basis x points
   std::array<std::array<Eigen::MatrixXd, 3>, 3> hess;  ///< filled when requested
   bool has_hessian = false;
};

/// Physical values of the local basis of one cell at reference points.
struct BasisEvaluation
{
   int cell = -1;
   std::vector<int> component;                          ///< per basis function
   Eigen::MatrixXd value;                               ///< nonzero component, basis x points
   std::array<Eigen::MatrixXd, 3> grad;                 ///< d/dx_a of that component
   Eigen::MatrixXd divergence;                          ///< basis x points
};

/// Physical value, gradient (grad[i][a] = d u_i / d x_a) and optionally
/// second derivatives of a discrete velocity at one point.
struct FieldJet
{
   Vec3 value{0.0, 0.0, 0.0};
   Mat3 grad{};
   std::array<Mat3, 3> hess{};  ///< hess[i][a][b] = d^2 u_i / dx_a dx_b
};

class VelocitySpace
{
public:
   VelocitySpace(std::shared_ptr<const CartesianMesh> mesh, int order);

   int order() const { return order_; }
   int dim() const { return mesh_->dim(); }
   const CartesianMesh& mesh() const { return *mesh_; }
   std::shared_ptr<const CartesianMesh> mesh_ptr() const { return mesh_; }

   int local_dim() const { return static_cast<int>(basis_.size()); }
   int dofs_per_face() const { return dofs_per_face_; }
   int interior_dofs_per_cell() const { return interior_per_cell_; }
   int num_dofs() const { return num_dofs_; }
   int num_face_dofs() const { return num_face_dofs_; }

   const std::vector<LocalBasisFunction>& local_basis() const { return basis_; }
   /// Global DOF of each local function of `cell`; -1 where the function is
   /// removed by the strong u.n = 0 wall condition.
   std::span<const int> cell_dofs(int cell) const;
   /// First global DOF of a face block (-1 on walls).
   int face_dof_offset(int face) const { return face_offset_[face]; }

   /// Contravariant Piola factor of component c on a cell.
   double piola_scale(const Cell& cell, int component) const;

   ReferenceTable tabulate(std::span<const Point> ref_points, bool with_hessian = false) const;
   BasisEvaluation eval_velocity_basis(int cell, std::span<const Point> ref_points) const;

   /// Evaluates the discrete field u_h on `cell` at one reference point.
   FieldJet evaluate(const Eigen::VectorXd& coeffs, int cell, const Point& ref,
                     bool with_hessian = false) const;
   /// Evaluates at a physical point (located in the mesh).
   FieldJet evaluate_at(const Eigen::VectorXd& coeffs, const Point& x, bool with_hessian = false) const;

   /// Canonical interpolant (face normal moments + interior moments).
   Eigen::VectorXd interpolate(const VectorFunction& field, double t = 0.0) const;

   /// Local coefficient vector of `cell` (zeros for constrained functions).
   Eigen::VectorXd gather(const Eigen::VectorXd& coeffs, int cell) const;

   static Point to_reference(const Cell& cell, const Point& x);
   static Point to_physical(const Cell& cell, const Point& ref);
   static double jacobian(const Cell& cell, int dim);

private:
   std::shared_ptr<const CartesianMesh> mesh_;
   int order_ = 0;
   int dofs_per_face_ = 0;
   int interior_per_cell_ = 0;
   int num_dofs_ = 0;
   int num_face_dofs_ = 0;
   std::vector<LocalBasisFunction> basis_;
   std::vector<int> dof_map_;      ///< cell-major, local_dim entries per cell
   std::vector<int> face_offset_;
   // Per component: reference moment matrix of the interior bubbles (LU).
   std::vector<Eigen::PartialPivLU<Eigen::MatrixXd>> bubble_moment_lu_;
};

/// Discontinuous tensor-product Q_k pressure space, L2(K)-orthonormal per cell.
class PressureSpace
{
public:
   PressureSpace(std::shared_ptr<const CartesianMesh> mesh, int order);

   int order() const { return order_; }
   int dim() const { return mesh_->dim(); }
   const CartesianMesh& mesh() const { return *mesh_; }
   int local_dim() const { return local_dim_; }
   int num_dofs() const { return local_dim_ * mesh_->num_cells(); }
   int cell_offset(int cell) const { return cell * local_dim_; }
   /// The space always carries constants; the solver decides how they are gauged.
   bool needs_mean_zero_gauge() const { return true; }

   const std::vector<std::array<int, 3>>& local_degrees() const { return degrees_; }
   /// Values of the local basis of `cell` at reference points: basis x points.
   Eigen::MatrixXd tabulate(int cell, std::span<const Point> ref_points) const;
   double evaluate(const Eigen::VectorXd& coeffs, int cell, const Point& ref) const;
   /// L2 projection of a scalar field.
   Eigen::VectorXd project(const ScalarFunction& f, double t = 0.0) const;
   /// Coefficients of the constant function 1.
   Eigen::VectorXd constant_vector() const;
   /// Integral weights: integral of each basis function over the domain.
   Eigen::VectorXd mean_functional() const;

private:
   std::shared_ptr<const CartesianMesh> mesh_;
   int order_ = 0;
   int local_dim_ = 0;
   std::vector<std::array<int, 3>> degrees_;
};

std::shared_ptr<const VelocitySpace> build_velocity_space(std::shared_ptr<const CartesianMesh> mesh, int k);
/// Throws std::invalid_argument when `k` differs from the velocity order.
std::shared_ptr<const PressureSpace> build_pressure_space(const VelocitySpace& velocity, int k);

/// L2 norm of a discrete velocity.
double l2_norm(const VelocitySpace& space, const Eigen::VectorXd& u);

/// Cellwise coefficients of div u_h in the orthonormal pressure basis. Since
/// div RT_k = Q_k this vector is zero iff u_h is pointwise divergence free.
Eigen::VectorXd divergence_coefficients(const VelocitySpace& space, const Eigen::VectorXd& u);

/// Fields below this L2 norm are scaled as if they had this norm, so that
/// roundoff-level data is not reported as divergent.
inline constexpr double kDivergenceNormFloor = 1e-12;

/// max |divergence coefficient| / max(||u_h||_L2, kDivergenceNormFloor).
double scaled_divergence(const VelocitySpace& space, const Eigen::VectorXd& u);

} // namespace hdiv
