#pragma once

// Solvers for the velocity-pressure saddle-point system
//
//   [ K    B   0   Mc ] [u  ]   [f]
//   [ B^T  0   g   0  ] [p  ] = [0]
//   [ 0    g^T 0   0  ] [l_p]   [0]
//   [ Mc^T 0   0   0  ] [l_u]   [0]
//
// g fixes the pressure constant (mean-zero functional or a unit vector), the
// optional Mc block fixes the velocity mean when K itself is singular
// (steady Stokes on a fully periodic box).
//
// Two backends share this interface: a sparse LU of the bordered matrix, and
// restarted GMRES on the unbordered system with a cell-wise saddle-point
// Schwarz preconditioner; the iterative backend fixes the gauge afterwards.

#include "hdiv/forms.hpp"

#include <Eigen/SparseCore>

#include <initializer_list>
#include <memory>
#include <stdexcept>
#include <string>

namespace hdiv {

enum class GaugeMode { MeanZero, PinnedDof, None };
enum class SolverKind { Direct, Iterative };

std::string solver_kind_name(SolverKind k);
/// "direct" or "iterative".
SolverKind parse_solver_kind(const std::string& s);
std::string gauge_name(GaugeMode g);
/// "mean-zero", "pinned" or "none".
GaugeMode parse_gauge(const std::string& s);

/// Raised when a saddle-point system with a constant pressure mode is set up without a gauge.
class GaugeMissingError : public std::runtime_error
{
public:
   using std::runtime_error::runtime_error;
};

class LinearSolveError : public std::runtime_error
{
public:
   using std::runtime_error::runtime_error;
};

struct SaddleSolution
{
   Eigen::VectorXd u;
   Eigen::VectorXd p;
   double residual = 0.0;  ///< relative residual of the momentum/continuity equations
   int iterations = 0;     ///< Krylov iterations (0 for the direct backend)
};

/// Structural union of several matrices of equal size (all stored values 1).
SparseMatrix pattern_union(std::initializer_list<const SparseMatrix*> parts);

struct SolverOptions
{
   SolverKind kind = SolverKind::Direct;
   double tolerance = 1e-13;  ///< relative residual target of the iterative backend
   int restart = 80;
   int max_iterations = 3000;
   /// Direct backend: number of later factorize() calls that may reuse an LU
   /// factorization as the preconditioner of iterative refinement (0: always
   /// refactor). A slow or failed refinement forces a fresh factorization.
   int lu_reuse = 0;
};

class SaddlePointSolver
{
public:
   /// `pattern` fixes the sparsity of every velocity block passed to factorize().
   SaddlePointSolver(const AssembledOperators& ops, const SparseMatrix& pattern, GaugeMode gauge,
                     bool constrain_velocity_mean, SolverOptions options = {});
   ~SaddlePointSolver();
   SaddlePointSolver(const SaddlePointSolver&) = delete;
   SaddlePointSolver& operator=(const SaddlePointSolver&) = delete;

   /// Prepares solves with velocity block `k` (pattern contained in the template).
   void factorize(const SparseMatrix& k);
   SaddleSolution solve(const Eigen::VectorXd& rhs_u) const;
   /// Solve with a continuity right-hand side: B^T u = rhs_p.
   SaddleSolution solve(const Eigen::VectorXd& rhs_u, const Eigen::VectorXd& rhs_p) const;

   const SolverOptions& options() const { return options_; }

private:
   struct Direct;
   struct Iterative;
   std::unique_ptr<Direct> direct_;
   std::unique_ptr<Iterative> iterative_;
   SolverOptions options_;
};

} // namespace hdiv
