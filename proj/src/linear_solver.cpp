#include "hdiv/linear_solver.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <vector>

namespace hdiv {

namespace {

std::string lower(std::string s)
{
   std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
   return s;
}

Eigen::VectorXd gauge_vector(const AssembledOperators& ops, GaugeMode gauge)
{
   Eigen::VectorXd g = Eigen::VectorXd::Zero(ops.num_pressure());
   if (gauge == GaugeMode::MeanZero) { g = ops.pressure->mean_functional(); }
   else { g[0] = 1.0; }
   return g;
}

} // namespace

std::string solver_kind_name(SolverKind k)
{
   return k == SolverKind::Direct ? "direct" : "iterative";
}

SolverKind parse_solver_kind(const std::string& s)
{
   const std::string l = lower(s);
   if (l == "direct") { return SolverKind::Direct; }
   if (l == "iterative" || l == "gmres") { return SolverKind::Iterative; }
   throw std::invalid_argument("unknown linear solver '" + s + "' (expected direct or iterative)");
}

std::string gauge_name(GaugeMode g)
{
   switch (g)
   {
   case GaugeMode::MeanZero: return "mean-zero";
   case GaugeMode::PinnedDof: return "pinned";
   case GaugeMode::None: return "none";
   }
   return "none";
}

GaugeMode parse_gauge(const std::string& s)
{
   const std::string l = lower(s);
   if (l == "mean-zero" || l == "mean_zero" || l == "meanzero") { return GaugeMode::MeanZero; }
   if (l == "pinned" || l == "pinned-dof" || l == "pin") { return GaugeMode::PinnedDof; }
   if (l == "none") { return GaugeMode::None; }
   throw std::invalid_argument("unknown gauge '" + s + "' (expected mean-zero, pinned or none)");
}

SparseMatrix pattern_union(std::initializer_list<const SparseMatrix*> parts)
{
   if (parts.size() == 0) { throw std::invalid_argument("pattern_union needs at least one matrix"); }
   const SparseMatrix& first = **parts.begin();
   std::vector<Eigen::Triplet<double, int>> t;
   for (const SparseMatrix* m : parts)
   {
      if (m->rows() != first.rows() || m->cols() != first.cols())
      {
         throw std::invalid_argument("pattern_union: size mismatch");
      }
      for (int j = 0; j < m->outerSize(); ++j)
      {
         for (SparseMatrix::InnerIterator it(*m, j); it; ++it) { t.emplace_back(it.row(), j, 1.0); }
      }
   }
   SparseMatrix p(first.rows(), first.cols());
   p.setFromTriplets(t.begin(), t.end(), [](double a, double) { return a; });
   return p;
}

// ---------------------------------------------------------------------------
// Direct backend: LU of the bordered matrix.

struct SaddlePointSolver::Direct
{
   int nu = 0;
   int np = 0;
   SparseMatrix matrix;
   std::vector<int> velocity_positions;
   int lu_reuse = 0;
   mutable Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
   bool analyzed = false;
   bool factorized = false;
   mutable int age = 0;         // factorize() calls since the LU was computed
   mutable bool refresh = true;

   Direct(const AssembledOperators& ops, const SparseMatrix& pattern, GaugeMode gauge, bool constrain_velocity_mean,
          int reuse);
   void factorize(const SparseMatrix& k);
   void compute_lu() const;
   SaddleSolution solve(const Eigen::VectorXd& rhs_u, const Eigen::VectorXd& rhs_p) const;
};

SaddlePointSolver::Direct::Direct(const AssembledOperators& ops, const SparseMatrix& pattern, GaugeMode gauge,
                                  bool constrain_velocity_mean, int reuse)
   : nu(ops.num_velocity()), np(ops.num_pressure()), lu_reuse(std::max(0, reuse))
{
   const int d = ops.velocity->dim();
   const int nl = constrain_velocity_mean ? d : 0;
   const int n = nu + np + 1 + nl;

   std::vector<Eigen::Triplet<double, int>> t;
   t.reserve(pattern.nonZeros() + 2 * ops.div.nonZeros() + 2 * np + 2 * nl * nu);
   for (int j = 0; j < pattern.outerSize(); ++j)
   {
      for (SparseMatrix::InnerIterator it(pattern, j); it; ++it) { t.emplace_back(it.row(), j, 0.0); }
   }
   for (int j = 0; j < ops.div.outerSize(); ++j)
   {
      for (SparseMatrix::InnerIterator it(ops.div, j); it; ++it)
      {
         t.emplace_back(it.row(), nu + j, it.value());
         t.emplace_back(nu + j, it.row(), it.value());
      }
   }
   const Eigen::VectorXd g = gauge_vector(ops, gauge);
   const int lp = nu + np;
   for (int i = 0; i < np; ++i)
   {
      if (g[i] == 0.0) { continue; }
      t.emplace_back(nu + i, lp, g[i]);
      t.emplace_back(lp, nu + i, g[i]);
   }
   for (int c = 0; c < nl; ++c)
   {
      Vec3 e{0.0, 0.0, 0.0};
      e[c] = 1.0;
      const Eigen::VectorXd mc = ops.mass * ops.velocity->interpolate([e](double, const Point&) { return e; });
      for (int i = 0; i < nu; ++i)
      {
         if (mc[i] == 0.0) { continue; }
         t.emplace_back(i, lp + 1 + c, mc[i]);
         t.emplace_back(lp + 1 + c, i, mc[i]);
      }
   }
   matrix.resize(n, n);
   matrix.setFromTriplets(t.begin(), t.end());
   matrix.makeCompressed();

   for (int j = 0; j < nu; ++j)
   {
      for (int p = matrix.outerIndexPtr()[j]; p < matrix.outerIndexPtr()[j + 1]; ++p)
      {
         if (matrix.innerIndexPtr()[p] < nu) { velocity_positions.push_back(p); }
      }
   }
}

void SaddlePointSolver::Direct::factorize(const SparseMatrix& k)
{
   double* values = matrix.valuePtr();
   for (int p : velocity_positions) { values[p] = 0.0; }
   const int* outer = matrix.outerIndexPtr();
   const int* inner = matrix.innerIndexPtr();
   for (int j = 0; j < k.outerSize(); ++j)
   {
      const int* begin = inner + outer[j];
      const int* end = inner + outer[j + 1];
      for (SparseMatrix::InnerIterator it(k, j); it; ++it)
      {
         const int* pos = std::lower_bound(begin, end, static_cast<int>(it.row()));
         if (pos == end || *pos != it.row())
         {
            if (it.value() == 0.0) { continue; }
            throw std::logic_error("velocity block entry outside the solver template");
         }
         values[pos - inner] += it.value();
      }
   }
   factorized = true;
   if (refresh || age >= lu_reuse) { compute_lu(); }
   else { ++age; }
}

void SaddlePointSolver::Direct::compute_lu() const
{
   if (!analyzed)
   {
      lu.analyzePattern(matrix);
      const_cast<bool&>(analyzed) = true;
   }
   lu.factorize(matrix);
   if (lu.info() != Eigen::Success) { throw LinearSolveError("saddle-point matrix is singular: " + lu.lastErrorMessage()); }
   age = 0;
   refresh = false;
}

SaddleSolution SaddlePointSolver::Direct::solve(const Eigen::VectorXd& rhs_u, const Eigen::VectorXd& rhs_p) const
{
   if (!factorized) { throw std::logic_error("solve called before factorize"); }
   Eigen::VectorXd rhs = Eigen::VectorXd::Zero(matrix.rows());
   rhs.head(nu) = rhs_u;
   rhs.segment(nu, np) = rhs_p;
   const double scale = std::max(rhs.norm(), 1e-300);
   Eigen::VectorXd x;
   Eigen::VectorXd r;
   int iterations = 0;
   if (age > 0)
   {
      // Refinement preconditioned by an older factorization.
      constexpr int kMaxRefine = 25;
      x = Eigen::VectorXd::Zero(rhs.size());
      r = rhs;
      double prev = r.norm();
      while (prev > 1e-14 * scale && iterations < kMaxRefine)
      {
         x += lu.solve(r);
         r = rhs - matrix * x;
         ++iterations;
         const double now = r.norm();
         if (!(now < 0.7 * prev)) { break; }
         prev = now;
      }
      if (!(r.norm() <= 1e-14 * scale) || !x.allFinite()) { compute_lu(); }
      else if (iterations > 6) { refresh = true; }
   }
   if (age == 0)
   {
      x = lu.solve(rhs);
      if (!x.allFinite()) { throw LinearSolveError("saddle-point solve produced non-finite values"); }
      r = rhs - matrix * x;
      for (int it = 0; it < 2 && r.norm() > 1e-15 * scale; ++it)
      {
         x += lu.solve(r);
         r = rhs - matrix * x;
      }
   }
   SaddleSolution s;
   s.iterations = iterations;
   s.u = x.head(nu);
   s.p = x.segment(nu, np);
   s.residual = rhs.norm() > 0.0 ? r.norm() / scale : r.norm();
   return s;
}

// ---------------------------------------------------------------------------
// Iterative backend: right-preconditioned restarted GMRES. The preconditioner
// solves the local velocity-pressure problem of every cell (all velocity dofs
// of the cell plus its pressure dofs); a face dof shared by two cells takes
// the value of the first cell that lists it.

struct SaddlePointSolver::Iterative
{
   int nu = 0;
   int np = 0;
   int pdim = 0;
   SolverOptions opt;
   GaugeMode gauge;
   const SparseMatrix* div = nullptr;
   SparseMatrix div_t;
   Eigen::VectorXd gauge_g;
   Eigen::VectorXd constant;

   SparseMatrix k;
   std::vector<std::vector<int>> patch_dofs;
   std::vector<std::vector<char>> patch_owns;
   std::vector<Eigen::PartialPivLU<Eigen::MatrixXd>> patch_lu;
   bool factorized = false;

   Iterative(const AssembledOperators& ops, GaugeMode g, SolverOptions o);
   void factorize(const SparseMatrix& kk);
   void apply_preconditioner(const Eigen::VectorXd& r, Eigen::VectorXd& z) const;
   void apply_system(const Eigen::VectorXd& x, Eigen::VectorXd& y) const;
   SaddleSolution solve(const Eigen::VectorXd& rhs_u, const Eigen::VectorXd& rhs_p) const;
};

SaddlePointSolver::Iterative::Iterative(const AssembledOperators& ops, GaugeMode g, SolverOptions o)
   : nu(ops.num_velocity()), np(ops.num_pressure()), pdim(ops.pressure->local_dim()), opt(o), gauge(g),
     div(&ops.div)
{
   div_t = ops.div.transpose();
   gauge_g = gauge_vector(ops, gauge);
   constant = ops.pressure->constant_vector();
   const VelocitySpace& v = *ops.velocity;
   const int nc = v.mesh().num_cells();
   std::vector<char> taken(nu, 0);
   patch_dofs.resize(nc);
   patch_owns.resize(nc);
   patch_lu.resize(nc);
   for (int c = 0; c < nc; ++c)
   {
      for (int dof : v.cell_dofs(c))
      {
         if (dof < 0) { continue; }
         patch_dofs[c].push_back(dof);
         patch_owns[c].push_back(taken[dof] ? 0 : 1);
         taken[dof] = 1;
      }
   }
}

void SaddlePointSolver::Iterative::factorize(const SparseMatrix& kk)
{
   k = kk;
   k.makeCompressed();
   std::vector<int> local(nu, -1);
   for (std::size_t c = 0; c < patch_dofs.size(); ++c)
   {
      const std::vector<int>& dofs = patch_dofs[c];
      const int n = static_cast<int>(dofs.size());
      for (int i = 0; i < n; ++i) { local[dofs[i]] = i; }
      Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n + pdim, n + pdim);
      for (int j = 0; j < n; ++j)
      {
         for (SparseMatrix::InnerIterator it(k, dofs[j]); it; ++it)
         {
            const int i = local[it.row()];
            if (i >= 0) { a(i, j) = it.value(); }
         }
      }
      const int p0 = static_cast<int>(c) * pdim;
      for (int j = 0; j < pdim; ++j)
      {
         for (SparseMatrix::InnerIterator it(*div, p0 + j); it; ++it)
         {
            const int i = local[it.row()];
            if (i < 0) { continue; }
            a(i, n + j) = it.value();
            a(n + j, i) = it.value();
         }
      }
      patch_lu[c].compute(a);
      for (int i = 0; i < n; ++i) { local[dofs[i]] = -1; }
   }
   factorized = true;
}

void SaddlePointSolver::Iterative::apply_preconditioner(const Eigen::VectorXd& r, Eigen::VectorXd& z) const
{
   z.setZero(nu + np);
   Eigen::VectorXd rl;
   for (std::size_t c = 0; c < patch_dofs.size(); ++c)
   {
      const std::vector<int>& dofs = patch_dofs[c];
      const int n = static_cast<int>(dofs.size());
      const int p0 = nu + static_cast<int>(c) * pdim;
      rl.resize(n + pdim);
      for (int i = 0; i < n; ++i) { rl[i] = r[dofs[i]]; }
      rl.tail(pdim) = r.segment(p0, pdim);
      const Eigen::VectorXd zl = patch_lu[c].solve(rl);
      for (int i = 0; i < n; ++i)
      {
         if (patch_owns[c][i]) { z[dofs[i]] = zl[i]; }
      }
      z.segment(p0, pdim) = zl.tail(pdim);
   }
}

void SaddlePointSolver::Iterative::apply_system(const Eigen::VectorXd& x, Eigen::VectorXd& y) const
{
   y.resize(nu + np);
   y.head(nu) = k * x.head(nu) + (*div) * x.tail(np);
   y.tail(np) = div_t * x.head(nu);
}

SaddleSolution SaddlePointSolver::Iterative::solve(const Eigen::VectorXd& rhs_u, const Eigen::VectorXd& rhs_p) const
{
   if (!factorized) { throw std::logic_error("solve called before factorize"); }
   const int n = nu + np;
   Eigen::VectorXd rhs(n);
   rhs.head(nu) = rhs_u;
   rhs.tail(np) = rhs_p;
   const double bnorm = rhs.norm();
   SaddleSolution s;
   if (bnorm == 0.0)
   {
      s.u = Eigen::VectorXd::Zero(nu);
      s.p = Eigen::VectorXd::Zero(np);
      return s;
   }

   // Restarted right-preconditioned GMRES with modified Gram-Schmidt.
   const int m = std::max(1, opt.restart);
   Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
   Eigen::MatrixXd basis(n, m + 1);
   Eigen::MatrixXd zs(n, m);
   Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m + 1, m);
   Eigen::VectorXd cs(m), sn(m), gvec(m + 1);
   Eigen::VectorXd w, z, ax;
   int total = 0;
   double rnorm = 0.0;
   while (true)
   {
      apply_system(x, ax);
      Eigen::VectorXd r = rhs - ax;
      rnorm = r.norm();
      if (rnorm <= opt.tolerance * bnorm || total >= opt.max_iterations) { break; }
      basis.col(0) = r / rnorm;
      gvec.setZero();
      gvec[0] = rnorm;
      h.setZero();
      int j = 0;
      for (; j < m && total < opt.max_iterations; ++j, ++total)
      {
         Eigen::VectorXd vj = basis.col(j);
         apply_preconditioner(vj, z);
         zs.col(j) = z;
         apply_system(z, w);
         for (int i = 0; i <= j; ++i)
         {
            h(i, j) = w.dot(basis.col(i));
            w -= h(i, j) * basis.col(i);
         }
         h(j + 1, j) = w.norm();
         if (h(j + 1, j) > 0.0) { basis.col(j + 1) = w / h(j + 1, j); }
         for (int i = 0; i < j; ++i)
         {
            const double t = cs[i] * h(i, j) + sn[i] * h(i + 1, j);
            h(i + 1, j) = -sn[i] * h(i, j) + cs[i] * h(i + 1, j);
            h(i, j) = t;
         }
         const double denom = std::hypot(h(j, j), h(j + 1, j));
         cs[j] = denom > 0.0 ? h(j, j) / denom : 1.0;
         sn[j] = denom > 0.0 ? h(j + 1, j) / denom : 0.0;
         h(j, j) = denom;
         h(j + 1, j) = 0.0;
         gvec[j + 1] = -sn[j] * gvec[j];
         gvec[j] = cs[j] * gvec[j];
         // The recurrence overestimates accuracy near roundoff; stop a bit early
         // and let the outer loop check the true residual.
         if (std::abs(gvec[j + 1]) <= 0.5 * opt.tolerance * bnorm || h(j, j) == 0.0)
         {
            ++j;
            ++total;
            break;
         }
      }
      if (j == 0) { break; }
      const Eigen::VectorXd y =
         h.topLeftCorner(j, j).triangularView<Eigen::Upper>().solve(gvec.head(j));
      x += zs.leftCols(j) * y;
   }
   if (!x.allFinite()) { throw LinearSolveError("GMRES produced non-finite values"); }

   s.u = x.head(nu);
   s.p = x.tail(np);
   if (gauge == GaugeMode::MeanZero) { s.p -= (gauge_g.dot(s.p) / gauge_g.dot(constant)) * constant; }
   else { s.p -= (s.p[0] / constant[0]) * constant; }
   s.residual = rnorm / bnorm;
   s.iterations = total;
   return s;
}

// ---------------------------------------------------------------------------

SaddlePointSolver::SaddlePointSolver(const AssembledOperators& ops, const SparseMatrix& pattern, GaugeMode gauge,
                                     bool constrain_velocity_mean, SolverOptions options)
   : options_(options)
{
   if (gauge == GaugeMode::None)
   {
      throw GaugeMissingError("pressure is only determined up to a constant: a gauge (mean-zero or pinned dof) is "
                              "required");
   }
   if (pattern.rows() != ops.num_velocity() || pattern.cols() != ops.num_velocity())
   {
      throw std::invalid_argument("velocity pattern has the wrong size");
   }
   if (options_.kind == SolverKind::Direct)
   {
      direct_ = std::make_unique<Direct>(ops, pattern, gauge, constrain_velocity_mean, options_.lu_reuse);
   }
   else
   {
      if (constrain_velocity_mean)
      {
         throw std::invalid_argument("the iterative solver does not support the velocity-mean constraint");
      }
      if (!(options_.tolerance > 0.0) || options_.restart < 1 || options_.max_iterations < 1)
      {
         throw std::invalid_argument("invalid iterative solver options");
      }
      iterative_ = std::make_unique<Iterative>(ops, gauge, options_);
   }
}

SaddlePointSolver::~SaddlePointSolver() = default;

void SaddlePointSolver::factorize(const SparseMatrix& k)
{
   const int nu = direct_ ? direct_->nu : iterative_->nu;
   if (k.rows() != nu || k.cols() != nu) { throw std::invalid_argument("velocity block has the wrong size"); }
   if (direct_) { direct_->factorize(k); }
   else { iterative_->factorize(k); }
}

SaddleSolution SaddlePointSolver::solve(const Eigen::VectorXd& rhs_u) const
{
   const int np = direct_ ? direct_->np : iterative_->np;
   return solve(rhs_u, Eigen::VectorXd::Zero(np));
}

SaddleSolution SaddlePointSolver::solve(const Eigen::VectorXd& rhs_u, const Eigen::VectorXd& rhs_p) const
{
   const int nu = direct_ ? direct_->nu : iterative_->nu;
   const int np = direct_ ? direct_->np : iterative_->np;
   if (rhs_u.size() != nu || rhs_p.size() != np) { throw std::invalid_argument("right-hand side has the wrong size"); }
   return direct_ ? direct_->solve(rhs_u, rhs_p) : iterative_->solve(rhs_u, rhs_p);
}

} // namespace hdiv
