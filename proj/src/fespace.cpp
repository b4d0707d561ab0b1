#include "hdiv/fespace.hpp"

#include "hdiv/polynomials.hpp"

#include <cmath>
#include <stdexcept>

namespace hdiv {

namespace {

int ipow(int base, int exp)
{
   int r = 1;
   for (int i = 0; i < exp; ++i) { r *= base; }
   return r;
}

struct PointJets
{
   // jets[a][i]: family member i along axis a
   std::array<std::vector<Jet1D>, 3> lob;
   std::array<std::vector<Jet1D>, 3> leg;
};

PointJets point_jets(const Point& s, int dim, int k)
{
   PointJets pj;
   for (int a = 0; a < dim; ++a)
   {
      pj.lob[a].resize(k + 2);
      pj.leg[a].resize(k + 1);
      for (int m = 0; m <= k + 1; ++m) { pj.lob[a][m] = lobatto(m, s[a]); }
      for (int n = 0; n <= k; ++n) { pj.leg[a][n] = orthonormal_legendre(n, s[a]); }
   }
   return pj;
}

} // namespace

Point VelocitySpace::to_reference(const Cell& cell, const Point& x)
{
   Point r{0.0, 0.0, 0.0};
   for (int a = 0; a < 3; ++a)
   {
      const double w = cell.width(a);
      r[a] = w > 0.0 ? (x[a] - cell.lower[a]) / w : 0.0;
   }
   return r;
}

Point VelocitySpace::to_physical(const Cell& cell, const Point& ref)
{
   Point x{0.0, 0.0, 0.0};
   for (int a = 0; a < 3; ++a) { x[a] = cell.lower[a] + ref[a] * cell.width(a); }
   return x;
}

double VelocitySpace::jacobian(const Cell& cell, int dim)
{
   double j = 1.0;
   for (int a = 0; a < dim; ++a) { j *= cell.width(a); }
   return j;
}

VelocitySpace::VelocitySpace(std::shared_ptr<const CartesianMesh> mesh, int order)
   : mesh_(std::move(mesh)), order_(order)
{
   if (order_ < 0) { throw std::invalid_argument("velocity order must be >= 0"); }
   const int d = dim();
   const int k = order_;
   dofs_per_face_ = ipow(k + 1, d - 1);
   interior_per_cell_ = d * k * dofs_per_face_;

   for (int c = 0; c < d; ++c)
   {
      const auto tang = tangential_axes(c, d);
      for (int m = 0; m <= k + 1; ++m)
      {
         for (int t = 0; t < dofs_per_face_; ++t)
         {
            LocalBasisFunction f;
            f.component = c;
            f.degree[c] = m;
            if (d >= 2) { f.degree[tang[0]] = t % (k + 1); }
            if (d >= 3) { f.degree[tang[1]] = t / (k + 1); }
            f.local_face = m <= 1 ? 2 * c + m : -1;
            f.tangential_index = m <= 1 ? t : (m - 2) * dofs_per_face_ + t;
            basis_.push_back(f);
         }
      }
   }

   const auto& faces = mesh_->faces();
   face_offset_.assign(faces.size(), -1);
   int counter = 0;
   for (const Face& f : faces)
   {
      if (f.is_wall()) { continue; }
      face_offset_[f.id] = counter;
      counter += dofs_per_face_;
   }
   num_face_dofs_ = counter;
   num_dofs_ = num_face_dofs_ + interior_per_cell_ * mesh_->num_cells();

   const int nloc = local_dim();
   dof_map_.assign(static_cast<std::size_t>(nloc) * mesh_->num_cells(), -1);
   for (const Cell& cell : mesh_->cells())
   {
      int bubble = 0;
      for (int j = 0; j < nloc; ++j)
      {
         const auto& bf = basis_[j];
         int g = -1;
         if (bf.local_face >= 0)
         {
            const int off = face_offset_[cell.faces[bf.local_face]];
            if (off >= 0) { g = off + bf.tangential_index; }
         }
         else
         {
            g = num_face_dofs_ + cell.id * interior_per_cell_ + bubble++;
         }
         dof_map_[static_cast<std::size_t>(cell.id) * nloc + j] = g;
      }
   }

   // Reference moment matrices for the interior interpolation functionals:
   // component c bubbles tested against Q_{k-1} (along c) x Q_k (tangential).
   if (k >= 1)
   {
      const QuadratureRule rule = gauss_rule_points(k + 3, d);
      const ReferenceTable table = tabulate(rule.points);
      for (int c = 0; c < d; ++c)
      {
         const int nb = k * dofs_per_face_;
         Eigen::MatrixXd g(nb, nb);
         g.setZero();
         std::vector<int> bubbles;
         for (int j = 0; j < nloc; ++j)
         {
            if (basis_[j].component == c && basis_[j].local_face < 0) { bubbles.push_back(j); }
         }
         for (int q = 0; q < rule.size(); ++q)
         {
            const PointJets pj = point_jets(rule.points[q], d, k);
            for (int row = 0; row < nb; ++row)
            {
               // Test function with the same multi-index layout, Legendre degree m'-2 along c.
               const auto& tf = basis_[bubbles[row]];
               double test = orthonormal_legendre(tf.degree[c] - 2, rule.points[q][c]).value;
               for (int b = 0; b < d; ++b)
               {
                  if (b != c) { test *= pj.leg[b][tf.degree[b]].value; }
               }
               for (int col = 0; col < nb; ++col)
               {
                  g(row, col) += rule.weights[q] * test * table.value(bubbles[col], q);
               }
            }
         }
         bubble_moment_lu_.emplace_back(g);
      }
   }
}

std::span<const int> VelocitySpace::cell_dofs(int cell) const
{
   const std::size_t nloc = basis_.size();
   return {dof_map_.data() + static_cast<std::size_t>(cell) * nloc, nloc};
}

double VelocitySpace::piola_scale(const Cell& cell, int component) const
{
   double s = 1.0;
   for (int b = 0; b < dim(); ++b)
   {
      if (b != component) { s /= cell.width(b); }
   }
   return s;
}

ReferenceTable VelocitySpace::tabulate(std::span<const Point> ref_points, bool with_hessian) const
{
   const int d = dim();
   const int k = order_;
   const int nloc = local_dim();
   const int np = static_cast<int>(ref_points.size());
   ReferenceTable t;
   t.num_points = np;
   t.has_hessian = with_hessian;
   t.value.resize(nloc, np);
   for (int a = 0; a < 3; ++a)
   {
      t.grad[a].setZero(nloc, np);
      if (with_hessian)
      {
         for (int b = 0; b < 3; ++b) { t.hess[a][b].setZero(nloc, np); }
      }
   }
   for (int q = 0; q < np; ++q)
   {
      const PointJets pj = point_jets(ref_points[q], d, k);
      for (int j = 0; j < nloc; ++j)
      {
         const auto& bf = basis_[j];
         std::array<const Jet1D*, 3> f{};
         for (int a = 0; a < d; ++a)
         {
            f[a] = a == bf.component ? &pj.lob[a][bf.degree[a]] : &pj.leg[a][bf.degree[a]];
         }
         double v = 1.0;
         for (int a = 0; a < d; ++a) { v *= f[a]->value; }
         t.value(j, q) = v;
         for (int a = 0; a < d; ++a)
         {
            double g = 1.0;
            for (int b = 0; b < d; ++b) { g *= b == a ? f[b]->d1 : f[b]->value; }
            t.grad[a](j, q) = g;
         }
         if (with_hessian)
         {
            for (int a = 0; a < d; ++a)
            {
               for (int b = 0; b < d; ++b)
               {
                  double h = 1.0;
                  for (int e = 0; e < d; ++e)
                  {
                     if (a == b && e == a) { h *= f[e]->d2; }
                     else if (e == a || e == b) { h *= f[e]->d1; }
                     else { h *= f[e]->value; }
                  }
                  t.hess[a][b](j, q) = h;
               }
            }
         }
      }
   }
   return t;
}

BasisEvaluation VelocitySpace::eval_velocity_basis(int cell_id, std::span<const Point> ref_points) const
{
   const Cell& cell = mesh_->cell(cell_id);
   const int d = dim();
   const ReferenceTable t = tabulate(ref_points);
   BasisEvaluation e;
   e.cell = cell_id;
   e.value = t.value;
   e.divergence.resize(t.value.rows(), t.value.cols());
   for (int a = 0; a < 3; ++a) { e.grad[a].setZero(t.value.rows(), t.value.cols()); }
   const double detj = jacobian(cell, d);
   for (int j = 0; j < local_dim(); ++j)
   {
      const int c = basis_[j].component;
      const double s = piola_scale(cell, c);
      e.component.push_back(c);
      e.value.row(j) *= s;
      for (int a = 0; a < d; ++a) { e.grad[a].row(j) = t.grad[a].row(j) * (s / cell.width(a)); }
      e.divergence.row(j) = t.grad[c].row(j) / detj;
   }
   for (const Point& p : ref_points)
   {
      for (int a = 0; a < d; ++a)
      {
         if (p[a] < -1e-12 || p[a] > 1.0 + 1e-12)
         {
            throw std::out_of_range("eval_velocity_basis: point outside the reference cell");
         }
      }
   }
   return e;
}

Eigen::VectorXd VelocitySpace::gather(const Eigen::VectorXd& coeffs, int cell) const
{
   const auto dofs = cell_dofs(cell);
   Eigen::VectorXd local(dofs.size());
   for (std::size_t j = 0; j < dofs.size(); ++j) { local[j] = dofs[j] >= 0 ? coeffs[dofs[j]] : 0.0; }
   return local;
}

FieldJet VelocitySpace::evaluate(const Eigen::VectorXd& coeffs, int cell_id, const Point& ref,
                                 bool with_hessian) const
{
   const Cell& cell = mesh_->cell(cell_id);
   const int d = dim();
   const PointJets pj = point_jets(ref, d, order_);
   const auto dofs = cell_dofs(cell_id);
   FieldJet out;
   std::array<double, 3> scale{};
   for (int c = 0; c < d; ++c) { scale[c] = piola_scale(cell, c); }
   for (int j = 0; j < local_dim(); ++j)
   {
      if (dofs[j] < 0) { continue; }
      const double coef = coeffs[dofs[j]];
      if (coef == 0.0) { continue; }
      const auto& bf = basis_[j];
      const int c = bf.component;
      std::array<const Jet1D*, 3> f{};
      for (int a = 0; a < d; ++a)
      {
         f[a] = a == c ? &pj.lob[a][bf.degree[a]] : &pj.leg[a][bf.degree[a]];
      }
      const double w = coef * scale[c];
      double v = 1.0;
      for (int a = 0; a < d; ++a) { v *= f[a]->value; }
      out.value[c] += w * v;
      for (int a = 0; a < d; ++a)
      {
         double g = 1.0;
         for (int b = 0; b < d; ++b) { g *= b == a ? f[b]->d1 : f[b]->value; }
         out.grad[c][a] += w * g / cell.width(a);
      }
      if (with_hessian)
      {
         for (int a = 0; a < d; ++a)
         {
            for (int b = 0; b < d; ++b)
            {
               double h = 1.0;
               for (int e = 0; e < d; ++e)
               {
                  if (a == b && e == a) { h *= f[e]->d2; }
                  else if (e == a || e == b) { h *= f[e]->d1; }
                  else { h *= f[e]->value; }
               }
               out.hess[c][a][b] += w * h / (cell.width(a) * cell.width(b));
            }
         }
      }
   }
   return out;
}

FieldJet VelocitySpace::evaluate_at(const Eigen::VectorXd& coeffs, const Point& x, bool with_hessian) const
{
   const int cell = mesh_->locate(x);
   return evaluate(coeffs, cell, to_reference(mesh_->cell(cell), x), with_hessian);
}

Eigen::VectorXd VelocitySpace::interpolate(const VectorFunction& field, double t) const
{
   const int d = dim();
   const int k = order_;
   Eigen::VectorXd u = Eigen::VectorXd::Zero(num_dofs_);
   const int nq = data_quadrature_points(k);

   // Face normal moments against the orthonormal tangential Legendre basis.
   const QuadratureRule frule = gauss_rule_points(nq, d - 1);
   for (const Face& f : mesh_->faces())
   {
      if (f.is_wall()) { continue; }
      const FaceFrame frame = mesh_->face_trace_frame(f);
      const int off = face_offset_[f.id];
      for (int q = 0; q < frule.size(); ++q)
      {
         const Point x = frame.map({frule.points[q][0], frule.points[q][1]});
         const double un = field(t, x)[f.axis];
         for (int tt = 0; tt < dofs_per_face_; ++tt)
         {
            double test = 1.0;
            if (d >= 2) { test *= orthonormal_legendre(tt % (k + 1), frule.points[q][0]).value; }
            if (d >= 3) { test *= orthonormal_legendre(tt / (k + 1), frule.points[q][1]).value; }
            u[off + tt] += f.area * frule.weights[q] * un * test;
         }
      }
   }
   if (k == 0) { return u; }

   // Interior moments, cell by cell.
   const QuadratureRule vrule = gauss_rule_points(nq, d);
   const ReferenceTable table = tabulate(vrule.points);
   const int nloc = local_dim();
   std::vector<std::vector<double>> test_values(d);
   for (int c = 0; c < d; ++c)
   {
      std::vector<int> bubbles;
      for (int j = 0; j < nloc; ++j)
      {
         if (basis_[j].component == c && basis_[j].local_face < 0) { bubbles.push_back(j); }
      }
      test_values[c].resize(bubbles.size() * vrule.size());
      for (int q = 0; q < vrule.size(); ++q)
      {
         const PointJets pj = point_jets(vrule.points[q], d, k);
         for (std::size_t row = 0; row < bubbles.size(); ++row)
         {
            const auto& tf = basis_[bubbles[row]];
            double test = orthonormal_legendre(tf.degree[c] - 2, vrule.points[q][c]).value;
            for (int b = 0; b < d; ++b)
            {
               if (b != c) { test *= pj.leg[b][tf.degree[b]].value; }
            }
            test_values[c][row * vrule.size() + q] = test;
         }
      }
   }

   for (const Cell& cell : mesh_->cells())
   {
      const auto dofs = cell_dofs(cell.id);
      std::vector<Vec3> values(vrule.size());
      for (int q = 0; q < vrule.size(); ++q) { values[q] = field(t, to_physical(cell, vrule.points[q])); }
      for (int c = 0; c < d; ++c)
      {
         const double s = piola_scale(cell, c);
         // Reference-space residual of component c after the face contributions.
         std::vector<double> resid(vrule.size());
         for (int q = 0; q < vrule.size(); ++q) { resid[q] = values[q][c] / s; }
         std::vector<int> bubbles;
         for (int j = 0; j < nloc; ++j)
         {
            const auto& bf = basis_[j];
            if (bf.component != c) { continue; }
            if (bf.local_face < 0) { bubbles.push_back(j); continue; }
            if (dofs[j] < 0) { continue; }
            const double coef = u[dofs[j]];
            for (int q = 0; q < vrule.size(); ++q) { resid[q] -= coef * table.value(j, q); }
         }
         const int nb = static_cast<int>(bubbles.size());
         Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nb);
         for (int row = 0; row < nb; ++row)
         {
            double acc = 0.0;
            for (int q = 0; q < vrule.size(); ++q)
            {
               acc += vrule.weights[q] * resid[q] * test_values[c][row * vrule.size() + q];
            }
            rhs[row] = acc;
         }
         const Eigen::VectorXd coef = bubble_moment_lu_[c].solve(rhs);
         for (int row = 0; row < nb; ++row) { u[dofs[bubbles[row]]] = coef[row]; }
      }
   }
   return u;
}

// ---------------------------------------------------------------------------

PressureSpace::PressureSpace(std::shared_ptr<const CartesianMesh> mesh, int order)
   : mesh_(std::move(mesh)), order_(order)
{
   if (order_ < 0) { throw std::invalid_argument("pressure order must be >= 0"); }
   const int d = dim();
   local_dim_ = ipow(order_ + 1, d);
   for (int i = 0; i < local_dim_; ++i)
   {
      std::array<int, 3> deg{0, 0, 0};
      int r = i;
      for (int a = 0; a < d; ++a)
      {
         deg[a] = r % (order_ + 1);
         r /= order_ + 1;
      }
      degrees_.push_back(deg);
   }
}

Eigen::MatrixXd PressureSpace::tabulate(int cell_id, std::span<const Point> ref_points) const
{
   const Cell& cell = mesh_->cell(cell_id);
   const int d = dim();
   const double norm = 1.0 / std::sqrt(VelocitySpace::jacobian(cell, d));
   Eigen::MatrixXd t(local_dim_, ref_points.size());
   for (std::size_t q = 0; q < ref_points.size(); ++q)
   {
      std::array<std::vector<double>, 3> leg;
      for (int a = 0; a < d; ++a)
      {
         for (int n = 0; n <= order_; ++n) { leg[a].push_back(orthonormal_legendre(n, ref_points[q][a]).value); }
      }
      for (int i = 0; i < local_dim_; ++i)
      {
         double v = norm;
         for (int a = 0; a < d; ++a) { v *= leg[a][degrees_[i][a]]; }
         t(i, q) = v;
      }
   }
   return t;
}

double PressureSpace::evaluate(const Eigen::VectorXd& coeffs, int cell, const Point& ref) const
{
   const Eigen::MatrixXd t = tabulate(cell, std::span<const Point>(&ref, 1));
   return coeffs.segment(cell_offset(cell), local_dim_).dot(t.col(0));
}

Eigen::VectorXd PressureSpace::project(const ScalarFunction& f, double t) const
{
   const int d = dim();
   const QuadratureRule rule = gauss_rule_points(data_quadrature_points(order_), d);
   Eigen::VectorXd p(num_dofs());
   for (const Cell& cell : mesh_->cells())
   {
      const Eigen::MatrixXd tab = tabulate(cell.id, rule.points);
      const double detj = VelocitySpace::jacobian(cell, d);
      Eigen::VectorXd acc = Eigen::VectorXd::Zero(local_dim_);
      for (int q = 0; q < rule.size(); ++q)
      {
         acc += (rule.weights[q] * detj * f(t, VelocitySpace::to_physical(cell, rule.points[q]))) * tab.col(q);
      }
      p.segment(cell_offset(cell.id), local_dim_) = acc;
   }
   return p;
}

Eigen::VectorXd PressureSpace::constant_vector() const
{
   Eigen::VectorXd p = Eigen::VectorXd::Zero(num_dofs());
   for (const Cell& cell : mesh_->cells())
   {
      p[cell_offset(cell.id)] = std::sqrt(VelocitySpace::jacobian(cell, dim()));
   }
   return p;
}

Eigen::VectorXd PressureSpace::mean_functional() const
{
   // integral of q_i over K is sqrt(|K|) for the constant mode and 0 otherwise.
   return constant_vector();
}

// ---------------------------------------------------------------------------

std::shared_ptr<const VelocitySpace> build_velocity_space(std::shared_ptr<const CartesianMesh> mesh, int k)
{
   if (k < 0) { throw std::invalid_argument("velocity order must be >= 0"); }
   return std::make_shared<const VelocitySpace>(std::move(mesh), k);
}

std::shared_ptr<const PressureSpace> build_pressure_space(const VelocitySpace& velocity, int k)
{
   if (k != velocity.order())
   {
      throw std::invalid_argument("pressure order " + std::to_string(k) + " does not match velocity order " +
                                  std::to_string(velocity.order()));
   }
   return std::make_shared<const PressureSpace>(velocity.mesh_ptr(), k);
}

double l2_norm(const VelocitySpace& space, const Eigen::VectorXd& u)
{
   const int d = space.dim();
   const QuadratureRule rule = gauss_rule(form_quadrature_degree(space.order()), d);
   const ReferenceTable table = space.tabulate(rule.points);
   double acc = 0.0;
   for (const Cell& cell : space.mesh().cells())
   {
      const Eigen::VectorXd local = space.gather(u, cell.id);
      const double detj = VelocitySpace::jacobian(cell, d);
      for (int c = 0; c < d; ++c)
      {
         const double s = space.piola_scale(cell, c);
         Eigen::VectorXd lc = local;
         for (int j = 0; j < space.local_dim(); ++j)
         {
            if (space.local_basis()[j].component != c) { lc[j] = 0.0; }
         }
         const Eigen::VectorXd vals = table.value.transpose() * lc;
         for (int q = 0; q < rule.size(); ++q) { acc += rule.weights[q] * detj * s * s * vals[q] * vals[q]; }
      }
   }
   return std::sqrt(acc);
}

Eigen::VectorXd divergence_coefficients(const VelocitySpace& space, const Eigen::VectorXd& u)
{
   const int d = space.dim();
   const int k = space.order();
   const PressureSpace pressure(space.mesh_ptr(), k);
   const QuadratureRule rule = gauss_rule(2 * k + 1, d);
   const ReferenceTable table = space.tabulate(rule.points);
   // Reference divergence rows: d/dxhat_c of g_j for component c.
   Eigen::MatrixXd div_ref(space.local_dim(), rule.size());
   for (int j = 0; j < space.local_dim(); ++j) { div_ref.row(j) = table.grad[space.local_basis()[j].component].row(j); }
   Eigen::VectorXd out(pressure.num_dofs());
   for (const Cell& cell : space.mesh().cells())
   {
      const Eigen::VectorXd local = space.gather(u, cell.id);
      const Eigen::VectorXd div_q = div_ref.transpose() * local;  // detJ * div at points
      const Eigen::MatrixXd ptab = pressure.tabulate(cell.id, rule.points);
      Eigen::VectorXd acc = Eigen::VectorXd::Zero(pressure.local_dim());
      for (int q = 0; q < rule.size(); ++q) { acc += rule.weights[q] * div_q[q] * ptab.col(q); }
      out.segment(pressure.cell_offset(cell.id), pressure.local_dim()) = acc;
   }
   return out;
}

double scaled_divergence(const VelocitySpace& space, const Eigen::VectorXd& u)
{
   const double norm = l2_norm(space, u);
   if (norm == 0.0) { return 0.0; }
   return divergence_coefficients(space, u).lpNorm<Eigen::Infinity>() / std::max(norm, kDivergenceNormFloor);
}

} // namespace hdiv
