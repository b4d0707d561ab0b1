#include "hdiv/forms.hpp"

#include <cmath>
#include <stdexcept>

namespace hdiv {

namespace {

using Triplet = Eigen::Triplet<double, int>;

class TripletSink
{
public:
   explicit TripletSink(int n) : n_(n) {}

   void add(const std::vector<int>& rows, const std::vector<int>& cols, const Eigen::MatrixXd& m)
   {
      for (std::size_t j = 0; j < cols.size(); ++j)
      {
         if (cols[j] < 0) { continue; }
         for (std::size_t i = 0; i < rows.size(); ++i)
         {
            if (rows[i] < 0) { continue; }
            t_.emplace_back(rows[i], cols[j], m(i, j));
         }
      }
   }

   SparseMatrix build()
   {
      SparseMatrix a(n_, n_);
      a.setFromTriplets(t_.begin(), t_.end());
      t_.clear();
      return a;
   }

private:
   int n_;
   std::vector<Triplet> t_;
};

/// Reference points of a quadrature rule placed on local face `lf` (= 2*axis+side).
std::vector<Point> face_points(const QuadratureRule& frule, int lf, int d)
{
   const int a = lf / 2;
   const auto tang = tangential_axes(a, d);
   std::vector<Point> pts(frule.size());
   for (int q = 0; q < frule.size(); ++q)
   {
      Point p{0.0, 0.0, 0.0};
      p[a] = lf % 2;
      if (tang[0] >= 0) { p[tang[0]] = frule.points[q][0]; }
      if (tang[1] >= 0) { p[tang[1]] = frule.points[q][1]; }
      pts[q] = p;
   }
   return pts;
}

/// Tables shared by all assembly routines of one space.
struct Tables
{
   int d = 0;
   int nb = 0;  // local functions per component
   QuadratureRule vrule;
   QuadratureRule frule;
   ReferenceTable volume;
   std::array<ReferenceTable, 6> trace;

   explicit Tables(const VelocitySpace& space)
   {
      d = space.dim();
      nb = space.local_dim() / d;
      const int deg = form_quadrature_degree(space.order());
      vrule = gauss_rule(deg, d);
      frule = gauss_rule(deg, d - 1);
      volume = space.tabulate(vrule.points);
      for (int lf = 0; lf < 2 * d; ++lf) { trace[lf] = space.tabulate(face_points(frule, lf, d)); }
   }

   /// Component block of a table (rows c*nb .. (c+1)*nb).
   static Eigen::MatrixXd block(const Eigen::MatrixXd& m, int c, int nb) { return m.middleRows(c * nb, nb); }
};

std::vector<int> component_dofs(const VelocitySpace& space, int cell, int c, int nb)
{
   const auto dofs = space.cell_dofs(cell);
   return {dofs.begin() + c * nb, dofs.begin() + (c + 1) * nb};
}

std::vector<int> concat(std::vector<int> a, const std::vector<int>& b)
{
   a.insert(a.end(), b.begin(), b.end());
   return a;
}

/// Component-c values (physical) of all comp-c functions of a side cell on a face.
Eigen::MatrixXd side_values(const VelocitySpace& space, const Tables& tb, const Cell& cell, int lf, int c)
{
   return Tables::block(tb.trace[lf].value, c, tb.nb) * space.piola_scale(cell, c);
}

/// d/dx_a of component c of the comp-c functions of a side cell on a face.
Eigen::MatrixXd side_derivative(const VelocitySpace& space, const Tables& tb, const Cell& cell, int lf, int c,
                                int a)
{
   return Tables::block(tb.trace[lf].grad[a], c, tb.nb) * (space.piola_scale(cell, c) / cell.width(a));
}

Eigen::VectorXd face_weights(const Tables& tb, const Face& f)
{
   Eigen::VectorXd w(tb.frule.size());
   for (int q = 0; q < tb.frule.size(); ++q) { w[q] = tb.frule.weights[q] * f.area; }
   return w;
}

/// Normal component b . mu on a face, evaluated from the left trace.
Eigen::VectorXd face_normal_velocity(const VelocitySpace& space, const Tables& tb, const Face& f,
                                     const Eigen::VectorXd& b)
{
   const Cell& left = space.mesh().cell(f.left_cell);
   const Eigen::VectorXd local = space.gather(b, f.left_cell);
   const int a = f.axis;
   const Eigen::MatrixXd vals = side_values(space, tb, left, f.left_local, a);
   return f.normal[a] * (vals.transpose() * local.segment(a * tb.nb, tb.nb));
}

} // namespace

double default_penalty(int k)
{
   return 4.0 * (k + 1) * (k + 1);
}

SparseMatrix assemble_mass(const VelocitySpace& space)
{
   const Tables tb(space);
   const int d = tb.d;
   std::vector<Eigen::MatrixXd> ref(d);
   const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(tb.vrule.weights.data(), tb.vrule.size());
   for (int c = 0; c < d; ++c)
   {
      const Eigen::MatrixXd v = Tables::block(tb.volume.value, c, tb.nb);
      ref[c] = v * w.asDiagonal() * v.transpose();
   }
   TripletSink sink(space.num_dofs());
   for (const Cell& cell : space.mesh().cells())
   {
      const double detj = VelocitySpace::jacobian(cell, d);
      for (int c = 0; c < d; ++c)
      {
         const double s = space.piola_scale(cell, c);
         const auto dofs = component_dofs(space, cell.id, c, tb.nb);
         sink.add(dofs, dofs, ref[c] * (s * s * detj));
      }
   }
   return sink.build();
}

SipParts assemble_sip_parts(const VelocitySpace& space)
{
   const Tables tb(space);
   const int d = tb.d;
   const int nb = tb.nb;
   const int n = space.num_dofs();
   const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(tb.vrule.weights.data(), tb.vrule.size());

   // ref_grad[c][a] = D_a W D_a^T on the comp-c block.
   std::vector<std::array<Eigen::MatrixXd, 3>> ref_grad(d);
   for (int c = 0; c < d; ++c)
   {
      for (int a = 0; a < d; ++a)
      {
         const Eigen::MatrixXd g = Tables::block(tb.volume.grad[a], c, nb);
         ref_grad[c][a] = g * w.asDiagonal() * g.transpose();
      }
   }

   TripletSink grad(n), jump(n), cons(n), flux(n);
   for (const Cell& cell : space.mesh().cells())
   {
      const double detj = VelocitySpace::jacobian(cell, d);
      for (int c = 0; c < d; ++c)
      {
         const double s = space.piola_scale(cell, c);
         Eigen::MatrixXd m = Eigen::MatrixXd::Zero(nb, nb);
         for (int a = 0; a < d; ++a) { m += ref_grad[c][a] / (cell.width(a) * cell.width(a)); }
         const auto dofs = component_dofs(space, cell.id, c, nb);
         grad.add(dofs, dofs, m * (s * s * detj));
      }
   }

   for (const Face& f : space.mesh().faces())
   {
      const int a = f.axis;
      const double ell = f.penalty_length;
      const Eigen::VectorXd fw = face_weights(tb, f);
      const Cell& left = space.mesh().cell(f.left_cell);
      const bool wall = f.is_wall();
      const int rows = wall ? nb : 2 * nb;
      for (int c = 0; c < d; ++c)
      {
         Eigen::MatrixXd jc(rows, fw.size());
         Eigen::MatrixXd dc(rows, fw.size());
         std::vector<int> dofs = component_dofs(space, f.left_cell, c, nb);
         const double avg = wall ? 1.0 : 0.5;
         jc.topRows(nb) = side_values(space, tb, left, f.left_local, c);
         dc.topRows(nb) = avg * f.normal[a] * side_derivative(space, tb, left, f.left_local, c, a);
         if (!wall)
         {
            const Cell& right = space.mesh().cell(f.right_cell);
            jc.bottomRows(nb) = -side_values(space, tb, right, f.right_local, c);
            dc.bottomRows(nb) = avg * f.normal[a] * side_derivative(space, tb, right, f.right_local, c, a);
            dofs = concat(dofs, component_dofs(space, f.right_cell, c, nb));
         }
         const Eigen::MatrixXd dw = dc * fw.asDiagonal();
         flux.add(dofs, dofs, ell * dw * dc.transpose());
         // The normal component has no jump (strongly on walls, by construction inside).
         if (c == a) { continue; }
         const Eigen::MatrixXd jw = jc * fw.asDiagonal();
         jump.add(dofs, dofs, jw * jc.transpose() / ell);
         const Eigen::MatrixXd x = jw * dc.transpose();
         cons.add(dofs, dofs, -(x + x.transpose()));
      }
   }

   SipParts parts;
   parts.gradient = grad.build();
   parts.jump = jump.build();
   parts.consistency = cons.build();
   parts.flux_average = flux.build();
   return parts;
}

SparseMatrix assemble_sip(const VelocitySpace& space, double nu, double sigma)
{
   if (!(sigma > 0.0)) { throw std::invalid_argument("SIP penalty sigma must be > 0"); }
   const SipParts p = assemble_sip_parts(space);
   SparseMatrix a = nu * (p.gradient + sigma * p.jump + p.consistency);
   return a;
}

SparseMatrix assemble_div(const VelocitySpace& velocity, const PressureSpace& pressure)
{
   const int d = velocity.dim();
   const int k = velocity.order();
   const QuadratureRule rule = gauss_rule(2 * k + 1, d);
   const ReferenceTable table = velocity.tabulate(rule.points);
   const int nloc = velocity.local_dim();
   const int np = pressure.local_dim();
   Eigen::MatrixXd div_ref(nloc, rule.size());
   for (int j = 0; j < nloc; ++j)
   {
      const int c = velocity.local_basis()[j].component;
      for (int q = 0; q < rule.size(); ++q) { div_ref(j, q) = rule.weights[q] * table.grad[c](j, q); }
   }
   std::vector<Triplet> t;
   t.reserve(static_cast<std::size_t>(velocity.mesh().num_cells()) * nloc * np);
   for (const Cell& cell : velocity.mesh().cells())
   {
      const Eigen::MatrixXd q = pressure.tabulate(cell.id, rule.points);
      const Eigen::MatrixXd local = -div_ref * q.transpose();
      const auto dofs = velocity.cell_dofs(cell.id);
      const int off = pressure.cell_offset(cell.id);
      for (int i = 0; i < np; ++i)
      {
         for (int j = 0; j < nloc; ++j)
         {
            if (dofs[j] >= 0) { t.emplace_back(dofs[j], off + i, local(j, i)); }
         }
      }
   }
   SparseMatrix b(velocity.num_dofs(), pressure.num_dofs());
   b.setFromTriplets(t.begin(), t.end());
   return b;
}

Eigen::VectorXd assemble_load(const VelocitySpace& space, const VectorFunction& f, double t)
{
   const int d = space.dim();
   const QuadratureRule rule = gauss_rule_points(data_quadrature_points(space.order()), d);
   const ReferenceTable table = space.tabulate(rule.points);
   Eigen::VectorXd rhs = Eigen::VectorXd::Zero(space.num_dofs());
   Eigen::MatrixXd fv(3, rule.size());
   for (const Cell& cell : space.mesh().cells())
   {
      const double detj = VelocitySpace::jacobian(cell, d);
      for (int q = 0; q < rule.size(); ++q)
      {
         const Vec3 v = f(t, VelocitySpace::to_physical(cell, rule.points[q]));
         for (int c = 0; c < 3; ++c) { fv(c, q) = v[c] * rule.weights[q] * detj; }
      }
      const auto dofs = space.cell_dofs(cell.id);
      for (int j = 0; j < space.local_dim(); ++j)
      {
         if (dofs[j] < 0) { continue; }
         const int c = space.local_basis()[j].component;
         rhs[dofs[j]] += space.piola_scale(cell, c) * table.value.row(j).dot(fv.row(c));
      }
   }
   return rhs;
}

// ---------------------------------------------------------------------------

ConvectionAssembler::ConvectionAssembler(std::shared_ptr<const VelocitySpace> space) : space_(std::move(space))
{
   const Tables tb(*space_);
   volume_rule_ = tb.vrule;
   face_rule_ = tb.frule;
   volume_ = tb.volume;
   trace_ = tb.trace;
}

SparseMatrix ConvectionAssembler::assemble(const Eigen::VectorXd& b, double div_tol) const
{
   const VelocitySpace& space = *space_;
   if (b.size() != space.num_dofs()) { throw std::invalid_argument("advecting field has the wrong size"); }
   const double div = scaled_divergence(space, b);
   if (div > div_tol)
   {
      throw std::domain_error("advecting field is not divergence free (scaled div " + std::to_string(div) + ")");
   }

   const int d = space.dim();
   const int nloc = space.local_dim();
   const int nb = nloc / d;
   const int nq = volume_rule_.size();
   TripletSink sink(space.num_dofs());

   for (const Cell& cell : space.mesh().cells())
   {
      const double detj = VelocitySpace::jacobian(cell, d);
      const Eigen::VectorXd local = space.gather(b, cell.id);
      // b_a / h_a at the volume points.
      std::array<Eigen::VectorXd, 3> bh;
      for (int a = 0; a < d; ++a)
      {
         bh[a] = volume_.value.middleRows(a * nb, nb).transpose() * local.segment(a * nb, nb);
         bh[a] *= space.piola_scale(cell, a) / cell.width(a);
      }
      Eigen::VectorXd w(nq);
      for (int q = 0; q < nq; ++q) { w[q] = volume_rule_.weights[q] * detj; }
      for (int c = 0; c < d; ++c)
      {
         const double s = space.piola_scale(cell, c);
         Eigen::MatrixXd e = Eigen::MatrixXd::Zero(nb, nq);
         for (int a = 0; a < d; ++a) { e += volume_.grad[a].middleRows(c * nb, nb) * bh[a].asDiagonal(); }
         const Eigen::MatrixXd v = volume_.value.middleRows(c * nb, nb);
         const auto dofs = component_dofs(space, cell.id, c, nb);
         sink.add(dofs, dofs, (s * s) * (v * w.asDiagonal() * e.transpose()));
      }
   }

   for (const Face& f : space.mesh().faces())
   {
      if (f.is_wall()) { continue; }
      const int a = f.axis;
      const Cell& left = space.mesh().cell(f.left_cell);
      const Cell& right = space.mesh().cell(f.right_cell);
      const int fq = face_rule_.size();
      const Eigen::VectorXd bl = space.gather(b, f.left_cell).segment(a * nb, nb);
      Eigen::VectorXd beta = trace_[f.left_local].value.middleRows(a * nb, nb).transpose() * bl;
      beta *= space.piola_scale(left, a) * f.normal[a];
      Eigen::VectorXd wb(fq), wa(fq);
      for (int q = 0; q < fq; ++q)
      {
         const double w = face_rule_.weights[q] * f.area;
         wb[q] = w * beta[q];
         wa[q] = 0.5 * w * std::abs(beta[q]);
      }
      for (int c = 0; c < d; ++c)
      {
         if (c == a) { continue; }
         Eigen::MatrixXd jc(2 * nb, fq), ac(2 * nb, fq);
         const Eigen::MatrixXd tl =
            trace_[f.left_local].value.middleRows(c * nb, nb) * space.piola_scale(left, c);
         const Eigen::MatrixXd tr =
            trace_[f.right_local].value.middleRows(c * nb, nb) * space.piola_scale(right, c);
         jc << tl, -tr;
         ac << 0.5 * tl, 0.5 * tr;
         const auto dofs = concat(component_dofs(space, f.left_cell, c, nb),
                                  component_dofs(space, f.right_cell, c, nb));
         const Eigen::MatrixXd m = -ac * wb.asDiagonal() * jc.transpose() + jc * wa.asDiagonal() * jc.transpose();
         sink.add(dofs, dofs, m);
      }
   }
   return sink.build();
}

SparseMatrix assemble_upwind_convection(const Eigen::VectorXd& b, std::shared_ptr<const VelocitySpace> space,
                                        double div_tol)
{
   return ConvectionAssembler(std::move(space)).assemble(b, div_tol);
}

double ConvectionAssembler::upwind_seminorm_sq(const Eigen::VectorXd& b, const Eigen::VectorXd& v) const
{
   const VelocitySpace& space = *space_;
   const int d = space.dim();
   const int nb = space.local_dim() / d;
   double acc = 0.0;
   for (const Face& f : space.mesh().faces())
   {
      if (f.is_wall()) { continue; }
      const int a = f.axis;
      const Cell& left = space.mesh().cell(f.left_cell);
      const Cell& right = space.mesh().cell(f.right_cell);
      const Eigen::VectorXd bl = space.gather(b, f.left_cell);
      const Eigen::VectorXd vl = space.gather(v, f.left_cell);
      const Eigen::VectorXd vr = space.gather(v, f.right_cell);
      const Eigen::VectorXd beta = (trace_[f.left_local].value.middleRows(a * nb, nb).transpose() *
                                    bl.segment(a * nb, nb)) * space.piola_scale(left, a);
      for (int c = 0; c < d; ++c)
      {
         if (c == a) { continue; }
         const Eigen::VectorXd jump =
            space.piola_scale(left, c) * (trace_[f.left_local].value.middleRows(c * nb, nb).transpose() *
                                          vl.segment(c * nb, nb)) -
            space.piola_scale(right, c) * (trace_[f.right_local].value.middleRows(c * nb, nb).transpose() *
                                           vr.segment(c * nb, nb));
         for (int q = 0; q < face_rule_.size(); ++q)
         {
            acc += 0.5 * face_rule_.weights[q] * f.area * std::abs(beta[q]) * jump[q] * jump[q];
         }
      }
   }
   return acc;
}

double upwind_seminorm_sq(const VelocitySpace& space, const Eigen::VectorXd& b, const Eigen::VectorXd& v)
{
   const Tables tb(space);
   const int d = tb.d;
   const int nb = tb.nb;
   double acc = 0.0;
   for (const Face& f : space.mesh().faces())
   {
      if (f.is_wall()) { continue; }
      const Cell& left = space.mesh().cell(f.left_cell);
      const Cell& right = space.mesh().cell(f.right_cell);
      const Eigen::VectorXd beta = face_normal_velocity(space, tb, f, b);
      const Eigen::VectorXd fw = face_weights(tb, f);
      const Eigen::VectorXd vl = space.gather(v, f.left_cell);
      const Eigen::VectorXd vr = space.gather(v, f.right_cell);
      for (int c = 0; c < d; ++c)
      {
         const Eigen::VectorXd jump =
            side_values(space, tb, left, f.left_local, c).transpose() * vl.segment(c * nb, nb) -
            side_values(space, tb, right, f.right_local, c).transpose() * vr.segment(c * nb, nb);
         for (int q = 0; q < fw.size(); ++q) { acc += 0.5 * fw[q] * std::abs(beta[q]) * jump[q] * jump[q]; }
      }
   }
   return acc;
}

NormReport compute_norms(const VelocitySpace& space, const SipParts& parts, double sigma, const Eigen::VectorXd& v,
                         const Eigen::VectorXd& b)
{
   const double g = v.dot(parts.gradient * v);
   const double j = v.dot(parts.jump * v);
   const double cn = v.dot(parts.consistency * v);
   const double fa = v.dot(parts.flux_average * v);
   NormReport r;
   r.h1 = std::sqrt(std::max(0.0, g + j));
   r.h1_star = std::sqrt(std::max(0.0, g + j + fa));
   r.upwind = std::sqrt(std::max(0.0, upwind_seminorm_sq(space, b, v)));
   r.energy = std::sqrt(std::max(0.0, g + sigma * j + cn));
   return r;
}

AssembledOperators assemble_operators(std::shared_ptr<const VelocitySpace> velocity,
                                      std::shared_ptr<const PressureSpace> pressure, double nu, double sigma)
{
   if (!(sigma > 0.0)) { throw std::invalid_argument("SIP penalty sigma must be > 0"); }
   if (!(nu > 0.0)) { throw std::invalid_argument("viscosity must be > 0"); }
   AssembledOperators ops;
   ops.velocity = velocity;
   ops.pressure = pressure;
   ops.nu = nu;
   ops.sigma = sigma;
   ops.mass = assemble_mass(*velocity);
   ops.parts = assemble_sip_parts(*velocity);
   ops.sip = nu * (ops.parts.gradient + sigma * ops.parts.jump + ops.parts.consistency);
   ops.div = assemble_div(*velocity, *pressure);
   return ops;
}

} // namespace hdiv
