#include "hdiv/diagnostics.hpp"

#include <cmath>
#include <stdexcept>

namespace hdiv {

struct FieldIntegrator::CellSamples
{
   std::vector<Vec3> value;
   std::vector<Mat3> grad;
   std::vector<std::array<Mat3, 3>> hess;
};

FieldIntegrator::FieldIntegrator(std::shared_ptr<const VelocitySpace> space, int points_per_axis)
   : space_(std::move(space))
{
   const int n = points_per_axis > 0 ? points_per_axis : data_quadrature_points(space_->order());
   rule_ = gauss_rule_points(n, space_->dim());
   table_ = space_->tabulate(rule_.points, true);
}

void FieldIntegrator::sample_cell(const Eigen::VectorXd& u, int cell_id, bool hessian, CellSamples& out) const
{
   const VelocitySpace& v = *space_;
   const Cell& cell = v.mesh().cell(cell_id);
   const int d = v.dim();
   const int nq = rule_.size();
   const int nb = v.local_dim() / d;
   const Eigen::VectorXd local = v.gather(u, cell_id);

   out.value.assign(nq, Vec3{0.0, 0.0, 0.0});
   out.grad.assign(nq, Mat3{});
   if (hessian) { out.hess.assign(nq, std::array<Mat3, 3>{}); }
   for (int c = 0; c < d; ++c)
   {
      const Eigen::RowVectorXd coef = v.piola_scale(cell, c) * local.segment(c * nb, nb).transpose();
      const Eigen::RowVectorXd val = coef * table_.value.middleRows(c * nb, nb);
      for (int q = 0; q < nq; ++q) { out.value[q][c] = val[q]; }
      for (int a = 0; a < d; ++a)
      {
         const Eigen::RowVectorXd g = coef * table_.grad[a].middleRows(c * nb, nb) / cell.width(a);
         for (int q = 0; q < nq; ++q) { out.grad[q][c][a] = g[q]; }
         if (!hessian) { continue; }
         for (int b = 0; b < d; ++b)
         {
            const Eigen::RowVectorXd h =
               coef * table_.hess[a][b].middleRows(c * nb, nb) / (cell.width(a) * cell.width(b));
            for (int q = 0; q < nq; ++q) { out.hess[q][c][a][b] = h[q]; }
         }
      }
   }
}

double FieldIntegrator::kinetic_energy(const Eigen::VectorXd& u) const
{
   const VelocitySpace& v = *space_;
   CellSamples s;
   double sum = 0.0;
   for (int c = 0; c < v.mesh().num_cells(); ++c)
   {
      sample_cell(u, c, false, s);
      const double det = VelocitySpace::jacobian(v.mesh().cell(c), v.dim());
      for (int q = 0; q < rule_.size(); ++q)
      {
         const Vec3& x = s.value[q];
         sum += rule_.weights[q] * det * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
      }
   }
   return 0.5 * sum;
}

VorticityNorms FieldIntegrator::vorticity_norms(const Eigen::VectorXd& u) const
{
   const VelocitySpace& v = *space_;
   const int d = v.dim();
   CellSamples s;
   VorticityNorms out;
   for (int c = 0; c < v.mesh().num_cells(); ++c)
   {
      sample_cell(u, c, true, s);
      const double det = VelocitySpace::jacobian(v.mesh().cell(c), d);
      for (int q = 0; q < rule_.size(); ++q)
      {
         const double w = rule_.weights[q] * det;
         const Mat3& g = s.grad[q];
         const auto& h = s.hess[q];
         if (d == 2)
         {
            const double om = g[1][0] - g[0][1];
            out.enstrophy += w * om * om;
            for (int a = 0; a < 2; ++a)
            {
               const double da = h[1][0][a] - h[0][1][a];
               out.palinstrophy += w * da * da;
            }
         }
         else
         {
            const Vec3 om{g[2][1] - g[1][2], g[0][2] - g[2][0], g[1][0] - g[0][1]};
            out.enstrophy += w * (om[0] * om[0] + om[1] * om[1] + om[2] * om[2]);
            for (int a = 0; a < 3; ++a)
            {
               const double d0 = h[2][1][a] - h[1][2][a];
               const double d1 = h[0][2][a] - h[2][0][a];
               const double d2 = h[1][0][a] - h[0][1][a];
               out.palinstrophy += w * (d0 * d0 + d1 * d1 + d2 * d2);
            }
         }
      }
   }
   out.enstrophy *= 0.5;
   out.palinstrophy *= 0.5;
   return out;
}

ErrorNorms FieldIntegrator::error(const Eigen::VectorXd& u, const VectorFunction& velocity,
                                  const GradientFunction& gradient, double t) const
{
   const VelocitySpace& v = *space_;
   const CartesianMesh& mesh = v.mesh();
   const int d = v.dim();
   CellSamples s;
   double l2 = 0.0;
   double h1 = 0.0;
   for (int c = 0; c < mesh.num_cells(); ++c)
   {
      sample_cell(u, c, false, s);
      const Cell& cell = mesh.cell(c);
      const double det = VelocitySpace::jacobian(cell, d);
      for (int q = 0; q < rule_.size(); ++q)
      {
         const Point x = VelocitySpace::to_physical(cell, rule_.points[q]);
         const Vec3 ue = velocity(t, x);
         const Mat3 ge = gradient(t, x);
         const double w = rule_.weights[q] * det;
         for (int i = 0; i < d; ++i)
         {
            const double e = s.value[q][i] - ue[i];
            l2 += w * e * e;
            for (int a = 0; a < d; ++a)
            {
               const double eg = s.grad[q][i][a] - ge[i][a];
               h1 += w * eg * eg;
            }
         }
      }
   }

   // Tangential jumps of the error; the exact field is continuous, so on
   // interior faces only the discrete jump remains.
   const QuadratureRule frule = gauss_rule_points(rule_.points_per_axis(), d - 1);
   for (const Face& f : mesh.faces())
   {
      const auto tang = tangential_axes(f.axis, d);
      const Cell& left = mesh.cell(f.left_cell);
      double sum = 0.0;
      for (int q = 0; q < frule.size(); ++q)
      {
         Point rl{0.0, 0.0, 0.0};
         for (int i = 0; i < d - 1; ++i) { rl[tang[i]] = frule.points[q][i]; }
         Point rr = rl;
         rl[f.axis] = static_cast<double>(f.left_local % 2);
         const FieldJet jl = v.evaluate(u, f.left_cell, rl);
         Vec3 jump = jl.value;
         if (f.is_wall())
         {
            const Vec3 ue = velocity(t, VelocitySpace::to_physical(left, rl));
            for (int i = 0; i < d; ++i) { jump[i] -= ue[i]; }
         }
         else
         {
            rr[f.axis] = static_cast<double>(f.right_local % 2);
            const FieldJet jr = v.evaluate(u, f.right_cell, rr);
            for (int i = 0; i < d; ++i) { jump[i] -= jr.value[i]; }
         }
         double jt = 0.0;
         for (int i = 0; i < d; ++i)
         {
            if (i != f.axis) { jt += jump[i] * jump[i]; }
         }
         sum += frule.weights[q] * jt;
      }
      h1 += sum * f.area / f.penalty_length;
   }
   return {std::sqrt(l2), std::sqrt(h1)};
}

ErrorNorms error_vs_exact(const VelocitySpace& space, const Eigen::VectorXd& u, const AnalyticField& exact,
                          double t)
{
   std::shared_ptr<const VelocitySpace> view(std::shared_ptr<const VelocitySpace>{}, &space);
   return FieldIntegrator(view).error(u, exact.velocity, exact.gradient, t);
}

Diagnostics::Diagnostics(std::shared_ptr<const AssembledOperators> ops, std::optional<AnalyticField> exact)
   : ops_(std::move(ops)), exact_(std::move(exact)), integrator_(ops_->velocity, ops_->velocity->order() + 2),
     conv_(ops_->velocity)
{
}

DiagnosticsRecord Diagnostics::record(const FieldState& state, const StepReport* report) const
{
   const AssembledOperators& ops = *ops_;
   const Eigen::VectorXd& u = state.u;
   DiagnosticsRecord r;
   r.t = state.t;
   r.ke = 0.5 * u.dot(ops.mass * u);
   const VorticityNorms vn = integrator_.vorticity_norms(u);
   r.enstrophy = vn.enstrophy;
   r.palinstrophy = vn.palinstrophy;
   r.eps_visc = u.dot(ops.sip * u);
   if (report != nullptr)
   {
      r.eps_upw = report->eps_upw;
      r.dke_dt = report->dke_dt;
      r.budget_residual = report->budget_residual;
      r.div_max = report->div_max;
   }
   else
   {
      r.eps_upw = conv_.upwind_seminorm_sq(u, u);
      r.div_max = divergence_max(ops, u);
   }
   if (exact_)
   {
      const ErrorNorms e = error_vs_exact(*ops.velocity, u, *exact_, state.t);
      r.err_l2 = e.l2;
      r.err_h1 = e.h1;
   }
   return r;
}

double cumulative_dissipation(const std::vector<DiagnosticsRecord>& records)
{
   double sum = 0.0;
   for (std::size_t i = 1; i < records.size(); ++i)
   {
      const double a = records[i - 1].eps_visc + records[i - 1].eps_upw;
      const double b = records[i].eps_visc + records[i].eps_upw;
      sum += 0.5 * (a + b) * (records[i].t - records[i - 1].t);
   }
   return sum;
}

Point SampleGrid::point(int flat) const
{
   Point x{0.0, 0.0, 0.0};
   for (int a = dim - 1; a >= 0; --a)
   {
      const int i = flat % m[a];
      flat /= m[a];
      x[a] = lower[a] + (i + 0.5) * (upper[a] - lower[a]) / m[a];
   }
   return x;
}

SampleGrid default_sample_grid(const VelocitySpace& space, int samples_per_axis)
{
   const CartesianMesh& mesh = space.mesh();
   SampleGrid g;
   g.dim = space.dim();
   g.lower = mesh.spec().lower;
   g.upper = mesh.spec().upper;
   for (int a = 0; a < g.dim; ++a)
   {
      g.m[a] = samples_per_axis > 0 ? samples_per_axis : mesh.cells_per_axis(a) * (space.order() + 1);
   }
   return g;
}

std::vector<FieldJet> sample_field(const VelocitySpace& space, const Eigen::VectorXd& u, const SampleGrid& grid)
{
   if (grid.dim != space.dim()) { throw std::invalid_argument("sampling grid dimension differs from the field"); }
   std::vector<FieldJet> out(grid.size());
   for (int i = 0; i < grid.size(); ++i) { out[i] = space.evaluate_at(u, grid.point(i)); }
   return out;
}

Vec3 vorticity(const FieldJet& jet, int dim)
{
   const Mat3& g = jet.grad;
   if (dim == 2) { return {0.0, 0.0, g[1][0] - g[0][1]}; }
   return {g[2][1] - g[1][2], g[0][2] - g[2][0], g[1][0] - g[0][1]};
}

double q_value(const Mat3& g)
{
   double omega = 0.0;
   double strain = 0.0;
   for (int i = 0; i < 3; ++i)
   {
      for (int j = 0; j < 3; ++j)
      {
         const double sym = 0.5 * (g[i][j] + g[j][i]);
         const double anti = 0.5 * (g[i][j] - g[j][i]);
         strain += sym * sym;
         omega += anti * anti;
      }
   }
   return 0.5 * (omega - strain);
}

std::vector<double> q_criterion(const VelocitySpace& space, const Eigen::VectorXd& u, const SampleGrid& grid)
{
   if (space.dim() != 3) { throw std::domain_error("Q-criterion is unsupported for 2D states"); }
   const std::vector<FieldJet> jets = sample_field(space, u, grid);
   std::vector<double> q(jets.size());
   for (std::size_t i = 0; i < jets.size(); ++i) { q[i] = q_value(jets[i].grad); }
   return q;
}

} // namespace hdiv
