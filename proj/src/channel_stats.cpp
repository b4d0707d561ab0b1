#include "hdiv/channel_stats.hpp"

#include "hdiv/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace hdiv {

ChannelStatsAccumulator::ChannelStatsAccumulator(std::shared_ptr<const VelocitySpace> space, double nu,
                                                 int points_per_cell)
   : space_(std::move(space)), nu_(nu)
{
   const CartesianMesh& mesh = space_->mesh();
   const int d = mesh.dim();
   if (mesh.bc(1) != AxisBc::Wall) { throw std::invalid_argument("channel statistics need walls normal to x2"); }
   for (int a = 0; a < d; ++a)
   {
      if (a != 1 && mesh.bc(a) != AxisBc::Periodic)
      {
         throw std::invalid_argument("channel statistics need periodic x1 (and x3) directions");
      }
   }
   if (!(nu > 0.0)) { throw std::invalid_argument("nu must be > 0"); }
   const int k = space_->order();
   const GaussRule1D layers = gauss_legendre(points_per_cell > 0 ? points_per_cell : k + 2);
   layer_ref_ = layers.points;
   const GaussRule1D plane = gauss_legendre(k + 2);
   plane_pts_ = plane.points;
   plane_w_ = plane.weights;

   const auto& nodes = mesh.nodes(1);
   for (int j = 0; j + 1 < static_cast<int>(nodes.size()); ++j)
   {
      for (double r : layer_ref_) { y_.push_back(nodes[j] + r * (nodes[j + 1] - nodes[j])); }
   }
   for (auto& v : sum_u_) { v.assign(y_.size(), 0.0); }
   for (auto& v : sum_uu_) { v.assign(y_.size(), 0.0); }
}

void ChannelStatsAccumulator::add(const Eigen::VectorXd& u, double t)
{
   const VelocitySpace& v = *space_;
   const CartesianMesh& mesh = v.mesh();
   const int d = mesh.dim();
   const int nl = static_cast<int>(layer_ref_.size());
   const int np = static_cast<int>(plane_pts_.size());
   const int n3 = d == 3 ? np : 1;
   double plane_area = mesh.box_length(0) * (d == 3 ? mesh.box_length(2) : 1.0);
   const int ny = mesh.cells_per_axis(1);

   double wall_grad = 0.0;
   for (const Cell& cell : mesh.cells())
   {
      const int j = cell.index[1];
      const double area = cell.width(0) * (d == 3 ? cell.width(2) : 1.0);
      for (int a = 0; a < np; ++a)
      {
         for (int b = 0; b < n3; ++b)
         {
            const double w = plane_w_[a] * (d == 3 ? plane_w_[b] : 1.0) * area / plane_area;
            Point ref{plane_pts_[a], 0.0, d == 3 ? plane_pts_[b] : 0.0};
            for (int l = 0; l < nl; ++l)
            {
               ref[1] = layer_ref_[l];
               const FieldJet jet = v.evaluate(u, cell.id, ref);
               const int row = j * nl + l;
               const Vec3& x = jet.value;
               for (int c = 0; c < 3; ++c) { sum_u_[c][row] += w * x[c]; }
               sum_uu_[0][row] += w * x[0] * x[0];
               sum_uu_[1][row] += w * x[1] * x[1];
               sum_uu_[2][row] += w * x[2] * x[2];
               sum_uu_[3][row] += w * x[0] * x[1];
               sum_uu_[4][row] += w * x[0] * x[2];
               sum_uu_[5][row] += w * x[1] * x[2];
            }
            // One-sided wall gradients, counted with the sign of the inward normal.
            if (j == 0)
            {
               ref[1] = 0.0;
               wall_grad += 0.5 * w * v.evaluate(u, cell.id, ref).grad[0][1];
            }
            if (j == ny - 1)
            {
               ref[1] = 1.0;
               wall_grad -= 0.5 * w * v.evaluate(u, cell.id, ref).grad[0][1];
            }
         }
      }
   }
   sum_wall_grad_ += wall_grad;
   if (count_ == 0) { t_begin_ = t; }
   t_end_ = t;
   ++count_;
}

ChannelStats ChannelStatsAccumulator::result() const
{
   if (count_ == 0) { throw std::runtime_error("channel statistics: empty averaging window"); }
   const CartesianMesh& mesh = space_->mesh();
   const double inv = 1.0 / count_;
   const std::size_t n = y_.size();
   ChannelStats s;
   s.nu = nu_;
   s.samples = count_;
   s.t_begin = t_begin_;
   s.t_end = t_end_;
   s.y = y_;
   for (int c = 0; c < 3; ++c)
   {
      s.mean[c].resize(n);
      for (std::size_t i = 0; i < n; ++i) { s.mean[c][i] = sum_u_[c][i] * inv; }
   }
   auto cov = [&](int idx, int a, int b, std::size_t i) {
      return sum_uu_[idx][i] * inv - s.mean[a][i] * s.mean[b][i];
   };
   s.uu.resize(n);
   s.vv.resize(n);
   s.ww.resize(n);
   s.uv.resize(n);
   for (auto& r : s.rms) { r.resize(n); }
   for (std::size_t i = 0; i < n; ++i)
   {
      s.uu[i] = cov(0, 0, 0, i);
      s.vv[i] = cov(1, 1, 1, i);
      s.ww[i] = cov(2, 2, 2, i);
      s.uv[i] = cov(3, 0, 1, i);
      s.rms[0][i] = std::sqrt(std::max(s.uu[i], 0.0));
      s.rms[1][i] = std::sqrt(std::max(s.vv[i], 0.0));
      s.rms[2][i] = std::sqrt(std::max(s.ww[i], 0.0));
   }
   s.tau_wall = nu_ * sum_wall_grad_ * inv;
   s.u_tau = std::sqrt(std::max(s.tau_wall, 0.0));
   const double lo = mesh.spec().lower[1];
   const double hi = mesh.spec().upper[1];
   s.re_tau = s.u_tau * 0.5 * (hi - lo) / nu_;
   s.y_plus.resize(n);
   s.u_plus.resize(n);
   s.uv_plus.resize(n);
   for (auto& r : s.rms_plus) { r.resize(n); }
   const double ut = s.u_tau;
   for (std::size_t i = 0; i < n; ++i)
   {
      s.y_plus[i] = ut * std::min(y_[i] - lo, hi - y_[i]) / nu_;
      s.u_plus[i] = ut > 0.0 ? s.mean[0][i] / ut : 0.0;
      s.uv_plus[i] = ut > 0.0 ? s.uv[i] / (ut * ut) : 0.0;
      for (int c = 0; c < 3; ++c) { s.rms_plus[c][i] = ut > 0.0 ? s.rms[c][i] / ut : 0.0; }
   }
   return s;
}

} // namespace hdiv
