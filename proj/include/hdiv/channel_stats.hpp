#pragma once

// Plane- and time-averaged statistics of channel flow between walls normal
// to x2, periodic along the other axes.

#include "hdiv/fespace.hpp"

#include <memory>
#include <vector>

namespace hdiv {

struct ChannelStats
{
   double nu = 0.0;
   int samples = 0;
   double t_begin = 0.0;
   double t_end = 0.0;
   std::vector<double> y;                    ///< x2 of the averaging layers (ascending)
   std::array<std::vector<double>, 3> mean;  ///< <u_i>(y)
   std::vector<double> uu, vv, ww, uv;       ///< <u_1'u_1'>, <u_2'u_2'>, <u_3'u_3'>, <u_1'u_2'>
   std::array<std::vector<double>, 3> rms;
   double tau_wall = 0.0;                    ///< nu d<u_1>/dn averaged over both walls
   double u_tau = 0.0;
   double re_tau = 0.0;                      ///< u_tau H / nu with H the half width
   std::vector<double> y_plus;               ///< wall distance in wall units
   std::vector<double> u_plus;
   std::vector<double> uv_plus;
   std::array<std::vector<double>, 3> rms_plus;
};

class ChannelStatsAccumulator
{
public:
   /// `points_per_cell` Gauss layers per cell along x2 (<= 0: k + 2).
   /// Throws std::invalid_argument unless axis 1 has walls and the others are periodic.
   ChannelStatsAccumulator(std::shared_ptr<const VelocitySpace> space, double nu, int points_per_cell = 0);

   void add(const Eigen::VectorXd& u, double t);
   int count() const { return count_; }
   /// Throws std::runtime_error for an empty window.
   ChannelStats result() const;

private:
   std::shared_ptr<const VelocitySpace> space_;
   double nu_;
   std::vector<double> layer_ref_;   ///< Gauss points in [0,1]
   std::vector<double> plane_pts_;   ///< Gauss points for the x1/x3 averages
   std::vector<double> plane_w_;
   std::vector<double> y_;
   std::array<std::vector<double>, 3> sum_u_;
   std::array<std::vector<double>, 6> sum_uu_;  ///< 11 22 33 12 13 23
   double sum_wall_grad_ = 0.0;
   int count_ = 0;
   double t_begin_ = 0.0;
   double t_end_ = 0.0;
};

} // namespace hdiv
