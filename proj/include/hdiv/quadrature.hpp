#pragma once

#include <array>
#include <vector>

namespace hdiv {

/// Gauss-Legendre points and weights on [0,1] with `n` points (exact for
/// polynomials of degree 2n-1).
struct GaussRule1D
{
   std::vector<double> points;
   std::vector<double> weights;
};

GaussRule1D gauss_legendre(int n);

/// Tensor-product Gauss rule on the reference box [0,1]^dim.
///
/// Points are stored with the first coordinate running fastest. The same
/// object serves as a face rule when built with dim-1.
struct QuadratureRule
{
   int dim = 0;
   int degree = 0;                 ///< exactness per coordinate direction
   GaussRule1D line;               ///< underlying 1D rule
   std::vector<std::array<double, 3>> points;
   std::vector<double> weights;

   int size() const { return static_cast<int>(weights.size()); }
   int points_per_axis() const { return static_cast<int>(line.points.size()); }
};

/// Tensor Gauss rule exact for polynomials up to `degree` in each variable.
QuadratureRule gauss_rule(int degree, int dim);

/// Rule built directly from a point count per axis.
QuadratureRule gauss_rule_points(int points_per_axis, int dim);

/// Volume/face rule degree used by the bilinear and trilinear forms for order k.
int form_quadrature_degree(int k);

/// Higher rule used for projecting non-polynomial data (interpolation, loads).
int data_quadrature_points(int k);

} // namespace hdiv
