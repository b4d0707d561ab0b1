#include "hdiv/quadrature.hpp"

#include "hdiv/polynomials.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hdiv {

GaussRule1D gauss_legendre(int n)
{
   if (n < 1) { throw std::invalid_argument("gauss_legendre: need at least one point"); }
   GaussRule1D rule;
   rule.points.resize(n);
   rule.weights.resize(n);
   for (int i = 0; i < n; ++i)
   {
      double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      for (int it = 0; it < 100; ++it)
      {
         const Jet1D p = legendre(n, x);
         const double dx = p.value / p.d1;
         x -= dx;
         if (std::abs(dx) < 1e-16) { break; }
      }
      const Jet1D p = legendre(n, x);
      // Map [-1,1] -> [0,1]; weights scale by 1/2.
      rule.points[i] = 0.5 * (1.0 - x);
      rule.weights[i] = 1.0 / ((1.0 - x * x) * p.d1 * p.d1);
   }
   // Ascending order.
   std::vector<int> order(n);
   for (int i = 0; i < n; ++i) { order[i] = i; }
   std::sort(order.begin(), order.end(),
             [&](int a, int b) { return rule.points[a] < rule.points[b]; });
   GaussRule1D sorted;
   for (int i : order)
   {
      sorted.points.push_back(rule.points[i]);
      sorted.weights.push_back(rule.weights[i]);
   }
   return sorted;
}

QuadratureRule gauss_rule_points(int n, int dim)
{
   if (dim < 0 || dim > 3) { throw std::invalid_argument("gauss_rule: dim must be 0..3"); }
   QuadratureRule q;
   q.dim = dim;
   q.degree = 2 * n - 1;
   q.line = gauss_legendre(n);
   const int total = dim == 0 ? 1 : static_cast<int>(std::pow(n, dim));
   q.points.reserve(total);
   q.weights.reserve(total);
   const int n1 = dim >= 1 ? n : 1;
   const int n2 = dim >= 2 ? n : 1;
   const int n3 = dim >= 3 ? n : 1;
   for (int k = 0; k < n3; ++k)
   {
      for (int j = 0; j < n2; ++j)
      {
         for (int i = 0; i < n1; ++i)
         {
            std::array<double, 3> x{0.0, 0.0, 0.0};
            double w = 1.0;
            if (dim >= 1) { x[0] = q.line.points[i]; w *= q.line.weights[i]; }
            if (dim >= 2) { x[1] = q.line.points[j]; w *= q.line.weights[j]; }
            if (dim >= 3) { x[2] = q.line.points[k]; w *= q.line.weights[k]; }
            q.points.push_back(x);
            q.weights.push_back(w);
         }
      }
   }
   return q;
}

QuadratureRule gauss_rule(int degree, int dim)
{
   if (degree < 0) { throw std::invalid_argument("gauss_rule: negative degree"); }
   const int n = std::max(1, (degree + 2) / 2);
   QuadratureRule q = gauss_rule_points(n, dim);
   return q;
}

int form_quadrature_degree(int k)
{
   // 2k+3 covers mass and SIP integrands; 3k+2 is needed for the convective
   // volume/facet integrands b.grad(u).v to be integrated exactly.
   return std::max(2 * k + 3, 3 * k + 2);
}

int data_quadrature_points(int k) { return std::max(k + 5, 12); }

} // namespace hdiv
