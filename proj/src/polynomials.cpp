#include "hdiv/polynomials.hpp"

#include <cmath>
#include <stdexcept>

namespace hdiv {

Jet1D legendre(int n, double xi)
{
   if (n < 0) { throw std::invalid_argument("legendre: negative degree"); }
   // Three-term recurrences for P_n, P_n' and P_n''.
   double p0 = 1.0, p1 = xi;
   double d0 = 0.0, d1 = 1.0;
   double s0 = 0.0, s1 = 0.0;
   if (n == 0) { return {1.0, 0.0, 0.0}; }
   for (int m = 1; m < n; ++m)
   {
      const double p2 = ((2.0 * m + 1.0) * xi * p1 - m * p0) / (m + 1.0);
      const double d2 = d0 + (2.0 * m + 1.0) * p1;
      const double s2 = s0 + (2.0 * m + 1.0) * d1;
      p0 = p1; p1 = p2;
      d0 = d1; d1 = d2;
      s0 = s1; s1 = s2;
   }
   return {p1, d1, s1};
}

Jet1D orthonormal_legendre(int n, double s)
{
   const Jet1D p = legendre(n, 2.0 * s - 1.0);
   const double c = std::sqrt(2.0 * n + 1.0);
   return {c * p.value, 2.0 * c * p.d1, 4.0 * c * p.d2};
}

Jet1D lobatto(int m, double s)
{
   if (m == 0) { return {1.0 - s, -1.0, 0.0}; }
   if (m == 1) { return {s, 1.0, 0.0}; }
   if (m < 0) { throw std::invalid_argument("lobatto: negative index"); }
   const double xi = 2.0 * s - 1.0;
   const Jet1D a = legendre(m, xi);
   const Jet1D b = legendre(m - 2, xi);
   const double c = 1.0 / std::sqrt(2.0 * (2.0 * m - 1.0));
   return {c * (a.value - b.value), 2.0 * c * (a.d1 - b.d1), 4.0 * c * (a.d2 - b.d2)};
}

namespace {

template <typename F>
Table1D tabulate(int count, const std::vector<double>& points, F&& f)
{
   Table1D t;
   t.entries.resize(count);
   for (int i = 0; i < count; ++i)
   {
      t.entries[i].reserve(points.size());
      for (double s : points) { t.entries[i].push_back(f(i, s)); }
   }
   return t;
}

} // namespace

Table1D tabulate_legendre(int max_degree, const std::vector<double>& points)
{
   return tabulate(max_degree + 1, points, orthonormal_legendre);
}

Table1D tabulate_lobatto(int max_degree, const std::vector<double>& points)
{
   return tabulate(max_degree + 1, points, lobatto);
}

} // namespace hdiv
