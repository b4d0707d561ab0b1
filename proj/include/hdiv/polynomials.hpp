#pragma once

// One-dimensional polynomial families on the unit interval [0,1] used to build
// the tensor-product velocity and pressure bases.

#include <vector>

namespace hdiv {

/// Value and first two derivatives of a 1D function at a point.
struct Jet1D
{
   double value = 0.0;
   double d1 = 0.0;
   double d2 = 0.0;
};

/// Legendre polynomial P_n on [-1,1] with derivatives, evaluated at xi.
Jet1D legendre(int n, double xi);

/// L2(0,1)-orthonormal Legendre polynomial sqrt(2n+1) P_n(2s-1).
Jet1D orthonormal_legendre(int n, double s);

/// Hierarchical H1 family on [0,1]: index 0 is 1-s, index 1 is s and
/// index m >= 2 is the integrated Legendre bubble of degree m, which vanishes
/// at both endpoints.
Jet1D lobatto(int m, double s);

/// Tabulated family at a fixed set of points: table[i][q].
struct Table1D
{
   std::vector<std::vector<Jet1D>> entries;

   const Jet1D& operator()(int i, int q) const { return entries[i][q]; }
   int size() const { return static_cast<int>(entries.size()); }
};

Table1D tabulate_legendre(int max_degree, const std::vector<double>& points);
Table1D tabulate_lobatto(int max_degree, const std::vector<double>& points);

} // namespace hdiv
