#include "hdiv/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hdiv {

Grading Grading::uniform()
{
   return Grading([](double xi) { return xi; }, "uniform", true, 0.0);
}

Grading Grading::tanh_stretch(double gamma)
{
   if (!(gamma > 0.0)) { throw std::invalid_argument("tanh grading needs gamma > 0"); }
   const double t = std::tanh(gamma);
   return Grading([gamma, t](double xi) { return 0.5 * (1.0 + std::tanh(gamma * (2.0 * xi - 1.0)) / t); },
                  "tanh", false, gamma);
}

Grading Grading::custom(std::function<double(double)> map, std::string name)
{
   return Grading(std::move(map), std::move(name), false, 0.0);
}

Point FaceFrame::map(const std::array<double, 2>& ref) const
{
   Point x = origin;
   for (int t = 0; t < tangent_count; ++t) { x[tangent_axes[t]] += ref[t] * extents[t]; }
   return x;
}

bool CartesianMesh::fully_periodic() const
{
   for (int a = 0; a < dim(); ++a)
   {
      if (spec_.bc[a] == AxisBc::Wall) { return false; }
   }
   return true;
}

double CartesianMesh::volume() const
{
   double v = 1.0;
   for (int a = 0; a < dim(); ++a) { v *= box_length(a); }
   return v;
}

int CartesianMesh::cell_id(const std::array<int, 3>& index) const
{
   return index[0] + cells_per_axis(0) * (index[1] + cells_per_axis(1) * index[2]);
}

int CartesianMesh::neighbor(int cell, int axis, int direction) const
{
   std::array<int, 3> idx = cells_[cell].index;
   const int n = cells_per_axis(axis);
   idx[axis] += direction;
   if (idx[axis] < 0 || idx[axis] >= n)
   {
      if (spec_.bc[axis] == AxisBc::Wall) { return -1; }
      idx[axis] = (idx[axis] + n) % n;
   }
   return cell_id(idx);
}

int CartesianMesh::locate(const Point& x) const
{
   std::array<int, 3> idx{0, 0, 0};
   for (int a = 0; a < dim(); ++a)
   {
      const auto& nd = nodes_[a];
      auto it = std::upper_bound(nd.begin(), nd.end(), x[a]);
      int i = static_cast<int>(it - nd.begin()) - 1;
      idx[a] = std::clamp(i, 0, cells_per_axis(a) - 1);
   }
   return cell_id(idx);
}

FaceFrame CartesianMesh::face_trace_frame(const Face& face) const
{
   FaceFrame frame;
   frame.normal = face.normal;
   frame.origin = face.lower;
   for (int b = 0; b < dim(); ++b)
   {
      if (b == face.axis) { continue; }
      Point t{0.0, 0.0, 0.0};
      t[b] = 1.0;
      frame.tangents[frame.tangent_count] = t;
      frame.tangent_axes[frame.tangent_count] = b;
      frame.extents[frame.tangent_count] = face.upper[b] - face.lower[b];
      ++frame.tangent_count;
   }
   return frame;
}

FaceFrame face_trace_frame(const CartesianMesh& mesh, const Face& face)
{
   return mesh.face_trace_frame(face);
}

CartesianMesh::CartesianMesh(const MeshSpec& spec) : spec_(spec)
{
   const int d = spec_.dim;
   for (int a = d; a < 3; ++a)
   {
      spec_.cells[a] = 1;
      spec_.bc[a] = AxisBc::Periodic;
   }

   for (int a = 0; a < d; ++a)
   {
      const int n = spec_.cells[a];
      nodes_[a].resize(n + 1);
      for (int i = 0; i <= n; ++i)
      {
         const double g = spec_.grading[a](static_cast<double>(i) / n);
         nodes_[a][i] = spec_.lower[a] + (spec_.upper[a] - spec_.lower[a]) * g;
      }
      nodes_[a].front() = spec_.lower[a];
      nodes_[a].back() = spec_.upper[a];
   }
   for (int a = d; a < 3; ++a) { nodes_[a] = {0.0, 1.0}; }

   const int n0 = cells_per_axis(0), n1 = cells_per_axis(1), n2 = cells_per_axis(2);
   cells_.reserve(static_cast<std::size_t>(n0) * n1 * n2);
   for (int k = 0; k < n2; ++k)
   {
      for (int j = 0; j < n1; ++j)
      {
         for (int i = 0; i < n0; ++i)
         {
            Cell c;
            c.id = static_cast<int>(cells_.size());
            c.index = {i, j, k};
            for (int a = 0; a < 3; ++a)
            {
               c.lower[a] = a < d ? nodes_[a][c.index[a]] : 0.0;
               c.upper[a] = a < d ? nodes_[a][c.index[a] + 1] : 0.0;
            }
            cells_.push_back(c);
         }
      }
   }

   // Faces: by normal axis, then plane, then tangential cell index (lexicographic).
   for (int a = 0; a < d; ++a)
   {
      const bool periodic = spec_.bc[a] == AxisBc::Periodic;
      const int n = spec_.cells[a];
      const int planes = periodic ? n : n + 1;
      std::array<int, 3> tcount{n0, n1, n2};
      tcount[a] = 1;
      for (int p = 0; p < planes; ++p)
      {
         for (int k = 0; k < tcount[2]; ++k)
         {
            for (int j = 0; j < tcount[1]; ++j)
            {
               for (int i = 0; i < tcount[0]; ++i)
               {
                  std::array<int, 3> idx{i, j, k};
                  Face f;
                  f.id = static_cast<int>(faces_.size());
                  f.axis = a;
                  f.normal = {0.0, 0.0, 0.0};
                  int upper_cell = -1, lower_cell = -1;
                  if (p < n)
                  {
                     idx[a] = p;
                     upper_cell = cell_id(idx);
                  }
                  if (p > 0 || periodic)
                  {
                     idx[a] = (p - 1 + n) % n;
                     lower_cell = cell_id(idx);
                  }
                  if (upper_cell >= 0 && lower_cell >= 0)
                  {
                     f.kind = FaceKind::Interior;
                     f.left_cell = lower_cell;
                     f.right_cell = upper_cell;
                     f.left_local = 2 * a + 1;
                     f.right_local = 2 * a;
                     f.normal[a] = 1.0;
                     f.periodic_seam = periodic && p == 0;
                  }
                  else if (upper_cell >= 0)
                  {
                     f.kind = FaceKind::Wall;
                     f.left_cell = upper_cell;
                     f.left_local = 2 * a;
                     f.normal[a] = -1.0;
                  }
                  else
                  {
                     f.kind = FaceKind::Wall;
                     f.left_cell = lower_cell;
                     f.left_local = 2 * a + 1;
                     f.normal[a] = 1.0;
                  }
                  // Geometry from the adjacent cell(s); the seam face sits on the lower boundary.
                  const Cell& ref = cells_[f.right_cell >= 0 ? f.right_cell : f.left_cell];
                  f.lower = ref.lower;
                  f.upper = ref.upper;
                  const double plane = (f.kind == FaceKind::Wall && f.left_local == 2 * a + 1)
                                          ? ref.upper[a] : ref.lower[a];
                  f.lower[a] = plane;
                  f.upper[a] = plane;
                  f.area = 1.0;
                  f.diameter = 0.0;
                  for (int b = 0; b < d; ++b)
                  {
                     if (b == a) { continue; }
                     f.area *= ref.width(b);
                     f.diameter = std::max(f.diameter, ref.width(b));
                  }
                  if (d == 1) { f.diameter = 1.0; }
                  double normal_width = cells_[f.left_cell].width(a);
                  if (f.right_cell >= 0) { normal_width = std::min(normal_width, cells_[f.right_cell].width(a)); }
                  f.penalty_length = std::min(f.diameter, normal_width);

                  cells_[f.left_cell].faces[f.left_local] = f.id;
                  cells_[f.left_cell].orientation[f.left_local] = 1;
                  if (f.right_cell >= 0)
                  {
                     cells_[f.right_cell].faces[f.right_local] = f.id;
                     cells_[f.right_cell].orientation[f.right_local] = -1;
                  }
                  faces_.push_back(f);
               }
            }
         }
      }
   }
}

std::shared_ptr<const CartesianMesh> build_cartesian_mesh(const MeshSpec& spec)
{
   if (spec.dim < 2 || spec.dim > 3) { throw std::invalid_argument("mesh dimension must be 2 or 3"); }
   for (int a = 0; a < spec.dim; ++a)
   {
      if (spec.cells[a] < 1)
      {
         throw std::invalid_argument("cell count on axis " + std::to_string(a) + " must be >= 1");
      }
      if (!(spec.upper[a] > spec.lower[a]))
      {
         throw std::invalid_argument("empty domain interval on axis " + std::to_string(a));
      }
      const Grading& g = spec.grading[a];
      if (std::abs(g(0.0)) > 1e-12 || std::abs(g(1.0) - 1.0) > 1e-12)
      {
         throw std::invalid_argument("grading on axis " + std::to_string(a) + " must map 0->0 and 1->1");
      }
      // Strict monotonicity on a dense sample and at the actual nodes.
      const int samples = std::max(1024, 8 * spec.cells[a]);
      double prev = g(0.0);
      for (int i = 1; i <= samples; ++i)
      {
         const double v = g(static_cast<double>(i) / samples);
         if (!(v > prev))
         {
            throw std::invalid_argument("grading on axis " + std::to_string(a) + " is not strictly increasing");
         }
         prev = v;
      }
   }
   return std::make_shared<const CartesianMesh>(spec);
}

} // namespace hdiv
