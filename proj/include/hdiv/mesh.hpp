#pragma once

// Structured quadrilateral/hexahedral meshes of an axis-aligned box with
// periodic or wall boundaries per axis.

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace hdiv {

using Point = std::array<double, 3>;

enum class AxisBc { Periodic, Wall };

/// Monotone node map [0,1] -> [0,1] applied per axis.
class Grading
{
public:
   static Grading uniform();
   /// Two-sided hyperbolic-tangent clustering towards both ends of the axis.
   static Grading tanh_stretch(double gamma);
   static Grading custom(std::function<double(double)> map, std::string name = "custom");

   double operator()(double xi) const { return map_(xi); }
   const std::string& name() const { return name_; }
   bool is_uniform() const { return uniform_; }
   double gamma() const { return gamma_; }

private:
   Grading(std::function<double(double)> map, std::string name, bool uniform, double gamma)
      : map_(std::move(map)), name_(std::move(name)), uniform_(uniform), gamma_(gamma) {}

   std::function<double(double)> map_;
   std::string name_;
   bool uniform_ = true;
   double gamma_ = 0.0;
};

struct MeshSpec
{
   int dim = 2;
   std::array<int, 3> cells{1, 1, 1};
   std::array<double, 3> lower{0.0, 0.0, 0.0};
   std::array<double, 3> upper{1.0, 1.0, 1.0};
   std::array<AxisBc, 3> bc{AxisBc::Periodic, AxisBc::Periodic, AxisBc::Periodic};
   std::array<Grading, 3> grading{Grading::uniform(), Grading::uniform(), Grading::uniform()};
};

enum class FaceKind { Interior, Wall };

struct Face
{
   int id = -1;
   FaceKind kind = FaceKind::Interior;
   int axis = 0;                 ///< the face is normal to this coordinate axis
   int left_cell = -1;
   int right_cell = -1;          ///< -1 on wall faces
   int left_local = -1;          ///< local face index 2*axis+side within left_cell
   int right_local = -1;
   Point normal{0.0, 0.0, 0.0};  ///< unit normal, left -> right (outward on walls)
   double diameter = 0.0;        ///< longest edge of the face
   double penalty_length = 0.0;  ///< length scale of the SIP penalty (see README)
   double area = 0.0;
   Point lower{0.0, 0.0, 0.0};   ///< face box (degenerate along `axis`)
   Point upper{0.0, 0.0, 0.0};
   bool periodic_seam = false;

   bool is_wall() const { return kind == FaceKind::Wall; }
};

struct Cell
{
   int id = -1;
   std::array<int, 3> index{0, 0, 0};
   Point lower{0.0, 0.0, 0.0};
   Point upper{0.0, 0.0, 0.0};
   std::array<int, 6> faces{-1, -1, -1, -1, -1, -1};   ///< by local index 2*axis+side
   std::array<int, 6> orientation{0, 0, 0, 0, 0, 0};  ///< +1 if the face normal points outward

   double width(int axis) const { return upper[axis] - lower[axis]; }
};

/// Orthonormal frame of a face together with its reference-to-physical map.
struct FaceFrame
{
   Point normal{};
   std::array<Point, 2> tangents{};
   int tangent_count = 0;
   std::array<int, 2> tangent_axes{-1, -1};
   Point origin{};
   std::array<double, 2> extents{0.0, 0.0};

   /// Maps reference face coordinates in [0,1]^(dim-1) to the physical face.
   Point map(const std::array<double, 2>& ref) const;
};

class CartesianMesh
{
public:
   explicit CartesianMesh(const MeshSpec& spec);

   int dim() const { return spec_.dim; }
   const MeshSpec& spec() const { return spec_; }
   int cells_per_axis(int axis) const { return axis < dim() ? spec_.cells[axis] : 1; }
   AxisBc bc(int axis) const { return spec_.bc[axis]; }
   bool fully_periodic() const;
   bool has_walls() const { return !fully_periodic(); }

   const std::vector<Cell>& cells() const { return cells_; }
   const std::vector<Face>& faces() const { return faces_; }
   const Cell& cell(int id) const { return cells_[id]; }
   const Face& face(int id) const { return faces_[id]; }
   int num_cells() const { return static_cast<int>(cells_.size()); }
   int num_faces() const { return static_cast<int>(faces_.size()); }

   const std::vector<double>& nodes(int axis) const { return nodes_[axis]; }
   double volume() const;
   double box_length(int axis) const { return spec_.upper[axis] - spec_.lower[axis]; }

   int cell_id(const std::array<int, 3>& index) const;
   /// Neighbour across the given axis in direction +1/-1; -1 at a wall.
   int neighbor(int cell, int axis, int direction) const;
   /// Cell containing a physical point (points on faces go to the upper cell).
   int locate(const Point& x) const;

   FaceFrame face_trace_frame(const Face& face) const;

private:
   MeshSpec spec_;
   std::array<std::vector<double>, 3> nodes_;
   std::vector<Cell> cells_;
   std::vector<Face> faces_;
};

/// Validates the spec and builds the mesh; throws std::invalid_argument on a
/// zero cell count, bad dimension, empty box or non-monotone grading.
std::shared_ptr<const CartesianMesh> build_cartesian_mesh(const MeshSpec& spec);

FaceFrame face_trace_frame(const CartesianMesh& mesh, const Face& face);

} // namespace hdiv
