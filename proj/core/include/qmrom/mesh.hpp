#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "qmrom/types.hpp"

namespace qmrom {

/// Quadratic boundary edge: corner, midside, corner.
struct Edge {
  std::array<Index, 3> nodes;
};

/// 6-node triangle connectivity: three corners counterclockwise, then the
/// midside nodes of edges (0,1), (1,2), (2,0).
using Tri6 = std::array<Index, 6>;

struct Mesh {
  std::vector<Point2> nodes;
  std::vector<Tri6> elements;
  std::map<std::string, std::vector<Edge>, std::less<>> edge_sets;
  std::map<std::string, std::vector<Index>, std::less<>> node_sets;

  Index node_count() const { return static_cast<Index>(nodes.size()); }
  Index element_count() const { return static_cast<Index>(elements.size()); }

  /// Signed area of the corner triangle of element `e`.
  double corner_area(Index e) const;
  double total_area() const;
  /// Diagonal of the axis-aligned bounding box.
  double bounding_diagonal() const;

  /// Throws InvalidArgument when any mesh invariant is violated.
  void validate() const;
};

/// Structured nx-by-ny grid of rectangles on [0,length]x[0,height], every
/// rectangle split along its lower-left/upper-right diagonal. Nodes are
/// numbered with y running fastest. Edge and node sets: left, right, top, bottom.
Mesh generate_beam_mesh(double length, double height, int nx, int ny);

/// How the length parameter of an arch is measured.
enum class ArchLength { chord, arc };

/// Beam grid bent onto a circular arc. The centreline has the given radius and
/// spans `length` either as straight-line chord or as arc length. Thickness is
/// measured along the radius.
Mesh generate_arch_mesh(double length, double thickness, double radius, int nx, int ny,
                        ArchLength interpretation = ArchLength::chord);

struct Box {
  double xmin, xmax, ymin, ymax;
  bool contains(const Point2& p) const {
    return p.x() >= xmin && p.x() <= xmax && p.y() >= ymin && p.y() <= ymax;
  }
};

/// Ascending node indices inside the closed box. May be empty.
std::vector<Index> select_nodes(const Mesh& mesh, const Box& box);
/// Ascending node indices of a named node set; NotFound for unknown names.
std::vector<Index> select_nodes(const Mesh& mesh, std::string_view set_name);

/// Plain-text export; see docs/formats.md.
void write_mesh(std::ostream& out, const Mesh& mesh);
Mesh read_mesh(std::istream& in);

}  // namespace qmrom
