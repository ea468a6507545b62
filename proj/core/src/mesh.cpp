#include "qmrom/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "qmrom/errors.hpp"

namespace qmrom {
namespace {

struct Grid {
  int nx, ny;
  Index rows() const { return 2 * ny + 1; }
  Index id(Index i, Index j) const { return i * rows() + j; }
};

Mesh build_grid(double length, double height, int nx, int ny) {
  if (!(length > 0.0) || !(height > 0.0))
    throw InvalidArgument("mesh dimensions must be positive");
  if (nx < 1 || ny < 1) throw InvalidArgument("mesh cell counts must be at least 1");

  const Grid g{nx, ny};
  Mesh mesh;
  mesh.nodes.reserve(static_cast<std::size_t>((2 * nx + 1) * (2 * ny + 1)));
  for (Index i = 0; i <= 2 * nx; ++i)
    for (Index j = 0; j <= 2 * ny; ++j)
      mesh.nodes.emplace_back(length * static_cast<double>(i) / (2.0 * nx),
                              height * static_cast<double>(j) / (2.0 * ny));

  mesh.elements.reserve(static_cast<std::size_t>(2 * nx * ny));
  for (Index ex = 0; ex < nx; ++ex) {
    for (Index ey = 0; ey < ny; ++ey) {
      const Index i = 2 * ex, j = 2 * ey;
      const Index bl = g.id(i, j), br = g.id(i + 2, j);
      const Index tr = g.id(i + 2, j + 2), tl = g.id(i, j + 2);
      const Index centre = g.id(i + 1, j + 1);
      mesh.elements.push_back({bl, br, tr, g.id(i + 1, j), g.id(i + 2, j + 1), centre});
      mesh.elements.push_back({bl, tr, tl, centre, g.id(i + 1, j + 2), g.id(i, j + 1)});
    }
  }

  auto& bottom = mesh.edge_sets["bottom"];
  auto& top = mesh.edge_sets["top"];
  for (Index ex = 0; ex < nx; ++ex) {
    const Index i = 2 * ex;
    bottom.push_back({{g.id(i, 0), g.id(i + 1, 0), g.id(i + 2, 0)}});
    top.push_back({{g.id(i + 2, 2 * ny), g.id(i + 1, 2 * ny), g.id(i, 2 * ny)}});
  }
  auto& left = mesh.edge_sets["left"];
  auto& right = mesh.edge_sets["right"];
  for (Index ey = 0; ey < ny; ++ey) {
    const Index j = 2 * ey;
    right.push_back({{g.id(2 * nx, j), g.id(2 * nx, j + 1), g.id(2 * nx, j + 2)}});
    left.push_back({{g.id(0, j + 2), g.id(0, j + 1), g.id(0, j)}});
  }

  for (const auto& [name, edges] : mesh.edge_sets) {
    std::set<Index> ids;
    for (const auto& e : edges) ids.insert(e.nodes.begin(), e.nodes.end());
    mesh.node_sets[name] = std::vector<Index>(ids.begin(), ids.end());
  }
  return mesh;
}

}  // namespace

double Mesh::corner_area(Index e) const {
  const auto& el = elements.at(static_cast<std::size_t>(e));
  const Point2& a = nodes[static_cast<std::size_t>(el[0])];
  const Point2& b = nodes[static_cast<std::size_t>(el[1])];
  const Point2& c = nodes[static_cast<std::size_t>(el[2])];
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

double Mesh::total_area() const {
  double area = 0.0;
  for (Index e = 0; e < element_count(); ++e) area += corner_area(e);
  return area;
}

double Mesh::bounding_diagonal() const {
  if (nodes.empty()) return 0.0;
  Point2 lo = nodes.front(), hi = nodes.front();
  for (const auto& p : nodes) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return (hi - lo).norm();
}

void Mesh::validate() const {
  const Index n = node_count();
  for (Index e = 0; e < element_count(); ++e) {
    const auto& el = elements[static_cast<std::size_t>(e)];
    for (Index id : el)
      if (id < 0 || id >= n)
        throw InvalidArgument("element " + std::to_string(e) + " references node out of range");
    if (!(corner_area(e) > 0.0))
      throw InvalidArgument("element " + std::to_string(e) + " is not counterclockwise");
    constexpr int pairs[3][2] = {{0, 1}, {1, 2}, {2, 0}};
    for (int m = 0; m < 3; ++m) {
      const Point2 mid = 0.5 * (nodes[static_cast<std::size_t>(el[pairs[m][0]])] +
                                nodes[static_cast<std::size_t>(el[pairs[m][1]])]);
      if ((mid - nodes[static_cast<std::size_t>(el[3 + m])]).norm() > 1e-12)
        throw InvalidArgument("element " + std::to_string(e) + " has an off-centre midside node");
    }
  }
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    const auto& pa = nodes[static_cast<std::size_t>(a)];
    const auto& pb = nodes[static_cast<std::size_t>(b)];
    return pa.x() < pb.x() || (pa.x() == pb.x() && pa.y() < pb.y());
  });
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto& p = nodes[static_cast<std::size_t>(order[k])];
    for (std::size_t l = k + 1; l < order.size(); ++l) {
      const auto& q = nodes[static_cast<std::size_t>(order[l])];
      if (q.x() - p.x() > 1e-12) break;
      if ((q - p).norm() <= 1e-12)
        throw InvalidArgument("duplicate nodes " + std::to_string(order[k]) + " and " +
                              std::to_string(order[l]));
    }
  }
}

Mesh generate_beam_mesh(double length, double height, int nx, int ny) {
  return build_grid(length, height, nx, ny);
}

Mesh generate_arch_mesh(double length, double thickness, double radius, int nx, int ny,
                        ArchLength interpretation) {
  if (!(length > 0.0) || !(thickness > 0.0))
    throw InvalidArgument("arch dimensions must be positive");
  double half_angle = 0.0;
  if (interpretation == ArchLength::chord) {
    if (!(radius > 0.5 * length)) throw InvalidArgument("arch radius must exceed half the chord");
    half_angle = std::asin(0.5 * length / radius);
  } else {
    if (!(radius > 0.0) || 0.5 * length / radius >= 0.5 * M_PI)
      throw InvalidArgument("arch radius too small for the given arc length");
    half_angle = 0.5 * length / radius;
  }
  const double chord = 2.0 * radius * std::sin(half_angle);

  Mesh mesh = build_grid(length, thickness, nx, ny);
  for (auto& p : mesh.nodes) {
    const double s = p.x() / length;  // 0..1 along the span
    const double phi = (2.0 * s - 1.0) * half_angle;
    const double offset = p.y() - 0.5 * thickness;
    const double r = radius + offset;
    // r*cos(phi) - radius*cos(half_angle), written to stay accurate for huge radii
    const double drop = -2.0 * radius * std::sin(0.5 * (phi + half_angle)) *
                        std::sin(0.5 * (phi - half_angle));
    p = Point2(0.5 * chord + r * std::sin(phi),
               0.5 * thickness + drop + offset * std::cos(phi));
  }
  // Midside nodes return to the chord midpoint of their corners (straight-edged elements).
  for (const auto& el : mesh.elements) {
    constexpr int pairs[3][2] = {{0, 1}, {1, 2}, {2, 0}};
    for (int m = 0; m < 3; ++m)
      mesh.nodes[static_cast<std::size_t>(el[3 + m])] =
          0.5 * (mesh.nodes[static_cast<std::size_t>(el[pairs[m][0]])] +
                 mesh.nodes[static_cast<std::size_t>(el[pairs[m][1]])]);
  }
  return mesh;
}

std::vector<Index> select_nodes(const Mesh& mesh, const Box& box) {
  std::vector<Index> out;
  for (Index i = 0; i < mesh.node_count(); ++i)
    if (box.contains(mesh.nodes[static_cast<std::size_t>(i)])) out.push_back(i);
  return out;
}

std::vector<Index> select_nodes(const Mesh& mesh, std::string_view set_name) {
  const auto it = mesh.node_sets.find(set_name);
  if (it == mesh.node_sets.end())
    throw NotFound("unknown node set '" + std::string(set_name) + "'");
  return it->second;
}

void write_mesh(std::ostream& out, const Mesh& mesh) {
  out.precision(17);
  out << "qmrom-mesh 1\n";
  out << "nodes " << mesh.node_count() << '\n';
  for (Index i = 0; i < mesh.node_count(); ++i) {
    const auto& p = mesh.nodes[static_cast<std::size_t>(i)];
    out << i << ' ' << p.x() << ' ' << p.y() << '\n';
  }
  out << "elements " << mesh.element_count() << '\n';
  for (Index e = 0; e < mesh.element_count(); ++e) {
    out << e;
    for (Index id : mesh.elements[static_cast<std::size_t>(e)]) out << ' ' << id;
    out << '\n';
  }
  for (const auto& [name, edges] : mesh.edge_sets) {
    out << "edgeset " << name << ' ' << edges.size() << '\n';
    for (const auto& e : edges) out << e.nodes[0] << ' ' << e.nodes[1] << ' ' << e.nodes[2] << '\n';
  }
}

Mesh read_mesh(std::istream& in) {
  auto expect = [&](const std::string& word) {
    std::string token;
    if (!(in >> token) || token != word)
      throw InvalidArgument("mesh file: expected '" + word + "', got '" + token + "'");
  };
  expect("qmrom-mesh");
  int version = 0;
  in >> version;
  if (version != 1) throw InvalidArgument("mesh file: unsupported version");
  Mesh mesh;
  Index count = 0, id = 0;
  expect("nodes");
  in >> count;
  mesh.nodes.resize(static_cast<std::size_t>(count));
  for (Index i = 0; i < count; ++i) {
    double x = 0, y = 0;
    in >> id >> x >> y;
    mesh.nodes[static_cast<std::size_t>(i)] = Point2(x, y);
  }
  expect("elements");
  in >> count;
  mesh.elements.resize(static_cast<std::size_t>(count));
  for (Index e = 0; e < count; ++e) {
    in >> id;
    for (auto& n : mesh.elements[static_cast<std::size_t>(e)]) in >> n;
  }
  std::string token;
  while (in >> token) {
    if (token != "edgeset") throw InvalidArgument("mesh file: unexpected token '" + token + "'");
    std::string name;
    in >> name >> count;
    auto& edges = mesh.edge_sets[name];
    std::set<Index> ids;
    for (Index k = 0; k < count; ++k) {
      Edge e{};
      in >> e.nodes[0] >> e.nodes[1] >> e.nodes[2];
      ids.insert(e.nodes.begin(), e.nodes.end());
      edges.push_back(e);
    }
    mesh.node_sets[name] = std::vector<Index>(ids.begin(), ids.end());
  }
  if (in.bad()) throw InvalidArgument("mesh file: read error");
  return mesh;
}

}  // namespace qmrom
