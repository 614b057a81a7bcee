#include "vdpg/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "vdpg/quadrature.hpp"
#include "vdpg/spaces.hpp"

namespace vdpg {

using Eigen::Vector2d;

const char* to_string(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::interior: return "interior";
    case BoundaryTag::inflow: return "inflow";
    case BoundaryTag::outflow: return "outflow";
    case BoundaryTag::wall: return "wall";
    case BoundaryTag::cylinder: return "cylinder";
    case BoundaryTag::reflective: return "reflective";
  }
  return "interior";
}

BoundaryTag boundary_tag_from_string(const std::string& name) {
  for (BoundaryTag t : {BoundaryTag::interior, BoundaryTag::inflow, BoundaryTag::outflow, BoundaryTag::wall,
                        BoundaryTag::cylinder, BoundaryTag::reflective})
    if (name == to_string(t)) return t;
  throw std::invalid_argument("unknown boundary tag: " + name);
}

void BenchGeometry::validate() const {
  const double R = cylinder_radius;
  std::ostringstream err;
  if (!(R > 0)) err << "cylinder_radius must be > 0; ";
  if (!(half_channel_height > R)) err << "half_channel_height must exceed the cylinder radius; ";
  if (!(upstream_length >= 2 * R)) err << "upstream_length must be >= 2R; ";
  if (!(downstream_length >= 2 * R)) err << "downstream_length must be >= 2R; ";
  if (!err.str().empty()) throw std::invalid_argument("BenchGeometry: " + err.str());
}

double BenchGeometry::area() const {
  const double pi = std::acos(-1.0);
  return (upstream_length + downstream_length) * half_channel_height -
         0.5 * pi * cylinder_radius * cylinder_radius;
}

Curve Curve::line(const Vector2d& a, const Vector2d& b) {
  Curve c;
  c.kind = Kind::line;
  c.p0 = a;
  c.p1 = b;
  return c;
}

Curve Curve::arc(const Vector2d& center, double radius, double theta0, double theta1) {
  Curve c;
  c.kind = Kind::arc;
  c.center = center;
  c.radius = radius;
  c.theta0 = theta0;
  c.theta1 = theta1;
  c.p0 = c.point(-1);
  c.p1 = c.point(1);
  return c;
}

Vector2d Curve::point(double t) const {
  if (kind == Kind::line) return p0 + 0.5 * (t + 1) * (p1 - p0);
  const double th = theta0 + 0.5 * (t + 1) * (theta1 - theta0);
  return center + radius * Vector2d(std::cos(th), std::sin(th));
}

Vector2d Curve::tangent(double t) const {
  if (kind == Kind::line) return 0.5 * (p1 - p0);
  const double th = theta0 + 0.5 * (t + 1) * (theta1 - theta0);
  return 0.5 * (theta1 - theta0) * radius * Vector2d(-std::sin(th), std::cos(th));
}

bool RootCell::curved() const {
  return std::any_of(sides.begin(), sides.end(), [](const Curve& c) { return c.kind == Curve::Kind::arc; });
}

std::vector<int> Mesh::active_elements() const {
  std::vector<int> ids;
  for (int e = 0; e < static_cast<int>(elements.size()); ++e)
    if (elements[e].active) ids.push_back(e);
  return ids;
}

int Mesh::num_active() const {
  return static_cast<int>(std::count_if(elements.begin(), elements.end(), [](const Element& e) { return e.active; }));
}

namespace {

// Transfinite (Gordon-Hall) map of a root cell.
MapPoint root_map(const RootCell& r, double xi, double eta) {
  const auto& c = r.corners;
  const Vector2d g0 = r.sides[0].point(xi), g1 = r.sides[1].point(eta);
  const Vector2d g2 = r.sides[2].point(-xi), g3 = r.sides[3].point(-eta);
  const Vector2d d0 = r.sides[0].tangent(xi), d1 = r.sides[1].tangent(eta);
  const Vector2d d2 = r.sides[2].tangent(-xi), d3 = r.sides[3].tangent(-eta);
  const double a0 = 0.25 * (1 - xi) * (1 - eta), a1 = 0.25 * (1 + xi) * (1 - eta);
  const double a2 = 0.25 * (1 + xi) * (1 + eta), a3 = 0.25 * (1 - xi) * (1 + eta);
  MapPoint m;
  m.x = 0.5 * (1 - eta) * g0 + 0.5 * (1 + eta) * g2 + 0.5 * (1 - xi) * g3 + 0.5 * (1 + xi) * g1 -
        (a0 * c[0] + a1 * c[1] + a2 * c[2] + a3 * c[3]);
  const Vector2d bxi = 0.25 * (-(1 - eta) * c[0] + (1 - eta) * c[1] + (1 + eta) * c[2] - (1 + eta) * c[3]);
  const Vector2d beta = 0.25 * (-(1 - xi) * c[0] - (1 + xi) * c[1] + (1 + xi) * c[2] + (1 - xi) * c[3]);
  m.J.col(0) = 0.5 * (1 - eta) * d0 - 0.5 * (1 + eta) * d2 - 0.5 * g3 + 0.5 * g1 - bxi;
  m.J.col(1) = -0.5 * g0 + 0.5 * g2 - 0.5 * (1 - xi) * d3 + 0.5 * (1 + xi) * d1 - beta;
  return m;
}

MapPoint box_map(const RootCell& r, const RefBox& b, double xi, double eta) {
  const double hx = 0.5 * (b.x1 - b.x0), hy = 0.5 * (b.y1 - b.y0);
  MapPoint m = root_map(r, b.x0 + (xi + 1) * hx, b.y0 + (eta + 1) * hy);
  m.J.col(0) *= hx;
  m.J.col(1) *= hy;
  return m;
}

struct MeshBuilder {
  Mesh mesh;
  std::map<std::pair<long long, long long>, int> vertex_index;
  std::map<std::pair<int, int>, int> edge_index;

  int vertex(const Vector2d& x) {
    const auto key = std::make_pair(std::llround(x.x() * 1e9), std::llround(x.y() * 1e9));
    auto it = vertex_index.find(key);
    if (it != vertex_index.end()) return it->second;
    mesh.vertices.push_back(x);
    const int id = static_cast<int>(mesh.vertices.size()) - 1;
    vertex_index.emplace(key, id);
    return id;
  }

  int edge(int a, int b) {
    const auto key = std::minmax(a, b);
    auto it = edge_index.find(key);
    if (it != edge_index.end()) return it->second;
    Edge e;
    e.v = {key.first, key.second};
    mesh.edges.push_back(e);
    const int id = static_cast<int>(mesh.edges.size()) - 1;
    edge_index.emplace(key, id);
    return id;
  }

  // Adds a root cell; curves default to straight segments between corners.
  void cell(const std::array<Vector2d, 4>& corners, const std::array<Curve, 4>* curves = nullptr) {
    RootCell r;
    r.corners = corners;
    for (int i = 0; i < 4; ++i) r.sides[i] = curves ? (*curves)[i] : Curve::line(corners[i], corners[(i + 1) % 4]);
    mesh.roots.push_back(r);
    Element el;
    el.root = static_cast<int>(mesh.roots.size()) - 1;
    el.curved = r.curved();
    for (int i = 0; i < 4; ++i) el.v[i] = vertex(corners[i]);
    for (int i = 0; i < 4; ++i) el.side[i] = edge(el.v[i], el.v[(i + 1) % 4]);
    mesh.elements.push_back(el);
  }

  std::vector<int> edge_use_count() const {
    std::vector<int> count(mesh.edges.size(), 0);
    for (const Element& el : mesh.elements)
      for (int s : el.side) ++count[s];
    return count;
  }
};

}  // namespace

Mesh build_initial_mesh(const BenchGeometry& geom) {
  geom.validate();
  const double R = geom.cylinder_radius, H = geom.half_channel_height;
  const double w = 2 * R, pi = std::acos(-1.0);
  const Vector2d c0 = geom.cylinder_center;
  auto P = [&](double x, double y) { return Vector2d(c0.x() + x, c0.y() + y); };

  MeshBuilder b;
  // O-ring of 6 cells around the upper half cylinder, arc nodes every 30 degrees.
  std::array<Vector2d, 7> outer = {P(w, 0), P(w, 0.5 * H), P(0.625 * w, 0.625 * H), P(0, H),
                                   P(-0.625 * w, 0.625 * H), P(-w, 0.5 * H), P(-w, 0)};
  for (int k = 0; k < 6; ++k) {
    const double th0 = k * pi / 6, th1 = (k + 1) * pi / 6;
    std::array<Vector2d, 4> corners = {P(R * std::cos(th1), R * std::sin(th1)), P(R * std::cos(th0), R * std::sin(th0)),
                                       outer[k], outer[k + 1]};
    if (k == 0) corners[1] = P(R, 0);
    if (k == 5) corners[0] = P(-R, 0);
    if (k == 2) corners[0] = P(0, R);
    if (k == 3) corners[1] = P(0, R);
    std::array<Curve, 4> curves = {Curve::arc(c0, R, th1, th0), Curve::line(corners[1], corners[2]),
                                   Curve::line(corners[2], corners[3]), Curve::line(corners[3], corners[0])};
    b.cell(corners, &curves);
  }
  b.cell({P(w, 0.5 * H), P(w, H), P(0, H), outer[2]});
  b.cell({P(-w, 0.5 * H), outer[4], P(0, H), P(-w, H)});
  // Structured blocks upstream (5x2) and downstream (9x2).
  auto block = [&](double xa, double xb, int ncol) {
    if (xb - xa <= 1e-12 * R) return;
    for (int r = 0; r < 2; ++r)
      for (int j = 0; j < ncol; ++j) {
        const double xl = xa + j * (xb - xa) / ncol, xr = xa + (j + 1) * (xb - xa) / ncol;
        const double yb = r * 0.5 * H, yt = (r + 1) * 0.5 * H;
        b.cell({P(xl, yb), P(xr, yb), P(xr, yt), P(xl, yt)});
      }
  };
  block(-geom.upstream_length, -w, 5);
  block(w, geom.downstream_length, 9);

  Mesh& mesh = b.mesh;
  mesh.circle_center = c0;
  mesh.circle_radius = R;
  const std::vector<int> count = b.edge_use_count();
  const double tol = 1e-9 * R;
  for (std::size_t e = 0; e < mesh.edges.size(); ++e) {
    if (count[e] != 1) continue;
    Edge& ed = mesh.edges[e];
    const Vector2d a = mesh.vertices[ed.v[0]] - c0, z = mesh.vertices[ed.v[1]] - c0;
    if (std::abs(a.norm() - R) < tol && std::abs(z.norm() - R) < tol)
      ed.tag = BoundaryTag::cylinder;
    else if (std::abs(a.x() + geom.upstream_length) < tol && std::abs(z.x() + geom.upstream_length) < tol)
      ed.tag = BoundaryTag::inflow;
    else if (std::abs(a.x() - geom.downstream_length) < tol && std::abs(z.x() - geom.downstream_length) < tol)
      ed.tag = BoundaryTag::outflow;
    else if (std::abs(a.y() - H) < tol && std::abs(z.y() - H) < tol)
      ed.tag = BoundaryTag::wall;
    else if (std::abs(a.y()) < tol && std::abs(z.y()) < tol)
      ed.tag = BoundaryTag::reflective;
    else
      throw std::logic_error("build_initial_mesh: unclassified boundary edge (" + std::to_string(a.x()) + "," +
                             std::to_string(a.y()) + ")-(" + std::to_string(z.x()) + "," + std::to_string(z.y()) + ")");
  }
  return mesh;
}

Mesh build_rect_mesh(int nx, int ny, double x0, double x1, double y0, double y1) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("build_rect_mesh: nx, ny must be >= 1");
  MeshBuilder b;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const double xa = x0 + (x1 - x0) * i / nx, xb = x0 + (x1 - x0) * (i + 1) / nx;
      const double ya = y0 + (y1 - y0) * j / ny, yb = y0 + (y1 - y0) * (j + 1) / ny;
      b.cell({Vector2d(xa, ya), Vector2d(xb, ya), Vector2d(xb, yb), Vector2d(xa, yb)});
    }
  const std::vector<int> count = b.edge_use_count();
  for (std::size_t e = 0; e < b.mesh.edges.size(); ++e)
    if (count[e] == 1) b.mesh.edges[e].tag = BoundaryTag::wall;
  return b.mesh;
}

MapPoint ref_map_eval(const Mesh& mesh, int elem, double xi, double eta) {
  const Element& el = mesh.elements.at(elem);
  return box_map(mesh.roots[el.root], el.box, xi, eta);
}

Vector2d side_point(int side, double t) {
  switch (side) {
    case 0: return Vector2d(t, -1);
    case 1: return Vector2d(1, t);
    case 2: return Vector2d(-t, 1);
    default: return Vector2d(-1, -t);
  }
}

Vector2d side_direction(int side) {
  switch (side) {
    case 0: return Vector2d(1, 0);
    case 1: return Vector2d(0, 1);
    case 2: return Vector2d(-1, 0);
    default: return Vector2d(0, -1);
  }
}

namespace {

int add_vertex(Mesh& mesh, const Vector2d& x) {
  mesh.vertices.push_back(x);
  return static_cast<int>(mesh.vertices.size()) - 1;
}

int add_edge(Mesh& mesh, int a, int b, BoundaryTag tag) {
  Edge e;
  e.v = {std::min(a, b), std::max(a, b)};
  e.tag = tag;
  mesh.edges.push_back(e);
  return static_cast<int>(mesh.edges.size()) - 1;
}

// Splits edge `e` (side `side` of element `elem`) if needed.
void split_edge(Mesh& mesh, int elem, int side) {
  const int e = mesh.elements[elem].side[side];
  if (mesh.edges[e].children[0] >= 0) return;
  const int mid = add_vertex(mesh, ref_map_eval(mesh, elem, side_point(side, 0).x(), side_point(side, 0).y()).x);
  const Edge parent = mesh.edges[e];
  const int c0 = add_edge(mesh, parent.v[0], mid, parent.tag);
  const int c1 = add_edge(mesh, parent.v[1], mid, parent.tag);
  mesh.edges[c0].parent = e;
  mesh.edges[c0].child_index = 0;
  mesh.edges[c1].parent = e;
  mesh.edges[c1].child_index = 1;
  mesh.edges[e].children = {c0, c1};
  mesh.edges[e].midpoint = mid;
}

// Child edge of `e` containing vertex v.
int half_with(const Mesh& mesh, int e, int v) {
  const Edge& ed = mesh.edges[e];
  return ed.v[0] == v ? ed.children[0] : ed.children[1];
}

void refine_element(Mesh& mesh, int id) {
  for (int s = 0; s < 4; ++s) split_edge(mesh, id, s);
  const Element el = mesh.elements[id];
  std::array<int, 4> m;
  for (int s = 0; s < 4; ++s) m[s] = mesh.edges[el.side[s]].midpoint;
  const int c = add_vertex(mesh, ref_map_eval(mesh, id, 0, 0).x);
  std::array<int, 4> in;  // interior edges m_s -- c
  for (int s = 0; s < 4; ++s) in[s] = add_edge(mesh, m[s], c, BoundaryTag::interior);
  const auto& v = el.v;
  const auto& sd = el.side;
  const double xm = 0.5 * (el.box.x0 + el.box.x1), ym = 0.5 * (el.box.y0 + el.box.y1);
  const std::array<std::array<int, 4>, 4> verts = {{{v[0], m[0], c, m[3]},
                                                    {m[0], v[1], m[1], c},
                                                    {c, m[1], v[2], m[2]},
                                                    {m[3], c, m[2], v[3]}}};
  const std::array<std::array<int, 4>, 4> sides = {
      {{half_with(mesh, sd[0], v[0]), in[0], in[3], half_with(mesh, sd[3], v[0])},
       {half_with(mesh, sd[0], v[1]), half_with(mesh, sd[1], v[1]), in[1], in[0]},
       {in[1], half_with(mesh, sd[1], v[2]), half_with(mesh, sd[2], v[2]), in[2]},
       {in[3], in[2], half_with(mesh, sd[2], v[3]), half_with(mesh, sd[3], v[3])}}};
  const std::array<RefBox, 4> boxes = {RefBox{el.box.x0, xm, el.box.y0, ym}, RefBox{xm, el.box.x1, el.box.y0, ym},
                                       RefBox{xm, el.box.x1, ym, el.box.y1}, RefBox{el.box.x0, xm, ym, el.box.y1}};
  for (int k = 0; k < 4; ++k) {
    Element ch;
    ch.v = verts[k];
    ch.side = sides[k];
    ch.level = el.level + 1;
    ch.parent = id;
    ch.root = el.root;
    ch.box = boxes[k];
    ch.curved = el.curved;
    mesh.elements.push_back(ch);
    mesh.elements[id].children[k] = static_cast<int>(mesh.elements.size()) - 1;
  }
  mesh.elements[id].active = false;
}

bool edge_has_grandchildren(const Mesh& mesh, int e) {
  const Edge& ed = mesh.edges[e];
  if (ed.children[0] < 0) return false;
  return mesh.edges[ed.children[0]].children[0] >= 0 || mesh.edges[ed.children[1]].children[0] >= 0;
}

}  // namespace

Mesh refine(const Mesh& mesh, const std::set<int>& marked, bool closure) {
  Mesh out = mesh;
  for (int id : marked) {
    if (id < 0 || id >= static_cast<int>(out.elements.size()) || !out.elements[id].active)
      throw std::invalid_argument("refine: marked element is not active");
  }
  for (int id : marked) refine_element(out, id);
  // Closure: restore 1-irregularity.
  for (bool changed = closure; changed;) {
    changed = false;
    for (int id = 0; id < static_cast<int>(out.elements.size()); ++id) {
      if (!out.elements[id].active) continue;
      for (int s = 0; s < 4; ++s)
        if (edge_has_grandchildren(out, out.elements[id].side[s])) {
          refine_element(out, id);
          changed = true;
          break;
        }
    }
  }
  return out;
}

Mesh refine_uniform(const Mesh& mesh) {
  const std::vector<int> act = mesh.active_elements();
  return refine(mesh, std::set<int>(act.begin(), act.end()));
}

MeshTopology build_topology(const Mesh& mesh) {
  MeshTopology t;
  t.active = mesh.active_elements();
  const std::size_t ne = mesh.edges.size(), nv = mesh.vertices.size();
  t.sides.assign(mesh.elements.size(), {});
  t.edge_in_use.assign(ne, 0);
  t.edge_is_master.assign(ne, 0);
  t.master_sides.assign(ne, {});
  t.hanging_vertex_master.assign(nv, -1);
  t.vertex_in_use.assign(nv, 0);
  for (int id : t.active)
    for (int s : mesh.elements[id].side) t.edge_in_use[s] = 1;
  for (std::size_t e = 0; e < ne; ++e) {
    if (!t.edge_in_use[e]) continue;
    const int par = mesh.edges[e].parent;
    if (par >= 0 && t.edge_in_use[par]) {
      t.hanging.push_back({static_cast<int>(e), par, mesh.edges[e].child_index});
      t.hanging_vertex_master[mesh.edges[par].midpoint] = par;
    } else {
      t.edge_is_master[e] = 1;
    }
    for (int v : mesh.edges[e].v) t.vertex_in_use[v] = 1;
  }
  for (int id : t.active) {
    const Element& el = mesh.elements[id];
    for (int s = 0; s < 4; ++s) {
      const int e = el.side[s];
      SideRef& r = t.sides[id][s];
      r.edge = e;
      const int a = el.v[s], b = el.v[(s + 1) % 4];
      if (t.edge_is_master[e]) {
        r.master = e;
        const Edge& ed = mesh.edges[e];
        r.s0 = a == ed.v[0] ? -1.0 : 1.0;
        r.s1 = -r.s0;
      } else {
        const int m = mesh.edges[e].parent;
        r.master = m;
        const Edge& md = mesh.edges[m];
        auto param = [&](int v) { return v == md.v[0] ? -1.0 : (v == md.v[1] ? 1.0 : 0.0); };
        r.s0 = param(a);
        r.s1 = param(b);
      }
      t.master_sides[r.master].push_back({id, s});
    }
  }
  return t;
}

int element_quadrature_points(const Mesh& mesh, int elem, int base) {
  return mesh.elements[elem].curved ? base + 2 : base;
}

double total_area(const Mesh& mesh, int npts) {
  const QuadRule2D<double>& rule = cached_tensor_rule(npts);
  double area = 0;
  for (int id : mesh.active_elements())
    for (int q = 0; q < rule.size(); ++q)
      area += rule.weights(q) * ref_map_eval(mesh, id, rule.points(q, 0), rule.points(q, 1)).J.determinant();
  return area;
}

std::vector<std::string> audit(const Mesh& mesh) {
  std::vector<std::string> bad;
  const MeshTopology t = build_topology(mesh);
  std::vector<int> users(mesh.edges.size(), 0);
  for (int id : t.active)
    for (int s : mesh.elements[id].side) ++users[s];
  for (std::size_t e = 0; e < mesh.edges.size(); ++e) {
    if (!t.edge_in_use[e]) continue;
    const Edge& ed = mesh.edges[e];
    std::ostringstream os;
    if (ed.v[0] >= ed.v[1]) os << "edge " << e << " not oriented low->high; ";
    if (edge_has_grandchildren(mesh, static_cast<int>(e))) os << "edge " << e << " violates 1-irregularity; ";
    if (ed.tag != BoundaryTag::interior) {
      if (users[e] != 1) os << "boundary edge " << e << " has " << users[e] << " elements; ";
    } else {
      const bool slave = !t.edge_is_master[e];
      const bool has_used_children = ed.children[0] >= 0 && t.edge_in_use[ed.children[0]];
      const bool ok = users[e] == 2 || (users[e] == 1 && (slave || has_used_children));
      if (!ok) os << "interior edge " << e << " has " << users[e] << " elements; ";
      if (has_used_children && !(t.edge_in_use[ed.children[1]]))
        os << "edge " << e << " has a single used child; ";
    }
    if (ed.tag == BoundaryTag::cylinder && mesh.circle_radius > 0)
      for (int v : ed.v)
        if (std::abs((mesh.vertices[v] - mesh.circle_center).norm() - mesh.circle_radius) > 1e-12 * mesh.circle_radius)
          os << "cylinder vertex " << v << " off the circle; ";
    if (!os.str().empty()) bad.push_back(os.str());
  }
  for (int id : t.active) {
    const Element& el = mesh.elements[id];
    const int n = element_quadrature_points(mesh, id, 6);
    const QuadRule2D<double>& rule = cached_tensor_rule(n);
    for (int q = 0; q < rule.size(); ++q)
      if (!(ref_map_eval(mesh, id, rule.points(q, 0), rule.points(q, 1)).J.determinant() > 0)) {
        bad.push_back("element " + std::to_string(id) + " has non-positive Jacobian");
        break;
      }
    for (int k = 0; k < 4; ++k) {
      const Vector2d ref = side_point(k, -1);
      const Vector2d x = ref_map_eval(mesh, id, ref.x(), ref.y()).x;
      if ((x - mesh.vertices[el.v[k]]).norm() > 1e-10 * (1 + x.norm()))
        bad.push_back("element " + std::to_string(id) + " corner mismatch");
    }
  }
  return bad;
}

// ---------------------------------------------------------------- text I/O

namespace {

void write_curve(std::ostream& os, const Curve& c) {
  if (c.kind == Curve::Kind::line)
    os << "line " << c.p0.x() << ' ' << c.p0.y() << ' ' << c.p1.x() << ' ' << c.p1.y();
  else
    os << "arc " << c.center.x() << ' ' << c.center.y() << ' ' << c.radius << ' ' << c.theta0 << ' ' << c.theta1;
}

Curve read_curve(std::istream& is) {
  std::string kind;
  is >> kind;
  if (kind == "line") {
    Vector2d a, b;
    is >> a.x() >> a.y() >> b.x() >> b.y();
    return Curve::line(a, b);
  }
  if (kind != "arc") throw std::runtime_error("load_mesh: bad curve kind '" + kind + "'");
  Vector2d c;
  double r, t0, t1;
  is >> c.x() >> c.y() >> r >> t0 >> t1;
  return Curve::arc(c, r, t0, t1);
}

void expect(std::istream& is, const std::string& word) {
  std::string w;
  is >> w;
  if (w != word) throw std::runtime_error("load_mesh: expected '" + word + "', got '" + w + "'");
}

}  // namespace

void dump_mesh(const Mesh& mesh, std::ostream& os) {
  os << std::setprecision(17);
  os << "vdpg-mesh 1\n";
  os << "circle " << mesh.circle_center.x() << ' ' << mesh.circle_center.y() << ' ' << mesh.circle_radius << "\n";
  os << "roots " << mesh.roots.size() << "\n";
  for (const RootCell& r : mesh.roots) {
    for (const Vector2d& c : r.corners) os << c.x() << ' ' << c.y() << ' ';
    os << "\n";
    for (const Curve& c : r.sides) {
      write_curve(os, c);
      os << "\n";
    }
  }
  os << "vertices " << mesh.vertices.size() << "\n";
  for (const Vector2d& v : mesh.vertices) os << v.x() << ' ' << v.y() << "\n";
  os << "elements " << mesh.elements.size() << "\n";
  for (const Element& e : mesh.elements) {
    for (int v : e.v) os << v << ' ';
    for (int s : e.side) os << s << ' ';
    os << e.level << ' ' << e.parent << ' ' << e.root << ' ';
    for (int c : e.children) os << c << ' ';
    os << e.box.x0 << ' ' << e.box.x1 << ' ' << e.box.y0 << ' ' << e.box.y1 << ' ' << e.active << ' ' << e.curved
       << "\n";
  }
  os << "edges " << mesh.edges.size() << "\n";
  for (const Edge& e : mesh.edges)
    os << e.v[0] << ' ' << e.v[1] << ' ' << to_string(e.tag) << ' ' << e.parent << ' ' << e.child_index << ' '
       << e.children[0] << ' ' << e.children[1] << ' ' << e.midpoint << "\n";
}

Mesh load_mesh(std::istream& is) {
  Mesh mesh;
  expect(is, "vdpg-mesh");
  int version = 0;
  is >> version;
  if (version != 1) throw std::runtime_error("load_mesh: unsupported version");
  expect(is, "circle");
  is >> mesh.circle_center.x() >> mesh.circle_center.y() >> mesh.circle_radius;
  std::size_t n = 0;
  expect(is, "roots");
  is >> n;
  mesh.roots.resize(n);
  for (RootCell& r : mesh.roots) {
    for (Vector2d& c : r.corners) is >> c.x() >> c.y();
    for (Curve& c : r.sides) c = read_curve(is);
  }
  expect(is, "vertices");
  is >> n;
  mesh.vertices.resize(n);
  for (Vector2d& v : mesh.vertices) is >> v.x() >> v.y();
  expect(is, "elements");
  is >> n;
  mesh.elements.resize(n);
  for (Element& e : mesh.elements) {
    for (int& v : e.v) is >> v;
    for (int& s : e.side) is >> s;
    is >> e.level >> e.parent >> e.root;
    for (int& c : e.children) is >> c;
    is >> e.box.x0 >> e.box.x1 >> e.box.y0 >> e.box.y1 >> e.active >> e.curved;
  }
  expect(is, "edges");
  is >> n;
  mesh.edges.resize(n);
  for (Edge& e : mesh.edges) {
    std::string tag;
    is >> e.v[0] >> e.v[1] >> tag >> e.parent >> e.child_index >> e.children[0] >> e.children[1] >> e.midpoint;
    e.tag = boundary_tag_from_string(tag);
  }
  if (!is) throw std::runtime_error("load_mesh: truncated input");
  return mesh;
}

void write_vtk(const Mesh& mesh, const std::string& path, const std::vector<VtkField>& fields, int subdiv) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_vtk: cannot open " + path);
  const std::vector<int> act = mesh.active_elements();
  const int np = subdiv + 1;
  const std::size_t npts = act.size() * np * np, ncells = act.size() * subdiv * subdiv;
  os << std::setprecision(12);
  os << "# vtk DataFile Version 3.0\nvdpg solution\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << npts << " double\n";
  auto ref = [&](int i) { return -1.0 + 2.0 * i / subdiv; };
  for (int id : act)
    for (int j = 0; j < np; ++j)
      for (int i = 0; i < np; ++i) {
        const Vector2d x = ref_map_eval(mesh, id, ref(i), ref(j)).x;
        os << x.x() << ' ' << x.y() << " 0\n";
      }
  os << "CELLS " << ncells << ' ' << 5 * ncells << "\n";
  for (std::size_t k = 0; k < act.size(); ++k)
    for (int j = 0; j < subdiv; ++j)
      for (int i = 0; i < subdiv; ++i) {
        const std::size_t b = k * np * np;
        os << "4 " << b + i + np * j << ' ' << b + i + 1 + np * j << ' ' << b + i + 1 + np * (j + 1) << ' '
           << b + i + np * (j + 1) << "\n";
      }
  os << "CELL_TYPES " << ncells << "\n";
  for (std::size_t c = 0; c < ncells; ++c) os << "9\n";
  os << "CELL_DATA " << ncells << "\nSCALARS level int 1\nLOOKUP_TABLE default\n";
  for (int id : act)
    for (int c = 0; c < subdiv * subdiv; ++c) os << mesh.elements[id].level << "\n";
  if (fields.empty()) return;
  os << "POINT_DATA " << npts << "\n";
  for (const VtkField& f : fields) {
    os << "SCALARS " << f.name << " double " << f.ncomp << "\nLOOKUP_TABLE default\n";
    for (int id : act)
      for (int j = 0; j < np; ++j)
        for (int i = 0; i < np; ++i) {
          const Eigen::VectorXd v = f.eval(id, ref(i), ref(j));
          for (int c = 0; c < f.ncomp; ++c) os << v(c) << (c + 1 < f.ncomp ? ' ' : '\n');
        }
  }
}

}  // namespace vdpg
