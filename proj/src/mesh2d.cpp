#include "polylayer/mesh2d.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

#include "polylayer/errors.hpp"

namespace polylayer {

namespace {

struct Builder {
  TriMesh mesh;

  int add_node(const Vec2& p) {
    mesh.nodes.push_back(p);
    return static_cast<int>(mesh.nodes.size()) - 1;
  }

  void add_triangle(int a, int b, int c) {
    const auto& P = mesh.nodes;
    if (cross(P[b] - P[a], P[c] - P[a]) < 0) std::swap(b, c);
    mesh.triangles.push_back({a, b, c});
  }

  // Quad a-b-c-d (cyclic); cut along the shorter diagonal, ties go to a-c.
  void add_quad(int a, int b, int c, int d) {
    const auto& P = mesh.nodes;
    double ac = norm(P[c] - P[a]), bd = norm(P[d] - P[b]);
    if (bd < ac * (1 - 1e-12)) {
      add_triangle(a, b, d);
      add_triangle(b, c, d);
    } else {
      add_triangle(a, b, c);
      add_triangle(a, c, d);
    }
  }

  void add_boundary(const std::vector<int>& chain, EdgeTag tag) {
    for (std::size_t k = 0; k + 1 < chain.size(); ++k) mesh.boundary_edges.push_back({chain[k], chain[k + 1], tag});
  }
};

double triangle_angle(const Vec2& a, const Vec2& b, const Vec2& c) {
  Vec2 u = b - a, v = c - a;
  return std::atan2(std::abs(cross(u, v)), dot(u, v));
}

}  // namespace

double TriMesh::signed_area(int t) const {
  const auto& T = triangles[t];
  return 0.5 * cross(nodes[T[1]] - nodes[T[0]], nodes[T[2]] - nodes[T[0]]);
}

double TriMesh::area() const {
  double s = 0;
  for (int t = 0; t < static_cast<int>(triangles.size()); ++t) s += signed_area(t);
  return s;
}

std::vector<char> TriMesh::dirichlet_nodes() const {
  std::vector<char> mark(nodes.size(), 0);
  for (const auto& e : boundary_edges) {
    if (e.tag == EdgeTag::dirichlet) mark[e.a] = mark[e.b] = 1;
  }
  return mark;
}

double TriMesh::tagged_length(EdgeTag tag) const {
  double s = 0;
  for (const auto& e : boundary_edges)
    if (e.tag == tag) s += norm(nodes[e.b] - nodes[e.a]);
  return s;
}

void update_angle_stats(TriMesh& mesh) {
  double lo = std::numbers::pi, hi = 0;
  for (const auto& T : mesh.triangles) {
    const Vec2 &a = mesh.nodes[T[0]], &b = mesh.nodes[T[1]], &c = mesh.nodes[T[2]];
    for (double ang : {triangle_angle(a, b, c), triangle_angle(b, c, a), triangle_angle(c, a, b)}) {
      lo = std::min(lo, ang);
      hi = std::max(hi, ang);
    }
  }
  mesh.min_angle = lo;
  mesh.max_angle = hi;
}

TriMesh mesh_lshape(const LShapeProfile& profile, double h, EndCondition ends) {
  if (!(h > 0 && h <= 0.5)) throw InvalidInput("mesh size h must lie in (0, 0.5]");
  const double theta = profile.theta, R = profile.outlet_length;
  const double cot = 1 / std::tan(theta / 2);
  const int nw = std::max(2, static_cast<int>(std::lround(1 / h)));
  const int grade = std::max(1, static_cast<int>(std::ceil(cot - 1e-9)));
  const int nk = nw * grade;
  const int na = std::max(1, static_cast<int>(std::ceil(R / h - 1e-9)));

  Builder b;
  b.mesh.h = h;
  b.mesh.theta = theta;
  b.mesh.outlet_length = R;

  const Vec2 Op = profile.outer_vertex(), O = profile.inner_vertex();
  const Vec2 F1 = profile.feet[0], F2 = profile.feet[1];

  // Kite: s runs O'->F1, u runs O'->F2.
  std::vector<int> kite((nk + 1) * (nk + 1));
  auto K = [&](int i, int j) -> int& { return kite[i + (nk + 1) * j]; };
  for (int j = 0; j <= nk; ++j) {
    for (int i = 0; i <= nk; ++i) {
      double s = double(i) / nk, u = double(j) / nk;
      Vec2 p = (1 - s) * (1 - u) * Op + s * (1 - u) * F1 + s * u * O + (1 - s) * u * F2;
      K(i, j) = b.add_node(p);
    }
  }
  for (int j = 0; j < nk; ++j)
    for (int i = 0; i < nk; ++i) b.add_quad(K(i, j), K(i + 1, j), K(i + 1, j + 1), K(i, j + 1));

  // Outlets: column p = 0 is shared with the kite.
  std::array<std::vector<int>, 2> arm;
  for (int k = 0; k < 2; ++k) {
    auto& A = arm[k];
    A.assign((na + 1) * (nk + 1), -1);
    for (int q = 0; q <= nk; ++q) A[q] = (k == 0) ? K(nk, q) : K(q, nk);
    for (int p = 1; p <= na; ++p) {
      double a = R * p / na;
      for (int q = 0; q <= nk; ++q) {
        double w = double(q) / nk;
        A[q + (nk + 1) * p] = b.add_node(profile.feet[k] + a * profile.directions[k] + w * profile.normals[k]);
      }
    }
    for (int p = 0; p < na; ++p)
      for (int q = 0; q < nk; ++q) {
        int v00 = A[q + (nk + 1) * p], v10 = A[q + (nk + 1) * (p + 1)];
        int v11 = A[q + 1 + (nk + 1) * (p + 1)], v01 = A[q + 1 + (nk + 1) * p];
        b.add_quad(v00, v10, v11, v01);
      }
  }

  const EdgeTag end_tag = ends == EndCondition::neumann ? EdgeTag::neumann : EdgeTag::dirichlet;
  std::vector<int> chain;
  // Outer side of arm 1 from O' to its end, across the end, back along the inner side to O.
  chain.clear();
  for (int i = 0; i <= nk; ++i) chain.push_back(K(i, 0));
  for (int p = 1; p <= na; ++p) chain.push_back(arm[0][(nk + 1) * p]);
  b.add_boundary(chain, EdgeTag::dirichlet);
  chain.clear();
  for (int q = 0; q <= nk; ++q) chain.push_back(arm[0][q + (nk + 1) * na]);
  b.add_boundary(chain, end_tag);
  chain.clear();
  for (int p = na; p >= 0; --p) chain.push_back(arm[0][nk + (nk + 1) * p]);
  b.add_boundary(chain, EdgeTag::dirichlet);
  // Inner side of arm 2 from O, across its end, back along the outer side to O'.
  chain.clear();
  for (int p = 0; p <= na; ++p) chain.push_back(arm[1][nk + (nk + 1) * p]);
  b.add_boundary(chain, EdgeTag::dirichlet);
  chain.clear();
  for (int q = nk; q >= 0; --q) chain.push_back(arm[1][q + (nk + 1) * na]);
  b.add_boundary(chain, end_tag);
  chain.clear();
  for (int p = na; p >= 1; --p) chain.push_back(arm[1][(nk + 1) * p]);
  for (int j = nk; j >= 0; --j) chain.push_back(K(0, j));
  b.add_boundary(chain, EdgeTag::dirichlet);

  update_angle_stats(b.mesh);
  return b.mesh;
}

TriMesh mesh_rectangle(double lx, double ly, int nx, int ny, const std::array<EdgeTag, 4>& tags) {
  if (nx < 1 || ny < 1 || !(lx > 0) || !(ly > 0)) throw InvalidInput("invalid rectangle mesh parameters");
  Builder b;
  b.mesh.h = std::max(lx / nx, ly / ny);
  auto id = [&](int i, int j) { return i + (nx + 1) * j; };
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) b.add_node({lx * i / nx, ly * j / ny});
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      b.add_triangle(id(i, j), id(i + 1, j), id(i + 1, j + 1));
      b.add_triangle(id(i, j), id(i + 1, j + 1), id(i, j + 1));
    }
  std::vector<int> chain;
  for (int i = 0; i <= nx; ++i) chain.push_back(id(i, 0));
  b.add_boundary(chain, tags[0]);
  chain.clear();
  for (int j = 0; j <= ny; ++j) chain.push_back(id(nx, j));
  b.add_boundary(chain, tags[1]);
  chain.clear();
  for (int i = nx; i >= 0; --i) chain.push_back(id(i, ny));
  b.add_boundary(chain, tags[2]);
  chain.clear();
  for (int j = ny; j >= 0; --j) chain.push_back(id(0, j));
  b.add_boundary(chain, tags[3]);
  update_angle_stats(b.mesh);
  return b.mesh;
}

TriMesh refine(const TriMesh& mesh) {
  TriMesh out;
  out.nodes = mesh.nodes;
  out.h = mesh.h / 2;
  out.theta = mesh.theta;
  out.outlet_length = mesh.outlet_length;
  out.level = mesh.level + 1;
  out.parent_nodes = static_cast<int>(mesh.nodes.size());
  std::map<std::pair<int, int>, int> mid;
  auto midpoint = [&](int a, int c) {
    auto key = std::minmax(a, c);
    auto it = mid.find(key);
    if (it != mid.end()) return it->second;
    int id = static_cast<int>(out.nodes.size());
    out.nodes.push_back(0.5 * (mesh.nodes[a] + mesh.nodes[c]));
    out.midpoint_parents.push_back({key.first, key.second});
    mid.emplace(key, id);
    return id;
  };
  out.triangles.reserve(mesh.triangles.size() * 4);
  for (const auto& T : mesh.triangles) {
    int a = T[0], b = T[1], c = T[2];
    int ab = midpoint(a, b), bc = midpoint(b, c), ca = midpoint(c, a);
    out.triangles.push_back({a, ab, ca});
    out.triangles.push_back({ab, b, bc});
    out.triangles.push_back({ca, bc, c});
    out.triangles.push_back({ab, bc, ca});
  }
  for (const auto& e : mesh.boundary_edges) {
    int m = midpoint(e.a, e.b);
    out.boundary_edges.push_back({e.a, m, e.tag});
    out.boundary_edges.push_back({m, e.b, e.tag});
  }
  update_angle_stats(out);
  return out;
}

bool barycentric(const TriMesh& mesh, int t, const Vec2& p, std::array<double, 3>& bary, double tol) {
  const auto& T = mesh.triangles[t];
  const Vec2 &a = mesh.nodes[T[0]], &b = mesh.nodes[T[1]], &c = mesh.nodes[T[2]];
  double det = cross(b - a, c - a);
  double l1 = cross(p - a, c - a) / det;
  double l2 = cross(b - a, p - a) / det;
  bary = {1 - l1 - l2, l1, l2};
  return bary[0] >= -tol && bary[1] >= -tol && bary[2] >= -tol;
}

PointLocator::PointLocator(const TriMesh& mesh) : mesh_(mesh) {
  if (mesh.nodes.empty()) throw InvalidInput("empty mesh");
  lo_ = hi_ = mesh.nodes[0];
  for (const auto& p : mesh.nodes) {
    lo_ = {std::min(lo_[0], p[0]), std::min(lo_[1], p[1])};
    hi_ = {std::max(hi_[0], p[0]), std::max(hi_[1], p[1])};
  }
  double span = std::max(hi_[0] - lo_[0], hi_[1] - lo_[1]);
  double avg = std::sqrt(std::max(mesh.area(), 1e-300) / std::max<std::size_t>(1, mesh.triangles.size()));
  cell_ = std::max(avg * 2, span / 2048);
  lo_ = {lo_[0] - 1e-9 * span, lo_[1] - 1e-9 * span};
  nx_ = std::max(1, static_cast<int>((hi_[0] - lo_[0]) / cell_) + 1);
  ny_ = std::max(1, static_cast<int>((hi_[1] - lo_[1]) / cell_) + 1);

  auto range = [&](int t, int& i0, int& i1, int& j0, int& j1) {
    const auto& T = mesh.triangles[t];
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (int v : T) {
      x0 = std::min(x0, mesh.nodes[v][0]);
      x1 = std::max(x1, mesh.nodes[v][0]);
      y0 = std::min(y0, mesh.nodes[v][1]);
      y1 = std::max(y1, mesh.nodes[v][1]);
    }
    auto clampi = [](int v, int n) { return std::clamp(v, 0, n - 1); };
    i0 = clampi(static_cast<int>(std::floor((x0 - lo_[0]) / cell_)) - 1, nx_);
    i1 = clampi(static_cast<int>(std::floor((x1 - lo_[0]) / cell_)) + 1, nx_);
    j0 = clampi(static_cast<int>(std::floor((y0 - lo_[1]) / cell_)) - 1, ny_);
    j1 = clampi(static_cast<int>(std::floor((y1 - lo_[1]) / cell_)) + 1, ny_);
  };
  std::vector<int> count(static_cast<std::size_t>(nx_) * ny_ + 1, 0);
  const int nt = static_cast<int>(mesh.triangles.size());
  for (int t = 0; t < nt; ++t) {
    int i0, i1, j0, j1;
    range(t, i0, i1, j0, j1);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) ++count[i + nx_ * j + 1];
  }
  for (std::size_t k = 1; k < count.size(); ++k) count[k] += count[k - 1];
  start_ = count;
  items_.assign(count.back(), 0);
  std::vector<int> fill(start_.begin(), start_.end() - 1);
  for (int t = 0; t < nt; ++t) {
    int i0, i1, j0, j1;
    range(t, i0, i1, j0, j1);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) items_[fill[i + nx_ * j]++] = t;
  }
}

int PointLocator::locate(const Vec2& p, std::array<double, 3>& bary) const {
  int i = static_cast<int>(std::floor((p[0] - lo_[0]) / cell_));
  int j = static_cast<int>(std::floor((p[1] - lo_[1]) / cell_));
  if (i < 0 || j < 0 || i >= nx_ || j >= ny_) return -1;
  const int cell = i + nx_ * j;
  int best = -1;
  double best_margin = -1e300;
  std::array<double, 3> w{};
  for (int k = start_[cell]; k < start_[cell + 1]; ++k) {
    int t = items_[k];
    barycentric(mesh_, t, p, w, 1e-10);
    double margin = std::min({w[0], w[1], w[2]});
    if (margin >= 0) {
      bary = w;
      return t;
    }
    if (margin > best_margin) {
      best_margin = margin;
      best = t;
      bary = w;
    }
  }
  return best_margin >= -1e-10 ? best : -1;
}

double PointLocator::evaluate(std::span<const double> values, const Vec2& p) const {
  std::array<double, 3> w{};
  int t = locate(p, w);
  if (t < 0) throw InvalidInput("evaluation point outside the mesh");
  const auto& T = mesh_.triangles[t];
  return w[0] * values[T[0]] + w[1] * values[T[1]] + w[2] * values[T[2]];
}

double evaluate(const TriMesh& mesh, std::span<const double> values, const Vec2& p) {
  return PointLocator(mesh).evaluate(values, p);
}

double segment_quadrature(const TriMesh& mesh, std::span<const double> values, const Vec2& a, const Vec2& b,
                          const std::function<double(double)>& weight) {
  return segment_quadrature(PointLocator(mesh), values, a, b, weight);
}

double segment_quadrature(const PointLocator& locator, std::span<const double> values, const Vec2& a,
                          const Vec2& b, const std::function<double(double)>& weight) {
  const TriMesh& mesh = locator.mesh();
  const double length = norm(b - a);
  if (!(length > 0)) return 0.0;
  const Vec2 dir = b - a;

  // Breakpoints: parameters where the segment crosses triangle edges.
  std::vector<double> cuts{0.0, 1.0};
  for (const auto& T : mesh.triangles) {
    double t0 = 0, t1 = 1;
    bool empty = false;
    for (int e = 0; e < 3 && !empty; ++e) {
      const Vec2& p = mesh.nodes[T[e]];
      const Vec2& q = mesh.nodes[T[(e + 1) % 3]];
      Vec2 edge = q - p;
      // Inside of a counterclockwise triangle: cross(edge, x - p) >= 0.
      double f0 = cross(edge, a - p);
      double df = cross(edge, dir);
      if (std::abs(df) < 1e-300) {
        if (f0 < 0) empty = true;
        continue;
      }
      double tc = -f0 / df;
      if (df > 0) t0 = std::max(t0, tc);
      else t1 = std::min(t1, tc);
      if (t0 > t1) empty = true;
    }
    if (!empty && t1 - t0 > 1e-14) {
      cuts.push_back(t0);
      cuts.push_back(t1);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> knots;
  for (double c : cuts) {
    c = std::clamp(c, 0.0, 1.0);
    if (knots.empty() || c - knots.back() > 1e-13) knots.push_back(c);
  }
  if (knots.back() < 1.0) knots.back() = 1.0;

  static const double gx[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                               0.9061798459386640};
  static const double gw[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
                               0.2369268850561891};
  double total = 0;
  for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
    double s0 = knots[k], s1 = knots[k + 1];
    Vec2 mid = a + (0.5 * (s0 + s1)) * dir;
    std::array<double, 3> w{};
    int t = locator.locate(mid, w);
    if (t < 0) throw InvalidInput("segment leaves the meshed region");
    const auto& T = mesh.triangles[t];
    double piece = 0;
    for (int g = 0; g < 5; ++g) {
      double s = 0.5 * (s0 + s1) + 0.5 * (s1 - s0) * gx[g];
      Vec2 p = a + s * dir;
      barycentric(mesh, t, p, w, 1.0);
      double u = w[0] * values[T[0]] + w[1] * values[T[1]] + w[2] * values[T[2]];
      piece += gw[g] * u * u * weight(s * length);
    }
    total += piece * 0.5 * (s1 - s0) * length;
  }
  return total;
}

}  // namespace polylayer
