#include "polylayer/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "polylayer/errors.hpp"

namespace polylayer {

namespace {

struct RowEntry {
  int col;
  double k;
  double m;
};

// Two passes over rows (count, then fill); each row is produced independently
// so the matrix is identical for any thread count.
template <class RowFn>
void build_rows(int nrows, RowFn row, SparseSymmetric& K, SparseSymmetric& M) {
  std::vector<int> counts(nrows + 1, 0);
#pragma omp parallel
  {
    std::vector<RowEntry> buf;
#pragma omp for schedule(static)
    for (int r = 0; r < nrows; ++r) {
      row(r, buf);
      counts[r + 1] = static_cast<int>(buf.size());
    }
  }
  for (int r = 0; r < nrows; ++r) counts[r + 1] += counts[r];
  for (SparseSymmetric* A : {&K, &M}) {
    A->n = nrows;
    A->row_ptr = counts;
    A->col.assign(counts.back(), 0);
    A->val.assign(counts.back(), 0.0);
  }
#pragma omp parallel
  {
    std::vector<RowEntry> buf;
#pragma omp for schedule(static)
    for (int r = 0; r < nrows; ++r) {
      row(r, buf);
      int p = counts[r];
      for (const auto& e : buf) {
        K.col[p] = M.col[p] = e.col;
        K.val[p] = e.k;
        M.val[p] = e.m;
        ++p;
      }
    }
  }
}

void number_equations(const std::vector<char>& eliminated, bool eliminate, DiscreteProblem& P) {
  const int n = static_cast<int>(eliminated.size());
  P.equation_of_node.assign(n, -1);
  P.node_of_equation.clear();
  for (int v = 0; v < n; ++v) {
    if (eliminate && eliminated[v]) continue;
    P.equation_of_node[v] = static_cast<int>(P.node_of_equation.size());
    P.node_of_equation.push_back(v);
  }
  if (P.node_of_equation.empty()) throw InvalidInput("no free degrees of freedom after elimination");
}

void fnv(std::uint64_t& h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
}

// Neumaier compensated sum of a[i] * b[i].
double compensated_dot(std::span<const double> a, std::span<const double> b) {
  double sum = 0, comp = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double x = a[i] * b[i];
    double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) comp += (sum - t) + x;
    else comp += (x - t) + sum;
    sum = t;
  }
  return sum + comp;
}

}  // namespace

std::vector<double> DiscreteProblem::expand(std::span<const double> x) const {
  std::vector<double> out(equation_of_node.size(), 0.0);
  for (std::size_t e = 0; e < node_of_equation.size(); ++e) out[node_of_equation[e]] = x[e];
  return out;
}

void p1_element(const Vec2& a, const Vec2& b, const Vec2& c, Mat3& K, Mat3& M) {
  const double area = 0.5 * cross(b - a, c - a);
  if (!(area > 0)) throw InvalidInput("degenerate triangle");
  const Vec2 p[3] = {a, b, c};
  double gx[3], gy[3];
  for (int i = 0; i < 3; ++i) {
    const Vec2& q = p[(i + 1) % 3];
    const Vec2& r = p[(i + 2) % 3];
    gx[i] = q[1] - r[1];
    gy[i] = r[0] - q[0];
  }
  for (int i = 0; i < 3; ++i) {
    for (int j = i; j < 3; ++j) {
      K[i][j] = K[j][i] = (gx[i] * gx[j] + gy[i] * gy[j]) / (4 * area);
      M[i][j] = M[j][i] = area / 12 * (i == j ? 2.0 : 1.0);
    }
  }
}

void q1_element(const std::array<double, 9>& G, double volume, Mat8& K, Mat8& M) {
  static const double m1[2][2] = {{1.0 / 3, 1.0 / 6}, {1.0 / 6, 1.0 / 3}};
  static const double k1[2][2] = {{1, -1}, {-1, 1}};
  // c1[a][b] = integral of l_a' l_b over [0, 1].
  static const double c1[2][2] = {{-0.5, -0.5}, {0.5, 0.5}};
  for (int a = 0; a < 8; ++a) {
    const int ia[3] = {a & 1, (a >> 1) & 1, (a >> 2) & 1};
    for (int b = a; b < 8; ++b) {
      const int ib[3] = {b & 1, (b >> 1) & 1, (b >> 2) & 1};
      double k = 0;
      for (int p = 0; p < 3; ++p) {
        for (int q = 0; q < 3; ++q) {
          double g = G[3 * p + q];
          if (g == 0) continue;
          double t = 1;
          for (int d = 0; d < 3; ++d) {
            if (p == q) t *= (d == p) ? k1[ia[d]][ib[d]] : m1[ia[d]][ib[d]];
            else if (d == p) t *= c1[ia[d]][ib[d]];
            else if (d == q) t *= c1[ib[d]][ia[d]];
            else t *= m1[ia[d]][ib[d]];
          }
          k += g * t;
        }
      }
      double m = m1[ia[0]][ib[0]] * m1[ia[1]][ib[1]] * m1[ia[2]][ib[2]];
      K[a][b] = K[b][a] = volume * k;
      M[a][b] = M[b][a] = volume * m;
    }
  }
}

DiscreteProblem assemble_p1(const TriMesh& mesh, bool eliminate) {
  const int nt = static_cast<int>(mesh.triangles.size());
  const int nv = static_cast<int>(mesh.nodes.size());
  std::vector<Mat3> Ke(nt), Me(nt);
  for (int t = 0; t < nt; ++t) {
    const auto& T = mesh.triangles[t];
    try {
      p1_element(mesh.nodes[T[0]], mesh.nodes[T[1]], mesh.nodes[T[2]], Ke[t], Me[t]);
    } catch (const InvalidInput&) {
      throw InvalidInput("degenerate triangle " + std::to_string(t));
    }
  }
  std::vector<int> start(nv + 1, 0), adj(3 * static_cast<std::size_t>(nt));
  for (const auto& T : mesh.triangles)
    for (int v : T) ++start[v + 1];
  for (int v = 0; v < nv; ++v) start[v + 1] += start[v];
  {
    std::vector<int> fill(start.begin(), start.end() - 1);
    for (int t = 0; t < nt; ++t)
      for (int v : mesh.triangles[t]) adj[fill[v]++] = t;
  }

  DiscreteProblem P;
  P.source = "p1";
  P.provenance = mesh_hash(mesh);
  std::vector<char> dir = mesh.dirichlet_nodes();
  number_equations(dir, eliminate, P);
  const auto& eq = P.equation_of_node;
  const auto& node = P.node_of_equation;

  auto row = [&](int r, std::vector<RowEntry>& buf) {
    buf.clear();
    const int a = node[r];
    for (int s = start[a]; s < start[a + 1]; ++s) {
      const int t = adj[s];
      const auto& T = mesh.triangles[t];
      const int la = T[0] == a ? 0 : (T[1] == a ? 1 : 2);
      for (int lb = 0; lb < 3; ++lb) {
        const int c = eq[T[lb]];
        if (c < 0) continue;
        auto it = std::find_if(buf.begin(), buf.end(), [c](const RowEntry& e) { return e.col == c; });
        if (it == buf.end()) {
          buf.push_back({c, 0.0, 0.0});
          it = buf.end() - 1;
        }
        it->k += Ke[t][la][lb];
        it->m += Me[t][la][lb];
      }
    }
    std::sort(buf.begin(), buf.end(), [](const RowEntry& x, const RowEntry& y) { return x.col < y.col; });
  };
  build_rows(static_cast<int>(node.size()), row, P.K, P.M);
  return P;
}

DiscreteProblem assemble_q1(const VoxelGrid& grid, bool eliminate) {
  Mat8 Ke{}, Me{};
  q1_element(grid.metric(), grid.cell_volume, Ke, Me);

  DiscreteProblem P;
  P.source = "q1";
  P.provenance = grid_hash(grid);
  number_equations(grid.dirichlet, eliminate, P);
  const auto& eq = P.equation_of_node;
  const auto& node = P.node_of_equation;

  const std::int64_t nx = grid.dims[0], ny = grid.dims[1], nz = grid.dims[2];
  std::vector<std::uint8_t> active(nx * ny * nz, 0);
  for (std::int64_t c : grid.active_cells) active[c] = 1;
  auto cell_active = [&](std::int64_t i, std::int64_t j, std::int64_t k) {
    if (i < 0 || j < 0 || k < 0 || i >= nx - 1 || j >= ny - 1 || k >= nz - 1) return false;
    return active[i + nx * (j + ny * k)] != 0;
  };

  auto row = [&](int r, std::vector<RowEntry>& buf) {
    double ks[27] = {0}, ms[27] = {0};
    bool used[27] = {false};
    const auto p = grid.box_index(grid.box_of_node[node[r]]);
    // Incident cells in increasing linear order.
    for (int ck = 0; ck < 2; ++ck)
      for (int cj = 0; cj < 2; ++cj)
        for (int ci = 0; ci < 2; ++ci) {
          if (!cell_active(p[0] - 1 + ci, p[1] - 1 + cj, p[2] - 1 + ck)) continue;
          const int la = (1 - ci) + 2 * (1 - cj) + 4 * (1 - ck);
          for (int lb = 0; lb < 8; ++lb) {
            int dx = ci - 1 + (lb & 1), dy = cj - 1 + ((lb >> 1) & 1), dz = ck - 1 + ((lb >> 2) & 1);
            int slot = (dx + 1) + 3 * (dy + 1) + 9 * (dz + 1);
            ks[slot] += Ke[la][lb];
            ms[slot] += Me[la][lb];
            used[slot] = true;
          }
        }
    buf.clear();
    for (int slot = 0; slot < 27; ++slot) {
      if (!used[slot]) continue;
      int dx = slot % 3 - 1, dy = (slot / 3) % 3 - 1, dz = slot / 9 - 1;
      int gnode = grid.node_of_box[grid.box_linear(p[0] + dx, p[1] + dy, p[2] + dz)];
      int c = eq[gnode];
      if (c < 0) continue;
      buf.push_back({c, ks[slot], ms[slot]});
    }
  };
  build_rows(static_cast<int>(node.size()), row, P.K, P.M);
  return P;
}

double rayleigh_quotient(const DiscreteProblem& problem, std::span<const double> v) {
  const int n = problem.dofs();
  if (static_cast<int>(v.size()) != n) throw InvalidInput("vector length does not match the problem");
  std::vector<double> Kv(n), Mv(n);
  problem.K.multiply(v, Kv);
  problem.M.multiply(v, Mv);
  double den = compensated_dot(v, Mv);
  if (!(den > 0)) throw InvalidInput("vector has zero mass norm");
  return compensated_dot(v, Kv) / den;
}

std::uint64_t mesh_hash(const TriMesh& mesh) {
  std::uint64_t h = 1469598103934665603ULL;
  fnv(h, mesh.nodes.data(), sizeof(Vec2) * mesh.nodes.size());
  fnv(h, mesh.triangles.data(), sizeof(std::array<int, 3>) * mesh.triangles.size());
  for (const auto& e : mesh.boundary_edges) {
    int rec[3] = {e.a, e.b, static_cast<int>(e.tag)};
    fnv(h, rec, sizeof rec);
  }
  return h;
}

}  // namespace polylayer
