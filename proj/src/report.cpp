#include "polylayer/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "polylayer/errors.hpp"

namespace polylayer {

namespace {

Json vec3(const Vec3& v) { return Json::array({v[0], v[1], v[2]}); }

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

const char* ends_name(EndCondition e) { return e == EndCondition::neumann ? "neumann" : "dirichlet"; }

}  // namespace

std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

Json to_json(const PolyhedralAngle& a) {
  Json j;
  j["faces"] = a.faces();
  j["rays"] = Json::array();
  for (const auto& r : a.rays) j["rays"].push_back(vec3(r));
  j["normals"] = Json::array();
  for (const auto& n : a.normals) j["normals"].push_back(vec3(n));
  j["vertex_angles"] = a.vertex_angles;
  j["dihedral_angles"] = a.dihedral_angles;
  return j;
}

Json to_json(const LayerGeometry& layer) {
  Json j = to_json(layer.angle());
  j["shift"] = vec3(layer.shift());
  j["inscribed_ball_residual"] = layer.inscribed_ball_residual();
  j["beta_min"] = layer.beta_min();
  j["beta_min_edge"] = layer.beta_min_edge();
  j["partition_planes"] = Json::array();
  for (const auto& p : layer.partition_planes())
    j["partition_planes"].push_back({{"normal", vec3(p.normal)}, {"offset", p.offset}});
  return j;
}

Json to_json(const ThresholdResult& r) {
  Json j;
  j["theta"] = r.theta;
  j["R"] = r.R;
  j["h"] = r.h;
  j["ends"] = ends_name(r.ends);
  j["richardson_order"] = r.order;
  j["lambda1_estimates"] = r.estimates(0);
  j["extrapolated"] = r.extrapolated;
  j["error_indicator"] = r.error;
  j["value"] = r.value();
  j["error"] = r.error_indicator();
  j["truncation_indicator"] = r.truncation_indicator;
  j["levels"] = Json::array();
  for (const auto& l : r.levels) {
    j["levels"].push_back({{"h", l.h},
                           {"dofs", l.dofs},
                           {"iterations", l.iterations},
                           {"eigenvalues", l.eigenvalues},
                           {"max_residual", l.max_residual},
                           {"orthonormality_defect", l.orthonormality_defect},
                           {"mesh_hash", hex64(l.mesh_hash)}});
  }
  return j;
}

Json to_json(const SolverAudit& a) {
  return Json{{"max_residual", a.max_residual},
              {"orthonormality_defect", a.orthonormality_defect},
              {"monotone_refinement", a.monotone},
              {"eigenpairs", a.eigenpairs}};
}

Json to_json(const ScanRecord& r) {
  return Json{{"parameter", r.parameter}, {"eigenvalues", r.eigenvalues}, {"errors", r.errors},
              {"finest", r.finest},       {"R", r.R},                     {"h", r.h},
              {"levels", r.levels},       {"dofs", r.dofs},               {"mesh_hash", hex64(r.mesh_hash)},
              {"solver", to_json(r.audit)}};
}

Json to_json(const ThetaScan& s) {
  Json j;
  j["records"] = Json::array();
  for (const auto& r : s.records) j["records"].push_back(to_json(r));
  j["strictly_increasing"] = s.strictly_increasing;
  j["inside_band"] = s.inside_band;
  return j;
}

Json to_json(const TruncationScan& s) {
  Json j;
  j["theta"] = s.theta;
  j["records"] = Json::array();
  for (const auto& r : s.records) j["records"].push_back(to_json(r));
  j["asymptote"] = s.asymptote;
  j["asymptote_error"] = s.asymptote_error;
  j["reference_R"] = s.reference_R;
  j["gaps"] = s.gaps;
  j["gap_errors"] = s.gap_errors;
  j["nondecreasing"] = s.nondecreasing;
  j["below_asymptote"] = s.below_asymptote;
  j["fit"] = {{"ok", s.fit_ok},
              {"R", s.fit_R},
              {"exponent", s.exponent},
              {"intercept", s.intercept},
              {"r_squared", s.r_squared},
              {"reference_exponent", s.reference_exponent},
              {"notice", s.notice}};
  return j;
}

Json to_json(const CountResult& c) {
  return Json{{"theta", c.theta},
              {"R", c.R},
              {"count", c.count},
              {"near_threshold", c.near_threshold},
              {"neumann_count", c.neumann_count},
              {"conclusive", c.conclusive},
              {"threshold", kPi2},
              {"values", c.values},
              {"errors", c.errors},
              {"neumann_values", c.neumann_values},
              {"neumann_errors", c.neumann_errors},
              {"solver", to_json(c.audit)}};
}

Json to_json(const AlphaStar& a) {
  Json j;
  j["lo"] = a.lo;
  j["hi"] = a.hi;
  j["width"] = a.hi - a.lo;
  j["samples"] = Json::array();
  for (const auto& s : a.samples) j["samples"].push_back({{"alpha", s.first}, {"lambda1", s.second}});
  return j;
}

Json to_json(const Certificate& c) {
  Json j;
  j["kind"] = c.kind;
  j["verdict"] = verdict_name(c.verdict);
  j["threshold"] = c.threshold;
  j["threshold_error"] = c.threshold_error;
  j["threshold_angle"] = c.threshold_angle;
  j["evidence"] = c.evidence;
  j["margin"] = c.margin;
  j["combined_error"] = c.combined_error;
  j["note"] = c.note;
  if (!c.levels.empty()) {
    j["levels"] = Json::array();
    for (const auto& l : c.levels) {
      j["levels"].push_back({{"h", l.h},
                             {"dofs", l.dofs},
                             {"active_cells", l.active_cells},
                             {"volume", l.volume},
                             {"upper_bound", l.upper_bound},
                             {"residual", l.residual},
                             {"orthonormality_defect", l.orthonormality_defect},
                             {"iterations", l.iterations},
                             {"preconditioner", l.preconditioner},
                             {"grid_hash", hex64(l.grid_hash)}});
    }
  }
  if (!c.terms.empty()) {
    j["terms"] = Json::array();
    for (const auto& t : c.terms)
      j["terms"].push_back({{"eps", t.eps}, {"T1", t.t1}, {"T2", t.t2}, {"T3", t.t3}, {"value", t.value()}});
    j["eps_star"] = c.eps_star;
    j["T3_zero"] = c.t3_zero;
    j["small_eps"] = c.small_eps;
    j["small_eps_value"] = c.small_eps_value;
    j["quadrature_error"] = c.quadrature_error;
    j["mode_norm"] = c.mode_norm;
  }
  return j;
}

Json to_json(const HardyReport& r) {
  return Json{{"lemma", {{"lhs", r.lemma_lhs}, {"rhs", r.lemma_rhs}, {"holds", r.lemma_holds}}},
              {"corollary", {{"lhs", r.corollary_lhs}, {"rhs", r.corollary_rhs}, {"holds", r.corollary_holds}}},
              {"terms",
               {{"dv_tail", r.dv_tail},
                {"dv_12", r.dv_12},
                {"v_12", r.v_12},
                {"dv_all", r.dv_all},
                {"v_1R0", r.v_1R0}}}};
}

Json to_json(const WeylResult& r) {
  return Json{{"n", r.n},
              {"kappa", r.kappa},
              {"h", r.h},
              {"lambda", r.lambda},
              {"cutoff_radius", r.cutoff_radius},
              {"residual", r.residual},
              {"residual_abs", r.residual_abs},
              {"norm", r.norm},
              {"support", {r.z_lo, r.z_hi}}};
}

Json to_json(const EigenResult& r) {
  Json j;
  j["eigenvalues"] = r.eigenvalues;
  j["residuals"] = r.residuals;
  j["converged"] = Json::array();
  for (char c : r.converged) j["converged"].push_back(c != 0);
  j["iterations"] = r.iterations;
  j["orthonormality_defect"] = r.orthonormality_defect;
  return j;
}

Json grid_summary(const VoxelGrid& g) {
  std::size_t dir = std::count(g.dirichlet.begin(), g.dirichlet.end(), 1);
  return Json{{"h", g.h},
              {"R", g.R},
              {"cut_bc", g.cut_bc == CutCondition::dirichlet ? "dirichlet" : "neumann"},
              {"lattice", g.lattice == Lattice::face_aligned ? "face_aligned" : "cartesian"},
              {"frame", g.frame},
              {"lo", g.lo},
              {"dims", g.dims},
              {"active_cells", g.active_cells.size()},
              {"nodes", g.node_count()},
              {"dirichlet_nodes", dir},
              {"free_nodes", g.node_count() - dir},
              {"cell_volume", g.cell_volume},
              {"volume", g.volume()},
              {"hash", hex64(grid_hash(g))}};
}

std::string theta_scan_csv(const ThetaScan& s) {
  std::ostringstream o;
  o << "theta,lambda1,error,finest,R,h,levels,dofs\n";
  for (const auto& r : s.records)
    o << fmt(r.parameter) << ',' << fmt(r.eigenvalues[0]) << ',' << fmt(r.errors[0]) << ',' << fmt(r.finest[0])
      << ',' << fmt(r.R) << ',' << fmt(r.h) << ',' << r.levels << ',' << r.dofs << '\n';
  return o.str();
}

std::string truncation_scan_csv(const TruncationScan& s) {
  std::ostringstream o;
  o << "R,lambda1,error,gap,gap_error,used_in_fit\n";
  for (std::size_t i = 0; i < s.records.size(); ++i) {
    const auto& r = s.records[i];
    bool used = std::find(s.fit_R.begin(), s.fit_R.end(), r.R) != s.fit_R.end();
    o << fmt(r.parameter) << ',' << fmt(r.eigenvalues[0]) << ',' << fmt(r.errors[0]) << ',' << fmt(s.gaps[i]) << ','
      << fmt(s.gap_errors[i]) << ',' << (used ? 1 : 0) << '\n';
  }
  return o.str();
}

std::string veps_csv(const Certificate& c) {
  std::ostringstream o;
  o << "eps,T1,T2,T3,value\n";
  for (const auto& t : c.terms)
    o << fmt(t.eps) << ',' << fmt(t.t1) << ',' << fmt(t.t2) << ',' << fmt(t.t3) << ',' << fmt(t.value()) << '\n';
  return o.str();
}

std::string levels_csv(const Certificate& c) {
  std::ostringstream o;
  o << "h,dofs,active_cells,volume,upper_bound,residual,threshold,threshold_error\n";
  for (const auto& l : c.levels)
    o << fmt(l.h) << ',' << l.dofs << ',' << l.active_cells << ',' << fmt(l.volume) << ',' << fmt(l.upper_bound)
      << ',' << fmt(l.residual) << ',' << fmt(c.threshold) << ',' << fmt(c.threshold_error) << '\n';
  return o.str();
}

std::string svg_plot(const std::vector<Series>& series, const std::string& title, const std::string& xlabel,
                     const std::string& ylabel, bool log_y) {
  const double W = 640, H = 420, L = 70, Rm = 20, T = 40, B = 50;
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  auto ty = [&](double y) { return log_y ? std::log10(std::max(y, 1e-300)) : y; };
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  if (!(x1 > x0)) x1 = x0 + 1;
  if (!(y1 > y0)) y1 = y0 + 1;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - Rm); };
  auto py = [&](double y) { return H - B - (ty(y) - y0) / (y1 - y0) * (H - T - B); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << title << "</text>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - Rm << "\" y2=\"" << H - B
    << "\" stroke=\"black\"/>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << xlabel << "</text>\n";
  o << "<text x=\"16\" y=\"" << H / 2 << "\" transform=\"rotate(-90 16 " << H / 2 << ")\" text-anchor=\"middle\">"
    << ylabel << "</text>\n";
  char buf[64];
  for (int k = 0; k <= 4; ++k) {
    double xv = x0 + (x1 - x0) * k / 4, yv = y0 + (y1 - y0) * k / 4;
    std::snprintf(buf, sizeof buf, "%.4g", xv);
    o << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\" font-size=\"11\">" << buf
      << "</text>\n";
    std::snprintf(buf, sizeof buf, log_y ? "1e%.2g" : "%.5g", yv);
    double ypix = H - B - (yv - y0) / (y1 - y0) * (H - T - B);
    o << "<text x=\"" << L - 4 << "\" y=\"" << ypix + 4 << "\" text-anchor=\"end\" font-size=\"11\">" << buf
      << "</text>\n";
  }
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* col = colors[s % 5];
    o << "<polyline fill=\"none\" stroke=\"" << col << "\" points=\"";
    for (std::size_t i = 0; i < series[s].x.size(); ++i) o << px(series[s].x[i]) << ',' << py(series[s].y[i]) << ' ';
    o << "\"/>\n";
    for (std::size_t i = 0; i < series[s].x.size(); ++i)
      o << "<circle cx=\"" << px(series[s].x[i]) << "\" cy=\"" << py(series[s].y[i]) << "\" r=\"3\" fill=\"" << col
        << "\"/>\n";
    o << "<text x=\"" << W - Rm - 4 << "\" y=\"" << T + 16 * (s + 1) << "\" text-anchor=\"end\" fill=\"" << col
      << "\">" << series[s].label << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::string pgm_heatmap(const TriMesh& mesh, const std::vector<double>& values, int width) {
  if (width < 2) throw InvalidInput("image width must be at least 2");
  Vec2 lo{1e300, 1e300}, hi{-1e300, -1e300};
  for (const auto& p : mesh.nodes)
    for (int d = 0; d < 2; ++d) {
      lo[d] = std::min(lo[d], p[d]);
      hi[d] = std::max(hi[d], p[d]);
    }
  const double px = (hi[0] - lo[0]) / (width - 1);
  const int height = std::max(2, static_cast<int>(std::ceil((hi[1] - lo[1]) / px)) + 1);
  double vmax = 0;
  for (double v : values) vmax = std::max(vmax, std::abs(v));
  if (vmax == 0) vmax = 1;
  PointLocator loc(mesh);
  std::ostringstream o;
  o << "P2\n" << width << ' ' << height << "\n255\n";
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      Vec2 p{lo[0] + c * px, hi[1] - r * px};
      std::array<double, 3> bary;
      int t = loc.locate(p, bary);
      int g = 0;
      if (t >= 0) {
        const auto& T = mesh.triangles[t];
        double v = bary[0] * values[T[0]] + bary[1] * values[T[1]] + bary[2] * values[T[2]];
        g = static_cast<int>(std::lround(255 * std::abs(v) / vmax));
      }
      o << g << (c + 1 == width ? '\n' : ' ');
    }
  }
  return o.str();
}

std::string mesh_dump(const TriMesh& m) {
  std::ostringstream o;
  o << "# bent strip mesh\n";
  o << "theta " << fmt(m.theta) << "\nR " << fmt(m.outlet_length) << "\nh " << fmt(m.h) << '\n';
  o << "nodes " << m.nodes.size() << '\n';
  for (const auto& p : m.nodes) o << fmt(p[0]) << ' ' << fmt(p[1]) << '\n';
  o << "triangles " << m.triangles.size() << '\n';
  for (const auto& t : m.triangles) o << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  o << "edges " << m.boundary_edges.size() << '\n';
  for (const auto& e : m.boundary_edges)
    o << e.a << ' ' << e.b << ' ' << (e.tag == EdgeTag::dirichlet ? 'D' : 'N') << '\n';
  return o.str();
}

std::string matrix_dump(const SparseSymmetric& A) {
  std::ostringstream o;
  o << "# row col value (zero-based), n = " << A.n << ", nnz = " << A.nnz() << '\n';
  for (int i = 0; i < A.n; ++i)
    for (int p = A.row_ptr[i]; p < A.row_ptr[i + 1]; ++p) o << i << ' ' << A.col[p] << ' ' << fmt(A.val[p]) << '\n';
  return o.str();
}

std::string active_cells_rle(const VoxelGrid& g) {
  // Runs of consecutive active cell ids in the node box: "start length" per line.
  std::ostringstream o;
  o << "# active cells, box " << g.dims[0] << ' ' << g.dims[1] << ' ' << g.dims[2] << ", lo " << g.lo[0] << ' '
    << g.lo[1] << ' ' << g.lo[2] << '\n';
  const auto& c = g.active_cells;
  std::size_t i = 0;
  while (i < c.size()) {
    std::size_t j = i + 1;
    while (j < c.size() && c[j] == c[j - 1] + 1) ++j;
    o << c[i] << ' ' << (j - i) << '\n';
    i = j;
  }
  return o.str();
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + tmp.string());
    f << content;
    f.flush();
    if (!f) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

}  // namespace polylayer
