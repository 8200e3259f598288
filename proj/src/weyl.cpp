#include <cmath>
#include <complex>

#include "polylayer/analysis.hpp"
#include "polylayer/assembly.hpp"
#include "polylayer/errors.hpp"

namespace polylayer {

double smoothstep(double t) {
  if (t <= 0) return 0;
  if (t >= 1) return 1;
  return t * t * t * (10 + t * (-15 + 6 * t));
}

double smoothstep_d1(double t) {
  if (t <= 0 || t >= 1) return 0;
  return 30 * t * t * (1 - t) * (1 - t);
}

double smoothstep_d2(double t) {
  if (t <= 0 || t >= 1) return 0;
  return 60 * t * (1 - t) * (1 - 2 * t);
}

void WeylConfig::validate() const {
  if (n < 1 || n > 8) throw InvalidInput("Weyl index n must lie in [1, 8]");
  if (!(kappa >= 0)) throw InvalidInput("kappa must be nonnegative");
  if (!(h > 0 && h <= 0.1)) throw InvalidInput("grid spacing must be at most 0.1 to resolve the cut-off derivatives");
}

namespace {

double z_cutoff(int n, double z) {
  const double a = std::ldexp(1.0, n), b = std::ldexp(1.0, n + 1);
  return smoothstep(z - a) * smoothstep(b - z);
}

std::vector<std::complex<double>> z_profile(int n, double kappa, double h, int& k0) {
  const double a = std::ldexp(1.0, n), b = std::ldexp(1.0, n + 1);
  k0 = static_cast<int>(std::ceil(a / h - 1e-9));
  const int k1 = static_cast<int>(std::floor(b / h + 1e-9));
  std::vector<std::complex<double>> g;
  const double scale = 1 / std::sqrt(a);
  for (int k = k0; k <= k1; ++k) {
    double z = k * h;
    g.push_back(scale * z_cutoff(n, z) * std::polar(1.0, kappa * z));
  }
  return g;
}

}  // namespace

WeylDemo::WeylDemo(const LayerGeometry& layer, double h, const WaveguideNumerics& thr_num, int max_n) : h_(h) {
  if (std::abs(layer.beta_min() - kPi / 2) > 1e-9)
    throw InvalidInput("Weyl demonstration needs a smallest dihedral angle of pi/2 (grid-aligned cross-section)");
  if (!(h > 0 && h <= 0.1)) throw InvalidInput("grid spacing must be at most 0.1 to resolve the cut-off derivatives");
  const double inv = 1 / h;
  if (std::abs(inv - std::round(inv)) > 1e-9) throw InvalidInput("grid spacing must divide the unit width");
  const auto& ang = layer.angle();
  const int j = layer.beta_min_edge(), n = ang.faces();
  tan_half_ = std::min(std::tan(ang.vertex_angles[(j + n - 1) % n] / 2), std::tan(ang.vertex_angles[j] / 2));

  lambda_ = lambda1_waveguide(kPi / 2, thr_num).value();

  const double Rv = std::ceil((cutoff_radius(max_n) + 1) / h - 1e-9) * h;
  LShapeProfile prof = lshape_profile(kPi / 2, Rv);
  TriMesh mesh = mesh_lshape(prof, h, EndCondition::dirichlet);
  DiscreteProblem P = assemble_p1(mesh);
  SolverConfig cfg;
  cfg.tolerance = thr_num.tolerance;
  auto pre = make_preconditioner(P.K, PreconditionerKind::cholesky);
  EigenResult r = smallest_eigenpairs(P, cfg, pre.get());
  if (!r.all_converged()) throw NotConverged("cross-section mode did not converge");
  std::vector<double> v = P.expand(std::span<const double>(r.vectors.col(0).data(), P.dofs()));

  // Rotate by theta/2 so the arms run along the grid axes.
  const int N = static_cast<int>(std::lround((1 + Rv) / h));
  nx_ = ny_ = N + 1;
  v_.assign(static_cast<std::size_t>(nx_) * ny_, 0.0);
  s_.assign(v_.size(), 0.0);
  inside_.assign(v_.size(), 0);
  const double c = std::cos(kPi / 4), s = std::sin(kPi / 4);
  for (std::size_t k = 0; k < mesh.nodes.size(); ++k) {
    const Vec2& p = mesh.nodes[k];
    double a = c * p[0] - s * p[1], b = s * p[0] + c * p[1];
    long i = std::lround(a / h), jj = std::lround(b / h);
    if (std::abs(a - i * h) > 1e-8 || std::abs(b - jj * h) > 1e-8 || i < 0 || jj < 0 || i > N || jj > N)
      throw InvalidInput("cross-section mesh does not match the grid");
    v_[i + static_cast<std::size_t>(nx_) * jj] = v[k];
  }
  for (int jj = 0; jj < ny_; ++jj)
    for (int i = 0; i < nx_; ++i) {
      double a = i * h, b = jj * h;
      std::size_t idx = i + static_cast<std::size_t>(nx_) * jj;
      s_[idx] = std::max(a, b) - 1;
      inside_[idx] = (i > 0 && jj > 0 && std::min(a, b) < 1 - 1e-9 && i < N && jj < N) ? 1 : 0;
    }
}

double WeylDemo::cutoff_radius(int n) const { return std::ldexp(1.0, n) * tan_half_; }

std::vector<double> WeylDemo::cross_section(int n) const {
  const double R = cutoff_radius(n);
  if (R + 1 > (nx_ - 1) * h_ + 1e-9) throw InvalidInput("cross-section mode is too short for this index");
  std::vector<double> f(v_.size(), 0.0);
  for (std::size_t k = 0; k < f.size(); ++k)
    if (inside_[k]) f[k] = v_[k] * smoothstep(R - s_[k]);
  return f;
}

WeylResult WeylDemo::residual(int n, double kappa) const {
  std::vector<double> f = cross_section(n);
  const double h2 = h_ * h_;
  double SA2 = 0, SAf = 0, Sf2 = 0;
  for (int j = 1; j + 1 < ny_; ++j)
    for (int i = 1; i + 1 < nx_; ++i) {
      std::size_t k = i + static_cast<std::size_t>(nx_) * j;
      if (!inside_[k]) continue;
      double lap = (4 * f[k] - f[k - 1] - f[k + 1] - f[k - nx_] - f[k + nx_]) / h2;
      double A = lap - lambda_ * f[k];
      SA2 += A * A;
      SAf += A * f[k];
      Sf2 += f[k] * f[k];
    }
  int k0 = 0;
  auto g = z_profile(n, kappa, h_, k0);
  double Sg2 = 0, SB2 = 0, SgB = 0;
  const int m = static_cast<int>(g.size());
  for (int k = 0; k < m; ++k) {
    std::complex<double> gm = k > 0 ? g[k - 1] : 0.0, gp = k + 1 < m ? g[k + 1] : 0.0;
    std::complex<double> B = -(gp - 2.0 * g[k] + gm) / h2 - kappa * kappa * g[k];
    Sg2 += std::norm(g[k]);
    SB2 += std::norm(B);
    SgB += std::real(g[k] * std::conj(B));
  }
  const double vol = h2 * h_;
  WeylResult out;
  out.n = n;
  out.kappa = kappa;
  out.h = h_;
  out.lambda = lambda_;
  out.cutoff_radius = cutoff_radius(n);
  out.norm = std::sqrt(Sf2 * Sg2 * vol);
  out.residual_abs = std::sqrt(std::max(0.0, (SA2 * Sg2 + Sf2 * SB2 + 2 * SAf * SgB) * vol));
  out.residual = out.residual_abs / out.norm;
  out.z_lo = std::ldexp(1.0, n);
  out.z_hi = std::ldexp(1.0, n + 1);
  return out;
}

double WeylDemo::overlap(int n, int m) const {
  auto fn = cross_section(n), fm = cross_section(m);
  double sf = 0;
  for (std::size_t k = 0; k < fn.size(); ++k) sf += std::abs(fn[k] * fm[k]);
  int kn = 0, km = 0;
  auto gn = z_profile(n, 0, h_, kn), gm = z_profile(m, 0, h_, km);
  double sg = 0;
  for (int k = 0; k < static_cast<int>(gn.size()); ++k) {
    int q = kn + k - km;
    if (q >= 0 && q < static_cast<int>(gm.size())) sg += std::abs(gn[k]) * std::abs(gm[q]);
  }
  return sf * sg * h_ * h_ * h_;
}

WeylResult weyl_residual(const LayerGeometry& layer, const WeylConfig& config) {
  config.validate();
  WeylDemo demo(layer, config.h, config.mode, config.n);
  return demo.residual(config.n, config.kappa);
}

}  // namespace polylayer
