#include <algorithm>
#include <cmath>

#include "polylayer/analysis.hpp"
#include "polylayer/assembly.hpp"
#include "polylayer/errors.hpp"
#include "polylayer/multigrid.hpp"

namespace polylayer {

void WaveguideNumerics::validate() const {
  if (!(h > 0 && h <= 0.5)) throw InvalidInput("mesh size h must lie in (0, 0.5]");
  if (levels < 1 || levels > 8) throw InvalidInput("levels must lie in [1, 8]");
  if (R < 0) throw InvalidInput("outlet length R must be positive (0 selects it automatically)");
  if (!(R_max >= 2)) throw InvalidInput("R_max must be at least 2");
  if (pairs < 1) throw InvalidInput("pairs must be at least 1");
  if (!(tolerance > 0 && tolerance <= 1e-2)) throw InvalidInput("tolerance must lie in (0, 1e-2]");
}

std::vector<double> ThresholdResult::estimates(int pair) const {
  std::vector<double> out;
  for (const auto& l : levels) out.push_back(l.eigenvalues.at(pair));
  return out;
}

void SolverAudit::merge(const SolverAudit& o) {
  max_residual = std::max(max_residual, o.max_residual);
  orthonormality_defect = std::max(orthonormality_defect, o.orthonormality_defect);
  monotone = monotone && o.monotone;
  eigenpairs += o.eigenpairs;
}

SolverAudit ThresholdResult::audit() const {
  SolverAudit a;
  for (const auto& l : levels) {
    a.max_residual = std::max(a.max_residual, l.max_residual);
    a.orthonormality_defect = std::max(a.orthonormality_defect, l.orthonormality_defect);
    a.eigenpairs += static_cast<int>(l.eigenvalues.size());
  }
  for (std::size_t k = 0; k < extrapolated.size(); ++k) {
    auto seq = estimates(static_cast<int>(k));
    for (std::size_t i = 1; i < seq.size(); ++i)
      if (seq[i] > seq[i - 1]) a.monotone = false;
  }
  return a;
}

double richardson_order(double theta) { return std::min(2.0, 2 * kPi / (2 * kPi - theta)); }

std::vector<double> richardson(const std::vector<double>& seq, double order) {
  const double f = std::pow(2.0, order) - 1;
  std::vector<double> out;
  for (std::size_t k = 1; k < seq.size(); ++k) out.push_back(seq[k] + (seq[k] - seq[k - 1]) / f);
  return out;
}

namespace {

double round_up(double R, double h) { return std::ceil(R / h - 1e-9) * h; }

// Eigenvalues on nested refinements of one mesh; each level starts from the
// prolongated vectors of the previous one.
ThresholdResult solve_levels(double theta, double R, const WaveguideNumerics& num, int levels, WaveguideMode* mode) {
  ThresholdResult out;
  out.theta = theta;
  out.R = R;
  out.h = num.h;
  out.ends = num.ends;
  out.order = richardson_order(theta);

  LShapeProfile profile = lshape_profile(theta, R);
  TriMesh mesh = mesh_lshape(profile, num.h, num.ends);
  DiscreteProblem prev;
  Eigen::MatrixXd prev_vectors;
  SolverConfig cfg;
  cfg.num_pairs = num.pairs;
  cfg.tolerance = num.tolerance;
  cfg.seed = num.seed;
  for (int l = 0; l < levels; ++l) {
    if (l > 0) mesh = refine(mesh);
    DiscreteProblem P = assemble_p1(mesh);
    auto pre = make_preconditioner(P.K, PreconditionerKind::cholesky);
    EigenResult r;
    if (l > 0) {
      SparseRect T = prolongation_p1(mesh, prev, P);
      Eigen::MatrixXd start(P.dofs(), prev_vectors.cols());
      for (int j = 0; j < prev_vectors.cols(); ++j) {
        std::vector<double> x(prev_vectors.col(j).data(), prev_vectors.col(j).data() + prev.dofs()), y(P.dofs());
        T.multiply(x, y);
        start.col(j) = Eigen::Map<Eigen::VectorXd>(y.data(), P.dofs());
      }
      r = smallest_eigenpairs(P, cfg, pre.get(), &start);
    } else {
      r = smallest_eigenpairs(P, cfg, pre.get());
    }
    if (!r.all_converged())
      throw NotConverged("eigensolver did not converge on level " + std::to_string(l) + " (theta " +
                         std::to_string(theta) + ")");
    LevelRecord rec;
    rec.h = mesh.h;
    rec.dofs = P.dofs();
    rec.iterations = r.iterations;
    rec.eigenvalues = r.eigenvalues;
    rec.max_residual = *std::max_element(r.residuals.begin(), r.residuals.end());
    rec.orthonormality_defect = r.orthonormality_defect;
    rec.mesh_hash = P.provenance;
    out.levels.push_back(rec);
    if (l + 1 == levels && mode) {
      mode->values = P.expand(std::span<const double>(r.vectors.col(0).data(), P.dofs()));
      mode->lambda = r.eigenvalues[0];
      mode->mesh = mesh;
    }
    prev = std::move(P);
    prev_vectors = std::move(r.vectors);
  }

  for (int k = 0; k < num.pairs; ++k) {
    auto seq = out.estimates(k);
    if (seq.size() == 1) {
      out.extrapolated.push_back(seq[0]);
      out.error.push_back(std::abs(seq[0]));
      continue;
    }
    auto ex = richardson(seq, out.order);
    double e = ex.size() >= 2 ? std::abs(ex.back() - ex[ex.size() - 2]) : std::abs(ex.back() - seq.back());
    out.extrapolated.push_back(ex.back());
    out.error.push_back(std::max(e, 10 * num.tolerance * std::abs(ex.back())));
  }
  return out;
}

double coarse_lambda(double theta, double R, const WaveguideNumerics& num) {
  WaveguideNumerics c = num;
  c.pairs = 1;
  return solve_levels(theta, R, c, 1, nullptr).levels[0].eigenvalues[0];
}

}  // namespace

double default_outlet_length(double theta, const WaveguideNumerics& num) {
  WaveguideNumerics c = num;
  c.h = 0.2;
  c.pairs = 1;
  c.ends = EndCondition::neumann;
  ThresholdResult est = solve_levels(theta, 4.0, c, 2, nullptr);
  double gap = kPi2 - est.value();
  double R = gap > 0 ? 5 / std::sqrt(gap) : num.R_max;
  R = std::clamp(R, 4.0, num.R_max);
  return round_up(R, num.h);
}

ThresholdResult lambda1_waveguide(double theta, const WaveguideNumerics& num, WaveguideMode* mode) {
  if (!(theta > 0 && theta < kPi)) throw InvalidInput("opening angle must lie in (0, pi)");
  num.validate();
  const bool automatic = num.R == 0;
  double R = automatic ? default_outlet_length(theta, num) : num.R;
  for (;;) {
    ThresholdResult res = solve_levels(theta, R, num, num.levels, mode);
    double R_long = round_up(1.5 * R, num.h);
    res.truncation_indicator = std::abs(coarse_lambda(theta, R_long, num) - res.levels[0].eigenvalues[0]);
    if (!automatic || res.truncation_indicator <= res.error_indicator() || R >= num.R_max) return res;
    R = std::min(R_long, round_up(num.R_max, num.h));
  }
}

ThresholdResult threshold(const LayerGeometry& layer, const WaveguideNumerics& num) {
  return lambda1_waveguide(layer.beta_min(), num);
}

namespace {

ScanRecord to_record(double parameter, const ThresholdResult& r) {
  ScanRecord s;
  s.parameter = parameter;
  s.eigenvalues = r.extrapolated;
  s.errors = r.error;
  s.finest = r.levels.back().eigenvalues;
  s.R = r.R;
  s.h = r.h;
  s.levels = static_cast<int>(r.levels.size());
  s.dofs = r.levels.back().dofs;
  s.mesh_hash = r.levels.back().mesh_hash;
  s.audit = r.audit();
  return s;
}

}  // namespace

ThetaScan scan_theta(const std::vector<double>& thetas, const WaveguideNumerics& num) {
  if (thetas.empty()) throw InvalidInput("theta list is empty");
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    if (!(thetas[i] > 0 && thetas[i] < kPi)) throw InvalidInput("theta values must lie in (0, pi)");
    if (i && !(thetas[i] > thetas[i - 1])) throw InvalidInput("theta values must be ascending");
  }
  ThetaScan scan;
  scan.records.resize(thetas.size());
  for (std::size_t i = 0; i < thetas.size(); ++i) scan.records[i] = to_record(thetas[i], lambda1_waveguide(thetas[i], num));
  scan.strictly_increasing = true;
  scan.inside_band = true;
  for (std::size_t i = 0; i < scan.records.size(); ++i) {
    double v = scan.records[i].eigenvalues[0];
    if (!(v > kPi2 / 4 && v < kPi2)) scan.inside_band = false;
    if (i && !(v > scan.records[i - 1].eigenvalues[0])) scan.strictly_increasing = false;
  }
  return scan;
}

TruncationScan scan_truncation(double theta, const std::vector<double>& R_list, const WaveguideNumerics& num) {
  if (R_list.empty()) throw InvalidInput("R list is empty");
  for (std::size_t i = 0; i < R_list.size(); ++i) {
    if (!(R_list[i] > 0)) throw InvalidInput("R values must be positive");
    if (i && !(R_list[i] > R_list[i - 1])) throw InvalidInput("R values must be ascending");
    double q = R_list[i] / num.h;
    if (std::abs(q - std::round(q)) > 1e-9) throw InvalidInput("R values must be multiples of h so meshes nest");
  }
  if (num.levels < 2) throw InvalidInput("R scan needs at least two levels");
  TruncationScan out;
  out.theta = theta;
  WaveguideNumerics fixed = num;
  std::vector<ThresholdResult> runs;
  for (double R : R_list) {
    fixed.R = R;
    runs.push_back(lambda1_waveguide(theta, fixed));
    out.records.push_back(to_record(R, runs.back()));
  }
  out.reference_R = std::max(round_up(2 * R_list.back(), num.h), default_outlet_length(theta, num));
  fixed.R = out.reference_R;
  ThresholdResult ref = lambda1_waveguide(theta, fixed);
  out.asymptote = ref.value();
  out.asymptote_error = ref.error_indicator();
  out.reference_exponent = 2 * std::sqrt(std::max(0.0, kPi2 - out.asymptote));

  out.nondecreasing = true;
  out.below_asymptote = true;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    double v = runs[i].value();
    if (i && v < runs[i - 1].value()) out.nondecreasing = false;
    if (v > out.asymptote + out.asymptote_error) out.below_asymptote = false;
    for (std::size_t l = 0; l < runs[i].levels.size() && i; ++l)
      if (runs[i].levels[l].eigenvalues[0] < runs[i - 1].levels[l].eigenvalues[0]) out.nondecreasing = false;
  }

  // Gaps extrapolated across levels like the eigenvalues; the level sequences
  // share one mesh family, so their errors largely cancel in the difference.
  std::vector<double> xs, ys;
  for (const auto& r : runs) {
    std::vector<double> seq;
    for (std::size_t l = 0; l < r.levels.size(); ++l) seq.push_back(ref.levels[l].eigenvalues[0] - r.levels[l].eigenvalues[0]);
    auto ex = richardson(seq, r.order);
    double g = ex.back();
    double e = ex.size() >= 2 ? std::abs(ex.back() - ex[ex.size() - 2]) : std::abs(ex.back() - seq.back());
    out.gaps.push_back(g);
    out.gap_errors.push_back(e);
    if (g > 0 && g > 10 * e) {
      xs.push_back(r.R);
      ys.push_back(std::log(g));
    }
  }
  out.fit_R = xs;
  if (xs.size() < 3) {
    out.notice = "fit omitted: fewer than three gaps exceed ten times their error indicator";
    return out;
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i] / n;
    my += ys[i] / n;
  }
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  double slope = sxy / sxx;
  out.exponent = -slope;
  out.intercept = my - slope * mx;
  out.r_squared = syy > 0 ? sxy * sxy / (sxx * syy) : 1.0;
  out.fit_ok = true;
  return out;
}

CountResult count_below_threshold(double theta, const WaveguideNumerics& num) {
  if (!(theta > 0 && theta < kPi)) throw InvalidInput("opening angle must lie in (0, pi)");
  CountResult out;
  out.theta = theta;
  WaveguideNumerics d = num;
  d.R = num.R > 0 ? num.R : default_outlet_length(theta, num);
  out.R = d.R;
  d.ends = EndCondition::dirichlet;
  ThresholdResult dir = lambda1_waveguide(theta, d);
  d.ends = EndCondition::neumann;
  ThresholdResult neu = lambda1_waveguide(theta, d);
  out.values = dir.extrapolated;
  out.errors = dir.error;
  out.neumann_values = neu.extrapolated;
  out.neumann_errors = neu.error;
  out.audit = dir.audit();
  out.audit.merge(neu.audit());
  for (std::size_t k = 0; k < out.values.size(); ++k) {
    if (out.values[k] < kPi2 - out.errors[k]) ++out.count;
    else if (std::abs(out.values[k] - kPi2) <= out.errors[k]) ++out.near_threshold;
    if (out.neumann_values[k] < kPi2 - out.neumann_errors[k]) ++out.neumann_count;
  }
  out.conclusive = out.neumann_count == out.count && out.near_threshold == 0 && out.count < num.pairs;
  return out;
}

AlphaStar alpha_star(double tol, const WaveguideNumerics& num) {
  if (!(tol >= 1e-3)) throw InvalidInput("alpha_star tolerance must be at least 1e-3");
  WaveguideNumerics w = num;
  w.pairs = 1;
  AlphaStar out;
  auto f = [&](double a) {
    double v = lambda1_waveguide(a, w).value();
    out.samples.push_back({a, v});
    return v - kPi2 / 2;
  };
  double lo = 0.1, hi = kPi / 2;
  while (f(lo) > 0) lo /= 2;
  while (f(hi) < 0) hi = 0.5 * (hi + kPi);
  while (hi - lo > tol) {
    double mid = 0.5 * (lo + hi);
    (f(mid) < 0 ? lo : hi) = mid;
  }
  out.lo = lo;
  out.hi = hi;
  return out;
}

}  // namespace polylayer
