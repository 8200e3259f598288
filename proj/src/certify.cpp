#include <algorithm>
#include <cmath>
#include <limits>

#include "polylayer/analysis.hpp"
#include "polylayer/assembly.hpp"
#include "polylayer/errors.hpp"
#include "polylayer/multigrid.hpp"

namespace polylayer {

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::nonempty: return "NONEMPTY";
    case Verdict::inconclusive: return "INCONCLUSIVE";
    case Verdict::absent_consistent: return "ABSENT_CONSISTENT";
  }
  return "?";
}

void VoxelNumerics::validate() const {
  if (!(h > 0 && h <= 1.0 / 3 + 1e-12)) throw InvalidInput("voxel size h must lie in (0, 1/3]");
  if (!(R >= 3)) throw InvalidInput("truncation R must be at least 3");
  if (levels < 1 || levels > 4) throw InvalidInput("voxel levels must lie in [1, 4]");
  if (!(tolerance > 0 && tolerance <= 1e-2)) throw InvalidInput("tolerance must lie in (0, 1e-2]");
  if (smoothing_degree < 1) throw InvalidInput("smoothing degree must be positive");
}

Certificate certify_discrete(const LayerGeometry& layer, const VoxelNumerics& vox, const WaveguideNumerics& wg) {
  return certify_discrete(layer, vox, threshold(layer, wg));
}

Certificate certify_discrete(const LayerGeometry& layer, const VoxelNumerics& vox, const ThresholdResult& thr) {
  vox.validate();
  Certificate cert;
  cert.kind = "upper_bound";
  cert.threshold = thr.value();
  cert.threshold_error = thr.error_indicator() + thr.truncation_indicator;
  cert.threshold_angle = thr.theta;

  std::vector<VoxelGrid> grids;
  std::vector<DiscreteProblem> problems;
  Eigen::VectorXd prev_vector;
  SolverConfig cfg;
  cfg.num_pairs = 1;
  cfg.tolerance = vox.tolerance;
  cfg.seed = vox.seed;
  double best = std::numeric_limits<double>::infinity();
  for (int l = 0; l < vox.levels; ++l) {
    const double h = vox.h / (1 << l);
    grids.push_back(voxelize(layer, vox.R, h, CutCondition::dirichlet));
    problems.push_back(assemble_q1(grids.back()));
    const DiscreteProblem& P = problems.back();

    std::unique_ptr<Preconditioner> pre;
    std::string pre_name = "cholesky";
    if (l == 0 || P.dofs() <= vox.direct_limit) {
      pre = make_preconditioner(P.K, PreconditionerKind::cholesky);
    } else {
      std::vector<const SparseSymmetric*> ops;
      std::vector<SparseRect> prolong(l + 1);
      for (int k = 0; k <= l; ++k) {
        ops.push_back(&problems[k].K);
        if (k) prolong[k] = prolongation_q1(grids[k - 1], grids[k], problems[k - 1], problems[k]);
      }
      pre = std::make_unique<MultigridPreconditioner>(ops, std::move(prolong), vox.smoothing_degree);
      pre_name = "multigrid";
    }

    EigenResult r;
    if (l > 0) {
      SparseRect T = prolongation_q1(grids[l - 1], grids[l], problems[l - 1], P);
      std::vector<double> x(prev_vector.data(), prev_vector.data() + prev_vector.size()), y(P.dofs());
      T.multiply(x, y);
      Eigen::MatrixXd start = Eigen::Map<Eigen::MatrixXd>(y.data(), P.dofs(), 1);
      r = smallest_eigenpairs(P, cfg, pre.get(), &start);
    } else {
      r = smallest_eigenpairs(P, cfg, pre.get());
    }
    if (!r.all_converged())
      throw NotConverged("eigensolver did not converge on voxel level " + std::to_string(l));
    prev_vector = r.vectors.col(0);

    VoxelLevel rec;
    rec.h = h;
    rec.dofs = P.dofs();
    rec.active_cells = grids.back().active_cells.size();
    rec.volume = grids.back().volume();
    rec.upper_bound = rayleigh_quotient(P, std::span<const double>(prev_vector.data(), P.dofs()));
    rec.residual = r.residuals[0];
    rec.orthonormality_defect = r.orthonormality_defect;
    rec.iterations = r.iterations;
    rec.grid_hash = P.provenance;
    rec.preconditioner = pre_name;
    cert.levels.push_back(rec);
    best = std::min(best, rec.upper_bound);
  }
  cert.evidence = best;
  cert.margin = cert.threshold - best;
  // The Rayleigh quotient bounds lambda_1 of the layer from above up to rounding.
  cert.combined_error = cert.threshold_error + 1e-10 * std::abs(best);
  cert.verdict = cert.margin > cert.combined_error ? Verdict::nonempty : Verdict::inconclusive;
  cert.note = "Rayleigh quotients of trial functions extended by zero from an inscribed voxel domain";
  return cert;
}

Certificate absence_experiment(double alpha, const VoxelNumerics& vox, const WaveguideNumerics& wg,
                               double alpha_star_value) {
  if (!(alpha > 0 && alpha < kPi)) throw InvalidInput("alpha must lie in (0, pi)");
  double limit = alpha_star_value;
  if (limit <= 0) limit = alpha_star(1e-2, wg).lo;
  if (!(alpha < limit - 0.05))
    throw InvalidInput("absence experiment needs alpha < alpha_star - 0.05 (alpha_star = " + std::to_string(limit) +
                       ")");
  LayerGeometry layer = make_layer(build_trihedral({kPi / 2, alpha, kPi / 2}));
  Certificate cert = certify_discrete(layer, vox, threshold(layer, wg));
  cert.kind = "absence_scan";
  bool below = false;
  for (const auto& l : cert.levels)
    if (l.upper_bound < 0.999 * cert.threshold) below = true;
  cert.verdict = below ? Verdict::inconclusive : Verdict::absent_consistent;
  cert.note = below ? "an upper bound fell below 0.999 of the threshold"
                    : "no upper bound below 0.999 of the threshold; consistent with absence, not a proof";
  return cert;
}

}  // namespace polylayer
