#pragma once

#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "polylayer/eigensolve.hpp"
#include "polylayer/geometry.hpp"
#include "polylayer/grid3d.hpp"
#include "polylayer/mesh2d.hpp"

namespace polylayer {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kPi2 = kPi * kPi;

// ---------------------------------------------------------------------------
// Bent-strip eigenvalues

struct WaveguideNumerics {
  double h = 0.1;  // coarsest mesh size, halved per level
  int levels = 3;
  double R = 0;  // outlet length; 0 picks it from the decay rate of the first mode
  double R_max = 30;
  int pairs = 1;
  double tolerance = 1e-9;
  std::uint64_t seed = 20240917;
  EndCondition ends = EndCondition::neumann;

  void validate() const;
};

struct LevelRecord {
  double h = 0;
  int dofs = 0;
  int iterations = 0;
  std::vector<double> eigenvalues;
  double max_residual = 0;
  double orthonormality_defect = 0;
  std::uint64_t mesh_hash = 0;
};

// Worst solver residual and M-orthonormality defect over a set of solves, and whether
// every eigenvalue sequence over nested refinements is nonincreasing.
struct SolverAudit {
  double max_residual = 0;
  double orthonormality_defect = 0;
  bool monotone = true;
  int eigenpairs = 0;

  void merge(const SolverAudit& other);
};

struct ThresholdResult {
  double theta = 0;
  double R = 0;
  double h = 0;
  EndCondition ends = EndCondition::neumann;
  double order = 2;  // Richardson exponent
  std::vector<LevelRecord> levels;
  std::vector<double> extrapolated;  // per pair
  std::vector<double> error;         // per pair
  // Change of the coarse-level eigenvalue when the outlets grow by half.
  double truncation_indicator = 0;

  double value() const { return extrapolated.at(0); }
  double error_indicator() const { return error.at(0); }
  std::vector<double> estimates(int pair = 0) const;
  SolverAudit audit() const;
};

// Finest-level first eigenfunction, nodal values on every mesh node, unit L2 norm, nonnegative.
struct WaveguideMode {
  TriMesh mesh;
  std::vector<double> values;
  double lambda = 0;
};

// Leading exponent of the eigenvalue error on quasi-uniform meshes, set by the
// re-entrant corner of angle 2 pi - theta.
double richardson_order(double theta);
// Extrapolants E_k from consecutive entries of a sequence on meshes with ratio 2 (k >= 1).
std::vector<double> richardson(const std::vector<double>& seq, double order);

ThresholdResult lambda1_waveguide(double theta, const WaveguideNumerics& num, WaveguideMode* mode = nullptr);
ThresholdResult threshold(const LayerGeometry& layer, const WaveguideNumerics& num);
double default_outlet_length(double theta, const WaveguideNumerics& num);

struct ScanRecord {
  double parameter = 0;
  std::vector<double> eigenvalues;  // extrapolated, ascending
  std::vector<double> errors;
  std::vector<double> finest;  // finest-level values
  double R = 0;
  double h = 0;
  int levels = 0;
  int dofs = 0;
  std::uint64_t mesh_hash = 0;
  SolverAudit audit;
};

struct ThetaScan {
  std::vector<ScanRecord> records;
  bool strictly_increasing = false;
  bool inside_band = false;  // all values in (pi^2/4, pi^2)
};

ThetaScan scan_theta(const std::vector<double>& thetas, const WaveguideNumerics& num);

struct TruncationScan {
  double theta = 0;
  std::vector<ScanRecord> records;
  double asymptote = 0;  // extrapolated eigenvalue at the reference length
  double asymptote_error = 0;
  double reference_R = 0;
  // Gaps to the reference length, extrapolated across levels, with error indicators.
  std::vector<double> gaps;
  std::vector<double> gap_errors;
  bool nondecreasing = false;
  bool below_asymptote = false;
  bool fit_ok = false;
  std::vector<double> fit_R;
  double exponent = 0;  // -d log(gap) / dR
  double intercept = 0;
  double r_squared = 0;
  double reference_exponent = 0;  // 2 sqrt(pi^2 - asymptote)
  std::string notice;
};

TruncationScan scan_truncation(double theta, const std::vector<double>& R_list, const WaveguideNumerics& num);

struct CountResult {
  double theta = 0;
  double R = 0;
  int count = 0;           // Dirichlet-ended values below pi^2 - error
  int near_threshold = 0;  // values within the guard band
  int neumann_count = 0;   // Neumann-ended values below pi^2 - error
  bool conclusive = false;
  std::vector<double> values, errors;
  std::vector<double> neumann_values, neumann_errors;
  SolverAudit audit;
};

CountResult count_below_threshold(double theta, const WaveguideNumerics& num);

struct AlphaStar {
  double lo = 0, hi = 0;
  std::vector<std::pair<double, double>> samples;  // (alpha, extrapolated lambda_1)
  double mid() const { return 0.5 * (lo + hi); }
};

AlphaStar alpha_star(double tol, const WaveguideNumerics& num);

// ---------------------------------------------------------------------------
// Certificates

enum class Verdict { nonempty, inconclusive, absent_consistent };
const char* verdict_name(Verdict v);

struct VoxelNumerics {
  double R = 6;
  double h = 0.1;  // coarsest voxel size, halved per level
  int levels = 2;
  double tolerance = 1e-8;
  std::uint64_t seed = 20240917;
  int smoothing_degree = 3;
  int direct_limit = 200000;  // larger problems use the multigrid preconditioner

  void validate() const;
};

struct VoxelLevel {
  double h = 0;
  int dofs = 0;
  std::size_t active_cells = 0;
  double volume = 0;
  double upper_bound = 0;
  double residual = 0;
  double orthonormality_defect = 0;
  int iterations = 0;
  std::uint64_t grid_hash = 0;
  std::string preconditioner;
};

struct VepsTerm {
  double eps = 0;
  double t1 = 0, t2 = 0, t3 = 0;
  double value() const { return t1 + t2 + t3; }
};

struct Certificate {
  std::string kind;  // upper_bound, veps, absence_scan
  double threshold = 0;
  double threshold_error = 0;
  double threshold_angle = 0;
  double evidence = 0;  // best upper bound or most negative V^eps value
  double margin = 0;    // threshold - evidence (upper_bound), -evidence (veps)
  double combined_error = 0;
  Verdict verdict = Verdict::inconclusive;
  std::string note;
  std::vector<VoxelLevel> levels;
  // V^eps
  std::vector<VepsTerm> terms;
  double eps_star = 0;
  double t3_zero = 0;
  double small_eps = 0;  // value(small_eps) for the eps -> 0 limit check
  double small_eps_value = 0;
  double quadrature_error = 0;
  double mode_norm = 0;
};

Certificate certify_discrete(const LayerGeometry& layer, const VoxelNumerics& vox, const WaveguideNumerics& wg);
// Same, with a threshold computed elsewhere.
Certificate certify_discrete(const LayerGeometry& layer, const VoxelNumerics& vox, const ThresholdResult& thr);

// alpha_star_value <= 0 computes it with the given waveguide numerics.
Certificate absence_experiment(double alpha, const VoxelNumerics& vox, const WaveguideNumerics& wg,
                               double alpha_star_value = 0);

struct VepsNumerics {
  std::vector<double> eps;  // empty selects a logarithmic grid on [1e-3, 1]
  WaveguideNumerics mode;   // levels >= 3 required
};

std::vector<double> log_grid(double lo, double hi, int count);

// Requires a regular layer (all vertex and dihedral angles equal).
Certificate veps_certificate(const LayerGeometry& layer, const VepsNumerics& num);
// Terms for one eigenfunction; alpha is the vertex angle, beta the dihedral angle.
VepsTerm veps_terms(const WaveguideMode& mode, double alpha, double beta, double eps);

// ---------------------------------------------------------------------------
// Hardy-type inequality

struct HardySample {
  std::vector<double> z;  // breakpoints, z[0] = 1, ascending
  std::vector<double> v;  // values; v.back() = 0 is the zero tail
  double R0 = 2;
  void validate() const;
};

struct HardyReport {
  double lemma_lhs = 0, lemma_rhs = 0;
  bool lemma_holds = false;
  double corollary_lhs = 0, corollary_rhs = 0;
  bool corollary_holds = false;
  // Pieces of the right-hand sides.
  double dv_tail = 0;   // ||v'||^2 on (2, inf)
  double dv_12 = 0;     // ||v'||^2 on (1, 2)
  double v_12 = 0;      // ||v||^2 on (1, 2)
  double dv_all = 0;    // ||v'||^2 on (1, inf)
  double v_1R0 = 0;     // ||v||^2 on (1, R0)
};

HardyReport hardy_check(const HardySample& sample);
// Interpolates f at geometrically graded points of [1, zmax], then ramps to zero on [zmax, 2 zmax].
HardySample sample_function(double (*f)(double), double zmax, int pieces, double R0 = 2);
HardySample random_hardy_sample(std::uint64_t seed);

// ---------------------------------------------------------------------------
// Weyl sequence demonstration

struct WeylConfig {
  int n = 2;
  double kappa = 0;
  double h = 0.05;  // grid spacing, also the mesh size of the cross-section mode
  WaveguideNumerics mode;  // numerics for the threshold value
  void validate() const;
};

struct WeylResult {
  int n = 0;
  double kappa = 0;
  double h = 0;
  double lambda = 0;  // extrapolated threshold used in the residual
  double cutoff_radius = 0;  // R(n)
  double residual = 0;  // ||(-Delta - lambda - kappa^2) Psi|| / ||Psi||
  double residual_abs = 0;
  double norm = 0;
  double z_lo = 0, z_hi = 0;  // support in z
};

// Degree-5 smoothstep and its first two derivatives.
double smoothstep(double t);
double smoothstep_d1(double t);
double smoothstep_d2(double t);

class WeylDemo {
 public:
  // Long cross-section mode of the smallest dihedral angle; the layer must have beta_min = pi/2.
  WeylDemo(const LayerGeometry& layer, double h, const WaveguideNumerics& threshold_numerics, int max_n = 5);
  WeylResult residual(int n, double kappa) const;
  // Integral of |Psi_n| |Psi_m| over the layer.
  double overlap(int n, int m) const;
  double lambda() const { return lambda_; }

 private:
  std::vector<double> cross_section(int n) const;  // f = v * chi^{R(n)} on the grid
  double cutoff_radius(int n) const;

  double h_ = 0;
  double lambda_ = 0;
  double tan_half_ = 1;
  int nx_ = 0, ny_ = 0;  // grid nodes per axis
  std::vector<double> v_;  // mode on the grid, row-major, zero outside
  std::vector<double> s_;  // outlet coordinate per grid node
  std::vector<char> inside_;
};

WeylResult weyl_residual(const LayerGeometry& layer, const WeylConfig& config);

}  // namespace polylayer
