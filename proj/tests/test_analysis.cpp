#include <cmath>

#include "doctest.h"
#include "polylayer/analysis.hpp"
#include "polylayer/errors.hpp"

using namespace polylayer;
using doctest::Approx;

namespace {

WaveguideNumerics coarse(double R = 4, int levels = 3) {
  WaveguideNumerics n;
  n.h = 0.2;
  n.levels = levels;
  n.R = R;
  return n;
}

}  // namespace

TEST_SUITE("waveguide") {

TEST_CASE("Richardson order and extrapolation") {
  CHECK(richardson_order(kPi / 2) == Approx(4.0 / 3).epsilon(1e-15));
  CHECK(richardson_order(1e-9) == Approx(1.0).epsilon(1e-9));
  for (double theta : {0.1, 1.0, 2.0, 3.1}) {
    double p = richardson_order(theta);
    CHECK(p > 1);
    CHECK(p < 2);
    // A sequence a + c h^p with h halving is extrapolated exactly.
    std::vector<double> seq;
    for (int k = 0; k < 4; ++k) seq.push_back(7.5 + 3 * std::pow(0.1 / (1 << k), p));
    for (double e : richardson(seq, p)) CHECK(e == Approx(7.5).epsilon(1e-13));
  }
  CHECK(richardson({1.0}, 2).empty());
}

TEST_CASE("right-angle bend on coarse meshes") {
  WaveguideMode mode;
  auto r = lambda1_waveguide(kPi / 2, coarse(), &mode);
  REQUIRE(r.levels.size() == 3);
  CHECK(r.order == Approx(4.0 / 3));
  for (std::size_t l = 0; l < r.levels.size(); ++l) {
    CHECK(r.levels[l].max_residual <= 1e-9);
    CHECK(r.levels[l].orthonormality_defect <= 1e-8);
    if (l) {
      CHECK(r.levels[l].eigenvalues[0] < r.levels[l - 1].eigenvalues[0]);
      CHECK(r.levels[l].h == Approx(r.levels[l - 1].h / 2));
      CHECK(r.levels[l].dofs > 3 * r.levels[l - 1].dofs);
    }
  }
  CHECK(r.value() < r.levels.back().eigenvalues[0]);
  CHECK(r.value() > kPi2 / 4);
  CHECK(r.value() < kPi2);
  CHECK(std::abs(r.value() - 9.1686) < 0.05);
  CHECK(r.error_indicator() > 0);
  CHECK(r.truncation_indicator >= 0);

  // Finest-level mode: unit L2 norm, nonnegative, vanishing on Dirichlet nodes.
  double n2 = 0;
  for (const auto& T : mode.mesh.triangles) {
    double area = 0.5 * cross(mode.mesh.nodes[T[1]] - mode.mesh.nodes[T[0]], mode.mesh.nodes[T[2]] - mode.mesh.nodes[T[0]]);
    double a = mode.values[T[0]], b = mode.values[T[1]], c = mode.values[T[2]];
    n2 += area / 6 * (a * a + b * b + c * c + a * b + b * c + c * a);
  }
  CHECK(n2 == Approx(1).epsilon(1e-9));
  auto dir = mode.mesh.dirichlet_nodes();
  for (std::size_t v = 0; v < mode.values.size(); ++v) {
    CHECK(mode.values[v] >= -1e-12);
    if (dir[v]) CHECK(mode.values[v] == 0);
  }
  CHECK(mode.lambda == r.levels.back().eigenvalues[0]);
}

TEST_CASE("end conditions bracket the eigenvalue") {
  auto n = coarse(3, 2);
  auto neu = lambda1_waveguide(1.2, n);
  n.ends = EndCondition::dirichlet;
  auto dir = lambda1_waveguide(1.2, n);
  for (std::size_t l = 0; l < 2; ++l) CHECK(dir.levels[l].eigenvalues[0] > neu.levels[l].eigenvalues[0]);
}

TEST_CASE("automatic outlet length") {
  WaveguideNumerics n;
  for (double theta : {0.5, kPi / 2, 2.8}) {
    double R = default_outlet_length(theta, n);
    CHECK(R >= 4);
    CHECK(R <= n.R_max + n.h);
    CHECK(std::abs(R / n.h - std::round(R / n.h)) < 1e-9);
  }
  CHECK(default_outlet_length(2.8, n) > default_outlet_length(0.5, n));
}

TEST_CASE("threshold follows the smallest dihedral angle") {
  auto layer = make_layer(build_trihedral({kPi / 2, 1.0, kPi / 2}));
  auto n = coarse(4, 2);
  CHECK(layer.beta_min() == Approx(1.0));
  CHECK(threshold(layer, n).value() == Approx(lambda1_waveguide(1.0, n).value()).epsilon(1e-9));
}

TEST_CASE("theta scan is increasing inside the band") {
  auto scan = scan_theta({0.6, 1.4, 2.2}, coarse(4, 2));
  REQUIRE(scan.records.size() == 3);
  CHECK(scan.strictly_increasing);
  CHECK(scan.inside_band);
  for (const auto& r : scan.records) {
    CHECK(r.levels == 2);
    CHECK(r.eigenvalues.size() == 1);
    CHECK(r.finest[0] >= r.eigenvalues[0]);
  }
  CHECK_THROWS_AS(scan_theta({1.0, 0.5}, coarse()), InvalidInput);
  CHECK_THROWS_AS(scan_theta({}, coarse()), InvalidInput);
  CHECK_THROWS_AS(scan_theta({3.2}, coarse()), InvalidInput);
}

TEST_CASE("truncation scan is monotone") {
  auto n = coarse(0, 2);
  auto s = scan_truncation(kPi / 2, {2, 3, 4}, n);
  REQUIRE(s.records.size() == 3);
  CHECK(s.nondecreasing);
  CHECK(s.below_asymptote);
  CHECK(s.reference_R >= 8);
  for (double g : s.gaps) CHECK(g > 0);
  CHECK(s.gaps[0] > s.gaps[1]);
  CHECK(s.gaps[1] > s.gaps[2]);
  if (s.fit_ok) {
    CHECK(s.exponent > 0);
    CHECK(s.r_squared > 0.9);
  } else {
    CHECK_FALSE(s.notice.empty());
  }
  CHECK_THROWS_AS(scan_truncation(kPi / 2, {2.05}, n), InvalidInput);
  CHECK_THROWS_AS(scan_truncation(kPi / 2, {3, 2}, n), InvalidInput);
  CHECK_THROWS_AS(scan_truncation(kPi / 2, {2, 3}, coarse(0, 1)), InvalidInput);
}

TEST_CASE("one bound state below pi^2 at a right angle") {
  auto n = coarse(0, 3);
  n.pairs = 2;
  auto c = count_below_threshold(kPi / 2, n);
  CHECK(c.count == 1);
  CHECK(c.neumann_count == 1);
  CHECK(c.values.size() == 2);
  CHECK(c.near_threshold == 0);
  CHECK(c.values[1] > kPi2);
  CHECK(std::abs(c.values[0] - c.neumann_values[0]) <= c.errors[0] + c.neumann_errors[0]);
  CHECK(c.conclusive);
}

TEST_CASE("numerics are validated") {
  WaveguideNumerics n;
  n.h = 0.7;
  CHECK_THROWS_AS(lambda1_waveguide(1, n), InvalidInput);
  n = {};
  n.levels = 0;
  CHECK_THROWS_AS(lambda1_waveguide(1, n), InvalidInput);
  n = {};
  n.R = -1;
  CHECK_THROWS_AS(lambda1_waveguide(1, n), InvalidInput);
  CHECK_THROWS_AS(lambda1_waveguide(0, WaveguideNumerics{}), InvalidInput);
  CHECK_THROWS_AS(lambda1_waveguide(kPi, WaveguideNumerics{}), InvalidInput);
  CHECK_THROWS_AS(alpha_star(1e-4, WaveguideNumerics{}), InvalidInput);
}

}  // TEST_SUITE

TEST_SUITE("certify") {

TEST_CASE("Fichera upper bound certificate is self-consistent") {
  auto layer = make_layer(build_regular(3, kPi / 2));
  VoxelNumerics vox;
  vox.R = 4;
  vox.h = 0.25;
  vox.levels = 2;
  auto c = certify_discrete(layer, vox, coarse(0, 2));
  CHECK(c.threshold_angle == Approx(kPi / 2));
  REQUIRE(c.levels.size() == 2);
  CHECK(c.levels[1].upper_bound < c.levels[0].upper_bound);
  CHECK(c.levels[1].volume >= c.levels[0].volume);
  for (const auto& l : c.levels) {
    CHECK(l.residual <= vox.tolerance);
    CHECK(l.orthonormality_defect <= 1e-8);
    CHECK(l.upper_bound > kPi2 / 4);
  }
  CHECK(c.evidence == c.levels[1].upper_bound);
  CHECK(c.margin == Approx(c.threshold - c.evidence));
  CHECK((c.verdict == Verdict::nonempty) == (c.margin > c.combined_error));
  CHECK(std::string(verdict_name(c.verdict)) != "");
}

TEST_CASE("voxel numerics are validated") {
  auto layer = make_layer(build_regular(3, kPi / 2));
  VoxelNumerics vox;
  vox.h = 0.4;
  CHECK_THROWS_AS(certify_discrete(layer, vox, coarse(4, 2)), InvalidInput);
  vox = {};
  vox.R = 2;
  CHECK_THROWS_AS(certify_discrete(layer, vox, coarse(4, 2)), InvalidInput);
}

TEST_CASE("absence experiment needs alpha below the critical angle") {
  VoxelNumerics vox;
  CHECK_THROWS_AS(absence_experiment(0.5, vox, coarse(), 0.52), InvalidInput);
}

TEST_CASE("V^eps terms for a constant function") {
  const double theta = kPi / 2, R = 3;
  WaveguideMode mode;
  mode.mesh = mesh_lshape(lshape_profile(theta, R), 0.1);
  mode.values.assign(mode.mesh.nodes.size(), 1.0);
  const double alpha = kPi / 3, beta = theta, c = 1 / std::tan(alpha / 2);
  auto prof = lshape_profile(theta, R);
  const Vec2 d1 = prof.directions[0];
  const double L = norm(prof.outer_vertex() - prof.inner_vertex());
  for (double eps : {0.0, 0.05, 0.4}) {
    auto t = veps_terms(mode, alpha, beta, eps);
    const double rate = 2 * eps * c;
    CHECK(t.t1 == Approx(eps * mode.mesh.area() / 2).epsilon(1e-12));
    // Midpoint sum of exp(-rate p.d1) over the lower half of the profile.
    const int N = 1500;
    Vec2 lo{1e9, 1e9}, hi{-1e9, -1e9};
    for (const auto& v : prof.vertices)
      for (int k = 0; k < 2; ++k) lo[k] = std::min(lo[k], v[k]), hi[k] = std::max(hi[k], v[k]);
    const double dx = (hi[0] - lo[0]) / N, dy = (hi[1] - lo[1]) / N;
    double half = 0;
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) {
        Vec2 p{lo[0] + (i + 0.5) * dx, lo[1] + (j + 0.5) * dy};
        if (p[1] <= 0 && prof.contains(p, 0)) half += std::exp(-rate * dot(p, d1)) * dx * dy;
      }
    CHECK(t.t2 == Approx(2 * eps * c * c * half).epsilon(2e-3));
    const double cb = std::cos(beta / 2);
    const double line = eps == 0 ? L : (1 - std::exp(-rate * cb * L)) / (rate * cb);
    CHECK(t.t3 == Approx(-2 * c * std::sin(beta / 2) * line).epsilon(1e-10));
  }
}

TEST_CASE("V^eps certificate on a coarse mode") {
  auto layer = make_layer(build_regular(3, kPi / 2));
  VepsNumerics num;
  num.mode = coarse(4, 3);
  num.eps = {0.01, 0.1, 1.0};
  auto c = veps_certificate(layer, num);
  CHECK(c.kind == "veps");
  REQUIRE(c.terms.size() == 3);
  CHECK(c.t3_zero < 0);
  CHECK(c.small_eps_value == Approx(c.t3_zero).epsilon(1e-2));
  CHECK(c.mode_norm == Approx(1).epsilon(1e-9));
  double best = 1e300;
  for (const auto& t : c.terms) best = std::min(best, t.value());
  CHECK(c.evidence == best);
  CHECK((c.verdict == Verdict::nonempty) == (best < -c.quadrature_error));

  CHECK_THROWS_AS(veps_certificate(make_layer(build_trihedral({kPi / 2, 1.0, kPi / 2})), num), InvalidInput);
  num.mode.levels = 2;
  CHECK_THROWS_AS(veps_certificate(layer, num), InvalidInput);
}

TEST_CASE("logarithmic grid") {
  auto g = log_grid(1e-3, 1, 13);
  REQUIRE(g.size() == 13);
  CHECK(g.front() == Approx(1e-3));
  CHECK(g.back() == Approx(1));
  for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] / g[i - 1] == Approx(std::pow(1000.0, 1.0 / 12)));
  CHECK_THROWS_AS(log_grid(0, 1, 3), InvalidInput);
}

}  // TEST_SUITE
