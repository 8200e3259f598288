#include <cmath>
#include <random>

#include "doctest.h"
#include "polylayer/analysis.hpp"
#include "polylayer/errors.hpp"
#include "polylayer/geometry.hpp"

using namespace polylayer;
using doctest::Approx;

namespace {

// Dihedral angle from the three face angles of a trihedral, law of cosines on the unit sphere.
double dihedral_oracle(double opposite, double a, double b) {
  return std::acos((std::cos(opposite) - std::cos(a) * std::cos(b)) / (std::sin(a) * std::sin(b)));
}

void check_unit_vectors(const PolyhedralAngle& a) {
  for (int j = 0; j < a.faces(); ++j) {
    CHECK(std::abs(norm(a.rays[j]) - 1) < 1e-12);
    CHECK(std::abs(norm(a.normals[j]) - 1) < 1e-12);
  }
}

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("octant angle has right dihedral angles") {
  auto a = build_trihedral({kPi / 2, kPi / 2, kPi / 2});
  check_unit_vectors(a);
  for (double b : a.dihedral_angles) CHECK(b == Approx(kPi / 2).epsilon(1e-12));
}

TEST_CASE("two right vertex angles give a smallest dihedral angle equal to the third") {
  for (double alpha : {0.26, 0.5, 1.0, 1.4}) {
    auto a = build_trihedral({kPi / 2, alpha, kPi / 2});
    double lo = *std::min_element(a.dihedral_angles.begin(), a.dihedral_angles.end());
    CHECK(lo == Approx(alpha).epsilon(1e-12));
  }
}

TEST_CASE("equilateral trihedral matches the spherical oracle") {
  const double expected = std::acos(1.0 / 3);
  auto a = build_trihedral({kPi / 3, kPi / 3, kPi / 3});
  for (double b : a.dihedral_angles) CHECK(b == Approx(expected).epsilon(1e-12));
  auto r = build_regular(3, kPi / 3);
  for (double b : r.dihedral_angles) CHECK(b == Approx(expected).epsilon(1e-12));
}

TEST_CASE("random feasible trihedrals agree with the law of cosines") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> U(0.1, 2.6);
  int built = 0;
  while (built < 100) {
    std::array<double, 3> al{U(gen), U(gen), U(gen)};
    if (al[0] >= al[1] + al[2] || al[1] >= al[0] + al[2] || al[2] >= al[0] + al[1]) continue;
    if (al[0] + al[1] + al[2] >= 2 * kPi - 0.05) continue;
    auto a = build_trihedral(al);
    ++built;
    check_unit_vectors(a);
    // Dihedral j sits at ray j, between faces j-1 and j; the face opposite is j+1.
    for (int j = 0; j < 3; ++j) {
      double oracle = dihedral_oracle(al[(j + 1) % 3], al[(j + 2) % 3], al[j]);
      CHECK(std::abs(a.dihedral_angles[j] - oracle) < 1e-10);
    }
    for (int j = 0; j < 3; ++j)
      CHECK(std::abs(angle_between(a.rays[j], a.rays[(j + 1) % 3]) - al[j]) < 1e-12);
  }
}

TEST_CASE("infeasible trihedrals are rejected") {
  CHECK_THROWS_AS(build_trihedral({0.2, 0.3, 1.0}), InvalidInput);
  CHECK_THROWS_AS(build_trihedral({2.5, 2.5, 2.5}), InvalidInput);
  CHECK_THROWS_AS(build_trihedral({0.0, 1.0, 1.0}), InvalidInput);
}

TEST_CASE("regular angles have equal angles and an exact shift") {
  for (auto [n, alpha] : {std::pair{3, kPi / 2}, {4, kPi / 3}, {5, 0.9}, {6, 0.7}}) {
    auto a = build_regular(n, alpha);
    check_unit_vectors(a);
    for (int j = 0; j < n; ++j) {
      CHECK(a.vertex_angles[j] == Approx(alpha).epsilon(1e-12));
      CHECK(std::abs(a.dihedral_angles[j] - a.dihedral_angles[0]) < 1e-10);
    }
    LayerGeometry layer = make_layer(a);
    CHECK(layer.inscribed_ball_residual() <= 1e-10);
  }
  CHECK_THROWS_AS(build_regular(4, kPi / 2), InvalidInput);
  CHECK_THROWS_AS(build_regular(2, 0.5), InvalidInput);
}

TEST_CASE("fichera layer: shift and membership") {
  LayerGeometry layer = make_layer(build_regular(3, kPi / 2));
  const auto& n = layer.angle().normals;
  for (int k = 0; k < 3; ++k) CHECK(dot(n[k], layer.shift()) == Approx(1).epsilon(1e-12));
  CHECK(norm(layer.shift()) == Approx(std::sqrt(3.0)).epsilon(1e-12));
  // Points given by their distances to the three faces.
  auto at = [&](double a, double b, double c) { return a * n[0] + b * n[1] + c * n[2]; };
  CHECK(layer.contains(at(0.5, 2, 3)));
  CHECK_FALSE(layer.contains(at(2, 2, 2)));
  CHECK_FALSE(layer.contains(at(-0.1, 2, 3)));
  CHECK(layer.beta_min() == Approx(kPi / 2));
}

TEST_CASE("skewed four-sided angle is rejected") {
  auto a = build_regular(4, kPi / 3);
  auto rays = a.rays;
  // Rotate one ray by 0.1 rad about the axis.
  const double c = std::cos(0.1), s = std::sin(0.1);
  Vec3 r = rays[1];
  rays[1] = {c * r[0] - s * r[1], s * r[0] + c * r[1], r[2]};
  auto skew = angle_from_rays(rays);
  CHECK_THROWS_AS(make_layer(skew), InvalidInput);
}

TEST_CASE("trihedral layers are always inscribed") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> U(0.3, 2.0);
  for (int i = 0; i < 50; ++i) {
    std::array<double, 3> al{U(gen), U(gen), U(gen)};
    if (al[0] >= al[1] + al[2] || al[1] >= al[0] + al[2] || al[2] >= al[0] + al[1]) continue;
    LayerGeometry layer = make_layer(build_trihedral(al));
    CHECK(layer.inscribed_ball_residual() <= 1e-10);
    for (const auto& n : layer.angle().normals) CHECK(dot(n, layer.shift()) == Approx(1).epsilon(1e-10));
    double lo = *std::min_element(layer.angle().dihedral_angles.begin(), layer.angle().dihedral_angles.end());
    CHECK(layer.beta_min() == lo);
  }
}

TEST_CASE("membership equals the distance-to-face rule") {
  LayerGeometry layer = make_layer(build_trihedral({1.2, 0.9, 1.4}));
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> U(-1, 4);
  int inside = 0;
  for (int i = 0; i < 10000; ++i) {
    Vec3 x{U(gen), U(gen), U(gen)};
    bool positive = true;
    double dmin = 1e300;
    for (const auto& n : layer.angle().normals) {
      // Distance to the face plane through the apex, signed toward the cone.
      double d = dot(n, x) / norm(n);
      positive = positive && d > 0;
      dmin = std::min(dmin, d);
    }
    bool expected = positive && dmin < 1;
    CHECK(layer.contains(x) == expected);
    inside += expected;
  }
  CHECK(inside > 100);
}

TEST_CASE("dihedral frames are orthonormal and aligned with the edge") {
  LayerGeometry layer = make_layer(build_trihedral({1.0, 1.3, 1.1}));
  for (int e = 0; e < 3; ++e) {
    DihedralFrame f = layer.frame(e);
    CHECK(dot(f.e1, f.e2) == Approx(0).epsilon(1e-12));
    CHECK(dot(f.e1, f.e3) == Approx(0).epsilon(1e-12));
    CHECK(dot(f.e2, f.e3) == Approx(0).epsilon(1e-12));
    CHECK(dot(f.e3, layer.angle().rays[e]) == Approx(1).epsilon(1e-12));
    Vec3 p{0.3, -0.7, 2.0};
    Vec3 back = f.to_global(f.to_local(p));
    for (int k = 0; k < 3; ++k) CHECK(back[k] == Approx(p[k]).epsilon(1e-12));
  }
}

TEST_CASE("partition pieces cover the layer") {
  for (auto angle : {build_regular(3, kPi / 2), build_regular(4, kPi / 3), build_trihedral({1.0, 1.3, 1.1})}) {
    LayerGeometry layer = make_layer(angle);
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> U(-2, 8);
    int samples = 0, multiple = 0;
    while (samples < 20000) {
      Vec3 x{U(gen), U(gen), U(gen)};
      if (!layer.contains(x)) continue;
      ++samples;
      auto pieces = layer.partition_pieces(x, 1e-12);
      CHECK(!pieces.empty());
      multiple += pieces.size() > 1;
    }
    // Overlaps only happen on the cutting planes, which random samples miss.
    CHECK(multiple == 0);
  }
}

TEST_CASE("profile of the bent strip") {
  auto p = lshape_profile(kPi / 2, 4);
  CHECK(p.area() == Approx(9.0).epsilon(1e-12));
  CHECK(norm(p.inner_vertex() - p.outer_vertex()) == Approx(std::sqrt(2.0)).epsilon(1e-12));
  auto q = lshape_profile(2 * kPi / 3, 2);
  CHECK(q.area() == Approx(1 / std::tan(kPi / 3) + 4).epsilon(1e-12));
  CHECK(q.area() == Approx(4.5774).epsilon(1e-4));
  for (double theta : {0.1, 1.0, 2.0, 3.0}) {
    auto r = lshape_profile(theta, 3);
    CHECK(norm(r.inner_vertex() - r.outer_vertex()) == Approx(1 / std::sin(theta / 2)).epsilon(1e-12));
    CHECK(r.area() > 0);
    // Inner sides sit at unit distance from the outer rays.
    CHECK(dot(r.normals[0], r.inner_vertex()) == Approx(1).epsilon(1e-12));
    CHECK(dot(r.normals[1], r.inner_vertex()) == Approx(1).epsilon(1e-12));
    CHECK(dot(r.normals[0], r.vertices[2]) == Approx(1).epsilon(1e-12));
    CHECK(dot(r.normals[1], r.vertices[4]) == Approx(1).epsilon(1e-12));
  }
  CHECK_THROWS_AS(lshape_profile(kPi, 3), InvalidInput);
  CHECK_THROWS_AS(lshape_profile(0, 3), InvalidInput);
  CHECK_THROWS_AS(lshape_profile(1, 0), InvalidInput);
}

TEST_CASE("three-piece split of the thin trihedral layer") {
  const double alpha = 0.4;
  LayerGeometry layer = make_layer(build_trihedral({kPi / 2, alpha, kPi / 2}));
  DihedralFrame f = layer.frame(0);
  // Local points relative to the inner edge; the layer lies at local x, y >= -1 near the edge.
  CHECK(classify_thin_trihedral(layer, f.to_global({0.5, -0.5, 1.0})) == ThinTrihedralRegion::upper);
  const double x1 = 3.0;
  CHECK(classify_thin_trihedral(layer, f.to_global({x1, 0.1 * std::tan(alpha) * x1, -0.5})) == ThinTrihedralRegion::wedge);
  CHECK_THROWS_AS(classify_thin_trihedral(layer, {100, 100, 100}), InvalidInput);
  LayerGeometry fichera = make_layer(build_regular(3, kPi / 3));
  CHECK_THROWS_AS(classify_thin_trihedral(fichera, fichera.shift()), InvalidInput);

  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> U(-2, 10);
  int counts[4] = {0, 0, 0, 0}, samples = 0;
  while (samples < 100000) {
    Vec3 x{U(gen), U(gen), U(gen)};
    if (!layer.contains(x)) continue;
    ++samples;
    counts[static_cast<int>(classify_thin_trihedral(layer, x))]++;
  }
  CHECK(counts[1] + counts[2] + counts[3] == samples);
  CHECK(counts[1] > 0);
  CHECK(counts[2] > 0);
  CHECK(counts[3] > 0);
}

}  // TEST_SUITE
