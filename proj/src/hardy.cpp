#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "polylayer/analysis.hpp"
#include "polylayer/errors.hpp"

namespace polylayer {

namespace {

// v restricted to [lo, hi] is a + b z on each piece.
struct Piece {
  double z0, z1, a, b;
};

std::vector<Piece> pieces(const HardySample& s) {
  std::vector<Piece> out;
  for (std::size_t i = 0; i + 1 < s.z.size(); ++i) {
    double dz = s.z[i + 1] - s.z[i];
    double b = (s.v[i + 1] - s.v[i]) / dz;
    out.push_back({s.z[i], s.z[i + 1], s.v[i] - b * s.z[i], b});
  }
  return out;
}

template <class F>
double over(const std::vector<Piece>& ps, double lo, double hi, F integral) {
  double sum = 0;
  for (const auto& p : ps) {
    double z0 = std::max(p.z0, lo), z1 = std::min(p.z1, hi);
    if (z1 > z0) sum += integral(p, z0, z1);
  }
  return sum;
}

double int_v2(const Piece& p, double z0, double z1) {
  double u0 = p.a + p.b * z0, u1 = p.a + p.b * z1;
  return (z1 - z0) * (u0 * u0 + u0 * u1 + u1 * u1) / 3;
}

double int_dv2(const Piece& p, double z0, double z1) { return p.b * p.b * (z1 - z0); }

// Integral of (a + b z)^2 / z^2.
double int_v2_over_z2(const Piece& p, double z0, double z1) {
  double d = z1 - z0;
  return p.a * p.a * d / (z0 * z1) + 2 * p.a * p.b * std::log1p(d / z0) + p.b * p.b * d;
}

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

void HardySample::validate() const {
  if (z.size() < 2 || z.size() != v.size()) throw InvalidInput("Hardy sample needs matching breakpoints and values");
  if (std::abs(z.front() - 1) > 1e-14) throw InvalidInput("Hardy sample must start at z = 1");
  for (std::size_t i = 1; i < z.size(); ++i)
    if (!(z[i] > z[i - 1])) throw InvalidInput("Hardy breakpoints must be ascending");
  if (z.back() < 10) throw InvalidInput("Hardy sample must extend to z >= 10");
  if (v.back() != 0) throw InvalidInput("Hardy sample must decay to zero at its last breakpoint");
  if (!(R0 >= 2)) throw InvalidInput("R0 must be at least 2");
}

HardyReport hardy_check(const HardySample& s) {
  s.validate();
  auto ps = pieces(s);
  HardyReport r;
  r.dv_tail = over(ps, 2, kInf, int_dv2);
  r.dv_12 = over(ps, 1, 2, int_dv2);
  r.v_12 = over(ps, 1, 2, int_v2);
  r.dv_all = over(ps, 1, kInf, int_dv2);
  r.v_1R0 = over(ps, 1, s.R0, int_v2);
  r.lemma_lhs = over(ps, 2, kInf, int_v2_over_z2);
  r.lemma_rhs = 4 * r.dv_tail + 2 * r.dv_12 + 2 * r.v_12;
  r.corollary_lhs = over(ps, s.R0, kInf, int_v2_over_z2);
  r.corollary_rhs = 4 * r.dv_all + 2 * r.v_1R0;
  const double slack = 1e-12;
  r.lemma_holds = r.lemma_lhs <= r.lemma_rhs * (1 + slack) + slack;
  r.corollary_holds = r.corollary_lhs <= r.corollary_rhs * (1 + slack) + slack;
  return r;
}

HardySample sample_function(double (*f)(double), double zmax, int count, double R0) {
  if (!(zmax >= 10) || count < 1) throw InvalidInput("sample needs zmax >= 10 and at least one piece");
  HardySample s;
  s.R0 = R0;
  for (int i = 0; i <= count; ++i) {
    double z = i == count ? zmax : std::pow(zmax, static_cast<double>(i) / count);
    s.z.push_back(z);
    s.v.push_back(f(z));
  }
  // One long closing piece keeps the cut to zero cheap in the derivative norm.
  s.z.push_back(2 * zmax);
  s.v.push_back(0.0);
  return s;
}

HardySample random_hardy_sample(std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  HardySample s;
  const int n = 3 + static_cast<int>(U(gen) * 40);
  const double zmax = 10 + 40 * U(gen);
  const double decay = 0.05 + 2 * U(gen);
  std::vector<double> z{1.0, zmax};
  for (int i = 0; i < n; ++i) z.push_back(1 + (zmax - 1) * U(gen));
  std::sort(z.begin(), z.end());
  z.erase(std::unique(z.begin(), z.end(), [](double a, double b) { return b - a < 1e-9; }), z.end());
  z.back() = zmax;
  for (std::size_t i = 0; i < z.size(); ++i) {
    double amp = 2 * U(gen) - 0.5;
    s.z.push_back(z[i]);
    s.v.push_back(i + 1 == z.size() ? 0.0 : amp * std::exp(-decay * (z[i] - 1)));
  }
  s.R0 = 2 + (zmax / 2 - 2) * U(gen);
  return s;
}

}  // namespace polylayer
