#include "run_config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>

#include "polylayer/errors.hpp"

namespace polylayer::cli {

using nlohmann::json;
using nlohmann::ordered_json;

double parse_angle(const std::string& text) {
  std::string s = text;
  s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }), s.end());
  double scale = 0;
  if (s.size() > 3 && s.ends_with("deg")) scale = kPi / 180;
  else if (s.size() > 3 && s.ends_with("rad")) scale = 1;
  else throw InvalidInput("angle '" + text + "' needs a unit suffix: deg or rad");
  std::string num = s.substr(0, s.size() - 3);
  double v = 0;
  auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), v);
  if (ec != std::errc() || ptr != num.data() + num.size() || !std::isfinite(v))
    throw InvalidInput("malformed angle '" + text + "'");
  return v * scale;
}

std::string format_angle(double radians) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17grad", radians);
  return buf;
}

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> list{"angle",  "waveguide",    "scan-theta", "scan-R", "count",
                                             "layer",  "certify",      "certify-veps", "absence", "hardy",
                                             "weyl",   "alpha-star"};
  return list;
}

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw InvalidInput(message);
}

}  // namespace

void RunConfig::validate() const {
  const auto& subs = subcommands();
  require(std::find(subs.begin(), subs.end(), subcommand) != subs.end(), "unknown subcommand '" + subcommand + "'");
  for (const auto& f : formats)
    require(f == "json" || f == "csv" || f == "svg" || f == "pgm", "unknown output format '" + f + "'");
  require(!formats.empty(), "at least one output format is required");
  waveguide().validate();
  voxel().validate();
  layer();
  require(theta > 0 && theta < kPi, "theta must lie in (0, pi)");
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    require(thetas[i] > 0 && thetas[i] < kPi, "scan angles must lie in (0, pi)");
    require(i == 0 || thetas[i] > thetas[i - 1], "scan angles must be ascending");
  }
  require(!R_list.empty(), "R list is empty");
  for (std::size_t i = 0; i < R_list.size(); ++i)
    require(R_list[i] > 0 && (i == 0 || R_list[i] > R_list[i - 1]), "R list must be positive and ascending");
  for (double e : eps) require(e > 0, "eps values must be positive");
  require(alpha > 0 && alpha < kPi / 2, "alpha must lie in (0, pi/2)");
  require(alpha_star >= 0 && alpha_star < kPi, "alpha_star must lie in [0, pi)");
  require(alpha_tol >= 1e-3, "alpha tolerance must be at least 1e-3");
  require(hardy_case == "exp" || hardy_case == "inv" || hardy_case == "zero" || hardy_case == "random",
          "hardy case must be one of exp, inv, zero, random");
  require(hardy_samples >= 1, "hardy samples must be positive");
  require(hardy_R0 >= 2, "R0 must be at least 2");
  require(weyl_n_min >= 1 && weyl_n_max >= weyl_n_min && weyl_n_max <= 8, "Weyl indices must satisfy 1 <= n_min <= n_max <= 8");
  require(!kappa.empty(), "kappa list is empty");
  for (double k : kappa) require(k >= 0, "kappa must be nonnegative");
  require(weyl_h > 0 && weyl_h <= 0.1, "Weyl grid spacing must lie in (0, 0.1]");
}

WaveguideNumerics RunConfig::waveguide() const {
  WaveguideNumerics w;
  w.h = h;
  w.R = R;
  w.R_max = R_max;
  w.levels = levels;
  w.pairs = m;
  w.tolerance = tolerance;
  w.seed = seed;
  return w;
}

VoxelNumerics RunConfig::voxel() const {
  VoxelNumerics v;
  v.h = voxel_h;
  v.R = voxel_R;
  v.levels = voxel_levels;
  v.tolerance = voxel_tolerance;
  v.seed = seed;
  return v;
}

LayerGeometry RunConfig::layer() const {
  const auto& g = geometry;
  if (g.kind == "fichera") {
    require(g.angles.empty(), "fichera geometry takes no angles");
    return make_layer(build_regular(3, kPi / 2));
  }
  if (g.kind == "regular") {
    require(g.angles.size() == 1, "regular geometry needs exactly one vertex angle");
    return make_layer(build_regular(g.n, g.angles[0]));
  }
  if (g.kind == "trihedral") {
    require(g.angles.size() == 3, "trihedral geometry needs three vertex angles");
    return make_layer(build_trihedral({g.angles[0], g.angles[1], g.angles[2]}));
  }
  throw InvalidInput("geometry kind must be fichera, regular or trihedral");
}

bool RunConfig::wants(const std::string& format) const {
  return std::find(formats.begin(), formats.end(), format) != formats.end();
}

namespace {

ordered_json angle_list(const std::vector<double>& v) {
  ordered_json a = ordered_json::array();
  for (double x : v) a.push_back(format_angle(x));
  return a;
}

std::vector<double> read_angles(const json& j) {
  require(j.is_array(), "expected an array of angles");
  std::vector<double> out;
  for (const auto& x : j) {
    require(x.is_string(), "angles must be strings with a unit suffix");
    out.push_back(parse_angle(x.get<std::string>()));
  }
  return out;
}

template <class T>
T read(const json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw InvalidInput("config key '" + key + "' has the wrong type");
  }
}

double read_angle(const json& j, const std::string& key) {
  require(j.is_string(), "config key '" + key + "' must be an angle string with a unit suffix");
  return parse_angle(j.get<std::string>());
}

}  // namespace

ordered_json to_json(const RunConfig& c) {
  ordered_json j;
  j["subcommand"] = c.subcommand;
  j["geometry"] = {{"kind", c.geometry.kind}, {"n", c.geometry.n}, {"angles", angle_list(c.geometry.angles)}};
  j["h"] = c.h;
  j["R"] = c.R;
  j["R_max"] = c.R_max;
  j["levels"] = c.levels;
  j["m"] = c.m;
  j["tolerance"] = c.tolerance;
  j["seed"] = c.seed;
  j["voxel_h"] = c.voxel_h;
  j["voxel_R"] = c.voxel_R;
  j["voxel_levels"] = c.voxel_levels;
  j["voxel_tolerance"] = c.voxel_tolerance;
  j["theta"] = format_angle(c.theta);
  j["thetas"] = angle_list(c.thetas);
  j["R_list"] = c.R_list;
  j["eps"] = c.eps;
  j["alpha"] = format_angle(c.alpha);
  j["alpha_star"] = format_angle(c.alpha_star);
  j["alpha_tol"] = c.alpha_tol;
  j["hardy_case"] = c.hardy_case;
  j["hardy_samples"] = c.hardy_samples;
  j["hardy_R0"] = c.hardy_R0;
  j["weyl_n_min"] = c.weyl_n_min;
  j["weyl_n_max"] = c.weyl_n_max;
  j["kappa"] = c.kappa;
  j["weyl_h"] = c.weyl_h;
  j["out_dir"] = c.out_dir;
  j["formats"] = c.formats;
  j["dumps"] = c.dumps;
  return j;
}

RunConfig from_json(const json& j, RunConfig c) {
  require(j.is_object(), "config must be a JSON object");
  using Setter = std::function<void(const json&)>;
  const std::map<std::string, Setter> setters{
      {"subcommand", [&](const json& v) { c.subcommand = read<std::string>(v, "subcommand"); }},
      {"geometry",
       [&](const json& v) {
         require(v.is_object(), "config key 'geometry' must be an object");
         for (const auto& [k, x] : v.items()) {
           if (k == "kind") c.geometry.kind = read<std::string>(x, "geometry.kind");
           else if (k == "n") c.geometry.n = read<int>(x, "geometry.n");
           else if (k == "angles") c.geometry.angles = read_angles(x);
           else throw InvalidInput("unknown config key 'geometry." + k + "'");
         }
       }},
      {"h", [&](const json& v) { c.h = read<double>(v, "h"); }},
      {"R", [&](const json& v) { c.R = read<double>(v, "R"); }},
      {"R_max", [&](const json& v) { c.R_max = read<double>(v, "R_max"); }},
      {"levels", [&](const json& v) { c.levels = read<int>(v, "levels"); }},
      {"m", [&](const json& v) { c.m = read<int>(v, "m"); }},
      {"tolerance", [&](const json& v) { c.tolerance = read<double>(v, "tolerance"); }},
      {"seed", [&](const json& v) { c.seed = read<std::uint64_t>(v, "seed"); }},
      {"voxel_h", [&](const json& v) { c.voxel_h = read<double>(v, "voxel_h"); }},
      {"voxel_R", [&](const json& v) { c.voxel_R = read<double>(v, "voxel_R"); }},
      {"voxel_levels", [&](const json& v) { c.voxel_levels = read<int>(v, "voxel_levels"); }},
      {"voxel_tolerance", [&](const json& v) { c.voxel_tolerance = read<double>(v, "voxel_tolerance"); }},
      {"theta", [&](const json& v) { c.theta = read_angle(v, "theta"); }},
      {"thetas", [&](const json& v) { c.thetas = read_angles(v); }},
      {"R_list", [&](const json& v) { c.R_list = read<std::vector<double>>(v, "R_list"); }},
      {"eps", [&](const json& v) { c.eps = read<std::vector<double>>(v, "eps"); }},
      {"alpha", [&](const json& v) { c.alpha = read_angle(v, "alpha"); }},
      {"alpha_star", [&](const json& v) { c.alpha_star = read_angle(v, "alpha_star"); }},
      {"alpha_tol", [&](const json& v) { c.alpha_tol = read<double>(v, "alpha_tol"); }},
      {"hardy_case", [&](const json& v) { c.hardy_case = read<std::string>(v, "hardy_case"); }},
      {"hardy_samples", [&](const json& v) { c.hardy_samples = read<int>(v, "hardy_samples"); }},
      {"hardy_R0", [&](const json& v) { c.hardy_R0 = read<double>(v, "hardy_R0"); }},
      {"weyl_n_min", [&](const json& v) { c.weyl_n_min = read<int>(v, "weyl_n_min"); }},
      {"weyl_n_max", [&](const json& v) { c.weyl_n_max = read<int>(v, "weyl_n_max"); }},
      {"kappa", [&](const json& v) { c.kappa = read<std::vector<double>>(v, "kappa"); }},
      {"weyl_h", [&](const json& v) { c.weyl_h = read<double>(v, "weyl_h"); }},
      {"out_dir", [&](const json& v) { c.out_dir = read<std::string>(v, "out_dir"); }},
      {"formats", [&](const json& v) { c.formats = read<std::vector<std::string>>(v, "formats"); }},
      {"dumps", [&](const json& v) { c.dumps = read<bool>(v, "dumps"); }},
  };
  for (const auto& [key, value] : j.items()) {
    auto it = setters.find(key);
    if (it == setters.end()) throw InvalidInput("unknown config key '" + key + "'");
    it->second(value);
  }
  return c;
}

}  // namespace polylayer::cli
