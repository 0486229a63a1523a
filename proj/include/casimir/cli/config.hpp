#pragma once

// Run configuration: a single JSON document. Every failure is reported as a
// ConfigError naming the JSON field path or the parse position.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "casimir/coupling.hpp"
#include "casimir/dispersion.hpp"
#include "casimir/errors.hpp"
#include "casimir/nonlinear.hpp"
#include "casimir/spectral.hpp"
#include "casimir/units.hpp"

namespace casimir::cli {

using Json = nlohmann::json;

struct Numerics {
  double rel_tol = 1e-10;
  std::size_t max_matsubara = 100'000;
  std::size_t max_evaluations = 50'000'000;
  std::uint64_t seed = 0;
  std::size_t delta_nodes = 33;
  double delta_tol = 1e-6;
  std::size_t grid_points = 400;
  DeltaMethod method = DeltaMethod::deterministic;
  std::size_t mc_samples = 1'000'000;
};

struct Outputs {
  std::string directory;  // empty: "output" next to the config file
  bool csv = true;
  bool json = false;
};

/// Susceptibility inputs in natural units: Im chi1 on a grid and,
/// optionally, a tabulated Im chi^(n).
struct SusceptibilityInput {
  std::vector<double> frequencies;
  std::vector<double> im_chi1;
  std::size_t order = 0;
  std::vector<std::vector<double>> axes;
  std::vector<double> samples;
};

struct RunConfig {
  std::filesystem::path source;  // config file path
  LorentzMedium medium;
  std::vector<NonlinearKernel> kernels;
  std::optional<std::filesystem::path> delta_table;
  std::optional<SusceptibilityInput> susceptibility;
  std::vector<double> separations_um;
  std::vector<double> temperatures_K{0.0};
  int polarizations = 2;
  Numerics numerics;
  Outputs outputs;
};

namespace detail {

[[noreturn]] inline void config_fail(const std::string& path, const std::string& msg) {
  throw Error(ErrorKind::config_error, path + ": " + msg);
}

inline const Json& require(const Json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) config_fail(path, "missing required field '" + key + "'");
  return obj.at(key);
}

inline double number(const Json& v, const std::string& path) {
  if (!v.is_number()) config_fail(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) config_fail(path, "must be finite");
  return d;
}

inline double number_or(const Json& obj, const std::string& key, double fallback, const std::string& path) {
  return obj.contains(key) ? number(obj.at(key), path + "." + key) : fallback;
}

inline std::size_t count_or(const Json& obj, const std::string& key, std::size_t fallback, const std::string& path) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) config_fail(path + "." + key, "expected a non-negative integer");
  return v.get<std::size_t>();
}

inline std::vector<double> numbers(const Json& v, const std::string& path) {
  if (!v.is_array()) config_fail(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

inline double frequency_factor(const std::string& unit, const std::string& path) {
  if (unit == "eV") return units::ev_to_natural(1.0);
  if (unit == "rad_per_s") return units::angular_frequency_to_natural(1.0);
  if (unit == "inv_um") return 1.0;
  config_fail(path, "unknown frequency_unit '" + unit + "' (expected eV, rad_per_s or inv_um)");
}

inline LorentzMedium parse_medium(const Json& m, const std::string& path) {
  if (!m.is_object()) config_fail(path, "expected an object");
  const double background = number_or(m, "background", 1.0, path);
  std::string unit = "inv_um";
  if (m.contains("frequency_unit")) {
    if (!m.at("frequency_unit").is_string()) config_fail(path + ".frequency_unit", "expected a string");
    unit = m.at("frequency_unit").get<std::string>();
  }
  const double f = frequency_factor(unit, path + ".frequency_unit");
  std::vector<LorentzOscillator> osc;
  if (m.contains("oscillators")) {
    const auto& arr = m.at("oscillators");
    if (!arr.is_array()) config_fail(path + ".oscillators", "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string p = path + ".oscillators[" + std::to_string(i) + "]";
      const auto& o = arr[i];
      if (!o.is_object()) config_fail(p, "expected an object");
      LorentzOscillator lo;
      if (o.contains("plasma_weight") && o.contains("plasma_frequency"))
        config_fail(p, "give either plasma_weight or plasma_frequency, not both");
      if (o.contains("plasma_frequency")) {
        const double wp = number(o.at("plasma_frequency"), p + ".plasma_frequency") * f;
        lo.plasma_weight = wp * wp;
      } else {
        lo.plasma_weight = number(require(o, "plasma_weight", p), p + ".plasma_weight") * f * f;
      }
      lo.resonance = number_or(o, "resonance", 0.0, p) * f;
      lo.damping = number_or(o, "damping", 0.0, p) * f;
      osc.push_back(lo);
    }
  }
  try {
    return LorentzMedium(std::move(osc), background);
  } catch (const std::invalid_argument& e) {
    config_fail(path, e.what());
  }
}

inline AxisFactor parse_factor(const Json& f, const std::string& path) {
  if (!f.is_object()) config_fail(path, "expected an object");
  if (!f.contains("type") || !f.at("type").is_string()) config_fail(path + ".type", "missing factor type");
  const std::string type = f.at("type").get<std::string>();
  try {
    if (type == "power_exponential")
      return AxisFactor(PowerExponential{number_or(f, "power", 1.0, path), number_or(f, "rate", 1.0, path)});
    if (type == "narrow_lorentzian") {
      const double center = number(require(f, "center", path), path + ".center");
      const double weight = number_or(f, "weight", 1.0, path);
      const double width = number_or(f, "width", 1e-3 * center, path);
      if (!(center > 0.0) || !(weight >= 0.0) || !(width > 0.0))
        config_fail(path, "need center > 0, weight >= 0, width > 0");
      return AxisFactor(narrow_coupling(center, weight, width));
    }
    if (type == "grid") {
      auto w = numbers(require(f, "frequencies", path), path + ".frequencies");
      auto v = numbers(require(f, "values", path), path + ".values");
      return AxisFactor(SpectralFunction(std::move(w), std::move(v)));
    }
  } catch (const std::invalid_argument& e) {
    config_fail(path, e.what());
  }
  config_fail(path + ".type", "unknown factor type '" + type + "' (expected power_exponential, narrow_lorentzian or grid)");
}

inline NonlinearKernel parse_kernel(const Json& k, const std::string& path) {
  if (!k.is_object()) config_fail(path, "expected an object");
  const std::size_t order = count_or(k, "order", 0, path);
  if (order < 2) config_fail(path + ".order", "order must be an integer >= 2");
  std::string type = "separable";
  if (k.contains("type")) {
    if (!k.at("type").is_string()) config_fail(path + ".type", "expected a string");
    type = k.at("type").get<std::string>();
  }
  const bool symmetric = k.contains("symmetric") && k.at("symmetric").is_boolean() && k.at("symmetric").get<bool>();
  if (type == "none") return NonlinearKernel::zero(order);
  if (type == "separable") {
    const auto& fs = require(k, "factors", path);
    if (!fs.is_array()) config_fail(path + ".factors", "expected an array");
    std::vector<AxisFactor> factors;
    if (fs.size() == 1) {
      for (std::size_t i = 0; i < order; ++i) factors.push_back(parse_factor(fs[0], path + ".factors[0]"));
    } else {
      if (fs.size() != order) config_fail(path + ".factors", "need one factor or one per order");
      for (std::size_t i = 0; i < fs.size(); ++i)
        factors.push_back(parse_factor(fs[i], path + ".factors[" + std::to_string(i) + "]"));
    }
    return NonlinearKernel::separable(std::move(factors), number_or(k, "gain", 1.0, path), symmetric);
  }
  if (type == "tabulated") {
    const auto& ax = require(k, "axes", path);
    if (!ax.is_array() || ax.size() != order) config_fail(path + ".axes", "need one axis grid per order");
    std::vector<std::vector<double>> axes;
    for (std::size_t i = 0; i < ax.size(); ++i) axes.push_back(numbers(ax[i], path + ".axes[" + std::to_string(i) + "]"));
    auto samples = numbers(require(k, "samples", path), path + ".samples");
    try {
      return NonlinearKernel::tabulated(std::move(axes), std::move(samples), symmetric);
    } catch (const std::invalid_argument& e) {
      config_fail(path, e.what());
    }
  }
  config_fail(path + ".type", "unknown kernel type '" + type + "' (expected separable, tabulated or none)");
}

inline std::string position(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace detail

/// Parses a configuration document. Relative paths inside it resolve
/// against `base_dir`.
inline RunConfig parse_config(const std::string& text, const std::filesystem::path& source = "config.json") {
  using namespace detail;
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::config_error, source.string() + ": malformed JSON at " + position(text, e.byte > 0 ? e.byte - 1 : 0) + ": " +
                                             e.what());
  }
  if (!doc.is_object()) config_fail("$", "top level must be an object");
  const std::filesystem::path base_dir = source.has_parent_path() ? source.parent_path() : std::filesystem::path(".");
  RunConfig cfg;
  cfg.source = source;

  if (doc.contains("medium")) cfg.medium = parse_medium(doc.at("medium"), "medium");

  if (doc.contains("nonlinear")) {
    const auto& nl = doc.at("nonlinear");
    if (!nl.is_object()) config_fail("nonlinear", "expected an object");
    if (nl.contains("kernels")) {
      const auto& ks = nl.at("kernels");
      if (!ks.is_array()) config_fail("nonlinear.kernels", "expected an array");
      for (std::size_t i = 0; i < ks.size(); ++i)
        cfg.kernels.push_back(parse_kernel(ks[i], "nonlinear.kernels[" + std::to_string(i) + "]"));
    }
    if (nl.contains("delta_table")) {
      if (!nl.at("delta_table").is_string()) config_fail("nonlinear.delta_table", "expected a path string");
      std::filesystem::path p = nl.at("delta_table").get<std::string>();
      if (p.is_relative()) p = base_dir / p;
      if (!std::filesystem::exists(p)) config_fail("nonlinear.delta_table", "file '" + p.string() + "' does not exist");
      cfg.delta_table = p;
    }
    if (!cfg.kernels.empty() && cfg.delta_table)
      config_fail("nonlinear", "give either kernels or delta_table, not both");
  }

  if (doc.contains("susceptibility")) {
    const auto& s = doc.at("susceptibility");
    SusceptibilityInput in;
    in.frequencies = numbers(require(s, "frequencies", "susceptibility"), "susceptibility.frequencies");
    in.im_chi1 = numbers(require(s, "im_chi1", "susceptibility"), "susceptibility.im_chi1");
    if (in.frequencies.size() != in.im_chi1.size())
      config_fail("susceptibility.im_chi1", "length must match susceptibility.frequencies");
    try {
      SpectralFunction(in.frequencies, in.im_chi1);
    } catch (const std::invalid_argument& e) {
      config_fail("susceptibility", e.what());
    }
    if (s.contains("im_chi_n")) {
      const auto& n = s.at("im_chi_n");
      const std::string p = "susceptibility.im_chi_n";
      in.order = count_or(n, "order", 0, p);
      if (in.order < 2) config_fail(p + ".order", "order must be an integer >= 2");
      const auto& ax = require(n, "axes", p);
      if (!ax.is_array() || ax.size() != in.order) config_fail(p + ".axes", "need one axis grid per order");
      for (std::size_t i = 0; i < ax.size(); ++i) in.axes.push_back(numbers(ax[i], p + ".axes[" + std::to_string(i) + "]"));
      in.samples = numbers(require(n, "samples", p), p + ".samples");
      try {
        NonlinearKernel::tabulated(in.axes, in.samples);
      } catch (const std::invalid_argument& e) {
        config_fail(p, e.what());
      }
    }
    cfg.susceptibility = std::move(in);
  }

  if (doc.contains("geometry")) {
    const auto& g = doc.at("geometry");
    cfg.separations_um = numbers(require(g, "separations_um", "geometry"), "geometry.separations_um");
  }
  for (std::size_t i = 0; i < cfg.separations_um.size(); ++i) {
    if (!(cfg.separations_um[i] > 0.0))
      config_fail("geometry.separations_um[" + std::to_string(i) + "]", "separations must be > 0");
  }

  if (doc.contains("temperatures_K")) {
    cfg.temperatures_K = numbers(doc.at("temperatures_K"), "temperatures_K");
    if (cfg.temperatures_K.empty()) config_fail("temperatures_K", "need at least one temperature");
    for (std::size_t i = 0; i < cfg.temperatures_K.size(); ++i)
      if (!(cfg.temperatures_K[i] >= 0.0))
        config_fail("temperatures_K[" + std::to_string(i) + "]", "temperatures must be >= 0");
  }

  if (doc.contains("polarizations")) {
    const auto& p = doc.at("polarizations");
    if (!p.is_number_integer() || (p.get<int>() != 1 && p.get<int>() != 2))
      config_fail("polarizations", "must be 1 or 2");
    cfg.polarizations = p.get<int>();
  }

  if (doc.contains("numerics")) {
    const auto& n = doc.at("numerics");
    if (!n.is_object()) config_fail("numerics", "expected an object");
    auto& num = cfg.numerics;
    num.rel_tol = number_or(n, "rel_tol", num.rel_tol, "numerics");
    num.max_matsubara = count_or(n, "max_matsubara", num.max_matsubara, "numerics");
    num.max_evaluations = count_or(n, "max_evaluations", num.max_evaluations, "numerics");
    if (n.contains("seed")) {
      if (!n.at("seed").is_number_unsigned()) config_fail("numerics.seed", "expected an unsigned integer");
      num.seed = n.at("seed").get<std::uint64_t>();
    }
    num.delta_nodes = count_or(n, "delta_nodes", num.delta_nodes, "numerics");
    num.delta_tol = number_or(n, "delta_tol", num.delta_tol, "numerics");
    num.grid_points = count_or(n, "grid_points", num.grid_points, "numerics");
    num.mc_samples = count_or(n, "mc_samples", num.mc_samples, "numerics");
    if (n.contains("method")) {
      const auto m = n.at("method").is_string() ? n.at("method").get<std::string>() : "";
      if (m == "deterministic") {
        num.method = DeltaMethod::deterministic;
      } else if (m == "montecarlo") {
        num.method = DeltaMethod::montecarlo;
      } else {
        config_fail("numerics.method", "expected 'deterministic' or 'montecarlo'");
      }
    }
    if (!(num.rel_tol > 0.0)) config_fail("numerics.rel_tol", "must be > 0");
    if (!(num.delta_tol > 0.0)) config_fail("numerics.delta_tol", "must be > 0");
    if (num.max_matsubara == 0) config_fail("numerics.max_matsubara", "must be > 0");
    if (num.max_evaluations == 0) config_fail("numerics.max_evaluations", "must be > 0");
    if (num.delta_nodes < 3) config_fail("numerics.delta_nodes", "must be >= 3");
    if (num.grid_points < 2) config_fail("numerics.grid_points", "must be >= 2");
  }

  if (doc.contains("outputs")) {
    const auto& o = doc.at("outputs");
    if (!o.is_object()) config_fail("outputs", "expected an object");
    if (o.contains("directory")) {
      if (!o.at("directory").is_string()) config_fail("outputs.directory", "expected a string");
      std::filesystem::path p = o.at("directory").get<std::string>();
      if (p.is_relative()) p = base_dir / p;
      cfg.outputs.directory = p.string();
    }
    if (o.contains("csv")) cfg.outputs.csv = o.at("csv").is_boolean() ? o.at("csv").get<bool>() : true;
    if (o.contains("json")) cfg.outputs.json = o.at("json").is_boolean() && o.at("json").get<bool>();
  }
  if (cfg.outputs.directory.empty()) cfg.outputs.directory = (base_dir / "output").string();
  return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::config_error, "cannot open config file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

}  // namespace casimir::cli
