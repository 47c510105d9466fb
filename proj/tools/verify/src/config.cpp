#include "verify/config.hpp"

#include <cmath>
#include <cstdio>
#include <set>

#include <json.hpp>

#include <cyllevy/error.hpp>
#include <cyllevy/io.hpp>

#include "verify/battery.hpp"

namespace cyllevy::verify {

using nlohmann::json;

namespace {

void only(const json& j, std::string_view what, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw FormatError(std::string(what) + ": expected an object");
  for (const auto& [key, _] : j.items())
    if (!allowed.contains(key)) throw FormatError(std::string(what) + ": unknown field '" + key + "'");
}

template <class T>
T positive(const json& j, const char* key, std::string_view what) {
  const json& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() <= 0)
    throw FormatError(std::string(what) + "." + key + " must be a positive integer");
  return v.get<T>();
}

double finite(const json& j, const char* key, std::string_view what) {
  const json& v = j.at(key);
  if (!v.is_number() || !std::isfinite(v.get<double>()))
    throw FormatError(std::string(what) + "." + key + " must be a finite number");
  return v.get<double>();
}

IntegrandSpec parse_integrand(const json& j) {
  only(j, "integrand", {"kind", "step", "family", "params"});
  if (!j.contains("kind") || !j.at("kind").is_string()) throw FormatError("integrand.kind must be a string");
  IntegrandSpec spec;
  spec.kind = j.at("kind").get<std::string>();
  if (spec.kind == "step") {
    if (!j.contains("step")) throw FormatError("integrand: kind 'step' needs a 'step' object");
    if (j.contains("family") || j.contains("params")) throw FormatError("integrand: step takes no family");
    spec.step = step_function_from_json(j.at("step").dump());
    return spec;
  }
  if (spec.kind != "family") throw FormatError("integrand.kind must be 'step' or 'family'");
  if (!j.contains("family") || !j.at("family").is_string()) throw FormatError("integrand.family must be a string");
  spec.family = j.at("family").get<std::string>();
  const json params = j.contains("params") ? j.at("params") : json::object();
  if (spec.family == "random-step") {
    only(params, "integrand.params", {"intervals", "hs_norm"});
    if (params.contains("intervals")) spec.intervals = positive<int>(params, "intervals", "integrand.params");
  } else if (spec.family == "power") {
    only(params, "integrand.params", {"exponent", "hs_norm", "level"});
    if (params.contains("exponent")) spec.exponent = finite(params, "exponent", "integrand.params");
    if (params.contains("level")) spec.level = positive<int>(params, "level", "integrand.params");
    if (spec.level > 16) throw FormatError("integrand.params.level must be at most 16");
  } else {
    throw FormatError("integrand.family must be 'random-step' or 'power'");
  }
  if (params.contains("hs_norm")) spec.hs_norm = finite(params, "hs_norm", "integrand.params");
  if (spec.hs_norm <= 0.0) throw FormatError("integrand.params.hs_norm must be positive");
  return spec;
}

json integrand_json(const IntegrandSpec& s) {
  if (s.kind == "step") return {{"kind", "step"}, {"step", json::parse(step_function_to_json(*s.step))}};
  json params{{"hs_norm", s.hs_norm}};
  if (s.family == "random-step") params["intervals"] = s.intervals;
  if (s.family == "power") {
    params["exponent"] = s.exponent;
    params["level"] = s.level;
  }
  return {{"kind", "family"}, {"family", s.family}, {"params", params}};
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("config: invalid JSON: ") + e.what());
  }
  only(j, "config", {"seed", "dim", "driver", "integrand", "budgets", "battery", "output", "simulate"});
  ExperimentConfig c;
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) throw FormatError("config.seed must be a non-negative 64-bit integer");
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("driver")) {
    c.driver = driver_from_json(j.at("driver").dump());
    c.dim = c.driver->dim_g();
  }
  if (j.contains("dim")) {
    const int dim = positive<int>(j, "dim", "config");
    if (c.driver && dim != c.dim) throw FormatError("config.dim does not match the driver dimension");
    if (dim > 64) throw FormatError("config.dim must be at most 64");
    c.dim = dim;
  }
  if (j.contains("integrand")) {
    c.integrand = parse_integrand(j.at("integrand"));
    if (c.integrand->step && (c.integrand->step->dim_g() != c.dim || c.integrand->step->dim_h() != c.dim))
      throw FormatError("config.integrand: step function must be dim x dim");
  }
  if (j.contains("budgets")) {
    const json& b = j.at("budgets");
    only(b, "budgets", {"n_mc", "gamma_search", "l_search"});
    if (b.contains("n_mc")) c.budgets.n_mc = positive<std::size_t>(b, "n_mc", "budgets");
    if (b.contains("gamma_search")) c.budgets.gamma_search = positive<int>(b, "gamma_search", "budgets");
    if (b.contains("l_search")) c.budgets.l_search = positive<int>(b, "l_search", "budgets");
    if (c.budgets.n_mc < 100) throw FormatError("budgets.n_mc must be at least 100");
  }
  if (j.contains("battery")) c.battery = positive<std::size_t>(j, "battery", "config");
  if (j.contains("output")) {
    if (!j.at("output").is_string() || j.at("output").get<std::string>().empty())
      throw FormatError("config.output must be a non-empty string");
    c.output = j.at("output").get<std::string>();
  }
  if (j.contains("simulate")) {
    only(j.at("simulate"), "simulate", {"paths"});
    if (j.at("simulate").contains("paths")) c.simulate.paths = positive<std::size_t>(j.at("simulate"), "paths", "simulate");
    if (c.simulate.paths < kMinReplicas) throw FormatError("simulate.paths must be at least 100");
  }
  return c;
}

std::string canonical_json(const ExperimentConfig& c) {
  json j{{"dim", c.dim},
         {"budgets",
          {{"n_mc", c.budgets.n_mc}, {"gamma_search", c.budgets.gamma_search}, {"l_search", c.budgets.l_search}}},
         {"simulate", {{"paths", c.simulate.paths}}}};
  if (c.seed) j["seed"] = *c.seed;
  if (c.driver) j["driver"] = json::parse(driver_to_json(*c.driver));
  if (c.integrand) j["integrand"] = integrand_json(*c.integrand);
  if (c.battery) j["battery"] = *c.battery;
  return j.dump();
}

std::string config_hash(const ExperimentConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical_json(c)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

StepFunction base_integrand(const ExperimentConfig& c, const Stream& rng) {
  Stream local = rng;
  if (!c.integrand) return random_step(local, c.dim, c.dim, 4, 0.5, 1.5);
  const IntegrandSpec& s = *c.integrand;
  if (s.step) return *s.step;
  if (s.family == "random-step") {
    const StepFunction psi = random_step(local, c.dim, c.dim, s.intervals, 1.0, 1.0);
    return s.hs_norm * psi;
  }
  const HSMap phi0 = random_hsmap(local, c.dim, c.dim, s.hs_norm);
  const double e = s.exponent;
  return truncated_step([phi0, e](double t) { return std::pow(t, e) * phi0; }, 1.0, s.level,
                        std::numeric_limits<double>::infinity());
}

}  // namespace cyllevy::verify
