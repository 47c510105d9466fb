#pragma once

#include <string>
#include <vector>

#include <cyllevy/error.hpp>
#include <cyllevy/io.hpp>

#include "verify/battery.hpp"
#include "verify/config.hpp"
#include "verify/report.hpp"

namespace cyllevy::verify::detail {

inline std::size_t battery_size(const ExperimentConfig& c, std::size_t fallback) { return c.battery.value_or(fallback); }

inline std::string num(double x) { return format_double(x); }

/// The configured driver under the name "config", or the given defaults.
inline std::vector<NamedDriver> drivers_or(const ExperimentConfig& c, std::vector<NamedDriver> defaults) {
  if (c.driver) return {{"config", *c.driver}};
  return defaults;
}

/// The configured driver when it has the required kind, else `fallback`.
inline Driver require_kind(const ExperimentConfig& c, DriverKind kind, const Driver& fallback, std::string_view check) {
  if (!c.driver) return fallback;
  if (c.driver->kind() != kind)
    throw FormatError(std::string(check) + " needs a " + std::string(to_string(kind)) + " driver");
  return *c.driver;
}

inline Vector unit(int d, int k) {
  Vector e = Vector::Zero(d);
  e[k] = 1.0;
  return e;
}

}  // namespace cyllevy::verify::detail
