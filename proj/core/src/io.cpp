#include "cyllevy/io.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <istream>
#include <ostream>
#include <set>

#include <json.hpp>

#include "cyllevy/error.hpp"

namespace cyllevy {

using nlohmann::json;

namespace {

void require_object(const json& j, std::string_view what, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw FormatError(std::string(what) + ": expected an object");
  for (const auto& [key, _] : j.items())
    if (!allowed.contains(key)) throw FormatError(std::string(what) + ": unknown field '" + key + "'");
}

const json& field(const json& j, const char* name, std::string_view what) {
  if (!j.contains(name)) throw FormatError(std::string(what) + ": missing field '" + name + "'");
  return j.at(name);
}

double number(const json& j, std::string_view what) {
  if (!j.is_number()) throw FormatError(std::string(what) + ": expected a number");
  return j.get<double>();
}

int integer(const json& j, std::string_view what) {
  if (!j.is_number_integer()) throw FormatError(std::string(what) + ": expected an integer");
  return j.get<int>();
}

Vector vector_of(const json& j, std::string_view what) {
  if (!j.is_array()) throw FormatError(std::string(what) + ": expected an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = number(j[i], what);
  return v;
}

std::vector<double> doubles_of(const json& j, std::string_view what) {
  const Vector v = vector_of(j, what);
  return {v.data(), v.data() + v.size()};
}

json to_array(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json row_major(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index k = 0; k < m.cols(); ++k) out.push_back(m(i, k));
  return out;
}

Matrix from_row_major(const json& j, int rows, int cols, std::string_view what) {
  const Vector flat = vector_of(j, what);
  if (flat.size() != static_cast<Eigen::Index>(rows) * cols)
    throw FormatError(std::string(what) + ": expected " + std::to_string(rows * cols) + " entries");
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int k = 0; k < cols; ++k) m(i, k) = flat[static_cast<Eigen::Index>(i) * cols + k];
  return m;
}

json levy_json(const LevyMeasureRep& levy) {
  return std::visit(
      [](const auto& rep) -> json {
        using T = std::decay_t<decltype(rep)>;
        if constexpr (std::is_same_v<T, ZeroLevy>) {
          return {{"variant", "zero"}, {"payload", json::object()}};
        } else if constexpr (std::is_same_v<T, AtomicLevy>) {
          json atoms = json::array();
          for (const Vector& h : rep.atoms) atoms.push_back(to_array(h));
          return {{"variant", "atomic"}, {"payload", {{"atoms", atoms}, {"rates", rep.rates}}}};
        } else if constexpr (std::is_same_v<T, DiagonalStableLevy>) {
          return {{"variant", "diagonal_stable"}, {"payload", {{"alphas", rep.alphas}, {"scales", rep.scales}}}};
        } else {
          return {{"variant", "canonical_stable"}, {"payload", {{"alpha", rep.alpha}}}};
        }
      },
      levy);
}

LevyMeasureRep levy_from(const json& j) {
  require_object(j, "levy", {"variant", "payload"});
  const json& variant = field(j, "variant", "levy");
  if (!variant.is_string()) throw FormatError("levy: variant must be a string");
  const std::string name = variant.get<std::string>();
  const json payload = j.contains("payload") ? j.at("payload") : json::object();
  if (name == "zero") {
    require_object(payload, "zero payload", {});
    return ZeroLevy{};
  }
  if (name == "atomic") {
    require_object(payload, "atomic payload", {"atoms", "rates"});
    const json& atoms = field(payload, "atoms", "atomic payload");
    if (!atoms.is_array()) throw FormatError("atomic payload: atoms must be an array");
    AtomicLevy out;
    for (const json& h : atoms) out.atoms.push_back(vector_of(h, "atom"));
    out.rates = doubles_of(field(payload, "rates", "atomic payload"), "rates");
    return out;
  }
  if (name == "diagonal_stable") {
    require_object(payload, "diagonal_stable payload", {"alphas", "scales"});
    return DiagonalStableLevy{doubles_of(field(payload, "alphas", "diagonal_stable payload"), "alphas"),
                              doubles_of(field(payload, "scales", "diagonal_stable payload"), "scales")};
  }
  if (name == "canonical_stable") {
    require_object(payload, "canonical_stable payload", {"alpha"});
    return CanonicalStableLevy{number(field(payload, "alpha", "canonical_stable payload"), "alpha")};
  }
  throw FormatError("levy: unknown variant '" + name + "'");
}

json chars_json(const CylCharacteristics& chars) {
  return {{"dim_g", chars.dim_g()},
          {"a", to_array(chars.a().coords())},
          {"q", row_major(chars.q())},
          {"levy", levy_json(chars.levy())}};
}

CylCharacteristics chars_from(const json& j, const std::set<std::string>& extra) {
  std::set<std::string> allowed{"dim_g", "a", "q", "levy"};
  allowed.insert(extra.begin(), extra.end());
  require_object(j, "characteristics", allowed);
  const int d = integer(field(j, "dim_g", "characteristics"), "dim_g");
  if (d < 1) throw FormatError("characteristics: dim_g must be positive");
  const Vector a = j.contains("a") ? vector_of(j.at("a"), "a") : Vector::Zero(d);
  if (a.size() != d) throw FormatError("characteristics: a has the wrong length");
  const Matrix q = j.contains("q") ? from_row_major(j.at("q"), d, d, "q") : Matrix::Zero(d, d);
  const LevyMeasureRep levy = j.contains("levy") ? levy_from(j.at("levy")) : LevyMeasureRep{ZeroLevy{}};
  try {
    return CylCharacteristics(HVec(a, Space::kG), q, levy);
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("characteristics: ") + e.what());
  }
}

json driver_json(const Driver& driver) {
  if (driver.kind() == DriverKind::kSum) {
    json parts = json::array();
    for (std::size_t i = 0; i < driver.component_count(); ++i) parts.push_back(driver_json(Driver(driver.component(i))));
    return {{"kind", "sum"}, {"components", parts}};
  }
  json j = chars_json(driver.chars());
  j["kind"] = std::string(to_string(driver.kind()));
  return j;
}

Driver driver_from(const json& j) {
  if (!j.is_object()) throw FormatError("driver: expected an object");
  const json& kind_field = field(j, "kind", "driver");
  if (!kind_field.is_string()) throw FormatError("driver: kind must be a string");
  const DriverKind kind = driver_kind_from_string(kind_field.get<std::string>());
  if (kind == DriverKind::kSum) {
    require_object(j, "sum driver", {"kind", "components"});
    const json& parts = field(j, "components", "sum driver");
    if (!parts.is_array() || parts.empty()) throw FormatError("sum driver: components must be a non-empty array");
    std::vector<Driver> drivers;
    for (const json& p : parts) drivers.push_back(driver_from(p));
    try {
      return Driver::sum(drivers);
    } catch (const std::invalid_argument& e) {
      throw FormatError(std::string("sum driver: ") + e.what());
    }
  }
  CylCharacteristics chars = chars_from(j, {"kind"});
  if (kind_of(chars) != kind)
    throw FormatError("driver: kind '" + kind_field.get<std::string>() + "' does not match the Levy measure");
  return Driver(std::move(chars));
}

json parse(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("invalid JSON: ") + e.what());
  }
}

void put_u64(std::ostream& out, std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFFU);
  out.write(bytes, 8);
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char bytes[8];
  in.read(reinterpret_cast<char*>(bytes), 8);
  if (in.gcount() != 8) throw FormatError("law file: truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return v;
}

}  // namespace

std::string chars_to_json(const CylCharacteristics& chars) { return chars_json(chars).dump(); }
CylCharacteristics chars_from_json(std::string_view text) { return chars_from(parse(text), {}); }

std::string driver_to_json(const Driver& driver) { return driver_json(driver).dump(); }
Driver driver_from_json(std::string_view text) { return driver_from(parse(text)); }

std::string step_function_to_json(const StepFunction& psi) {
  json values = json::array();
  for (const HSMap& v : psi.values()) values.push_back(row_major(v.matrix()));
  const json j{{"points", psi.partition().points()}, {"dim_h", psi.dim_h()}, {"dim_g", psi.dim_g()}, {"values", values}};
  return j.dump();
}

StepFunction step_function_from_json(std::string_view text) {
  const json j = parse(text);
  require_object(j, "step function", {"points", "dim_h", "dim_g", "values"});
  const int dh = integer(field(j, "dim_h", "step function"), "dim_h");
  const int dg = integer(field(j, "dim_g", "step function"), "dim_g");
  if (dh < 1 || dg < 1) throw FormatError("step function: dimensions must be positive");
  const json& values = field(j, "values", "step function");
  if (!values.is_array()) throw FormatError("step function: values must be an array");
  std::vector<HSMap> maps;
  for (const json& v : values) maps.emplace_back(from_row_major(v, dh, dg, "step value"));
  try {
    return StepFunction(Partition(doubles_of(field(j, "points", "step function"), "points")), std::move(maps));
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("step function: ") + e.what());
  }
}

std::string format_double(double x) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  (void)ec;
  return {buf, end};
}

void write_path_csv(std::ostream& out, const PathTable& path) {
  out << "t";
  for (Eigen::Index k = 0; k < path.increments.rows(); ++k) out << ",dx_" << k;
  out << ",jumps\n";
  for (std::size_t i = 0; i < path.partition.intervals(); ++i) {
    out << format_double(path.partition.points()[i + 1]);
    for (Eigen::Index k = 0; k < path.increments.rows(); ++k)
      out << ',' << format_double(path.increments(k, static_cast<Eigen::Index>(i)));
    out << ',' << (i < path.jump_counts.size() ? path.jump_counts[i] : 0) << '\n';
  }
}

void write_modular_csv_header(std::ostream& out) { out << "label,m_prime,m_double_prime,total,std_error,l_gap\n"; }

void write_modular_csv_row(std::ostream& out, std::string_view label, const ModularValue& m) {
  out << label << ',' << format_double(m.m_prime) << ',' << format_double(m.m_double_prime) << ','
      << format_double(m.total) << ',' << format_double(m.std_error) << ',' << format_double(m.l_gap) << '\n';
}

void write_law(std::ostream& out, const EmpiricalLaw& law) {
  put_u64(out, static_cast<std::uint64_t>(law.dim()));
  put_u64(out, law.count());
  const Matrix& s = law.samples();
  for (Eigen::Index c = 0; c < s.cols(); ++c)
    for (Eigen::Index r = 0; r < s.rows(); ++r) put_u64(out, std::bit_cast<std::uint64_t>(s(r, c)));
}

EmpiricalLaw read_law(std::istream& in) {
  const std::uint64_t dim = get_u64(in);
  const std::uint64_t count = get_u64(in);
  if (dim == 0 || dim > (1U << 20) || count > (std::uint64_t{1} << 32)) throw FormatError("law file: bad header");
  Matrix s(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(count));
  for (Eigen::Index c = 0; c < s.cols(); ++c)
    for (Eigen::Index r = 0; r < s.rows(); ++r) s(r, c) = std::bit_cast<double>(get_u64(in));
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("law file: trailing bytes");
  return EmpiricalLaw(std::move(s), 0);
}

}  // namespace cyllevy
