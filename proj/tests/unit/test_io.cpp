#include <charconv>
#include <cstring>
#include <sstream>

#include <gtest/gtest.h>

#include <cyllevy/error.hpp>
#include <cyllevy/io.hpp>

namespace cyllevy {
namespace {

CylCharacteristics atomic_chars() {
  Vector a(2);
  a << 0.1, -0.25;
  Matrix q(2, 2);
  q << 1.0, 0.3, 0.3, 2.0;
  Vector h1(2), h2(2);
  h1 << 1.5, 0.0;
  h2 << -0.3, 0.6;
  return CylCharacteristics(HVec(a, Space::kG), q, AtomicLevy{{h1, h2}, {0.8, 1.2}});
}

TEST(CharsJson, AtomicRoundTripIsExact) {
  const CylCharacteristics c = atomic_chars();
  const CylCharacteristics back = chars_from_json(chars_to_json(c));
  EXPECT_EQ(back.a().coords(), c.a().coords());
  EXPECT_EQ(back.q(), c.q());
  const auto& atomic = std::get<AtomicLevy>(back.levy());
  ASSERT_EQ(atomic.atoms.size(), 2U);
  EXPECT_EQ(atomic.atoms[1], std::get<AtomicLevy>(c.levy()).atoms[1]);
  EXPECT_EQ(atomic.rates, (std::vector<double>{0.8, 1.2}));
  EXPECT_EQ(chars_to_json(back), chars_to_json(c));
}

TEST(CharsJson, OtherVariantsRoundTrip) {
  for (const CylCharacteristics& c :
       {CylCharacteristics::zero(3), CylCharacteristics::canonical_stable(2, 1.3),
        CylCharacteristics(HVec(Vector::Zero(2), Space::kG), Matrix::Zero(2, 2),
                           DiagonalStableLevy{{1.2, 1.7}, {1.0, 0.5}})}) {
    const std::string text = chars_to_json(c);
    EXPECT_EQ(chars_to_json(chars_from_json(text)), text);
  }
}

TEST(CharsJson, MissingDriftAndCovarianceDefaultToZero) {
  const auto c = chars_from_json(R"({"dim_g": 2, "levy": {"variant": "canonical_stable", "payload": {"alpha": 1.5}}})");
  EXPECT_EQ(c.a().coords(), Vector::Zero(2));
  EXPECT_EQ(c.q(), Matrix::Zero(2, 2));
  EXPECT_DOUBLE_EQ(std::get<CanonicalStableLevy>(c.levy()).alpha, 1.5);
}

TEST(CharsJson, RejectsMalformedDocuments) {
  const char* bad[] = {
      "{",
      "[]",
      R"({"dim_g": 2, "extra": 1})",
      R"({"a": [0, 0]})",
      R"({"dim_g": 2, "a": [0]})",
      R"({"dim_g": 2, "q": [1, 0, 0]})",
      R"({"dim_g": 2, "q": [1, 0, 0, -1]})",
      R"({"dim_g": 2, "levy": {"variant": "gamma"}})",
      R"({"dim_g": 2, "levy": {"variant": "canonical_stable", "payload": {"alpha": 2.5}}})",
      R"({"dim_g": 2, "levy": {"variant": "atomic", "payload": {"atoms": [[1, 0]], "rates": [1], "x": 0}}})",
      R"({"dim_g": 2, "levy": {"variant": "atomic", "payload": {"atoms": [[1, 0, 0]], "rates": [1]}}})",
      R"({"dim_g": "2"})",
  };
  for (const char* text : bad) EXPECT_THROW(chars_from_json(text), FormatError) << text;
}

TEST(DriverJson, SingleAndSumRoundTrip) {
  const Driver single(atomic_chars());
  const std::string text = driver_to_json(single);
  EXPECT_NE(text.find("\"kind\":\"compound-poisson\""), std::string::npos);
  EXPECT_EQ(driver_to_json(driver_from_json(text)), text);

  const Driver sum = Driver::sum({single, Driver(CylCharacteristics::canonical_stable(2, 1.4))});
  const Driver back = driver_from_json(driver_to_json(sum));
  EXPECT_EQ(back.kind(), DriverKind::kSum);
  EXPECT_EQ(back.component_count(), 2U);
  EXPECT_EQ(driver_to_json(back), driver_to_json(sum));
}

TEST(DriverJson, KindMustMatchLevyMeasure) {
  std::string text = driver_to_json(Driver(atomic_chars()));
  text.replace(text.find("compound-poisson"), std::strlen("compound-poisson"), "gaussian");
  EXPECT_THROW(driver_from_json(text), FormatError);
  EXPECT_THROW(driver_from_json(R"({"dim_g": 1})"), FormatError);
  EXPECT_THROW(driver_from_json(R"({"kind": "sum", "components": []})"), FormatError);
  EXPECT_THROW(driver_from_json(R"({"kind": "levy-flight", "dim_g": 1})"), FormatError);
}

TEST(StepFunctionJson, RoundTripIsExact) {
  Matrix m0(2, 3), m1(2, 3), m2(2, 3);
  m0 << 1, 2, 3, 4, 5, 6;
  m1 << 0.1, 0.2, 0.3, 0.4, 0.5, 0.6;
  m2 << -1.0 / 3.0, 0, 0, 0, 0, 1e-300;
  const StepFunction psi(Partition({0.0, 0.25, 1.0}), {HSMap(m0), HSMap(m1), HSMap(m2)});
  const StepFunction back = step_function_from_json(step_function_to_json(psi));
  EXPECT_EQ(back.partition().points(), psi.partition().points());
  ASSERT_EQ(back.values().size(), 3U);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(back.values()[i].matrix(), psi.values()[i].matrix());
}

TEST(StepFunctionJson, RejectsShapeMismatch) {
  EXPECT_THROW(step_function_from_json(R"({"points": [0, 1], "dim_h": 1, "dim_g": 1, "values": [[1]]})"), FormatError);
  EXPECT_THROW(step_function_from_json(R"({"points": [0, 1], "dim_h": 1, "dim_g": 2, "values": [[1], [2]]})"),
               FormatError);
  EXPECT_THROW(step_function_from_json(R"({"points": [1, 0], "dim_h": 1, "dim_g": 1, "values": [[1], [2]]})"),
               FormatError);
}

TEST(PathCsv, HeaderAndRows) {
  PathTable path{Partition({0.0, 0.5, 1.0}), Matrix(2, 2), {0, 3}, 7};
  path.increments << 0.5, -1.0, 0.25, 2.0;
  std::ostringstream out;
  write_path_csv(out, path);
  EXPECT_EQ(out.str(), "t,dx_0,dx_1,jumps\n0.5,0.5,0.25,0\n1,-1,2,3\n");
}

TEST(ModularCsv, RowsCarryAllComponents) {
  std::ostringstream out;
  write_modular_csv_header(out);
  write_modular_csv_row(out, "psi", ModularValue{0.5, 0.25, 0.75, 0.0, 0.125});
  EXPECT_EQ(out.str(), "label,m_prime,m_double_prime,total,std_error,l_gap\npsi,0.5,0.25,0.75,0,0.125\n");
}

TEST(FormatDouble, RoundTrips) {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-310, 6.02214076e23}) {
    const std::string text = format_double(x);
    double back = 0.0;
    std::from_chars(text.data(), text.data() + text.size(), back);
    EXPECT_EQ(back, x) << text;
  }
}

TEST(LawBinary, LayoutIsLittleEndianSampleMajor) {
  Matrix s(2, 3);
  s << 1.0, 2.0, 3.0, -1.0, -2.0, -3.0;
  std::ostringstream out;
  write_law(out, EmpiricalLaw(s, 11));
  const std::string bytes = out.str();
  ASSERT_EQ(bytes.size(), 16U + 6U * 8U);
  EXPECT_EQ(static_cast<unsigned char>(bytes[0]), 2);
  EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 3);
  for (int i = 1; i < 8; ++i) EXPECT_EQ(bytes[static_cast<std::size_t>(i)], 0);
  // Second value is the first sample's second coordinate, -1.0 = 0xBFF0...
  EXPECT_EQ(static_cast<unsigned char>(bytes[16 + 8 + 7]), 0xBF);
  EXPECT_EQ(static_cast<unsigned char>(bytes[16 + 8 + 6]), 0xF0);

  std::istringstream in(bytes);
  EXPECT_EQ(read_law(in).samples(), s);
}

TEST(LawBinary, RejectsTruncatedAndTrailingBytes) {
  std::ostringstream out;
  write_law(out, EmpiricalLaw(Matrix::Ones(1, 4), 0));
  std::string bytes = out.str();
  std::istringstream shortened(bytes.substr(0, bytes.size() - 1));
  EXPECT_THROW(read_law(shortened), FormatError);
  std::istringstream longer(bytes + "x");
  EXPECT_THROW(read_law(longer), FormatError);
}

}  // namespace
}  // namespace cyllevy
