#include <cmath>
#include <limits>
#include <sstream>

#include <gtest/gtest.h>

#include "codimctl/serialization.hpp"
#include "test_support.hpp"

namespace codimctl {
namespace {

using testing::max_abs;

TEST(Dump, SeventeenDigitsAndLayout) {
  io::Json j;
  j["third"] = 1.0 / 3.0;
  j["whole"] = 2.0;
  j["int"] = 7;
  j["list"] = io::Json::array({1.5, 2.5});
  j["bad"] = std::numeric_limits<double>::quiet_NaN();
  const std::string s = io::dump(j);
  EXPECT_NE(s.find("0.33333333333333331"), std::string::npos);
  EXPECT_NE(s.find("\"whole\": 2.0"), std::string::npos);
  EXPECT_NE(s.find("\"int\": 7"), std::string::npos);
  EXPECT_NE(s.find("[1.5, 2.5]"), std::string::npos);
  EXPECT_NE(s.find("\"bad\": null"), std::string::npos);
  EXPECT_EQ(s.back(), '\n');
  EXPECT_EQ(s.find("\"third\""), 4u);
}

TEST(Dump, DoublesRoundTripExactly) {
  const double values[] = {0.1, 1e-300, -123456.789, M_PI, 5e-324, 1.7976931348623157e308};
  for (double v : values) {
    const io::Json parsed = io::Json::parse(io::dump(io::Json(v)));
    EXPECT_EQ(parsed.get<double>(), v);
  }
}

TEST(Gramian, RoundTrip) {
  const GramianMatrix G = assemble_wave_gramian(5, 0.7, ControlRegion(0.1, 0.6), 3.0);
  const std::string text = io::dump(io::to_json(G));
  const GramianMatrix back = io::gramian_from_json(io::Json::parse(text));
  EXPECT_EQ(back.kind, SystemKind::Wave);
  EXPECT_EQ(back.N, 5);
  EXPECT_EQ(back.T, 0.7);
  EXPECT_EQ(back.region.a, 0.1);
  EXPECT_EQ(back.region.b, 0.6);
  EXPECT_EQ(back.potential, 3.0);
  EXPECT_EQ(max_abs(back.entries - G.entries), 0.0);
  EXPECT_EQ(io::dump(io::to_json(back)), text);
}

TEST(Gramian, MalformedInputThrows) {
  io::Json j = io::to_json(assemble_heat_gramian(3, 0.2, ControlRegion(0.2, 0.5)));
  j["entries"].erase(0);
  EXPECT_ANY_THROW(io::gramian_from_json(j));
}

TEST(Matrix, RowsRoundTrip) {
  Eigen::MatrixXd M(2, 3);
  M << 1, 2, 3, 4, 5, 6.25;
  const io::Json j = io::to_json(M);
  ASSERT_EQ(j.size(), 2u);
  EXPECT_EQ(j[1][2].get<double>(), 6.25);
  EXPECT_EQ(max_abs(io::matrix_from_json(j) - M), 0.0);
}

TEST(System, FromJson) {
  const io::Json j = io::Json::parse(R"({"A": [[0, 1], [-2, 0]], "B": [[0], [1]]})");
  const LtiSystem s = io::system_from_json(j);
  EXPECT_EQ(s.n(), 2);
  EXPECT_EQ(s.m(), 1);
  EXPECT_EQ(s.T, 1.0);
  EXPECT_EQ(s.A(1, 0), -2.0);
  const LtiSystem again = io::system_from_json(io::to_json(s));
  EXPECT_EQ(max_abs(again.B - s.B), 0.0);
}

TEST(Csv, Headers) {
  const LadderVerdict v = ladder_scan(SystemKind::Wave, 2.0, ControlRegion(0, 1), 0.0, {2, 3, 4});
  const std::string csv = io::eigenvalue_csv(v);
  EXPECT_EQ(csv.rfind("N,j,eig\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 4 + 6 + 8);

  SampledControl u;
  u.dt = 0.01;
  u.values = Eigen::MatrixXd::Ones(2, 5);
  const std::string c = io::control_csv(u);
  EXPECT_EQ(c.rfind("t,norm\n", 0), 0u);
  EXPECT_EQ(std::count(c.begin(), c.end(), '\n'), 6);
}

TEST(Envelope, Shape) {
  const io::Json e = io::envelope("gramian", io::Json{{"N", 4}}, io::Json{{"ok", true}});
  EXPECT_EQ(e.at("schema"), io::kSchemaVersion);
  EXPECT_EQ(e.at("command"), "gramian");
  EXPECT_EQ(e.begin().key(), "schema");
  EXPECT_TRUE(e.at("result").at("ok").get<bool>());
}

TEST(Ladder, FieldsPresent) {
  const LadderVerdict v = ladder_scan(SystemKind::Heat, 0.1, ControlRegion(0.2, 0.8), 0.0, {4, 8, 12});
  const io::Json j = io::to_json(v);
  for (const char* key : {"Ns", "counts", "verdict", "tau_rule", "tau", "min_eigs", "defect_angles"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j.at("verdict").get<std::string>(), v.verdict_string());
}

}  // namespace
}  // namespace codimctl
