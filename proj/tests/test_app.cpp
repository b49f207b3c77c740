#include "skalg/app.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace skalg;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = app::run(args, out, err);
  return {code, out.str(), err.str()};
}

const VerificationReport* find(const Report& r, const std::string& predicate, const std::string& subject) {
  for (const auto& c : r.checks) {
    if (c.predicate == predicate && c.subject == subject) return &c;
  }
  return nullptr;
}

}  // namespace

TEST(Cli, ChristoffelPlanarBody) {
  const auto r = cli({"christoffel", "--system", "planar_body", "--at", "0,0,0", "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  const auto& gamma = j.at("gamma");
  EXPECT_NEAR(gamma[0][1][1].get<double>(), 1.0, 1e-5);
  EXPECT_NEAR(gamma[1][1][0].get<double>(), -0.5, 1e-5);
  EXPECT_EQ(j.at("nonzero").size(), 8u);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(cli({"check-maxred", "--system", "robotic_leg"}).code, 0);
  EXPECT_EQ(cli({"check-maxred", "--system", "planar_body"}).code, 1);
  const auto hj = cli({"check-hj", "--system", "planar_body", "--section", "candidate:xY1", "--format", "json"});
  EXPECT_EQ(hj.code, 1);
  const json j = json::parse(hj.out);
  EXPECT_EQ(j.at("checks")[0].at("verdict"), "fail");
  EXPECT_FALSE(j.at("checks")[0].at("witness_point").is_null());
  EXPECT_EQ(cli({"check-hj", "--system", "planar_body", "--section", "fY1"}).code, 0);
  EXPECT_EQ(cli({"check-decoupling", "--system", "snakeboard", "--section", "X2", "--section", "X3"}).code, 0);
  // The default set includes the complement X1, which is not decoupling.
  EXPECT_EQ(cli({"check-decoupling", "--system", "snakeboard"}).code, 1);
  EXPECT_EQ(cli({"check-decoupling", "--system", "planar_body", "--section", "Y3"}).code, 1);
  EXPECT_EQ(cli({"check-reduction", "--system", "robotic_leg"}).code, 0);
  EXPECT_EQ(cli({"check-geoinv", "--system", "robotic_leg"}).code, 0);
  EXPECT_EQ(cli({"check-reparam", "--system", "planar_body", "--function", "g"}).code, 0);
  EXPECT_EQ(cli({"closure", "--system", "planar_body", "--depth", "2"}).code, 0);
}

TEST(Cli, UsageAndLoadErrors) {
  EXPECT_EQ(cli({}).code, 2);
  EXPECT_EQ(cli({"frobnicate"}).code, 2);
  EXPECT_EQ(cli({"christoffel"}).code, 2);
  EXPECT_EQ(cli({"christoffel", "--system", "nonexistent_system"}).code, 2);
  EXPECT_EQ(cli({"christoffel", "--system", "planar_body", "--at", "1,2"}).code, 2);
  EXPECT_EQ(cli({"check-hj", "--system", "planar_body", "--section", "nope"}).code, 2);
  EXPECT_EQ(cli({"christoffel", "--system", "planar_body", "--params", "m=oops"}).code, 2);
  EXPECT_EQ(cli({"christoffel", "--system", "planar_body", "--format", "yaml"}).code, 2);
  EXPECT_EQ(cli({"closure", "--system", "planar_body", "--depth", "0"}).code, 2);
  const auto help = cli({"--help"});
  EXPECT_EQ(help.code, 0);
  EXPECT_NE(help.out.find("check-maxred"), std::string::npos);
}

TEST(Cli, SystemFromFileWithParams) {
  const auto r = cli({"christoffel", "--system", skalg::testing::data_path("polar_plane.json"), "--at", "2,0"});
  ASSERT_EQ(r.code, 0) << r.err;
  // Gamma^1_22 = -r, Gamma^2_12 = Gamma^2_21 = 1/r.
  EXPECT_NE(r.out.find("Gamma^1_22 = -2"), std::string::npos) << r.out;
  const auto p = cli({"christoffel", "--system", "planar_body", "--params", "h=2", "--at", "0,0,0", "--format", "json"});
  ASSERT_EQ(p.code, 0);
  EXPECT_NEAR(json::parse(p.out).at("gamma")[0][1][1].get<double>(), 2.0, 1e-5);
}

TEST(Cli, SimulateWritesCsv) {
  const auto path = std::filesystem::temp_directory_path() / "skalg_test_simulate.csv";
  const auto r = cli({"simulate", "--system", "euclidean2", "--x0", "0,0", "--y0", "1,0", "--horizon", "1", "--step",
                      "0.1", "--format", "csv", "--out", path.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "t,x1,x2,y1,y2");
  std::size_t rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  EXPECT_EQ(rows, 11u);
  std::filesystem::remove(path);

  const auto c = cli({"simulate", "--system", "planar_body", "--controls", "1;0", "--horizon", "0.5", "--format",
                      "json"});
  ASSERT_EQ(c.code, 0) << c.err;
  EXPECT_EQ(json::parse(c.out).at("truncated"), false);
}

TEST(Battery, PlanarBodyVerdictVector) {
  const auto def = app::load_system("planar_body");
  app::BatteryOptions opts;
  opts.at = app::default_point(def);
  const Report r = app::run_battery(def, opts);
  ASSERT_NE(find(r, "decoupling", "Y1"), nullptr);
  EXPECT_EQ(find(r, "decoupling", "Y1")->verdict, Verdict::Pass);
  EXPECT_EQ(find(r, "decoupling", "Y2")->verdict, Verdict::Pass);
  EXPECT_EQ(find(r, "decoupling", "Y3")->verdict, Verdict::Fail);
  EXPECT_EQ(find(r, "kinematic_reduction", "Y12")->verdict, Verdict::Fail);
  EXPECT_EQ(find(r, "maximal_reducibility", "Y12")->verdict, Verdict::Fail);
  EXPECT_EQ(find(r, "hamilton_jacobi", "fY1")->verdict, Verdict::Pass);
  EXPECT_EQ(find(r, "hamilton_jacobi", "xY1")->verdict, Verdict::Fail);
  bool saw_lie = false;
  for (const auto& c : r.closures) {
    if (c.name == "lie_closure D_c") {
      saw_lie = true;
      EXPECT_EQ(c.ranks.back(), 3u);
    }
  }
  EXPECT_TRUE(saw_lie);
  EXPECT_FALSE(r.all_passed());
  ASSERT_EQ(r.christoffel.size(), 1u);
}

TEST(Battery, SnakeboardVerdictVector) {
  const auto def = app::load_system("snakeboard");
  app::BatteryOptions opts;
  const Report r = app::run_battery(def, opts);
  EXPECT_EQ(find(r, "decoupling", "X2")->verdict, Verdict::Pass);
  EXPECT_EQ(find(r, "decoupling", "X3")->verdict, Verdict::Pass);
  EXPECT_EQ(find(r, "maximal_reducibility", "X23")->verdict, Verdict::Fail);
}

TEST(Battery, ReportCommandOnPointBase) {
  const auto r = cli({"report", "--system", "suslov", "--format", "json"});
  EXPECT_NE(r.code, 2) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j.at("system"), "suslov");
  EXPECT_FALSE(j.at("christoffel").empty());
}

TEST(Parsing, ParamsAndLists) {
  EXPECT_EQ(app::parse_params("m=2, J=0.5"), (std::map<std::string, double>{{"J", 0.5}, {"m", 2}}));
  EXPECT_TRUE(app::parse_params("").empty());
  EXPECT_THROW(app::parse_params("m"), std::invalid_argument);
  EXPECT_THROW(app::parse_params("m=1x"), std::invalid_argument);
  EXPECT_EQ(app::parse_list("1,-2.5,3e1"), (std::vector<double>{1, -2.5, 30}));
  EXPECT_THROW(app::parse_list("1,,2"), std::invalid_argument);
}
