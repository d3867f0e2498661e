#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "cli.hpp"
#include "codimctl/serialization.hpp"

namespace codimctl {
namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;

  io::Json json() const { return io::Json::parse(out); }
  io::Json error() const { return io::Json::parse(err); }
};

Outcome run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path scratch_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("codimctl_cli_test_" + name);
}

TEST(Cli, GramianHeat) {
  const Outcome o = run({"gramian", "--kind", "heat", "--N", "32", "--T", "0.1", "--omega", "0.2", "0.8"});
  ASSERT_EQ(o.code, cli::kExitOk) << o.err;
  const io::Json j = o.json();
  EXPECT_EQ(j.at("schema"), io::kSchemaVersion);
  EXPECT_EQ(j.at("command"), "gramian");
  const GramianMatrix G = io::gramian_from_json(j.at("result"));
  EXPECT_EQ(G.entries.rows(), 32);
  EXPECT_EQ(G.entries.cols(), 32);
  EXPECT_EQ(j.at("result").at("entries").size(), 32u * 32u);
}

TEST(Cli, GramianWaveIdentity) {
  const Outcome o = run({"gramian", "--kind", "wave", "--N", "8", "--T", "2", "--omega", "0", "1"});
  ASSERT_EQ(o.code, cli::kExitOk) << o.err;
  const GramianMatrix G = io::gramian_from_json(o.json().at("result"));
  EXPECT_LT((G.entries - Eigen::MatrixXd::Identity(16, 16)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Cli, ValidationErrors) {
  const Outcome negative = run({"gramian", "--kind", "heat", "--N", "8", "--T", "-1", "--omega", "0", "1"});
  EXPECT_EQ(negative.code, cli::kExitValidation);
  EXPECT_TRUE(negative.out.empty());
  EXPECT_EQ(negative.error().at("error"), "validation");

  EXPECT_EQ(run({"gramian", "--kind", "heat", "--N", "8", "--T", "1", "--omega", "0.6", "0.2"}).code,
            cli::kExitValidation);
  EXPECT_EQ(run({"codim-scan", "--preset", "prop31-wave", "--Ns", "16", "32"}).code, cli::kExitValidation);
  EXPECT_EQ(run({"gramian", "--bogus"}).code, cli::kExitValidation);
  EXPECT_EQ(run({"hum", "--kind", "heat", "--N", "8", "--T", "0.5", "--omega", "0.2", "0.8", "--eps", "0"}).code,
            cli::kExitValidation);
}

TEST(Cli, PresetVerdicts) {
  const Outcome heat = run({"codim-scan", "--preset", "prop32-heat"});
  ASSERT_EQ(heat.code, cli::kExitOk) << heat.err;
  EXPECT_EQ(heat.json().at("result").at("verdict"), "NotFiniteCodim");

  const Outcome wave = run({"codim-scan", "--preset", "prop31-wave"});
  ASSERT_EQ(wave.code, cli::kExitOk) << wave.err;
  EXPECT_EQ(wave.json().at("result").at("verdict"), "FiniteCodim(0)");
}

TEST(Cli, ExplicitFlagsOverridePreset) {
  const Outcome o = run({"codim-scan", "--preset", "prop31-wave", "--Ns", "4", "8", "12", "--T", "2", "--omega", "0",
                         "1"});
  ASSERT_EQ(o.code, cli::kExitOk) << o.err;
  const io::Json config = o.json().at("config");
  EXPECT_EQ(config.at("T").get<double>(), 2.0);
  EXPECT_EQ(config.at("Ns").size(), 3u);
  EXPECT_EQ(config.at("kind"), "wave");
}

TEST(Cli, HumWaveMode) {
  const Outcome o = run({"hum", "--kind", "wave", "--N", "16", "--T", "2", "--omega", "0", "1", "--target", "mode:1"});
  ASSERT_EQ(o.code, cli::kExitOk) << o.err;
  const io::Json r = o.json().at("result");
  EXPECT_LE(r.at("residual").get<double>(), 1e-6);
  EXPECT_LE(r.at("endpoint").at("relative_error").get<double>(), 1e-6);
  EXPECT_TRUE(r.at("control").contains("values"));
}

TEST(Cli, HumWaveSingularIsNumericalError) {
  const Outcome o =
      run({"hum", "--kind", "wave", "--N", "48", "--T", "0.2", "--omega", "0", "0.3", "--target", "mode:48"});
  EXPECT_EQ(o.code, cli::kExitNumerical);
  EXPECT_TRUE(o.error().contains("diagnostics"));
}

TEST(Cli, OracleRandomSweep) {
  const Outcome o = run({"oracle", "--random", "4", "2", "50", "--seed", "7"});
  ASSERT_EQ(o.code, cli::kExitOk) << o.err;
  const io::Json summary = o.json().at("result").at("summary");
  EXPECT_EQ(summary.at("count").get<int>(), 50);
  EXPECT_TRUE(summary.at("all_consistent").get<bool>());
}

TEST(Cli, OracleFromFiles) {
  const auto a = scratch_file("A.json"), b = scratch_file("B.json");
  std::ofstream(a) << "[[1, 0], [0, 2]]";
  std::ofstream(b) << "[[1], [0]]";
  const Outcome o = run({"oracle", "--A", a.string(), "--B", b.string()});
  ASSERT_EQ(o.code, cli::kExitOk) << o.err;
  const io::Json report = o.json().at("result").at("reports").at(0);
  EXPECT_EQ(report.at("codim").get<int>(), 1);
  std::filesystem::remove(a);
  std::filesystem::remove(b);
}

TEST(Cli, LqHeatReportsMultiplier) {
  const Outcome o = run({"lq", "--kind", "heat", "--N", "16", "--T", "0.5", "--omega", "0.2", "0.8", "--target", "step",
                         "--alpha", "1"});
  ASSERT_EQ(o.code, cli::kExitOk) << o.err;
  const io::Json r = o.json().at("result");
  EXPECT_GT(r.at("multiplier_norm").get<double>(), 0.0);
  EXPECT_EQ(r.at("kind"), "heat");
}

TEST(Cli, ConfigFileWithFlagPrecedence) {
  const auto path = scratch_file("config.ini");
  std::ofstream(path) << "kind = heat\nN = 6\nT = 0.3\nomega = [0.1, 0.9]\n";
  const Outcome from_file = run({"gramian", "--config", path.string()});
  ASSERT_EQ(from_file.code, cli::kExitOk) << from_file.err;
  EXPECT_EQ(from_file.json().at("result").at("N").get<int>(), 6);

  const Outcome overridden = run({"gramian", "--config", path.string(), "--N", "4"});
  ASSERT_EQ(overridden.code, cli::kExitOk) << overridden.err;
  const io::Json j = overridden.json();
  EXPECT_EQ(j.at("result").at("N").get<int>(), 4);
  EXPECT_EQ(j.at("config").at("T").get<double>(), 0.3);
  std::filesystem::remove(path);
}

TEST(Cli, OutputFileAndCsv) {
  const auto json = scratch_file("scan.json"), csv = scratch_file("scan.csv");
  const Outcome o = run({"codim-scan", "--preset", "identity-wave", "--Ns", "4", "8", "12", "--out", json.string(),
                         "--csv", csv.string()});
  ASSERT_EQ(o.code, cli::kExitOk) << o.err;
  EXPECT_TRUE(o.out.empty());
  std::ifstream in(json);
  const io::Json j = io::Json::parse(in);
  EXPECT_FALSE(j.at("config").contains("out"));
  std::ifstream c(csv);
  std::string header;
  std::getline(c, header);
  EXPECT_EQ(header, "N,j,eig");
  std::filesystem::remove(json);
  std::filesystem::remove(csv);
}

TEST(Cli, RepeatedRunsAreByteIdentical) {
  const std::vector<std::string> args = {"codim-scan", "--preset", "gcc-violated-wave", "--Ns", "8", "16", "32"};
  const Outcome first = run(args), second = run(args);
  ASSERT_EQ(first.code, cli::kExitOk) << first.err;
  EXPECT_EQ(first.out, second.out);
}

}  // namespace
}  // namespace codimctl
