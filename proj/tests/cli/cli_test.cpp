#include "cdch/manifest.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace cdch::cli;
namespace fs = std::filesystem;

namespace {

const fs::path kSource = CDCH_SOURCE_DIR;

json load(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("cdch_cli_test_" + name);
  fs::remove_all(dir);
  return dir;
}

json without_timestamp(json report) {
  report["provenance"].erase("timestamp");
  return report;
}

}  // namespace

TEST(Validate, SampleManifestsAreClean) {
  int seen = 0;
  for (const auto& entry : fs::directory_iterator(kSource / "manifests")) {
    if (entry.path().extension() != ".json") continue;
    EXPECT_EQ(validate(load(entry.path())), std::vector<std::string>{}) << entry.path();
    ++seen;
  }
  EXPECT_GE(seen, 10);
}

TEST(Validate, ResolutionMustBeAPowerOfTwo) {
  const json m = {{"command", "solve"}, {"numerics", {{"resolution", 33}}}};
  EXPECT_EQ(validate(m), std::vector<std::string>{"resolution must be a power of two in [32,1024]"});
  for (int r : {16, 2048, 96}) {
    EXPECT_EQ(validate({{"command", "solve"}, {"numerics", {{"resolution", r}}}}).size(), 1u) << r;
  }
}

TEST(Validate, RateNeedsFourEpsilons) {
  const json m = {{"command", "rate"},
                  {"coefficient", {{"periodic", {{"kind", "layered"}}}}},
                  {"numerics", {{"eps_list", {0.5, 0.25}}}}};
  EXPECT_EQ(validate(m), std::vector<std::string>{"eps_list requires ≥ 4 values"});
}

TEST(Validate, ReportsMissingAndUnknownFields) {
  EXPECT_FALSE(validate(json::array()).empty());
  EXPECT_FALSE(validate({{"numerics", json::object()}}).empty());
  EXPECT_FALSE(validate({{"command", "teleport"}}).empty());
  EXPECT_FALSE(validate({{"command", "radial"}, {"numerics", {{"n", 3}, {"alpha", 0.5}}}}).empty());
  EXPECT_FALSE(validate({{"command", "cell"}}).empty());
  EXPECT_FALSE(validate({{"command", "radial"}, {"colour", 1},
                         {"numerics", {{"n", 3}, {"alpha", 0.5}, {"R", 0.5}}}}).empty());
  EXPECT_FALSE(validate({{"command", "solve"}, {"domain", {{"kind", "torus"}}},
                         {"numerics", {{"resolution", 64}}}}).empty());
  EXPECT_FALSE(validate({{"command", "solve"}, {"coefficient", {{"matrix", {{1, 0}, {0, -1}}}}},
                         {"numerics", {{"resolution", 64}}}}).empty());
  EXPECT_FALSE(validate({{"command", "capacity"}, {"numerics", {{"resolution", 64}}}}).empty());
}

TEST(Validate, IsAPureFunctionOfTheDocument) {
  const json m = load(kSource / "manifests" / "layered_rate.json");
  EXPECT_EQ(validate(m), validate(m));
  json broken = m;
  broken["numerics"]["eps_list"] = {0.5};
  EXPECT_EQ(validate(broken), validate(broken));
  EXPECT_NE(validate(broken), validate(m));
}

TEST(Schema, CommandListMatchesTheRunner) {
  const json schema = load(kSource / "schema.json");
  const auto listed = schema["properties"]["command"]["enum"].get<std::vector<std::string>>();
  EXPECT_EQ(listed, commands());
  const auto resolutions = schema["$defs"]["resolution"]["enum"].get<std::vector<int>>();
  EXPECT_EQ(resolutions, (std::vector<int>{32, 64, 128, 256, 512, 1024}));
}

TEST(Run, RadialReportCarriesTheEnergy) {
  RunOptions opt;
  opt.write_files = false;
  const RunResult r = run(load(kSource / "manifests" / "radial.json"), opt);
  ASSERT_EQ(r.status, 0) << r.report.dump(2);
  EXPECT_NEAR(r.report["results"]["energy"].get<double>(), 0.5, 1e-12);
  EXPECT_NEAR(r.report["results"]["c_alpha_norm"].get<double>(), 1.0, 1e-6);
  std::set<std::string> keys;
  for (const auto& [k, v] : r.report.items()) keys.insert(k);
  EXPECT_EQ(keys, (std::set<std::string>{"command", "inputs", "results", "provenance", "errors"}));
  EXPECT_TRUE(r.report["errors"].empty());
}

TEST(Run, ZeroMeasureExportsAZeroField) {
  const fs::path dir = scratch("zero");
  RunOptions opt;
  opt.out = dir;
  const RunResult r = run(load(kSource / "manifests" / "solve_zero.json"), opt);
  ASSERT_EQ(r.status, 0);
  ASSERT_TRUE(fs::exists(dir / "report.json"));
  ASSERT_TRUE(fs::exists(dir / "solution.svg"));
  std::ifstream csv(dir / "solution.csv");
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "x,y,u");
  int rows = 0;
  while (std::getline(csv, line)) {
    EXPECT_EQ(std::stod(line.substr(line.rfind(',') + 1)), 0.0);
    ++rows;
  }
  EXPECT_EQ(rows, 65 * 65);
  fs::remove_all(dir);
}

TEST(Run, ValidationFailureExitsWithTwo) {
  const fs::path dir = scratch("invalid");
  RunOptions opt;
  opt.out = dir;
  const RunResult r = run({{"command", "solve"}, {"numerics", {{"resolution", 33}}}}, opt);
  EXPECT_EQ(r.status, 2);
  const json report = load(dir / "report.json");
  ASSERT_EQ(report["errors"].size(), 1u);
  EXPECT_EQ(report["errors"][0]["code"], "ValidationError");
  EXPECT_TRUE(report["results"].empty());
  fs::remove_all(dir);
}

TEST(Run, SolverFailureExitsWithThree) {
  RunOptions opt;
  opt.write_files = false;
  const json m = {{"command", "solve"},
                  {"domain", {{"kind", "disk"}}},
                  {"numerics", {{"resolution", 128}, {"tol", 1e-12}, {"max_iter", 2}}}};
  const RunResult r = run(m, opt);
  EXPECT_EQ(r.status, 3);
  ASSERT_EQ(r.report["errors"].size(), 1u);
  EXPECT_EQ(r.report["errors"][0]["code"], "NoConvergence");
}

TEST(Run, LibraryErrorsBecomeInputFailures) {
  RunOptions opt;
  opt.write_files = false;
  // a point mass has no finite Morrey norm, so the estimate study refuses it
  const json m = {{"command", "hoelder"},
                  {"measure", {{"terms", {{{"type", "point_mass"}, {"at", {0.5, 0.5}}}}}}},
                  {"numerics", {{"resolution", 64}, {"alpha", 0.5}, {"alpha0", 0.5}}}};
  const RunResult r = run(m, opt);
  EXPECT_EQ(r.status, 2);
  EXPECT_EQ(r.report["errors"][0]["code"], "InvalidParams");
}

TEST(Run, ReportIsDeterministicApartFromTheTimestamp) {
  RunOptions one;
  one.write_files = false;
  RunOptions two = one;
  two.threads = 2;
  const json m = load(kSource / "manifests" / "koch_cdc.json");
  const RunResult a = run(m, one);
  const RunResult b = run(m, one);
  const RunResult c = run(m, two);
  ASSERT_EQ(a.status, 0);
  EXPECT_EQ(without_timestamp(a.report).dump(), without_timestamp(b.report).dump());
  EXPECT_EQ(a.report["results"].dump(), c.report["results"].dump());
  EXPECT_EQ(a.report["provenance"]["manifest_hash"].get<std::string>().substr(0, 8), "fnv1a64:");
}

TEST(Run, SeedChangesTheBoundarySample) {
  RunOptions opt;
  opt.write_files = false;
  json m = load(kSource / "manifests" / "koch_cdc.json");
  m["numerics"]["samples"] = 8;
  const RunResult a = run(m, opt);
  opt.seed = 7;
  const RunResult b = run(m, opt);
  ASSERT_EQ(a.status, 0);
  ASSERT_EQ(b.status, 0);
  EXPECT_EQ(b.report["provenance"]["seed"], 7);
  EXPECT_NE(a.report["results"].dump(), b.report["results"].dump());
}

TEST(Run, ProvenanceHashFollowsTheManifest) {
  RunOptions opt;
  opt.write_files = false;
  json m = load(kSource / "manifests" / "radial.json");
  const std::string h1 = run(m, opt).report["provenance"]["manifest_hash"];
  m["numerics"]["R"] = 0.25;
  const std::string h2 = run(m, opt).report["provenance"]["manifest_hash"];
  EXPECT_NE(h1, h2);
}

TEST(Hash, FnvReferenceValues) {
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a("foobar"), 0x85944171f73967e8ULL);
}
