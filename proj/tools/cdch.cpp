// cdch: run and validate study manifests.
//
//   cdch run --manifest study.json [--out dir] [--seed 42] [--threads 4]
//   cdch validate --manifest study.json
//
// Exit status: 0 on success, 2 for invalid input, 3 for numerical failure.

#include "cdch/manifest.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

// Reads and parses the manifest; prints the reason and returns false on failure.
bool load(const std::string& path, cdch::cli::json& out) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "cdch: cannot open " << path << "\n";
    return false;
  }
  try {
    out = cdch::cli::json::parse(in);
  } catch (const cdch::cli::json::parse_error& e) {
    std::cerr << "cdch: " << path << " is not valid JSON: " << e.what() << "\n";
    return false;
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Elliptic problems on irregular planar domains: solves, capacity and "
               "Hardy diagnostics, periodic homogenization studies"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(cdch::cli::kVersion));

  std::string manifest_path;
  std::string out_dir;
  unsigned seed = 42;
  int threads = 1;

  auto* run = app.add_subcommand("run", "Execute a manifest and write report.json with artifacts");
  run->add_option("--manifest", manifest_path, "Study manifest (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory (overrides the manifest)");
  run->add_option("--seed", seed, "Seed for boundary subsampling")->capture_default_str();
  run->add_option("--threads", threads, "Worker threads")->capture_default_str()->check(CLI::Range(1, 256));

  auto* validate = app.add_subcommand("validate", "List schema violations of a manifest");
  validate->add_option("--manifest", manifest_path, "Study manifest (JSON)")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  cdch::cli::json manifest;
  if (!load(manifest_path, manifest)) return 2;

  if (*validate) {
    const auto problems = cdch::cli::validate(manifest);
    for (const auto& p : problems) std::cout << p << "\n";
    if (problems.empty()) std::cout << "ok\n";
    return problems.empty() ? 0 : 2;
  }

  cdch::cli::RunOptions options;
  if (!out_dir.empty()) options.out = out_dir;
  options.seed = seed;
  options.threads = threads;
  const auto result = cdch::cli::run(manifest, options);
  for (const auto& e : result.report["errors"]) {
    std::cerr << "cdch: " << e["code"].get<std::string>() << ": " << e["message"].get<std::string>() << "\n";
  }
  std::cout << (result.out_dir / "report.json").string() << "\n";
  for (const auto& a : result.artifacts) std::cout << (result.out_dir / a).string() << "\n";
  return result.status;
}
