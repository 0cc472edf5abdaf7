#ifndef CDCH_MANIFEST_HPP
#define CDCH_MANIFEST_HPP

#include "cdch/elliptic.hpp"
#include "cdch/geometry.hpp"
#include "cdch/homogenize.hpp"
#include "cdch/measures.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cdch::cli {

using nlohmann::json;

inline constexpr std::string_view kVersion = "0.1.0";

/// Every command accepted by `run`, in schema order.
const std::vector<std::string>& commands();

/// Schema violations of a manifest document, empty iff `run` would get past
/// its precondition checks. Pure function of the document.
std::vector<std::string> validate(const json& manifest);

// The parsers throw InvalidSpec with a message naming the offending key.
DomainSpec parse_domain(const json& domain);
MeasureSpec parse_measure(const json& measure);
PeriodicSpec parse_periodic(const json& periodic);
SolverSettings parse_solver(const json& numerics);

struct RunOptions {
  std::optional<std::filesystem::path> out;  // overrides the manifest "output"
  unsigned seed = 42;
  int threads = 1;
  bool write_files = true;  // false keeps everything in memory (tests)
};

struct RunResult {
  int status = 0;  // 0 success, 2 validation failure, 3 numerical failure
  json report;
  std::filesystem::path out_dir;
  std::vector<std::string> artifacts;  // file names written next to report.json
};

/// Executes the manifest and writes report.json plus command-specific CSV
/// and SVG files. Never throws for bad input; failures land in
/// report["errors"] and the status.
RunResult run(const json& manifest, const RunOptions& options = {});

/// 64-bit FNV-1a, used for the manifest hash in the provenance block.
std::uint64_t fnv1a(std::string_view bytes);

}  // namespace cdch::cli

#endif  // CDCH_MANIFEST_HPP
