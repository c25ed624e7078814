#pragma once

#include "distfuse/fusion.hpp"
#include "distfuse/maxent.hpp"
#include "distfuse/model.hpp"
#include "distfuse/sim.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>

namespace distfuse::io {

/// 17 significant digits: enough for a lossless double round-trip.
std::string format_double(double v);

/// Writes via a temporary file in the same directory plus rename, so readers
/// never observe partial output.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

std::string read_text(const std::filesystem::path& path);

/// FNV-1a 64-bit digest of a file's bytes, as 16 hex characters.
std::string file_digest(const std::filesystem::path& path);

// --- distribution CSV: header "cell_index,bitmask,prob", bitmask is a binary
// --- string of length J with bit J-1 leftmost.
std::string distribution_csv(const Distribution& dist);
Distribution parse_distribution_csv(const std::string& text, const std::string& name);
Distribution read_distribution_csv(const std::filesystem::path& path);

// --- counts CSV: header "cell_index,count". The declared total, when given,
// --- must match the column sum.
std::string counts_csv(const EmpiricalCounts& counts);
EmpiricalCounts parse_counts_csv(const std::string& text, const std::string& name,
                                 std::optional<std::int64_t> declared_n = {});
EmpiricalCounts read_counts_csv(const std::filesystem::path& path,
                                std::optional<std::int64_t> declared_n = {});

// --- constraint set JSON:
// {"symptoms": [...], "marginals": [{"index": j, "lo": x, "hi": y}],
//  "forbidden_cells": [...], "min_present": m|null}
std::pair<OutcomeSpace, ConstraintSet> parse_constraints_json(const std::string& text,
                                                              const std::string& name);
std::pair<OutcomeSpace, ConstraintSet> read_constraints_json(
    const std::filesystem::path& path);

nlohmann::json fusion_report_json(const FusionReport& report, std::int64_t n);
nlohmann::json maxent_report_json(const MaxentSolution& solution);
nlohmann::json coverage_report_json(const CoverageReport& report);

}  // namespace distfuse::io
