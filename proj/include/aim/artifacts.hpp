#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "aim/simulation.hpp"

namespace aim {

// Column order of every CSV below is part of the output contract.

/// vehicle_id,origin,destination,class,equipped,alpha,budget,spawn_tick,
/// completion_tick,free_flow_ticks,travel_ticks,delay,total_paid,rejections
/// One row per completed trip.
std::string trips_csv(const RunArtifacts& run);

/// tick,intersection,link,price,open
std::string prices_csv(const RunArtifacts& run);

/// tick,moving_avg_travel_ticks (empty when no trip completed in the window)
std::string travel_time_csv(const RunArtifacts& run);

/// One header row and one data row; see summary_columns().
std::string summary_csv(const RunArtifacts& run);
std::vector<std::string> summary_columns();
std::vector<std::string> summary_values(const RunSummary& s);

std::string audit_jsonl(const RunArtifacts& run);

/// Writes every artifact plus scenario.json and manifest.json into `dir` and
/// returns the written paths, manifest last.
std::vector<std::filesystem::path> write_run(const RunArtifacts& run, const std::filesystem::path& dir);

}  // namespace aim
