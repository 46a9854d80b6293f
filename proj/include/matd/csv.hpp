#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace matd {

/// Writes text atomically enough for our purposes; throws IoError on failure.
void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

struct AggregateTrajectory {
  std::vector<long> k;
  std::vector<double> mean;
  std::vector<double> std_error;
};

std::string run_trajectory_csv(const std::vector<double>& delta_sq);
std::string aggregate_csv(const AggregateTrajectory& agg);
AggregateTrajectory parse_aggregate_csv(const std::string& content);

}  // namespace matd
