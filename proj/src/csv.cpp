#include "matd/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "matd/errors.hpp"

namespace matd {

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << content;
  if (!out) throw IoError("write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string run_trajectory_csv(const std::vector<double>& delta_sq) {
  std::string out = "k,delta_sq\n";
  char buf[64];
  for (std::size_t k = 0; k < delta_sq.size(); ++k) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", k, delta_sq[k]);
    out += buf;
  }
  return out;
}

std::string aggregate_csv(const AggregateTrajectory& agg) {
  std::string out = "k,mean_delta_sq,stderr\n";
  char buf[96];
  for (std::size_t i = 0; i < agg.k.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%ld,%.17g,%.17g\n", agg.k[i], agg.mean[i],
                  agg.std_error[i]);
    out += buf;
  }
  return out;
}

AggregateTrajectory parse_aggregate_csv(const std::string& content) {
  AggregateTrajectory agg;
  std::istringstream in(content);
  std::string line;
  if (!std::getline(in, line) || line.rfind("k,mean_delta_sq", 0) != 0)
    throw IoError("aggregate csv: missing header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    long k = 0;
    double mean = 0.0, se = 0.0;
    if (std::sscanf(line.c_str(), "%ld,%lf,%lf", &k, &mean, &se) != 3)
      throw IoError("aggregate csv: malformed row '" + line + "'");
    agg.k.push_back(k);
    agg.mean.push_back(mean);
    agg.std_error.push_back(se);
  }
  return agg;
}

}  // namespace matd
