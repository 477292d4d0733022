#pragma once
// Plot-ready text output. Numbers are written in the shortest form that reads
// back to the same double, so reruns produce byte-identical files.

#include <iosfwd>
#include <string>
#include <vector>

#include "evotree/finite.hpp"
#include "evotree/tree.hpp"
#include "json.hpp"

namespace evotree::io {

std::string format_double(double v);

/// Header `t,mean_fitness,log_total_mass,running_geometric_mean,
/// truncated_share_bound` followed by one column per trait; one row per record.
void write_trajectory_csv(std::ostream& out, const tree::Trajectory& trajectory);

/// Array of {path, share, fitness, labels}.
nlohmann::json frontier_json(const tree::Frontier& frontier, const tree::TreeModel& model);

/// `t,mean_fitness,x0,...,x{N-1}`.
void write_finite_csv(std::ostream& out, const std::vector<finite::TrajectoryPoint>& points);

/// Reads the whole file or throws Error{IoError}.
std::string read_file(const std::string& path);
/// Truncates and writes; throws Error{IoError}.
void write_file(const std::string& path, const std::string& content);

}  // namespace evotree::io
