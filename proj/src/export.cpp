#include "evotree/export.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "evotree/errors.hpp"

namespace evotree::io {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_trajectory_csv(std::ostream& out, const tree::Trajectory& trajectory) {
  out << "t,mean_fitness,log_total_mass,running_geometric_mean,truncated_share_bound";
  for (const auto& name : trajectory.trait_names) out << ',' << name;
  out << '\n';
  for (const auto& r : trajectory.records) {
    out << r.time << ',' << format_double(r.mean_fitness) << ',' << format_double(r.log_total_mass) << ','
        << format_double(r.running_geometric_mean) << ',' << format_double(r.truncated_share_bound);
    for (double s : r.trait_shares) out << ',' << format_double(s);
    out << '\n';
  }
}

nlohmann::json frontier_json(const tree::Frontier& frontier, const tree::TreeModel& model) {
  auto arr = nlohmann::json::array();
  for (std::size_t i = 0; i < frontier.size(); ++i) {
    const tree::Labels labels = model.labels(frontier.states[i]);
    nlohmann::json lab = {{"tags", tree::tag_names(labels.tags)}};
    if (labels.f_c) lab["f_c"] = *labels.f_c;
    if (labels.f_d) lab["f_d"] = *labels.f_d;
    arr.push_back({{"path", frontier.paths[i].to_string()},
                   {"share", frontier.shares[i]},
                   {"fitness", frontier.fitness[i]},
                   {"labels", std::move(lab)}});
  }
  return arr;
}

void write_finite_csv(std::ostream& out, const std::vector<finite::TrajectoryPoint>& points) {
  const std::size_t n = points.empty() ? 0 : points.front().state.size();
  out << "t,mean_fitness";
  for (std::size_t i = 0; i < n; ++i) out << ",x" << i;
  out << '\n';
  for (std::size_t t = 0; t < points.size(); ++t) {
    out << t << ',' << format_double(points[t].mean_fitness);
    for (double x : points[t].state.frequencies()) out << ',' << format_double(x);
    out << '\n';
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << content;
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

}  // namespace evotree::io
