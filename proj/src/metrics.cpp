#include "dvqn/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "dvqn/errors.hpp"

namespace dvqn {

std::string format_g17(double value) {
  if (std::isnan(value)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

std::string format_metrics_row(const MetricsRow& row) {
  std::string out;
  out.reserve(160);
  out += std::to_string(row.trial);
  out += ',';
  out += std::to_string(row.episode);
  out += ',';
  out += format_g17(row.episode_return);
  out += ',';
  out += std::to_string(row.steps);
  out += ',';
  out += format_g17(row.recon);
  out += ',';
  out += format_g17(row.kl);
  out += ',';
  out += format_g17(row.q_loss);
  out += ',';
  out += format_g17(row.total_loss);
  out += ',';
  out += format_g17(row.epsilon);
  out += '\n';
  return out;
}

std::vector<MetricsRow> read_metrics_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("metrics: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("metrics: empty file " + path);
  if (line != kMetricsHeader) throw ConfigError("metrics: unexpected header in " + path);
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    MetricsRow row;
    const char* p = line.c_str();
    char* end = nullptr;
    auto next_field = [&]() -> double {
      const double v = std::strtod(p, &end);
      if (end == p) throw ConfigError("metrics: malformed row in " + path);
      p = (*end == ',') ? end + 1 : end;
      return v;
    };
    row.trial = static_cast<int>(next_field());
    row.episode = static_cast<int>(next_field());
    row.episode_return = next_field();
    row.steps = static_cast<int>(next_field());
    row.recon = next_field();
    row.kl = next_field();
    row.q_loss = next_field();
    row.total_loss = next_field();
    row.epsilon = next_field();
    rows.push_back(row);
  }
  return rows;
}

TrialSummary summarize_trial(const std::vector<MetricsRow>& rows, int trial, bool aborted) {
  TrialSummary summary;
  summary.trial = trial;
  summary.aborted = aborted;
  std::vector<double> returns;
  for (const auto& row : rows)
    if (row.trial == trial) returns.push_back(row.episode_return);
  summary.episodes_completed = static_cast<int>(returns.size());
  summary.window = std::min<int>(100, summary.episodes_completed);
  if (summary.window > 0) {
    double total = 0.0;
    for (int i = summary.episodes_completed - summary.window; i < summary.episodes_completed; ++i)
      total += returns[static_cast<std::size_t>(i)];
    summary.final_window_mean = total / summary.window;
  }
  return summary;
}

RunSummary summarize_run(const std::vector<TrialSummary>& trials) {
  RunSummary run;
  run.trials = trials;
  if (trials.empty()) return run;
  double total = 0.0;
  for (const auto& t : trials) total += t.final_window_mean;
  run.mean_final_return = total / static_cast<double>(trials.size());
  double var = 0.0;
  for (const auto& t : trials) {
    const double d = t.final_window_mean - run.mean_final_return;
    var += d * d;
  }
  run.std_final_return = std::sqrt(var / static_cast<double>(trials.size()));
  return run;
}

}  // namespace dvqn
