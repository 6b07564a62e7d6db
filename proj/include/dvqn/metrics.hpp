#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dvqn {

struct MetricsRow {
  int trial = 0;
  int episode = 0;
  double episode_return = 0.0;
  int steps = 0;
  double recon = 0.0;
  double kl = 0.0;
  double q_loss = 0.0;
  double total_loss = 0.0;
  double epsilon = 0.0;
};

inline constexpr const char* kMetricsHeader =
    "trial,episode,return,steps,recon,kl,q_loss,total_loss,epsilon";

// 17 significant digits, shortest-equivalent not attempted: fixed %.17g so
// files are byte-reproducible. NaN renders as "nan".
std::string format_g17(double value);
std::string format_metrics_row(const MetricsRow& row);

std::vector<MetricsRow> read_metrics_csv(const std::string& path);

struct TrialSummary {
  int trial = 0;
  double final_window_mean = 0.0;
  int window = 0;
  int episodes_completed = 0;
  bool aborted = false;
};

struct RunSummary {
  std::vector<TrialSummary> trials;
  double mean_final_return = 0.0;
  double std_final_return = 0.0;
  double wall_clock_seconds = 0.0;
  std::string config_digest;
};

// Final-window mean over the last min(100, episodes) completed episodes.
TrialSummary summarize_trial(const std::vector<MetricsRow>& rows, int trial, bool aborted);
RunSummary summarize_run(const std::vector<TrialSummary>& trials);

}  // namespace dvqn
