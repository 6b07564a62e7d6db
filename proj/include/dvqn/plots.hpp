#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dvqn/metrics.hpp"
#include "dvqn/options.hpp"

namespace dvqn {

// Per-agent mean return vs episode with an across-trial standard-deviation
// band; one series per metrics file, labeled by file stem.
void emit_learning_curve(const std::vector<std::string>& metrics_paths,
                         const std::string& out_path);

// 2-D latent scatter: raw coordinates when d == 2, PCA projection otherwise.
// Circles mark reward >= 0, crosses reward < 0; colors follow cluster ids
// when a model is given.
void emit_latent_scatter(const LatentDataset& dataset, const ClusterModel* model,
                         const std::string& out_path);

}  // namespace dvqn
