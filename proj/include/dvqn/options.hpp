#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dvqn/agent.hpp"
#include "dvqn/env.hpp"
#include "dvqn/nn.hpp"
#include "dvqn/rng.hpp"

namespace dvqn {

struct EmbeddingRecord {
  Vector mu;
  Vector q;
  double reward = 0.0;
  bool done = false;
  int episode = 0;
  int step = 0;
  int env_label = -1;
};

struct LatentDataset {
  std::vector<EmbeddingRecord> records;
  int latent_dim = 0;
  std::string env_id;
  std::string checkpoint_digest;
  std::uint64_t seed = 0;
};

// Deterministic-mode rollouts of a trained DVQN; one record per visited
// decision state carrying the reward received on the step taken from it.
LatentDataset collect_embeddings(const LoadedAgent& agent, Environment& env, int episodes,
                                 Rng& rng);

struct ClusterModel {
  int k = 0;
  Matrix centroids;  // k x d
  std::vector<int> assignment;
  double inertia = 0.0;
};

// Best of `restarts` k-means++ seeded Lloyd runs; ties on inertia go to the
// lowest restart index, distance ties to the lowest centroid index. Empty
// clusters are repaired by stealing the point farthest from its centroid.
ClusterModel kmeans(const LatentDataset& dataset, int k, Rng& rng, int restarts = 20,
                    int max_iter = 300, double tol = 1e-8);

// Mean over records of (b - a) / max(a, b); singletons contribute 0.
double silhouette(const LatentDataset& dataset, const ClusterModel& model);

// k in [k_min, k_max] maximizing silhouette; ties to the smaller k.
int choose_k(const LatentDataset& dataset, Rng& rng, int k_min = 2, int k_max = 6);

struct PcaResult {
  Matrix points;           // n x 2
  Vector explained_ratio;  // length 2, non-increasing
};

// Mean-center, Jacobi eigendecomposition of the covariance, project onto the
// top-2 eigenvectors. d == 2 inputs pass through with centering only.
PcaResult pca_project(const LatentDataset& dataset, int target_dim = 2);

// Jacobi rotation eigendecomposition of a symmetric matrix; eigenvalues
// descending, eigenvectors as columns, each with its largest-magnitude
// component made positive.
void jacobi_eigen(const Matrix& symmetric, Vector& eigenvalues, Matrix& eigenvectors,
                  double off_diag_tol = 1e-12, int max_sweeps = 100);

struct OptionSpec {
  int id = 0;
  Vector centroid;
  int member_count = 0;
  std::map<int, int> label_histogram;
  // Initiation: nearest centroid == id. Termination: nearest centroid != id
  // or episode end.
};

std::vector<OptionSpec> derive_options(const ClusterModel& model, const LatentDataset& dataset);
int assign_option(const std::vector<OptionSpec>& specs, const Vector& mu);

// Weighted mean over clusters of the majority env_label fraction.
double label_purity(const LatentDataset& dataset, const ClusterModel& model);

// ---- Files ----

void save_dataset(const std::string& path, const LatentDataset& dataset);
LatentDataset load_dataset(const std::string& path);

// Versioned JSON document with one record per option plus dataset metadata.
void export_options(const std::string& path, const std::vector<OptionSpec>& specs,
                    const ClusterModel& model, const LatentDataset& dataset,
                    double silhouette_score, double purity);

}  // namespace dvqn
