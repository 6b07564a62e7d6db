#include "dvqn/options.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "dvqn/errors.hpp"

namespace dvqn {

using nlohmann::json;

LatentDataset collect_embeddings(const LoadedAgent& agent, Environment& env, int episodes,
                                 Rng& rng) {
  if (agent.kind != AgentKind::kDvqn)
    throw UsageError("collect_embeddings: checkpoint is not a dvqn agent (baselines have no latent)");
  if (episodes <= 0) throw UsageError("collect_embeddings: episodes must be positive");

  LatentDataset dataset;
  dataset.latent_dim = agent.config.latent_dim;
  dataset.env_id = env.id();
  char digest[32];
  std::snprintf(digest, sizeof(digest), "%016llx",
                static_cast<unsigned long long>(agent.file_digest));
  dataset.checkpoint_digest = digest;

  for (int episode = 0; episode < episodes; ++episode) {
    Vector obs = env.reset(rng);
    bool done = false;
    int step = 0;
    while (!done) {
      EmbeddingRecord record;
      const GaussianLatent latent = agent.dvqn->encode(obs);
      record.mu = latent.mu;
      record.q = agent.dvqn->q_values(latent.mu);
      record.env_label = env.state_label();
      record.episode = episode;
      record.step = step;
      const int action = argmax_lowest(record.q);
      const StepResult result = env.step(action);
      record.reward = result.reward;
      record.done = result.done;
      dataset.records.push_back(std::move(record));
      obs = result.observation;
      done = result.done;
      ++step;
    }
  }
  return dataset;
}

namespace {

double sq_dist(const Vector& a, const Vector& b) { return (a - b).squaredNorm(); }

int nearest_centroid(const Matrix& centroids, const Vector& point) {
  int best = 0;
  double best_d = (centroids.row(0).transpose() - point).squaredNorm();
  for (int c = 1; c < centroids.rows(); ++c) {
    const double d = (centroids.row(c).transpose() - point).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

struct LloydResult {
  Matrix centroids;
  std::vector<int> assignment;
  double inertia = 0.0;
};

LloydResult lloyd(const std::vector<Vector>& points, int k, Rng& rng, int max_iter, double tol) {
  const int n = static_cast<int>(points.size());
  const int d = static_cast<int>(points[0].size());

  // k-means++ seeding.
  Matrix centroids(k, d);
  centroids.row(0) = points[static_cast<std::size_t>(rng.uniform_int(n))].transpose();
  std::vector<double> min_d(static_cast<std::size_t>(n));
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (int j = 0; j < c; ++j)
        best = std::min(best, (centroids.row(j).transpose() - points[static_cast<std::size_t>(i)])
                                  .squaredNorm());
      min_d[static_cast<std::size_t>(i)] = best;
      total += best;
    }
    int pick = n - 1;
    if (total > 0.0) {
      const double r = rng.uniform01() * total;
      double cum = 0.0;
      for (int i = 0; i < n; ++i) {
        cum += min_d[static_cast<std::size_t>(i)];
        if (r < cum) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.uniform_int(n);
    }
    centroids.row(c) = points[static_cast<std::size_t>(pick)].transpose();
  }

  LloydResult result;
  result.assignment.assign(static_cast<std::size_t>(n), 0);
  double prev_inertia = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < max_iter; ++iter) {
    // Assignment step (ties to the lowest centroid index).
    double inertia = 0.0;
    for (int i = 0; i < n; ++i) {
      const int c = nearest_centroid(centroids, points[static_cast<std::size_t>(i)]);
      result.assignment[static_cast<std::size_t>(i)] = c;
      inertia += (centroids.row(c).transpose() - points[static_cast<std::size_t>(i)]).squaredNorm();
    }
    // Repair empty clusters with the point farthest from its centroid.
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (int a : result.assignment) ++counts[static_cast<std::size_t>(a)];
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) continue;
      int farthest = -1;
      double far_d = -1.0;
      for (int i = 0; i < n; ++i) {
        const int a = result.assignment[static_cast<std::size_t>(i)];
        if (counts[static_cast<std::size_t>(a)] <= 1) continue;
        const double dd =
            (centroids.row(a).transpose() - points[static_cast<std::size_t>(i)]).squaredNorm();
        if (dd > far_d) {
          far_d = dd;
          farthest = i;
        }
      }
      if (farthest < 0) continue;  // all nonempty clusters are singletons
      --counts[static_cast<std::size_t>(result.assignment[static_cast<std::size_t>(farthest)])];
      result.assignment[static_cast<std::size_t>(farthest)] = c;
      ++counts[static_cast<std::size_t>(c)];
      centroids.row(c) = points[static_cast<std::size_t>(farthest)].transpose();
      inertia = 0.0;
      for (int i = 0; i < n; ++i)
        inertia += (centroids.row(result.assignment[static_cast<std::size_t>(i)]).transpose() -
                    points[static_cast<std::size_t>(i)])
                       .squaredNorm();
    }
    if (inertia > prev_inertia + 1e-9)
      throw NumericalError("kmeans: inertia increased across Lloyd iterations");
    prev_inertia = inertia;
    result.inertia = inertia;

    // Update step.
    Matrix next = Matrix::Zero(k, d);
    std::vector<int> sizes(static_cast<std::size_t>(k), 0);
    for (int i = 0; i < n; ++i) {
      next.row(result.assignment[static_cast<std::size_t>(i)]) +=
          points[static_cast<std::size_t>(i)].transpose();
      ++sizes[static_cast<std::size_t>(result.assignment[static_cast<std::size_t>(i)])];
    }
    double movement = 0.0;
    for (int c = 0; c < k; ++c) {
      if (sizes[static_cast<std::size_t>(c)] == 0) continue;
      next.row(c) /= static_cast<double>(sizes[static_cast<std::size_t>(c)]);
      movement = std::max(movement, (next.row(c) - centroids.row(c)).norm());
      centroids.row(c) = next.row(c);
    }
    if (movement < tol) break;
  }

  // Final assignment against the last centroids.
  result.inertia = 0.0;
  for (int i = 0; i < n; ++i) {
    const int c = nearest_centroid(centroids, points[static_cast<std::size_t>(i)]);
    result.assignment[static_cast<std::size_t>(i)] = c;
    result.inertia +=
        (centroids.row(c).transpose() - points[static_cast<std::size_t>(i)]).squaredNorm();
  }
  result.centroids = std::move(centroids);
  return result;
}

}  // namespace

ClusterModel kmeans(const LatentDataset& dataset, int k, Rng& rng, int restarts, int max_iter,
                    double tol) {
  const int n = static_cast<int>(dataset.records.size());
  if (k <= 0) throw UsageError("kmeans: k must be positive");
  if (n < k) throw UsageError("kmeans: need at least k records");

  std::vector<Vector> points;
  points.reserve(static_cast<std::size_t>(n));
  for (const auto& rec : dataset.records) points.push_back(rec.mu);

  ClusterModel best;
  double best_inertia = std::numeric_limits<double>::infinity();
  for (int restart = 0; restart < restarts; ++restart) {
    Rng stream = rng.split("kmeans-restart-" + std::to_string(restart));
    LloydResult run = lloyd(points, k, stream, max_iter, tol);
    if (run.inertia < best_inertia) {
      best_inertia = run.inertia;
      best.k = k;
      best.centroids = std::move(run.centroids);
      best.assignment = std::move(run.assignment);
      best.inertia = run.inertia;
    }
  }
  return best;
}

double silhouette(const LatentDataset& dataset, const ClusterModel& model) {
  const int n = static_cast<int>(dataset.records.size());
  if (model.k < 2) throw UsageError("silhouette: requires k >= 2");
  std::vector<int> sizes(static_cast<std::size_t>(model.k), 0);
  for (int a : model.assignment) ++sizes[static_cast<std::size_t>(a)];

  double total = 0.0;
  std::vector<double> mean_dist(static_cast<std::size_t>(model.k));
  for (int i = 0; i < n; ++i) {
    const int own = model.assignment[static_cast<std::size_t>(i)];
    if (sizes[static_cast<std::size_t>(own)] <= 1) continue;  // singleton contributes 0
    std::fill(mean_dist.begin(), mean_dist.end(), 0.0);
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      mean_dist[static_cast<std::size_t>(model.assignment[static_cast<std::size_t>(j)])] +=
          std::sqrt(sq_dist(dataset.records[static_cast<std::size_t>(i)].mu,
                            dataset.records[static_cast<std::size_t>(j)].mu));
    }
    const double a =
        mean_dist[static_cast<std::size_t>(own)] / static_cast<double>(sizes[static_cast<std::size_t>(own)] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (int c = 0; c < model.k; ++c) {
      if (c == own || sizes[static_cast<std::size_t>(c)] == 0) continue;
      b = std::min(b, mean_dist[static_cast<std::size_t>(c)] /
                          static_cast<double>(sizes[static_cast<std::size_t>(c)]));
    }
    if (std::isfinite(b)) total += (b - a) / std::max(a, b);
  }
  return total / static_cast<double>(n);
}

int choose_k(const LatentDataset& dataset, Rng& rng, int k_min, int k_max) {
  if (k_min < 2) throw UsageError("choose_k: k_min must be >= 2");
  int best_k = k_min;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int k = k_min; k <= k_max; ++k) {
    if (static_cast<int>(dataset.records.size()) < k) break;
    Rng stream = rng.split("choose-k-" + std::to_string(k));
    const ClusterModel model = kmeans(dataset, k, stream);
    const double score = silhouette(dataset, model);
    if (score > best_score + 1e-15) {
      best_score = score;
      best_k = k;
    }
  }
  return best_k;
}

void jacobi_eigen(const Matrix& symmetric, Vector& eigenvalues, Matrix& eigenvectors,
                  double off_diag_tol, int max_sweeps) {
  const int d = static_cast<int>(symmetric.rows());
  Matrix a = symmetric;
  Matrix v = Matrix::Identity(d, d);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < d; ++p)
      for (int q = p + 1; q < d; ++q) off = std::max(off, std::abs(a(p, q)));
    if (off < off_diag_tol) break;
    for (int p = 0; p < d; ++p) {
      for (int q = p + 1; q < d; ++q) {
        if (std::abs(a(p, q)) < off_diag_tol) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int i = 0; i < d; ++i) {
          const double aip = a(i, p), aiq = a(i, q);
          a(i, p) = c * aip - s * aiq;
          a(i, q) = s * aip + c * aiq;
        }
        for (int i = 0; i < d; ++i) {
          const double api = a(p, i), aqi = a(q, i);
          a(p, i) = c * api - s * aqi;
          a(q, i) = s * api + c * aqi;
        }
        for (int i = 0; i < d; ++i) {
          const double vip = v(i, p), viq = v(i, q);
          v(i, p) = c * vip - s * viq;
          v(i, q) = s * vip + c * viq;
        }
      }
    }
  }

  std::vector<int> order(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](int lhs, int rhs) { return a(lhs, lhs) > a(rhs, rhs); });
  eigenvalues.resize(d);
  eigenvectors.resize(d, d);
  for (int i = 0; i < d; ++i) {
    const int src = order[static_cast<std::size_t>(i)];
    eigenvalues[i] = a(src, src);
    Vector col = v.col(src);
    int strongest = 0;
    for (int r = 1; r < d; ++r)
      if (std::abs(col[r]) > std::abs(col[strongest])) strongest = r;
    if (col[strongest] < 0.0) col = -col;
    eigenvectors.col(i) = col;
  }
}

PcaResult pca_project(const LatentDataset& dataset, int target_dim) {
  const int n = static_cast<int>(dataset.records.size());
  const int d = dataset.latent_dim;
  if (target_dim != 2) throw UsageError("pca_project: target_dim must be 2");
  if (d < 2) throw UsageError("pca_project: latent dimension must be >= 2");
  if (n == 0) throw UsageError("pca_project: empty dataset");

  Matrix x(n, d);
  for (int i = 0; i < n; ++i)
    x.row(i) = dataset.records[static_cast<std::size_t>(i)].mu.transpose();
  const Eigen::RowVectorXd mean = x.colwise().mean();
  x.rowwise() -= mean;

  const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
  const Matrix cov = x.transpose() * x / denom;
  Vector eigenvalues;
  Matrix eigenvectors;
  jacobi_eigen(cov, eigenvalues, eigenvectors);

  double total_var = 0.0;
  for (int i = 0; i < d; ++i) total_var += std::max(eigenvalues[i], 0.0);
  if (total_var <= 0.0) throw NumericalError("pca_project: zero variance in all dimensions");

  PcaResult result;
  result.explained_ratio.resize(2);
  for (int i = 0; i < 2; ++i)
    result.explained_ratio[i] = std::max(eigenvalues[i], 0.0) / total_var;
  if (d == 2) {
    result.points = x;  // identity pass-through with centering
  } else {
    result.points = x * eigenvectors.leftCols(2);
  }
  return result;
}

std::vector<OptionSpec> derive_options(const ClusterModel& model, const LatentDataset& dataset) {
  if (model.assignment.size() != dataset.records.size())
    throw StructuralError("derive_options: model/dataset size mismatch");
  std::vector<OptionSpec> specs(static_cast<std::size_t>(model.k));
  for (int c = 0; c < model.k; ++c) {
    specs[static_cast<std::size_t>(c)].id = c;
    specs[static_cast<std::size_t>(c)].centroid = model.centroids.row(c).transpose();
  }
  for (std::size_t i = 0; i < dataset.records.size(); ++i) {
    OptionSpec& spec = specs[static_cast<std::size_t>(model.assignment[i])];
    ++spec.member_count;
    const int label = dataset.records[i].env_label;
    if (label >= 0) ++spec.label_histogram[label];
  }
  return specs;
}

int assign_option(const std::vector<OptionSpec>& specs, const Vector& mu) {
  if (specs.empty()) throw UsageError("assign_option: no options");
  int best = 0;
  double best_d = (specs[0].centroid - mu).squaredNorm();
  for (std::size_t i = 1; i < specs.size(); ++i) {
    const double d = (specs[i].centroid - mu).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(i);
    }
  }
  return specs[static_cast<std::size_t>(best)].id;
}

double label_purity(const LatentDataset& dataset, const ClusterModel& model) {
  std::vector<std::map<int, int>> histograms(static_cast<std::size_t>(model.k));
  int labeled = 0;
  for (std::size_t i = 0; i < dataset.records.size(); ++i) {
    const int label = dataset.records[i].env_label;
    if (label < 0) continue;
    ++histograms[static_cast<std::size_t>(model.assignment[i])][label];
    ++labeled;
  }
  if (labeled == 0) throw UsageError("label_purity: dataset has no env labels");
  double weighted = 0.0;
  for (const auto& hist : histograms) {
    int majority = 0;
    for (const auto& [label, count] : hist) majority = std::max(majority, count);
    weighted += static_cast<double>(majority);
  }
  return weighted / static_cast<double>(labeled);
}

// ---- Files ----

namespace {

json vector_to_json(const Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Vector vector_from_json(const json& arr) {
  Vector v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) v[static_cast<Eigen::Index>(i)] = arr[i];
  return v;
}

}  // namespace

void save_dataset(const std::string& path, const LatentDataset& dataset) {
  json doc;
  doc["format"] = "dvqn-latent-dataset";
  doc["version"] = 1;
  doc["latent_dim"] = dataset.latent_dim;
  doc["env"] = dataset.env_id;
  doc["checkpoint_digest"] = dataset.checkpoint_digest;
  doc["seed"] = dataset.seed;
  json records = json::array();
  for (const auto& rec : dataset.records) {
    records.push_back({{"mu", vector_to_json(rec.mu)},
                       {"q", vector_to_json(rec.q)},
                       {"reward", rec.reward},
                       {"done", rec.done},
                       {"episode", rec.episode},
                       {"step", rec.step},
                       {"label", rec.env_label}});
  }
  doc["records"] = std::move(records);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("save_dataset: cannot open " + path);
  out << doc.dump(1, '\t') << "\n";
}

LatentDataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("load_dataset: cannot open " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("load_dataset: bad JSON in " + path + ": " + e.what());
  }
  if (doc.value("format", "") != "dvqn-latent-dataset")
    throw ConfigError("load_dataset: not a latent dataset file");
  LatentDataset dataset;
  dataset.latent_dim = doc.at("latent_dim");
  dataset.env_id = doc.at("env");
  dataset.checkpoint_digest = doc.at("checkpoint_digest");
  dataset.seed = doc.at("seed");
  for (const auto& rec : doc.at("records")) {
    EmbeddingRecord record;
    record.mu = vector_from_json(rec.at("mu"));
    record.q = vector_from_json(rec.at("q"));
    record.reward = rec.at("reward");
    record.done = rec.at("done");
    record.episode = rec.at("episode");
    record.step = rec.at("step");
    record.env_label = rec.at("label");
    dataset.records.push_back(std::move(record));
  }
  return dataset;
}

void export_options(const std::string& path, const std::vector<OptionSpec>& specs,
                    const ClusterModel& model, const LatentDataset& dataset,
                    double silhouette_score, double purity) {
  json doc;
  doc["format"] = "dvqn-options";
  doc["version"] = 1;
  doc["env"] = dataset.env_id;
  doc["checkpoint_digest"] = dataset.checkpoint_digest;
  doc["seed"] = dataset.seed;
  doc["latent_dim"] = dataset.latent_dim;
  doc["record_count"] = dataset.records.size();
  doc["k"] = model.k;
  doc["inertia"] = model.inertia;
  doc["silhouette"] = silhouette_score;
  if (purity >= 0.0) doc["label_purity"] = purity;
  json options = json::array();
  for (const auto& spec : specs) {
    json hist = json::object();
    for (const auto& [label, count] : spec.label_histogram)
      hist[std::to_string(label)] = count;
    options.push_back({{"id", spec.id},
                       {"centroid", vector_to_json(spec.centroid)},
                       {"member_count", spec.member_count},
                       {"label_histogram", std::move(hist)},
                       {"initiation", "nearest-centroid"},
                       {"termination", "centroid-change"}});
  }
  doc["options"] = std::move(options);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("export_options: cannot open " + path);
  out << doc.dump(1, '\t') << "\n";
}

}  // namespace dvqn
