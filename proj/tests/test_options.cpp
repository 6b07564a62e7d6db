#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>

#include "dvqn/errors.hpp"
#include "dvqn/options.hpp"

using namespace dvqn;

namespace {

LatentDataset make_dataset(const std::vector<Vector>& points) {
  LatentDataset dataset;
  dataset.latent_dim = static_cast<int>(points[0].size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    EmbeddingRecord rec;
    rec.mu = points[i];
    rec.q = Vector::Zero(2);
    rec.episode = 0;
    rec.step = static_cast<int>(i);
    dataset.records.push_back(std::move(rec));
  }
  return dataset;
}

Vector v2(double x, double y) {
  Vector v(2);
  v << x, y;
  return v;
}

// Exhaustive minimum inertia over every assignment of n points to k groups.
double brute_force_inertia(const std::vector<Vector>& points, int k) {
  const int n = static_cast<int>(points.size());
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> assign(static_cast<std::size_t>(n), 0);
  const long total = static_cast<long>(std::pow(k, n));
  for (long code = 0; code < total; ++code) {
    long c = code;
    for (int i = 0; i < n; ++i) {
      assign[static_cast<std::size_t>(i)] = static_cast<int>(c % k);
      c /= k;
    }
    double inertia = 0.0;
    for (int cluster = 0; cluster < k; ++cluster) {
      Vector centroid = Vector::Zero(points[0].size());
      int count = 0;
      for (int i = 0; i < n; ++i) {
        if (assign[static_cast<std::size_t>(i)] != cluster) continue;
        centroid += points[static_cast<std::size_t>(i)];
        ++count;
      }
      if (count == 0) continue;
      centroid /= count;
      for (int i = 0; i < n; ++i)
        if (assign[static_cast<std::size_t>(i)] == cluster)
          inertia += (points[static_cast<std::size_t>(i)] - centroid).squaredNorm();
    }
    best = std::min(best, inertia);
  }
  return best;
}

}  // namespace

TEST_CASE("kmeans: two obvious pairs") {
  const std::vector<Vector> points{v2(0, 0), v2(0, 1), v2(10, 0), v2(10, 1)};
  LatentDataset dataset = make_dataset(points);
  Rng rng(5);
  const ClusterModel model = kmeans(dataset, 2, rng);
  CHECK(model.inertia == doctest::Approx(1.0).epsilon(1e-9));
  std::set<std::pair<double, double>> centroids;
  for (int c = 0; c < 2; ++c)
    centroids.insert({model.centroids(c, 0), model.centroids(c, 1)});
  CHECK(centroids.count({0.0, 0.5}) == 1);
  CHECK(centroids.count({10.0, 0.5}) == 1);
  CHECK(model.assignment[0] == model.assignment[1]);
  CHECK(model.assignment[2] == model.assignment[3]);
  CHECK(model.assignment[0] != model.assignment[2]);
}

TEST_CASE("kmeans: k equal to record count gives zero inertia") {
  LatentDataset dataset = make_dataset({v2(1, 1), v2(2, 2), v2(3, 3)});
  Rng rng(6);
  const ClusterModel model = kmeans(dataset, 3, rng);
  CHECK(model.inertia == doctest::Approx(0.0));
}

TEST_CASE("kmeans: duplicated dataset keeps the same centroids") {
  const std::vector<Vector> base{v2(0, 0), v2(0, 1), v2(10, 0), v2(10, 1)};
  std::vector<Vector> doubled = base;
  doubled.insert(doubled.end(), base.begin(), base.end());
  Rng rng_a(7), rng_b(7);
  const ClusterModel m1 = kmeans(make_dataset(base), 2, rng_a);
  const ClusterModel m2 = kmeans(make_dataset(doubled), 2, rng_b);
  std::set<std::pair<double, double>> c1, c2;
  for (int c = 0; c < 2; ++c) {
    c1.insert({m1.centroids(c, 0), m1.centroids(c, 1)});
    c2.insert({m2.centroids(c, 0), m2.centroids(c, 1)});
  }
  CHECK(c1 == c2);
}

TEST_CASE("kmeans: errors on too few records") {
  LatentDataset dataset = make_dataset({v2(0, 0)});
  Rng rng(8);
  CHECK_THROWS_AS(kmeans(dataset, 2, rng), UsageError);
}

TEST_CASE("kmeans matches the brute-force oracle on small random datasets") {
  Rng rng(909);
  for (int round = 0; round < 40; ++round) {
    const int n = 3 + rng.uniform_int(6);  // 3..8 points
    const int k = 2 + rng.uniform_int(2);  // 2..3 clusters
    if (n < k) continue;
    std::vector<Vector> points;
    for (int i = 0; i < n; ++i) points.push_back(v2(rng.uniform(-5, 5), rng.uniform(-5, 5)));
    LatentDataset dataset = make_dataset(points);
    Rng stream = rng.split("round-" + std::to_string(round));
    const ClusterModel model = kmeans(dataset, k, stream);
    const double oracle = brute_force_inertia(points, k);
    INFO("round " << round << " n=" << n << " k=" << k);
    CHECK(model.inertia <= oracle + 1e-9);
    CHECK(model.inertia >= oracle - 1e-9);
  }
}

TEST_CASE("silhouette: tight far-apart pairs and the exact 4-point value") {
  const std::vector<Vector> points{v2(0, 0), v2(0, 1), v2(10, 0), v2(10, 1)};
  LatentDataset dataset = make_dataset(points);
  Rng rng(10);
  const ClusterModel model = kmeans(dataset, 2, rng);
  const double score = silhouette(dataset, model);
  // each point: a = 1, b = (10 + sqrt(101)) / 2
  const double b = (10.0 + std::sqrt(101.0)) / 2.0;
  CHECK(score == doctest::Approx(1.0 - 1.0 / b).epsilon(1e-12));
  CHECK(score > 0.9);
}

TEST_CASE("silhouette requires at least two clusters") {
  LatentDataset dataset = make_dataset({v2(1, 1), v2(1, 1), v2(1, 1)});
  Rng rng(11);
  const ClusterModel model = kmeans(dataset, 1, rng);
  CHECK_THROWS_AS(silhouette(dataset, model), UsageError);
}

TEST_CASE("choose_k finds three well-separated blobs") {
  Rng rng(12);
  std::vector<Vector> points;
  const double centers[3][2] = {{0, 0}, {20, 0}, {0, 20}};
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < 30; ++i)
      points.push_back(
          v2(centers[c][0] + rng.normal() * 0.5, centers[c][1] + rng.normal() * 0.5));
  LatentDataset dataset = make_dataset(points);
  CHECK(choose_k(dataset, rng) == 3);
}

TEST_CASE("pca: rank-1 data explains everything on the first component") {
  std::vector<Vector> points;
  for (int i = -5; i <= 5; ++i) points.push_back(v2(i, i));
  const PcaResult result = pca_project(make_dataset(points));
  CHECK(result.explained_ratio[0] == doctest::Approx(1.0));
  CHECK(result.explained_ratio[1] == doctest::Approx(0.0));
}

TEST_CASE("pca: 2-d input passes through centered with distances preserved") {
  Rng rng(13);
  std::vector<Vector> points;
  for (int i = 0; i < 40; ++i) points.push_back(v2(rng.uniform(-3, 3), rng.uniform(-1, 7)));
  LatentDataset dataset = make_dataset(points);
  const PcaResult result = pca_project(dataset);
  Vector mean = Vector::Zero(2);
  for (const auto& p : points) mean += p;
  mean /= static_cast<double>(points.size());
  for (int i = 0; i < 40; ++i)
    for (int j = i + 1; j < 40; ++j) {
      const double original = (points[static_cast<std::size_t>(i)] -
                               points[static_cast<std::size_t>(j)])
                                  .norm();
      const double projected = (result.points.row(i) - result.points.row(j)).norm();
      CHECK(projected == doctest::Approx(original).epsilon(1e-9));
    }
  CHECK(result.points.colwise().mean().cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("pca: 3-d diagonal variances give 0.9 / 0.1 ratios") {
  // sample variances along axes proportional to 9 : 1 : 0
  std::vector<Vector> points;
  Vector a(3), b(3), c(3), d(3);
  a << 3, 0, 0;
  b << -3, 0, 0;
  c << 0, 1, 0;
  d << 0, -1, 0;
  points = {a, b, c, d};
  LatentDataset dataset;
  dataset.latent_dim = 3;
  for (const auto& p : points) {
    EmbeddingRecord rec;
    rec.mu = p;
    rec.q = Vector::Zero(1);
    dataset.records.push_back(rec);
  }
  const PcaResult result = pca_project(dataset);
  CHECK(result.explained_ratio[0] == doctest::Approx(0.9));
  CHECK(result.explained_ratio[1] == doctest::Approx(0.1));
  CHECK(result.explained_ratio[0] >= result.explained_ratio[1]);
  CHECK(result.explained_ratio.sum() <= 1.0 + 1e-12);
}

TEST_CASE("pca: input order does not change the projection") {
  Rng rng(14);
  std::vector<Vector> points;
  for (int i = 0; i < 25; ++i) {
    Vector p(3);
    p << rng.normal() * 3, rng.normal(), rng.normal() * 0.2;
    points.push_back(p);
  }
  LatentDataset forward;
  forward.latent_dim = 3;
  LatentDataset reversed;
  reversed.latent_dim = 3;
  for (const auto& p : points) {
    EmbeddingRecord rec;
    rec.mu = p;
    rec.q = Vector::Zero(1);
    forward.records.push_back(rec);
  }
  for (auto it = points.rbegin(); it != points.rend(); ++it) {
    EmbeddingRecord rec;
    rec.mu = *it;
    rec.q = Vector::Zero(1);
    reversed.records.push_back(rec);
  }
  const PcaResult f = pca_project(forward);
  const PcaResult r = pca_project(reversed);
  const int n = static_cast<int>(points.size());
  for (int i = 0; i < n; ++i) {
    CHECK(f.points(i, 0) == doctest::Approx(r.points(n - 1 - i, 0)).epsilon(1e-9));
    CHECK(f.points(i, 1) == doctest::Approx(r.points(n - 1 - i, 1)).epsilon(1e-9));
  }
}

TEST_CASE("pca: zero variance everywhere is a degenerate-data error") {
  LatentDataset dataset = make_dataset({v2(1, 2), v2(1, 2), v2(1, 2)});
  CHECK_THROWS_AS(pca_project(dataset), NumericalError);
}

TEST_CASE("derive_options: one spec per cluster, initiation partitions the data") {
  Rng rng(15);
  std::vector<Vector> points;
  for (int i = 0; i < 60; ++i)
    points.push_back(v2(rng.uniform(-5, 5), rng.uniform(-5, 5)));
  LatentDataset dataset = make_dataset(points);
  const ClusterModel model = kmeans(dataset, 3, rng);
  const std::vector<OptionSpec> specs = derive_options(model, dataset);
  REQUIRE(specs.size() == 3);
  int total_members = 0;
  for (const auto& spec : specs) total_members += spec.member_count;
  CHECK(total_members == 60);
  for (std::size_t i = 0; i < dataset.records.size(); ++i)
    CHECK(assign_option(specs, dataset.records[i].mu) == model.assignment[i]);
}

TEST_CASE("termination fires exactly at nearest-centroid changes") {
  Rng rng(16);
  // a two-cluster dataset shaped like one episode drifting between regions
  std::vector<Vector> trajectory;
  for (int i = 0; i < 20; ++i) trajectory.push_back(v2(0 + 0.02 * i, 0.1 * i));
  for (int i = 0; i < 20; ++i) trajectory.push_back(v2(10 - 0.02 * i, 0.1 * i));
  LatentDataset dataset = make_dataset(trajectory);
  const ClusterModel model = kmeans(dataset, 2, rng);
  const std::vector<OptionSpec> specs = derive_options(model, dataset);
  for (std::size_t i = 0; i + 1 < trajectory.size(); ++i) {
    const int here = assign_option(specs, trajectory[i]);
    const int next = assign_option(specs, trajectory[i + 1]);
    const bool terminates = next != here;
    CHECK(terminates == (model.assignment[i + 1] != model.assignment[i]));
  }
}

TEST_CASE("label purity: exact, random, and single-cluster cases") {
  SUBCASE("clusters matching labels give 1.0") {
    std::vector<Vector> points;
    LatentDataset dataset;
    dataset.latent_dim = 2;
    for (int i = 0; i < 40; ++i) {
      EmbeddingRecord rec;
      rec.mu = v2(i < 20 ? 0.0 : 10.0, 0.0);
      rec.q = Vector::Zero(1);
      rec.env_label = i < 20 ? 0 : 1;
      dataset.records.push_back(rec);
    }
    Rng rng(17);
    const ClusterModel model = kmeans(dataset, 2, rng);
    CHECK(label_purity(dataset, model) == doctest::Approx(1.0));
  }

  SUBCASE("random labels over balanced clusters approach 0.5") {
    Rng rng(18);
    LatentDataset dataset;
    dataset.latent_dim = 2;
    for (int i = 0; i < 20000; ++i) {
      EmbeddingRecord rec;
      rec.mu = v2(i % 2 == 0 ? 0.0 : 10.0, rng.uniform(-0.5, 0.5));
      rec.q = Vector::Zero(1);
      rec.env_label = rng.uniform_int(2);
      dataset.records.push_back(rec);
    }
    const ClusterModel model = kmeans(dataset, 2, rng);
    const double purity = label_purity(dataset, model);
    CHECK(purity >= 0.5);
    CHECK(purity < 0.52);
  }

  SUBCASE("one cluster over three equal labels gives one third") {
    LatentDataset dataset;
    dataset.latent_dim = 2;
    for (int i = 0; i < 30; ++i) {
      EmbeddingRecord rec;
      rec.mu = v2(0, 0);
      rec.q = Vector::Zero(1);
      rec.env_label = i % 3;
      dataset.records.push_back(rec);
    }
    Rng rng(19);
    const ClusterModel model = kmeans(dataset, 1, rng);
    CHECK(label_purity(dataset, model) == doctest::Approx(1.0 / 3.0));
  }

  SUBCASE("no labels present is a usage error") {
    LatentDataset dataset = make_dataset({v2(0, 0), v2(1, 1)});
    Rng rng(20);
    const ClusterModel model = kmeans(dataset, 2, rng);
    CHECK_THROWS_AS(label_purity(dataset, model), UsageError);
  }
}

TEST_CASE("dataset JSON round trip") {
  Rng rng(21);
  std::vector<Vector> points{v2(0.25, -1.5), v2(3.0, 2.0)};
  LatentDataset dataset = make_dataset(points);
  dataset.env_id = "cartpole";
  dataset.checkpoint_digest = "0123456789abcdef";
  dataset.seed = 99;
  dataset.records[0].reward = -1.0;
  dataset.records[0].done = true;
  dataset.records[0].env_label = 2;
  save_dataset("dataset_test.json", dataset);
  const LatentDataset loaded = load_dataset("dataset_test.json");
  REQUIRE(loaded.records.size() == 2);
  CHECK(loaded.latent_dim == 2);
  CHECK(loaded.env_id == "cartpole");
  CHECK(loaded.checkpoint_digest == "0123456789abcdef");
  CHECK(loaded.seed == 99);
  CHECK(loaded.records[0].mu == dataset.records[0].mu);
  CHECK(loaded.records[0].reward == -1.0);
  CHECK(loaded.records[0].done);
  CHECK(loaded.records[0].env_label == 2);
  std::remove("dataset_test.json");
}

TEST_CASE("options export carries ids, centroids, and rules") {
  Rng rng(22);
  LatentDataset dataset = make_dataset({v2(0, 0), v2(0, 1), v2(9, 0), v2(9, 1)});
  dataset.env_id = "cartpole";
  const ClusterModel model = kmeans(dataset, 2, rng);
  const auto specs = derive_options(model, dataset);
  export_options("options_test.json", specs, model, dataset, 0.9, -1.0);
  std::ifstream in("options_test.json");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(text.find("\"dvqn-options\"") != std::string::npos);
  CHECK(text.find("\"centroid-change\"") != std::string::npos);
  CHECK(text.find("\"nearest-centroid\"") != std::string::npos);
  std::remove("options_test.json");
}
