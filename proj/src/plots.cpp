#include "dvqn/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "dvqn/errors.hpp"

namespace dvqn {

namespace {

constexpr double kWidth = 840;
constexpr double kHeight = 520;
constexpr double kMarginLeft = 72;
constexpr double kMarginRight = 24;
constexpr double kMarginTop = 28;
constexpr double kMarginBottom = 56;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
constexpr int kPaletteSize = 8;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct Axis {
  double lo = 0, hi = 1;
  double to_px(double v, double px_lo, double px_hi) const {
    if (hi == lo) return (px_lo + px_hi) / 2;
    return px_lo + (v - lo) / (hi - lo) * (px_hi - px_lo);
  }
};

std::vector<double> nice_ticks(double lo, double hi, int want = 6) {
  if (hi <= lo) return {lo};
  const double raw = (hi - lo) / want;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (raw <= m * mag) {
      step = m * mag;
      break;
    }
  }
  std::vector<double> ticks;
  for (double t = std::ceil(lo / step) * step; t <= hi + step * 1e-9; t += step)
    ticks.push_back(std::abs(t) < step * 1e-9 ? 0.0 : t);
  return ticks;
}

class SvgDoc {
 public:
  SvgDoc() {
    body_ += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) +
             "\" height=\"" + num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) + " " +
             num(kHeight) + "\">\n";
    body_ += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  }
  void raw(const std::string& s) { body_ += s; }
  void line(double x1, double y1, double x2, double y2, const std::string& stroke,
            double width = 1.0) {
    body_ += "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" +
             num(y2) + "\" stroke=\"" + stroke + "\" stroke-width=\"" + num(width) + "\"/>\n";
  }
  void text(double x, double y, const std::string& s, int size = 12,
            const std::string& anchor = "start", const std::string& extra = "") {
    body_ += "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-family=\"sans-serif\" " +
             "font-size=\"" + std::to_string(size) + "\" text-anchor=\"" + anchor + "\"" + extra +
             ">" + s + "</text>\n";
  }
  void save(const std::string& path) {
    body_ += "</svg>\n";
    if (const auto parent = std::filesystem::path(path).parent_path(); !parent.empty())
      std::filesystem::create_directories(parent);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("plot: cannot open " + path);
    out << body_;
  }

 private:
  std::string body_;
};

void draw_axes(SvgDoc& doc, const Axis& x, const Axis& y, const std::string& x_label,
               const std::string& y_label) {
  const double px_lo = kMarginLeft, px_hi = kWidth - kMarginRight;
  const double py_lo = kHeight - kMarginBottom, py_hi = kMarginTop;
  doc.line(px_lo, py_lo, px_hi, py_lo, "#333", 1.2);
  doc.line(px_lo, py_lo, px_lo, py_hi, "#333", 1.2);
  for (double t : nice_ticks(x.lo, x.hi)) {
    const double px = x.to_px(t, px_lo, px_hi);
    doc.line(px, py_lo, px, py_lo + 5, "#333");
    doc.text(px, py_lo + 20, num(t), 11, "middle");
  }
  for (double t : nice_ticks(y.lo, y.hi)) {
    const double py = y.to_px(t, py_lo, py_hi);
    doc.line(px_lo - 5, py, px_lo, py, "#333");
    doc.text(px_lo - 8, py + 4, num(t), 11, "end");
    doc.line(px_lo, py, px_hi, py, "#eee");
  }
  doc.text((px_lo + px_hi) / 2, kHeight - 16, x_label, 13, "middle");
  doc.text(16, (py_lo + py_hi) / 2, y_label, 13, "middle",
           " transform=\"rotate(-90 16 " + num((py_lo + py_hi) / 2) + ")\"");
}

std::string series_name(const std::string& path) {
  std::filesystem::path p(path);
  auto parent = p.parent_path().filename().string();
  auto stem = p.stem().string();
  return parent.empty() || stem != "metrics" ? stem : parent;
}

}  // namespace

void emit_learning_curve(const std::vector<std::string>& metrics_paths,
                         const std::string& out_path) {
  if (metrics_paths.empty()) throw UsageError("learning curve: no input files");
  struct Series {
    std::string name;
    std::vector<double> mean, sd;
  };
  std::vector<Series> series;
  double y_lo = 0, y_hi = 1;
  std::size_t max_episodes = 0;
  bool first_point = true;
  for (const auto& path : metrics_paths) {
    const auto rows = read_metrics_csv(path);
    if (rows.empty()) throw UsageError("learning curve: empty metrics file " + path);
    std::map<int, std::vector<double>> by_episode;
    for (const auto& row : rows) by_episode[row.episode].push_back(row.episode_return);
    Series s;
    s.name = series_name(path);
    for (const auto& [episode, returns] : by_episode) {
      double mean = 0;
      for (double r : returns) mean += r;
      mean /= static_cast<double>(returns.size());
      double var = 0;
      for (double r : returns) var += (r - mean) * (r - mean);
      const double sd = std::sqrt(var / static_cast<double>(returns.size()));
      s.mean.push_back(mean);
      s.sd.push_back(sd);
      if (first_point) {
        y_lo = mean - sd;
        y_hi = mean + sd;
        first_point = false;
      } else {
        y_lo = std::min(y_lo, mean - sd);
        y_hi = std::max(y_hi, mean + sd);
      }
    }
    max_episodes = std::max(max_episodes, s.mean.size());
    series.push_back(std::move(s));
  }
  if (y_hi == y_lo) y_hi = y_lo + 1;

  SvgDoc doc;
  Axis x{0, static_cast<double>(max_episodes > 1 ? max_episodes - 1 : 1)};
  Axis y{y_lo, y_hi};
  draw_axes(doc, x, y, "episode", "return");
  const double px_lo = kMarginLeft, px_hi = kWidth - kMarginRight;
  const double py_lo = kHeight - kMarginBottom, py_hi = kMarginTop;

  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const std::string color = kPalette[si % kPaletteSize];
    std::string band = "<polygon fill=\"" + color + "\" fill-opacity=\"0.15\" stroke=\"none\" points=\"";
    for (std::size_t i = 0; i < s.mean.size(); ++i)
      band += num(x.to_px(static_cast<double>(i), px_lo, px_hi)) + "," +
              num(y.to_px(s.mean[i] + s.sd[i], py_lo, py_hi)) + " ";
    for (std::size_t i = s.mean.size(); i-- > 0;)
      band += num(x.to_px(static_cast<double>(i), px_lo, px_hi)) + "," +
              num(y.to_px(s.mean[i] - s.sd[i], py_lo, py_hi)) + " ";
    band += "\"/>\n";
    doc.raw(band);
    std::string poly = "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.6\" points=\"";
    for (std::size_t i = 0; i < s.mean.size(); ++i)
      poly += num(x.to_px(static_cast<double>(i), px_lo, px_hi)) + "," +
              num(y.to_px(s.mean[i], py_lo, py_hi)) + " ";
    poly += "\"/>\n";
    doc.raw(poly);
    const double ly = kMarginTop + 16 + 18 * static_cast<double>(si);
    doc.line(px_hi - 150, ly - 4, px_hi - 120, ly - 4, color, 2.5);
    doc.text(px_hi - 112, ly, s.name, 12);
  }
  doc.save(out_path);
}

void emit_latent_scatter(const LatentDataset& dataset, const ClusterModel* model,
                         const std::string& out_path) {
  if (dataset.records.empty()) throw UsageError("scatter: empty dataset");
  Matrix points;
  if (dataset.latent_dim == 2) {
    points.resize(static_cast<Eigen::Index>(dataset.records.size()), 2);
    for (std::size_t i = 0; i < dataset.records.size(); ++i)
      points.row(static_cast<Eigen::Index>(i)) = dataset.records[i].mu.transpose();
  } else {
    points = pca_project(dataset).points;
  }

  Axis x{points.col(0).minCoeff(), points.col(0).maxCoeff()};
  Axis y{points.col(1).minCoeff(), points.col(1).maxCoeff()};
  if (x.hi == x.lo) x.hi = x.lo + 1;
  if (y.hi == y.lo) y.hi = y.lo + 1;
  const double x_pad = (x.hi - x.lo) * 0.05, y_pad = (y.hi - y.lo) * 0.05;
  x.lo -= x_pad;
  x.hi += x_pad;
  y.lo -= y_pad;
  y.hi += y_pad;

  SvgDoc doc;
  const std::string x_label = dataset.latent_dim == 2 ? "z1" : "pc1";
  const std::string y_label = dataset.latent_dim == 2 ? "z2" : "pc2";
  draw_axes(doc, x, y, x_label, y_label);
  const double px_lo = kMarginLeft, px_hi = kWidth - kMarginRight;
  const double py_lo = kHeight - kMarginBottom, py_hi = kMarginTop;

  for (std::size_t i = 0; i < dataset.records.size(); ++i) {
    const double px = x.to_px(points(static_cast<Eigen::Index>(i), 0), px_lo, px_hi);
    const double py = y.to_px(points(static_cast<Eigen::Index>(i), 1), py_lo, py_hi);
    std::string color = "#1f77b4";
    if (model) color = kPalette[model->assignment[i] % kPaletteSize];
    if (dataset.records[i].reward >= 0.0) {
      doc.raw("<circle cx=\"" + num(px) + "\" cy=\"" + num(py) +
              "\" r=\"2.4\" fill=\"" + color + "\" fill-opacity=\"0.7\"/>\n");
    } else {
      doc.line(px - 2.6, py - 2.6, px + 2.6, py + 2.6, color, 1.2);
      doc.line(px - 2.6, py + 2.6, px + 2.6, py - 2.6, color, 1.2);
    }
  }

  double ly = kMarginTop + 16;
  if (model) {
    for (int c = 0; c < model->k; ++c) {
      const std::string color = kPalette[c % kPaletteSize];
      doc.raw("<circle cx=\"" + num(px_hi - 140) + "\" cy=\"" + num(ly - 4) +
              "\" r=\"4\" fill=\"" + color + "\"/>\n");
      doc.text(px_hi - 128, ly, "cluster " + std::to_string(c), 12);
      ly += 18;
    }
  }
  doc.text(px_hi - 140, ly, "o reward &#8805; 0", 12);
  ly += 18;
  doc.text(px_hi - 140, ly, "x reward &lt; 0", 12);
  doc.save(out_path);
}

}  // namespace dvqn
