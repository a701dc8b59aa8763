#include "relprobe/harness/correlate.hpp"

#include <nlohmann/json.hpp>

#include "relprobe/error.hpp"
#include "relprobe/harness/edit_metrics.hpp"
#include "relprobe/harness/probe_sweep.hpp"
#include "relprobe/harness/tsv.hpp"

namespace relprobe::harness {

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCategory::usage, "x and y lengths differ");
  if (x.size() < 2) throw Error(ErrorCategory::usage, "a line fit needs at least two points");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  LineFit fit;
  fit.n = x.size();
  if (sxx == 0.0 || syy == 0.0) {
    fit.degenerate = true;
    fit.intercept = my;
    return fit;
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = sxy * sxy / (sxx * syy);
  return fit;
}

std::vector<CorrelationPoint> load_correlation_points(const std::filesystem::path& file) {
  const TsvTable t = read_tsv(file, {"model_id", "probe_report", "edit_report"});
  const std::filesystem::path base = file.parent_path();
  std::vector<CorrelationPoint> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    const auto bilinear = best_layer(read_probe_report(base / row[1]), "bilinear");
    if (!bilinear) {
      throw Error(ErrorCategory::validation, t.where(i) + ": " + row[1] + " has no bilinear rows");
    }
    out.push_back({row[0], bilinear->accuracy,
                   best_logical_generalization(read_edit_report(base / row[2]))});
  }
  return out;
}

LineFit correlate_structure_vs_editing(std::span<const CorrelationPoint> points) {
  std::vector<double> x;
  std::vector<double> y;
  for (const CorrelationPoint& p : points) {
    x.push_back(p.best_bilinear_accuracy);
    y.push_back(p.best_logical_generalization);
  }
  return fit_line(x, y);
}

std::string format_correlation(std::span<const CorrelationPoint> points, const LineFit& fit) {
  nlohmann::ordered_json j;
  j["n"] = fit.n;
  j["degenerate"] = fit.degenerate;
  if (fit.degenerate) {
    j["r_squared"] = nullptr;
  } else {
    j["r_squared"] = fit.r_squared;
    j["slope"] = fit.slope;
  }
  j["intercept"] = fit.intercept;
  nlohmann::ordered_json pts = nlohmann::ordered_json::array();
  for (const CorrelationPoint& p : points) {
    pts.push_back({{"model_id", p.model_id},
                   {"best_bilinear_accuracy", p.best_bilinear_accuracy},
                   {"best_logical_generalization", p.best_logical_generalization}});
  }
  j["points"] = pts;
  return j.dump(2) + "\n";
}

}  // namespace relprobe::harness
