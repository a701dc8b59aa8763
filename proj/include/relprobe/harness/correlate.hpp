#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace relprobe::harness {

/// Ordinary least squares y ~ slope * x + intercept.
struct LineFit {
  std::size_t n = 0;
  bool degenerate = false;  // x or y has zero variance; R^2 is undefined
  double r_squared = 0.0;
  double slope = 0.0;
  double intercept = 0.0;
};

/// Throws Error(usage) for fewer than two points or mismatched lengths.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

/// One model: best-over-layers bilinear accuracy against best-over-layers
/// aggregate logical generalization.
struct CorrelationPoint {
  std::string model_id;
  double best_bilinear_accuracy = 0.0;
  double best_logical_generalization = 0.0;
};

/// Reads a points file with header "model_id probe_report edit_report";
/// report paths are relative to the points file.
std::vector<CorrelationPoint> load_correlation_points(const std::filesystem::path& file);

LineFit correlate_structure_vs_editing(std::span<const CorrelationPoint> points);

std::string format_correlation(std::span<const CorrelationPoint> points, const LineFit& fit);

}  // namespace relprobe::harness
