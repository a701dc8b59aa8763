#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace relprobe::harness {

enum class QueryTag { edit_target, reverse, child, parent, locality_family, locality_other };

inline constexpr std::size_t kQueryTagCount = 6;
inline constexpr std::array<QueryTag, kQueryTagCount> kAllQueryTags = {
    QueryTag::edit_target, QueryTag::reverse,         QueryTag::child,
    QueryTag::parent,      QueryTag::locality_family, QueryTag::locality_other};

std::string_view to_string(QueryTag t);
std::optional<QueryTag> parse_query_tag(std::string_view s);

/// One line of a prediction log.
struct PredictionRecord {
  std::size_t edit_id = 0;
  std::size_t edited_layer = 0;
  QueryTag tag = QueryTag::edit_target;
  std::string prompt;
  std::string expected;
  std::string generated;
};

/// Header: edit_id edited_layer query_tag prompt expected generated.
std::vector<PredictionRecord> read_prediction_log(const std::filesystem::path& file);

/// Trims and collapses runs of whitespace to one space.
std::string normalize_whitespace(std::string_view s);
bool exact_match(std::string_view generated, std::string_view expected);

/// Metrics for one edited layer, each the mean over edits of the per-edit
/// fraction of correct completions for that tag.
struct EditLayerMetrics {
  std::size_t edited_layer = 0;
  std::size_t n_edits = 0;
  double edit_success = 0.0;
  double logical_generalization_reverse = 0.0;
  double logical_generalization_children = 0.0;
  double logical_generalization_parents = 0.0;
  double locality_in_family = 0.0;
  double locality_other_families = 0.0;
  /// Mean of the reverse, children and parents metrics.
  double logical_generalization = 0.0;
};

struct EditReport {
  std::vector<EditLayerMetrics> layers;  // ascending edited_layer
};

/// Every edit must appear at every layer and carry all six tags there.
/// Throws Error(validation) for a missing tag, an (edit, layer) cell absent
/// from the grid, or a prompt repeated within one cell.
EditReport compute_edit_metrics(const std::vector<PredictionRecord>& log);

std::string format_edit_report(const EditReport& report);
EditReport read_edit_report(const std::filesystem::path& file);

/// Highest aggregate logical generalization over layers.
double best_logical_generalization(const EditReport& report);

}  // namespace relprobe::harness
