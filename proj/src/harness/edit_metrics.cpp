#include "relprobe/harness/edit_metrics.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>

#include "relprobe/error.hpp"
#include "relprobe/harness/tsv.hpp"

namespace relprobe::harness {

namespace {

struct TagCount {
  std::size_t correct = 0;
  std::size_t total = 0;
  std::set<std::string> prompts;
};

using Cell = std::array<TagCount, kQueryTagCount>;

std::string cell_name(std::size_t edit, std::size_t layer) {
  return "edit " + std::to_string(edit) + " at layer " + std::to_string(layer);
}

}  // namespace

std::string_view to_string(QueryTag t) {
  switch (t) {
    case QueryTag::edit_target: return "edit_target";
    case QueryTag::reverse: return "reverse";
    case QueryTag::child: return "child";
    case QueryTag::parent: return "parent";
    case QueryTag::locality_family: return "locality_family";
    case QueryTag::locality_other: return "locality_other";
  }
  return "unknown";
}

std::optional<QueryTag> parse_query_tag(std::string_view s) {
  for (QueryTag t : kAllQueryTags) {
    if (to_string(t) == s) return t;
  }
  return std::nullopt;
}

std::vector<PredictionRecord> read_prediction_log(const std::filesystem::path& file) {
  const TsvTable t = read_tsv(
      file, {"edit_id", "edited_layer", "query_tag", "prompt", "expected", "generated"});
  std::vector<PredictionRecord> out;
  out.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    const auto tag = parse_query_tag(row[2]);
    if (!tag) throw Error(ErrorCategory::format, t.where(i) + ": unknown query tag '" + row[2] + "'");
    out.push_back({parse_index(row[0], t, i), parse_index(row[1], t, i), *tag, row[3], row[4],
                   row[5]});
  }
  return out;
}

std::string normalize_whitespace(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += c;
  }
  return out;
}

bool exact_match(std::string_view generated, std::string_view expected) {
  return normalize_whitespace(generated) == normalize_whitespace(expected);
}

EditReport compute_edit_metrics(const std::vector<PredictionRecord>& log) {
  if (log.empty()) throw Error(ErrorCategory::validation, "prediction log is empty");
  std::map<std::pair<std::size_t, std::size_t>, Cell> cells;  // (layer, edit)
  std::set<std::size_t> edits;
  std::set<std::size_t> layers;
  for (const PredictionRecord& r : log) {
    TagCount& tc = cells[{r.edited_layer, r.edit_id}][static_cast<std::size_t>(r.tag)];
    if (!tc.prompts.insert(r.prompt).second) {
      throw Error(ErrorCategory::validation,
                  cell_name(r.edit_id, r.edited_layer) + " repeats the " +
                      std::string(to_string(r.tag)) + " prompt '" + r.prompt + "'");
    }
    ++tc.total;
    if (exact_match(r.generated, r.expected)) ++tc.correct;
    edits.insert(r.edit_id);
    layers.insert(r.edited_layer);
  }

  EditReport report;
  for (std::size_t layer : layers) {
    std::array<double, kQueryTagCount> sums{};
    for (std::size_t edit : edits) {
      const auto it = cells.find({layer, edit});
      if (it == cells.end()) {
        throw Error(ErrorCategory::validation,
                    "prediction log has no records for " + cell_name(edit, layer) +
                        " although other edits were run there");
      }
      for (QueryTag t : kAllQueryTags) {
        const TagCount& tc = it->second[static_cast<std::size_t>(t)];
        if (tc.total == 0) {
          throw Error(ErrorCategory::validation, cell_name(edit, layer) + " has no " +
                                                     std::string(to_string(t)) + " records");
        }
        sums[static_cast<std::size_t>(t)] +=
            static_cast<double>(tc.correct) / static_cast<double>(tc.total);
      }
    }
    const auto n = static_cast<double>(edits.size());
    auto mean = [&](QueryTag t) { return sums[static_cast<std::size_t>(t)] / n; };
    EditLayerMetrics m;
    m.edited_layer = layer;
    m.n_edits = edits.size();
    m.edit_success = mean(QueryTag::edit_target);
    m.logical_generalization_reverse = mean(QueryTag::reverse);
    m.logical_generalization_children = mean(QueryTag::child);
    m.logical_generalization_parents = mean(QueryTag::parent);
    m.locality_in_family = mean(QueryTag::locality_family);
    m.locality_other_families = mean(QueryTag::locality_other);
    m.logical_generalization = (m.logical_generalization_reverse +
                                m.logical_generalization_children +
                                m.logical_generalization_parents) /
                               3.0;
    report.layers.push_back(m);
  }
  return report;
}

std::string format_edit_report(const EditReport& report) {
  std::ostringstream out;
  out << "edited_layer\tn_edits\tedit_success\tlogical_generalization_reverse\t"
         "logical_generalization_children\tlogical_generalization_parents\tlocality_in_family\t"
         "locality_other_families\tlogical_generalization\n";
  for (const EditLayerMetrics& m : report.layers) {
    out << m.edited_layer << '\t' << m.n_edits;
    for (double v : {m.edit_success, m.logical_generalization_reverse,
                     m.logical_generalization_children, m.logical_generalization_parents,
                     m.locality_in_family, m.locality_other_families, m.logical_generalization}) {
      out << '\t' << format_fixed(v);
    }
    out << '\n';
  }
  return out.str();
}

EditReport read_edit_report(const std::filesystem::path& file) {
  const TsvTable t = read_tsv(
      file, {"edited_layer", "n_edits", "edit_success", "logical_generalization_reverse",
             "logical_generalization_children", "logical_generalization_parents",
             "locality_in_family", "locality_other_families", "logical_generalization"});
  EditReport report;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    EditLayerMetrics m;
    m.edited_layer = parse_index(row[0], t, i);
    m.n_edits = parse_index(row[1], t, i);
    double* fields[] = {&m.edit_success,
                        &m.logical_generalization_reverse,
                        &m.logical_generalization_children,
                        &m.logical_generalization_parents,
                        &m.locality_in_family,
                        &m.locality_other_families,
                        &m.logical_generalization};
    for (std::size_t k = 0; k < 7; ++k) {
      *fields[k] = parse_number(row[k + 2], t, i);
      if (*fields[k] < 0.0 || *fields[k] > 1.0) {
        throw Error(ErrorCategory::format, t.where(i) + ": " + t.header[k + 2] + " outside [0, 1]");
      }
    }
    report.layers.push_back(m);
  }
  return report;
}

double best_logical_generalization(const EditReport& report) {
  if (report.layers.empty()) throw Error(ErrorCategory::validation, "edit report has no layers");
  double best = report.layers.front().logical_generalization;
  for (const EditLayerMetrics& m : report.layers) best = std::max(best, m.logical_generalization);
  return best;
}

}  // namespace relprobe::harness
