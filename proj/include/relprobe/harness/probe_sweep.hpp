#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "relprobe/io/dump.hpp"
#include "relprobe/probes/algebra.hpp"
#include "relprobe/probes/probes.hpp"

namespace relprobe::harness {

inline constexpr double kTypeValidChance = 1.0 / 3.0;

struct SweepConfig {
  std::size_t fit_families = 125;
  std::size_t eval_families = 125;
  std::vector<double> lambda_grid = probes::default_lambda_grid();
  std::vector<double> beta_grid = probes::default_beta_grid();
  std::vector<std::size_t> layers;  // empty: every layer of the dump
  std::size_t lre_examples = 10;    // Jacobian records per relation and layer
  bool run_lre = true;
  bool run_translational = true;
  bool run_bilinear = true;
  std::size_t threads = 1;
};

/// Families in ascending index: the first fit_families fit, the next
/// eval_families are evaluated.
struct FamilySplit {
  std::vector<std::size_t> fit_families;
  std::vector<std::size_t> eval_families;
  std::vector<std::size_t> fit_rows;
  std::vector<std::size_t> eval_rows;
  std::vector<probes::EvalFact> fit_facts;
  std::vector<probes::EvalFact> eval_facts;
};

/// Throws Error(validation) if fewer than fit + eval families have both
/// embeddings and facts.
FamilySplit split_families(const probes::CandidateIndex& index,
                           std::span<const probes::EvalFact> facts, std::size_t fit_families,
                           std::size_t eval_families);

/// probe is "lre", "lre-fallback", "translational" or "bilinear"; the
/// hyperparameter is beta for lre, lambda for bilinear and absent otherwise.
struct ProbeRow {
  std::string probe;
  std::size_t layer = 0;
  kg::Relation relation = kg::Relation::husband;
  std::optional<double> hyperparameter;
  double accuracy = 0.0;
  std::size_t n_eval = 0;
  double chance_baseline = kTypeValidChance;
};

struct ProbeReport {
  std::string model_id;
  std::size_t fit_families = 0;
  std::size_t eval_families = 0;
  std::vector<ProbeRow> rows;
};

/// One row per (probe, layer, relation, hyperparameter), ordered by layer,
/// then probe, relation and grid position. Layers run on `threads` workers
/// and are assembled in order, so the report does not depend on the
/// thread count.
ProbeReport run_probe_sweep(const io::Dump& dump, std::span<const probes::EvalFact> facts,
                            const SweepConfig& config);

ProbeReport run_probe_sweep(const std::filesystem::path& dump_dir,
                            const std::filesystem::path& facts_file, const SweepConfig& config);

std::string format_probe_report(const ProbeReport& report);
/// Parses the rows written by format_probe_report (model metadata is not
/// stored in the TSV and is left empty).
ProbeReport read_probe_report(const std::filesystem::path& file);

/// Mean over relations of the best-hyperparameter accuracy at one layer.
struct LayerScore {
  std::string probe;
  std::size_t layer = 0;
  double accuracy = 0.0;
};

std::vector<LayerScore> layer_scores(const ProbeReport& report);
/// Highest layer score of `probe`; nullopt if the report has no such rows.
std::optional<LayerScore> best_layer(const ProbeReport& report, const std::string& probe);

/// JSON summary: split sizes, LRE source, per-layer scores and best layers.
std::string format_probe_summary(const ProbeReport& report);

/// Bilinear probe of one layer fit on the split's fit rows.
probes::BilinearProbe fit_layer_bilinear(const io::Dump& dump, const FamilySplit& split,
                                         std::size_t layer, std::span<const double> lambda_grid);

struct AlgebraRow {
  std::string test;        // "transpose" or "composition"
  std::size_t layer = 0;
  std::string expression;  // e.g. "M_husband^T => wife", "M_mother M_husband => father"
  probes::ProductOrder order = probes::ProductOrder::path;
  double lambda = 0.0;
  bool selected = false;   // lambda with the best mean bilinear accuracy at this layer
  double accuracy = 0.0;
  std::size_t n_eval = 0;
};

/// Transpose and composition tests on the evaluation split for every layer
/// and lambda, in both product orders. The selected lambda maximizes the
/// bilinear probe's mean held-out accuracy over relations; ties go to the
/// larger lambda.
std::vector<AlgebraRow> run_algebra_tests(const io::Dump& dump,
                                          std::span<const probes::EvalFact> facts,
                                          const SweepConfig& config);

std::string format_algebra_report(const std::vector<AlgebraRow>& rows);

std::string_view to_string(probes::ProductOrder order);

}  // namespace relprobe::harness
