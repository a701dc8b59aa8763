#include "relprobe/harness/probe_sweep.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <map>
#include <mutex>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>
#include <thread>

#include "relprobe/error.hpp"
#include "relprobe/harness/facts_file.hpp"
#include "relprobe/harness/tsv.hpp"

namespace relprobe::harness {

using Eigen::MatrixXd;
using probes::CandidateIndex;
using probes::CandidateScope;
using probes::EvalFact;
using probes::States;

namespace {

std::vector<std::size_t> sweep_layers(const io::Dump& dump, const SweepConfig& config) {
  if (config.layers.empty()) {
    std::vector<std::size_t> all(dump.layers.size());
    for (std::size_t l = 0; l < all.size(); ++l) all[l] = l;
    return all;
  }
  for (std::size_t l : config.layers) {
    if (l >= dump.layers.size()) {
      throw Error(ErrorCategory::usage, "layer " + std::to_string(l) + " is not in the dump (" +
                                            std::to_string(dump.layers.size()) + " layers)");
    }
  }
  return config.layers;
}

/// Runs job(i) for i in [0, n) on up to `threads` workers. The first
/// exception is rethrown after all workers finish.
template <typename Job>
void parallel_for(std::size_t n, std::size_t threads, const Job& job) {
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(n, 1));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          job(i);
        } catch (...) {
          const std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

MatrixXd gather_rows(const States& states, std::span<const std::size_t> rows) {
  MatrixXd out(static_cast<Eigen::Index>(rows.size()), states.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = states.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

std::map<kg::Relation, MatrixXd> fit_adjacencies(const FamilySplit& split) {
  std::map<kg::Relation, MatrixXd> out;
  for (kg::Relation r : kg::kAllRelations) {
    out.emplace(r, probes::build_adjacency(split.fit_facts, r, split.fit_rows));
  }
  return out;
}

struct LayerContext {
  const io::Dump* dump;
  const CandidateIndex* index;
  const FamilySplit* split;
  const SweepConfig* config;
  States final_objects;  // object-final states of the last layer
};

std::vector<probes::LreExample> jacobian_examples(const LayerContext& ctx, std::size_t layer,
                                                  kg::Relation r) {
  const io::EntityIndex entities(ctx.dump->manifest);
  const std::set<std::size_t> fit(ctx.split->fit_families.begin(), ctx.split->fit_families.end());
  std::vector<probes::LreExample> out;
  for (const io::JacobianRecord& rec : ctx.dump->jacobians) {
    if (out.size() >= ctx.config->lre_examples) break;
    if (rec.entry.layer != layer || rec.entry.relation != r) continue;
    const std::size_t row = entities.row(rec.entry.subject);
    if (!fit.contains(ctx.dump->manifest.entities[row].family)) continue;
    out.push_back({rec.jacobian.cast<double>(), rec.subject_state.cast<double>(),
                   rec.object_final_state.cast<double>()});
  }
  return out;
}

void lre_rows(const LayerContext& ctx, std::size_t layer, const States& subjects,
              std::vector<ProbeRow>& rows) {
  const std::size_t final_layer = ctx.dump->layers.size() - 1;
  for (kg::Relation r : kg::kAllRelations) {
    const std::vector<EvalFact> eval = probes::facts_of(ctx.split->eval_facts, r);
    if (ctx.dump->manifest.has_jacobians) {
      const std::vector<probes::LreExample> examples = jacobian_examples(ctx, layer, r);
      if (examples.empty()) {
        throw Error(ErrorCategory::validation,
                    "no Jacobian records for " + std::string(kg::to_string(r)) + " at layer " +
                        std::to_string(layer) + " in the fit split");
      }
      for (double beta : ctx.config->beta_grid) {
        const probes::LreScorer scorer(subjects, ctx.final_objects,
                                       probes::fit_lre(examples, beta, layer, final_layer));
        const auto acc = probes::evaluate(scorer, eval, *ctx.index, CandidateScope::family_members);
        rows.push_back({"lre", layer, r, beta, acc.value(), acc.total, kTypeValidChance});
      }
      continue;
    }
    const std::vector<EvalFact> fit = probes::facts_of(ctx.split->fit_facts, r);
    std::vector<std::size_t> s_rows;
    std::vector<std::size_t> o_rows;
    for (const EvalFact& f : fit) {
      s_rows.push_back(f.subject_row);
      o_rows.push_back(f.object_row);
    }
    const probes::LreScorer scorer(
        subjects, ctx.final_objects,
        probes::fit_lre_least_squares(gather_rows(subjects, s_rows),
                                      gather_rows(ctx.final_objects, o_rows), layer, final_layer));
    const auto acc = probes::evaluate(scorer, eval, *ctx.index, CandidateScope::family_members);
    rows.push_back({"lre-fallback", layer, r, std::nullopt, acc.value(), acc.total,
                    kTypeValidChance});
  }
}

void translational_rows(const LayerContext& ctx, std::size_t layer, const States& subjects,
                        std::vector<ProbeRow>& rows) {
  for (kg::Relation r : kg::kAllRelations) {
    std::vector<std::size_t> s_rows;
    std::vector<std::size_t> o_rows;
    for (const EvalFact& f : probes::facts_of(ctx.split->fit_facts, r)) {
      s_rows.push_back(f.subject_row);
      o_rows.push_back(f.object_row);
    }
    const probes::TranslationScorer scorer(
        subjects, probes::fit_translation(gather_rows(subjects, s_rows),
                                          gather_rows(subjects, o_rows), layer));
    const auto acc = probes::evaluate(scorer, probes::facts_of(ctx.split->eval_facts, r),
                                      *ctx.index, CandidateScope::family_members);
    rows.push_back({"translational", layer, r, std::nullopt, acc.value(), acc.total,
                    kTypeValidChance});
  }
}

void bilinear_rows(const LayerContext& ctx, std::size_t layer, const States& subjects,
                   std::vector<ProbeRow>& rows) {
  const probes::BilinearProbe probe =
      fit_layer_bilinear(*ctx.dump, *ctx.split, layer, ctx.config->lambda_grid);
  for (kg::Relation r : kg::kAllRelations) {
    const std::vector<EvalFact> eval = probes::facts_of(ctx.split->eval_facts, r);
    for (std::size_t k = 0; k < probe.lambda_grid.size(); ++k) {
      const probes::BilinearScorer scorer(subjects, probe.matrix(r, k));
      const auto acc = probes::evaluate(scorer, eval, *ctx.index, CandidateScope::family_members);
      rows.push_back({"bilinear", layer, r, probe.lambda_grid[k], acc.value(), acc.total,
                      kTypeValidChance});
    }
  }
}

std::string hyper_text(const std::optional<double>& h) {
  return h ? format_general(*h, 6) : std::string("-");
}

}  // namespace

FamilySplit split_families(const CandidateIndex& index, std::span<const EvalFact> facts,
                           std::size_t fit_families, std::size_t eval_families) {
  if (fit_families == 0 || eval_families == 0) {
    throw Error(ErrorCategory::usage, "fit and evaluation splits need at least one family each");
  }
  std::set<std::size_t> with_facts;
  for (const EvalFact& f : facts) with_facts.insert(f.family);
  std::vector<std::size_t> usable;
  for (std::size_t fam : index.families()) {
    if (with_facts.contains(fam)) usable.push_back(fam);
  }
  if (usable.size() < fit_families + eval_families) {
    throw Error(ErrorCategory::validation,
                "split needs " + std::to_string(fit_families + eval_families) +
                    " families with embeddings and facts, found " + std::to_string(usable.size()));
  }
  FamilySplit split;
  split.fit_families.assign(usable.begin(), usable.begin() + static_cast<std::ptrdiff_t>(fit_families));
  split.eval_families.assign(usable.begin() + static_cast<std::ptrdiff_t>(fit_families),
                             usable.begin() + static_cast<std::ptrdiff_t>(fit_families + eval_families));
  for (std::size_t fam : split.fit_families) {
    const auto m = index.members(fam);
    split.fit_rows.insert(split.fit_rows.end(), m.begin(), m.end());
  }
  for (std::size_t fam : split.eval_families) {
    const auto m = index.members(fam);
    split.eval_rows.insert(split.eval_rows.end(), m.begin(), m.end());
  }
  const std::set<std::size_t> fit(split.fit_families.begin(), split.fit_families.end());
  const std::set<std::size_t> eval(split.eval_families.begin(), split.eval_families.end());
  for (const EvalFact& f : facts) {
    if (fit.contains(f.family)) split.fit_facts.push_back(f);
    if (eval.contains(f.family)) split.eval_facts.push_back(f);
  }
  probes::require_disjoint(split.fit_rows, split.eval_rows);
  return split;
}

probes::BilinearProbe fit_layer_bilinear(const io::Dump& dump, const FamilySplit& split,
                                         std::size_t layer, std::span<const double> lambda_grid) {
  const States subjects = probes::to_states(dump.layers.at(layer).subject_states);
  return probes::fit_bilinear(gather_rows(subjects, split.fit_rows), fit_adjacencies(split),
                              lambda_grid, layer);
}

ProbeReport run_probe_sweep(const io::Dump& dump, std::span<const EvalFact> facts,
                            const SweepConfig& config) {
  if (dump.layers.empty()) throw Error(ErrorCategory::validation, "dump has no layers");
  const std::vector<std::size_t> layers = sweep_layers(dump, config);
  const CandidateIndex index(dump.manifest, facts);
  const FamilySplit split =
      split_families(index, facts, config.fit_families, config.eval_families);

  LayerContext ctx{&dump, &index, &split, &config,
                   probes::to_states(dump.layers.back().object_final_states)};
  std::vector<std::vector<ProbeRow>> cells(layers.size());
  parallel_for(layers.size(), config.threads, [&](std::size_t i) {
    const std::size_t layer = layers[i];
    const States subjects = probes::to_states(dump.layers[layer].subject_states);
    std::vector<ProbeRow>& rows = cells[i];
    if (config.run_lre) lre_rows(ctx, layer, subjects, rows);
    if (config.run_translational) translational_rows(ctx, layer, subjects, rows);
    if (config.run_bilinear) bilinear_rows(ctx, layer, subjects, rows);
  });

  ProbeReport report;
  report.model_id = dump.manifest.model_id;
  report.fit_families = config.fit_families;
  report.eval_families = config.eval_families;
  for (auto& cell : cells) {
    report.rows.insert(report.rows.end(), std::make_move_iterator(cell.begin()),
                       std::make_move_iterator(cell.end()));
  }
  return report;
}

ProbeReport run_probe_sweep(const std::filesystem::path& dump_dir,
                            const std::filesystem::path& facts_file, const SweepConfig& config) {
  const io::Dump dump = io::read_dump(dump_dir);
  const std::vector<EvalFact> facts = resolve_facts(read_facts_file(facts_file), dump.manifest);
  return run_probe_sweep(dump, facts, config);
}

std::string format_probe_report(const ProbeReport& report) {
  std::ostringstream out;
  out << "probe\tlayer\trelation\thyperparameter\taccuracy\tn_eval\tchance_baseline\n";
  for (const ProbeRow& r : report.rows) {
    out << r.probe << '\t' << r.layer << '\t' << kg::to_string(r.relation) << '\t'
        << hyper_text(r.hyperparameter) << '\t' << format_fixed(r.accuracy) << '\t' << r.n_eval
        << '\t' << format_fixed(r.chance_baseline) << '\n';
  }
  return out.str();
}

ProbeReport read_probe_report(const std::filesystem::path& file) {
  const TsvTable t = read_tsv(file, {"probe", "layer", "relation", "hyperparameter", "accuracy",
                                     "n_eval", "chance_baseline"});
  ProbeReport report;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    ProbeRow r;
    r.probe = row[0];
    r.layer = parse_index(row[1], t, i);
    const auto rel = kg::parse_relation(row[2]);
    if (!rel) throw Error(ErrorCategory::format, t.where(i) + ": unknown relation '" + row[2] + "'");
    r.relation = *rel;
    if (row[3] != "-") r.hyperparameter = parse_number(row[3], t, i);
    r.accuracy = parse_number(row[4], t, i);
    if (r.accuracy < 0.0 || r.accuracy > 1.0) {
      throw Error(ErrorCategory::format, t.where(i) + ": accuracy outside [0, 1]");
    }
    r.n_eval = parse_index(row[5], t, i);
    r.chance_baseline = parse_number(row[6], t, i);
    report.rows.push_back(std::move(r));
  }
  return report;
}

std::vector<LayerScore> layer_scores(const ProbeReport& report) {
  // (probe, layer) -> relation -> best accuracy
  std::map<std::pair<std::string, std::size_t>, std::map<kg::Relation, double>> best;
  for (const ProbeRow& r : report.rows) {
    auto& slot = best[{r.probe, r.layer}];
    const auto it = slot.find(r.relation);
    if (it == slot.end() || r.accuracy > it->second) slot[r.relation] = r.accuracy;
  }
  std::vector<LayerScore> out;
  for (const auto& [key, per_relation] : best) {
    double sum = 0.0;
    for (const auto& [rel, acc] : per_relation) sum += acc;
    out.push_back({key.first, key.second, sum / static_cast<double>(per_relation.size())});
  }
  return out;
}

std::optional<LayerScore> best_layer(const ProbeReport& report, const std::string& probe) {
  std::optional<LayerScore> best;
  for (const LayerScore& s : layer_scores(report)) {
    if (s.probe == probe && (!best || s.accuracy > best->accuracy)) best = s;
  }
  return best;
}

std::string format_probe_summary(const ProbeReport& report) {
  nlohmann::ordered_json j;
  j["model_id"] = report.model_id;
  j["fit_families"] = report.fit_families;
  j["eval_families"] = report.eval_families;
  j["candidates"] = "family members other than the subject";
  j["chance_baseline_type_valid"] = kTypeValidChance;
  bool fallback = false;
  bool jacobian = false;
  for (const ProbeRow& r : report.rows) {
    fallback = fallback || r.probe == "lre-fallback";
    jacobian = jacobian || r.probe == "lre";
  }
  if (jacobian) j["lre_source"] = "jacobians";
  if (fallback) j["lre_source"] = "least-squares affine fallback, not Jacobian-based";
  nlohmann::ordered_json layers = nlohmann::ordered_json::array();
  for (const LayerScore& s : layer_scores(report)) {
    layers.push_back({{"probe", s.probe}, {"layer", s.layer}, {"accuracy", s.accuracy}});
  }
  j["layer_scores"] = layers;
  nlohmann::ordered_json best = nlohmann::ordered_json::object();
  for (const char* probe : {"lre", "lre-fallback", "translational", "bilinear"}) {
    if (const auto b = best_layer(report, probe)) {
      best[probe] = {{"layer", b->layer}, {"accuracy", b->accuracy}};
    }
  }
  j["best_layer"] = best;
  return j.dump(2) + "\n";
}

std::string_view to_string(probes::ProductOrder order) {
  return order == probes::ProductOrder::path ? "path" : "as_written";
}

std::vector<AlgebraRow> run_algebra_tests(const io::Dump& dump, std::span<const EvalFact> facts,
                                          const SweepConfig& config) {
  if (dump.layers.empty()) throw Error(ErrorCategory::validation, "dump has no layers");
  const std::vector<std::size_t> layers = sweep_layers(dump, config);
  const CandidateIndex index(dump.manifest, facts);
  const FamilySplit split =
      split_families(index, facts, config.fit_families, config.eval_families);

  std::vector<std::vector<AlgebraRow>> cells(layers.size());
  parallel_for(layers.size(), config.threads, [&](std::size_t i) {
    const std::size_t layer = layers[i];
    const States subjects = probes::to_states(dump.layers[layer].subject_states);
    const probes::BilinearProbe probe =
        fit_layer_bilinear(dump, split, layer, config.lambda_grid);
    const std::size_t n_lambda = probe.lambda_grid.size();

    std::size_t selected = 0;
    double selected_score = -1.0;
    for (std::size_t k = 0; k < n_lambda; ++k) {
      double sum = 0.0;
      for (kg::Relation r : kg::kAllRelations) {
        const probes::BilinearScorer scorer(subjects, probe.matrix(r, k));
        sum += probes::evaluate(scorer, probes::facts_of(split.eval_facts, r), index,
                                CandidateScope::family_members)
                   .value();
      }
      if (sum >= selected_score) {
        selected_score = sum;
        selected = k;
      }
    }

    std::vector<AlgebraRow>& rows = cells[i];
    for (const probes::TransposePair& p : probes::kTransposePairs) {
      const std::vector<EvalFact> eval = probes::facts_of(split.eval_facts, p.target);
      for (std::size_t k = 0; k < n_lambda; ++k) {
        const auto acc = probes::algebra_transpose_test(probe, k, p.source, subjects, eval, index);
        rows.push_back({"transpose", layer,
                        "M_" + std::string(kg::to_string(p.source)) + "^T => " +
                            std::string(kg::to_string(p.target)),
                        probes::ProductOrder::path, probe.lambda_grid[k], k == selected,
                        acc.value(), acc.total});
      }
    }
    for (const kg::CompositionRule& rule : kg::kCompositionTable) {
      const std::vector<EvalFact> eval = probes::facts_of(split.eval_facts, rule.result);
      const std::string outer(kg::to_string(rule.outer));
      const std::string inner(kg::to_string(rule.inner));
      for (probes::ProductOrder order : {probes::ProductOrder::path, probes::ProductOrder::as_written}) {
        const std::string product = order == probes::ProductOrder::path
                                        ? "M_" + inner + " M_" + outer
                                        : "M_" + outer + " M_" + inner;
        for (std::size_t k = 0; k < n_lambda; ++k) {
          const auto acc = probes::algebra_composition_test(probe, k, rule.outer, rule.inner,
                                                            subjects, eval, index, order);
          rows.push_back({"composition", layer,
                          product + " => " + std::string(kg::to_string(rule.result)), order,
                          probe.lambda_grid[k], k == selected, acc.value(), acc.total});
        }
      }
    }
  });

  std::vector<AlgebraRow> out;
  for (auto& cell : cells) out.insert(out.end(), cell.begin(), cell.end());
  return out;
}

std::string format_algebra_report(const std::vector<AlgebraRow>& rows) {
  std::ostringstream out;
  out << "test\tlayer\texpression\torder\tlambda\tselected\taccuracy\tn_eval\n";
  for (const AlgebraRow& r : rows) {
    out << r.test << '\t' << r.layer << '\t' << r.expression << '\t' << to_string(r.order) << '\t'
        << format_general(r.lambda, 6) << '\t' << (r.selected ? 1 : 0) << '\t'
        << format_fixed(r.accuracy) << '\t' << r.n_eval << '\n';
  }
  return out.str();
}

}  // namespace relprobe::harness
