#include "relprobe/probes/algebra.hpp"

#include <algorithm>

#include "relprobe/error.hpp"

namespace relprobe::probes {

namespace {

void require_relation(std::span<const EvalFact> facts, kg::Relation r) {
  for (const EvalFact& f : facts) {
    if (f.relation != r) {
      throw Error(ErrorCategory::validation,
                  "algebra test expects " + std::string(kg::to_string(r)) + " facts, got " +
                      std::string(kg::to_string(f.relation)));
    }
  }
}

}  // namespace

MatrixXd composition_matrix(const MatrixXd& outer, const MatrixXd& inner, ProductOrder order) {
  return order == ProductOrder::path ? MatrixXd(inner * outer) : MatrixXd(outer * inner);
}

Accuracy algebra_transpose_test(const BilinearProbe& probe, std::size_t lambda_index,
                                kg::Relation r, const States& states,
                                std::span<const EvalFact> inverse_facts,
                                const CandidateIndex& index) {
  const auto it = std::find_if(kTransposePairs.begin(), kTransposePairs.end(),
                               [&](const TransposePair& p) { return p.source == r; });
  if (it == kTransposePairs.end()) {
    throw Error(ErrorCategory::usage, "transpose test is defined for husband, wife, sister and "
                                      "brother, not " + std::string(kg::to_string(r)));
  }
  require_relation(inverse_facts, it->target);
  const BilinearScorer scorer(states, probe.matrix(r, lambda_index).transpose());
  return evaluate(scorer, inverse_facts, index, CandidateScope::family_members);
}

Accuracy algebra_composition_test(const BilinearProbe& probe, std::size_t lambda_index,
                                  kg::Relation outer, kg::Relation inner, const States& states,
                                  std::span<const EvalFact> composed_facts,
                                  const CandidateIndex& index, ProductOrder order) {
  const auto composed = kg::compose_relations(outer, inner);
  if (!composed) {
    throw Error(ErrorCategory::usage, "no composition rule for " +
                                          std::string(kg::to_string(outer)) + " after " +
                                          std::string(kg::to_string(inner)));
  }
  require_relation(composed_facts, *composed);
  const BilinearScorer scorer(
      states, composition_matrix(probe.matrix(outer, lambda_index),
                                 probe.matrix(inner, lambda_index), order));
  return evaluate(scorer, composed_facts, index, CandidateScope::family_members);
}

}  // namespace relprobe::probes
