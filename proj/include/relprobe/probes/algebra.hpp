#pragma once

#include <array>

#include "relprobe/probes/probes.hpp"

namespace relprobe::probes {

/// Transposed matrix of `source` scored as the inverse relation `target`.
struct TransposePair {
  kg::Relation source;
  kg::Relation target;
};

inline constexpr std::array<TransposePair, 4> kTransposePairs = {{
    {kg::Relation::husband, kg::Relation::wife},
    {kg::Relation::wife, kg::Relation::husband},
    {kg::Relation::sister, kg::Relation::brother},
    {kg::Relation::brother, kg::Relation::sister},
}};

/// Multiplication order for a composition outer∘inner under the score
/// s^T M o.
///  path:       M_inner * M_outer. Expands to sum_m f_inner(s, m) f_outer(m, o),
///              i.e. follow inner from s, then outer.
///  as_written: M_outer * M_inner, which under s^T M o follows outer first.
enum class ProductOrder { path, as_written };

MatrixXd composition_matrix(const MatrixXd& outer, const MatrixXd& inner, ProductOrder order);

/// Accuracy of M_r^T on facts of r's inverse. `r` must be husband, wife,
/// sister or brother; every fact must be of the inverse relation.
Accuracy algebra_transpose_test(const BilinearProbe& probe, std::size_t lambda_index,
                                kg::Relation r, const States& states,
                                std::span<const EvalFact> inverse_facts,
                                const CandidateIndex& index);

/// Accuracy of the composed matrix of (outer, inner) on facts of the
/// composed relation. The pair must be in kg::kCompositionTable.
Accuracy algebra_composition_test(const BilinearProbe& probe, std::size_t lambda_index,
                                  kg::Relation outer, kg::Relation inner, const States& states,
                                  std::span<const EvalFact> composed_facts,
                                  const CandidateIndex& index,
                                  ProductOrder order = ProductOrder::path);

}  // namespace relprobe::probes
