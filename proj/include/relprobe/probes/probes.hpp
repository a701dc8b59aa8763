#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "relprobe/probes/candidates.hpp"

namespace relprobe::probes {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Entity states in double precision; row i is dump row i.
using States = MatrixXd;

States to_states(const io::StateMatrix& m);

/// beta sweep {1.0, 1.5, ..., 5.0}.
std::vector<double> default_beta_grid();
/// 7 logarithmically spaced points on [1e-3, 1e-1].
std::vector<double> default_lambda_grid();

// ---------------------------------------------------------------------------
// Linear relational embedding: o_L ~ W s_l + b.

struct LreExample {
  MatrixXd jacobian;  // d o_L / d s_l at this example
  VectorXd subject_state;
  VectorXd object_final_state;
};

struct LreProbe {
  MatrixXd weight;
  VectorXd bias;
  double beta = 1.0;
  std::size_t source_layer = 0;
  std::size_t target_layer = 0;
  bool from_jacobians = true;  // false for the least-squares fallback

  VectorXd predict(const VectorXd& subject_state) const { return weight * subject_state + bias; }
};

/// W = (beta / n) sum J_i,  b = (1 / n) sum (o_i - J_i s_i).
/// The bias uses the unscaled Jacobians.
LreProbe fit_lre(std::span<const LreExample> examples, double beta, std::size_t source_layer,
                 std::size_t target_layer);

/// Minimum-norm least-squares affine map from subject rows to object rows,
/// for dumps without Jacobians.
LreProbe fit_lre_least_squares(const MatrixXd& subjects, const MatrixXd& objects,
                               std::size_t source_layer, std::size_t target_layer);

// ---------------------------------------------------------------------------
// Translational: o_l ~ s_l + v.

struct TranslationProbe {
  VectorXd offset;
  std::size_t layer = 0;
};

/// v = mean(o_i - s_i) over paired rows.
TranslationProbe fit_translation(const MatrixXd& subjects, const MatrixXd& objects,
                                 std::size_t layer);

// ---------------------------------------------------------------------------
// Bilinear (RESCAL): f(s, o) = s^T M o.

struct RelationMatrix {
  MatrixXd matrix;
  double lambda = 0.0;
};

struct BilinearProbe {
  std::size_t layer = 0;
  std::vector<double> lambda_grid;
  /// One matrix per grid value, in grid order.
  std::map<kg::Relation, std::vector<RelationMatrix>> matrices;

  const MatrixXd& matrix(kg::Relation r, std::size_t lambda_index) const;
};

/// X[i][j] = 1 iff (row i, r, row j) is a fact; rows are positions in
/// `fit_rows`.
MatrixXd build_adjacency(std::span<const EvalFact> facts, kg::Relation r,
                         std::span<const std::size_t> fit_rows);

/// One ridge RESCAL solve per relation and lambda; A is factorized once.
BilinearProbe fit_bilinear(const MatrixXd& entity_matrix,
                           const std::map<kg::Relation, MatrixXd>& adjacencies,
                           std::span<const double> lambda_grid, std::size_t layer);

inline double score_bilinear(const MatrixXd& m, const VectorXd& s, const VectorXd& o) {
  return s.dot(m * o);
}

// ---------------------------------------------------------------------------
// Evaluation: argmax over candidates, ties to the lowest EntityId.

struct Accuracy {
  std::size_t correct = 0;
  std::size_t total = 0;
  double value() const { return total == 0 ? 0.0 : static_cast<double>(correct) / total; }
  Accuracy& operator+=(const Accuracy& o) {
    correct += o.correct;
    total += o.total;
    return *this;
  }
};

/// Index of the first maximal score.
std::size_t argmax_first(std::span<const double> scores);

/// Scorer: callable(subject_row, span<const size_t> candidate_rows) ->
/// std::vector<double>, higher is better.
template <typename Scorer>
Accuracy evaluate(const Scorer& scorer, std::span<const EvalFact> facts,
                  const CandidateIndex& index, CandidateScope scope) {
  Accuracy acc;
  for (const EvalFact& f : facts) {
    const std::vector<std::size_t> cands = index.candidates(f, scope);
    if (cands.empty()) continue;
    const std::vector<double> scores = scorer(f.subject_row, std::span<const std::size_t>(cands));
    acc.correct += cands[argmax_first(scores)] == f.object_row ? 1 : 0;
    ++acc.total;
  }
  return acc;
}

/// Highest s^T M o.
class BilinearScorer {
 public:
  BilinearScorer(const States& states, MatrixXd m) : states_(&states), m_(std::move(m)) {}
  std::vector<double> operator()(std::size_t subject, std::span<const std::size_t> cands) const;

 private:
  const States* states_;
  MatrixXd m_;
};

/// Smallest Euclidean distance between s + v and the candidate's state.
class TranslationScorer {
 public:
  TranslationScorer(const States& states, const TranslationProbe& probe)
      : states_(&states), offset_(probe.offset) {}
  std::vector<double> operator()(std::size_t subject, std::span<const std::size_t> cands) const;

 private:
  const States* states_;
  VectorXd offset_;
};

/// Highest cosine similarity between W s_l + b and the candidate's o_L.
class LreScorer {
 public:
  LreScorer(const States& source, const States& target, LreProbe probe)
      : source_(&source), target_(&target), probe_(std::move(probe)) {}
  std::vector<double> operator()(std::size_t subject, std::span<const std::size_t> cands) const;

 private:
  const States* source_;
  const States* target_;
  LreProbe probe_;
};

/// Scores depend only on the candidate, never on the subject: a fixed
/// pseudo-random value per row.
class SubjectBlindScorer {
 public:
  explicit SubjectBlindScorer(std::uint64_t seed) : seed_(seed) {}
  std::vector<double> operator()(std::size_t subject, std::span<const std::size_t> cands) const;

 private:
  std::uint64_t seed_;
};

}  // namespace relprobe::probes
