#include "relprobe/probes/probes.hpp"

#include <cmath>

#include "relprobe/data/rng.hpp"
#include "relprobe/error.hpp"
#include "relprobe/solver/sylvester.hpp"

namespace relprobe::probes {

namespace {

[[noreturn]] void mismatch(const std::string& msg) { throw Error(ErrorCategory::usage, msg); }

}  // namespace

States to_states(const io::StateMatrix& m) { return m.cast<double>(); }

std::vector<double> default_beta_grid() {
  std::vector<double> g;
  for (int k = 0; k <= 8; ++k) g.push_back(1.0 + 0.5 * k);
  return g;
}

std::vector<double> default_lambda_grid() {
  std::vector<double> g;
  for (int k = 0; k <= 6; ++k) g.push_back(std::pow(10.0, -3.0 + k / 3.0));
  return g;
}

LreProbe fit_lre(std::span<const LreExample> examples, double beta, std::size_t source_layer,
                 std::size_t target_layer) {
  if (examples.empty()) mismatch("LRE fit needs at least one example");
  const Eigen::Index d = examples.front().jacobian.rows();
  MatrixXd jac_sum = MatrixXd::Zero(d, d);
  VectorXd residual_sum = VectorXd::Zero(d);
  for (const LreExample& ex : examples) {
    if (ex.jacobian.rows() != d || ex.jacobian.cols() != d || ex.subject_state.size() != d ||
        ex.object_final_state.size() != d) {
      mismatch("LRE example dimensions disagree");
    }
    jac_sum += ex.jacobian;
    residual_sum += ex.object_final_state - ex.jacobian * ex.subject_state;
  }
  const auto n = static_cast<double>(examples.size());
  return {beta / n * jac_sum, residual_sum / n, beta, source_layer, target_layer, true};
}

LreProbe fit_lre_least_squares(const MatrixXd& subjects, const MatrixXd& objects,
                               std::size_t source_layer, std::size_t target_layer) {
  if (subjects.rows() == 0 || subjects.rows() != objects.rows()) {
    mismatch("affine fit needs the same positive number of subject and object rows");
  }
  const Eigen::Index d = subjects.cols();
  MatrixXd design(subjects.rows(), d + 1);
  design << subjects, VectorXd::Ones(subjects.rows());
  const MatrixXd coef = design.completeOrthogonalDecomposition().solve(objects);
  LreProbe p;
  p.weight = coef.topRows(d).transpose();
  p.bias = coef.row(d).transpose();
  p.beta = 1.0;
  p.source_layer = source_layer;
  p.target_layer = target_layer;
  p.from_jacobians = false;
  return p;
}

TranslationProbe fit_translation(const MatrixXd& subjects, const MatrixXd& objects,
                                 std::size_t layer) {
  if (subjects.rows() == 0) mismatch("translation fit needs at least one pair");
  if (subjects.rows() != objects.rows() || subjects.cols() != objects.cols()) {
    mismatch("translation fit pairs have mismatched shapes");
  }
  return {(objects - subjects).colwise().mean().transpose(), layer};
}

const MatrixXd& BilinearProbe::matrix(kg::Relation r, std::size_t lambda_index) const {
  const auto it = matrices.find(r);
  if (it == matrices.end() || lambda_index >= it->second.size()) {
    throw Error(ErrorCategory::usage,
                "bilinear probe has no matrix for " + std::string(kg::to_string(r)));
  }
  return it->second[lambda_index].matrix;
}

MatrixXd build_adjacency(std::span<const EvalFact> facts, kg::Relation r,
                         std::span<const std::size_t> fit_rows) {
  std::map<std::size_t, Eigen::Index> local;
  for (std::size_t i = 0; i < fit_rows.size(); ++i) local.emplace(fit_rows[i], static_cast<Eigen::Index>(i));
  const auto n = static_cast<Eigen::Index>(fit_rows.size());
  MatrixXd x = MatrixXd::Zero(n, n);
  for (const EvalFact& f : facts) {
    if (f.relation != r) continue;
    const auto s = local.find(f.subject_row);
    const auto o = local.find(f.object_row);
    if (s != local.end() && o != local.end()) x(s->second, o->second) = 1.0;
  }
  return x;
}

BilinearProbe fit_bilinear(const MatrixXd& entity_matrix,
                           const std::map<kg::Relation, MatrixXd>& adjacencies,
                           std::span<const double> lambda_grid, std::size_t layer) {
  if (lambda_grid.empty()) mismatch("lambda grid is empty");
  const solver::SylvesterSolver<double> solver(entity_matrix);
  BilinearProbe probe;
  probe.layer = layer;
  probe.lambda_grid.assign(lambda_grid.begin(), lambda_grid.end());
  for (const auto& [relation, x] : adjacencies) {
    const MatrixXd rotated = solver.rotate(x);
    auto& mats = probe.matrices[relation];
    for (double lambda : lambda_grid) mats.push_back({solver.solve_rotated(rotated, lambda), lambda});
  }
  return probe;
}

std::size_t argmax_first(std::span<const double> scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return best;
}

std::vector<double> BilinearScorer::operator()(std::size_t subject,
                                               std::span<const std::size_t> cands) const {
  const VectorXd u = m_.transpose() * states_->row(static_cast<Eigen::Index>(subject)).transpose();
  std::vector<double> out;
  out.reserve(cands.size());
  for (std::size_t c : cands) out.push_back(states_->row(static_cast<Eigen::Index>(c)).dot(u));
  return out;
}

std::vector<double> TranslationScorer::operator()(std::size_t subject,
                                                  std::span<const std::size_t> cands) const {
  const VectorXd target = states_->row(static_cast<Eigen::Index>(subject)).transpose() + offset_;
  std::vector<double> out;
  out.reserve(cands.size());
  for (std::size_t c : cands) {
    out.push_back(-(states_->row(static_cast<Eigen::Index>(c)).transpose() - target).norm());
  }
  return out;
}

std::vector<double> LreScorer::operator()(std::size_t subject,
                                          std::span<const std::size_t> cands) const {
  const VectorXd pred = probe_.predict(source_->row(static_cast<Eigen::Index>(subject)).transpose());
  const double pred_norm = pred.norm();
  std::vector<double> out;
  out.reserve(cands.size());
  for (std::size_t c : cands) {
    const auto o = target_->row(static_cast<Eigen::Index>(c));
    const double denom = pred_norm * o.norm();
    out.push_back(denom > 0.0 ? o.dot(pred) / denom : 0.0);
  }
  return out;
}

std::vector<double> SubjectBlindScorer::operator()(std::size_t /*subject*/,
                                                   std::span<const std::size_t> cands) const {
  std::vector<double> out;
  out.reserve(cands.size());
  for (std::size_t c : cands) {
    out.push_back(static_cast<double>(data::splitmix64(seed_ ^ data::splitmix64(c)) >> 11));
  }
  return out;
}

}  // namespace relprobe::probes
