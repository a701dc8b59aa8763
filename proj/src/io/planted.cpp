#include "relprobe/io/planted.hpp"

#include <cmath>

#include "relprobe/data/rng.hpp"
#include "relprobe/error.hpp"

namespace relprobe::io {

using data::Stream;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kNoiseFraction = 0.05;
constexpr std::uint64_t kBasisKey = std::uint64_t{1} << 20;

VectorXd gaussian(Stream& rng, Eigen::Index n, double sigma) {
  VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = sigma * rng.normal();
  return v;
}

VectorXd with_noise(Stream& rng, const VectorXd& signal) {
  const double sigma = kNoiseFraction * signal.norm() / std::sqrt(static_cast<double>(signal.size()));
  return signal + gaussian(rng, signal.size(), sigma);
}

std::size_t role_index(const kg::FamilyGraph& g, kg::EntityId id) {
  return static_cast<std::size_t>(g.entity(id).role);
}

/// Role-level adjacency shared by every family.
std::array<MatrixXd, kg::kRelationCount> role_adjacency(const kg::FamilyGraph& g) {
  std::array<MatrixXd, kg::kRelationCount> x;
  for (auto& m : x) m = MatrixXd::Zero(kg::kFamilySize, kg::kFamilySize);
  for (const kg::Fact& f : g.facts()) {
    x[static_cast<std::size_t>(f.relation)](role_index(g, f.subject), role_index(g, f.object)) = 1;
  }
  return x;
}

}  // namespace

std::string_view to_string(PlantKind k) {
  switch (k) {
    case PlantKind::bilinear: return "bilinear";
    case PlantKind::translational: return "translational";
    case PlantKind::random: return "random";
  }
  return "?";
}

std::optional<PlantKind> parse_plant_kind(std::string_view s) {
  for (PlantKind k : {PlantKind::bilinear, PlantKind::translational, PlantKind::random}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

PlantedDump plant_synthetic_dump(PlantKind kind, std::span<const kg::FamilyGraph> families,
                                 std::size_t dim, std::uint64_t seed, std::size_t n_layers) {
  if (dim < kMinPlantDim) {
    throw Error(ErrorCategory::usage, "planted dumps need d >= 16 to separate 10 family members, got " +
                                          std::to_string(dim));
  }
  if (families.empty()) throw Error(ErrorCategory::usage, "planted dump needs at least one family");
  if (n_layers == 0) throw Error(ErrorCategory::usage, "planted dump needs at least one layer");

  std::vector<ManifestEntity> entities;
  for (const kg::FamilyGraph& g : families) {
    for (const kg::Entity& e : g.entities()) {
      entities.push_back({e.id, e.full_name(), g.family_index(), e.gender});
    }
  }
  const auto n = static_cast<Eigen::Index>(entities.size());
  const auto d = static_cast<Eigen::Index>(dim);
  const double unit_sigma = 1.0 / std::sqrt(static_cast<double>(dim));

  PlantedDump out;
  out.dump.manifest = make_manifest("planted-" + std::string(to_string(kind)) + "-seed" +
                                        std::to_string(seed),
                                    n_layers, dim, std::move(entities));
  for (auto& g : out.ground_truth) g = MatrixXd::Zero(d, d);

  const Stream root(seed);
  Stream basis_rng = root.split(data::kDomainPlant, kBasisKey);

  // Orthonormal role frame (bilinear) or free role vectors (translational).
  MatrixXd frame;
  MatrixXd roles(static_cast<Eigen::Index>(kg::kFamilySize), d);
  if (kind == PlantKind::bilinear) {
    MatrixXd raw(d, d);
    for (Eigen::Index c = 0; c < d; ++c) raw.col(c) = gaussian(basis_rng, d, 1.0);
    const MatrixXd q = Eigen::HouseholderQR<MatrixXd>(raw).householderQ();
    frame = q.leftCols(static_cast<Eigen::Index>(kg::kFamilySize));
    const auto x = role_adjacency(families.front());
    for (kg::Relation r : kg::kAllRelations) {
      const auto i = static_cast<std::size_t>(r);
      out.ground_truth[i] = frame * x[i] * frame.transpose();
    }
    auto gt = [&](kg::Relation r) -> MatrixXd& { return out.ground_truth[static_cast<std::size_t>(r)]; };
    gt(kg::Relation::wife) = gt(kg::Relation::husband).transpose();
    gt(kg::Relation::sister) = gt(kg::Relation::brother).transpose();
  } else if (kind == PlantKind::translational) {
    for (Eigen::Index k = 0; k < roles.rows(); ++k) roles.row(k) = gaussian(basis_rng, d, unit_sigma);
    const VectorXd offset = gaussian(basis_rng, d, unit_sigma);
    for (auto [h, w] : {std::pair{kg::Role::gp1_husband, kg::Role::gp1_wife},
                        std::pair{kg::Role::gp2_husband, kg::Role::gp2_wife},
                        std::pair{kg::Role::parent_husband, kg::Role::parent_wife}}) {
      roles.row(static_cast<Eigen::Index>(h)) =
          roles.row(static_cast<Eigen::Index>(w)) + offset.transpose();
    }
  }

  for (std::size_t l = 0; l < n_layers; ++l) {
    Stream rng = root.split(data::kDomainPlant, l);
    LayerStates ls;
    ls.layer = l;
    ls.subject_states.resize(n, d);
    ls.object_final_states.resize(n, d);
    Eigen::Index row = 0;
    for (const kg::FamilyGraph& g : families) {
      const VectorXd family_vec =
          kind == PlantKind::translational ? gaussian(rng, d, unit_sigma) : VectorXd::Zero(d);
      for (const kg::Entity& e : g.entities()) {
        const auto k = static_cast<Eigen::Index>(e.role);
        VectorXd state;
        switch (kind) {
          case PlantKind::bilinear: state = with_noise(rng, frame.col(k)); break;
          case PlantKind::translational:
            state = with_noise(rng, family_vec + roles.row(k).transpose());
            break;
          case PlantKind::random: state = gaussian(rng, d, unit_sigma); break;
        }
        ls.subject_states.row(row) = state.cast<float>().transpose();
        ls.object_final_states.row(row) = gaussian(rng, d, unit_sigma).cast<float>().transpose();
        ++row;
      }
    }
    out.dump.layers.push_back(std::move(ls));
  }
  validate(out.dump);
  return out;
}

}  // namespace relprobe::io
