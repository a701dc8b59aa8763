#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

#include "relprobe/io/dump.hpp"
#include "relprobe/kg/family_graph.hpp"

namespace relprobe::io {

enum class PlantKind { bilinear, translational, random };

std::string_view to_string(PlantKind k);
std::optional<PlantKind> parse_plant_kind(std::string_view s);

inline constexpr std::size_t kMinPlantDim = 16;

struct PlantedDump {
  Dump dump;
  /// Bilinear kind only: G_r with s^T G_r o maximal at the true object of
  /// every fact, G_wife = G_husband^T, and G_father = G_mother G_husband
  /// (plus the other three composition identities). Indexed by relation.
  std::array<Eigen::MatrixXd, kg::kRelationCount> ground_truth;
};

/// Synthetic dumps with a known relational geometry.
///
/// bilinear: every entity is its role's direction in a fixed orthonormal
///   10-frame plus isotropic noise; object-final states are independent
///   noise, so only the bilinear form carries the relations.
/// translational: entity = family vector + role vector + noise, with each
///   husband's role vector equal to his wife's plus one shared offset, so
///   o = s + v_r for husband and wife facts only.
/// random: independent Gaussian states.
///
/// Noise is Gaussian with norm about 0.05 of the signal norm. Deterministic
/// in (kind, families, dim, seed, n_layers). Throws Error(usage) if
/// dim < 16 or no families are given.
PlantedDump plant_synthetic_dump(PlantKind kind, std::span<const kg::FamilyGraph> families,
                                 std::size_t dim, std::uint64_t seed, std::size_t n_layers = 2);

}  // namespace relprobe::io
