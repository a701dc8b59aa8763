#pragma once

// On-disk embedding dumps.
//
// <dir>/manifest.json                 structured header, all shapes
// <dir>/layers/<l>.subject.f32        n x d, hidden state at the last token
//                                     of each entity's name at layer l
// <dir>/layers/<l>.objfinal.f32       n x d, state immediately preceding the
//                                     entity's name when it is predicted as
//                                     an object
// <dir>/jacobians/<relation>/<i>.f32  J (d x d), then s_l (d), then o_L (d)
//
// Payloads are raw little-endian float32, row-major, with no shape data;
// row i of every matrix is manifest entity i.

#include <Eigen/Dense>
#include <cstddef>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "relprobe/kg/family_graph.hpp"

namespace relprobe::io {

inline constexpr int kFormatVersion = 1;

using StateMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using StateVector = Eigen::VectorXf;

struct ManifestEntity {
  kg::EntityId id;
  std::string name;
  std::size_t family = 0;
  kg::Gender gender = kg::Gender::male;
};

struct JacobianEntry {
  kg::Relation relation = kg::Relation::husband;
  std::size_t index = 0;  // file name within jacobians/<relation>/
  std::size_t layer = 0;  // source layer l of s_l
  kg::EntityId subject;
  kg::EntityId object;
};

struct DumpManifest {
  int format_version = kFormatVersion;
  std::string model_id;
  std::size_t n_layers = 0;
  std::size_t hidden_dim = 0;
  std::vector<ManifestEntity> entities;
  std::vector<std::string> relations;  // the 8 relation names, canonical order
  bool has_jacobians = false;
  std::vector<JacobianEntry> jacobians;
};

struct LayerStates {
  std::size_t layer = 0;
  StateMatrix subject_states;
  StateMatrix object_final_states;
};

struct JacobianRecord {
  JacobianEntry entry;
  StateMatrix jacobian;  // d x d, d o_L / d s_l
  StateVector subject_state;
  StateVector object_final_state;
};

struct Dump {
  DumpManifest manifest;
  std::vector<LayerStates> layers;  // layers[l].layer == l
  std::vector<JacobianRecord> jacobians;
};

/// Manifest defaults for a dump over `entities` with the canonical relation
/// list filled in.
DumpManifest make_manifest(std::string model_id, std::size_t n_layers, std::size_t hidden_dim,
                           std::vector<ManifestEntity> entities);

/// Checks shapes, finiteness, relation list and Jacobian bookkeeping.
/// Throws Error(format) naming the offending layer and row.
void validate(const Dump& dump);

void write_dump(const Dump& dump, const std::filesystem::path& dir);
Dump read_dump(const std::filesystem::path& dir);

/// EntityId -> row lookup over a manifest.
class EntityIndex {
 public:
  explicit EntityIndex(const DumpManifest& manifest);
  bool contains(kg::EntityId id) const { return rows_.contains(id.ordinal); }
  /// Throws Error(validation) for unknown ids.
  std::size_t row(kg::EntityId id) const;
  /// Throws Error(validation) for unknown names.
  std::size_t row_by_name(const std::string& full_name) const;

 private:
  std::unordered_map<std::uint32_t, std::size_t> rows_;
  std::unordered_map<std::string, std::size_t> names_;
};

}  // namespace relprobe::io
