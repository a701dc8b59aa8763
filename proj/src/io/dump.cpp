#include "relprobe/io/dump.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>

#include "relprobe/error.hpp"

namespace relprobe::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void bad_format(const std::string& msg) { throw Error(ErrorCategory::format, msg); }

std::string layer_file(std::size_t layer, const char* role) {
  return "layers/" + std::to_string(layer) + "." + role + ".f32";
}

std::string jacobian_file(const JacobianEntry& e) {
  return "jacobians/" + std::string(kg::to_string(e.relation)) + "/" + std::to_string(e.index) +
         ".f32";
}

std::uint32_t to_little(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    return ((v & 0xFFu) << 24) | ((v & 0xFF00u) << 8) | ((v >> 8) & 0xFF00u) | (v >> 24);
  }
  return v;
}

void append_floats(std::vector<char>& buf, const float* data, std::size_t count) {
  const std::size_t start = buf.size();
  buf.resize(start + count * 4);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint32_t bits = to_little(std::bit_cast<std::uint32_t>(data[i]));
    std::memcpy(buf.data() + start + i * 4, &bits, 4);
  }
}

void write_file(const fs::path& file, const std::vector<char>& bytes) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCategory::io, "cannot write " + file.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCategory::io, "write failed for " + file.string());
}

std::vector<float> read_floats(const fs::path& dir, const std::string& rel, std::size_t count) {
  const fs::path file = dir / rel;
  std::ifstream in(file, std::ios::binary | std::ios::ate);
  if (!in) throw Error(ErrorCategory::io, "cannot open " + file.string());
  const auto size = static_cast<std::size_t>(in.tellg());
  if (size != count * 4) {
    bad_format((size < count * 4 ? "truncated payload " : "oversized payload ") + rel + ": " +
               std::to_string(size) + " bytes, expected " + std::to_string(count * 4));
  }
  in.seekg(0);
  std::vector<char> bytes(size);
  in.read(bytes.data(), static_cast<std::streamsize>(size));
  if (!in) throw Error(ErrorCategory::io, "read failed for " + file.string());
  std::vector<float> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint32_t bits;
    std::memcpy(&bits, bytes.data() + i * 4, 4);
    out[i] = std::bit_cast<float>(to_little(bits));
  }
  return out;
}

void check_matrix(const StateMatrix& m, std::size_t rows, std::size_t cols,
                  const std::string& what, std::size_t layer) {
  if (static_cast<std::size_t>(m.rows()) != rows || static_cast<std::size_t>(m.cols()) != cols) {
    bad_format(what + " is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
               ", expected " + std::to_string(rows) + "x" + std::to_string(cols));
  }
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (!std::isfinite(m(r, c))) {
        bad_format("non-finite value in " + what + " (layer " + std::to_string(layer) +
                   ", row " + std::to_string(r) + ", column " + std::to_string(c) + ")");
      }
    }
  }
}

json to_json(const DumpManifest& m) {
  json ents = json::array();
  for (const ManifestEntity& e : m.entities) {
    ents.push_back({{"id", e.id.ordinal},
                    {"name", e.name},
                    {"family", e.family},
                    {"gender", std::string(kg::to_string(e.gender))}});
  }
  json jacs = json::array();
  for (const JacobianEntry& e : m.jacobians) {
    jacs.push_back({{"relation", std::string(kg::to_string(e.relation))},
                    {"index", e.index},
                    {"layer", e.layer},
                    {"subject", e.subject.ordinal},
                    {"object", e.object.ordinal}});
  }
  return {{"format_version", m.format_version},
          {"model_id", m.model_id},
          {"n_layers", m.n_layers},
          {"hidden_dim", m.hidden_dim},
          {"dtype", "float32"},
          {"endianness", "little"},
          {"relations", m.relations},
          {"has_jacobians", m.has_jacobians},
          {"entities", ents},
          {"jacobians", jacs}};
}

DumpManifest from_json(const json& j) {
  DumpManifest m;
  m.format_version = j.at("format_version").get<int>();
  if (m.format_version != kFormatVersion) {
    bad_format("unsupported dump format_version " + std::to_string(m.format_version) +
               " (expected " + std::to_string(kFormatVersion) + ")");
  }
  if (j.at("dtype").get<std::string>() != "float32") bad_format("dtype must be float32");
  if (j.at("endianness").get<std::string>() != "little") bad_format("endianness must be little");
  m.model_id = j.at("model_id").get<std::string>();
  m.n_layers = j.at("n_layers").get<std::size_t>();
  m.hidden_dim = j.at("hidden_dim").get<std::size_t>();
  m.relations = j.at("relations").get<std::vector<std::string>>();
  m.has_jacobians = j.at("has_jacobians").get<bool>();
  for (const json& e : j.at("entities")) {
    const auto gender = kg::parse_gender(e.at("gender").get<std::string>());
    if (!gender) bad_format("bad entity gender in manifest");
    m.entities.push_back({kg::EntityId{e.at("id").get<std::uint32_t>()},
                          e.at("name").get<std::string>(), e.at("family").get<std::size_t>(),
                          *gender});
  }
  for (const json& e : j.at("jacobians")) {
    const auto rel = kg::parse_relation(e.at("relation").get<std::string>());
    if (!rel) bad_format("bad Jacobian relation in manifest");
    m.jacobians.push_back({*rel, e.at("index").get<std::size_t>(),
                           e.at("layer").get<std::size_t>(),
                           kg::EntityId{e.at("subject").get<std::uint32_t>()},
                           kg::EntityId{e.at("object").get<std::uint32_t>()}});
  }
  return m;
}

}  // namespace

DumpManifest make_manifest(std::string model_id, std::size_t n_layers, std::size_t hidden_dim,
                           std::vector<ManifestEntity> entities) {
  DumpManifest m;
  m.model_id = std::move(model_id);
  m.n_layers = n_layers;
  m.hidden_dim = hidden_dim;
  m.entities = std::move(entities);
  for (kg::Relation r : kg::kAllRelations) m.relations.emplace_back(kg::to_string(r));
  return m;
}

void validate(const Dump& dump) {
  const DumpManifest& m = dump.manifest;
  if (m.format_version != kFormatVersion) bad_format("unsupported format_version");
  if (m.hidden_dim == 0) bad_format("hidden_dim must be positive");
  if (m.entities.empty()) bad_format("manifest lists no entities");
  if (m.relations.size() != kg::kRelationCount) bad_format("manifest must list 8 relations");
  for (std::size_t i = 0; i < kg::kRelationCount; ++i) {
    if (m.relations[i] != kg::to_string(kg::kAllRelations[i])) {
      bad_format("manifest relation " + std::to_string(i) + " is '" + m.relations[i] + "'");
    }
  }
  std::set<std::uint32_t> ids;
  std::set<std::string> names;
  for (const ManifestEntity& e : m.entities) {
    if (!ids.insert(e.id.ordinal).second) bad_format("duplicate entity id in manifest");
    if (!names.insert(e.name).second) bad_format("duplicate entity name '" + e.name + "'");
  }
  if (dump.layers.size() != m.n_layers) bad_format("layer count does not match manifest");
  const std::size_t n = m.entities.size();
  const std::size_t d = m.hidden_dim;
  for (std::size_t l = 0; l < dump.layers.size(); ++l) {
    const LayerStates& ls = dump.layers[l];
    if (ls.layer != l) bad_format("layers must be stored in order 0..n_layers-1");
    check_matrix(ls.subject_states, n, d, layer_file(l, "subject"), l);
    check_matrix(ls.object_final_states, n, d, layer_file(l, "objfinal"), l);
  }
  if (m.has_jacobians != !m.jacobians.empty()) {
    bad_format("has_jacobians disagrees with the Jacobian record list");
  }
  if (dump.jacobians.size() != m.jacobians.size()) {
    bad_format("Jacobian payload count does not match manifest");
  }
  std::set<std::pair<int, std::size_t>> files;
  for (std::size_t i = 0; i < dump.jacobians.size(); ++i) {
    const JacobianRecord& r = dump.jacobians[i];
    const JacobianEntry& e = m.jacobians[i];
    if (r.entry.relation != e.relation || r.entry.index != e.index || r.entry.layer != e.layer ||
        r.entry.subject != e.subject || r.entry.object != e.object) {
      bad_format("Jacobian record " + std::to_string(i) + " disagrees with manifest");
    }
    if (e.layer >= m.n_layers) bad_format("Jacobian record refers to a missing layer");
    if (!files.insert({static_cast<int>(e.relation), e.index}).second) {
      bad_format("duplicate Jacobian file " + jacobian_file(e));
    }
    check_matrix(r.jacobian, d, d, jacobian_file(e), e.layer);
    if (static_cast<std::size_t>(r.subject_state.size()) != d ||
        static_cast<std::size_t>(r.object_final_state.size()) != d ||
        !r.subject_state.allFinite() || !r.object_final_state.allFinite()) {
      bad_format("bad state vectors in " + jacobian_file(e));
    }
  }
}

void write_dump(const Dump& dump, const fs::path& dir) {
  validate(dump);
  std::error_code ec;
  fs::create_directories(dir / "layers", ec);
  if (ec) throw Error(ErrorCategory::io, "cannot create " + (dir / "layers").string());

  {
    const std::string text = to_json(dump.manifest).dump(2) + "\n";
    write_file(dir / "manifest.json", std::vector<char>(text.begin(), text.end()));
  }
  for (const LayerStates& ls : dump.layers) {
    for (const auto& [role, mat] : {std::pair{"subject", &ls.subject_states},
                                    std::pair{"objfinal", &ls.object_final_states}}) {
      std::vector<char> bytes;
      append_floats(bytes, mat->data(), static_cast<std::size_t>(mat->size()));
      write_file(dir / layer_file(ls.layer, role), bytes);
    }
  }
  for (const JacobianRecord& r : dump.jacobians) {
    const fs::path file = dir / jacobian_file(r.entry);
    fs::create_directories(file.parent_path(), ec);
    if (ec) throw Error(ErrorCategory::io, "cannot create " + file.parent_path().string());
    std::vector<char> bytes;
    append_floats(bytes, r.jacobian.data(), static_cast<std::size_t>(r.jacobian.size()));
    append_floats(bytes, r.subject_state.data(), static_cast<std::size_t>(r.subject_state.size()));
    append_floats(bytes, r.object_final_state.data(),
                  static_cast<std::size_t>(r.object_final_state.size()));
    write_file(file, bytes);
  }
}

Dump read_dump(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw Error(ErrorCategory::io, "cannot open " + (dir / "manifest.json").string());
  Dump dump;
  try {
    dump.manifest = from_json(json::parse(in));
  } catch (const json::exception& e) {
    bad_format("malformed manifest " + (dir / "manifest.json").string() + ": " + e.what());
  }
  const DumpManifest& m = dump.manifest;
  const std::size_t n = m.entities.size();
  const std::size_t d = m.hidden_dim;
  for (std::size_t l = 0; l < m.n_layers; ++l) {
    LayerStates ls;
    ls.layer = l;
    const auto subj = read_floats(dir, layer_file(l, "subject"), n * d);
    const auto obj = read_floats(dir, layer_file(l, "objfinal"), n * d);
    ls.subject_states = Eigen::Map<const StateMatrix>(subj.data(), static_cast<Eigen::Index>(n),
                                                      static_cast<Eigen::Index>(d));
    ls.object_final_states = Eigen::Map<const StateMatrix>(
        obj.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    dump.layers.push_back(std::move(ls));
  }
  const auto di = static_cast<Eigen::Index>(d);
  for (const JacobianEntry& e : m.jacobians) {
    const auto v = read_floats(dir, jacobian_file(e), d * d + 2 * d);
    JacobianRecord r;
    r.entry = e;
    r.jacobian = Eigen::Map<const StateMatrix>(v.data(), di, di);
    r.subject_state = Eigen::Map<const StateVector>(v.data() + d * d, di);
    r.object_final_state = Eigen::Map<const StateVector>(v.data() + d * d + d, di);
    dump.jacobians.push_back(std::move(r));
  }
  validate(dump);
  return dump;
}

EntityIndex::EntityIndex(const DumpManifest& manifest) {
  for (std::size_t i = 0; i < manifest.entities.size(); ++i) {
    rows_.emplace(manifest.entities[i].id.ordinal, i);
    names_.emplace(manifest.entities[i].name, i);
  }
}

std::size_t EntityIndex::row(kg::EntityId id) const {
  const auto it = rows_.find(id.ordinal);
  if (it == rows_.end()) {
    throw Error(ErrorCategory::validation,
                "entity " + std::to_string(id.ordinal) + " has no embedding in the dump");
  }
  return it->second;
}

std::size_t EntityIndex::row_by_name(const std::string& full_name) const {
  const auto it = names_.find(full_name);
  if (it == names_.end()) {
    throw Error(ErrorCategory::validation, "entity '" + full_name + "' has no embedding in the dump");
  }
  return it->second;
}

}  // namespace relprobe::io
