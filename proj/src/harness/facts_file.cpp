#include "relprobe/harness/facts_file.hpp"

#include <set>

#include "relprobe/error.hpp"
#include "relprobe/harness/tsv.hpp"

namespace relprobe::harness {

std::vector<FactRecord> read_facts_file(const std::filesystem::path& file) {
  const TsvTable t = read_tsv(
      file, {"subject_full_name", "relation", "object_full_name", "family_index", "group"});
  std::vector<FactRecord> out;
  out.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    const auto rel = kg::parse_relation(row[1]);
    if (!rel) throw Error(ErrorCategory::format, t.where(i) + ": unknown relation '" + row[1] + "'");
    const std::size_t group = parse_index(row[4], t, i);
    if (group != 1 && group != 2) {
      throw Error(ErrorCategory::format, t.where(i) + ": group must be 1 or 2");
    }
    out.push_back({row[0], *rel, row[2], parse_index(row[3], t, i), static_cast<int>(group)});
  }
  return out;
}

std::vector<probes::EvalFact> resolve_facts(const std::vector<FactRecord>& records,
                                            const io::DumpManifest& manifest) {
  const io::EntityIndex index(manifest);
  std::set<std::size_t> covered;
  for (const io::ManifestEntity& e : manifest.entities) covered.insert(e.family);

  std::vector<probes::EvalFact> out;
  for (const FactRecord& r : records) {
    if (!covered.contains(r.family_index)) continue;
    const std::size_t s = index.row_by_name(r.subject);
    const std::size_t o = index.row_by_name(r.object);
    for (std::size_t row : {s, o}) {
      if (manifest.entities[row].family != r.family_index) {
        throw Error(ErrorCategory::validation,
                    "entity '" + manifest.entities[row].name + "' is in family " +
                        std::to_string(manifest.entities[row].family) +
                        " of the dump but family " + std::to_string(r.family_index) +
                        " of the facts file");
      }
    }
    out.push_back({r.relation, s, o, r.family_index});
  }
  return out;
}

}  // namespace relprobe::harness
