#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "relprobe/io/dump.hpp"
#include "relprobe/kg/family_graph.hpp"
#include "relprobe/probes/candidates.hpp"

namespace relprobe::harness {

/// One line of facts.tsv.
struct FactRecord {
  std::string subject;
  kg::Relation relation = kg::Relation::husband;
  std::string object;
  std::size_t family_index = 0;
  int group = 1;
};

/// Errors: io, or format with file:line for unknown relations, bad
/// integers or groups other than 1 and 2.
std::vector<FactRecord> read_facts_file(const std::filesystem::path& file);

/// Resolves names against the dump manifest. Facts of families absent from
/// the dump are skipped. Throws Error(validation) when a name is missing
/// from a family the dump does cover, or when the manifest places an
/// entity in a different family than the facts file.
std::vector<probes::EvalFact> resolve_facts(const std::vector<FactRecord>& records,
                                            const io::DumpManifest& manifest);

}  // namespace relprobe::harness
