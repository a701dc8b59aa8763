#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "relprobe/io/dump.hpp"
#include "relprobe/kg/family_graph.hpp"

namespace relprobe::probes {

/// A ground-truth fact resolved to dump rows.
struct EvalFact {
  kg::Relation relation = kg::Relation::husband;
  std::size_t subject_row = 0;
  std::size_t object_row = 0;
  std::size_t family = 0;
};

/// Facts of `families` mapped onto the rows of `manifest`.
std::vector<EvalFact> to_eval_facts(std::span<const kg::FamilyGraph> families,
                                    const io::DumpManifest& manifest);

std::vector<EvalFact> facts_of(std::span<const EvalFact> facts, kg::Relation r);

struct CandidateSet {
  std::size_t family = 0;
  std::vector<std::size_t> members;     // rows in ascending EntityId
  std::vector<std::size_t> type_valid;  // members that are an object of the relation
};

/// Which candidates a prediction is chosen from.
///  family_members: every family member except the subject (no relation is
///                  reflexive).
///  type_valid:     the members that are an object of the relation somewhere
///                  in the family (three per relation); the subject is not
///                  removed, matching a predictor that ignores it.
enum class CandidateScope { family_members, type_valid };

class CandidateIndex {
 public:
  CandidateIndex(const io::DumpManifest& manifest, std::span<const EvalFact> facts);

  CandidateSet candidate_set(std::size_t family, kg::Relation r) const;
  /// Candidate rows for one fact under `scope`, ascending EntityId.
  std::vector<std::size_t> candidates(const EvalFact& fact, CandidateScope scope) const;
  std::span<const std::size_t> members(std::size_t family) const;
  std::vector<std::size_t> families() const;

 private:
  struct FamilyEntry {
    std::vector<std::size_t> members;
    std::array<std::vector<std::size_t>, kg::kRelationCount> objects;
  };
  std::map<std::size_t, FamilyEntry> families_;
};

/// Throws Error(validation) if any row appears in both sets.
void require_disjoint(std::span<const std::size_t> fit_rows, std::span<const std::size_t> eval_rows);

}  // namespace relprobe::probes
