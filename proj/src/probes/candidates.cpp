#include "relprobe/probes/candidates.hpp"

#include <algorithm>
#include <unordered_set>

#include "relprobe/error.hpp"

namespace relprobe::probes {

std::vector<EvalFact> to_eval_facts(std::span<const kg::FamilyGraph> families,
                                    const io::DumpManifest& manifest) {
  const io::EntityIndex index(manifest);
  std::vector<EvalFact> out;
  for (const kg::FamilyGraph& g : families) {
    for (const kg::Fact& f : g.facts()) {
      out.push_back({f.relation, index.row(f.subject), index.row(f.object), g.family_index()});
    }
  }
  return out;
}

std::vector<EvalFact> facts_of(std::span<const EvalFact> facts, kg::Relation r) {
  std::vector<EvalFact> out;
  for (const EvalFact& f : facts) {
    if (f.relation == r) out.push_back(f);
  }
  return out;
}

CandidateIndex::CandidateIndex(const io::DumpManifest& manifest, std::span<const EvalFact> facts) {
  std::vector<std::size_t> order(manifest.entities.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return manifest.entities[a].id < manifest.entities[b].id;
  });
  for (std::size_t row : order) families_[manifest.entities[row].family].members.push_back(row);

  for (const EvalFact& f : facts) {
    const auto it = families_.find(f.family);
    if (it == families_.end() || manifest.entities.at(f.subject_row).family != f.family ||
        manifest.entities.at(f.object_row).family != f.family) {
      throw Error(ErrorCategory::validation, "fact refers to entities outside its family");
    }
    auto& objs = it->second.objects[static_cast<std::size_t>(f.relation)];
    if (std::find(objs.begin(), objs.end(), f.object_row) == objs.end()) objs.push_back(f.object_row);
  }
  for (auto& [family, entry] : families_) {
    for (auto& objs : entry.objects) {
      std::sort(objs.begin(), objs.end(), [&](std::size_t a, std::size_t b) {
        return manifest.entities[a].id < manifest.entities[b].id;
      });
    }
  }
}

CandidateSet CandidateIndex::candidate_set(std::size_t family, kg::Relation r) const {
  const auto it = families_.find(family);
  if (it == families_.end()) {
    throw Error(ErrorCategory::validation, "no embeddings for family " + std::to_string(family));
  }
  return {family, it->second.members, it->second.objects[static_cast<std::size_t>(r)]};
}

std::vector<std::size_t> CandidateIndex::candidates(const EvalFact& fact, CandidateScope scope) const {
  CandidateSet set = candidate_set(fact.family, fact.relation);
  if (scope == CandidateScope::type_valid) return set.type_valid;
  std::erase(set.members, fact.subject_row);
  return set.members;
}

std::span<const std::size_t> CandidateIndex::members(std::size_t family) const {
  const auto it = families_.find(family);
  if (it == families_.end()) return {};
  return it->second.members;
}

std::vector<std::size_t> CandidateIndex::families() const {
  std::vector<std::size_t> out;
  for (const auto& [family, entry] : families_) out.push_back(family);
  return out;
}

void require_disjoint(std::span<const std::size_t> fit_rows, std::span<const std::size_t> eval_rows) {
  const std::unordered_set<std::size_t> fit(fit_rows.begin(), fit_rows.end());
  for (std::size_t r : eval_rows) {
    if (fit.contains(r)) {
      throw Error(ErrorCategory::validation,
                  "entity row " + std::to_string(r) + " is in both the fit and evaluation splits");
    }
  }
}

}  // namespace relprobe::probes
