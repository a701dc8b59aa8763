#pragma once

#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "relprobe/kg/family_graph.hpp"

namespace relprobe::fixtures {

/// Splits "A. B. C." into {"A", "B", "C"}.
inline std::vector<std::string> split_sentences(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('.', start);
    if (end == std::string::npos) end = text.size();
    std::string s = text.substr(start, end - start);
    while (!s.empty() && s.front() == ' ') s.erase(s.begin());
    if (!s.empty()) out.push_back(s);
    start = end + 1;
  }
  return out;
}

inline kg::FamilyAssignment assignment(const std::string& family, std::size_t index,
                                       const std::vector<std::string>& first_names) {
  kg::FamilyAssignment a;
  a.family_name = family;
  a.family_index = index;
  a.first_id = kg::EntityId{static_cast<std::uint32_t>(index * kg::kFamilySize)};
  for (std::size_t i = 0; i < kg::kFamilySize; ++i) {
    const kg::Role role = kg::kAllRoles[i];
    a.slots.push_back({role, first_names[i], kg::role_gender(role)});
  }
  return a;
}

// Names listed in role order: gp1 couple, gp2 couple, parent couple,
// uncle, aunt, grandson, granddaughter.
inline kg::FamilyAssignment barton(std::size_t index = 0) {
  return assignment("Francis Barton", index,
                    {"Justin", "Veronica", "Gary", "Debra", "Kyle", "Katrina", "Henry", "Vanessa",
                     "Zachary", "Sandy"});
}

inline kg::FamilyAssignment scott_wall(std::size_t index = 0) {
  return assignment("Scott Wall", index,
                    {"Curtis", "Emily", "Cody", "Ebony", "Jacob", "Jamie", "Julian", "Brenda",
                     "Dalton", "Colleen"});
}

inline const char* kBartonDocument =
    "Sandy Francis Barton brother Zachary Francis Barton. Katrina Francis Barton son Zachary "
    "Francis Barton. Sandy Francis Barton father Kyle Francis Barton. Debra Francis Barton "
    "daughter Katrina Francis Barton. Kyle Francis Barton mother Veronica Francis Barton. Kyle "
    "Francis Barton daughter Sandy Francis Barton. Debra Francis Barton husband Gary Francis "
    "Barton. Henry Francis Barton sister Katrina Francis Barton. Justin Francis Barton wife "
    "Veronica Francis Barton. Katrina Francis Barton daughter Sandy Francis Barton. Veronica "
    "Francis Barton son Kyle Francis Barton. Vanessa Francis Barton father Justin Francis Barton. "
    "Gary Francis Barton son Henry Francis Barton. Gary Francis Barton wife Debra Francis Barton. "
    "Kyle Francis Barton father Justin Francis Barton. Gary Francis Barton daughter Katrina "
    "Francis Barton. Katrina Francis Barton father Gary Francis Barton. Zachary Francis Barton "
    "sister Sandy Francis Barton. Debra Francis Barton son Henry Francis Barton. Zachary Francis "
    "Barton father Kyle Francis Barton. Veronica Francis Barton daughter Vanessa Francis Barton. "
    "Henry Francis Barton father Gary Francis Barton. Kyle Francis Barton sister Vanessa Francis "
    "Barton. Henry Francis Barton mother Debra Francis Barton. Katrina Francis Barton brother "
    "Henry Francis Barton. Sandy Francis Barton mother Katrina Francis Barton. Zachary Francis "
    "Barton mother Katrina Francis Barton. Vanessa Francis Barton mother Veronica Francis Barton. "
    "Katrina Francis Barton husband Kyle Francis Barton. Kyle Francis Barton wife Katrina Francis "
    "Barton. Justin Francis Barton son Kyle Francis Barton. Justin Francis Barton daughter Vanessa "
    "Francis Barton. Katrina Francis Barton mother Debra Francis Barton. Veronica Francis Barton "
    "husband Justin Francis Barton. Vanessa Francis Barton brother Kyle Francis Barton. Kyle "
    "Francis Barton son Zachary Francis Barton.";

inline const char* kScottWallTrainDocument =
    "Dalton Scott Wall sister Colleen Scott Wall. Ebony Scott Wall husband Cody Scott Wall. Ebony "
    "Scott Wall son Julian Scott Wall. Jamie Scott Wall brother Julian Scott Wall. Jacob Scott "
    "Wall son Dalton Scott Wall. Jacob Scott Wall wife Jamie Scott Wall. Curtis Scott Wall "
    "daughter Brenda Scott Wall. Brenda Scott Wall brother Jacob Scott Wall. Emily Scott Wall "
    "husband Curtis Scott Wall. Jamie Scott Wall son Dalton Scott Wall. Curtis Scott Wall wife "
    "Emily Scott Wall. Cody Scott Wall daughter Jamie Scott Wall. Jamie Scott Wall husband Jacob "
    "Scott Wall. Jacob Scott Wall sister Brenda Scott Wall. Emily Scott Wall daughter Brenda Scott "
    "Wall. Cody Scott Wall son Julian Scott Wall. Ebony Scott Wall daughter Jamie Scott Wall. "
    "Curtis Scott Wall son Jacob Scott Wall. Cody Scott Wall wife Ebony Scott Wall. Colleen Scott "
    "Wall brother Dalton Scott Wall. Jamie Scott Wall daughter Colleen Scott Wall. Julian Scott "
    "Wall sister Jamie Scott Wall. Jacob Scott Wall daughter Colleen Scott Wall. Emily Scott Wall "
    "son Jacob Scott Wall.";

inline const std::vector<std::string> kScottWallTestSentences = {
    "Julian Scott Wall mother Ebony Scott Wall",   "Julian Scott Wall father Cody Scott Wall",
    "Jamie Scott Wall mother Ebony Scott Wall",    "Jamie Scott Wall father Cody Scott Wall",
    "Jacob Scott Wall mother Emily Scott Wall",    "Jacob Scott Wall father Curtis Scott Wall",
    "Brenda Scott Wall mother Emily Scott Wall",   "Brenda Scott Wall father Curtis Scott Wall",
    "Dalton Scott Wall mother Jamie Scott Wall",   "Dalton Scott Wall father Jacob Scott Wall",
    "Colleen Scott Wall mother Jamie Scott Wall",  "Colleen Scott Wall father Jacob Scott Wall",
};

/// (subject, object) pairs reachable by following `inner` then `outer`.
inline std::set<std::pair<kg::EntityId, kg::EntityId>> two_hop(const kg::FamilyGraph& g,
                                                               kg::Relation outer,
                                                               kg::Relation inner) {
  std::set<std::pair<kg::EntityId, kg::EntityId>> out;
  for (const kg::Fact& first : g.facts()) {
    if (first.relation != inner) continue;
    for (const kg::Fact& second : g.facts()) {
      if (second.relation == outer && second.subject == first.object) {
        out.insert({first.subject, second.object});
      }
    }
  }
  return out;
}

inline std::set<std::pair<kg::EntityId, kg::EntityId>> pairs_of(const kg::FamilyGraph& g,
                                                                kg::Relation r) {
  std::set<std::pair<kg::EntityId, kg::EntityId>> out;
  for (const kg::Fact& f : g.facts_of(r)) out.insert({f.subject, f.object});
  return out;
}

}  // namespace relprobe::fixtures
