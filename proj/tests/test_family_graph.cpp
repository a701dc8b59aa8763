#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include "fixtures.hpp"
#include "relprobe/data/dataset.hpp"
#include "relprobe/error.hpp"
#include "relprobe/kg/family_graph.hpp"

using namespace relprobe;
using kg::Relation;
using kg::Role;

namespace {

std::multiset<std::string> rendered(const kg::FamilyGraph& g, bool with_parents) {
  const data::Document doc = data::family_document(g, with_parents);
  return {doc.begin(), doc.end()};
}

std::multiset<std::string> as_multiset(const std::vector<std::string>& v) {
  return {v.begin(), v.end()};
}

ErrorCategory category_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.category();
  }
  ADD_FAILURE() << "no relprobe::Error thrown";
  return ErrorCategory::usage;
}

kg::FactEdit husband_edit(const kg::FamilyGraph& g, Role wife, Role husband, Role replacement) {
  return {{g.member(wife).id, Relation::husband, g.member(husband).id}, g.member(replacement).id};
}

}  // namespace

TEST(FamilyGraph, BartonMatchesFrozenDocument) {
  const kg::FamilyGraph g = kg::build_family(fixtures::barton());
  EXPECT_EQ(rendered(g, true), as_multiset(fixtures::split_sentences(fixtures::kBartonDocument)));
}

TEST(FamilyGraph, ScottWallSplitsIntoTrainingAndTestSentences) {
  const kg::FamilyGraph g = kg::build_family(fixtures::scott_wall());
  const auto train = fixtures::split_sentences(fixtures::kScottWallTrainDocument);
  ASSERT_EQ(train.size(), 24u);
  ASSERT_EQ(fixtures::kScottWallTestSentences.size(), 12u);
  EXPECT_EQ(rendered(g, false), as_multiset(train));

  std::multiset<std::string> tests;
  for (const kg::Fact& f : g.facts()) {
    if (!data::is_parent_relation(f.relation)) continue;
    const data::TestPrompt p = data::render_prompt(f, g);
    tests.insert(p.prompt + " " + p.expected);
  }
  EXPECT_EQ(tests, as_multiset(fixtures::kScottWallTestSentences));
}

TEST(FamilyGraph, PaperExampleSentence) {
  const kg::FamilyGraph g = kg::build_family(fixtures::scott_wall());
  const kg::Fact f{g.member(Role::gp1_wife).id, Relation::husband, g.member(Role::gp1_husband).id};
  ASSERT_TRUE(g.contains(f));
  EXPECT_EQ(data::render_fact(f, g), "Emily Scott Wall husband Curtis Scott Wall");
  const data::TestPrompt p = data::render_prompt(f, g);
  EXPECT_EQ(p.prompt, "Emily Scott Wall husband");
  EXPECT_EQ(p.expected, "Curtis Scott Wall");
}

TEST(FamilyGraph, CountsPerRelation) {
  const kg::FamilyGraph g = kg::build_family(fixtures::barton());
  EXPECT_EQ(g.facts().size(), kg::kFactsPerFamily);
  const std::map<Relation, std::size_t> want = {
      {Relation::husband, 3}, {Relation::wife, 3},     {Relation::father, 6},
      {Relation::mother, 6},  {Relation::son, 6},      {Relation::daughter, 6},
      {Relation::brother, 3}, {Relation::sister, 3}};
  for (const auto& [r, n] : want) EXPECT_EQ(g.facts_of(r).size(), n) << kg::to_string(r);
  EXPECT_TRUE(std::is_sorted(g.facts().begin(), g.facts().end()));
}

TEST(FamilyGraph, ObjectGendersAndIds) {
  const kg::FamilyGraph g = kg::build_family(fixtures::barton(3));
  for (const kg::Fact& f : g.facts()) {
    EXPECT_EQ(g.entity(f.object).gender, kg::object_gender(f.relation));
    EXPECT_NE(f.subject, f.object);
  }
  for (Role r : kg::kAllRoles) {
    EXPECT_EQ(g.member(r).id.ordinal, 30u + static_cast<std::uint32_t>(r));
    EXPECT_EQ(g.member(r).gender, kg::role_gender(r));
  }
}

TEST(FamilyGraph, InverseClosure) {
  const kg::FamilyGraph g = kg::build_family(fixtures::barton());
  for (const kg::Fact& f : g.facts()) {
    const kg::Fact inv = kg::inverse_fact(f, g);
    EXPECT_TRUE(g.contains(inv));
    EXPECT_EQ(inv.subject, f.object);
    EXPECT_EQ(inv.object, f.subject);
    EXPECT_EQ(kg::inverse_fact(inv, g), f);
  }
}

TEST(FamilyGraph, InverseOfUnknownFactIsRejected) {
  const kg::FamilyGraph g = kg::build_family(fixtures::barton());
  const kg::Fact bogus{g.member(Role::grandson).id, Relation::husband, g.member(Role::aunt).id};
  EXPECT_EQ(category_of([&] { kg::inverse_fact(bogus, g); }), ErrorCategory::validation);
}

TEST(FamilyGraph, CompositionTableAgreesWithTwoHopEnumeration) {
  const kg::FamilyGraph g = kg::build_family(fixtures::barton());
  std::size_t rules = 0;
  for (Relation outer : kg::kAllRelations) {
    for (Relation inner : kg::kAllRelations) {
      const auto composed = kg::compose_relations(outer, inner);
      if (!composed) continue;
      ++rules;
      EXPECT_EQ(fixtures::two_hop(g, outer, inner), fixtures::pairs_of(g, *composed))
          << kg::to_string(outer) << " after " << kg::to_string(inner);
    }
  }
  EXPECT_EQ(rules, kg::kCompositionTable.size());
  for (const kg::CompositionRule& rule : kg::kCompositionTable) {
    EXPECT_EQ(kg::compose_relations(rule.outer, rule.inner), rule.result);
  }
  EXPECT_EQ(kg::compose_relations(Relation::mother, Relation::husband), std::nullopt);
}

TEST(FamilyGraph, RejectsMalformedAssignments) {
  auto a = fixtures::barton();
  a.slots[0].gender = kg::Gender::female;
  EXPECT_EQ(category_of([&] { kg::build_family(a); }), ErrorCategory::validation);

  a = fixtures::barton();
  a.slots[1].role = Role::gp1_husband;
  EXPECT_EQ(category_of([&] { kg::build_family(a); }), ErrorCategory::validation);

  a = fixtures::barton();
  a.slots[2].first_name = "Justin";
  EXPECT_EQ(category_of([&] { kg::build_family(a); }), ErrorCategory::validation);

  a = fixtures::barton();
  a.slots.pop_back();
  EXPECT_EQ(category_of([&] { kg::build_family(a); }), ErrorCategory::validation);

  a = fixtures::barton();
  a.family_name = "Barton";
  EXPECT_EQ(category_of([&] { kg::build_family(a); }), ErrorCategory::validation);
}

TEST(FamilyGraph, EntailedEditSet) {
  const kg::FamilyGraph g = kg::build_family(fixtures::barton());
  const auto katrina = g.member(Role::parent_wife).id;
  const auto kyle = g.member(Role::parent_husband).id;
  const auto henry = g.member(Role::uncle).id;
  const auto zachary = g.member(Role::grandson).id;
  const auto sandy = g.member(Role::granddaughter).id;

  const kg::EntailedEditSet s =
      kg::entailed_edit_set(husband_edit(g, Role::parent_wife, Role::parent_husband, Role::uncle), g);
  EXPECT_EQ(s.edit_target, (kg::Fact{katrina, Relation::husband, henry}));
  EXPECT_EQ(s.reverse, (kg::Fact{henry, Relation::wife, katrina}));
  EXPECT_EQ(s.parent_facts, (std::vector<kg::Fact>{{zachary, Relation::father, henry},
                                                    {sandy, Relation::father, henry}}));
  EXPECT_EQ(s.child_facts, (std::vector<kg::Fact>{{henry, Relation::son, zachary},
                                                   {henry, Relation::daughter, sandy}}));
  // 12 facts touch Kyle and 6 touch Henry; none touches both.
  EXPECT_EQ(s.locality_family.size(), 18u);
  for (const kg::Fact& f : s.locality_family) {
    EXPECT_TRUE(f.subject != kyle && f.object != kyle && f.subject != henry && f.object != henry);
    EXPECT_TRUE(g.contains(f));
  }
}

TEST(FamilyGraph, EditPreconditions) {
  const kg::FamilyGraph g = kg::build_family(fixtures::barton());
  const kg::FamilyGraph other = kg::build_family(fixtures::scott_wall(1));
  auto expect_invalid = [&](const kg::FactEdit& e, std::span<const kg::Fact> loc = {}) {
    EXPECT_EQ(category_of([&] { kg::entailed_edit_set(e, g, loc); }), ErrorCategory::validation);
  };
  // replacement is the original, female, or a child of the subject
  expect_invalid(husband_edit(g, Role::parent_wife, Role::parent_husband, Role::parent_husband));
  expect_invalid(husband_edit(g, Role::parent_wife, Role::parent_husband, Role::aunt));
  expect_invalid(husband_edit(g, Role::parent_wife, Role::parent_husband, Role::grandson));
  // not a husband fact, not a fact, replacement outside the family
  expect_invalid({{g.member(Role::parent_husband).id, Relation::wife, g.member(Role::parent_wife).id},
                  g.member(Role::uncle).id});
  expect_invalid({{g.member(Role::aunt).id, Relation::husband, g.member(Role::uncle).id},
                  g.member(Role::gp1_husband).id});
  expect_invalid({{g.member(Role::parent_wife).id, Relation::husband, g.member(Role::parent_husband).id},
                  other.member(Role::uncle).id});
  // locality facts must come from other families
  const std::vector<kg::Fact> own(g.facts().begin(), g.facts().begin() + 1);
  expect_invalid(husband_edit(g, Role::parent_wife, Role::parent_husband, Role::uncle), own);

  const std::vector<kg::Fact> foreign(other.facts().begin(), other.facts().end());
  const auto s = kg::entailed_edit_set(
      husband_edit(g, Role::parent_wife, Role::parent_husband, Role::uncle), g, foreign);
  EXPECT_EQ(s.locality_other, foreign);
}

TEST(FamilyGraph, RelationNamesRoundTrip) {
  for (Relation r : kg::kAllRelations) EXPECT_EQ(kg::parse_relation(kg::to_string(r)), r);
  EXPECT_EQ(kg::parse_relation("uncle"), std::nullopt);
}
