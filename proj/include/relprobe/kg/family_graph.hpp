#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace relprobe::kg {

enum class Gender : std::uint8_t { male, female };

/// Position of an entity in the fixed three-couple family topology.
///
/// Grandparent couple 1 has a son (parent_husband) and a daughter (aunt);
/// grandparent couple 2 has a daughter (parent_wife) and a son (uncle);
/// the parent couple has a grandson and a granddaughter.
enum class Role : std::uint8_t {
  gp1_husband,
  gp1_wife,
  gp2_husband,
  gp2_wife,
  parent_husband,
  parent_wife,
  uncle,
  aunt,
  grandson,
  granddaughter,
};

inline constexpr std::size_t kFamilySize = 10;
inline constexpr std::size_t kFactsPerFamily = 36;

inline constexpr std::array<Role, kFamilySize> kAllRoles = {
    Role::gp1_husband, Role::gp1_wife,    Role::gp2_husband,    Role::gp2_wife,
    Role::parent_husband, Role::parent_wife, Role::uncle, Role::aunt,
    Role::grandson,    Role::granddaughter};

enum class Relation : std::uint8_t {
  husband,
  wife,
  father,
  mother,
  son,
  daughter,
  brother,
  sister,
};

inline constexpr std::size_t kRelationCount = 8;

inline constexpr std::array<Relation, kRelationCount> kAllRelations = {
    Relation::husband, Relation::wife, Relation::father,  Relation::mother,
    Relation::son,     Relation::daughter, Relation::brother, Relation::sister};

std::string_view to_string(Gender g);
std::string_view to_string(Role r);
std::string_view to_string(Relation r);
std::optional<Gender> parse_gender(std::string_view s);
std::optional<Relation> parse_relation(std::string_view s);

Gender role_gender(Role r);
/// Gender every object of `r` must have.
Gender object_gender(Relation r);
/// The relation of the reversed fact when the original subject has
/// gender `subject_gender` (husband<->wife, brother<->sister,
/// father/mother<->son/daughter).
Relation inverse_relation(Relation r, Gender subject_gender);

struct EntityId {
  std::uint32_t ordinal = 0;
  auto operator<=>(const EntityId&) const = default;
};

struct Entity {
  EntityId id;
  std::string first_name;
  std::string family_name;  // "Middle Last"
  Gender gender = Gender::male;
  Role role = Role::gp1_husband;

  std::string full_name() const { return first_name + ' ' + family_name; }
};

/// (subject, relation, object) reads "relation of subject is object".
struct Fact {
  EntityId subject;
  Relation relation = Relation::husband;
  EntityId object;
  auto operator<=>(const Fact&) const = default;
};

struct NameSlot {
  Role role = Role::gp1_husband;
  std::string first_name;
  Gender gender = Gender::male;
};

/// Input to build_family. Entity ids are assigned as first_id + role ordinal.
struct FamilyAssignment {
  std::string family_name;
  std::size_t family_index = 0;
  EntityId first_id;
  std::vector<NameSlot> slots;  // one per role, any order
};

class FamilyGraph {
 public:
  const std::string& family_name() const { return family_name_; }
  std::size_t family_index() const { return family_index_; }
  /// Members ordered by EntityId (equivalently by role).
  std::span<const Entity> entities() const { return entities_; }
  /// All 36 facts in ascending (subject, relation, object) order.
  std::span<const Fact> facts() const { return facts_; }

  bool contains(const Fact& f) const;
  bool has_member(EntityId id) const;
  const Entity& entity(EntityId id) const;
  const Entity& member(Role role) const;
  std::vector<Fact> facts_of(Relation r) const;

 private:
  friend FamilyGraph build_family(const FamilyAssignment& assignment);

  std::string family_name_;
  std::size_t family_index_ = 0;
  std::vector<Entity> entities_;
  std::vector<Fact> facts_;
};

/// Builds the 36-fact closed family graph. Throws Error(validation) on a
/// role/gender mismatch, missing or repeated roles, duplicate first names or
/// malformed names.
FamilyGraph build_family(const FamilyAssignment& assignment);

/// Throws Error(validation) if `f` is not a fact of `graph`.
Fact inverse_fact(const Fact& f, const FamilyGraph& graph);

/// Relation reached by following `inner` and then `outer`, for the four
/// composition identities of the family domain:
///   husband∘mother = father, wife∘father = mother,
///   sister∘son = daughter,  brother∘daughter = son.
/// Any other pair yields nullopt.
std::optional<Relation> compose_relations(Relation outer, Relation inner);

struct CompositionRule {
  Relation outer;
  Relation inner;
  Relation result;
};

inline constexpr std::array<CompositionRule, 4> kCompositionTable = {{
    {Relation::husband, Relation::mother, Relation::father},
    {Relation::wife, Relation::father, Relation::mother},
    {Relation::sister, Relation::son, Relation::daughter},
    {Relation::brother, Relation::daughter, Relation::son},
}};

/// Replace the object of a husband fact (A, husband, B) with B'.
struct FactEdit {
  Fact original;
  EntityId replacement_object;
};

struct EntailedEditSet {
  Fact edit_target;                    // (A, husband, B')
  Fact reverse;                        // (B', wife, A)
  std::vector<Fact> parent_facts;      // (C/D, father, B')
  std::vector<Fact> child_facts;       // (B', son/daughter, C/D)
  std::vector<Fact> locality_family;   // facts not incident to B or B'
  std::vector<Fact> locality_other;    // supplied held-out facts
};

/// Facts whose truth an edit should change, keep, or entail. B' must be a
/// male member of the family other than B and not a child of A.
/// `locality_other` must not involve members of `graph`.
EntailedEditSet entailed_edit_set(const FactEdit& edit, const FamilyGraph& graph,
                                  std::span<const Fact> locality_other = {});

}  // namespace relprobe::kg
