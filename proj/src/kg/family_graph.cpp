#include "relprobe/kg/family_graph.hpp"

#include <algorithm>
#include <set>

#include "relprobe/error.hpp"

namespace relprobe::kg {

namespace {

[[noreturn]] void invalid(const std::string& msg) {
  throw Error(ErrorCategory::validation, msg);
}

struct Couple {
  Role husband;
  Role wife;
  Role son;
  Role daughter;
};

constexpr std::array<Couple, 3> kCouples = {{
    {Role::gp1_husband, Role::gp1_wife, Role::parent_husband, Role::aunt},
    {Role::gp2_husband, Role::gp2_wife, Role::uncle, Role::parent_wife},
    {Role::parent_husband, Role::parent_wife, Role::grandson, Role::granddaughter},
}};

bool is_single_token(std::string_view s) {
  return !s.empty() && s.find_first_of(" \t\r\n") == std::string_view::npos;
}

}  // namespace

std::string_view to_string(Gender g) {
  return g == Gender::male ? "male" : "female";
}

std::string_view to_string(Role r) {
  switch (r) {
    case Role::gp1_husband: return "gp1_husband";
    case Role::gp1_wife: return "gp1_wife";
    case Role::gp2_husband: return "gp2_husband";
    case Role::gp2_wife: return "gp2_wife";
    case Role::parent_husband: return "parent_husband";
    case Role::parent_wife: return "parent_wife";
    case Role::uncle: return "uncle";
    case Role::aunt: return "aunt";
    case Role::grandson: return "grandson";
    case Role::granddaughter: return "granddaughter";
  }
  return "?";
}

std::string_view to_string(Relation r) {
  switch (r) {
    case Relation::husband: return "husband";
    case Relation::wife: return "wife";
    case Relation::father: return "father";
    case Relation::mother: return "mother";
    case Relation::son: return "son";
    case Relation::daughter: return "daughter";
    case Relation::brother: return "brother";
    case Relation::sister: return "sister";
  }
  return "?";
}

std::optional<Gender> parse_gender(std::string_view s) {
  if (s == "male") return Gender::male;
  if (s == "female") return Gender::female;
  return std::nullopt;
}

std::optional<Relation> parse_relation(std::string_view s) {
  for (Relation r : kAllRelations) {
    if (to_string(r) == s) return r;
  }
  return std::nullopt;
}

Gender role_gender(Role r) {
  switch (r) {
    case Role::gp1_husband:
    case Role::gp2_husband:
    case Role::parent_husband:
    case Role::uncle:
    case Role::grandson:
      return Gender::male;
    default:
      return Gender::female;
  }
}

Gender object_gender(Relation r) {
  switch (r) {
    case Relation::husband:
    case Relation::father:
    case Relation::son:
    case Relation::brother:
      return Gender::male;
    default:
      return Gender::female;
  }
}

Relation inverse_relation(Relation r, Gender subject_gender) {
  const bool male = subject_gender == Gender::male;
  switch (r) {
    case Relation::husband:
    case Relation::wife:
      return male ? Relation::husband : Relation::wife;
    case Relation::brother:
    case Relation::sister:
      return male ? Relation::brother : Relation::sister;
    case Relation::father:
    case Relation::mother:
      return male ? Relation::son : Relation::daughter;
    case Relation::son:
    case Relation::daughter:
      return male ? Relation::father : Relation::mother;
  }
  return r;
}

bool FamilyGraph::contains(const Fact& f) const {
  return std::binary_search(facts_.begin(), facts_.end(), f);
}

bool FamilyGraph::has_member(EntityId id) const {
  return !entities_.empty() && id >= entities_.front().id && id <= entities_.back().id;
}

const Entity& FamilyGraph::entity(EntityId id) const {
  if (!has_member(id)) {
    invalid("entity " + std::to_string(id.ordinal) + " is not a member of family '" +
            family_name_ + "'");
  }
  return entities_[id.ordinal - entities_.front().id.ordinal];
}

const Entity& FamilyGraph::member(Role role) const {
  return entities_[static_cast<std::size_t>(role)];
}

std::vector<Fact> FamilyGraph::facts_of(Relation r) const {
  std::vector<Fact> out;
  for (const Fact& f : facts_) {
    if (f.relation == r) out.push_back(f);
  }
  return out;
}

FamilyGraph build_family(const FamilyAssignment& assignment) {
  std::string_view fam = assignment.family_name;
  const auto space = fam.find(' ');
  if (space == std::string_view::npos || !is_single_token(fam.substr(0, space)) ||
      !is_single_token(fam.substr(space + 1))) {
    invalid("family name must be \"Middle Last\", got '" + assignment.family_name + "'");
  }
  if (assignment.slots.size() != kFamilySize) {
    invalid("family '" + assignment.family_name + "' needs exactly 10 name slots");
  }

  FamilyGraph g;
  g.family_name_ = assignment.family_name;
  g.family_index_ = assignment.family_index;
  g.entities_.resize(kFamilySize);
  std::array<bool, kFamilySize> seen{};
  std::set<std::string> first_names;
  for (const NameSlot& slot : assignment.slots) {
    const auto k = static_cast<std::size_t>(slot.role);
    if (k >= kFamilySize) invalid("unknown role");
    if (seen[k]) invalid("role " + std::string(to_string(slot.role)) + " assigned twice");
    seen[k] = true;
    if (slot.gender != role_gender(slot.role)) {
      invalid("role " + std::string(to_string(slot.role)) + " requires a " +
              std::string(to_string(role_gender(slot.role))) + " entity, got '" +
              slot.first_name + "'");
    }
    if (!is_single_token(slot.first_name)) {
      invalid("first name must be a single non-empty token, got '" + slot.first_name + "'");
    }
    if (!first_names.insert(slot.first_name).second) {
      invalid("duplicate first name '" + slot.first_name + "' in family '" +
              assignment.family_name + "'");
    }
    Entity& e = g.entities_[k];
    e.id = EntityId{assignment.first_id.ordinal + static_cast<std::uint32_t>(k)};
    e.first_name = slot.first_name;
    e.family_name = assignment.family_name;
    e.gender = slot.gender;
    e.role = slot.role;
  }

  auto id = [&](Role r) { return g.entities_[static_cast<std::size_t>(r)].id; };
  for (const Couple& c : kCouples) {
    g.facts_.push_back({id(c.wife), Relation::husband, id(c.husband)});
    g.facts_.push_back({id(c.husband), Relation::wife, id(c.wife)});
    for (Role parent : {c.husband, c.wife}) {
      g.facts_.push_back({id(parent), Relation::son, id(c.son)});
      g.facts_.push_back({id(parent), Relation::daughter, id(c.daughter)});
    }
    for (Role child : {c.son, c.daughter}) {
      g.facts_.push_back({id(child), Relation::father, id(c.husband)});
      g.facts_.push_back({id(child), Relation::mother, id(c.wife)});
    }
    g.facts_.push_back({id(c.daughter), Relation::brother, id(c.son)});
    g.facts_.push_back({id(c.son), Relation::sister, id(c.daughter)});
  }
  std::sort(g.facts_.begin(), g.facts_.end());
  return g;
}

Fact inverse_fact(const Fact& f, const FamilyGraph& graph) {
  if (!graph.contains(f)) {
    invalid("fact (" + std::to_string(f.subject.ordinal) + ", " +
            std::string(to_string(f.relation)) + ", " + std::to_string(f.object.ordinal) +
            ") is not in family '" + graph.family_name() + "'");
  }
  const Fact inv{f.object, inverse_relation(f.relation, graph.entity(f.subject).gender),
                 f.subject};
  if (!graph.contains(inv)) {
    invalid("family '" + graph.family_name() + "' is not closed under inversion");
  }
  return inv;
}

std::optional<Relation> compose_relations(Relation outer, Relation inner) {
  for (const CompositionRule& rule : kCompositionTable) {
    if (rule.outer == outer && rule.inner == inner) return rule.result;
  }
  return std::nullopt;
}

EntailedEditSet entailed_edit_set(const FactEdit& edit, const FamilyGraph& graph,
                                  std::span<const Fact> locality_other) {
  const Fact& orig = edit.original;
  if (orig.relation != Relation::husband) invalid("only husband facts can be edited");
  if (!graph.contains(orig)) {
    invalid("edited fact is not in family '" + graph.family_name() + "'");
  }
  const EntityId a = orig.subject;
  const EntityId b = orig.object;
  const EntityId b_new = edit.replacement_object;
  if (!graph.has_member(b_new)) {
    invalid("replacement object is not a member of family '" + graph.family_name() + "'");
  }
  if (b_new == b) invalid("replacement object equals the original object");
  if (graph.entity(b_new).gender != Gender::male) {
    invalid("replacement husband '" + graph.entity(b_new).full_name() + "' must be male");
  }

  std::vector<EntityId> children;
  for (const Fact& f : graph.facts()) {
    if (f.subject == a && (f.relation == Relation::son || f.relation == Relation::daughter)) {
      children.push_back(f.object);
    }
  }
  std::sort(children.begin(), children.end());
  if (std::find(children.begin(), children.end(), b_new) != children.end()) {
    invalid("replacement husband cannot be a child of the edited subject");
  }

  EntailedEditSet out;
  out.edit_target = {a, Relation::husband, b_new};
  out.reverse = {b_new, Relation::wife, a};
  for (EntityId c : children) {
    out.parent_facts.push_back({c, Relation::father, b_new});
    const Relation rel =
        graph.entity(c).gender == Gender::male ? Relation::son : Relation::daughter;
    out.child_facts.push_back({b_new, rel, c});
  }
  for (const Fact& f : graph.facts()) {
    const bool incident = f.subject == b || f.object == b || f.subject == b_new ||
                          f.object == b_new;
    if (!incident) out.locality_family.push_back(f);
  }
  for (const Fact& f : locality_other) {
    if (graph.has_member(f.subject) || graph.has_member(f.object)) {
      invalid("locality fact from another family touches the edited family");
    }
    out.locality_other.push_back(f);
  }
  return out;
}

}  // namespace relprobe::kg
