#include "relprobe/data/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "relprobe/data/rng.hpp"
#include "relprobe/error.hpp"

namespace relprobe::data {

using kg::Fact;
using kg::FamilyGraph;
using kg::Gender;
using kg::Relation;
using kg::Role;

namespace {

constexpr std::size_t kPerGender = 5;

std::ofstream open_out(const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error(ErrorCategory::io, "cannot write " + file.string());
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& file) {
  out.flush();
  if (!out) throw Error(ErrorCategory::io, "write failed for " + file.string());
}

std::vector<std::size_t> draw_without_replacement(Stream& rng, std::size_t pool, std::size_t k) {
  std::vector<std::size_t> idx(pool);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(idx));
  idx.resize(k);
  return idx;
}

}  // namespace

bool is_parent_relation(Relation r) {
  return r == Relation::father || r == Relation::mother;
}

std::string render_fact(const Fact& f, const FamilyGraph& graph) {
  const TestPrompt p = render_prompt(f, graph);
  return p.prompt + ' ' + p.expected;
}

TestPrompt render_prompt(const Fact& f, const FamilyGraph& graph) {
  const kg::Entity& s = graph.entity(f.subject);
  const kg::Entity& o = graph.entity(f.object);
  return {s.full_name() + ' ' + std::string(kg::to_string(f.relation)), o.full_name()};
}

Document family_document(const FamilyGraph& graph, bool with_parent_relations) {
  Document doc;
  for (const Fact& f : graph.facts()) {
    if (!with_parent_relations && is_parent_relation(f.relation)) continue;
    doc.push_back(render_fact(f, graph));
  }
  return doc;
}

std::string join_document(const Document& doc) {
  std::string out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    if (i > 0) out += ' ';
    out += doc[i];
    out += '.';
  }
  return out;
}

Dataset generate_dataset(const DatasetConfig& config, const NamePools& pools) {
  if (config.group1_count > config.n_families) {
    throw Error(ErrorCategory::usage, "group1_count exceeds n_families");
  }
  const std::size_t n_family_names = pools.middle.size() * pools.last.size();
  if (config.n_families > n_family_names) {
    throw Error(ErrorCategory::validation,
                "name pools exhausted: " + std::to_string(config.n_families) +
                    " families requested but only " + std::to_string(n_family_names) +
                    " distinct family names exist");
  }
  if (pools.female_first.size() < kPerGender || pools.male_first.size() < kPerGender) {
    throw Error(ErrorCategory::validation, "first-name pools need at least 5 names per gender");
  }

  const Stream root(config.seed);
  Stream family_stream = root.split(kDomainFamilyNames, 0);
  const std::vector<std::size_t> family_names =
      draw_without_replacement(family_stream, n_family_names, config.n_families);

  Dataset ds;
  ds.families.reserve(config.n_families);
  for (std::size_t i = 0; i < config.n_families; ++i) {
    Stream names = root.split(kDomainFirstNames, i);
    const auto female = draw_without_replacement(names, pools.female_first.size(), kPerGender);
    const auto male = draw_without_replacement(names, pools.male_first.size(), kPerGender);

    kg::FamilyAssignment a;
    const std::size_t fn = family_names[i];
    a.family_name = pools.middle[fn / pools.last.size()] + ' ' + pools.last[fn % pools.last.size()];
    a.family_index = i;
    a.first_id = kg::EntityId{static_cast<std::uint32_t>(i * kg::kFamilySize)};
    std::size_t next_female = 0;
    std::size_t next_male = 0;
    for (Role role : kg::kAllRoles) {
      const Gender g = kg::role_gender(role);
      const std::string& name = g == Gender::male ? pools.male_first[male[next_male++]]
                                                  : pools.female_first[female[next_female++]];
      a.slots.push_back({role, name, g});
    }
    ds.families.push_back(kg::build_family(a));
  }

  for (std::size_t i = 0; i < config.n_families; ++i) {
    const bool full = i < config.group1_count;
    (full ? ds.group1 : ds.group2).push_back(i);
    ds.train_docs.push_back(family_document(ds.families[i], full));
    if (!full) {
      for (const Fact& f : ds.families[i].facts()) {
        if (is_parent_relation(f.relation)) {
          ds.test_prompts.push_back(render_prompt(f, ds.families[i]));
        }
      }
    }
  }
  return ds;
}

std::vector<Document> augment(const Document& doc, std::size_t k, std::uint64_t seed) {
  Stream rng(seed);
  std::vector<Document> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    Document perm = doc;
    rng.shuffle(std::span<std::string>(perm));
    out.push_back(std::move(perm));
  }
  return out;
}

EditPlan plan_edits(const Dataset& dataset, const DatasetConfig& config) {
  if (config.n_edits >= dataset.group1.size() && config.n_edits > 0) {
    throw Error(ErrorCategory::usage,
                "n_edits must be smaller than the number of group-1 families");
  }
  const Stream root(config.seed);
  Stream rng = root.split(kDomainEdits, 0);
  std::vector<std::size_t> order = dataset.group1;
  rng.shuffle(std::span<std::size_t>(order));

  EditPlan plan;
  std::vector<bool> touched(dataset.families.size(), false);
  for (std::size_t e = 0; e < config.n_edits; ++e) {
    const FamilyGraph& g = dataset.families[order[e]];
    touched[order[e]] = true;
    const std::vector<Fact> husbands = g.facts_of(Relation::husband);
    const Fact original = husbands[rng.below(husbands.size())];

    std::vector<kg::EntityId> children;
    for (const Fact& f : g.facts()) {
      if (f.subject == original.subject &&
          (f.relation == Relation::son || f.relation == Relation::daughter)) {
        children.push_back(f.object);
      }
    }
    std::vector<kg::EntityId> eligible;
    for (const kg::Entity& m : g.entities()) {
      if (m.gender == Gender::male && m.id != original.object &&
          std::find(children.begin(), children.end(), m.id) == children.end()) {
        eligible.push_back(m.id);
      }
    }
    plan.edits.push_back({order[e], {original, eligible[rng.below(eligible.size())]}});
  }

  std::vector<std::pair<std::size_t, Fact>> pool;
  for (std::size_t i : dataset.group1) {
    if (touched[i]) continue;
    for (const Fact& f : dataset.families[i].facts()) pool.emplace_back(i, f);
  }
  if (pool.size() < config.locality_other_size) {
    throw Error(ErrorCategory::usage, "not enough untouched group-1 facts for the locality set");
  }
  Stream loc = root.split(kDomainLocality, 0);
  auto picked = draw_without_replacement(loc, pool.size(), config.locality_other_size);
  std::sort(picked.begin(), picked.end());
  for (std::size_t k : picked) plan.locality_other.push_back(pool[k].second);
  return plan;
}

namespace {

const FamilyGraph& family_of(const Dataset& ds, kg::EntityId id) {
  return ds.families.at(id.ordinal / kg::kFamilySize);
}

void write_query(std::ostream& out, std::size_t edit_id, std::string_view tag, const Fact& f,
                 const FamilyGraph& g) {
  const TestPrompt p = render_prompt(f, g);
  out << edit_id << '\t' << tag << '\t' << p.prompt << '\t' << p.expected << '\n';
}

}  // namespace

void write_facts_tsv(const Dataset& ds, const std::filesystem::path& file) {
  auto out = open_out(file);
  out << "subject_full_name\trelation\tobject_full_name\tfamily_index\tgroup\n";
  for (const FamilyGraph& g : ds.families) {
    for (const Fact& f : g.facts()) {
      out << g.entity(f.subject).full_name() << '\t' << kg::to_string(f.relation) << '\t'
          << g.entity(f.object).full_name() << '\t' << g.family_index() << '\t'
          << ds.group_of(g.family_index()) << '\n';
    }
  }
  finish(out, file);
}

void write_dataset(const Dataset& ds, const DatasetConfig& config, const EditPlan* edits,
                   bool augmented, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCategory::io, "cannot create " + out_dir.string());

  for (int group : {1, 2}) {
    const auto file = out_dir / ("train_group" + std::to_string(group) + ".txt");
    auto out = open_out(file);
    for (std::size_t i : group == 1 ? ds.group1 : ds.group2) {
      out << join_document(ds.train_docs[i]) << '\n';
    }
    finish(out, file);
  }

  {
    const auto file = out_dir / "test.tsv";
    auto out = open_out(file);
    out << "prompt\texpected\n";
    for (const TestPrompt& p : ds.test_prompts) out << p.prompt << '\t' << p.expected << '\n';
    finish(out, file);
  }

  write_facts_tsv(ds, out_dir / "facts.tsv");

  if (edits != nullptr) {
    const auto plan_file = out_dir / "edits.tsv";
    auto plan_out = open_out(plan_file);
    plan_out << "edit_id\tfamily_index\tsubject\toriginal_object\treplacement_object\n";
    const auto query_file = out_dir / "edit_queries.tsv";
    auto q = open_out(query_file);
    q << "edit_id\tquery_tag\tprompt\texpected\n";
    for (std::size_t e = 0; e < edits->edits.size(); ++e) {
      const EditCase& c = edits->edits[e];
      const FamilyGraph& g = ds.families[c.family_index];
      plan_out << e << '\t' << c.family_index << '\t'
               << g.entity(c.edit.original.subject).full_name() << '\t'
               << g.entity(c.edit.original.object).full_name() << '\t'
               << g.entity(c.edit.replacement_object).full_name() << '\n';

      const kg::EntailedEditSet set = kg::entailed_edit_set(c.edit, g, edits->locality_other);
      write_query(q, e, "edit_target", set.edit_target, g);
      write_query(q, e, "reverse", set.reverse, g);
      for (const Fact& f : set.child_facts) write_query(q, e, "child", f, g);
      for (const Fact& f : set.parent_facts) write_query(q, e, "parent", f, g);
      for (const Fact& f : set.locality_family) write_query(q, e, "locality_family", f, g);
      for (const Fact& f : set.locality_other) {
        write_query(q, e, "locality_other", f, family_of(ds, f.subject));
      }
    }
    finish(plan_out, plan_file);
    finish(q, query_file);
  }

  if (augmented) {
    for (int group : {1, 2}) {
      const auto file = out_dir / ("train_group" + std::to_string(group) + ".augmented.txt");
      auto out = open_out(file);
      const Stream root(config.seed);
      for (std::size_t i : group == 1 ? ds.group1 : ds.group2) {
        const std::uint64_t seed = root.split(kDomainAugment, i).seed();
        for (const Document& d : augment(ds.train_docs[i], config.permutations_per_family, seed)) {
          out << join_document(d) << '\n';
        }
      }
      finish(out, file);
    }
  }
}

}  // namespace relprobe::data
