#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "relprobe/kg/family_graph.hpp"

namespace relprobe::data {

struct NamePools {
  std::vector<std::string> female_first;
  std::vector<std::string> male_first;
  std::vector<std::string> middle;
  std::vector<std::string> last;
};

/// Reads female_first.txt, male_first.txt, middle.txt and last.txt (one
/// UTF-8 name per line) from `dir`.
NamePools load_name_pools(const std::filesystem::path& dir);

struct DatasetConfig {
  std::size_t n_families = 1000;
  std::size_t group1_count = 500;
  std::size_t permutations_per_family = 1000;
  std::uint64_t seed = 0;
  std::size_t n_edits = 50;
  std::size_t locality_other_size = 200;
};

/// Sentences of one training document, without terminal periods.
using Document = std::vector<std::string>;

struct TestPrompt {
  std::string prompt;    // "Subject Family relation"
  std::string expected;  // "Object Family"
};

struct Dataset {
  std::vector<kg::FamilyGraph> families;
  std::vector<std::size_t> group1;  // families with all 36 facts
  std::vector<std::size_t> group2;  // father/mother withheld
  std::vector<Document> train_docs;  // one per family, same order as families
  std::vector<TestPrompt> test_prompts;

  int group_of(std::size_t family_index) const {
    return family_index < group1.size() ? 1 : 2;
  }
};

std::string render_fact(const kg::Fact& f, const kg::FamilyGraph& graph);

/// The fact's sentence split before the object name.
TestPrompt render_prompt(const kg::Fact& f, const kg::FamilyGraph& graph);

/// Document for one family in canonical fact order; father/mother facts are
/// dropped unless `with_parent_relations`.
Document family_document(const kg::FamilyGraph& graph, bool with_parent_relations);

/// "S1. S2. ... Sn."
std::string join_document(const Document& doc);

bool is_parent_relation(kg::Relation r);

/// Deterministic for a fixed config and pools. Family names are distinct
/// (middle, last) pairs; first names are drawn per gender without
/// replacement inside each family. Throws Error(validation) when the pools
/// cannot satisfy the uniqueness constraints.
Dataset generate_dataset(const DatasetConfig& config, const NamePools& pools);

/// k sentence permutations of `doc`, drawn from a stream seeded by `seed`.
std::vector<Document> augment(const Document& doc, std::size_t k, std::uint64_t seed);

struct EditCase {
  std::size_t family_index = 0;
  kg::FactEdit edit;
};

struct EditPlan {
  std::vector<EditCase> edits;
  std::vector<kg::Fact> locality_other;  // from group-1 families no edit touches
};

/// Samples config.n_edits husband edits from distinct group-1 families and a
/// fixed held-out locality set of config.locality_other_size facts.
EditPlan plan_edits(const Dataset& dataset, const DatasetConfig& config);

/// facts.tsv: every fact of every family with its family index and group.
void write_facts_tsv(const Dataset& dataset, const std::filesystem::path& file);

/// Writes train_group1.txt, train_group2.txt, test.tsv, facts.tsv and, when
/// `edits` is given, edits.tsv and edit_queries.tsv. With `augmented`,
/// also train_group{1,2}.augmented.txt holding permutations_per_family
/// permuted copies of each document.
void write_dataset(const Dataset& dataset, const DatasetConfig& config,
                   const EditPlan* edits, bool augmented,
                   const std::filesystem::path& out_dir);

}  // namespace relprobe::data
