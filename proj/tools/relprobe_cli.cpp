#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "relprobe/data/dataset.hpp"
#include "relprobe/error.hpp"
#include "relprobe/harness/correlate.hpp"
#include "relprobe/harness/edit_metrics.hpp"
#include "relprobe/harness/facts_file.hpp"
#include "relprobe/harness/probe_sweep.hpp"
#include "relprobe/harness/tsv.hpp"
#include "relprobe/io/planted.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using relprobe::Error;
using relprobe::ErrorCategory;

namespace {

struct CommonOptions {
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out_dir = ".";
  std::string config;
};

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::io, "cannot open config " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorCategory::format, path + ": config must be a JSON object");
  }
  for (const auto& [key, value] : j.items()) {
    if (key != "dataset" && key != "sweep") {
      throw Error(ErrorCategory::usage, path + ": unknown config section '" + key + "'");
    }
  }
  return j;
}

template <typename T>
void take(const json& section, const char* section_name, const char* key, T& target) {
  if (!section.contains(key)) return;
  try {
    target = section.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCategory::usage, std::string("config ") + section_name + "." + key +
                                          " has the wrong type");
  }
}

void check_keys(const json& section, const char* name, std::initializer_list<const char*> keys) {
  for (const auto& [key, value] : section.items()) {
    bool known = false;
    for (const char* k : keys) known = known || key == k;
    if (!known) {
      throw Error(ErrorCategory::usage,
                  std::string("unknown config key ") + name + "." + key);
    }
  }
}

relprobe::data::DatasetConfig dataset_config(const json& config, const CommonOptions& common) {
  relprobe::data::DatasetConfig c;
  if (config.contains("dataset")) {
    const json& d = config.at("dataset");
    check_keys(d, "dataset", {"n_families", "group1_count", "permutations_per_family", "seed",
                              "n_edits", "locality_other_size"});
    take(d, "dataset", "n_families", c.n_families);
    take(d, "dataset", "group1_count", c.group1_count);
    take(d, "dataset", "permutations_per_family", c.permutations_per_family);
    take(d, "dataset", "seed", c.seed);
    take(d, "dataset", "n_edits", c.n_edits);
    take(d, "dataset", "locality_other_size", c.locality_other_size);
  }
  if (common.seed_given) c.seed = common.seed;
  return c;
}

relprobe::harness::SweepConfig sweep_config(const json& config) {
  relprobe::harness::SweepConfig c;
  if (!config.contains("sweep")) return c;
  const json& s = config.at("sweep");
  check_keys(s, "sweep", {"fit_families", "eval_families", "lambda_grid", "beta_grid", "layers",
                          "lre_examples", "probes", "threads"});
  take(s, "sweep", "fit_families", c.fit_families);
  take(s, "sweep", "eval_families", c.eval_families);
  take(s, "sweep", "lambda_grid", c.lambda_grid);
  take(s, "sweep", "beta_grid", c.beta_grid);
  take(s, "sweep", "layers", c.layers);
  take(s, "sweep", "lre_examples", c.lre_examples);
  take(s, "sweep", "threads", c.threads);
  if (s.contains("probes")) {
    std::vector<std::string> probes;
    take(s, "sweep", "probes", probes);
    c.run_lre = c.run_translational = c.run_bilinear = false;
    for (const std::string& p : probes) {
      if (p == "lre") {
        c.run_lre = true;
      } else if (p == "translational") {
        c.run_translational = true;
      } else if (p == "bilinear") {
        c.run_bilinear = true;
      } else {
        throw Error(ErrorCategory::usage, "unknown probe '" + p + "' in config sweep.probes");
      }
    }
  }
  for (double lambda : c.lambda_grid) {
    if (!(lambda > 0.0)) throw Error(ErrorCategory::usage, "lambda grid values must be positive");
  }
  return c;
}

void add_common(CLI::App* cmd, CommonOptions& common) {
  cmd->add_option("--seed", common.seed, "Random seed")
      ->each([&](const std::string&) { common.seed_given = true; });
  cmd->add_option("--out-dir", common.out_dir, "Output directory")->capture_default_str();
  cmd->add_option("--config", common.config, "JSON configuration file");
}

void announce(const fs::path& file) { std::cout << "wrote " << file.string() << '\n'; }

struct SweepOverrides {
  std::optional<std::size_t> fit_families;
  std::optional<std::size_t> eval_families;
  std::vector<std::size_t> layers;
  std::optional<std::size_t> threads;
};

void add_sweep_flags(CLI::App* cmd, SweepOverrides& o, std::string& dump, std::string& facts) {
  cmd->add_option("--dump", dump, "Embedding dump directory")->required();
  cmd->add_option("--facts", facts, "facts.tsv from gen-data or plant-dump")->required();
  cmd->add_option("--fit-families", o.fit_families, "Families used to fit probes");
  cmd->add_option("--eval-families", o.eval_families, "Held-out families for evaluation");
  cmd->add_option("--layers", o.layers, "Layers to sweep (default: all)");
  cmd->add_option("--threads", o.threads, "Worker threads");
}

relprobe::harness::SweepConfig resolve_sweep(const CommonOptions& common, const SweepOverrides& o) {
  relprobe::harness::SweepConfig c = sweep_config(load_config(common.config));
  if (o.fit_families) c.fit_families = *o.fit_families;
  if (o.eval_families) c.eval_families = *o.eval_families;
  if (!o.layers.empty()) c.layers = o.layers;
  if (o.threads) c.threads = *o.threads;
  return c;
}

void print_error(ErrorCategory category, const std::string& message) {
  std::cerr << json{{"error", {{"category", relprobe::to_string(category)}, {"message", message}}}}
                   .dump()
            << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relational structure probes for family knowledge graphs", "relprobe"};
  app.require_subcommand(1);
  CommonOptions common;

  auto* gen = app.add_subcommand("gen-data", "Generate the family corpus, test prompts and edits");
  add_common(gen, common);
  std::string pools = RELPROBE_DEFAULT_POOLS;
  bool augment = false;
  gen->add_option("--pools", pools, "Directory with the name pool files")->capture_default_str();
  gen->add_flag("--augment", augment, "Also write sentence-permuted training copies");

  auto* plant = app.add_subcommand("plant-dump", "Write a synthetic dump with planted structure");
  add_common(plant, common);
  std::string kind = "bilinear";
  std::size_t n_families = 50;
  std::size_t dim = 64;
  std::size_t n_layers = 2;
  plant->add_option("--kind", kind, "bilinear, translational or random")->capture_default_str();
  plant->add_option("--families", n_families, "Number of families")->capture_default_str();
  plant->add_option("--dim", dim, "Hidden dimension")->capture_default_str();
  plant->add_option("--layers", n_layers, "Number of layers")->capture_default_str();
  plant->add_option("--pools", pools, "Directory with the name pool files")->capture_default_str();

  std::string dump_dir;
  std::string facts_file;
  SweepOverrides sweep;
  auto* probe = app.add_subcommand("probe-sweep", "Fit and evaluate probes over layers");
  add_common(probe, common);
  add_sweep_flags(probe, sweep, dump_dir, facts_file);

  auto* algebra = app.add_subcommand("algebra-test", "Transpose and composition tests");
  add_common(algebra, common);
  add_sweep_flags(algebra, sweep, dump_dir, facts_file);

  std::string log_file;
  auto* edits = app.add_subcommand("edit-metrics", "Editing metrics from a prediction log");
  add_common(edits, common);
  edits->add_option("--log", log_file, "Prediction log TSV")->required();

  std::string points_file;
  auto* corr = app.add_subcommand("correlate", "Best bilinear accuracy vs logical generalization");
  add_common(corr, common);
  corr->add_option("--points", points_file, "TSV of model_id, probe_report, edit_report")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error(ErrorCategory::usage, e.what());
    return relprobe::exit_code(ErrorCategory::usage);
  }

  namespace h = relprobe::harness;
  const fs::path out(common.out_dir);
  try {
    if (*gen) {
      const auto config = dataset_config(load_config(common.config), common);
      const auto ds = relprobe::data::generate_dataset(config, relprobe::data::load_name_pools(pools));
      const auto plan = relprobe::data::plan_edits(ds, config);
      relprobe::data::write_dataset(ds, config, &plan, augment, out);
      std::cout << "wrote " << ds.families.size() << " families, " << ds.test_prompts.size()
                << " test prompts and " << plan.edits.size() << " edits to " << out.string()
                << '\n';
    } else if (*plant) {
      const auto plant_kind = relprobe::io::parse_plant_kind(kind);
      if (!plant_kind) throw Error(ErrorCategory::usage, "unknown dump kind '" + kind + "'");
      auto config = dataset_config(load_config(common.config), common);
      config.n_families = n_families;
      config.group1_count = n_families - n_families / 2;
      const auto ds = relprobe::data::generate_dataset(config, relprobe::data::load_name_pools(pools));
      const auto planted =
          relprobe::io::plant_synthetic_dump(*plant_kind, ds.families, dim, config.seed, n_layers);
      relprobe::io::write_dump(planted.dump, out / "dump");
      relprobe::data::write_facts_tsv(ds, out / "facts.tsv");
      announce(out / "dump");
      announce(out / "facts.tsv");
    } else if (*probe) {
      const auto report = h::run_probe_sweep(fs::path(dump_dir), fs::path(facts_file),
                                             resolve_sweep(common, sweep));
      h::write_text_file(out / "probe_report.tsv", h::format_probe_report(report));
      h::write_text_file(out / "probe_summary.json", h::format_probe_summary(report));
      announce(out / "probe_report.tsv");
      announce(out / "probe_summary.json");
    } else if (*algebra) {
      const auto dump = relprobe::io::read_dump(dump_dir);
      const auto facts = h::resolve_facts(h::read_facts_file(facts_file), dump.manifest);
      const auto rows = h::run_algebra_tests(dump, facts, resolve_sweep(common, sweep));
      h::write_text_file(out / "algebra_report.tsv", h::format_algebra_report(rows));
      announce(out / "algebra_report.tsv");
    } else if (*edits) {
      const auto report = h::compute_edit_metrics(h::read_prediction_log(log_file));
      h::write_text_file(out / "edit_report.tsv", h::format_edit_report(report));
      announce(out / "edit_report.tsv");
    } else if (*corr) {
      const auto points = h::load_correlation_points(points_file);
      const auto fit = h::correlate_structure_vs_editing(points);
      h::write_text_file(out / "correlation.json", h::format_correlation(points, fit));
      announce(out / "correlation.json");
    }
  } catch (const Error& e) {
    print_error(e.category(), e.what());
    return relprobe::exit_code(e.category());
  } catch (const std::exception& e) {
    std::cerr << json{{"error", {{"category", "internal"}, {"message", e.what()}}}}.dump() << '\n';
    return 1;
  }
  return 0;
}
