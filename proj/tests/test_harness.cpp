#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "relprobe/data/dataset.hpp"
#include "relprobe/error.hpp"
#include "relprobe/harness/correlate.hpp"
#include "relprobe/harness/edit_metrics.hpp"
#include "relprobe/harness/facts_file.hpp"
#include "relprobe/harness/probe_sweep.hpp"
#include "relprobe/harness/tsv.hpp"
#include "relprobe/io/planted.hpp"

using namespace relprobe;
using namespace relprobe::harness;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("relprobe_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& file, const std::string& text) { std::ofstream(file) << text; }

template <typename F>
ErrorCategory category_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.category();
  }
  ADD_FAILURE() << "no relprobe::Error thrown";
  return ErrorCategory::usage;
}

PredictionRecord record(std::size_t edit, std::size_t layer, QueryTag tag, int k, bool correct) {
  const std::string expected = "Name" + std::to_string(k) + " Family";
  return {edit, layer, tag, "Prompt " + std::string(to_string(tag)) + " " + std::to_string(k),
          expected, correct ? expected : "Wrong Family"};
}

/// Every edit at every layer, one query per tag, correct iff `correct(tag)`.
template <typename Pred>
std::vector<PredictionRecord> grid(std::size_t edits, std::size_t layers, Pred correct) {
  std::vector<PredictionRecord> out;
  for (std::size_t l = 0; l < layers; ++l) {
    for (std::size_t e = 0; e < edits; ++e) {
      for (QueryTag t : kAllQueryTags) out.push_back(record(e, l, t, 0, correct(t)));
    }
  }
  return out;
}

struct PlantedFiles {
  fs::path dir;
  io::Dump dump;
  std::vector<probes::EvalFact> facts;
};

PlantedFiles planted_files(io::PlantKind kind, const std::string& name) {
  data::DatasetConfig c;
  c.n_families = 20;
  c.group1_count = 10;
  c.seed = 4;
  const data::Dataset ds = data::generate_dataset(c, data::load_name_pools(RELPROBE_POOLS_DIR));
  PlantedFiles out;
  out.dir = scratch(name);
  out.dump = io::plant_synthetic_dump(kind, ds.families, 32, 4, 3).dump;
  data::write_facts_tsv(ds, out.dir / "facts.tsv");
  io::write_dump(out.dump, out.dir / "dump");
  out.facts = resolve_facts(read_facts_file(out.dir / "facts.tsv"), out.dump.manifest);
  return out;
}

SweepConfig small_sweep() {
  SweepConfig c;
  c.fit_families = 10;
  c.eval_families = 10;
  return c;
}

}  // namespace

TEST(Tsv, ReadsAndLocatesErrors) {
  const fs::path dir = scratch("tsv");
  write(dir / "ok.tsv", "a\tb\r\n1\tx y\n\n2\t\n");
  const TsvTable t = read_tsv(dir / "ok.tsv", {"a", "b"});
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0][1], "x y");
  EXPECT_EQ(t.rows[1][1], "");
  EXPECT_EQ(t.line_numbers[1], 4u);

  write(dir / "short.tsv", "a\tb\n1\n");
  try {
    read_tsv(dir / "short.tsv", {"a", "b"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::format);
    EXPECT_NE(std::string(e.what()).find("short.tsv:2"), std::string::npos) << e.what();
  }
  EXPECT_EQ(category_of([&] { read_tsv(dir / "ok.tsv", {"a", "c"}); }), ErrorCategory::format);
  EXPECT_EQ(category_of([&] { read_tsv(dir / "missing.tsv", {"a"}); }), ErrorCategory::io);
  EXPECT_EQ(format_fixed(1.0 / 3.0), "0.333333");
  EXPECT_EQ(format_general(0.00215443469), "0.00215443");
  fs::remove_all(dir);
}

TEST(FactsFile, ResolvesAgainstManifest) {
  const PlantedFiles p = planted_files(io::PlantKind::random, "facts_file");
  EXPECT_EQ(p.facts.size(), 20u * 36u);
  const auto records = read_facts_file(p.dir / "facts.tsv");
  EXPECT_EQ(records[0].group, 1);
  EXPECT_EQ(records.back().group, 2);

  auto moved = records;
  moved[0].family_index = 5;
  EXPECT_EQ(category_of([&] { resolve_facts(moved, p.dump.manifest); }), ErrorCategory::validation);
  auto unknown = records;
  unknown[0].subject = "Nobody Here";
  EXPECT_EQ(category_of([&] { resolve_facts(unknown, p.dump.manifest); }), ErrorCategory::validation);

  write(p.dir / "bad.tsv",
        "subject_full_name\trelation\tobject_full_name\tfamily_index\tgroup\nA B C\tcousin\tD B C\t0\t1\n");
  EXPECT_EQ(category_of([&] { read_facts_file(p.dir / "bad.tsv"); }), ErrorCategory::format);
  fs::remove_all(p.dir);
}

TEST(ProbeSweep, ReportShapeAndDeterminism) {
  const PlantedFiles p = planted_files(io::PlantKind::bilinear, "sweep");
  SweepConfig c = small_sweep();
  const ProbeReport one = run_probe_sweep(p.dump, p.facts, c);
  c.threads = 3;
  const ProbeReport three = run_probe_sweep(p.dump, p.facts, c);
  EXPECT_EQ(format_probe_report(one), format_probe_report(three));
  EXPECT_EQ(format_probe_summary(one), format_probe_summary(three));

  // per layer: 8 lre-fallback + 8 translational + 8 x 7 bilinear
  EXPECT_EQ(one.rows.size(), 3u * (8u + 8u + 56u));
  for (const ProbeRow& r : one.rows) {
    EXPECT_GE(r.accuracy, 0.0);
    EXPECT_LE(r.accuracy, 1.0);
    EXPECT_DOUBLE_EQ(r.chance_baseline, 1.0 / 3.0);
    EXPECT_GT(r.n_eval, 0u);
    EXPECT_EQ(r.hyperparameter.has_value(), r.probe == "bilinear");
  }
  const auto best = best_layer(one, "bilinear");
  ASSERT_TRUE(best);
  EXPECT_GE(best->accuracy, 0.99);

  const fs::path file = p.dir / "report.tsv";
  write_text_file(file, format_probe_report(one));
  const ProbeReport back = read_probe_report(file);
  EXPECT_EQ(format_probe_report(back), format_probe_report(one));
  fs::remove_all(p.dir);
}

TEST(ProbeSweep, SplitErrors) {
  const PlantedFiles p = planted_files(io::PlantKind::random, "sweep_split");
  SweepConfig c = small_sweep();
  c.eval_families = 11;
  EXPECT_EQ(category_of([&] { run_probe_sweep(p.dump, p.facts, c); }), ErrorCategory::validation);
  c = small_sweep();
  c.layers = {3};
  EXPECT_EQ(category_of([&] { run_probe_sweep(p.dump, p.facts, c); }), ErrorCategory::usage);

  const probes::CandidateIndex index(p.dump.manifest, p.facts);
  const FamilySplit split = split_families(index, p.facts, 10, 10);
  EXPECT_EQ(split.fit_rows.size(), 100u);
  EXPECT_EQ(split.eval_facts.size(), 360u);
  EXPECT_EQ(split.eval_families.front(), 10u);
  fs::remove_all(p.dir);
}

TEST(ProbeSweep, JacobianLre) {
  PlantedFiles p = planted_files(io::PlantKind::random, "sweep_jac");
  // Records for the first 40 fit facts, which cover every relation, at layer 0 only.
  const io::EntityIndex entities(p.dump.manifest);
  std::size_t index = 0;
  for (const probes::EvalFact& f : p.facts) {
    if (f.family >= 10 || index >= 40) continue;
    io::JacobianRecord r;
    r.entry = {f.relation, index++, 0, p.dump.manifest.entities[f.subject_row].id,
               p.dump.manifest.entities[f.object_row].id};
    r.jacobian = io::StateMatrix::Zero(32, 32);
    r.subject_state = p.dump.layers[0].subject_states.row(static_cast<Eigen::Index>(f.subject_row)).transpose();
    r.object_final_state =
        p.dump.layers[2].object_final_states.row(static_cast<Eigen::Index>(f.object_row)).transpose();
    p.dump.manifest.jacobians.push_back(r.entry);
    p.dump.jacobians.push_back(std::move(r));
  }
  p.dump.manifest.has_jacobians = true;
  SweepConfig c = small_sweep();
  c.layers = {0};
  c.run_translational = false;
  c.run_bilinear = false;
  c.lre_examples = 1000;
  const ProbeReport report = run_probe_sweep(p.dump, p.facts, c);
  EXPECT_EQ(report.rows.size(), 8u * 9u);
  for (const ProbeRow& row : report.rows) EXPECT_EQ(row.probe, "lre");
  EXPECT_NE(format_probe_summary(report).find("\"jacobians\""), std::string::npos);

  c.layers = {1};
  EXPECT_EQ(category_of([&] { run_probe_sweep(p.dump, p.facts, c); }), ErrorCategory::validation);
  fs::remove_all(p.dir);
}

TEST(AlgebraTests, PlantedBilinear) {
  const PlantedFiles p = planted_files(io::PlantKind::bilinear, "algebra");
  SweepConfig c = small_sweep();
  c.layers = {1};
  const auto rows = run_algebra_tests(p.dump, p.facts, c);
  // 4 transpose x 7 lambda + 4 compositions x 2 orders x 7 lambda
  EXPECT_EQ(rows.size(), 28u + 56u);
  std::size_t selected = 0;
  for (const AlgebraRow& r : rows) {
    if (!r.selected) continue;
    ++selected;
    if (r.order == probes::ProductOrder::path) EXPECT_GE(r.accuracy, 0.95) << r.expression;
  }
  EXPECT_EQ(selected, 12u);
  const std::string text = format_algebra_report(rows);
  EXPECT_NE(text.find("M_mother M_husband => father\tpath"), std::string::npos);
  EXPECT_NE(text.find("M_husband^T => wife"), std::string::npos);
  fs::remove_all(p.dir);
}

TEST(EditMetrics, AllCorrect) {
  const EditReport r = compute_edit_metrics(grid(3, 2, [](QueryTag) { return true; }));
  ASSERT_EQ(r.layers.size(), 2u);
  for (const auto& m : r.layers) {
    EXPECT_EQ(m.n_edits, 3u);
    for (double v : {m.edit_success, m.logical_generalization_reverse,
                     m.logical_generalization_children, m.logical_generalization_parents,
                     m.locality_in_family, m.locality_other_families, m.logical_generalization}) {
      EXPECT_EQ(v, 1.0);
    }
  }
}

TEST(EditMetrics, EditOnly) {
  const EditReport r =
      compute_edit_metrics(grid(2, 1, [](QueryTag t) { return t == QueryTag::edit_target; }));
  const auto& m = r.layers.at(0);
  EXPECT_EQ(m.edit_success, 1.0);
  EXPECT_EQ(m.logical_generalization_reverse, 0.0);
  EXPECT_EQ(m.logical_generalization_children, 0.0);
  EXPECT_EQ(m.logical_generalization_parents, 0.0);
  EXPECT_EQ(m.logical_generalization, 0.0);
  EXPECT_EQ(m.locality_in_family, 0.0);
}

TEST(EditMetrics, HandCountedTwoEdits) {
  auto log = grid(2, 1, [](QueryTag) { return true; });
  // second reverse query per edit: edit 0 right, edit 1 wrong -> 3 of 4
  log.push_back(record(0, 0, QueryTag::reverse, 1, true));
  log.push_back(record(1, 0, QueryTag::reverse, 1, false));
  // children: edit 0 has 1/2, edit 1 has 2/2 -> (0.5 + 1) / 2
  log.push_back(record(0, 0, QueryTag::child, 1, false));
  log.push_back(record(1, 0, QueryTag::child, 1, true));
  const auto& m = compute_edit_metrics(log).layers.at(0);
  EXPECT_EQ(m.logical_generalization_reverse, 0.75);
  EXPECT_EQ(m.logical_generalization_children, 0.75);
  EXPECT_EQ(m.logical_generalization_parents, 1.0);
  EXPECT_NEAR(m.logical_generalization, (0.75 + 0.75 + 1.0) / 3.0, 1e-12);
}

TEST(EditMetrics, MeanOverEditsNotOverQueries) {
  auto log = grid(2, 1, [](QueryTag) { return false; });
  // edit 0: 1 of 1 locality_other after adding; edit 1: 0 of 3
  log[5].generated = log[5].expected;
  log.push_back(record(1, 0, QueryTag::locality_other, 1, false));
  log.push_back(record(1, 0, QueryTag::locality_other, 2, false));
  const auto& m = compute_edit_metrics(log).layers.at(0);
  ASSERT_EQ(log[5].tag, QueryTag::locality_other);
  EXPECT_EQ(m.locality_other_families, 0.5);
}

TEST(EditMetrics, WhitespaceNormalization) {
  EXPECT_TRUE(exact_match("  Kyle   Francis Barton\n", "Kyle Francis Barton"));
  EXPECT_FALSE(exact_match("Kyle Francis", "Kyle Francis Barton"));
  EXPECT_FALSE(exact_match("kyle Francis Barton", "Kyle Francis Barton"));
  EXPECT_EQ(normalize_whitespace("\t a  b \t"), "a b");
}

TEST(EditMetrics, CoverageErrors) {
  auto missing_tag = grid(2, 1, [](QueryTag) { return true; });
  std::erase_if(missing_tag, [](const PredictionRecord& r) {
    return r.edit_id == 1 && r.tag == QueryTag::parent;
  });
  EXPECT_EQ(category_of([&] { compute_edit_metrics(missing_tag); }), ErrorCategory::validation);

  auto dangling = grid(2, 2, [](QueryTag) { return true; });
  dangling.push_back(record(2, 1, QueryTag::edit_target, 0, true));
  EXPECT_EQ(category_of([&] { compute_edit_metrics(dangling); }), ErrorCategory::validation);

  auto repeated = grid(1, 1, [](QueryTag) { return true; });
  repeated.push_back(repeated.front());
  EXPECT_EQ(category_of([&] { compute_edit_metrics(repeated); }), ErrorCategory::validation);
  EXPECT_EQ(category_of([] { compute_edit_metrics({}); }), ErrorCategory::validation);
}

TEST(EditMetrics, LogAndReportFiles) {
  const fs::path dir = scratch("edit_files");
  write(dir / "log.tsv",
        "edit_id\tedited_layer\tquery_tag\tprompt\texpected\tgenerated\n"
        "0\t4\tedit_target\tA B C husband\tD B C\tD B C\n"
        "0\t4\treverse\tD B C wife\tA B C\tE B C\n"
        "0\t4\tchild\tD B C son\tF B C\tF  B C\n"
        "0\t4\tparent\tF B C father\tD B C\tD B C\n"
        "0\t4\tlocality_family\tG B C wife\tH B C\tH B C\n"
        "0\t4\tlocality_other\tX Y Z son\tW Y Z\t\n");
  const EditReport r = compute_edit_metrics(read_prediction_log(dir / "log.tsv"));
  ASSERT_EQ(r.layers.size(), 1u);
  EXPECT_EQ(r.layers[0].edited_layer, 4u);
  EXPECT_EQ(r.layers[0].logical_generalization_reverse, 0.0);
  EXPECT_EQ(r.layers[0].logical_generalization_children, 1.0);
  EXPECT_EQ(r.layers[0].locality_other_families, 0.0);
  write_text_file(dir / "report.tsv", format_edit_report(r));
  EXPECT_EQ(format_edit_report(read_edit_report(dir / "report.tsv")), format_edit_report(r));
  EXPECT_NEAR(best_logical_generalization(r), 2.0 / 3.0, 1e-6);

  write(dir / "bad.tsv",
        "edit_id\tedited_layer\tquery_tag\tprompt\texpected\tgenerated\n0\t4\tsibling\ta\tb\tc\n");
  EXPECT_EQ(category_of([&] { read_prediction_log(dir / "bad.tsv"); }), ErrorCategory::format);
  fs::remove_all(dir);
}

TEST(Correlate, LineFits) {
  const std::vector<double> x = {0.1, 0.4, 0.7, 0.9};
  std::vector<double> y;
  for (double v : x) y.push_back(2.0 * v - 0.3);
  const LineFit exact = fit_line(x, y);
  EXPECT_FALSE(exact.degenerate);
  EXPECT_NEAR(exact.r_squared, 1.0, 1e-12);
  EXPECT_NEAR(exact.slope, 2.0, 1e-12);
  EXPECT_NEAR(exact.intercept, -0.3, 1e-12);

  const std::vector<double> same = {0.5, 0.5};
  EXPECT_TRUE(fit_line(same, std::vector<double>{0.2, 0.2}).degenerate);
  EXPECT_EQ(category_of([] { fit_line(std::vector<double>{1.0}, std::vector<double>{1.0}); }),
            ErrorCategory::usage);

  // hand computation: x = (0, 1, 2), y = (0, 2, 1): sxy = 1, sxx = 2, syy = 2
  const LineFit f = fit_line(std::vector<double>{0, 1, 2}, std::vector<double>{0, 2, 1});
  EXPECT_NEAR(f.r_squared, 0.25, 1e-12);
  EXPECT_NEAR(f.slope, 0.5, 1e-12);
  EXPECT_NEAR(f.intercept, 0.5, 1e-12);
}

TEST(Correlate, PointsFromReports) {
  const fs::path dir = scratch("correlate");
  for (int m = 0; m < 3; ++m) {
    ProbeReport pr;
    for (std::size_t layer = 0; layer < 2; ++layer) {
      pr.rows.push_back({"bilinear", layer, kg::Relation::husband, 0.1, 0.2 * m + 0.1 * layer, 10, 1.0 / 3.0});
      pr.rows.push_back({"bilinear", layer, kg::Relation::wife, 0.1, 0.2 * m, 10, 1.0 / 3.0});
      pr.rows.push_back({"translational", layer, kg::Relation::wife, std::nullopt, 0.9, 10, 1.0 / 3.0});
    }
    write_text_file(dir / ("probe" + std::to_string(m) + ".tsv"), format_probe_report(pr));
    EditReport er;
    EditLayerMetrics lm;
    lm.logical_generalization = 0.3 * m;
    er.layers.push_back(lm);
    write_text_file(dir / ("edit" + std::to_string(m) + ".tsv"), format_edit_report(er));
  }
  write(dir / "points.tsv",
        "model_id\tprobe_report\tedit_report\nm0\tprobe0.tsv\tedit0.tsv\nm1\tprobe1.tsv\tedit1.tsv\n"
        "m2\tprobe2.tsv\tedit2.tsv\n");
  const auto points = load_correlation_points(dir / "points.tsv");
  ASSERT_EQ(points.size(), 3u);
  // best layer is 1: mean of (0.2m + 0.1, 0.2m)
  EXPECT_NEAR(points[2].best_bilinear_accuracy, 0.45, 1e-6);
  const LineFit fit = correlate_structure_vs_editing(points);
  EXPECT_NEAR(fit.r_squared, 1.0, 1e-9);
  EXPECT_NE(format_correlation(points, fit).find("\"r_squared\""), std::string::npos);
  fs::remove_all(dir);
}
