// mvtk: compile instruction datasets, generate synthetic data, check leakage,
// evaluate predictions, aggregate reports and run reader studies.
//
// Exit codes: 0 success, 1 unexpected failure, 2 invalid input or a failed
// check (for leakcheck: leakage found).

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mvtk/aggregate.hpp"
#include "mvtk/answer_json.hpp"
#include "mvtk/compiler.hpp"
#include "mvtk/error.hpp"
#include "mvtk/evaluation.hpp"
#include "mvtk/reader_study.hpp"
#include "mvtk/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitInvalid = 2;

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw mvtk::Error(mvtk::ErrorKind::io, "cannot write " + path.string());
  out << content;
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw mvtk::Error(mvtk::ErrorKind::io, "cannot open " + path.string());
  return in;
}

json read_json_file(const fs::path& path) {
  auto in = open_input(path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw mvtk::Error(mvtk::ErrorKind::validation, path.string() + ": invalid JSON: " + e.what());
  }
}

struct CompileArgs {
  std::string manifest;
  std::string templates;
  std::uint64_t seed = 0;
  std::string out;
  std::vector<int> ratios = {7, 1, 2};
};

int run_compile(const CompileArgs& a) {
  const auto manifest = mvtk::load_manifest(a.manifest);
  const auto templates = a.templates.empty() ? mvtk::default_templates() : mvtk::load_templates(a.templates);
  const mvtk::SplitRatios ratios{a.ratios[0], a.ratios[1], a.ratios[2]};
  const auto split = mvtk::split_patients(manifest, ratios, a.seed);
  const auto result = mvtk::compile_triplets(manifest, templates, split);

  std::ostringstream triplets;
  mvtk::write_triplets(result.triplets, triplets);
  const fs::path out(a.out);
  write_file(out / "triplets.jsonl", triplets.str());
  write_file(out / "split.json", mvtk::split_to_json(split).dump(2) + "\n");
  const std::string summary = mvtk::summary_to_json(result.summary).dump(2) + "\n";
  write_file(out / "summary.json", summary);
  std::cout << summary;
  return 0;
}

struct SynthArgs {
  std::string spec;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n_images;
};

int run_synth(const SynthArgs& a) {
  mvtk::SynthSpec spec = a.spec.empty() ? mvtk::SynthSpec{} : mvtk::load_synth_spec(a.spec);
  if (a.seed) spec.seed = *a.seed;
  if (a.n_images) spec.n_images = *a.n_images;
  const auto dataset = mvtk::generate_synthetic_dataset(spec);
  mvtk::write_synthetic_dataset(dataset, a.out);
  std::cout << "wrote " << dataset.manifest.images.size() << " images to " << a.out << "\n";
  return 0;
}

struct LeakArgs {
  std::vector<std::string> train;
  std::vector<std::string> eval;
  std::string out;
};

int run_leakcheck(const LeakArgs& a) {
  std::vector<mvtk::DatasetManifest> train, eval;
  for (const auto& p : a.train) train.push_back(mvtk::load_manifest(p));
  for (const auto& p : a.eval) eval.push_back(mvtk::load_manifest(p));
  const auto report = mvtk::check_leakage(train, eval);
  const std::string text = mvtk::leakage_to_json(report).dump(2) + "\n";
  if (!a.out.empty()) write_file(a.out, text);
  std::cout << text;
  return report.empty() ? 0 : kExitInvalid;
}

struct EvalArgs {
  std::string gold;
  std::string pred;
  std::string task;
  std::string mode = "strict";
  std::string split;
  double threshold = 0.5;
  int point_radius = 0;
  std::string dataset;
  std::string method;
  std::string modality;
  std::string out;
  std::string markdown;
  std::string records;
};

int run_eval(const EvalArgs& a) {
  mvtk::EvalOptions opts;
  if (!a.task.empty()) opts.task = mvtk::task_kind_from_string(a.task);
  if (!a.split.empty()) opts.split = mvtk::split_from_string(a.split);
  if (!a.modality.empty()) opts.modality = mvtk::modality_from_string(a.modality);
  opts.mode = mvtk::parse_mode_from_string(a.mode);
  opts.iou_threshold = a.threshold;
  opts.grounding.point_radius = a.point_radius;
  opts.dataset = a.dataset;
  opts.method = a.method;

  const auto triplets = mvtk::load_triplets(a.gold);
  const auto predictions = mvtk::load_predictions(a.pred);
  const auto result = mvtk::run_eval(triplets, predictions, opts);

  const std::string csv = mvtk::report_to_csv(result.report);
  if (!a.out.empty()) write_file(a.out, csv);
  if (!a.markdown.empty()) write_file(a.markdown, mvtk::report_to_markdown(result.report));
  if (!a.records.empty()) {
    std::string lines;
    for (const auto& r : result.records) lines += mvtk::prediction_record_to_json(r).dump() + "\n";
    write_file(a.records, lines);
  }
  std::cout << (a.out.empty() ? csv : mvtk::report_to_markdown(result.report));
  return 0;
}

struct ReportArgs {
  std::vector<std::string> inputs;
  std::string layout = "benchmark";
  std::string out;
  std::string metric;
  bool macro = false;
};

int run_report(const ReportArgs& a) {
  std::vector<mvtk::MetricReport> reports;
  for (const auto& p : a.inputs) reports.push_back(mvtk::load_report_csv(p));
  std::string text;
  const bool csv = fs::path(a.out).extension() == ".csv";
  if (a.layout == "benchmark") {
    mvtk::AggregateOptions opts;
    if (!a.metric.empty()) opts.metric = a.metric;
    opts.macro = a.macro;
    const auto table = mvtk::aggregate(reports, opts);
    text = csv ? mvtk::table_to_csv(table) : mvtk::table_to_markdown(table);
  } else {
    if (csv || !a.metric.empty() || a.macro)
      throw mvtk::Error(mvtk::ErrorKind::invalid_argument, "--layout list writes Markdown only; drop --metric, --macro and .csv");
    for (const auto& r : reports) text += (text.empty() ? "" : "\n") + mvtk::report_to_markdown(r);
  }
  if (!a.out.empty()) write_file(a.out, text);
  std::cout << text;
  return 0;
}

struct StudyBuildArgs {
  std::string cases;
  std::vector<std::string> raters;
  std::uint64_t seed = 0;
  std::string out;
  std::string key;
};

int run_study_build(const StudyBuildArgs& a) {
  auto in = open_input(a.cases);
  const auto cases = mvtk::read_study_cases(in);
  const auto build = mvtk::build_reader_study(cases, a.seed, a.raters);
  const fs::path key_path(a.key);
  const fs::path out(a.out);
  // The key must not end up next to the sessions handed to raters.
  const auto key_dir = fs::weakly_canonical(key_path).parent_path().lexically_relative(fs::weakly_canonical(out));
  if (!key_dir.empty() && *key_dir.begin() != "..")
    throw mvtk::Error(mvtk::ErrorKind::invalid_argument, "the key must be stored outside the session directory");
  for (const auto& s : build.sessions) write_file(out / (s.session_id + ".json"), mvtk::session_file_text(s));
  write_file(key_path, mvtk::key_to_json(build.key).dump(2) + "\n");
  for (const auto& s : build.sessions) std::cout << s.session_id << ": " << s.cases.size() << " cases\n";
  return 0;
}

struct StudyTallyArgs {
  std::vector<std::string> sessions;
  std::string ratings;
  std::string key;
  std::string out;
};

int run_study_tally(const StudyTallyArgs& a) {
  std::vector<mvtk::ReaderStudySession> sessions;
  for (const auto& p : a.sessions) sessions.push_back(mvtk::session_from_json(read_json_file(p)));
  auto in = open_input(a.ratings);
  const auto ratings = mvtk::read_ratings(in);
  const auto key = mvtk::key_from_json(read_json_file(a.key));
  const std::string text = mvtk::tally_to_json(mvtk::tally_reader_study(sessions, ratings, key)).dump(2) + "\n";
  if (!a.out.empty()) write_file(a.out, text);
  std::cout << text;
  return 0;
}

struct ParseArgs {
  std::string task;
  std::string mode = "strict";
  std::vector<std::string> vocabulary;
  std::string text;
};

int run_parse(const ParseArgs& a) {
  mvtk::CodecOptions opts;
  opts.vocabulary = a.vocabulary;
  const auto parsed =
      mvtk::parse(mvtk::task_kind_from_string(a.task), a.text, mvtk::parse_mode_from_string(a.mode), opts);
  json out = {{"answer", mvtk::answer_to_json(parsed.value)}, {"mode", std::string(mvtk::to_string(parsed.mode))}};
  if (!parsed.warnings.empty()) out["warnings"] = parsed.warnings;
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Medical vision-language task toolkit"};
  app.require_subcommand(1);
  int status = 0;

  CompileArgs compile;
  auto* c = app.add_subcommand("compile", "Compile a manifest into instruction triplets");
  c->add_option("--manifest", compile.manifest, "Dataset manifest (JSONL)")->required()->check(CLI::ExistingFile);
  c->add_option("--templates", compile.templates, "Template set (JSON); built-in defaults when omitted")
      ->check(CLI::ExistingFile);
  c->add_option("--seed", compile.seed, "Split seed")->required();
  c->add_option("--ratios", compile.ratios, "train val test ratios")->expected(3)->default_str("7 1 2");
  c->add_option("--out", compile.out, "Output directory")->required();
  c->callback([&] { status = run_compile(compile); });

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate a synthetic-shapes dataset");
  s->add_option("--spec", synth.spec, "Generator spec (JSON)")->check(CLI::ExistingFile);
  s->add_option("--seed", synth.seed, "Override the spec seed");
  s->add_option("--n-images", synth.n_images, "Override the image count");
  s->add_option("--out", synth.out, "Output directory")->required();
  s->callback([&] { status = run_synth(synth); });

  LeakArgs leak;
  auto* l = app.add_subcommand("leakcheck", "Find identical images shared by train and eval manifests");
  l->add_option("--train", leak.train, "Train manifests")->required()->check(CLI::ExistingFile);
  l->add_option("--eval", leak.eval, "Eval manifests")->required()->check(CLI::ExistingFile);
  l->add_option("--out", leak.out, "Write the report here as well");
  l->callback([&] { status = run_leakcheck(leak); });

  EvalArgs eval;
  auto* e = app.add_subcommand("eval", "Score predictions against compiled triplets");
  e->add_option("--gold", eval.gold, "Triplet file")->required()->check(CLI::ExistingFile);
  e->add_option("--pred", eval.pred, "Predictions (JSONL {sample_id, raw_text})")->required()->check(CLI::ExistingFile);
  e->add_option("--task", eval.task, "Task filter");
  e->add_option("--mode", eval.mode, "Parse mode")->check(CLI::IsMember({"strict", "lenient"}));
  e->add_option("--split", eval.split, "Split filter")->check(CLI::IsMember({"train", "val", "test"}));
  e->add_option("--threshold", eval.threshold, "IoU threshold for accuracy");
  e->add_option("--point-radius", eval.point_radius, "Grid tolerance for point hits");
  e->add_option("--dataset", eval.dataset, "Dataset name for the report");
  e->add_option("--method", eval.method, "Method name for the report");
  e->add_option("--modality", eval.modality, "Modality for the report");
  e->add_option("--out", eval.out, "Report CSV");
  e->add_option("--markdown", eval.markdown, "Report Markdown");
  e->add_option("--records", eval.records, "Per-prediction parse records (JSONL)");
  e->callback([&] { status = run_eval(eval); });

  ReportArgs report;
  auto* r = app.add_subcommand("report", "Combine report CSVs into a table");
  r->add_option("--in", report.inputs, "Report CSVs")->required()->check(CLI::ExistingFile);
  r->add_option("--layout", report.layout, "benchmark or list")->check(CLI::IsMember({"benchmark", "list"}));
  r->add_option("--metric", report.metric, "Metric shown in every cell");
  r->add_flag("--macro", report.macro, "Use macro instead of micro values");
  r->add_option("--out", report.out, "Output (.md or .csv)");
  r->callback([&] { status = run_report(report); });

  auto* study = app.add_subcommand("study", "Blinded reader studies");
  study->require_subcommand(1);
  StudyBuildArgs build;
  auto* sb = study->add_subcommand("build", "Build blinded sessions and a sealed key");
  sb->add_option("--cases", build.cases, "Cases (JSONL)")->required()->check(CLI::ExistingFile);
  sb->add_option("--raters", build.raters, "Rater ids")->required();
  sb->add_option("--seed", build.seed, "Seed")->required();
  sb->add_option("--out", build.out, "Session directory")->required();
  sb->add_option("--key", build.key, "Sealed key path")->required();
  sb->callback([&] { status = run_study_build(build); });
  StudyTallyArgs tally;
  auto* st = study->add_subcommand("tally", "Unseal and tally ratings");
  st->add_option("--sessions", tally.sessions, "Session files")->required()->check(CLI::ExistingFile);
  st->add_option("--ratings", tally.ratings, "Ratings (JSONL)")->required()->check(CLI::ExistingFile);
  st->add_option("--key", tally.key, "Sealed key")->required()->check(CLI::ExistingFile);
  st->add_option("--out", tally.out, "Write the tally here as well");
  st->callback([&] { status = run_study_tally(tally); });

  ParseArgs parse;
  auto* p = app.add_subcommand("parse", "Parse one answer string");
  p->add_option("--task", parse.task, "Task kind")->required();
  p->add_option("--mode", parse.mode, "Parse mode")->check(CLI::IsMember({"strict", "lenient"}));
  p->add_option("--vocabulary", parse.vocabulary, "Multilabel vocabulary");
  p->add_option("text", parse.text, "Answer text")->required();
  p->callback([&] { status = run_parse(parse); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : kExitInvalid;
  } catch (const mvtk::Error& err) {
    std::cerr << "error (" << mvtk::to_string(err.kind()) << "): " << err.what() << "\n";
    return err.kind() == mvtk::ErrorKind::io ? 1 : kExitInvalid;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return status;
}
