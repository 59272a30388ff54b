#include "mvtk/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <set>

#include "mvtk/answer_json.hpp"
#include "mvtk/error.hpp"

namespace mvtk {

using nlohmann::json;

PredictionFile read_predictions(std::istream& in) {
  PredictionFile out;
  std::string line;
  std::size_t line_no = 0;
  auto malformed = [&](const std::string& why) {
    ++out.malformed_lines;
    out.warnings.push_back("predictions line " + std::to_string(line_no) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error&) {
      malformed("invalid JSON");
      continue;
    }
    if (!rec.is_object() || !rec.contains("sample_id") || !rec.at("sample_id").is_string()) {
      malformed("missing sample_id");
      continue;
    }
    Prediction p;
    p.line = line_no;
    p.sample_id = rec.at("sample_id").get<std::string>();
    if (rec.contains("raw_text") && rec.at("raw_text").is_string()) p.raw_text = rec.at("raw_text").get<std::string>();
    out.predictions.push_back(std::move(p));
  }
  return out;
}

PredictionFile load_predictions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open predictions " + path.string());
  return read_predictions(in);
}

json prediction_record_to_json(const PredictionRecord& r) {
  json out = {{"sample_id", r.sample_id},
              {"raw_text", r.raw_text},
              {"parse_mode", std::string(to_string(r.mode))},
              {"parsed", r.parsed ? answer_to_json(*r.parsed) : json(nullptr)}};
  if (!r.failure.empty()) out["failure"] = r.failure;
  if (!r.warnings.empty()) out["warnings"] = r.warnings;
  return out;
}

namespace {

constexpr std::size_t kMaxListedWarnings = 20;

// One selected triplet with the prediction that will be scored for it.
struct Scored {
  const InstructionTriplet* triplet = nullptr;
  const PredictionRecord* record = nullptr;  // null when no prediction arrived

  const Answer* parsed() const { return record && record->parsed ? &*record->parsed : nullptr; }
};

std::string threshold_name(double threshold) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "acc@%g", threshold);
  return buf;
}

void add_confusion(const Confusion& c, std::map<std::string, double>& values) {
  values["accuracy"] = accuracy(c);
  values["f1"] = f1(c);
}

void score_binary(std::span<const Scored> items, MetricReport& report) {
  std::map<std::string, Confusion> groups;
  Confusion pooled;
  for (const Scored& s : items) {
    const bool gold = std::get<bool>(s.triplet->gold);
    const Answer* p = s.parsed();
    const bool pred = p ? std::get<bool>(*p) : !gold;
    const bool arr_p[] = {pred};
    const bool arr_g[] = {gold};
    const Confusion c = confusion(arr_p, arr_g);
    groups[s.triplet->group] += c;
    pooled += c;
  }
  for (const auto& [group, c] : groups) {
    auto& row = report.per_class[group];
    row.support = c.total();
    add_confusion(c, row.values);
  }
  add_confusion(pooled, report.micro);
}

void score_multilabel(std::span<const Scored> items, MetricReport& report) {
  std::set<std::string> labels;
  for (const Scored& s : items) labels.insert(s.triplet->vocabulary.begin(), s.triplet->vocabulary.end());
  std::map<std::string, Confusion> per_label;
  std::size_t exact = 0;
  for (const Scored& s : items) {
    const auto& gold = std::get<LabelSet>(s.triplet->gold);
    LabelSet pred;
    if (const Answer* p = s.parsed()) {
      pred = std::get<LabelSet>(*p);
    } else {
      for (const auto& l : s.triplet->vocabulary)
        if (!gold.count(l)) pred.insert(l);
    }
    if (pred == gold) ++exact;
    for (const auto& l : s.triplet->vocabulary) {
      const bool arr_p[] = {pred.count(l) > 0};
      const bool arr_g[] = {gold.count(l) > 0};
      per_label[l] += confusion(arr_p, arr_g);
    }
  }
  Confusion pooled;
  for (const auto& [label, c] : per_label) {
    auto& row = report.per_class[label];
    row.support = c.tp + c.fn;
    add_confusion(c, row.values);
    pooled += c;
  }
  add_confusion(pooled, report.micro);
  report.micro["exact_match"] = static_cast<double>(exact) / static_cast<double>(items.size());
}

std::vector<Region> gold_regions(const Answer& gold) {
  if (const auto* boxes = std::get_if<BoxList>(&gold)) return {boxes->begin(), boxes->end()};
  if (const auto* b = std::get_if<Box3D>(&gold)) return {*b};
  if (const auto* p = std::get_if<GridPoint2>(&gold)) return {*p};
  if (const auto* poly = std::get_if<CanonicalPolygon>(&gold)) return {*poly};
  throw Error(ErrorKind::kind_mismatch, "gold answer is not a region");
}

std::optional<Region> predicted_region(const Answer* pred) {
  if (!pred) return std::nullopt;
  if (const auto* boxes = std::get_if<BoxList>(pred)) {
    if (boxes->empty()) return std::nullopt;
    return boxes->front();
  }
  return gold_regions(*pred).front();
}

void score_grounding(std::span<const Scored> items, const EvalOptions& options, MetricReport& report) {
  // Every (sample, gold region) becomes one pair; a sample keeps its best pair.
  std::vector<GroundingPair> pairs;
  std::vector<std::size_t> owner;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto pred = predicted_region(items[i].parsed());
    for (Region& g : gold_regions(items[i].triplet->gold)) {
      pairs.push_back({items[i].triplet->sample_id, pred, std::move(g)});
      owner.push_back(i);
    }
  }
  const auto scores = pair_scores(pairs, options.grounding);
  std::vector<PairScore> best(items.size());
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    PairScore& b = best[owner[k]];
    if (scores[k].iou > b.iou) b = scores[k];
  }

  const TaskKind task = items.front().triplet->task;
  const std::string acc = threshold_name(options.iou_threshold);
  auto fill = [&](std::span<const PairScore> s, std::map<std::string, double>& values) {
    if (task == TaskKind::grounding_point) {
      values["hit_rate"] = mean_iou(s);
      return;
    }
    values[acc] = acc_at_iou(s, options.iou_threshold);
    values["miou"] = mean_iou(s);
    if (task == TaskKind::segmentation_polygon) values["dice"] = mean_dice(s);
  };

  std::map<std::string, std::vector<PairScore>> groups;
  for (std::size_t i = 0; i < items.size(); ++i) groups[items[i].triplet->group].push_back(best[i]);
  for (const auto& [group, s] : groups) {
    auto& row = report.per_class[group];
    row.support = s.size();
    fill(s, row.values);
  }
  fill(best, report.micro);
}

void score_text(std::span<const Scored> items, MetricReport& report, std::size_t& empty_candidates) {
  constexpr int kMaxN = 4;
  struct Sums {
    std::array<double, kMaxN> bleu{};
    double rouge = 0.0;
    std::size_t exact = 0;
    std::size_t n = 0;
  };
  const bool vqa = items.front().triplet->task == TaskKind::vqa_freeform;
  std::map<std::string, Sums> groups;
  Sums pooled;
  for (const Scored& s : items) {
    const auto ref = tokenize(std::get<FreeText>(s.triplet->gold).text);
    const Answer* p = s.parsed();
    const auto cand = p ? tokenize(std::get<FreeText>(*p).text) : std::vector<std::string>{};
    const BleuScores bleu = bleu_n(cand, ref, kMaxN);
    if (bleu.empty_candidate && p) ++empty_candidates;
    const double rouge = rouge_l(cand, ref);
    for (Sums* sums : {&groups[s.triplet->group], &pooled}) {
      for (int k = 0; k < kMaxN; ++k) sums->bleu[k] += bleu.cumulative[k];
      sums->rouge += rouge;
      sums->exact += cand == ref ? 1 : 0;
      ++sums->n;
    }
  }
  auto fill = [&](const Sums& s, std::map<std::string, double>& values) {
    const auto n = static_cast<double>(s.n);
    for (int k = 0; k < kMaxN; ++k) values["bleu_" + std::to_string(k + 1)] = s.bleu[k] / n;
    values["rouge_l"] = s.rouge / n;
    if (vqa) values["exact_match"] = static_cast<double>(s.exact) / n;
  };
  for (const auto& [group, s] : groups) {
    auto& row = report.per_class[group];
    row.support = s.n;
    fill(s, row.values);
  }
  fill(pooled, report.micro);
}

std::string common_dataset(std::span<const Scored> items) {
  std::string common;
  for (const Scored& s : items) {
    const auto& id = s.triplet->sample_id;
    const std::string prefix = id.substr(0, id.find('/'));
    if (common.empty()) common = prefix;
    else if (common != prefix) return "";
  }
  return common;
}

}  // namespace

EvalResult run_eval(std::span<const InstructionTriplet> triplets, const PredictionFile& predictions,
                    const EvalOptions& options) {
  std::map<std::string, const InstructionTriplet*> by_id;
  for (const auto& t : triplets) {
    if (!by_id.emplace(t.sample_id, &t).second)
      throw Error(ErrorKind::validation, "duplicate triplet sample_id '" + t.sample_id + "'");
  }

  std::set<TaskKind> tasks;
  std::map<std::string, const InstructionTriplet*> selected;
  for (const auto& [id, t] : by_id) {
    if (options.split && t->split != *options.split) continue;
    if (options.task && t->task != *options.task) continue;
    tasks.insert(t->task);
    selected.emplace(id, t);
  }
  if (selected.empty()) throw Error(ErrorKind::invalid_argument, "no triplets match the task and split filter");
  if (tasks.size() > 1)
    throw Error(ErrorKind::invalid_argument, "triplets mix several tasks; choose one with a task filter");
  const TaskKind task = *tasks.begin();

  EvalResult result;
  MetricReport& report = result.report;
  report.task = task;
  report.method = options.method;
  report.modality = options.modality;
  std::vector<std::string> warnings = predictions.warnings;

  std::size_t filtered = 0, duplicates = 0;
  std::map<std::string, const Prediction*> latest;
  for (const Prediction& p : predictions.predictions) {
    if (!by_id.count(p.sample_id))
      throw Error(ErrorKind::unknown_sample,
                  "predictions line " + std::to_string(p.line) + ": unknown sample_id '" + p.sample_id + "'");
    if (!selected.count(p.sample_id)) {
      ++filtered;
      continue;
    }
    auto [it, inserted] = latest.emplace(p.sample_id, &p);
    if (!inserted) {
      ++duplicates;
      warnings.push_back("duplicate prediction for " + p.sample_id + ": line " + std::to_string(it->second->line) +
                         " replaced by line " + std::to_string(p.line));
      it->second = &p;
    }
  }

  std::size_t parsed = 0, failures = 0, missing = 0, with_warnings = 0;
  result.records.reserve(latest.size());
  for (const auto& [id, p] : latest) {
    const InstructionTriplet& t = *selected.at(id);
    PredictionRecord r;
    r.sample_id = id;
    r.mode = options.mode;
    if (!p->raw_text) {
      r.failure = "raw_text missing or not a string";
    } else {
      r.raw_text = *p->raw_text;
      CodecOptions codec;
      codec.vocabulary = t.vocabulary;
      try {
        ParsedAnswer a = parse(task, r.raw_text, options.mode, codec);
        r.parsed = std::move(a.value);
        r.warnings = std::move(a.warnings);
      } catch (const Error& e) {
        r.failure = e.what();
      }
    }
    if (r.parsed) {
      ++parsed;
      if (!r.warnings.empty()) ++with_warnings;
    } else {
      ++failures;
    }
    result.records.push_back(std::move(r));
  }

  std::vector<Scored> items;
  items.reserve(selected.size());
  std::size_t next = 0;
  for (const auto& [id, t] : selected) {
    Scored s{t, nullptr};
    if (next < result.records.size() && result.records[next].sample_id == id) s.record = &result.records[next++];
    else ++missing;
    items.push_back(s);
  }

  std::size_t empty_candidates = 0;
  switch (task) {
    case TaskKind::classification_binary: score_binary(items, report); break;
    case TaskKind::classification_multilabel: score_multilabel(items, report); break;
    case TaskKind::grounding_box2d:
    case TaskKind::grounding_box3d:
    case TaskKind::grounding_point:
    case TaskKind::segmentation_polygon: score_grounding(items, options, report); break;
    case TaskKind::report:
    case TaskKind::vqa_freeform: score_text(items, report, empty_candidates); break;
  }
  compute_macro(report);

  report.dataset = options.dataset.empty() ? common_dataset(items) : options.dataset;
  report.n_samples = items.size();
  report.counts = {{"predictions", predictions.predictions.size() + predictions.malformed_lines},
                   {"parsed", parsed},
                   {"parse_failures", failures},
                   {"malformed_lines", predictions.malformed_lines},
                   {"duplicates_replaced", duplicates},
                   {"outside_filter", filtered},
                   {"missing_predictions", missing},
                   {"parsed_with_warnings", with_warnings}};
  if (empty_candidates > 0)
    warnings.push_back(std::to_string(empty_candidates) + " empty text prediction(s) scored 0");
  if (warnings.size() > kMaxListedWarnings) {
    const std::size_t extra = warnings.size() - kMaxListedWarnings;
    warnings.resize(kMaxListedWarnings);
    warnings.push_back("... and " + std::to_string(extra) + " more");
  }
  report.warnings = std::move(warnings);
  return result;
}

}  // namespace mvtk
