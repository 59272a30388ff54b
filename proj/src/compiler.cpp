#include "mvtk/compiler.hpp"

#include <algorithm>
#include <exception>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "mvtk/answer_json.hpp"
#include "mvtk/error.hpp"
#include "mvtk/hashing.hpp"

namespace mvtk {

using nlohmann::json;

namespace {

const std::set<std::string>& slot_vocabulary() {
  static const std::set<std::string> slots = {"finding", "structure", "question", "class_set"};
  return slots;
}

// Slot names referenced by a template, in order of appearance.
std::vector<std::string> template_slots(std::string_view pattern) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while ((pos = pattern.find('{', pos)) != std::string_view::npos) {
    const std::size_t close = pattern.find('}', pos);
    if (close == std::string_view::npos)
      throw Error(ErrorKind::syntax, "unterminated slot in template '" + std::string(pattern) + "'", pos);
    out.emplace_back(pattern.substr(pos + 1, close - pos - 1));
    pos = close + 1;
  }
  return out;
}

void check_template(std::string_view pattern) {
  if (pattern.find('}') < pattern.find('{'))
    throw Error(ErrorKind::syntax, "stray '}' in template '" + std::string(pattern) + "'");
  for (const auto& slot : template_slots(pattern)) {
    if (!slot_vocabulary().count(slot))
      throw Error(ErrorKind::validation, "unknown slot {" + slot + "} in template '" + std::string(pattern) + "'");
  }
}

}  // namespace

std::string fill_template(std::string_view pattern, const std::map<std::string, std::string>& slots) {
  check_template(pattern);
  std::string out;
  std::size_t pos = 0;
  while (pos < pattern.size()) {
    const std::size_t open = pattern.find('{', pos);
    if (open == std::string_view::npos) {
      out.append(pattern.substr(pos));
      break;
    }
    out.append(pattern.substr(pos, open - pos));
    const std::size_t close = pattern.find('}', open);
    const std::string name(pattern.substr(open + 1, close - open - 1));
    auto it = slots.find(name);
    if (it == slots.end()) throw Error(ErrorKind::validation, "no value for slot {" + name + "}");
    out += it->second;
    pos = close + 1;
  }
  return out;
}

TemplateSet templates_from_json(const json& value) {
  if (!value.is_object()) throw Error(ErrorKind::validation, "templates: expected object keyed by task kind");
  TemplateSet out;
  for (const auto& [key, list] : value.items()) {
    const TaskKind kind = task_kind_from_string(key);
    if (!list.is_array() || list.empty())
      throw Error(ErrorKind::validation, "templates." + key + ": expected non-empty array of strings");
    for (const json& t : list) {
      if (!t.is_string()) throw Error(ErrorKind::validation, "templates." + key + ": expected strings");
      check_template(t.get<std::string>());
      out.templates[kind].push_back(t.get<std::string>());
    }
  }
  return out;
}

TemplateSet load_templates(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open templates " + path.string());
  json value;
  try {
    value = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::validation, "templates: invalid JSON: " + std::string(e.what()));
  }
  return templates_from_json(value);
}

const TemplateSet& default_templates() {
  static const TemplateSet set = templates_from_json(json::parse(R"({
    "classification_binary": [
      "Is there a {finding} on {structure}?",
      "Is there a {finding} in this image?",
      "Does this image show a {finding}?"
    ],
    "classification_multilabel": [
      "Which of the following findings are present: {class_set}?",
      "List every finding visible in the image, choosing from {class_set}."
    ],
    "grounding_box2d": [
      "Where is the {finding} on {structure}?",
      "Where is the {finding}?",
      "Locate the {finding} in the image."
    ],
    "grounding_box3d": [
      "Where is the {finding} on {structure}?",
      "Where is the {finding}?"
    ],
    "grounding_point": [
      "Point to the {finding} on {structure}.",
      "Point to the {finding}."
    ],
    "segmentation_polygon": [
      "Outline the {finding} on {structure}.",
      "Outline the {finding}.",
      "Segment the {finding}."
    ],
    "report": [
      "Write the report for this image.",
      "Describe the findings in this image."
    ],
    "vqa_freeform": [
      "{question}"
    ]
  })"));
  return set;
}

namespace {

std::map<std::string, std::string> slots_of(const DatasetManifest& m, const Annotation& a) {
  std::map<std::string, std::string> slots;
  if (a.finding) slots["finding"] = *a.finding;
  if (a.structure) slots["structure"] = *a.structure;
  if (a.question) slots["question"] = *a.question;
  if (!m.classes.empty()) {
    std::string joined;
    for (const auto& c : m.classes) joined += (joined.empty() ? "" : ", ") + c;
    slots["class_set"] = joined;
  }
  return slots;
}

const std::string& choose_template(const std::vector<std::string>& candidates,
                                   const std::map<std::string, std::string>& slots, const std::string& sample_id,
                                   TaskKind task) {
  std::vector<const std::string*> usable;
  std::size_t best = 0;
  for (const std::string& t : candidates) {
    const auto needed = template_slots(t);
    const bool fillable =
        std::all_of(needed.begin(), needed.end(), [&](const std::string& s) { return slots.count(s) > 0; });
    if (!fillable) continue;
    const std::size_t used = std::set<std::string>(needed.begin(), needed.end()).size();
    if (usable.empty() || used > best) {
      usable.clear();
      best = used;
    }
    if (used == best) usable.push_back(&t);
  }
  if (usable.empty())
    throw Error(ErrorKind::missing_template, "no template for " + std::string(to_string(task)) +
                                                 " can be filled for sample " + sample_id);
  return *usable[fnv1a64(sample_id) % usable.size()];
}

std::vector<InstructionTriplet> compile_image(const DatasetManifest& m, const ImageRecord& img,
                                              const TemplateSet& templates, const SplitAssignment& split) {
  std::vector<InstructionTriplet> out;
  const Split s = split.of(img);
  const std::string image_ref = img.path ? *img.path : m.dataset_id + "/" + img.image_id;
  for (std::size_t k = 0; k < img.annotations.size(); ++k) {
    const Annotation& a = img.annotations[k];
    InstructionTriplet t;
    t.sample_id = m.dataset_id + "/" + img.image_id + "#" + std::to_string(k);
    t.image_ref = image_ref;
    t.task = a.task;
    t.split = s;
    t.gold = a.gold;
    t.group = annotation_group(m, a);
    if (a.task == TaskKind::classification_multilabel) t.vocabulary = m.classes;

    auto it = templates.templates.find(a.task);
    if (it == templates.templates.end() || it->second.empty())
      throw Error(ErrorKind::missing_template, "no template for task " + std::string(to_string(a.task)));
    const auto slots = slots_of(m, a);
    t.instruction = fill_template(choose_template(it->second, slots, t.sample_id, a.task), slots);

    CodecOptions opts;
    opts.vocabulary = t.vocabulary;
    t.target = render(a.task, a.gold, opts);
    const ParsedAnswer back = parse(a.task, t.target.text, ParseMode::strict, opts);
    if (back.value != t.gold)
      throw Error(ErrorKind::validation, "target of " + t.sample_id + " does not parse back to its gold");
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace

CompileResult compile_triplets(const DatasetManifest& manifest, const TemplateSet& templates,
                               const SplitAssignment& split) {
  const auto n = static_cast<std::ptrdiff_t>(manifest.images.size());
  std::vector<std::vector<InstructionTriplet>> per_image(manifest.images.size());
  std::vector<std::exception_ptr> errors(manifest.images.size());

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      per_image[i] = compile_image(manifest, manifest.images[i], templates, split);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  CompileResult result;
  std::set<std::string> patients;
  for (std::size_t i = 0; i < per_image.size(); ++i) {
    patients.insert(manifest.images[i].patient_id);
    for (auto& t : per_image[i]) result.triplets.push_back(std::move(t));
  }
  std::sort(result.triplets.begin(), result.triplets.end(),
            [](const InstructionTriplet& a, const InstructionTriplet& b) { return a.sample_id < b.sample_id; });
  for (const auto& t : result.triplets) {
    ++result.summary.per_task[t.task];
    ++result.summary.per_split[t.split];
  }
  result.summary.images = manifest.images.size();
  result.summary.patients = patients.size();
  return result;
}

json triplet_to_json(const InstructionTriplet& t) {
  json gold = {{"answer", answer_to_json(t.gold)}, {"group", t.group}};
  if (t.task == TaskKind::classification_multilabel) gold["vocabulary"] = t.vocabulary;
  return {{"sample_id", t.sample_id},
          {"image_ref", t.image_ref},
          {"task", std::string(to_string(t.task))},
          {"instruction", t.instruction},
          {"target", t.target.text},
          {"gold", std::move(gold)},
          {"split", std::string(to_string(t.split))}};
}

InstructionTriplet triplet_from_json(const json& v) {
  static const char* kFields[] = {"sample_id", "image_ref", "task", "instruction", "target", "gold", "split"};
  if (!v.is_object()) throw Error(ErrorKind::validation, "triplet: expected object");
  for (const char* f : kFields) {
    if (!v.contains(f)) throw Error(ErrorKind::validation, std::string("triplet: missing field ") + f);
  }
  if (v.size() != std::size(kFields)) throw Error(ErrorKind::validation, "triplet: unexpected extra fields");
  try {
    InstructionTriplet t;
    t.sample_id = v.at("sample_id").get<std::string>();
    t.image_ref = v.at("image_ref").get<std::string>();
    t.task = task_kind_from_string(v.at("task").get<std::string>());
    t.instruction = v.at("instruction").get<std::string>();
    t.target.text = v.at("target").get<std::string>();
    t.target.framed = t.task == TaskKind::segmentation_polygon;
    t.split = split_from_string(v.at("split").get<std::string>());
    const json& gold = v.at("gold");
    if (!gold.is_object() || !gold.contains("answer"))
      throw Error(ErrorKind::validation, "triplet " + t.sample_id + ": gold.answer missing");
    if (gold.contains("vocabulary")) t.vocabulary = gold.at("vocabulary").get<Vocabulary>();
    t.group = gold.value("group", std::string("all"));
    t.gold = answer_from_json(t.task, gold.at("answer"), t.vocabulary);
    return t;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::validation, std::string("triplet: ") + e.what());
  }
}

void write_triplets(std::span<const InstructionTriplet> triplets, std::ostream& out) {
  for (const auto& t : triplets) out << triplet_to_json(t).dump() << '\n';
}

std::vector<InstructionTriplet> read_triplets(std::istream& in) {
  std::vector<InstructionTriplet> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(triplet_from_json(json::parse(line)));
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::validation, "triplets line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorKind::validation, "triplets line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<InstructionTriplet> load_triplets(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open triplets " + path.string());
  return read_triplets(in);
}

json summary_to_json(const CompileSummary& s) {
  json per_task = json::object();
  for (const auto& [k, n] : s.per_task) per_task[std::string(to_string(k))] = n;
  json per_split = json::object();
  for (const auto& [k, n] : s.per_split) per_split[std::string(to_string(k))] = n;
  std::size_t total = 0;
  for (const auto& [k, n] : s.per_task) total += n;
  return {{"triplets", total}, {"images", s.images}, {"patients", s.patients},
          {"per_task", per_task}, {"per_split", per_split}};
}

}  // namespace mvtk
