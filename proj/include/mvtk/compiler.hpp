#pragma once

// Manifest -> instruction triplet compilation, patient-level splitting and
// train/eval leakage checks.

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "mvtk/codec.hpp"
#include "mvtk/manifest.hpp"

namespace mvtk {

// ---- splits ----

struct SplitRatios {
  int train = 7;
  int val = 1;
  int test = 2;
};

// Per-split patient counts for n patients: floor of the exact share, with the
// remainder handed out by largest fractional part (train, val, test on ties).
std::array<std::size_t, 3> split_counts(std::size_t n, SplitRatios ratios);

struct SplitAssignment {
  std::map<std::string, Split> by_patient;
  // Filled instead of by_patient when the manifest carries an official split.
  std::map<std::string, Split> by_image;
  std::uint64_t seed = 0;
  SplitRatios ratios;
  bool official = false;

  Split of(const ImageRecord& image) const;
};

SplitAssignment split_patients(const DatasetManifest& manifest, SplitRatios ratios, std::uint64_t seed);

nlohmann::json split_to_json(const SplitAssignment& split);

// ---- leakage ----

struct LeakageEntry {
  std::string content_hash;
  std::string train_dataset_id;
  std::string eval_dataset_id;
  std::vector<std::string> image_ids;  // "dataset_id/image_id", train side first
};

struct LeakageReport {
  std::vector<LeakageEntry> entries;
  bool empty() const { return entries.empty(); }
};

LeakageReport check_leakage(std::span<const DatasetManifest> train, std::span<const DatasetManifest> eval);
nlohmann::json leakage_to_json(const LeakageReport& report);

// ---- templates ----

// Instruction templates per task. Slots are written {name}; the slot names
// are finding, structure, question and class_set. For each annotation the
// candidates are the templates whose slots it can fill, narrowed to those
// using the most slots; the pick among them is keyed by the sample id hash.
struct TemplateSet {
  std::map<TaskKind, std::vector<std::string>> templates;
};

TemplateSet templates_from_json(const nlohmann::json& value);
TemplateSet load_templates(const std::filesystem::path& path);
const TemplateSet& default_templates();

std::string fill_template(std::string_view pattern, const std::map<std::string, std::string>& slots);

// ---- triplets ----

struct InstructionTriplet {
  std::string sample_id;
  std::string image_ref;
  TaskKind task = TaskKind::classification_binary;
  std::string instruction;
  AnswerText target;
  Answer gold;
  std::string group;
  Vocabulary vocabulary;  // multilabel only
  Split split = Split::train;
};

struct CompileSummary {
  std::map<TaskKind, std::size_t> per_task;
  std::map<Split, std::size_t> per_split;
  std::size_t images = 0;
  std::size_t patients = 0;
};

struct CompileResult {
  std::vector<InstructionTriplet> triplets;  // sorted by sample_id
  CompileSummary summary;
};

CompileResult compile_triplets(const DatasetManifest& manifest, const TemplateSet& templates,
                               const SplitAssignment& split);

// Triplet file records: {sample_id, image_ref, task, instruction, target, gold, split}
// where gold = {"answer": ..., "group": ..., "vocabulary": [...] (multilabel)}.
nlohmann::json triplet_to_json(const InstructionTriplet& t);
InstructionTriplet triplet_from_json(const nlohmann::json& value);

void write_triplets(std::span<const InstructionTriplet> triplets, std::ostream& out);
std::vector<InstructionTriplet> read_triplets(std::istream& in);
std::vector<InstructionTriplet> load_triplets(const std::filesystem::path& path);

nlohmann::json summary_to_json(const CompileSummary& summary);

}  // namespace mvtk
