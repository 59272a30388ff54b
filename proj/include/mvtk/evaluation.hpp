#pragma once

// Gold-vs-prediction evaluation runs.
//
// Predictions are line-delimited JSON {sample_id, raw_text}. Every line is
// accounted for in the report counts: scored lines are either parsed or parse
// failures; the rest are malformed, overridden duplicates, or outside the
// task/split filter. Parse failures and missing predictions score as wrong
// answers, never as exclusions.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mvtk/codec.hpp"
#include "mvtk/compiler.hpp"
#include "mvtk/metric_report.hpp"
#include "mvtk/metrics.hpp"

namespace mvtk {

struct Prediction {
  std::size_t line = 0;
  std::string sample_id;
  std::optional<std::string> raw_text;  // absent or non-string raw_text is a parse failure
};

struct PredictionFile {
  std::vector<Prediction> predictions;
  std::size_t malformed_lines = 0;
  std::vector<std::string> warnings;
};

PredictionFile read_predictions(std::istream& in);
PredictionFile load_predictions(const std::filesystem::path& path);

struct PredictionRecord {
  std::string sample_id;
  std::string raw_text;
  ParseMode mode = ParseMode::strict;
  std::optional<Answer> parsed;  // empty on failure
  std::string failure;
  std::vector<std::string> warnings;
};

nlohmann::json prediction_record_to_json(const PredictionRecord& record);

struct EvalOptions {
  std::optional<TaskKind> task;  // required when the triplets mix tasks
  std::optional<Split> split;
  ParseMode mode = ParseMode::strict;
  double iou_threshold = 0.5;
  GroundingOptions grounding;
  std::string dataset;  // defaults to the common sample_id prefix
  std::string method;
  std::optional<Modality> modality;
};

struct EvalResult {
  MetricReport report;
  std::vector<PredictionRecord> records;  // scored predictions, by sample_id
};

// Throws Error(unknown_sample) for a prediction whose sample_id has no triplet.
EvalResult run_eval(std::span<const InstructionTriplet> triplets, const PredictionFile& predictions,
                    const EvalOptions& options);

}  // namespace mvtk
