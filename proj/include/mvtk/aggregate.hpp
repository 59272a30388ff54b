#pragma once

// Benchmark tables: methods as rows, datasets as columns grouped by modality
// (endoscopy video, photography, ultrasound, x-ray, CT, MRI), one headline
// metric per cell scaled by 100.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mvtk/metric_report.hpp"

namespace mvtk {

inline constexpr std::string_view kMissingCell = "—";

// Metric shown for a task when none is requested.
std::string headline_metric(TaskKind task);

struct AggregateOptions {
  std::optional<std::string> metric;  // overrides headline_metric for every task
  bool macro = false;                 // read the macro row instead of micro
};

struct BenchmarkColumn {
  std::optional<Modality> modality;
  std::string dataset;
  TaskKind task = TaskKind::classification_binary;
  std::string metric;
};

struct BenchmarkTable {
  std::vector<std::string> methods;  // in order of first appearance
  std::vector<BenchmarkColumn> columns;
  std::vector<std::vector<std::optional<double>>> cells;  // [method][column], unscaled
  bool macro = false;
};

// Throws Error(invalid_argument) on empty input, Error(validation) when
// reports of one task disagree on metric names or lack the requested metric,
// and Error(conflict) when two reports give different values for one cell.
BenchmarkTable aggregate(std::span<const MetricReport> reports, const AggregateOptions& options = {});

std::string table_to_markdown(const BenchmarkTable& table);
std::string table_to_csv(const BenchmarkTable& table);

}  // namespace mvtk
