#pragma once

// Per-task metric tables and their CSV / Markdown forms.
//
// CSV layout: "# key,value" metadata lines, then a header
// "class,support,<metrics in alphabetical order>", one row per class, and the
// aggregate rows "[macro]" and "[micro]". Values are printed with six
// decimals; an empty cell means the metric does not apply to that row.

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mvtk/codec.hpp"
#include "mvtk/manifest.hpp"

namespace mvtk {

struct ClassMetrics {
  std::size_t support = 0;
  std::map<std::string, double> values;
};

struct MetricReport {
  TaskKind task = TaskKind::classification_binary;
  std::string dataset;
  std::string method;
  std::optional<Modality> modality;
  std::map<std::string, ClassMetrics> per_class;
  // Unweighted mean of the per-class values.
  std::map<std::string, double> macro;
  // Pooled over all samples.
  std::map<std::string, double> micro;
  std::size_t n_samples = 0;
  std::map<std::string, std::size_t> counts;
  std::vector<std::string> warnings;

  // Every metric name used by any row, sorted.
  std::vector<std::string> metric_names() const;
};

// Recomputes macro from per_class.
void compute_macro(MetricReport& report);

std::string report_to_csv(const MetricReport& report);
std::string report_to_markdown(const MetricReport& report);

MetricReport read_report_csv(std::istream& in);
MetricReport load_report_csv(const std::filesystem::path& path);

// Splits one CSV line; handles double-quoted fields.
std::vector<std::string> split_csv_line(std::string_view line);
std::string csv_field(std::string_view value);

}  // namespace mvtk
