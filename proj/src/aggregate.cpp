#include "mvtk/aggregate.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "mvtk/error.hpp"

namespace mvtk {

namespace {

int modality_rank(const std::optional<Modality>& m) {
  if (!m) return 6;
  switch (*m) {
    case Modality::endoscopy_video: return 0;
    case Modality::photography: return 1;
    case Modality::ultrasound: return 2;
    case Modality::xray: return 3;
    case Modality::ct: return 4;
    case Modality::mri: return 5;
  }
  return 6;
}

auto column_key(const BenchmarkColumn& c) { return std::make_tuple(modality_rank(c.modality), c.dataset, c.task); }

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * v);
  return buf;
}

std::vector<std::string> column_labels(const BenchmarkTable& t) {
  std::set<TaskKind> tasks;
  for (const auto& c : t.columns) tasks.insert(c.task);
  std::vector<std::string> out;
  for (const auto& c : t.columns) {
    std::string label = c.modality ? std::string(to_string(*c.modality)) + ": " + c.dataset : c.dataset;
    if (tasks.size() > 1) label += " (" + std::string(to_string(c.task)) + ")";
    out.push_back(label);
  }
  return out;
}

std::string cell_text(const std::optional<double>& v) { return v ? percent(*v) : std::string(kMissingCell); }

}  // namespace

std::string headline_metric(TaskKind task) {
  switch (task) {
    case TaskKind::classification_binary: return "accuracy";
    case TaskKind::classification_multilabel: return "f1";
    case TaskKind::grounding_box2d:
    case TaskKind::grounding_box3d:
    case TaskKind::segmentation_polygon: return "acc@0.5";
    case TaskKind::grounding_point: return "hit_rate";
    case TaskKind::report: return "bleu_4";
    case TaskKind::vqa_freeform: return "exact_match";
  }
  return "";
}

BenchmarkTable aggregate(std::span<const MetricReport> reports, const AggregateOptions& options) {
  if (reports.empty()) throw Error(ErrorKind::invalid_argument, "aggregate: no reports given");

  std::map<TaskKind, std::vector<std::string>> names_by_task;
  for (const MetricReport& r : reports) {
    auto [it, inserted] = names_by_task.emplace(r.task, r.metric_names());
    if (!inserted && it->second != r.metric_names())
      throw Error(ErrorKind::validation, "aggregate: reports for " + std::string(to_string(r.task)) +
                                             " use different metric names (" + r.dataset + "/" + r.method + ")");
  }

  BenchmarkTable table;
  table.macro = options.macro;
  std::map<std::tuple<int, std::string, TaskKind>, std::size_t> column_index;
  std::vector<BenchmarkColumn> columns;
  std::map<std::string, std::size_t> method_index;
  for (const MetricReport& r : reports) {
    BenchmarkColumn col{r.modality, r.dataset, r.task, options.metric.value_or(headline_metric(r.task))};
    if (column_index.emplace(column_key(col), columns.size()).second) columns.push_back(col);
    if (method_index.emplace(r.method, table.methods.size()).second) table.methods.push_back(r.method);
  }

  // Canonical column order; remap indices afterwards.
  std::vector<std::size_t> order(columns.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return column_key(columns[a]) < column_key(columns[b]); });
  std::vector<std::size_t> position(columns.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    table.columns.push_back(columns[order[i]]);
    position[order[i]] = i;
  }

  table.cells.assign(table.methods.size(), std::vector<std::optional<double>>(table.columns.size()));
  for (const MetricReport& r : reports) {
    const std::size_t col = position[column_index.at(column_key({r.modality, r.dataset, r.task, ""}))];
    const std::string& metric = table.columns[col].metric;
    const auto& values = options.macro ? r.macro : r.micro;
    auto it = values.find(metric);
    if (it == values.end())
      throw Error(ErrorKind::validation, "aggregate: report " + r.dataset + "/" + r.method + " has no " +
                                             (options.macro ? "macro" : "micro") + " value for '" + metric + "'");
    auto& cell = table.cells[method_index.at(r.method)][col];
    if (cell && *cell != it->second)
      throw Error(ErrorKind::conflict, "aggregate: conflicting values for method '" + r.method + "' on dataset '" +
                                           r.dataset + "' (" + std::to_string(*cell) + " vs " +
                                           std::to_string(it->second) + ")");
    cell = it->second;
  }
  return table;
}

std::string table_to_markdown(const BenchmarkTable& t) {
  std::ostringstream out;
  std::set<std::string> metrics;
  for (const auto& c : t.columns) metrics.insert(c.metric);
  out << "Metric: ";
  for (auto it = metrics.begin(); it != metrics.end(); ++it) out << (it == metrics.begin() ? "" : ", ") << *it;
  out << " (" << (t.macro ? "macro" : "micro") << ", x100)\n\n";

  const auto labels = column_labels(t);
  out << "| method |";
  for (const auto& l : labels) out << ' ' << l << " |";
  out << "\n|---|";
  for (std::size_t i = 0; i < labels.size(); ++i) out << "---:|";
  out << '\n';
  for (std::size_t m = 0; m < t.methods.size(); ++m) {
    out << "| " << t.methods[m] << " |";
    for (const auto& v : t.cells[m]) out << ' ' << cell_text(v) << " |";
    out << '\n';
  }
  return out.str();
}

std::string table_to_csv(const BenchmarkTable& t) {
  std::ostringstream out;
  out << "method";
  for (const auto& l : column_labels(t)) out << ',' << csv_field(l);
  out << '\n';
  for (std::size_t m = 0; m < t.methods.size(); ++m) {
    out << csv_field(t.methods[m]);
    for (const auto& v : t.cells[m]) out << ',' << cell_text(v);
    out << '\n';
  }
  return out.str();
}

}  // namespace mvtk
