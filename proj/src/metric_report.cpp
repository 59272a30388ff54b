#include "mvtk/metric_report.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include "mvtk/error.hpp"

namespace mvtk {

namespace {

constexpr const char* kMacroRow = "[macro]";
constexpr const char* kMicroRow = "[micro]";

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string cell(const std::map<std::string, double>& values, const std::string& name) {
  auto it = values.find(name);
  return it == values.end() ? std::string() : fixed6(it->second);
}

std::size_t to_size(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty() || s[0] == '-')
    throw Error(ErrorKind::validation, "report CSV: bad " + what + " '" + s + "'");
  return static_cast<std::size_t>(v);
}

double to_double(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw Error(ErrorKind::validation, "report CSV: bad " + what + " '" + s + "'");
  return v;
}

}  // namespace

std::vector<std::string> MetricReport::metric_names() const {
  std::set<std::string> names;
  for (const auto& [_, row] : per_class)
    for (const auto& [name, v] : row.values) names.insert(name);
  for (const auto& [name, v] : macro) names.insert(name);
  for (const auto& [name, v] : micro) names.insert(name);
  return {names.begin(), names.end()};
}

void compute_macro(MetricReport& report) {
  std::map<std::string, std::pair<double, std::size_t>> acc;
  for (const auto& [_, row] : report.per_class) {
    for (const auto& [name, v] : row.values) {
      acc[name].first += v;
      acc[name].second += 1;
    }
  }
  report.macro.clear();
  for (const auto& [name, sum_n] : acc) report.macro[name] = sum_n.first / static_cast<double>(sum_n.second);
}

std::string csv_field(std::string_view value) {
  if (value.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(value);
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else if (c != '\r') {
      out.back() += c;
    }
  }
  if (quoted) throw Error(ErrorKind::validation, "CSV: unterminated quoted field");
  return out;
}

std::string report_to_csv(const MetricReport& r) {
  std::ostringstream out;
  out << "# task," << to_string(r.task) << '\n';
  out << "# dataset," << csv_field(r.dataset) << '\n';
  out << "# method," << csv_field(r.method) << '\n';
  if (r.modality) out << "# modality," << to_string(*r.modality) << '\n';
  out << "# n_samples," << r.n_samples << '\n';
  for (const auto& [name, n] : r.counts) out << "# count:" << name << ',' << n << '\n';
  for (const auto& w : r.warnings) out << "# warning," << csv_field(w) << '\n';

  const auto names = r.metric_names();
  out << "class,support";
  for (const auto& n : names) out << ',' << csv_field(n);
  out << '\n';
  for (const auto& [cls, row] : r.per_class) {
    out << csv_field(cls) << ',' << row.support;
    for (const auto& n : names) out << ',' << cell(row.values, n);
    out << '\n';
  }
  out << kMacroRow << ',' << r.n_samples;
  for (const auto& n : names) out << ',' << cell(r.macro, n);
  out << '\n' << kMicroRow << ',' << r.n_samples;
  for (const auto& n : names) out << ',' << cell(r.micro, n);
  out << '\n';
  return out.str();
}

std::string report_to_markdown(const MetricReport& r) {
  std::ostringstream out;
  out << "### " << to_string(r.task);
  if (!r.dataset.empty()) out << " / " << r.dataset;
  if (!r.method.empty()) out << " / " << r.method;
  out << "\n\n";
  const auto names = r.metric_names();
  out << "| class | support |";
  for (const auto& n : names) out << ' ' << n << " |";
  out << "\n|---|---:|";
  for (std::size_t i = 0; i < names.size(); ++i) out << "---:|";
  out << '\n';
  auto row = [&](const std::string& label, std::size_t support, const std::map<std::string, double>& values) {
    out << "| " << label << " | " << support << " |";
    for (const auto& n : names) out << ' ' << cell(values, n) << " |";
    out << '\n';
  };
  for (const auto& [cls, m] : r.per_class) row(cls, m.support, m.values);
  row("**macro**", r.n_samples, r.macro);
  row("**micro**", r.n_samples, r.micro);
  if (!r.counts.empty()) {
    out << '\n';
    for (const auto& [name, n] : r.counts) out << "- " << name << ": " << n << '\n';
  }
  for (const auto& w : r.warnings) out << "- warning: " << w << '\n';
  return out.str();
}

MetricReport read_report_csv(std::istream& in) {
  MetricReport r;
  std::string line;
  std::vector<std::string> header;
  bool have_task = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      const auto fields = split_csv_line(std::string_view(line).substr(2));
      if (fields.size() != 2) throw Error(ErrorKind::validation, "report CSV: bad metadata line '" + line + "'");
      const std::string& key = fields[0];
      const std::string& value = fields[1];
      if (key == "task") {
        r.task = task_kind_from_string(value);
        have_task = true;
      } else if (key == "dataset") {
        r.dataset = value;
      } else if (key == "method") {
        r.method = value;
      } else if (key == "modality") {
        r.modality = modality_from_string(value);
      } else if (key == "n_samples") {
        r.n_samples = to_size(value, "n_samples");
      } else if (key.rfind("count:", 0) == 0) {
        r.counts[key.substr(6)] = to_size(value, key);
      } else if (key == "warning") {
        r.warnings.push_back(value);
      }
      continue;
    }
    const auto fields = split_csv_line(line);
    if (header.empty()) {
      if (fields.size() < 2 || fields[0] != "class" || fields[1] != "support")
        throw Error(ErrorKind::validation, "report CSV: expected header 'class,support,...'");
      header = fields;
      continue;
    }
    if (fields.size() != header.size())
      throw Error(ErrorKind::validation, "report CSV: row '" + fields[0] + "' has " + std::to_string(fields.size()) +
                                             " fields, header has " + std::to_string(header.size()));
    std::map<std::string, double> values;
    for (std::size_t i = 2; i < fields.size(); ++i) {
      if (!fields[i].empty()) values[header[i]] = to_double(fields[i], header[i]);
    }
    if (fields[0] == kMacroRow) {
      r.macro = std::move(values);
    } else if (fields[0] == kMicroRow) {
      r.micro = std::move(values);
    } else {
      r.per_class[fields[0]] = {to_size(fields[1], "support"), std::move(values)};
    }
  }
  if (!have_task) throw Error(ErrorKind::validation, "report CSV: missing '# task' line");
  if (header.empty()) throw Error(ErrorKind::validation, "report CSV: missing header row");
  return r;
}

MetricReport load_report_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open report " + path.string());
  try {
    return read_report_csv(in);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

}  // namespace mvtk
