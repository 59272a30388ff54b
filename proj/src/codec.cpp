#include "mvtk/codec.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <optional>

#include "mvtk/error.hpp"

namespace mvtk {

std::string_view to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::classification_binary: return "classification_binary";
    case TaskKind::classification_multilabel: return "classification_multilabel";
    case TaskKind::grounding_box2d: return "grounding_box2d";
    case TaskKind::grounding_box3d: return "grounding_box3d";
    case TaskKind::grounding_point: return "grounding_point";
    case TaskKind::segmentation_polygon: return "segmentation_polygon";
    case TaskKind::report: return "report";
    case TaskKind::vqa_freeform: return "vqa_freeform";
  }
  return "unknown";
}

TaskKind task_kind_from_string(std::string_view name) {
  for (TaskKind kind : kAllTaskKinds) {
    if (to_string(kind) == name) return kind;
  }
  throw Error(ErrorKind::invalid_argument, "unknown task kind '" + std::string(name) + "'");
}

std::string_view to_string(ParseMode mode) { return mode == ParseMode::strict ? "strict" : "lenient"; }

ParseMode parse_mode_from_string(std::string_view name) {
  if (name == "strict") return ParseMode::strict;
  if (name == "lenient") return ParseMode::lenient;
  throw Error(ErrorKind::invalid_argument, "unknown parse mode '" + std::string(name) + "'");
}

bool answer_matches_task(TaskKind kind, const Answer& answer) {
  switch (kind) {
    case TaskKind::classification_binary: return std::holds_alternative<bool>(answer);
    case TaskKind::classification_multilabel: return std::holds_alternative<LabelSet>(answer);
    case TaskKind::grounding_box2d: return std::holds_alternative<BoxList>(answer);
    case TaskKind::grounding_box3d: return std::holds_alternative<Box3D>(answer);
    case TaskKind::grounding_point: return std::holds_alternative<GridPoint2>(answer);
    case TaskKind::segmentation_polygon: return std::holds_alternative<CanonicalPolygon>(answer);
    case TaskKind::report:
    case TaskKind::vqa_freeform: return std::holds_alternative<FreeText>(answer);
  }
  return false;
}

namespace {

constexpr std::string_view kBos = "<BOS>";
constexpr std::string_view kEos = "<EOS>";
constexpr int kGridCenter = kGridMax / 2;

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

// Recursive-descent reader for the strict grammar.
class Cursor {
 public:
  explicit Cursor(std::string_view text) : text_(text) {}

  void expect(std::string_view literal) {
    if (text_.substr(pos_, literal.size()) != literal) fail("expected '" + std::string(literal) + "'");
    pos_ += literal.size();
  }

  bool consume(std::string_view literal) {
    if (text_.substr(pos_, literal.size()) != literal) return false;
    pos_ += literal.size();
    return true;
  }

  // -?(0|[1-9][0-9]*). The sign is accepted so that negative values surface
  // as range errors rather than syntax errors.
  struct Integer {
    long value;
    std::size_t offset;
  };

  Integer integer() {
    const std::size_t start = pos_;
    bool negative = false;
    if (pos_ < text_.size() && text_[pos_] == '-') {
      negative = true;
      ++pos_;
    }
    if (pos_ >= text_.size() || !is_digit(text_[pos_])) fail("expected integer");
    if (text_[pos_] == '0' && pos_ + 1 < text_.size() && is_digit(text_[pos_ + 1])) fail("leading zero");
    long value = 0;
    std::size_t digits = 0;
    while (pos_ < text_.size() && is_digit(text_[pos_])) {
      if (++digits > 9) throw Error(ErrorKind::range, "integer too large at byte " + std::to_string(start), start);
      value = value * 10 + (text_[pos_] - '0');
      ++pos_;
    }
    if (pos_ < text_.size() && text_[pos_] == '.') fail("expected integer, found decimal point");
    return {negative ? -value : value, start};
  }

  void finish() {
    if (pos_ != text_.size()) fail("unexpected trailing text");
  }

  std::size_t pos() const { return pos_; }
  bool at_end() const { return pos_ == text_.size(); }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorKind::syntax, what + " at byte " + std::to_string(pos_), pos_);
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

int grid_value(const Cursor::Integer& v, long shift = 0) {
  const long shifted = v.value + shift;
  if (shifted < 0 || shifted > kGridMax)
    throw Error(ErrorKind::range, "coordinate " + std::to_string(v.value) + " outside the grid at byte " +
                                      std::to_string(v.offset), v.offset);
  return static_cast<int>(shifted);
}

// ---- lenient scanning ----

struct Number {
  double value;
  bool integral;
  std::size_t offset;
};

std::optional<Number> scan_number(std::string_view text, std::size_t& pos) {
  const std::size_t start = pos;
  std::size_t p = pos;
  if (p < text.size() && (text[p] == '-' || text[p] == '+')) ++p;
  const std::size_t digits_start = p;
  while (p < text.size() && is_digit(text[p])) ++p;
  if (p == digits_start) return std::nullopt;
  bool integral = true;
  if (p + 1 < text.size() && text[p] == '.' && is_digit(text[p + 1])) {
    integral = false;
    ++p;
    while (p < text.size() && is_digit(text[p])) ++p;
  }
  const std::string token(text.substr(start, p - start));
  pos = p;
  return Number{std::strtod(token.c_str(), nullptr), integral, start};
}

struct TupleMatch {
  std::vector<Number> values;
  std::size_t begin = 0;
  std::size_t end = 0;
};

void skip_space(std::string_view text, std::size_t& pos) {
  while (pos < text.size() && is_space(text[pos])) ++pos;
}

std::optional<TupleMatch> tuple_at(std::string_view text, std::size_t pos, char open, char close, std::size_t arity) {
  if (pos >= text.size() || text[pos] != open) return std::nullopt;
  TupleMatch m;
  m.begin = pos;
  ++pos;
  while (true) {
    skip_space(text, pos);
    auto n = scan_number(text, pos);
    if (!n) return std::nullopt;
    m.values.push_back(*n);
    skip_space(text, pos);
    if (pos < text.size() && text[pos] == ',') {
      ++pos;
      continue;
    }
    if (pos < text.size() && text[pos] == close) {
      m.end = pos + 1;
      break;
    }
    return std::nullopt;
  }
  if (m.values.size() != arity) return std::nullopt;
  return m;
}

std::vector<TupleMatch> find_tuples(std::string_view text, char open, char close, std::size_t arity) {
  std::vector<TupleMatch> out;
  std::size_t pos = 0;
  while ((pos = text.find(open, pos)) != std::string_view::npos) {
    if (auto m = tuple_at(text, pos, open, close, arity)) {
      pos = m->end;
      out.push_back(std::move(*m));
    } else {
      ++pos;
    }
  }
  return out;
}

long to_integer(const Number& n, std::vector<std::string>& warnings) {
  double v = n.value;
  if (!n.integral) {
    v = std::floor(v + 0.5);
    warnings.push_back("rounded non-integer value at byte " + std::to_string(n.offset));
  }
  v = std::clamp(v, -1e9, 1e9);
  return static_cast<long>(v);
}

int clamp_grid(long v, std::size_t offset, std::vector<std::string>& warnings) {
  if (v < 0 || v > kGridMax) {
    warnings.push_back("clamped coordinate " + std::to_string(v) + " at byte " + std::to_string(offset));
    return static_cast<int>(std::clamp<long>(v, 0, kGridMax));
  }
  return static_cast<int>(v);
}

template <typename T>
void warn_extra(const std::vector<T>& matches, std::string_view what, std::vector<std::string>& warnings) {
  if (matches.size() > 1)
    warnings.push_back("ignored " + std::to_string(matches.size() - 1) + " extra " + std::string(what) + " match(es)");
}

// Lenient parsing of strict-valid text must agree with strict parsing, so
// every lenient parser tries the strict grammar first.
template <typename T, typename Strict>
std::optional<Parsed<T>> strict_first(std::string_view text, Strict strict) {
  try {
    Parsed<T> p = strict(text);
    p.mode = ParseMode::lenient;
    return p;
  } catch (const Error&) {
    return std::nullopt;
  }
}

std::string join_int(long v) { return std::to_string(v); }

}  // namespace

// ---- binary ----

AnswerText render_binary(bool answer) { return {answer ? "yes" : "no", false}; }

Parsed<bool> parse_binary(std::string_view text, ParseMode mode) {
  auto strict = [](std::string_view t) -> Parsed<bool> {
    if (t == "yes") return {true, ParseMode::strict, {}};
    if (t == "no") return {false, ParseMode::strict, {}};
    throw Error(ErrorKind::syntax, "expected 'yes' or 'no' at byte 0", 0);
  };
  if (mode == ParseMode::strict) return strict(text);
  if (auto p = strict_first<bool>(text, strict)) return *p;

  std::vector<std::pair<bool, std::size_t>> hits;
  std::size_t pos = 0;
  while (pos < text.size()) {
    if (!std::isalpha(static_cast<unsigned char>(text[pos]))) {
      ++pos;
      continue;
    }
    const std::size_t start = pos;
    while (pos < text.size() && std::isalnum(static_cast<unsigned char>(text[pos]))) ++pos;
    const std::string word = lower(text.substr(start, pos - start));
    if (word == "yes") hits.emplace_back(true, start);
    if (word == "no") hits.emplace_back(false, start);
  }
  if (hits.empty()) throw Error(ErrorKind::syntax, "no yes/no answer found", 0);
  Parsed<bool> out{hits.front().first, ParseMode::lenient, {}};
  warn_extra(hits, "yes/no", out.warnings);
  return out;
}

// ---- 2D boxes ----

AnswerText render_box2d(std::span<const NormalizedBox2D> boxes, BoxEncoding encoding) {
  if (boxes.empty()) throw Error(ErrorKind::empty_answer, "cannot render an empty box list");
  BoxList sorted(boxes.begin(), boxes.end());
  for (const auto& b : sorted) validate(b);
  std::sort(sorted.begin(), sorted.end());
  const long shift = encoding == BoxEncoding::center_offset ? kGridCenter : 0;
  std::string out;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const auto& b = sorted[i];
    if (i) out += "; ";
    out += "(" + join_int(b.cls_id) + ", " + join_int(b.x1 - shift) + ", " + join_int(b.y1 - shift) + ", " +
           join_int(b.x2 - shift) + ", " + join_int(b.y2 - shift) + ")";
  }
  return {out, false};
}

Parsed<BoxList> parse_box2d(std::string_view text, ParseMode mode, BoxEncoding encoding) {
  const long shift = encoding == BoxEncoding::center_offset ? kGridCenter : 0;
  auto strict = [shift](std::string_view t) -> Parsed<BoxList> {
    Cursor c(t);
    BoxList boxes;
    do {
      c.expect("(");
      const auto cls = c.integer();
      if (cls.value < 0)
        throw Error(ErrorKind::range, "negative class id at byte " + std::to_string(cls.offset), cls.offset);
      c.expect(", ");
      const auto x1 = c.integer();
      c.expect(", ");
      const auto y1 = c.integer();
      c.expect(", ");
      const auto x2 = c.integer();
      c.expect(", ");
      const auto y2 = c.integer();
      c.expect(")");
      NormalizedBox2D b{static_cast<int>(cls.value), grid_value(x1, shift), grid_value(y1, shift),
                        grid_value(x2, shift), grid_value(y2, shift)};
      if (b.x1 > b.x2 || b.y1 > b.y2)
        throw Error(ErrorKind::range, "box corners out of order at byte " + std::to_string(x1.offset), x1.offset);
      boxes.push_back(b);
    } while (c.consume("; "));
    c.finish();
    return {std::move(boxes), ParseMode::strict, {}};
  };
  if (mode == ParseMode::strict) return strict(text);
  if (auto p = strict_first<BoxList>(text, strict)) return *p;

  Parsed<BoxList> out{{}, ParseMode::lenient, {}};
  for (const TupleMatch& m : find_tuples(text, '(', ')', 5)) {
    long v[5];
    for (int i = 0; i < 5; ++i) v[i] = to_integer(m.values[i], out.warnings);
    if (v[0] < 0) {
      out.warnings.push_back("skipped tuple with negative class id at byte " + std::to_string(m.begin));
      continue;
    }
    NormalizedBox2D b{static_cast<int>(v[0]), clamp_grid(v[1] + shift, m.values[1].offset, out.warnings),
                      clamp_grid(v[2] + shift, m.values[2].offset, out.warnings),
                      clamp_grid(v[3] + shift, m.values[3].offset, out.warnings),
                      clamp_grid(v[4] + shift, m.values[4].offset, out.warnings)};
    if (b.x1 > b.x2 || b.y1 > b.y2) {
      if (b.x1 > b.x2) std::swap(b.x1, b.x2);
      if (b.y1 > b.y2) std::swap(b.y1, b.y2);
      out.warnings.push_back("reordered box corners at byte " + std::to_string(m.begin));
    }
    out.value.push_back(b);
  }
  if (out.value.empty()) throw Error(ErrorKind::syntax, "no (c, x1, y1, x2, y2) tuple found", 0);
  return out;
}

// ---- 3D boxes ----

AnswerText render_box3d(const Box3D& box) {
  validate(box);
  const auto& c = box.center;
  const auto& l = box.lengths;
  return {"center at [" + join_int(c[0]) + ", " + join_int(c[1]) + ", " + join_int(c[2]) + "], box length is [" +
              join_int(l[0]) + ", " + join_int(l[1]) + ", " + join_int(l[2]) + "]",
          false};
}

Parsed<Box3D> parse_box3d(std::string_view text, ParseMode mode) {
  auto strict = [](std::string_view t) -> Parsed<Box3D> {
    Cursor c(t);
    Box3D b;
    c.expect("center at [");
    for (int i = 0; i < 3; ++i) {
      if (i) c.expect(", ");
      b.center[i] = grid_value(c.integer());
    }
    c.expect("], box length is [");
    for (int i = 0; i < 3; ++i) {
      if (i) c.expect(", ");
      const auto v = c.integer();
      if (v.value < 0)
        throw Error(ErrorKind::range, "negative box length at byte " + std::to_string(v.offset), v.offset);
      if (v.value > kGridMax)
        throw Error(ErrorKind::range, "box length above 1000 at byte " + std::to_string(v.offset), v.offset);
      b.lengths[i] = static_cast<int>(v.value);
    }
    c.expect("]");
    c.finish();
    return {b, ParseMode::strict, {}};
  };
  if (mode == ParseMode::strict) return strict(text);
  if (auto p = strict_first<Box3D>(text, strict)) return *p;

  const auto triples = find_tuples(text, '[', ']', 3);
  if (triples.size() < 2) throw Error(ErrorKind::syntax, "expected center and length triples", 0);
  Parsed<Box3D> out{{}, ParseMode::lenient, {}};
  for (int i = 0; i < 3; ++i) {
    out.value.center[i] = clamp_grid(to_integer(triples[0].values[i], out.warnings), triples[0].values[i].offset,
                                     out.warnings);
    out.value.lengths[i] = clamp_grid(to_integer(triples[1].values[i], out.warnings), triples[1].values[i].offset,
                                      out.warnings);
  }
  if (triples.size() > 2)
    out.warnings.push_back("ignored " + std::to_string(triples.size() - 2) + " extra triple(s)");
  return out;
}

// ---- points ----

AnswerText render_point(GridPoint2 point) {
  validate(point);
  return {"[" + join_int(point.x) + ", " + join_int(point.y) + "]", false};
}

Parsed<GridPoint2> parse_point(std::string_view text, ParseMode mode) {
  auto strict = [](std::string_view t) -> Parsed<GridPoint2> {
    Cursor c(t);
    c.expect("[");
    GridPoint2 p;
    p.x = grid_value(c.integer());
    c.expect(", ");
    p.y = grid_value(c.integer());
    c.expect("]");
    c.finish();
    return {p, ParseMode::strict, {}};
  };
  if (mode == ParseMode::strict) return strict(text);
  if (auto p = strict_first<GridPoint2>(text, strict)) return *p;

  const auto pairs = find_tuples(text, '[', ']', 2);
  if (pairs.empty()) throw Error(ErrorKind::syntax, "no [x, y] pair found", 0);
  Parsed<GridPoint2> out{{}, ParseMode::lenient, {}};
  const auto& m = pairs.front();
  out.value.x = clamp_grid(to_integer(m.values[0], out.warnings), m.values[0].offset, out.warnings);
  out.value.y = clamp_grid(to_integer(m.values[1], out.warnings), m.values[1].offset, out.warnings);
  warn_extra(pairs, "[x, y]", out.warnings);
  return out;
}

// ---- polygons ----

AnswerText render_polygon(const CanonicalPolygon& polygon) {
  std::string out(kBos);
  for (const GridPoint2& p : polygon.points) {
    validate(p);
    out += " " + join_int(p.x) + " " + join_int(p.y);
  }
  out += " ";
  out += kEos;
  return {out, true};
}

Parsed<CanonicalPolygon> parse_polygon(std::string_view text, ParseMode mode) {
  auto strict = [](std::string_view t) -> Parsed<CanonicalPolygon> {
    Cursor c(t);
    c.expect(kBos);
    std::vector<Cursor::Integer> values;
    while (c.consume(" ")) {
      if (c.consume(kEos)) {
        c.finish();
        if (values.size() != 2 * kPolygonPoints)
          throw Error(ErrorKind::count,
                      "expected 50 integers, found " + std::to_string(values.size()), c.pos());
        Parsed<CanonicalPolygon> out{{}, ParseMode::strict, {}};
        for (std::size_t k = 0; k < kPolygonPoints; ++k)
          out.value.points[k] = {grid_value(values[2 * k]), grid_value(values[2 * k + 1])};
        out.warnings = canonical_violations(out.value);
        return out;
      }
      values.push_back(c.integer());
    }
    c.fail(c.at_end() ? "missing <EOS> tag" : "expected ' '");
  };
  if (mode == ParseMode::strict) return strict(text);
  if (auto p = strict_first<CanonicalPolygon>(text, strict)) return *p;

  Parsed<CanonicalPolygon> out{{}, ParseMode::lenient, {}};
  const std::string folded = lower(text);
  std::size_t begin = folded.find(lower(kBos));
  std::size_t end = std::string::npos;
  if (begin != std::string::npos) {
    begin += kBos.size();
    end = folded.find(lower(kEos), begin);
  }
  if (begin == std::string::npos || end == std::string::npos) {
    out.warnings.push_back("missing <BOS>/<EOS> framing; reading all numbers");
    begin = 0;
    end = text.size();
  }
  std::vector<Number> numbers;
  std::size_t pos = begin;
  while (pos < end) {
    if (is_digit(text[pos]) || ((text[pos] == '-' || text[pos] == '+') && pos + 1 < end && is_digit(text[pos + 1]))) {
      if (auto n = scan_number(text.substr(0, end), pos)) numbers.push_back(*n);
    } else {
      ++pos;
    }
  }
  if (numbers.size() < 2 * kPolygonPoints)
    throw Error(ErrorKind::count, "expected 50 integers, found " + std::to_string(numbers.size()), begin);
  if (numbers.size() > 2 * kPolygonPoints)
    out.warnings.push_back("ignored " + std::to_string(numbers.size() - 2 * kPolygonPoints) + " extra number(s)");
  for (std::size_t k = 0; k < kPolygonPoints; ++k) {
    const Number& nx = numbers[2 * k];
    const Number& ny = numbers[2 * k + 1];
    out.value.points[k] = {clamp_grid(to_integer(nx, out.warnings), nx.offset, out.warnings),
                           clamp_grid(to_integer(ny, out.warnings), ny.offset, out.warnings)};
  }
  for (auto& w : canonical_violations(out.value)) out.warnings.push_back(std::move(w));
  return out;
}

// ---- multi-label ----

namespace {

void check_vocabulary(std::span<const std::string> vocabulary) {
  for (const std::string& label : vocabulary) {
    if (label.empty() || label.find(", ") != std::string::npos || label == kNoFinding)
      throw Error(ErrorKind::invalid_argument, "vocabulary label '" + label + "' cannot be written unambiguously");
  }
}

bool in_vocabulary(std::span<const std::string> vocabulary, std::string_view label) {
  return std::find(vocabulary.begin(), vocabulary.end(), label) != vocabulary.end();
}

}  // namespace

AnswerText render_multilabel(const LabelSet& labels, std::span<const std::string> vocabulary) {
  check_vocabulary(vocabulary);
  if (labels.empty()) return {std::string(kNoFinding), false};
  std::string out;
  for (const std::string& label : labels) {
    if (!in_vocabulary(vocabulary, label))
      throw Error(ErrorKind::validation, "label '" + label + "' is not in the vocabulary");
    if (!out.empty()) out += ", ";
    out += label;
  }
  return {out, false};
}

Parsed<LabelSet> parse_multilabel(std::string_view text, std::span<const std::string> vocabulary, ParseMode mode) {
  check_vocabulary(vocabulary);
  auto strict = [vocabulary](std::string_view t) -> Parsed<LabelSet> {
    Parsed<LabelSet> out{{}, ParseMode::strict, {}};
    if (t == kNoFinding) return out;
    std::size_t pos = 0;
    while (true) {
      const std::size_t sep = t.find(", ", pos);
      const std::string_view label = t.substr(pos, sep == std::string_view::npos ? std::string_view::npos : sep - pos);
      if (!in_vocabulary(vocabulary, label))
        throw Error(ErrorKind::validation,
                    "unknown label '" + std::string(label) + "' at byte " + std::to_string(pos), pos);
      if (!out.value.insert(std::string(label)).second)
        throw Error(ErrorKind::syntax, "duplicate label at byte " + std::to_string(pos), pos);
      if (sep == std::string_view::npos) break;
      pos = sep + 2;
    }
    return out;
  };
  if (mode == ParseMode::strict) return strict(text);
  if (auto p = strict_first<LabelSet>(text, strict)) return *p;

  // Longest labels claim their span first so "Edema" cannot match inside
  // "Pulmonary Edema".
  std::vector<std::string> order(vocabulary.begin(), vocabulary.end());
  std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.size() > b.size(); });
  std::string folded = lower(text);
  Parsed<LabelSet> out{{}, ParseMode::lenient, {}};
  for (const std::string& label : order) {
    const std::string needle = lower(label);
    std::size_t at = folded.find(needle);
    if (at == std::string::npos) continue;
    out.value.insert(label);
    while (at != std::string::npos) {
      std::fill(folded.begin() + static_cast<std::ptrdiff_t>(at),
                folded.begin() + static_cast<std::ptrdiff_t>(at + needle.size()), '\0');
      at = folded.find(needle, at + needle.size());
    }
  }
  if (out.value.empty() && lower(text).find(kNoFinding) == std::string::npos)
    out.warnings.push_back("no vocabulary label found");
  return out;
}

// ---- free text ----

AnswerText render_text(const FreeText& text) {
  if (text.text.empty()) throw Error(ErrorKind::empty_answer, "cannot render an empty text answer");
  return {text.text, false};
}

Parsed<FreeText> parse_text(std::string_view text, ParseMode mode) {
  if (mode == ParseMode::strict) {
    if (text.empty()) throw Error(ErrorKind::empty_answer, "empty text answer", 0);
    return {FreeText{std::string(text)}, ParseMode::strict, {}};
  }
  // Kept verbatim so lenient never disagrees with strict; only blank output is rejected.
  if (std::all_of(text.begin(), text.end(), is_space)) throw Error(ErrorKind::empty_answer, "empty text answer", 0);
  return {FreeText{std::string(text)}, ParseMode::lenient, {}};
}

// ---- dispatch ----

AnswerText render(TaskKind kind, const Answer& answer, const CodecOptions& options) {
  if (!answer_matches_task(kind, answer))
    throw Error(ErrorKind::kind_mismatch, "answer does not match task " + std::string(to_string(kind)));
  switch (kind) {
    case TaskKind::classification_binary: return render_binary(std::get<bool>(answer));
    case TaskKind::classification_multilabel: return render_multilabel(std::get<LabelSet>(answer), options.vocabulary);
    case TaskKind::grounding_box2d: return render_box2d(std::get<BoxList>(answer), options.box_encoding);
    case TaskKind::grounding_box3d: return render_box3d(std::get<Box3D>(answer));
    case TaskKind::grounding_point: return render_point(std::get<GridPoint2>(answer));
    case TaskKind::segmentation_polygon: return render_polygon(std::get<CanonicalPolygon>(answer));
    case TaskKind::report:
    case TaskKind::vqa_freeform: return render_text(std::get<FreeText>(answer));
  }
  throw Error(ErrorKind::invalid_argument, "unhandled task kind");
}

namespace {

template <typename T>
ParsedAnswer widen(Parsed<T>&& p) {
  return {Answer{std::move(p.value)}, p.mode, std::move(p.warnings)};
}

}  // namespace

ParsedAnswer parse(TaskKind kind, std::string_view text, ParseMode mode, const CodecOptions& options) {
  switch (kind) {
    case TaskKind::classification_binary: return widen(parse_binary(text, mode));
    case TaskKind::classification_multilabel: return widen(parse_multilabel(text, options.vocabulary, mode));
    case TaskKind::grounding_box2d: return widen(parse_box2d(text, mode, options.box_encoding));
    case TaskKind::grounding_box3d: return widen(parse_box3d(text, mode));
    case TaskKind::grounding_point: return widen(parse_point(text, mode));
    case TaskKind::segmentation_polygon: return widen(parse_polygon(text, mode));
    case TaskKind::report:
    case TaskKind::vqa_freeform: return widen(parse_text(text, mode));
  }
  throw Error(ErrorKind::invalid_argument, "unhandled task kind");
}

}  // namespace mvtk
