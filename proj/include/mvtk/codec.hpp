#pragma once

// Text grammar for every task answer. docs/answer_grammar.md is the normative
// description; this header is its implementation.
//
// Strict parsing accepts exactly the rendered form and either returns a value
// that satisfies its type invariants or throws mvtk::Error carrying the byte
// offset where matching failed. Lenient parsing scans free text (chatty model
// output), takes the first match per expected structure, coerces what it can
// and records every coercion or ignored extra match as a warning.

#include <array>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mvtk/geometry.hpp"

namespace mvtk {

enum class TaskKind {
  classification_binary,
  classification_multilabel,
  grounding_box2d,
  grounding_box3d,
  grounding_point,
  segmentation_polygon,
  report,
  vqa_freeform,
};

inline constexpr std::array<TaskKind, 8> kAllTaskKinds = {
    TaskKind::classification_binary, TaskKind::classification_multilabel, TaskKind::grounding_box2d,
    TaskKind::grounding_box3d,       TaskKind::grounding_point,           TaskKind::segmentation_polygon,
    TaskKind::report,                TaskKind::vqa_freeform,
};

std::string_view to_string(TaskKind kind);
TaskKind task_kind_from_string(std::string_view name);

enum class ParseMode { strict, lenient };
std::string_view to_string(ParseMode mode);
ParseMode parse_mode_from_string(std::string_view name);

// Absolute corners are the default. center_offset writes each corner as its
// offset from the grid center (500, 500).
enum class BoxEncoding { absolute, center_offset };

struct AnswerText {
  std::string text;
  bool framed = false;  // <BOS>/<EOS> present
  bool operator==(const AnswerText&) const = default;
};

using LabelSet = std::set<std::string>;
using BoxList = std::vector<NormalizedBox2D>;
using Vocabulary = std::vector<std::string>;

struct FreeText {
  std::string text;
  auto operator<=>(const FreeText&) const = default;
};

using Answer = std::variant<bool, LabelSet, BoxList, Box3D, GridPoint2, CanonicalPolygon, FreeText>;

template <typename T>
struct Parsed {
  T value;
  ParseMode mode = ParseMode::strict;
  std::vector<std::string> warnings;
};

using ParsedAnswer = Parsed<Answer>;

// True when the variant alternative is the one used for `kind`.
bool answer_matches_task(TaskKind kind, const Answer& answer);

AnswerText render_binary(bool answer);
Parsed<bool> parse_binary(std::string_view text, ParseMode mode);

// Boxes are written in (cls_id, x1, y1) order; ties fall back to x2, y2.
AnswerText render_box2d(std::span<const NormalizedBox2D> boxes, BoxEncoding encoding = BoxEncoding::absolute);
Parsed<BoxList> parse_box2d(std::string_view text, ParseMode mode, BoxEncoding encoding = BoxEncoding::absolute);

AnswerText render_box3d(const Box3D& box);
Parsed<Box3D> parse_box3d(std::string_view text, ParseMode mode);

AnswerText render_point(GridPoint2 point);
Parsed<GridPoint2> parse_point(std::string_view text, ParseMode mode);

AnswerText render_polygon(const CanonicalPolygon& polygon);
Parsed<CanonicalPolygon> parse_polygon(std::string_view text, ParseMode mode);

AnswerText render_multilabel(const LabelSet& labels, std::span<const std::string> vocabulary);
Parsed<LabelSet> parse_multilabel(std::string_view text, std::span<const std::string> vocabulary, ParseMode mode);

AnswerText render_text(const FreeText& text);
Parsed<FreeText> parse_text(std::string_view text, ParseMode mode);

struct CodecOptions {
  BoxEncoding box_encoding = BoxEncoding::absolute;
  std::span<const std::string> vocabulary;  // required for multilabel
};

AnswerText render(TaskKind kind, const Answer& answer, const CodecOptions& options = {});
ParsedAnswer parse(TaskKind kind, std::string_view text, ParseMode mode, const CodecOptions& options = {});

// Rendering of the empty label set.
inline constexpr std::string_view kNoFinding = "no finding";

}  // namespace mvtk
