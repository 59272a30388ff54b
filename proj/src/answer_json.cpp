#include "mvtk/answer_json.hpp"

#include <algorithm>

#include "mvtk/error.hpp"

namespace mvtk {

using nlohmann::json;

namespace {

struct ToJson {
  json operator()(bool v) const { return v; }
  json operator()(const LabelSet& labels) const { return json(std::vector<std::string>(labels.begin(), labels.end())); }
  json operator()(const BoxList& boxes) const {
    json out = json::array();
    for (const auto& b : boxes) out.push_back({b.cls_id, b.x1, b.y1, b.x2, b.y2});
    return out;
  }
  json operator()(const Box3D& b) const {
    return {{"center", {b.center[0], b.center[1], b.center[2]}}, {"lengths", {b.lengths[0], b.lengths[1], b.lengths[2]}}};
  }
  json operator()(GridPoint2 p) const { return {p.x, p.y}; }
  json operator()(const CanonicalPolygon& poly) const {
    json out = json::array();
    for (const auto& p : poly.points) out.push_back({p.x, p.y});
    return out;
  }
  json operator()(const FreeText& t) const { return t.text; }
};

[[noreturn]] void bad(TaskKind kind, const std::string& why) {
  throw Error(ErrorKind::validation, "gold for " + std::string(to_string(kind)) + ": " + why);
}

int as_int(TaskKind kind, const json& v) {
  if (!v.is_number_integer()) bad(kind, "expected integer, got " + v.dump());
  return v.get<int>();
}

std::vector<int> int_array(TaskKind kind, const json& v, std::size_t n) {
  if (!v.is_array() || v.size() != n) bad(kind, "expected array of " + std::to_string(n) + " integers");
  std::vector<int> out;
  for (const auto& e : v) out.push_back(as_int(kind, e));
  return out;
}

// Re-throws geometry validation failures as manifest validation errors.
template <typename F>
void checked(TaskKind kind, F&& f) {
  try {
    f();
  } catch (const Error& e) {
    bad(kind, e.what());
  }
}

}  // namespace

json answer_to_json(const Answer& answer) { return std::visit(ToJson{}, answer); }

Answer answer_from_json(TaskKind kind, const json& value, std::span<const std::string> vocabulary) {
  switch (kind) {
    case TaskKind::classification_binary:
      if (!value.is_boolean()) bad(kind, "expected true/false");
      return value.get<bool>();
    case TaskKind::classification_multilabel: {
      if (!value.is_array()) bad(kind, "expected array of labels");
      LabelSet labels;
      for (const auto& e : value) {
        if (!e.is_string()) bad(kind, "labels must be strings");
        const auto label = e.get<std::string>();
        if (!vocabulary.empty() && std::find(vocabulary.begin(), vocabulary.end(), label) == vocabulary.end())
          bad(kind, "label '" + label + "' is not in the class vocabulary");
        if (!labels.insert(label).second) bad(kind, "duplicate label '" + label + "'");
      }
      return labels;
    }
    case TaskKind::grounding_box2d: {
      if (!value.is_array() || value.empty()) bad(kind, "expected non-empty array of [cls, x1, y1, x2, y2]");
      BoxList boxes;
      for (const auto& e : value) {
        const auto v = int_array(kind, e, 5);
        NormalizedBox2D b{v[0], v[1], v[2], v[3], v[4]};
        checked(kind, [&] { validate(b); });
        boxes.push_back(b);
      }
      std::sort(boxes.begin(), boxes.end());
      return boxes;
    }
    case TaskKind::grounding_box3d: {
      if (!value.is_object() || !value.contains("center") || !value.contains("lengths"))
        bad(kind, "expected {\"center\": [...], \"lengths\": [...]}");
      const auto c = int_array(kind, value.at("center"), 3);
      const auto l = int_array(kind, value.at("lengths"), 3);
      Box3D b{{c[0], c[1], c[2]}, {l[0], l[1], l[2]}};
      checked(kind, [&] { validate(b); });
      return b;
    }
    case TaskKind::grounding_point: {
      const auto v = int_array(kind, value, 2);
      GridPoint2 p{v[0], v[1]};
      checked(kind, [&] { validate(p); });
      return p;
    }
    case TaskKind::segmentation_polygon: {
      if (!value.is_array() || value.size() != kPolygonPoints) bad(kind, "expected 25 [x, y] pairs");
      CanonicalPolygon poly;
      for (std::size_t k = 0; k < kPolygonPoints; ++k) {
        const auto v = int_array(kind, value[k], 2);
        poly.points[k] = {v[0], v[1]};
        checked(kind, [&] { validate(poly.points[k]); });
      }
      return poly;
    }
    case TaskKind::report:
    case TaskKind::vqa_freeform:
      if (!value.is_string() || value.get<std::string>().empty()) bad(kind, "expected non-empty string");
      return FreeText{value.get<std::string>()};
  }
  bad(kind, "unhandled task kind");
}

}  // namespace mvtk
