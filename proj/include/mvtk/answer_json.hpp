#pragma once

// JSON form of structured answers, shared by manifests, triplet files and
// evaluation:
//
//   classification_binary      true | false
//   classification_multilabel  ["Cardiomegaly", "Edema"]
//   grounding_box2d            [[cls, x1, y1, x2, y2], ...]
//   grounding_box3d            {"center": [x, y, z], "lengths": [a, b, c]}
//   grounding_point            [x, y]
//   segmentation_polygon       [[x, y], ... 25 pairs]
//   report, vqa_freeform       "text"

#include "json.hpp"
#include "mvtk/codec.hpp"

namespace mvtk {

nlohmann::json answer_to_json(const Answer& answer);

// Throws Error(validation) when the value does not fit the task's type or
// breaks its invariants. Multilabel answers are checked against `vocabulary`
// when it is non-empty.
Answer answer_from_json(TaskKind kind, const nlohmann::json& value, std::span<const std::string> vocabulary = {});

}  // namespace mvtk
