#include "mvtk/manifest.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "mvtk/answer_json.hpp"
#include "mvtk/error.hpp"

namespace mvtk {

using nlohmann::json;

std::string_view to_string(Modality m) {
  switch (m) {
    case Modality::xray: return "xray";
    case Modality::ct: return "ct";
    case Modality::mri: return "mri";
    case Modality::ultrasound: return "ultrasound";
    case Modality::photography: return "photography";
    case Modality::endoscopy_video: return "endoscopy_video";
  }
  return "unknown";
}

Modality modality_from_string(std::string_view name) {
  for (Modality m : {Modality::xray, Modality::ct, Modality::mri, Modality::ultrasound, Modality::photography,
                     Modality::endoscopy_video}) {
    if (to_string(m) == name) return m;
  }
  throw Error(ErrorKind::invalid_argument, "unknown modality '" + std::string(name) + "'");
}

std::string_view to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "unknown";
}

Split split_from_string(std::string_view name) {
  if (name == "train") return Split::train;
  if (name == "val") return Split::val;
  if (name == "test") return Split::test;
  throw Error(ErrorKind::invalid_argument, "unknown split '" + std::string(name) + "'");
}

bool DatasetManifest::has_official_split() const {
  return !images.empty() && images.front().official_split.has_value();
}

namespace {

// Collects violations instead of stopping at the first one.
class Violations {
 public:
  void add(std::size_t line, const std::string& where, const std::string& what) {
    list_.push_back("line " + std::to_string(line) + ": " + where + ": " + what);
  }
  bool empty() const { return list_.empty(); }
  [[noreturn]] void raise() const {
    std::string msg = "manifest validation failed (" + std::to_string(list_.size()) + " problem(s))";
    for (const auto& v : list_) msg += "\n  " + v;
    throw Error(ErrorKind::validation, msg);
  }

 private:
  std::vector<std::string> list_;
};

std::optional<std::string> string_field(const json& obj, const char* key, bool required, std::size_t line,
                                        const std::string& where, Violations& v) {
  if (!obj.contains(key)) {
    if (required) v.add(line, where + key, "missing field");
    return std::nullopt;
  }
  const json& val = obj.at(key);
  if (!val.is_string()) {
    v.add(line, where + key, "expected string");
    return std::nullopt;
  }
  return val.get<std::string>();
}

// Polygon gold may be given as {"raw": [[px, py], ...]} in pixel coordinates;
// it is canonicalized against the image extent on load.
json resolve_raw_polygon(const json& gold, Extent extent) {
  if (!gold.is_object() || !gold.contains("raw")) return gold;
  RawPolygon raw;
  raw.extent = extent;
  for (const json& p : gold.at("raw")) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
      throw Error(ErrorKind::validation, "raw polygon points must be [x, y] numbers");
    raw.points.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return answer_to_json(canonicalize_polygon(raw));
}

Annotation parse_annotation(const DatasetManifest& m, const json& a, Extent extent, std::size_t line,
                            const std::string& where, Violations& v, bool& ok) {
  Annotation out;
  ok = false;
  if (!a.is_object()) {
    v.add(line, where, "expected object");
    return out;
  }
  const auto task = string_field(a, "task", true, line, where, v);
  if (!task) return out;
  try {
    out.task = task_kind_from_string(*task);
  } catch (const Error& e) {
    v.add(line, where + "task", e.what());
    return out;
  }
  out.finding = string_field(a, "finding", false, line, where, v);
  out.structure = string_field(a, "structure", false, line, where, v);
  out.question = string_field(a, "question", false, line, where, v);
  out.group = string_field(a, "group", false, line, where, v);
  if (!a.contains("gold")) {
    v.add(line, where + "gold", "missing field");
    return out;
  }
  try {
    json gold = a.at("gold");
    if (out.task == TaskKind::segmentation_polygon) gold = resolve_raw_polygon(gold, extent);
    out.gold = answer_from_json(out.task, gold, m.classes);
    if (out.task == TaskKind::grounding_box2d && !m.classes.empty()) {
      for (const auto& b : std::get<BoxList>(out.gold)) {
        if (static_cast<std::size_t>(b.cls_id) >= m.classes.size())
          throw Error(ErrorKind::validation, "class id " + std::to_string(b.cls_id) + " has no class name");
      }
    }
  } catch (const Error& e) {
    v.add(line, where + "gold", e.what());
    return out;
  }
  ok = true;
  return out;
}

}  // namespace

DatasetManifest read_manifest(std::istream& in) {
  DatasetManifest m;
  Violations v;
  std::string text;
  std::size_t line_no = 0;
  bool have_header = false;
  std::set<std::string> seen_ids;
  std::size_t with_split = 0;

  while (std::getline(in, text)) {
    ++line_no;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(text);
    } catch (const json::parse_error& e) {
      v.add(line_no, "$", std::string("invalid JSON: ") + e.what());
      continue;
    }
    if (!rec.is_object()) {
      v.add(line_no, "$", "expected object");
      continue;
    }

    if (!have_header) {
      have_header = true;
      if (!rec.contains("schema_version") || !rec.at("schema_version").is_number_integer()) {
        v.add(line_no, "schema_version", "missing or not an integer");
      } else if (rec.at("schema_version").get<int>() != kManifestSchemaVersion) {
        v.add(line_no, "schema_version",
              "unsupported version " + std::to_string(rec.at("schema_version").get<int>()));
        v.raise();
      }
      if (auto id = string_field(rec, "dataset_id", true, line_no, "", v)) m.dataset_id = *id;
      if (auto mod = string_field(rec, "modality", true, line_no, "", v)) {
        try {
          m.modality = modality_from_string(*mod);
        } catch (const Error& e) {
          v.add(line_no, "modality", e.what());
        }
      }
      if (rec.contains("classes")) {
        const json& cls = rec.at("classes");
        if (!cls.is_array()) {
          v.add(line_no, "classes", "expected array of strings");
        } else {
          std::set<std::string> unique;
          for (const json& c : cls) {
            if (!c.is_string()) {
              v.add(line_no, "classes", "expected array of strings");
              break;
            }
            if (!unique.insert(c.get<std::string>()).second)
              v.add(line_no, "classes", "duplicate class '" + c.get<std::string>() + "'");
            m.classes.push_back(c.get<std::string>());
          }
        }
      }
      continue;
    }

    ImageRecord img;
    auto id = string_field(rec, "image_id", true, line_no, "", v);
    auto patient = string_field(rec, "patient_id", true, line_no, "", v);
    auto hash = string_field(rec, "content_hash", true, line_no, "", v);
    if (id) {
      img.image_id = *id;
      if (id->empty()) v.add(line_no, "image_id", "empty");
      if (!seen_ids.insert(*id).second) v.add(line_no, "image_id", "duplicate image_id '" + *id + "'");
    }
    if (patient) {
      img.patient_id = *patient;
      if (patient->empty()) v.add(line_no, "patient_id", "empty");
    }
    if (hash) {
      img.content_hash = *hash;
      if (hash->empty()) v.add(line_no, "content_hash", "empty");
    }
    if (!rec.contains("extent") || !rec.at("extent").is_array() || rec.at("extent").size() != 2 ||
        !rec.at("extent")[0].is_number_integer() || !rec.at("extent")[1].is_number_integer()) {
      v.add(line_no, "extent", "expected [width, height] integers");
    } else {
      img.extent = {rec.at("extent")[0].get<int>(), rec.at("extent")[1].get<int>()};
      if (img.extent.width <= 0 || img.extent.height <= 0) v.add(line_no, "extent", "must be positive");
    }
    if (rec.contains("frame_index")) {
      if (!rec.at("frame_index").is_number_integer() || rec.at("frame_index").get<int>() < 0)
        v.add(line_no, "frame_index", "expected non-negative integer");
      else
        img.frame_index = rec.at("frame_index").get<int>();
    }
    img.path = string_field(rec, "path", false, line_no, "", v);
    if (auto split = string_field(rec, "split", false, line_no, "", v)) {
      try {
        img.official_split = split_from_string(*split);
        ++with_split;
      } catch (const Error& e) {
        v.add(line_no, "split", e.what());
      }
    }
    if (rec.contains("annotations")) {
      const json& anns = rec.at("annotations");
      if (!anns.is_array()) {
        v.add(line_no, "annotations", "expected array");
      } else if (img.extent.width > 0 && img.extent.height > 0) {
        for (std::size_t k = 0; k < anns.size(); ++k) {
          bool ok = false;
          Annotation a =
              parse_annotation(m, anns[k], img.extent, line_no, "annotations[" + std::to_string(k) + "].", v, ok);
          if (ok) img.annotations.push_back(std::move(a));
        }
      }
    }
    m.images.push_back(std::move(img));
  }

  if (!have_header) v.add(line_no, "$", "missing header record");
  if (with_split != 0 && with_split != m.images.size())
    v.add(line_no, "split", "official split must be given for all images or for none");
  if (!v.empty()) v.raise();
  return m;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open manifest " + path.string());
  return read_manifest(in);
}

void write_manifest(const DatasetManifest& m, std::ostream& out) {
  json header = {{"schema_version", m.schema_version},
                 {"dataset_id", m.dataset_id},
                 {"modality", std::string(to_string(m.modality))},
                 {"classes", m.classes}};
  out << header.dump() << '\n';
  for (const ImageRecord& img : m.images) {
    json rec = {{"image_id", img.image_id},
                {"patient_id", img.patient_id},
                {"content_hash", img.content_hash},
                {"extent", {img.extent.width, img.extent.height}}};
    if (img.frame_index) rec["frame_index"] = *img.frame_index;
    if (img.path) rec["path"] = *img.path;
    if (img.official_split) rec["split"] = std::string(to_string(*img.official_split));
    json anns = json::array();
    for (const Annotation& a : img.annotations) {
      json ja = {{"task", std::string(to_string(a.task))}, {"gold", answer_to_json(a.gold)}};
      if (a.finding) ja["finding"] = *a.finding;
      if (a.structure) ja["structure"] = *a.structure;
      if (a.question) ja["question"] = *a.question;
      if (a.group) ja["group"] = *a.group;
      anns.push_back(std::move(ja));
    }
    rec["annotations"] = std::move(anns);
    out << rec.dump() << '\n';
  }
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write manifest " + path.string());
  write_manifest(manifest, out);
}

std::string annotation_group(const DatasetManifest& manifest, const Annotation& a) {
  if (a.group) return *a.group;
  if (a.task == TaskKind::grounding_box2d) {
    const auto& boxes = std::get<BoxList>(a.gold);
    const auto cls = static_cast<std::size_t>(boxes.front().cls_id);
    return cls < manifest.classes.size() ? manifest.classes[cls] : "cls_" + std::to_string(cls);
  }
  if (a.finding && a.structure) return *a.finding + "@" + *a.structure;
  if (a.finding) return *a.finding;
  if (a.structure) return *a.structure;
  return "all";
}

}  // namespace mvtk
