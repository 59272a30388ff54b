#pragma once

// Dataset manifests: line-delimited JSON, one header record followed by one
// record per image. docs/manifest_schema.md documents the format.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mvtk/codec.hpp"
#include "mvtk/geometry.hpp"

namespace mvtk {

inline constexpr int kManifestSchemaVersion = 1;

enum class Modality { xray, ct, mri, ultrasound, photography, endoscopy_video };
std::string_view to_string(Modality m);
Modality modality_from_string(std::string_view name);

enum class Split { train, val, test };
std::string_view to_string(Split s);
Split split_from_string(std::string_view name);

struct Annotation {
  TaskKind task = TaskKind::classification_binary;
  Answer gold;
  std::optional<std::string> finding;
  std::optional<std::string> structure;
  std::optional<std::string> question;
  std::optional<std::string> group;  // explicit per-class metric key
};

struct ImageRecord {
  std::string image_id;
  std::string patient_id;
  std::string content_hash;
  Extent extent;
  std::optional<int> frame_index;
  std::optional<std::string> path;
  std::optional<Split> official_split;
  std::vector<Annotation> annotations;
};

struct DatasetManifest {
  int schema_version = kManifestSchemaVersion;
  std::string dataset_id;
  Modality modality = Modality::xray;
  // Class names. Box class ids index into this list and it doubles as the
  // multilabel vocabulary.
  std::vector<std::string> classes;
  std::vector<ImageRecord> images;

  bool has_official_split() const;
};

// Parse and validate. All schema violations are collected and reported
// together in one Error(validation), one "line N: path: problem" per line.
DatasetManifest read_manifest(std::istream& in);
DatasetManifest load_manifest(const std::filesystem::path& path);

void write_manifest(const DatasetManifest& manifest, std::ostream& out);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

// Metric grouping key of an annotation: explicit group, else the class name of
// the first box, else "finding@structure" from the slots present, else "all".
std::string annotation_group(const DatasetManifest& manifest, const Annotation& annotation);

}  // namespace mvtk
