#pragma once

// Synthetic-shapes datasets: small RGB images with colored rectangles,
// ellipses and polygons, plus a manifest whose gold annotations are exact by
// construction.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "mvtk/geometry.hpp"
#include "mvtk/manifest.hpp"

namespace mvtk {

struct SynthSpec {
  std::size_t n_images = 10;
  std::size_t shapes_per_image = 2;
  // Class k is drawn as a rectangle (k % 3 == 0), ellipse (1) or polygon (2).
  std::vector<std::string> classes = {"box", "disc", "star"};
  Extent extent = {256, 256};
  std::uint64_t seed = 1;
  std::string dataset_id = "synth";
  Modality modality = Modality::photography;
};

SynthSpec synth_spec_from_json(const nlohmann::json& value);
SynthSpec load_synth_spec(const std::filesystem::path& path);

struct RgbImage {
  Extent extent;
  std::vector<std::uint8_t> pixels;  // row-major RGB

  std::string to_ppm() const;  // binary P6
};

struct SyntheticDataset {
  DatasetManifest manifest;
  std::vector<RgbImage> images;  // parallel to manifest.images
};

// Each shape occupies its own cell of a regular layout, so shapes never
// overlap. Throws Error(invalid_extent) when a cell would be under 16 px.
SyntheticDataset generate_synthetic_dataset(const SynthSpec& spec);

// Writes DIR/manifest.jsonl and DIR/images/<image_id>.ppm.
void write_synthetic_dataset(const SyntheticDataset& dataset, const std::filesystem::path& dir);

}  // namespace mvtk
