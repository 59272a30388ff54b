#include "mvtk/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

#include "mvtk/error.hpp"
#include "mvtk/hashing.hpp"
#include "mvtk/random.hpp"

namespace mvtk {

using nlohmann::json;

namespace {

constexpr int kMinCell = 16;
constexpr int kMargin = 2;
constexpr std::array<std::uint8_t, 3> kBackground = {24, 24, 24};
constexpr std::array<std::array<std::uint8_t, 3>, 6> kPalette = {{
    {220, 60, 60}, {60, 180, 75}, {70, 110, 230}, {240, 200, 40}, {170, 80, 200}, {40, 200, 200}}};

enum class ShapeKind { rectangle, ellipse, polygon };

struct Layout {
  int cols = 0;
  int rows = 0;
  int cell_w = 0;
  int cell_h = 0;
};

Layout layout_for(const SynthSpec& spec) {
  Layout l;
  const auto k = static_cast<int>(spec.shapes_per_image);
  l.cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(k))));
  l.rows = (k + l.cols - 1) / l.cols;
  l.cell_w = spec.extent.width / l.cols;
  l.cell_h = spec.extent.height / l.rows;
  if (l.cell_w < kMinCell || l.cell_h < kMinCell)
    throw Error(ErrorKind::invalid_extent,
                "extent " + std::to_string(spec.extent.width) + "x" + std::to_string(spec.extent.height) +
                    " is too small for " + std::to_string(k) + " shapes per image");
  return l;
}

void validate_spec(const SynthSpec& spec) {
  if (spec.n_images == 0) throw Error(ErrorKind::invalid_argument, "synth spec: n_images must be positive");
  if (spec.shapes_per_image == 0)
    throw Error(ErrorKind::invalid_argument, "synth spec: shapes_per_image must be positive");
  if (spec.classes.empty()) throw Error(ErrorKind::invalid_argument, "synth spec: classes must not be empty");
  if (std::set<std::string>(spec.classes.begin(), spec.classes.end()).size() != spec.classes.size())
    throw Error(ErrorKind::invalid_argument, "synth spec: duplicate class names");
  if (spec.dataset_id.empty()) throw Error(ErrorKind::invalid_argument, "synth spec: empty dataset_id");
  validate(spec.extent);
}

bool inside_even_odd(const std::vector<PixelPoint>& ring, double x, double y) {
  bool inside = false;
  for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
    const PixelPoint a = ring[i];
    const PixelPoint b = ring[j];
    if ((a.y > y) != (b.y > y) && x < a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y)) inside = !inside;
  }
  return inside;
}

struct Canvas {
  RgbImage image;
  int min_x = 0, min_y = 0, max_x = -1, max_y = -1;

  void begin_shape() {
    min_x = min_y = INT32_MAX;
    max_x = max_y = -1;
  }
  void put(int x, int y, const std::array<std::uint8_t, 3>& color) {
    const std::size_t at = (static_cast<std::size_t>(y) * image.extent.width + x) * 3;
    std::copy(color.begin(), color.end(), image.pixels.begin() + static_cast<std::ptrdiff_t>(at));
    min_x = std::min(min_x, x);
    min_y = std::min(min_y, y);
    max_x = std::max(max_x, x);
    max_y = std::max(max_y, y);
  }
};

struct DrawnShape {
  int cls = 0;
  NormalizedBox2D box;
  CanonicalPolygon polygon;
  GridPoint2 center;
  std::string position;
};

std::string position_words(double cx, double cy, Extent e) {
  static const char* kVertical[] = {"upper", "middle", "lower"};
  static const char* kHorizontal[] = {"left", "center", "right"};
  const int v = std::clamp(static_cast<int>(3.0 * cy / e.height), 0, 2);
  const int h = std::clamp(static_cast<int>(3.0 * cx / e.width), 0, 2);
  if (v == 1 && h == 1) return "center";
  return std::string(kVertical[v]) + " " + kHorizontal[h];
}

// Draws one shape into its cell and returns the exact gold for it.
DrawnShape draw_shape(Canvas& canvas, SeededRng& rng, int cell_x, int cell_y, const Layout& l, int cls) {
  const Extent extent = canvas.image.extent;
  const int avail_w = l.cell_w - 2 * kMargin;
  const int avail_h = l.cell_h - 2 * kMargin;
  const int w = rng.between(avail_w / 2, avail_w);
  const int h = rng.between(avail_h / 2, avail_h);
  const int x0 = cell_x + kMargin + rng.between(0, avail_w - w);
  const int y0 = cell_y + kMargin + rng.between(0, avail_h - h);
  const double cx = x0 + w / 2.0;
  const double cy = y0 + h / 2.0;
  const auto& color = kPalette[static_cast<std::size_t>(cls) % kPalette.size()];
  const auto kind = static_cast<ShapeKind>(cls % 3);

  std::vector<PixelPoint> outline;
  switch (kind) {
    case ShapeKind::rectangle:
      outline = {{double(x0), double(y0)}, {double(x0 + w), double(y0)}, {double(x0 + w), double(y0 + h)},
                 {double(x0), double(y0 + h)}};
      break;
    case ShapeKind::ellipse:
      for (int k = 0; k < 48; ++k) {
        const double t = 2.0 * std::numbers::pi * k / 48;
        outline.push_back({cx + w / 2.0 * std::cos(t), cy + h / 2.0 * std::sin(t)});
      }
      break;
    case ShapeKind::polygon: {
      const int spikes = rng.between(4, 6);
      const double inner = 0.35 + 0.2 * rng.unit();
      const double phase = rng.unit() * std::numbers::pi;
      for (int k = 0; k < 2 * spikes; ++k) {
        const double t = phase + std::numbers::pi * k / spikes;
        const double r = (k % 2 == 0) ? 1.0 : inner;
        outline.push_back({cx + r * w / 2.0 * std::cos(t), cy + r * h / 2.0 * std::sin(t)});
      }
      break;
    }
  }

  canvas.begin_shape();
  for (int y = y0; y < y0 + h; ++y) {
    for (int x = x0; x < x0 + w; ++x) {
      const double px = x + 0.5;
      const double py = y + 0.5;
      bool fill = true;
      if (kind == ShapeKind::ellipse) {
        const double dx = (px - cx) / (w / 2.0);
        const double dy = (py - cy) / (h / 2.0);
        fill = dx * dx + dy * dy <= 1.0;
      } else if (kind == ShapeKind::polygon) {
        fill = inside_even_odd(outline, px, py);
      }
      if (fill) canvas.put(x, y, color);
    }
  }

  DrawnShape s;
  s.cls = cls;
  const GridPoint2 lo = normalize_point({double(canvas.min_x), double(canvas.min_y)}, extent);
  const GridPoint2 hi = normalize_point({double(canvas.max_x + 1), double(canvas.max_y + 1)}, extent);
  s.box = {cls, lo.x, lo.y, hi.x, hi.y};
  s.polygon = canonicalize_polygon({outline, extent});
  s.center = normalize_point({cx, cy}, extent);
  s.position = position_words(cx, cy, extent);
  return s;
}

std::string padded(std::size_t value, std::size_t width) {
  std::string digits = std::to_string(value);
  if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
  return digits;
}

}  // namespace

std::string RgbImage::to_ppm() const {
  std::string out = "P6\n" + std::to_string(extent.width) + " " + std::to_string(extent.height) + "\n255\n";
  out.append(pixels.begin(), pixels.end());
  return out;
}

SynthSpec synth_spec_from_json(const json& v) {
  static const std::set<std::string> kKeys = {"n_images", "shapes_per_image", "classes", "extent",
                                              "seed",     "dataset_id",       "modality"};
  if (!v.is_object()) throw Error(ErrorKind::validation, "synth spec: expected object");
  for (const auto& [key, _] : v.items()) {
    if (!kKeys.count(key)) throw Error(ErrorKind::validation, "synth spec: unknown key '" + key + "'");
  }
  SynthSpec spec;
  try {
    if (v.contains("n_images")) spec.n_images = v.at("n_images").get<std::size_t>();
    if (v.contains("shapes_per_image")) spec.shapes_per_image = v.at("shapes_per_image").get<std::size_t>();
    if (v.contains("classes")) spec.classes = v.at("classes").get<std::vector<std::string>>();
    if (v.contains("extent")) {
      const auto e = v.at("extent").get<std::vector<int>>();
      if (e.size() != 2) throw Error(ErrorKind::validation, "synth spec: extent must be [width, height]");
      spec.extent = {e[0], e[1]};
    }
    if (v.contains("seed")) spec.seed = v.at("seed").get<std::uint64_t>();
    if (v.contains("dataset_id")) spec.dataset_id = v.at("dataset_id").get<std::string>();
    if (v.contains("modality")) spec.modality = modality_from_string(v.at("modality").get<std::string>());
  } catch (const json::exception& e) {
    throw Error(ErrorKind::validation, std::string("synth spec: ") + e.what());
  }
  validate_spec(spec);
  return spec;
}

SynthSpec load_synth_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open synth spec " + path.string());
  try {
    return synth_spec_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::validation, std::string("synth spec: invalid JSON: ") + e.what());
  }
}

SyntheticDataset generate_synthetic_dataset(const SynthSpec& spec) {
  validate_spec(spec);
  const Layout layout = layout_for(spec);
  const std::size_t n = spec.n_images;
  const std::size_t id_width = std::max<std::size_t>(4, std::to_string(n).size());

  // Patient grouping is drawn up front from the master stream; each image then
  // gets its own stream so images can be drawn in parallel.
  std::vector<std::string> patient_of(n);
  {
    SeededRng rng(spec.seed);
    std::size_t i = 0;
    for (std::size_t p = 1; i < n; ++p) {
      const std::size_t count = static_cast<std::size_t>(rng.between(1, 4));
      for (std::size_t k = 0; k < count && i < n; ++k) patient_of[i++] = "P" + padded(p, id_width);
    }
  }

  SyntheticDataset out;
  out.manifest.dataset_id = spec.dataset_id;
  out.manifest.modality = spec.modality;
  out.manifest.classes = spec.classes;
  out.manifest.images.resize(n);
  out.images.resize(n);

  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    SeededRng rng(spec.seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(i + 1)));
    Canvas canvas;
    canvas.image.extent = spec.extent;
    canvas.image.pixels.resize(static_cast<std::size_t>(spec.extent.width) * spec.extent.height * 3);
    for (std::size_t p = 0; p < canvas.image.pixels.size(); p += 3)
      std::copy(kBackground.begin(), kBackground.end(), canvas.image.pixels.begin() + static_cast<std::ptrdiff_t>(p));

    std::vector<int> cells(static_cast<std::size_t>(layout.cols * layout.rows));
    for (std::size_t c = 0; c < cells.size(); ++c) cells[c] = static_cast<int>(c);
    rng.shuffle(cells);

    std::vector<DrawnShape> shapes;
    for (std::size_t s = 0; s < spec.shapes_per_image; ++s) {
      const int cell = cells[s];
      const int cls = static_cast<int>(rng.below(spec.classes.size()));
      shapes.push_back(draw_shape(canvas, rng, (cell % layout.cols) * layout.cell_w,
                                  (cell / layout.cols) * layout.cell_h, layout, cls));
    }

    ImageRecord& rec = out.manifest.images[static_cast<std::size_t>(i)];
    rec.image_id = "img" + padded(static_cast<std::size_t>(i) + 1, id_width);
    rec.patient_id = patient_of[static_cast<std::size_t>(i)];
    rec.extent = spec.extent;
    rec.path = "images/" + rec.image_id + ".ppm";

    LabelSet present;
    std::string report;
    for (const DrawnShape& s : shapes) {
      const std::string& name = spec.classes[static_cast<std::size_t>(s.cls)];
      present.insert(name);
      rec.annotations.push_back({TaskKind::grounding_box2d, BoxList{s.box}, name, {}, {}, {}});
      rec.annotations.push_back({TaskKind::segmentation_polygon, s.polygon, name, {}, {}, {}});
      rec.annotations.push_back({TaskKind::grounding_point, s.center, name, {}, {}, {}});
      report += (report.empty() ? "" : " ") + std::string("There is a ") + name + " in the " + s.position + ".";
    }
    const std::string& asked = spec.classes[rng.below(spec.classes.size())];
    rec.annotations.push_back({TaskKind::classification_binary, present.count(asked) > 0, asked, {}, {}, {}});
    rec.annotations.push_back({TaskKind::classification_multilabel, present, {}, {}, {}, {}});
    rec.annotations.push_back({TaskKind::report, FreeText{report}, {}, {}, {}, {}});

    out.images[static_cast<std::size_t>(i)] = std::move(canvas.image);
    rec.content_hash = sha256_hex(out.images[static_cast<std::size_t>(i)].to_ppm());
  }
  return out;
}

void write_synthetic_dataset(const SyntheticDataset& dataset, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "images");
  for (std::size_t i = 0; i < dataset.images.size(); ++i) {
    const auto path = dir / *dataset.manifest.images[i].path;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::io, "cannot write image " + path.string());
    out << dataset.images[i].to_ppm();
  }
  save_manifest(dataset.manifest, dir / "manifest.jsonl");
}

}  // namespace mvtk
