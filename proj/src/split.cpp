#include <algorithm>
#include <set>

#include "mvtk/compiler.hpp"
#include "mvtk/error.hpp"
#include "mvtk/random.hpp"

namespace mvtk {

using nlohmann::json;

std::array<std::size_t, 3> split_counts(std::size_t n, SplitRatios ratios) {
  const std::array<long, 3> r = {ratios.train, ratios.val, ratios.test};
  if (r[0] <= 0 || r[1] <= 0 || r[2] <= 0) throw Error(ErrorKind::invalid_argument, "split ratios must be positive");
  const long total = r[0] + r[1] + r[2];
  std::array<std::size_t, 3> counts{};
  std::array<long, 3> remainder{};
  std::size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    const long scaled = static_cast<long>(n) * r[i];
    counts[i] = static_cast<std::size_t>(scaled / total);
    remainder[i] = scaled % total;
    assigned += counts[i];
  }
  std::array<int, 3> order = {0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++counts[order[k % 3]];
  return counts;
}

Split SplitAssignment::of(const ImageRecord& image) const {
  if (official) {
    auto it = by_image.find(image.image_id);
    if (it == by_image.end()) throw Error(ErrorKind::validation, "image '" + image.image_id + "' has no split");
    return it->second;
  }
  auto it = by_patient.find(image.patient_id);
  if (it == by_patient.end()) throw Error(ErrorKind::validation, "patient '" + image.patient_id + "' has no split");
  return it->second;
}

SplitAssignment split_patients(const DatasetManifest& manifest, SplitRatios ratios, std::uint64_t seed) {
  SplitAssignment out;
  out.seed = seed;
  out.ratios = ratios;
  if (manifest.has_official_split()) {
    out.official = true;
    for (const ImageRecord& img : manifest.images) out.by_image[img.image_id] = *img.official_split;
    return out;
  }

  // Sorted first so the assignment does not depend on manifest order.
  std::set<std::string> unique;
  for (const ImageRecord& img : manifest.images) unique.insert(img.patient_id);
  if (unique.empty()) throw Error(ErrorKind::invalid_argument, "manifest has no patients");
  std::vector<std::string> patients(unique.begin(), unique.end());

  const auto counts = split_counts(patients.size(), ratios);
  SeededRng rng(seed);
  rng.shuffle(patients);
  std::size_t k = 0;
  for (std::size_t i = 0; i < counts[0]; ++i) out.by_patient[patients[k++]] = Split::train;
  for (std::size_t i = 0; i < counts[1]; ++i) out.by_patient[patients[k++]] = Split::val;
  for (std::size_t i = 0; i < counts[2]; ++i) out.by_patient[patients[k++]] = Split::test;
  return out;
}

json split_to_json(const SplitAssignment& split) {
  json out = {{"seed", split.seed},
              {"ratios", {split.ratios.train, split.ratios.val, split.ratios.test}},
              {"official", split.official}};
  json assignment = json::object();
  for (const auto& [id, s] : split.official ? split.by_image : split.by_patient)
    assignment[id] = std::string(to_string(s));
  out[split.official ? "by_image" : "by_patient"] = std::move(assignment);
  return out;
}

LeakageReport check_leakage(std::span<const DatasetManifest> train, std::span<const DatasetManifest> eval) {
  // hash -> (dataset id -> image ids) for the train pool
  std::map<std::string, std::map<std::string, std::vector<std::string>>> pool;
  for (const DatasetManifest& m : train) {
    for (const ImageRecord& img : m.images) pool[img.content_hash][m.dataset_id].push_back(img.image_id);
  }

  LeakageReport report;
  for (const DatasetManifest& m : eval) {
    std::map<std::string, std::vector<std::string>> eval_hits;
    for (const ImageRecord& img : m.images) {
      if (pool.count(img.content_hash)) eval_hits[img.content_hash].push_back(img.image_id);
    }
    for (const auto& [hash, eval_ids] : eval_hits) {
      for (const auto& [train_id, train_ids] : pool.at(hash)) {
        LeakageEntry e{hash, train_id, m.dataset_id, {}};
        for (const auto& id : train_ids) e.image_ids.push_back(train_id + "/" + id);
        for (const auto& id : eval_ids) e.image_ids.push_back(m.dataset_id + "/" + id);
        report.entries.push_back(std::move(e));
      }
    }
  }
  std::sort(report.entries.begin(), report.entries.end(), [](const LeakageEntry& a, const LeakageEntry& b) {
    return std::tie(a.content_hash, a.train_dataset_id, a.eval_dataset_id) <
           std::tie(b.content_hash, b.train_dataset_id, b.eval_dataset_id);
  });
  return report;
}

json leakage_to_json(const LeakageReport& report) {
  json entries = json::array();
  for (const LeakageEntry& e : report.entries) {
    entries.push_back({{"content_hash", e.content_hash},
                       {"train_dataset_id", e.train_dataset_id},
                       {"eval_dataset_id", e.eval_dataset_id},
                       {"image_ids", e.image_ids}});
  }
  return {{"leaks", report.entries.size()}, {"entries", std::move(entries)}};
}

}  // namespace mvtk
