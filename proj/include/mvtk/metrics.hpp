#pragma once

// Scalar metrics: ROC-AUC, F1, grounding accuracy and IoU, Dice, BLEU and
// ROUGE-L.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mvtk/geometry.hpp"

namespace mvtk {

// ---- classification ----

struct ScoredBinary {
  double score = 0.0;
  int label = 0;  // 0 or 1
};

// Mann-Whitney statistic with half credit for tied pairs.
// Throws Error(undefined_metric) unless both classes are present.
double auc_roc(std::span<const ScoredBinary> samples);

// One AUC per class; nullopt where the class has a single label value.
std::vector<std::optional<double>> auc_roc_per_class(std::span<const std::vector<ScoredBinary>> classes);

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const noexcept { return tp + fp + fn + tn; }
  Confusion& operator+=(const Confusion& o) noexcept;
};

Confusion confusion(std::span<const bool> preds, std::span<const bool> golds);

// 2TP / (2TP + FP + FN), 0 when the denominator is 0.
double f1(const Confusion& c) noexcept;
double f1(std::span<const bool> preds, std::span<const bool> golds);
double accuracy(const Confusion& c) noexcept;

// Unweighted mean of per-class F1, one-vs-rest over every label that occurs
// in either list.
double macro_f1(std::span<const int> preds, std::span<const int> golds);

// ---- grounding ----

using Region = std::variant<NormalizedBox2D, Box3D, GridPoint2, CanonicalPolygon>;

struct GroundingPair {
  std::string query_id;
  std::optional<Region> predicted;  // absent counts as a miss
  Region gold;
};

struct GroundingOptions {
  // A predicted point hits a gold point when both axes differ by at most this.
  int point_radius = 0;
  int raster_resolution = kGridMax;
};

// Overlap of one pair. Boxes and polygons give IoU and Dice; a point scored
// against a box or a point gives 1 on a hit and 0 otherwise in both fields.
struct PairScore {
  double iou = 0.0;
  double dice = 0.0;
};

// Throws Error(kind_mismatch) for pairs of incompatible kinds.
PairScore score_pair(const GroundingPair& pair, const GroundingOptions& options = {});

std::vector<PairScore> pair_scores_reference(std::span<const GroundingPair> pairs,
                                             const GroundingOptions& options = {});
std::vector<PairScore> pair_scores(std::span<const GroundingPair> pairs, const GroundingOptions& options = {});

// Fraction of scores with iou >= threshold. Throws on empty input.
double acc_at_iou(std::span<const PairScore> scores, double threshold = 0.5);
double acc_at_iou(std::span<const GroundingPair> pairs, double threshold = 0.5, const GroundingOptions& options = {});

double mean_iou(std::span<const PairScore> scores);
double mean_iou(std::span<const GroundingPair> pairs, const GroundingOptions& options = {});
double mean_dice(std::span<const PairScore> scores);

// ---- text ----

// Lowercase; every ASCII punctuation character becomes its own token; the rest
// is split on whitespace.
std::vector<std::string> tokenize(std::string_view text);

struct BleuScores {
  std::vector<double> cumulative;  // cumulative[k] is BLEU-(k+1)
  bool empty_candidate = false;
};

// Clipped n-gram precision, geometric mean over orders 1..n, brevity penalty
// exp(1 - r/c) when c < r. Orders for which neither side has an n-gram are
// left out of the mean. An empty candidate scores 0 and sets empty_candidate.
BleuScores bleu_n(std::span<const std::string> candidate, std::span<const std::string> reference, int max_n = 4);

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

// LCS F-measure: 2PR / (P + R) with P = LCS/|cand|, R = LCS/|ref|.
double rouge_l(std::span<const std::string> candidate, std::span<const std::string> reference);

}  // namespace mvtk
