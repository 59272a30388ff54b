#include "mvtk/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <exception>
#include <map>
#include <set>

#include "mvtk/error.hpp"
#include "mvtk/raster.hpp"

namespace mvtk {

// ---- classification ----

double auc_roc(std::span<const ScoredBinary> samples) {
  std::vector<ScoredBinary> sorted(samples.begin(), samples.end());
  std::uint64_t pos = 0, neg = 0;
  for (const auto& s : sorted) {
    if (!std::isfinite(s.score)) throw Error(ErrorKind::invalid_argument, "AUC: non-finite score");
    if (s.label != 0 && s.label != 1) throw Error(ErrorKind::invalid_argument, "AUC: labels must be 0 or 1");
    (s.label == 1 ? pos : neg) += 1;
  }
  if (pos == 0 || neg == 0)
    throw Error(ErrorKind::undefined_metric, "AUC is undefined without both positive and negative samples");
  std::sort(sorted.begin(), sorted.end(),
            [](const ScoredBinary& a, const ScoredBinary& b) { return a.score < b.score; });

  // Walk score groups upward; a positive beats every negative in lower groups
  // and ties with the negatives of its own group.
  std::uint64_t concordant = 0, tied = 0, neg_below = 0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    std::uint64_t group_pos = 0, group_neg = 0;
    for (; j < sorted.size() && sorted[j].score == sorted[i].score; ++j) (sorted[j].label == 1 ? group_pos : group_neg) += 1;
    concordant += group_pos * neg_below;
    tied += group_pos * group_neg;
    neg_below += group_neg;
    i = j;
  }
  return static_cast<double>(2 * concordant + tied) / static_cast<double>(2 * pos * neg);
}

std::vector<std::optional<double>> auc_roc_per_class(std::span<const std::vector<ScoredBinary>> classes) {
  std::vector<std::optional<double>> out(classes.size());
  std::vector<std::exception_ptr> errors(classes.size());
  const auto n = static_cast<std::ptrdiff_t>(classes.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      out[i] = auc_roc(classes[i]);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::undefined_metric) errors[i] = std::current_exception();
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

Confusion& Confusion::operator+=(const Confusion& o) noexcept {
  tp += o.tp;
  fp += o.fp;
  fn += o.fn;
  tn += o.tn;
  return *this;
}

Confusion confusion(std::span<const bool> preds, std::span<const bool> golds) {
  if (preds.size() != golds.size())
    throw Error(ErrorKind::length_mismatch, "predictions and gold differ in length (" + std::to_string(preds.size()) +
                                                " vs " + std::to_string(golds.size()) + ")");
  Confusion c;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] && golds[i]) ++c.tp;
    else if (preds[i]) ++c.fp;
    else if (golds[i]) ++c.fn;
    else ++c.tn;
  }
  return c;
}

double f1(const Confusion& c) noexcept {
  const std::size_t denom = 2 * c.tp + c.fp + c.fn;
  return denom == 0 ? 0.0 : 2.0 * static_cast<double>(c.tp) / static_cast<double>(denom);
}

double f1(std::span<const bool> preds, std::span<const bool> golds) { return f1(confusion(preds, golds)); }

double accuracy(const Confusion& c) noexcept {
  return c.total() == 0 ? 0.0 : static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
}

double macro_f1(std::span<const int> preds, std::span<const int> golds) {
  if (preds.size() != golds.size())
    throw Error(ErrorKind::length_mismatch, "predictions and gold differ in length");
  std::set<int> labels(preds.begin(), preds.end());
  labels.insert(golds.begin(), golds.end());
  if (labels.empty()) throw Error(ErrorKind::invalid_argument, "macro F1 of an empty sample");
  double sum = 0.0;
  for (int label : labels) {
    Confusion c;
    for (std::size_t i = 0; i < preds.size(); ++i) {
      const bool p = preds[i] == label;
      const bool g = golds[i] == label;
      if (p && g) ++c.tp;
      else if (p) ++c.fp;
      else if (g) ++c.fn;
      else ++c.tn;
    }
    sum += f1(c);
  }
  return sum / static_cast<double>(labels.size());
}

// ---- grounding ----

namespace {

const char* region_name(const Region& r) {
  static const char* kNames[] = {"box2d", "box3d", "point", "polygon"};
  return kNames[r.index()];
}

PairScore from_iou(double iou) { return {iou, iou == 0.0 ? 0.0 : 2.0 * iou / (1.0 + iou)}; }

PairScore hit(bool h) { return h ? PairScore{1.0, 1.0} : PairScore{0.0, 0.0}; }

PairScore polygon_scores(const CanonicalPolygon& a, const CanonicalPolygon& b, int resolution, bool serial) {
  if (resolution < kMinRasterResolution)
    throw Error(ErrorKind::invalid_argument, "raster resolution must be at least 64");
  const OverlapCounts c = serial ? overlap_reference(rasterize_reference(a.points, resolution),
                                                     rasterize_reference(b.points, resolution))
                                 : overlap(rasterize(a.points, resolution), rasterize(b.points, resolution));
  if (c.a + c.b == 0) {
    const std::set<GridPoint2> sa(a.points.begin(), a.points.end());
    const std::set<GridPoint2> sb(b.points.begin(), b.points.end());
    return hit(sa == sb);
  }
  const auto inter = static_cast<double>(c.intersection);
  return {inter / static_cast<double>(c.a + c.b - c.intersection), 2.0 * inter / static_cast<double>(c.a + c.b)};
}

PairScore score(const GroundingPair& pair, const GroundingOptions& options, bool serial) {
  if (!pair.predicted) return {};
  const Region& pred = *pair.predicted;
  const Region& gold = pair.gold;

  if (const auto* g = std::get_if<NormalizedBox2D>(&gold)) {
    if (const auto* p = std::get_if<NormalizedBox2D>(&pred)) return from_iou(iou_box2d(*p, *g));
    if (const auto* p = std::get_if<GridPoint2>(&pred)) return hit(contains(*g, *p));
  } else if (const auto* g = std::get_if<Box3D>(&gold)) {
    if (const auto* p = std::get_if<Box3D>(&pred)) return from_iou(iou_box3d(*p, *g));
  } else if (const auto* g = std::get_if<GridPoint2>(&gold)) {
    if (const auto* p = std::get_if<GridPoint2>(&pred))
      return hit(std::abs(p->x - g->x) <= options.point_radius && std::abs(p->y - g->y) <= options.point_radius);
  } else if (const auto* g = std::get_if<CanonicalPolygon>(&gold)) {
    if (const auto* p = std::get_if<CanonicalPolygon>(&pred))
      return polygon_scores(*p, *g, options.raster_resolution, serial);
  }
  throw Error(ErrorKind::kind_mismatch, "pair " + pair.query_id + ": cannot score a predicted " + region_name(pred) +
                                            " against a gold " + region_name(gold));
}

}  // namespace

PairScore score_pair(const GroundingPair& pair, const GroundingOptions& options) {
  return score(pair, options, false);
}

std::vector<PairScore> pair_scores_reference(std::span<const GroundingPair> pairs, const GroundingOptions& options) {
  std::vector<PairScore> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(score(p, options, true));
  return out;
}

std::vector<PairScore> pair_scores(std::span<const GroundingPair> pairs, const GroundingOptions& options) {
  std::vector<PairScore> out(pairs.size());
  std::vector<std::exception_ptr> errors(pairs.size());
  const auto n = static_cast<std::ptrdiff_t>(pairs.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      out[i] = score(pairs[i], options, false);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

double acc_at_iou(std::span<const PairScore> scores, double threshold) {
  if (scores.empty()) throw Error(ErrorKind::invalid_argument, "Acc@IoU of an empty sample");
  const auto hits = std::count_if(scores.begin(), scores.end(), [&](const PairScore& s) { return s.iou >= threshold; });
  return static_cast<double>(hits) / static_cast<double>(scores.size());
}

double acc_at_iou(std::span<const GroundingPair> pairs, double threshold, const GroundingOptions& options) {
  return acc_at_iou(pair_scores(pairs, options), threshold);
}

double mean_iou(std::span<const PairScore> scores) {
  if (scores.empty()) throw Error(ErrorKind::invalid_argument, "mean IoU of an empty sample");
  double sum = 0.0;
  for (const auto& s : scores) sum += s.iou;
  return sum / static_cast<double>(scores.size());
}

double mean_iou(std::span<const GroundingPair> pairs, const GroundingOptions& options) {
  return mean_iou(pair_scores(pairs, options));
}

double mean_dice(std::span<const PairScore> scores) {
  if (scores.empty()) throw Error(ErrorKind::invalid_argument, "mean Dice of an empty sample");
  double sum = 0.0;
  for (const auto& s : scores) sum += s.dice;
  return sum / static_cast<double>(scores.size());
}

// ---- text ----

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) out.push_back(std::move(current));
    current.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      flush();
    } else if (std::ispunct(c)) {
      flush();
      out.emplace_back(1, ch);
    } else {
      current += static_cast<char>(std::tolower(c));
    }
  }
  flush();
  return out;
}

namespace {

std::map<std::vector<std::string>, std::size_t> ngram_counts(std::span<const std::string> tokens, std::size_t n) {
  std::map<std::vector<std::string>, std::size_t> counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) ++counts[{tokens.begin() + i, tokens.begin() + i + n}];
  return counts;
}

}  // namespace

BleuScores bleu_n(std::span<const std::string> candidate, std::span<const std::string> reference, int max_n) {
  if (max_n < 1) throw Error(ErrorKind::invalid_argument, "BLEU order must be at least 1");
  BleuScores out;
  out.cumulative.assign(static_cast<std::size_t>(max_n), 0.0);
  if (candidate.empty()) {
    out.empty_candidate = true;
    return out;
  }
  const double c = static_cast<double>(candidate.size());
  const double r = static_cast<double>(reference.size());
  const double bp = c < r ? std::exp(1.0 - r / c) : 1.0;

  double log_sum = 0.0;
  int orders = 0;
  bool zero = false;
  for (int n = 1; n <= max_n; ++n) {
    const auto nn = static_cast<std::size_t>(n);
    const std::size_t cand_total = candidate.size() >= nn ? candidate.size() - nn + 1 : 0;
    const std::size_t ref_total = reference.size() >= nn ? reference.size() - nn + 1 : 0;
    if (cand_total > 0 || ref_total > 0) {
      std::size_t matched = 0;
      if (cand_total > 0) {
        const auto ref_counts = ngram_counts(reference, nn);
        for (const auto& [gram, count] : ngram_counts(candidate, nn)) {
          auto it = ref_counts.find(gram);
          if (it != ref_counts.end()) matched += std::min(count, it->second);
        }
      }
      if (matched == 0) {
        zero = true;
      } else {
        log_sum += std::log(static_cast<double>(matched) / static_cast<double>(cand_total));
      }
      ++orders;
    }
    out.cumulative[nn - 1] = zero ? 0.0 : bp * std::exp(log_sum / orders);
  }
  return out;
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l(std::span<const std::string> candidate, std::span<const std::string> reference) {
  if (candidate.empty() || reference.empty()) return 0.0;
  // 2PR / (P + R) reduces to 2 LCS / (|cand| + |ref|), which avoids rounding in P and R.
  const auto lcs = static_cast<double>(lcs_length(candidate, reference));
  return 2.0 * lcs / static_cast<double>(candidate.size() + reference.size());
}

}  // namespace mvtk
