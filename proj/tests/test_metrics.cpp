#include <algorithm>
#include <array>
#include <cmath>

#include "doctest.h"
#include "mvtk/error.hpp"
#include "mvtk/metrics.hpp"
#include "support.hpp"

using namespace mvtk;

namespace {

std::vector<ScoredBinary> scored(std::vector<int> labels, std::vector<double> scores) {
  std::vector<ScoredBinary> out;
  for (std::size_t i = 0; i < labels.size(); ++i) out.push_back({scores[i], labels[i]});
  return out;
}

std::vector<ScoredBinary> random_instance(SeededRng& rng) {
  std::vector<ScoredBinary> s;
  const int n = rng.between(2, 50);
  for (int i = 0; i < n; ++i) s.push_back({rng.between(0, 9) / 10.0, rng.coin() ? 1 : 0});
  s[0].label = 0;
  s[1].label = 1;
  return s;
}

std::vector<std::string> toks(std::string_view s) { return tokenize(s); }

}  // namespace

TEST_CASE("auc fixtures") {
  CHECK(auc_roc(scored({0, 0, 1, 1}, {0.1, 0.4, 0.35, 0.8})) == 0.75);
  CHECK(auc_roc(scored({0, 0, 1, 1}, {0.1, 0.2, 0.3, 0.4})) == 1.0);
  CHECK(auc_roc(scored({0, 1, 0, 1}, {0.5, 0.5, 0.5, 0.5})) == 0.5);
  CHECK(auc_roc(scored({1, 1, 0, 0}, {0.1, 0.2, 0.3, 0.4})) == 0.0);
}

TEST_CASE("auc errors") {
  auto kind = [](std::vector<ScoredBinary> s) {
    try {
      auc_roc(s);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::io;
  };
  CHECK(kind(scored({1, 1}, {0.1, 0.2})) == ErrorKind::undefined_metric);
  CHECK(kind({}) == ErrorKind::undefined_metric);
  CHECK(kind(scored({0, 2}, {0.1, 0.2})) == ErrorKind::invalid_argument);
  CHECK(kind(scored({0, 1}, {0.1, NAN})) == ErrorKind::invalid_argument);
}

TEST_CASE("auc equals the pair-enumeration oracle exactly") {
  SeededRng rng(11);
  for (int i = 0; i < 500; ++i) {
    const auto s = random_instance(rng);
    REQUIRE(auc_roc(s) == oracle::auc_pairs(s));
  }
}

TEST_CASE("auc is invariant under strictly monotone transforms") {
  SeededRng rng(12);
  for (int i = 0; i < 200; ++i) {
    auto s = random_instance(rng);
    const double base = auc_roc(s);
    for (auto& x : s) x.score = std::exp(3.0 * x.score) - 7.0;
    REQUIRE(auc_roc(s) == base);
  }
}

TEST_CASE("auc per class") {
  const std::vector<std::vector<ScoredBinary>> classes = {scored({0, 0, 1, 1}, {0.1, 0.4, 0.35, 0.8}),
                                                          scored({1, 1}, {0.1, 0.2})};
  const auto r = auc_roc_per_class(classes);
  CHECK(r[0] == 0.75);
  CHECK_FALSE(r[1].has_value());
}

TEST_CASE("f1") {
  CHECK(f1(Confusion{2, 1, 1, 0}) == doctest::Approx(2.0 / 3.0));
  const std::array<bool, 4> g = {true, false, true, true};
  const std::array<bool, 4> none = {false, false, false, false};
  CHECK(f1(g, g) == 1.0);
  CHECK(f1(none, g) == 0.0);
  CHECK(f1(none, none) == 0.0);
  CHECK(accuracy(confusion(none, g)) == 0.25);
  const std::array<bool, 1> one = {true};
  CHECK_THROWS_AS(confusion(one, g), Error);
}

TEST_CASE("macro f1") {
  const std::vector<int> golds = {0, 0, 1, 1, 2, 2};
  CHECK(macro_f1(golds, golds) == 1.0);
  const std::vector<int> preds = {0, 1, 1, 1, 2, 0};
  // class 0: tp1 fp1 fn1 -> 1/2; class 1: tp2 fp1 fn0 -> 4/5; class 2: tp1 fp0 fn1 -> 2/3
  CHECK(macro_f1(preds, golds) == doctest::Approx((0.5 + 0.8 + 2.0 / 3.0) / 3.0));
}

TEST_CASE("macro f1 is invariant under relabeling") {
  SeededRng rng(13);
  for (int i = 0; i < 200; ++i) {
    const int n = rng.between(1, 40), k = rng.between(2, 6);
    std::vector<int> p, g;
    for (int j = 0; j < n; ++j) {
      p.push_back(rng.between(0, k - 1));
      g.push_back(rng.between(0, k - 1));
    }
    std::vector<int> perm(k);
    for (int j = 0; j < k; ++j) perm[j] = j;
    rng.shuffle(perm);
    std::vector<int> p2, g2;
    for (int v : p) p2.push_back(perm[v] * 10 + 3);
    for (int v : g) g2.push_back(perm[v] * 10 + 3);
    REQUIRE(macro_f1(p2, g2) == doctest::Approx(macro_f1(p, g)).epsilon(1e-12));
  }
}

TEST_CASE("acc@iou and mean iou") {
  const std::vector<PairScore> s = {{0.6, 0.75}, {0.3, 0.46}};
  CHECK(acc_at_iou(s) == 0.5);
  CHECK(mean_iou(s) == doctest::Approx(0.45));
  CHECK_THROWS_AS(acc_at_iou(std::vector<PairScore>{}), Error);

  const NormalizedBox2D g{0, 0, 0, 100, 100};
  std::vector<GroundingPair> same = {{"a", g, g}, {"b", g, g}};
  CHECK(acc_at_iou(same) == 1.0);
  CHECK(mean_iou(same) == 1.0);
  std::vector<GroundingPair> missing = {{"a", std::nullopt, g}, {"b", std::nullopt, g}};
  CHECK(acc_at_iou(missing) == 0.0);
  CHECK(mean_iou(missing) == 0.0);
}

TEST_CASE("acc@iou is non-increasing in the threshold") {
  SeededRng rng(14);
  std::vector<GroundingPair> pairs;
  for (int i = 0; i < 300; ++i) pairs.push_back({"q", gen::box(rng), gen::box(rng)});
  double prev = 1.0;
  for (double t = 0.0; t <= 1.0; t += 0.05) {
    const double a = acc_at_iou(pairs, t);
    CHECK(a <= prev);
    prev = a;
  }
}

TEST_CASE("score_pair") {
  const NormalizedBox2D a{0, 0, 0, 10, 10}, b{0, 5, 5, 15, 15};
  const auto s = score_pair({"q", a, b});
  CHECK(s.iou == doctest::Approx(25.0 / 175.0));
  CHECK(s.dice == doctest::Approx(50.0 / 200.0));
  CHECK(score_pair({"q", GridPoint2{5, 5}, a}).iou == 1.0);
  CHECK(score_pair({"q", GridPoint2{11, 5}, a}).iou == 0.0);
  CHECK(score_pair({"q", GridPoint2{11, 5}, GridPoint2{10, 6}}).iou == 0.0);
  CHECK(score_pair({"q", GridPoint2{11, 5}, GridPoint2{10, 6}}, {1, 1000}).iou == 1.0);
  try {
    score_pair({"q", Box3D{}, a});
    FAIL("expected kind_mismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kind_mismatch);
  }
}

TEST_CASE("parallel pair scores equal the serial reference") {
  SeededRng rng(15);
  std::vector<GroundingPair> pairs;
  for (int i = 0; i < 40; ++i) {
    pairs.push_back({"b", gen::box(rng), gen::box(rng)});
    pairs.push_back({"c", gen::box3d(rng), gen::box3d(rng)});
    pairs.push_back({"p", canonicalize_polygon(gen::star_polygon(rng, gen::extent(rng))),
                     canonicalize_polygon(gen::star_polygon(rng, gen::extent(rng)))});
    pairs.push_back({"m", std::nullopt, gen::point(rng)});
  }
  const GroundingOptions opts{0, 200};
  const auto a = pair_scores(pairs, opts), b = pair_scores_reference(pairs, opts);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].iou == b[i].iou);
    CHECK(a[i].dice == b[i].dice);
  }
}

TEST_CASE("tokenize") {
  CHECK(toks("The heart, is ENLARGED.") == std::vector<std::string>{"the", "heart", ",", "is", "enlarged", "."});
  CHECK(toks("  ").empty());
  CHECK(toks("a-b") == std::vector<std::string>{"a", "-", "b"});
}

TEST_CASE("bleu fixtures") {
  const auto id = bleu_n(toks("the heart is normal in size"), toks("the heart is normal in size"));
  for (double v : id.cumulative) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));

  const auto short_cand = bleu_n(toks("the cat"), toks("the cat sat"));
  CHECK(short_cand.cumulative[0] == doctest::Approx(std::exp(1.0 - 3.0 / 2.0)).epsilon(1e-12));
  CHECK(std::abs(short_cand.cumulative[0] - 0.6065) <= 1e-4);

  const auto none = bleu_n(toks("dog barks"), toks("the cat sat"));
  for (double v : none.cumulative) CHECK(v == 0.0);

  const auto empty = bleu_n({}, toks("the cat"));
  CHECK(empty.empty_candidate);
  for (double v : empty.cumulative) CHECK(v == 0.0);

  // Hand count: cand "the the cat", ref "the cat": p1 = 2/3 (clipped), p2 = 1/2.
  const auto clipped = bleu_n(toks("the the cat"), toks("the cat"), 2);
  CHECK(clipped.cumulative[0] == doctest::Approx(2.0 / 3.0));
  CHECK(clipped.cumulative[1] == doctest::Approx(std::sqrt(2.0 / 3.0 * 0.5)));
}

TEST_CASE("rouge-l fixtures") {
  CHECK(rouge_l(toks("the cat sat"), toks("the cat sat")) == 1.0);
  CHECK(rouge_l(toks("the cat sat"), toks("the cat on the mat")) == 0.5);
  CHECK(rouge_l(toks("dog"), toks("cat")) == 0.0);
  CHECK(rouge_l({}, toks("cat")) == 0.0);
}

TEST_CASE("lcs and text metric bounds on random sentences") {
  SeededRng rng(16);
  for (int i = 0; i < 400; ++i) {
    const auto a = toks(gen::sentence(rng)), b = toks(gen::sentence(rng));
    REQUIRE(lcs_length(a, b) == oracle::lcs(a, b));
    const double r = rouge_l(a, b);
    REQUIRE(r >= 0.0);
    REQUIRE(r <= 1.0);
    REQUIRE(r == rouge_l(b, a));
    for (double v : bleu_n(a, b).cumulative) {
      REQUIRE(v >= 0.0);
      REQUIRE(v <= 1.0 + 1e-12);
    }
    REQUIRE(rouge_l(a, a) == 1.0);
    for (double v : bleu_n(a, a).cumulative) REQUIRE(v == doctest::Approx(1.0).epsilon(1e-12));
  }
}
