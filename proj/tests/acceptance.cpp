// One PASS/FAIL line per acceptance criterion. Exit status is 0 when every
// failing line is listed in kKnownFailures and every listed line still fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mvtk/compiler.hpp"
#include "mvtk/error.hpp"
#include "mvtk/evaluation.hpp"
#include "mvtk/reader_study.hpp"
#include "mvtk/synth.hpp"
#include "support.hpp"

using namespace mvtk;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Line {
  std::string name;
  Outcome outcome;
  double seconds = 0.0;
  double limit = 0.0;  // 0 = no runtime limit
};

// Sub-checks that fail today; see README "Known limitations".
const std::set<std::string> kKnownFailures = {"polygon canonicalization: idempotence within 1 grid unit"};

std::vector<Line> g_lines;

void report(const std::string& name, const Outcome& o, double seconds = 0.0, double limit = 0.0) {
  Line l{name, o, seconds, limit};
  if (limit > 0 && seconds >= limit) {
    l.outcome.pass = false;
    l.outcome.detail += "; runtime over limit";
  }
  g_lines.push_back(l);
  char timing[64] = "";
  if (limit > 0) std::snprintf(timing, sizeof timing, "  [%.2f s, limit %.0f s]", seconds, limit);
  std::printf("%s  %s: %s%s\n", l.outcome.pass ? "PASS" : "FAIL", name.c_str(), l.outcome.detail.c_str(), timing);
  std::fflush(stdout);
}

template <typename Fn>
Outcome timed(Fn&& fn, double& seconds) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = fn();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return o;
}

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---- criteria ----

Outcome codec_round_trip() {
  SeededRng rng(2024);
  const CodecOptions opts{BoxEncoding::absolute, gen::vocabulary()};
  std::size_t mismatches = 0;
  const std::size_t n = 10000;
  for (std::size_t i = 0; i < n; ++i) {
    const TaskKind kind = kAllTaskKinds[i % kAllTaskKinds.size()];
    const Answer a = gen::answer(rng, kind);
    try {
      if (parse(kind, render(kind, a, opts).text, ParseMode::strict, opts).value != a) ++mismatches;
    } catch (const Error&) {
      ++mismatches;
    }
  }
  return {mismatches == 0, fmt("%zu answers over 8 task kinds, %zu mismatches", n, mismatches)};
}

Outcome geometry_oracle() {
  SeededRng rng(77);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto a = gen::box(rng, 300), b = gen::box(rng, 300);
    worst = std::max(worst, std::abs(iou_box2d(a, b) - oracle::box_iou_cells(a, b)));
  }
  const Box3D p{{0, 0, 0}, {2, 2, 2}}, q{{1, 0, 0}, {2, 2, 2}};
  const double v = iou_box3d(p, q);
  const bool ok = worst <= 1e-9 && v == 1.0 / 3.0 && oracle::box3d_iou_voxels(p, q) == 1.0 / 3.0;
  return {ok, fmt("1000 box pairs, max |closed form - cell count| = %.3g (tol 1e-9); 3D case = %.17g", worst, v)};
}

struct PolygonStats {
  std::size_t n = 0, bad_count = 0, bad_spacing = 0, bad_orientation = 0, bad_idempotence = 0;
  double worst_spacing = 0.0;  // as a fraction of the perimeter
  int worst_drift = 0;
  bool control_detected = true;  // a mis-spaced sampler must be flagged
};

// Boundary arc position closest to `expected` whose point rounds to the grid
// point q, i.e. lies in the unit cell around q. Slab-clips every edge against
// that cell; falls back to `expected` plus a full window when nothing rounds to q.
double rounding_arc_position(const oracle::Ring& ring, GridPoint2 q, double expected, double half_window) {
  const double per = ring.perimeter();
  double best = expected + 2 * half_window, best_dist = INFINITY;
  for (std::size_t i = 0; i < ring.pts.size(); ++i) {
    const auto a = ring.pts[i], b = ring.pts[(i + 1) % ring.pts.size()];
    const double len = ring.cum[i + 1] - ring.cum[i];
    if (len == 0) continue;
    double t0 = 0.0, t1 = 1.0;
    bool hit = true;
    for (int axis = 0; axis < 2 && hit; ++axis) {
      const double p0 = axis ? a.y : a.x, d = axis ? b.y - a.y : b.x - a.x, c = axis ? q.y : q.x;
      const double lo = c - 0.5, hi = c + 0.5;
      if (d == 0) {
        hit = p0 >= lo && p0 <= hi;
      } else {
        double u0 = (lo - p0) / d, u1 = (hi - p0) / d;
        if (u0 > u1) std::swap(u0, u1);
        t0 = std::max(t0, u0);
        t1 = std::min(t1, u1);
        hit = t0 <= t1;
      }
    }
    if (!hit) continue;
    // Candidate arc interval, shifted by whole perimeters to sit near `expected`.
    for (int wrap = -1; wrap <= 1; ++wrap) {
      const double s0 = ring.cum[i] + t0 * len + wrap * per, s1 = ring.cum[i] + t1 * len + wrap * per;
      const double s = std::clamp(expected, s0, s1);
      if (std::abs(s - expected) <= half_window && std::abs(s - expected) < best_dist) {
        best_dist = std::abs(s - expected);
        best = s;
      }
    }
  }
  return best;
}

PolygonStats polygon_stats() {
  SeededRng rng(500);
  PolygonStats st;
  for (int i = 0; i < 500; ++i) {
    const auto raw = gen::star_polygon(rng, gen::extent(rng));
    const auto c = canonicalize_polygon(raw);
    ++st.n;
    if (c.points.size() != kPolygonPoints) ++st.bad_count;
    if (signed_area(c.points) > 0.0) ++st.bad_orientation;

    std::vector<oracle::Vec> pts;
    for (const auto& p : raw.points) pts.push_back({p.x * 1000.0 / raw.extent.width, p.y * 1000.0 / raw.extent.height});
    if (oracle::screen_signed_area(pts) > 0) std::reverse(pts.begin(), pts.end());
    const auto ring = oracle::make_ring(pts);
    const double per = ring.perimeter(), step = per / kPolygonPoints;
    const double s0 = oracle::arc_nearest_origin(ring);
    std::vector<double> s;
    for (std::size_t k = 0; k < kPolygonPoints; ++k)
      s.push_back(rounding_arc_position(ring, c.points[k], s0 + k * step, step / 2));
    double worst = 0.0;
    for (std::size_t k = 0; k < kPolygonPoints; ++k) {
      const double gap = k + 1 < kPolygonPoints ? s[k + 1] - s[k] : s[0] + per - s[k];
      worst = std::max(worst, std::abs(gap - step) / per);
    }
    st.worst_spacing = std::max(st.worst_spacing, worst);
    if (worst > 0.005) ++st.bad_spacing;

    // Negative control: every other point pushed 2% of the perimeter along the boundary.
    std::vector<double> bent;
    for (std::size_t k = 0; k < kPolygonPoints; ++k) {
      const auto q = oracle::ring_point(ring, s0 + k * step + (k % 2) * 0.02 * per);
      const GridPoint2 g{int(std::lround(q.x)), int(std::lround(q.y))};
      bent.push_back(rounding_arc_position(ring, g, s0 + k * step, step / 2));
    }
    double bent_worst = 0.0;
    for (std::size_t k = 0; k < kPolygonPoints; ++k) {
      const double gap = k + 1 < kPolygonPoints ? bent[k + 1] - bent[k] : bent[0] + per - bent[k];
      bent_worst = std::max(bent_worst, std::abs(gap - step) / per);
    }
    if (bent_worst <= 0.005) st.control_detected = false;

    RawPolygon again{{}, {kGridMax, kGridMax}};
    for (const auto& p : c.points) again.points.push_back({double(p.x), double(p.y)});
    const auto c2 = canonicalize_polygon(again);
    int drift = 0;
    for (std::size_t k = 0; k < kPolygonPoints; ++k)
      drift = std::max({drift, std::abs(c2.points[k].x - c.points[k].x), std::abs(c2.points[k].y - c.points[k].y)});
    st.worst_drift = std::max(st.worst_drift, drift);
    if (drift > 1) ++st.bad_idempotence;
  }
  return st;
}

Outcome auc_oracle() {
  SeededRng rng(200);
  std::size_t mismatches = 0;
  for (int i = 0; i < 200; ++i) {
    std::vector<ScoredBinary> s;
    const int n = rng.between(2, 50);
    for (int j = 0; j < n; ++j) s.push_back({rng.between(0, 7) / 8.0, rng.coin() ? 1 : 0});
    s[0].label = 0;
    s[1].label = 1;
    if (auc_roc(s) != oracle::auc_pairs(s)) ++mismatches;
  }
  const std::vector<ScoredBinary> fixture = {{0.1, 0}, {0.4, 0}, {0.35, 1}, {0.8, 1}};
  const double v = auc_roc(fixture);
  return {mismatches == 0 && v == 0.75,
          fmt("200 tied instances, %zu differ from pair enumeration; fixture = %.17g", mismatches, v)};
}

Outcome text_fixtures() {
  const auto same = tokenize("no acute cardiopulmonary process .");
  const auto bi = bleu_n(same, same);
  bool identity = rouge_l(same, same) == 1.0;
  for (double v : bi.cumulative) identity = identity && std::abs(v - 1.0) <= 1e-12;
  const double b1 = bleu_n(tokenize("the cat"), tokenize("the cat sat"), 1).cumulative[0];
  const double r = rouge_l(tokenize("the cat sat"), tokenize("the cat on the mat"));
  return {identity && std::abs(b1 - 0.6065) <= 1e-4 && r == 0.5,
          fmt("identity %s; BLEU-1 = %.6f (0.6065 +- 1e-4); ROUGE-L = %.17g", identity ? "1.0" : "not 1.0", b1, r)};
}

DatasetManifest ten_patients(const std::string& id) {
  DatasetManifest m;
  m.dataset_id = id;
  for (int p = 0; p < 10; ++p) {
    for (int k = 0; k <= p % 3; ++k) {
      const std::string image = "p" + std::to_string(p) + "_" + std::to_string(k);
      ImageRecord img{image, "p" + std::to_string(p), id + ":" + image, {64, 64}, {}, {}, {}, {}};
      img.annotations.push_back({TaskKind::classification_binary, k % 2 == 0, "lesion", {}, {}, {}});
      m.images.push_back(img);
    }
  }
  return m;
}

Outcome split_leakage() {
  const auto m = ten_patients("train_ds");
  const auto a = split_patients(m, {}, 7), b = split_patients(m, {}, 7);
  std::map<Split, int> counts;
  for (const auto& [p, s] : a.by_patient) ++counts[s];
  const bool exact = counts[Split::train] == 7 && counts[Split::val] == 1 && counts[Split::test] == 2;
  const bool same = split_to_json(a) == split_to_json(b);

  const auto triplets = compile_triplets(m, default_templates(), a).triplets;
  std::map<std::string, std::set<Split>> patient_splits;
  for (const auto& t : triplets) {
    const auto image_id = t.sample_id.substr(t.sample_id.find('/') + 1, t.sample_id.find('#') - t.sample_id.find('/') - 1);
    const auto& img = *std::find_if(m.images.begin(), m.images.end(), [&](const auto& i) { return i.image_id == image_id; });
    patient_splits[img.patient_id].insert(t.split);
  }
  std::size_t overlap = 0;
  for (const auto& [p, s] : patient_splits) overlap += s.size() > 1;

  auto eval = ten_patients("eval_ds");
  const bool clean = check_leakage(std::vector{m}, std::vector{eval}).empty();
  eval.images[4].content_hash = m.images[9].content_hash;
  const auto leak = check_leakage(std::vector{m}, std::vector{eval});
  const bool found = leak.entries.size() == 1 && leak.entries[0].content_hash == m.images[9].content_hash;

  return {exact && same && overlap == 0 && clean && found,
          fmt("counts (%d,%d,%d); deterministic %s; patients in >1 split %zu; planted duplicate %s", counts[Split::train],
              counts[Split::val], counts[Split::test], same ? "yes" : "no", overlap, found ? "detected" : "missed")};
}

Outcome end_to_end() {
  const auto dir = std::filesystem::temp_directory_path() / "mvtk_acceptance";
  std::filesystem::remove_all(dir);
  SynthSpec spec;
  spec.seed = 1;
  spec.n_images = 50;
  write_synthetic_dataset(generate_synthetic_dataset(spec), dir);
  const auto manifest = load_manifest(dir / "manifest.jsonl");
  const auto compiled = compile_triplets(manifest, default_templates(), split_patients(manifest, {}, 1));
  {
    std::ofstream out(dir / "triplets.jsonl");
    write_triplets(compiled.triplets, out);
  }
  const auto triplets = load_triplets(dir / "triplets.jsonl");

  auto run = [&](const std::string& lines) {
    std::stringstream ss(lines);
    EvalOptions opts;
    opts.task = TaskKind::grounding_box2d;
    return run_eval(triplets, read_predictions(ss), opts).report;
  };
  const auto echo = run(fixture::echo_predictions(triplets, TaskKind::grounding_box2d));
  const auto half = run(fixture::corrupted_half_predictions(triplets));
  const double acc = echo.micro.at("acc@0.5"), miou = echo.micro.at("miou");
  const std::size_t failures = echo.counts.at("parse_failures");
  const double half_acc = half.micro.at("acc@0.5");
  std::filesystem::remove_all(dir);
  return {acc == 1.0 && miou == 1.0 && failures == 0 && half_acc == 0.5,
          fmt("%zu box samples; echo Acc@0.5 = %.17g, mIoU = %.17g, parse failures %zu; corrupted half Acc@0.5 = %.17g",
              echo.n_samples, acc, miou, failures, half_acc)};
}

Outcome reader_study() {
  std::vector<StudyCase> cases;
  for (int i = 0; i < 200; ++i) {
    const std::string id = "cxr" + std::to_string(i);
    cases.push_back({id, "images/" + id + ".png", "Generated: heart size normal " + std::to_string(i),
                     "Radiologist: heart size normal " + std::to_string(i)});
  }
  const std::vector<std::string> raters = {"rad1", "rad2"};
  const auto build = build_reader_study(cases, 2024, raters);
  std::size_t hits = 0;
  for (const auto& s : build.sessions) {
    const std::string bytes = session_file_text(s);
    for (const char* word : {"model", "reference"}) {
      for (auto at = bytes.find(word); at != std::string::npos; at = bytes.find(word, at + 1)) ++hits;
    }
  }
  std::vector<ReaderRating> ratings;
  int i = 0;
  for (const auto& [id, e] : build.key.cases) {
    const Side side = i++ < 161 ? e.model_side : (e.model_side == Side::A ? Side::B : Side::A);
    ratings.push_back({id, side == Side::A ? Preference::A : Preference::B, {}});
  }
  const auto t = tally_reader_study(build.sessions, ratings, build.key);
  const double rate = t.preference.rate_all();
  return {hits == 0 && rate == 0.805 && t.preference.rate_excluding_ties() == 0.805,
          fmt("source identifiers in session bytes: %zu; 161/200 -> %.17g (%.2f%%)", hits, rate, rate * 100)};
}

}  // namespace

int main() {
  double s = 0;
  Outcome o = timed(codec_round_trip, s);
  report("codec round-trip", o, s, 5);

  o = timed(geometry_oracle, s);
  report("geometry oracle equivalence", o, s, 5);

  PolygonStats st;
  o = timed(
      [&] {
        st = polygon_stats();
        return Outcome{};
      },
      s);
  if (!o.pass) {
    report("polygon canonicalization", o, s, 10);
  } else {
    report("polygon canonicalization: runtime", {true, fmt("%zu polygons", st.n)}, s, 10);
    report("polygon canonicalization: exactly 25 points", {st.bad_count == 0, fmt("%zu violations", st.bad_count)});
    report("polygon canonicalization: arc spacing within 0.5% of perimeter",
           {st.bad_spacing == 0 && st.control_detected, fmt("%zu polygons over; worst |gap - P/25| = %.4f P at the boundary positions each point rounds from; "
                "mis-spaced control %s",
                st.bad_spacing, st.worst_spacing, st.control_detected ? "flagged" : "NOT flagged")});
    report("polygon canonicalization: clockwise",
           {st.bad_orientation == 0, fmt("%zu with positive signed area", st.bad_orientation)});
    report("polygon canonicalization: idempotence within 1 grid unit",
           {st.bad_idempotence == 0,
            fmt("%zu of %zu drift more than 1 unit on a second pass (worst %d)", st.bad_idempotence, st.n, st.worst_drift)});
  }

  o = timed(auc_oracle, s);
  report("AUC pair-enumeration oracle", o);

  o = timed(text_fixtures, s);
  report("BLEU/ROUGE fixtures", o);

  o = timed(split_leakage, s);
  report("split and leakage", o);

  o = timed(end_to_end, s);
  report("end-to-end synthetic fixture", o, s, 30);

  o = timed(reader_study, s);
  report("reader study", o);

  std::size_t failed = 0, unexpected = 0, fixed = 0;
  for (const auto& l : g_lines) {
    const bool known = kKnownFailures.count(l.name) > 0;
    if (!l.outcome.pass) ++failed;
    if (!l.outcome.pass && !known) ++unexpected;
    if (l.outcome.pass && known) ++fixed;
  }
  std::printf("\n%zu of %zu checks pass; %zu known failure(s), %zu unexpected, %zu known failure(s) now passing\n",
              g_lines.size() - failed, g_lines.size(), failed - unexpected, unexpected, fixed);
  return unexpected == 0 && fixed == 0 ? 0 : 1;
}
