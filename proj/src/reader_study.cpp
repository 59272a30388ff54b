#include "mvtk/reader_study.hpp"

#include <algorithm>
#include <istream>
#include <set>

#include "mvtk/error.hpp"
#include "mvtk/hashing.hpp"
#include "mvtk/random.hpp"

namespace mvtk {

using nlohmann::json;

namespace {

const char* side_name(Side s) { return s == Side::A ? "A" : "B"; }

Side side_from(const std::string& s) {
  if (s == "A") return Side::A;
  if (s == "B") return Side::B;
  throw Error(ErrorKind::validation, "expected side 'A' or 'B', got '" + s + "'");
}

std::string required_string(const json& v, const char* key, const std::string& where) {
  if (!v.contains(key) || !v.at(key).is_string())
    throw Error(ErrorKind::validation, where + ": missing string field " + key);
  return v.at(key).get<std::string>();
}

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

StudyBuild build_reader_study(std::span<const StudyCase> cases, std::uint64_t seed,
                              std::span<const std::string> raters) {
  if (cases.empty()) throw Error(ErrorKind::validation, "reader study: no cases");
  if (raters.empty()) throw Error(ErrorKind::validation, "reader study: no raters");
  std::set<std::string> ids;
  for (const auto& c : cases) {
    if (!ids.insert(c.case_id).second)
      throw Error(ErrorKind::validation, "reader study: duplicate case id '" + c.case_id + "'");
  }
  std::set<std::string> rater_ids;
  for (const auto& r : raters) {
    if (r.empty() || !rater_ids.insert(r).second)
      throw Error(ErrorKind::validation, "reader study: empty or duplicate rater id '" + r + "'");
  }

  // Sorted before shuffling so the result does not depend on input order.
  std::vector<const StudyCase*> order;
  for (const auto& c : cases) order.push_back(&c);
  std::sort(order.begin(), order.end(), [](const StudyCase* a, const StudyCase* b) { return a->case_id < b->case_id; });
  SeededRng rng(seed);
  rng.shuffle(order);

  StudyBuild out;
  out.key.seed = seed;
  for (const auto& r : raters) out.sessions.push_back({"session-" + r, r, seed, {}});
  for (const StudyCase* c : order) {
    const Side model_side = rng.coin() ? Side::A : Side::B;
    ReaderStudySession& session = out.sessions[rng.below(raters.size())];
    const bool model_first = model_side == Side::A;
    session.cases.push_back({c->case_id, c->image_ref, model_first ? c->model_report : c->reference_report,
                             model_first ? c->reference_report : c->model_report});
    out.key.cases[c->case_id] = {model_side, session.session_id};
  }
  for (const auto& s : out.sessions) out.key.session_digests[s.session_id] = session_digest(s);
  return out;
}

std::vector<StudyCase> read_study_cases(std::istream& in) {
  std::vector<StudyCase> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "cases line " + std::to_string(line_no);
    json v;
    try {
      v = json::parse(line);
    } catch (const json::parse_error&) {
      throw Error(ErrorKind::validation, where + ": invalid JSON");
    }
    out.push_back({required_string(v, "case_id", where), v.value("image_ref", std::string()),
                   required_string(v, "model_report", where), required_string(v, "reference_report", where)});
  }
  return out;
}

json session_to_json(const ReaderStudySession& s) {
  json cases = json::array();
  for (const auto& c : s.cases)
    cases.push_back({{"case_id", c.case_id}, {"image_ref", c.image_ref}, {"report_A", c.report_a}, {"report_B", c.report_b}});
  return {{"session_id", s.session_id}, {"rater_id", s.rater_id}, {"seed", s.seed}, {"cases", std::move(cases)}};
}

ReaderStudySession session_from_json(const json& v) {
  if (!v.is_object()) throw Error(ErrorKind::validation, "session: expected object");
  ReaderStudySession s;
  s.session_id = required_string(v, "session_id", "session");
  s.rater_id = required_string(v, "rater_id", "session");
  if (!v.contains("seed") || !v.at("seed").is_number_unsigned())
    throw Error(ErrorKind::validation, "session: missing seed");
  s.seed = v.at("seed").get<std::uint64_t>();
  if (!v.contains("cases") || !v.at("cases").is_array()) throw Error(ErrorKind::validation, "session: missing cases");
  for (const json& c : v.at("cases")) {
    const std::string where = "session " + s.session_id;
    s.cases.push_back({required_string(c, "case_id", where), required_string(c, "image_ref", where),
                       required_string(c, "report_A", where), required_string(c, "report_B", where)});
  }
  return s;
}

std::string session_file_text(const ReaderStudySession& session) { return session_to_json(session).dump(2) + "\n"; }

std::string session_digest(const ReaderStudySession& session) { return sha256_hex(session_file_text(session)); }

json key_to_json(const SealedKey& key) {
  json cases = json::object();
  for (const auto& [id, e] : key.cases) cases[id] = {{"model", side_name(e.model_side)}, {"session_id", e.session_id}};
  return {{"seed", key.seed}, {"cases", std::move(cases)}, {"sessions", key.session_digests}};
}

SealedKey key_from_json(const json& v) {
  try {
    SealedKey key;
    key.seed = v.at("seed").get<std::uint64_t>();
    for (const auto& [id, e] : v.at("cases").items())
      key.cases[id] = {side_from(e.at("model").get<std::string>()), e.at("session_id").get<std::string>()};
    key.session_digests = v.at("sessions").get<std::map<std::string, std::string>>();
    return key;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::validation, std::string("key: ") + e.what());
  }
}

ReaderRating rating_from_json(const json& v) {
  if (!v.is_object()) throw Error(ErrorKind::validation, "rating: expected object");
  ReaderRating r;
  r.case_id = required_string(v, "case_id", "rating");
  const std::string where = "rating for " + r.case_id;
  if (v.contains("preference")) {
    const json& p = v.at("preference");
    if (p == "A") r.preference = Preference::A;
    else if (p == "B") r.preference = Preference::B;
    else if (p == "tie") r.preference = Preference::tie;
    else throw Error(ErrorKind::validation, where + ": preference must be A, B or tie");
  }
  for (const char* field : {"errors", "omissions"}) {
    if (!v.contains(field)) continue;
    const json& per_side = v.at(field);
    if (!per_side.is_object()) throw Error(ErrorKind::validation, where + ": " + field + " must map A/B to counts");
    for (const auto& [side, n] : per_side.items()) {
      if (!n.is_number_integer() || n.get<long long>() < 0)
        throw Error(ErrorKind::validation, where + ": " + field + " counts must be non-negative integers");
      auto& a = r.assessments[side_from(side)];
      (std::string(field) == "errors" ? a.errors : a.omissions) = n.get<std::size_t>();
    }
  }
  if (v.contains("severity_flags")) {
    const json& per_side = v.at("severity_flags");
    if (!per_side.is_object()) throw Error(ErrorKind::validation, where + ": severity_flags must map A/B to lists");
    for (const auto& [side, flags] : per_side.items()) {
      try {
        r.assessments[side_from(side)].severity_flags = flags.get<std::vector<std::string>>();
      } catch (const json::exception&) {
        throw Error(ErrorKind::validation, where + ": severity flags must be strings");
      }
    }
  }
  return r;
}

std::vector<ReaderRating> read_ratings(std::istream& in) {
  std::vector<ReaderRating> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(rating_from_json(json::parse(line)));
    } catch (const json::parse_error&) {
      throw Error(ErrorKind::validation, "ratings line " + std::to_string(line_no) + ": invalid JSON");
    } catch (const Error& e) {
      throw Error(e.kind(), "ratings line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::optional<double> PreferenceTally::rate_excluding_ties() const {
  if (model + reference == 0) return std::nullopt;
  return ratio(model, model + reference);
}

double PreferenceTally::rate_all() const { return ratio(model, total()); }
double PreferenceTally::tie_rate() const { return ratio(tie, total()); }
double PreferenceTally::equal_or_better() const { return ratio(model + tie, total()); }

double SourceAssessment::mean_errors() const { return ratio(errors, rated); }
double SourceAssessment::mean_omissions() const { return ratio(omissions, rated); }

StudyTally tally_reader_study(std::span<const ReaderStudySession> sessions, std::span<const ReaderRating> ratings,
                              const SealedKey& key) {
  std::map<std::string, const ReaderStudySession*> case_session;
  std::set<std::string> session_ids;
  for (const auto& s : sessions) {
    session_ids.insert(s.session_id);
    auto digest = key.session_digests.find(s.session_id);
    if (digest == key.session_digests.end() || digest->second != session_digest(s))
      throw Error(ErrorKind::conflict, "key does not match session '" + s.session_id + "'");
    for (const auto& c : s.cases) {
      auto entry = key.cases.find(c.case_id);
      if (entry == key.cases.end() || entry->second.session_id != s.session_id)
        throw Error(ErrorKind::conflict, "key does not list case '" + c.case_id + "' in session " + s.session_id);
      case_session[c.case_id] = &s;
    }
  }
  for (const auto& [id, _] : key.session_digests) {
    if (!session_ids.count(id)) throw Error(ErrorKind::conflict, "session '" + id + "' from the key was not given");
  }

  StudyTally t;
  std::set<std::string> rated;
  for (const ReaderRating& r : ratings) {
    auto s = case_session.find(r.case_id);
    if (s == case_session.end())
      throw Error(ErrorKind::unknown_sample, "rating for unknown case '" + r.case_id + "'");
    if (!rated.insert(r.case_id).second)
      throw Error(ErrorKind::validation, "more than one rating for case '" + r.case_id + "'");
    ++t.ratings;
    const Side model_side = key.cases.at(r.case_id).model_side;
    if (r.preference) {
      PreferenceTally& rater = t.per_rater[s->second->rater_id];
      for (PreferenceTally* p : {&t.preference, &rater}) {
        if (*r.preference == Preference::tie) ++p->tie;
        else if ((*r.preference == Preference::A) == (model_side == Side::A)) ++p->model;
        else ++p->reference;
      }
    }
    for (const auto& [side, a] : r.assessments) {
      SourceAssessment& src = side == model_side ? t.model : t.reference;
      ++src.rated;
      src.errors += a.errors;
      src.omissions += a.omissions;
      if (!a.severity_flags.empty()) ++src.flagged;
    }
  }
  return t;
}

json tally_to_json(const StudyTally& t) {
  auto pref = [](const PreferenceTally& p) {
    const auto excl = p.rate_excluding_ties();
    return json{{"model_preferred", p.model},
                {"reference_preferred", p.reference},
                {"ties", p.tie},
                {"rated", p.total()},
                {"preference_rate_model_all", p.rate_all()},
                {"preference_rate_model_excluding_ties", excl ? json(*excl) : json("undefined")},
                {"tie_rate", p.tie_rate()},
                {"equal_or_better_rate", p.equal_or_better()}};
  };
  auto source = [](const SourceAssessment& s) {
    return json{{"rated", s.rated},
                {"errors", s.errors},
                {"omissions", s.omissions},
                {"flagged", s.flagged},
                {"mean_errors", s.mean_errors()},
                {"mean_omissions", s.mean_omissions()}};
  };
  json per_rater = json::object();
  for (const auto& [rater, p] : t.per_rater) per_rater[rater] = pref(p);
  return {{"ratings", t.ratings},
          {"preference", pref(t.preference)},
          {"per_rater", std::move(per_rater)},
          {"model", source(t.model)},
          {"reference", source(t.reference)}};
}

}  // namespace mvtk
