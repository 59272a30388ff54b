#pragma once

// Blinded reader studies comparing generated and reference reports.
//
// build_reader_study() shuffles the cases, randomizes which report is shown
// as A per case and assigns every case to one rater. Session files carry only
// the A/B texts; which side is which lives in a separate sealed key together
// with a digest of every session file, so tallying can detect a key that
// belongs to other sessions.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace mvtk {

struct StudyCase {
  std::string case_id;
  std::string image_ref;
  std::string model_report;
  std::string reference_report;
};

struct SessionCase {
  std::string case_id;
  std::string image_ref;
  std::string report_a;
  std::string report_b;
};

struct ReaderStudySession {
  std::string session_id;
  std::string rater_id;
  std::uint64_t seed = 0;
  std::vector<SessionCase> cases;
};

enum class Side { A, B };

struct SealedKey {
  struct Entry {
    Side model_side = Side::A;
    std::string session_id;
  };
  std::uint64_t seed = 0;
  std::map<std::string, Entry> cases;
  std::map<std::string, std::string> session_digests;  // session_id -> sha256 of the session file
};

struct StudyBuild {
  std::vector<ReaderStudySession> sessions;  // one per rater, in rater order
  SealedKey key;
};

// Throws Error(validation) on duplicate case or rater ids, or when either list
// is empty.
StudyBuild build_reader_study(std::span<const StudyCase> cases, std::uint64_t seed,
                              std::span<const std::string> raters);

std::vector<StudyCase> read_study_cases(std::istream& in);

nlohmann::json session_to_json(const ReaderStudySession& session);
ReaderStudySession session_from_json(const nlohmann::json& value);
std::string session_file_text(const ReaderStudySession& session);  // what gets written and digested
std::string session_digest(const ReaderStudySession& session);

nlohmann::json key_to_json(const SealedKey& key);
SealedKey key_from_json(const nlohmann::json& value);

enum class Preference { A, B, tie };

struct SideAssessment {
  std::size_t errors = 0;
  std::size_t omissions = 0;
  std::vector<std::string> severity_flags;
};

struct ReaderRating {
  std::string case_id;
  std::optional<Preference> preference;
  std::map<Side, SideAssessment> assessments;  // independent error/omission scoring
};

// Rating records: {"case_id", "preference": "A"|"B"|"tie", "errors": {"A": n, "B": n},
// "omissions": {...}, "severity_flags": {"A": [...], "B": [...]}}; all but case_id optional.
ReaderRating rating_from_json(const nlohmann::json& value);
std::vector<ReaderRating> read_ratings(std::istream& in);

struct PreferenceTally {
  std::size_t model = 0;
  std::size_t reference = 0;
  std::size_t tie = 0;

  std::size_t total() const noexcept { return model + reference + tie; }
  // Undefined when every rating is a tie.
  std::optional<double> rate_excluding_ties() const;
  double rate_all() const;           // model / all
  double tie_rate() const;           // tie / all
  double equal_or_better() const;    // (model + tie) / all
};

struct SourceAssessment {
  std::size_t rated = 0;
  std::size_t errors = 0;
  std::size_t omissions = 0;
  std::size_t flagged = 0;  // reports with at least one severity flag

  double mean_errors() const;
  double mean_omissions() const;
};

struct StudyTally {
  std::size_t ratings = 0;
  PreferenceTally preference;
  std::map<std::string, PreferenceTally> per_rater;
  SourceAssessment model;
  SourceAssessment reference;
};

// Throws Error(unknown_sample) for a rating of a case in no session,
// Error(conflict) when the key does not belong to the sessions, and
// Error(validation) for duplicate ratings.
StudyTally tally_reader_study(std::span<const ReaderStudySession> sessions, std::span<const ReaderRating> ratings,
                              const SealedKey& key);

nlohmann::json tally_to_json(const StudyTally& tally);

}  // namespace mvtk
