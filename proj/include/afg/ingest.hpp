#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "afg/error.hpp"
#include "afg/marks.hpp"
#include "afg/rng.hpp"
#include "json.hpp"

namespace afg::ingest {

// ---------------------------------------------------------------------------
// Scored essay corpora (TSV)
// ---------------------------------------------------------------------------

struct RawSample {
  std::string sample_id;
  std::string prompt_id;
  std::string text;
  double raw_score = 0.0;
  double min_score = 0.0;
  double max_score = 0.0;

  bool operator==(const RawSample&) const = default;
};

struct NormalizedSample {
  std::string sample_id;
  std::string prompt_id;
  std::string text;
  double score01 = 0.0;

  bool operator==(const NormalizedSample&) const = default;
};

// Header names of the four columns read from a scored TSV file. Other
// columns are ignored.
struct ColumnMap {
  std::string id = "id";
  std::string prompt = "set";
  std::string text = "essay";
  std::string score = "score";
};

struct ScoreRange {
  double min = 0.0;
  double max = 0.0;
};

// prompt_id -> declared score range. Supplied by a sidecar config because the
// corpora themselves do not carry it.
using ScoreRanges = std::map<std::string, ScoreRange, std::less<>>;

// {"1": [0, 6], "2": [2, 12]}
ScoreRanges score_ranges_from_json(const nlohmann::json& j);

std::vector<RawSample> parse_scored_tsv(std::istream& in, const ColumnMap& columns,
                                        const ScoreRanges& ranges);

// score01 = (raw - min) / (max - min), per sample's own range.
std::vector<NormalizedSample> normalize_scores(std::span<const RawSample> samples);

// ---------------------------------------------------------------------------
// Rhetorical-role corpus
// ---------------------------------------------------------------------------

enum class Label5 { background, objective, method, result, conclusion };

std::string_view to_string(Label5 label) noexcept;

// Accepts the canonical upper-case names and the plural forms used by the
// published corpus files (METHODS, RESULTS, CONCLUSIONS).
std::optional<Label5> parse_label5(std::string_view name) noexcept;

struct RctSentence {
  Label5 label = Label5::background;
  std::string text;
  bool operator==(const RctSentence&) const = default;
};

struct RctAbstract {
  std::string abstract_id;
  std::vector<RctSentence> sentences;
  bool operator==(const RctAbstract&) const = default;
};

// `###<id>` opens an abstract, `<LABEL>\t<sentence>` lines follow, a blank
// line closes it.
std::vector<RctAbstract> parse_rct(std::istream& in);
std::string serialize_rct(std::span<const RctAbstract> abstracts);

// ---------------------------------------------------------------------------
// Submissions and answer keys
// ---------------------------------------------------------------------------

struct Submission {
  std::string submission_id;
  std::string paper_id;
  double impact_factor = 0.0;
  std::string ref_rsc;
  std::string ref_acs;
  std::int64_t times_cited = 0;
  std::string abstract;
  std::optional<MarkSheet> human_marks;
};

struct AnswerKey {
  std::string paper_id;
  double impact_factor = 0.0;
  std::string ref_rsc;
  std::string ref_acs;
  std::int64_t times_cited = 0;

  bool operator==(const AnswerKey&) const = default;
};

std::vector<Submission> submissions_from_json(const nlohmann::json& j);
std::vector<Submission> read_submissions(std::istream& in);
nlohmann::json to_json(const Submission& s);

std::vector<AnswerKey> answer_keys_from_json(const nlohmann::json& j);
std::vector<AnswerKey> read_answer_keys(std::istream& in);
nlohmann::json to_json(const AnswerKey& k);

// Collapse whitespace runs to one space, trim, drop one trailing period.
std::string canonical_reference(std::string_view ref);

struct DerivedKey {
  AnswerKey key;
  // One entry per field whose mode was tied.
  std::vector<std::string> warnings;
};

// Modal answer per field among submissions for `paper_id`. Ties go to the
// smallest number / lexicographically first canonical string.
DerivedKey derive_answer_key(std::span<const Submission> submissions, std::string_view paper_id);

// ---------------------------------------------------------------------------
// Train / eval split
// ---------------------------------------------------------------------------

template <typename T>
struct DatasetSplit {
  std::vector<T> train;
  std::vector<T> eval;
  std::uint64_t seed = 0;
  double fraction = 0.0;
};

// Number of training items for a split: round(fraction * n), half away from zero.
std::size_t train_count(std::size_t n, double fraction);

// Shuffle with SplitMix64(seed), then the first round(fraction*N) items are
// the training set and the rest the evaluation set.
template <typename T>
DatasetSplit<T> split(std::vector<T> samples, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw ArgumentError("split fraction must lie in (0, 1)");
  if (samples.size() < 2) throw ArgumentError("split needs at least two samples");
  SplitMix64 rng(seed);
  shuffle(std::span<T>(samples), rng);
  const std::size_t n_train = train_count(samples.size(), fraction);
  DatasetSplit<T> out;
  out.seed = seed;
  out.fraction = fraction;
  const auto mid = samples.begin() + static_cast<std::ptrdiff_t>(n_train);
  out.train.assign(std::make_move_iterator(samples.begin()), std::make_move_iterator(mid));
  out.eval.assign(std::make_move_iterator(mid), std::make_move_iterator(samples.end()));
  return out;
}

}  // namespace afg::ingest
