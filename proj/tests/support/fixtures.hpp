#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "afg/feedback.hpp"
#include "afg/ingest.hpp"
#include "afg/nn.hpp"
#include "afg/scoring.hpp"
#include "afg/structure.hpp"

namespace afg::testing {

// Directory holding tests/data (set by CMake).
std::filesystem::path data_dir();
std::string read_text(const std::filesystem::path& p);

// The six-sentence abstract whose labels are B, B, T, B, O, B.
extern const std::string kExample1Abstract;
extern const std::vector<structure::Label3> kExample1Labels;
extern const std::array<std::string, 3> kExample1Comments;

// The full worked submission: labels B, B, T, O, O, O, O.
extern const std::string kExample2Abstract;
extern const std::vector<structure::Label3> kExample2Labels;
extern const std::array<std::string, 3> kExample2Comments;
ingest::Submission example2_submission();
ingest::AnswerKey example2_key();

// Hands out a fixed label per sentence, in order. Sentences beyond the list
// get the last label.
class OracleClassifier final : public structure::SentenceClassifier {
 public:
  explicit OracleClassifier(std::vector<structure::Label3> labels) : labels_(std::move(labels)) {}
  std::array<double, 3> probabilities(std::string_view sentence) const override;
  void reset() const { next_ = 0; }

 private:
  std::vector<structure::Label3> labels_;
  mutable std::size_t next_ = 0;
};

// Looks up the label by exact sentence text; unknown sentences are background.
class TextOracleClassifier final : public structure::SentenceClassifier {
 public:
  void add(std::string sentence, structure::Label3 label) { table_[std::move(sentence)] = label; }
  std::array<double, 3> probabilities(std::string_view sentence) const override;

 private:
  std::map<std::string, structure::Label3, std::less<>> table_;
};

class FixedScorer final : public scoring::AbstractScorer {
 public:
  explicit FixedScorer(double score) : score_(score) {}
  double score01(std::string_view) const override { return score_; }

 private:
  double score_;
};

// ---------------------------------------------------------------------------
// Synthetic corpora
// ---------------------------------------------------------------------------

// Abstracts in PubMed-RCT layout built from per-role sentence templates.
// A share `label_noise` of sentences carry a template from a random other role.
std::vector<ingest::RctAbstract> synthetic_rct(std::size_t n_sentences, std::uint64_t seed,
                                               double label_noise = 0.06);

// Two prompt families over a shared pseudo-word lexicon. The score is driven
// by the fraction of positive concept words; family B adds its own words and
// an offset/scale on the score.
struct RegressionText {
  std::string text;
  double score01 = 0.0;
};

struct RegressionFixture {
  std::vector<RegressionText> family_a;
  std::vector<RegressionText> family_b;
};

RegressionFixture synthetic_regression(std::size_t n_a, std::size_t n_b, std::uint64_t seed);

// Full reports for the two worked examples, built through the grading
// pipeline with oracle labels and a fixed abstract score of 0.5.
feedback::FeedbackReport example1_report();
feedback::FeedbackReport example2_report();

// Compares `actual` with tests/data/golden/<name>. With AFG_UPDATE_GOLDEN=1
// in the environment the file is rewritten instead and the check passes.
bool matches_golden(const std::string& name, const std::string& actual);

// Small separable corpus: 20 sentences, three classes, disjoint keywords.
std::vector<std::pair<std::string, int>> separable_sentences();

}  // namespace afg::testing
