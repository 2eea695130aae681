#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "afg/feedback.hpp"
#include "afg/ingest.hpp"
#include "afg/nn.hpp"
#include "afg/objectives.hpp"
#include "afg/scoring.hpp"
#include "afg/structure.hpp"
#include "json.hpp"

namespace afg::cli {

namespace fs = std::filesystem;

// Stable process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitData = 3,
  kExitDiverged = 4,
};

struct TrainSettings {
  std::size_t epochs = 5;
  std::size_t batch_size = 64;
  double learning_rate = 1e-3;
};

struct RunConfig {
  std::uint64_t seed = 42;
  fs::path out_dir = "out";

  std::vector<fs::path> scored_corpora;
  ingest::ColumnMap columns;
  ingest::ScoreRanges score_ranges;
  fs::path rct_corpus;
  fs::path submissions;
  fs::path answer_keys;  // empty: derive keys from the submissions
  fs::path aes_model;
  fs::path aes_vocab;
  fs::path classifier_model;
  fs::path classifier_vocab;
  fs::path rules;  // empty: built-in rule set
  text::SegmenterOptions segmenter;

  std::size_t embed_dim = 32;
  std::size_t hidden_dim = 32;
  std::size_t attention_dim = 32;
  std::size_t max_sequence_length = 512;
  std::size_t vocab_size = 4000;
  std::size_t vocab_min_frequency = 2;

  objectives::LossSchedule schedule;
  TrainSettings pretrain{5, 32, 1e-3};
  TrainSettings finetune{20, 16, 1e-3};
  TrainSettings classifier{5, 64, 1e-3};

  double aes_split = 0.8;
  double rct_split = 0.9;
  std::size_t rct_max_sentences = 5000;
  bool rct_five_class = false;

  scoring::Thresholds thresholds;
  feedback::Format report_format = feedback::Format::html;
  bool color = true;
};

// Relative paths in the file are resolved against `base_dir`.
RunConfig config_from_json(const nlohmann::json& j, const fs::path& base_dir);
RunConfig load_config(const fs::path& path);

// ---------------------------------------------------------------------------
// Pipeline steps with injectable models (used by the commands and by tests).
// ---------------------------------------------------------------------------

struct GradeResult {
  std::vector<feedback::FeedbackReport> reports;  // sorted by submission_id
  std::vector<ingest::AnswerKey> keys;
  std::vector<std::string> warnings;
};

GradeResult grade_submissions(std::span<const ingest::Submission> submissions,
                              std::span<const ingest::AnswerKey> keys,
                              const scoring::AbstractScorer& scorer,
                              const structure::SentenceClassifier& classifier,
                              const std::vector<feedback::FeedbackRule>& rules,
                              const scoring::Thresholds& thresholds,
                              const text::SegmenterOptions& segmenter);

struct MarkEvaluation {
  objectives::EvalReport abstract_scores;     // score01 vs human mark / 6
  objectives::ConfusionMatrix abstract_marks;  // 7 x 7, rows human
  double abstract_accuracy = 0.0;
  std::array<double, 4> question_agreement{};  // fraction of equal question marks
  std::size_t n = 0;
};

// Only submissions carrying human marks are compared.
MarkEvaluation evaluate_marks(std::span<const ingest::Submission> submissions,
                              std::span<const ingest::AnswerKey> keys,
                              const scoring::AbstractScorer& scorer,
                              const scoring::Thresholds& thresholds);

nlohmann::json to_json(const MarkEvaluation& e);

// ---------------------------------------------------------------------------
// Commands. Each writes its artifacts under config.out_dir and returns a JSON
// summary.
// ---------------------------------------------------------------------------

nlohmann::json cmd_pretrain(const RunConfig& config);
nlohmann::json cmd_finetune(const RunConfig& config, const fs::path& base_model);
nlohmann::json cmd_train_classifier(const RunConfig& config);
nlohmann::json cmd_grade(const RunConfig& config);
nlohmann::json cmd_eval(const RunConfig& config);

// Entry point behind the `afg` binary. Never throws; returns an ExitCode.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace afg::cli
