#include "afg/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "afg/error.hpp"

namespace afg::scoring {

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

double percentage_difference(double given, double correct) {
  if (correct == 0.0) throw DegenerateError("answer key value is zero; percentage difference undefined");
  return 100.0 * std::abs(given - correct) / std::abs(correct);
}

Verdict numeric_band(double d, const Thresholds& t) {
  if (d <= t.numeric_full) return Verdict::fully_correct;
  if (d <= t.numeric_partial) return Verdict::partially_correct;
  return Verdict::incorrect;
}

Verdict similarity_band(double s, const Thresholds& t) {
  if (s >= t.similarity_full) return Verdict::fully_correct;
  if (s >= t.similarity_partial) return Verdict::partially_correct;
  return Verdict::incorrect;
}

Mark score_numeric(double given, double correct, const Thresholds& t) {
  const double d = percentage_difference(given, correct);
  Mark m = make_mark(numeric_band(d, t), "percentage difference " + fixed(d, 2) + "%");
  m.expected = format_number(correct);
  m.given = format_number(given);
  return m;
}

Mark score_reference(std::string_view given, std::string_view correct, const Thresholds& t) {
  if (given.empty() || correct.empty()) throw ArgumentError("score_reference: empty reference");
  const double s = text::cosine_similarity(text::term_vector(given), text::term_vector(correct));
  Mark m = make_mark(similarity_band(s, t), "cosine similarity " + fixed(s, 4));
  m.expected = std::string(correct);
  m.given = std::string(given);
  return m;
}

int abstract_mark(double score01) {
  if (!(score01 >= 0.0 && score01 <= 1.0))
    throw ArgumentError("abstract_mark: score must lie in [0, 1]");
  const auto mark = std::lround(score01 * 6.0);
  return static_cast<int>(std::clamp<long>(mark, 0, 6));
}

NeuralAbstractScorer::NeuralAbstractScorer(nn::Model model, text::Vocabulary vocab)
    : model_(std::move(model)), vocab_(std::move(vocab)) {
  if (model_.config.head != nn::HeadKind::regression)
    throw ArgumentError("abstract scorer needs a regression model");
  if (model_.config.vocab_size != vocab_.size())
    throw ConfigError("abstract scorer: model and vocabulary sizes differ");
}

double NeuralAbstractScorer::score01(std::string_view abstract) const {
  return nn::predict_score(abstract, model_, vocab_);
}

MarkSheet mark_submission(const ingest::Submission& sub, const ingest::AnswerKey& key,
                          const AbstractScorer& scorer, const Thresholds& t) {
  if (sub.paper_id != key.paper_id)
    throw KeyMismatchError("answer key for paper '" + key.paper_id + "' used on submission for '" +
                        sub.paper_id + "'");
  MarkSheet sheet;
  sheet.q1_impact = score_numeric(sub.impact_factor, key.impact_factor, t);
  sheet.q2_rsc = score_reference(sub.ref_rsc, key.ref_rsc, t);
  sheet.q3_acs = score_reference(sub.ref_acs, key.ref_acs, t);
  sheet.q4_cited = score_numeric(static_cast<double>(sub.times_cited),
                                 static_cast<double>(key.times_cited), t);
  sheet.abstract_mark = abstract_mark(scorer.score01(sub.abstract));
  finalize(sheet);
  return sheet;
}

}  // namespace afg::scoring
