#pragma once

#include <memory>
#include <string_view>

#include "afg/ingest.hpp"
#include "afg/marks.hpp"
#include "afg/nn.hpp"
#include "afg/textproc.hpp"

namespace afg::scoring {

// Band edges. Numeric questions: d <= full -> 1, full < d <= partial -> 0.5,
// else 0 (d in percent). Reference questions: s >= full -> 1,
// partial <= s < full -> 0.5, else 0.
struct Thresholds {
  double numeric_full = 10.0;
  double numeric_partial = 25.0;
  double similarity_full = 0.9;
  double similarity_partial = 0.65;
};

// 100 * |given - correct| / |correct|; throws DegenerateError for correct == 0.
double percentage_difference(double given, double correct);

Verdict numeric_band(double percent_difference, const Thresholds& t = {});
Verdict similarity_band(double similarity, const Thresholds& t = {});

Mark score_numeric(double given, double correct, const Thresholds& t = {});
Mark score_reference(std::string_view given, std::string_view correct, const Thresholds& t = {});

// round(score01 * 6), half away from zero.
int abstract_mark(double score01);

// Source of the normalized abstract score. The neural model is the default
// backend; tests substitute fixed scores.
class AbstractScorer {
 public:
  virtual ~AbstractScorer() = default;
  virtual double score01(std::string_view abstract) const = 0;
};

class NeuralAbstractScorer final : public AbstractScorer {
 public:
  NeuralAbstractScorer(nn::Model model, text::Vocabulary vocab);
  double score01(std::string_view abstract) const override;

 private:
  nn::Model model_;
  text::Vocabulary vocab_;
};

MarkSheet mark_submission(const ingest::Submission& sub, const ingest::AnswerKey& key,
                          const AbstractScorer& scorer, const Thresholds& t = {});

}  // namespace afg::scoring
