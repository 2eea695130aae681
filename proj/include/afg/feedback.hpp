#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "afg/marks.hpp"
#include "afg/structure.hpp"
#include "json.hpp"

namespace afg::feedback {

// ---------------------------------------------------------------------------
// Questions 1-4
// ---------------------------------------------------------------------------

enum class Question { impact, rsc, acs, cited };

inline constexpr std::array<Question, 4> kQuestions = {Question::impact, Question::rsc,
                                                       Question::acs, Question::cited};

// "Impact Factor", "Reference in RSC format", ...
std::string_view question_title(Question q) noexcept;

// Pre-written comment for (question, verdict). Incorrect numeric answers get
// ", the correct answer is X, you gave Y" appended from the mark.
std::string fixed_comment(Question q, const Mark& mark);

// ---------------------------------------------------------------------------
// Abstract structure rules
// ---------------------------------------------------------------------------

enum class Comparator { lt, le, gt, ge, eq };

std::string_view to_string(Comparator c) noexcept;
Comparator comparator_from_string(std::string_view s);

// Metrics a rule can test:
//   background | technique | observation   class shares
//   spread                                  max share - min share
//   observation_dominant                    1 if observation has the largest share
//   logical_order                           1 if labels, with repeats collapsed,
//                                           follow BACKGROUND, TECHNIQUE, OBSERVATION
//   no_comment                              1 if no other rule fired (checked last)
struct Clause {
  std::string metric;
  Comparator comparator = Comparator::ge;
  double threshold = 0.0;

  bool operator==(const Clause&) const = default;
};

// Alternative wording used when the tested metric is <= max_value. The first
// matching variant wins.
struct Variant {
  double max_value = 0.0;
  std::string text;

  bool operator==(const Variant&) const = default;
};

struct FeedbackRule {
  std::string id;
  Clause when;
  // Extra guard: at least one of these must also hold (ignored when empty).
  std::vector<Clause> any_of;
  std::string text;
  std::vector<Variant> variants;
  int priority = 0;

  bool operator==(const FeedbackRule&) const = default;
};

std::vector<FeedbackRule> default_rules();

// JSON list of {id, class, comparator, threshold, template, priority} with
// optional "any_of" (list of {class, comparator, threshold}) and "variants"
// (list of {max, template}). Rule ids must be unique.
std::vector<FeedbackRule> rules_from_json(const nlohmann::json& j);
std::vector<FeedbackRule> read_rules(std::istream& in);
nlohmann::json to_json(const std::vector<FeedbackRule>& rules);

double metric_value(std::string_view metric, const structure::ClassDistribution& dist,
                    std::span<const structure::Label3> labels);

// Comments in priority order (ties by id). Always returns at least one.
std::vector<std::string> abstract_feedback(const structure::ClassDistribution& dist,
                                           std::span<const structure::Label3> labels,
                                           const std::vector<FeedbackRule>& rules = default_rules());

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct FeedbackReport {
  std::string submission_id;
  std::array<std::string, 4> question_comments;
  std::vector<std::string> abstract_comments;
  structure::LabeledAbstract labeled_abstract;
  MarkSheet marks;
};

FeedbackReport build_report(std::string submission_id, const MarkSheet& marks,
                            structure::LabeledAbstract labeled,
                            const std::vector<FeedbackRule>& rules = default_rules());

nlohmann::json to_json(const FeedbackReport& r);

enum class Format { terminal, html, markdown };

std::optional<Format> format_from_string(std::string_view s) noexcept;
std::string_view file_extension(Format f) noexcept;

struct RenderOptions {
  bool color = true;  // terminal only; false prints [B]/[T]/[O] tags
};

// Marks block, highlighted abstract with legend, then comments.
std::string render_report(const FeedbackReport& report, Format format,
                          const RenderOptions& options = {});

// "1 mark", "0 marks", "0.5 marks", "3 marks"
std::string marks_phrase(double value);

}  // namespace afg::feedback
