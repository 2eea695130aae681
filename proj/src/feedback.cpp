#include "afg/feedback.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <set>
#include <sstream>

#include "afg/error.hpp"

namespace afg::feedback {

using structure::ClassDistribution;
using structure::Label3;

std::string_view question_title(Question q) noexcept {
  switch (q) {
    case Question::impact: return "Impact Factor";
    case Question::rsc: return "Reference in RSC format";
    case Question::acs: return "Reference in ACS format";
    case Question::cited: return "Number of times Cited";
  }
  return "";
}

namespace {

bool is_numeric(Question q) noexcept { return q == Question::impact || q == Question::cited; }

// Indexed [question][verdict] with verdict order incorrect, partial, full.
constexpr std::array<std::array<std::string_view, 3>, 4> kComments = {{
    {"Check the Impact Factor of the journal again",
     "Your Impact Factor is close, but check that you used the current value for the journal",
     "That is the correct Impact Factor, Well done!"},
    {"Make sure your Royal Society of Chemistry reference has exactly the correct format",
     "Your Royal Society of Chemistry reference is nearly right; compare each part against the required format",
     "Your Royal Society of Chemistry reference is correctly formatted, well done!"},
    {"Make sure your American Chemical Society reference has exactly the correct format",
     "Your American Chemical Society reference is nearly right; compare each part against the required format",
     "Your American Chemical Society reference is correctly formatted, well done!"},
    {"Check the number of times the paper has been cited",
     "Your citation count is close; counts change over time, so check the database again",
     "That is the correct number of citations, well done!"},
}};

std::string numeric_evidence(const Mark& mark) {
  if (mark.expected.empty() || mark.given.empty()) return {};
  return ", the correct answer is " + mark.expected + ", you gave " + mark.given;
}

}  // namespace

std::string fixed_comment(Question q, const Mark& mark) {
  std::string out(kComments[static_cast<std::size_t>(q)][static_cast<std::size_t>(mark.verdict)]);
  if (is_numeric(q) && mark.verdict == Verdict::incorrect) out += numeric_evidence(mark);
  return out;
}

// ---------------------------------------------------------------------------

std::string_view to_string(Comparator c) noexcept {
  switch (c) {
    case Comparator::lt: return "lt";
    case Comparator::le: return "le";
    case Comparator::gt: return "gt";
    case Comparator::ge: return "ge";
    case Comparator::eq: return "eq";
  }
  return "ge";
}

Comparator comparator_from_string(std::string_view s) {
  for (const auto c : {Comparator::lt, Comparator::le, Comparator::gt, Comparator::ge, Comparator::eq})
    if (to_string(c) == s) return c;
  throw ConfigError("unknown comparator '" + std::string(s) + "'");
}

namespace {

bool compare(double value, Comparator c, double threshold) {
  switch (c) {
    case Comparator::lt: return value < threshold;
    case Comparator::le: return value <= threshold;
    case Comparator::gt: return value > threshold;
    case Comparator::ge: return value >= threshold;
    case Comparator::eq: return value == threshold;
  }
  return false;
}

const std::set<std::string, std::less<>>& known_metrics() {
  static const std::set<std::string, std::less<>> m = {
      "background", "technique", "observation", "spread", "observation_dominant", "logical_order", "no_comment"};
  return m;
}

bool in_logical_order(std::span<const Label3> labels) {
  // Collapsing repeats and requiring a strictly increasing class index is the
  // same as being a subsequence of B, T, O.
  int last = -1;
  for (const auto l : labels) {
    const int v = static_cast<int>(l);
    if (v == last) continue;
    if (v < last) return false;
    last = v;
  }
  return true;
}

Clause clause_from_json(const nlohmann::json& j, const std::string& rule_id) {
  try {
    Clause c{j.at("class").get<std::string>(), comparator_from_string(j.at("comparator").get<std::string>()),
             j.at("threshold").get<double>()};
    if (!known_metrics().contains(c.metric))
      throw ConfigError("rule '" + rule_id + "': unknown class '" + c.metric + "'");
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("rule '" + rule_id + "': " + e.what());
  }
}

nlohmann::json clause_to_json(const Clause& c) {
  return {{"class", c.metric}, {"comparator", std::string(to_string(c.comparator))}, {"threshold", c.threshold}};
}

FeedbackRule rule(std::string id, Clause when, std::string text, int priority,
                  std::vector<Clause> any_of = {}, std::vector<Variant> variants = {}) {
  return {std::move(id), std::move(when), std::move(any_of), std::move(text), std::move(variants), priority};
}

}  // namespace

std::vector<FeedbackRule> default_rules() {
  using C = Comparator;
  return {
      rule("balance_nudge", {"spread", C::gt, 0.40},
           "A more balanced discussion of the background of the paper, the techniques of the paper "
           "and the observations and conclusions the paper made might improve your work.",
           10, {{"observation_dominant", C::ge, 1.0}, {"background", C::lt, 0.40}}),
      rule("background_praise", {"background", C::ge, 0.40},
           "Your discussion of the paper's background has a good amount of detail.", 20),
      rule("background_expand", {"background", C::lt, 0.15},
           "It might be useful to say more about the background and aims of the paper.", 21),
      rule("technique_detail", {"technique", C::le, 0.20},
           "It might be useful to outline the Techniques the model uses in a bit more detail.", 30, {},
           {{0.15, "It might be worth outlining the methods of the paper in greater detail."}}),
      rule("observation_clarity", {"observation", C::le, 0.20},
           "It may be worth making sure that the discussion of the conclusions of the paper are clearer.", 40),
      rule("balance_commendation", {"spread", C::le, 0.20},
           "The abstract gives a well balanced account of the background, techniques and observations of the paper.",
           50),
      rule("logical_order", {"logical_order", C::ge, 1.0},
           "The abstract contains discussion of each aspect of the paper in a logical order.", 60),
      rule("fallback", {"no_comment", C::ge, 1.0},
           "Check that the abstract gives appropriate weight to the background, techniques and observations of the paper.",
           90),
  };
}

std::vector<FeedbackRule> rules_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw ConfigError("rule config must be a JSON array");
  std::vector<FeedbackRule> out;
  std::set<std::string> ids;
  for (const auto& r : j) {
    FeedbackRule fr;
    try {
      fr.id = r.at("id").get<std::string>();
      fr.text = r.at("template").get<std::string>();
      fr.priority = r.at("priority").get<int>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("rule config: ") + e.what());
    }
    if (!ids.insert(fr.id).second) throw ConfigError("rule config: duplicate id '" + fr.id + "'");
    fr.when = clause_from_json(r, fr.id);
    if (r.contains("any_of"))
      for (const auto& c : r.at("any_of")) fr.any_of.push_back(clause_from_json(c, fr.id));
    if (r.contains("variants")) {
      for (const auto& v : r.at("variants")) {
        try {
          fr.variants.push_back({v.at("max").get<double>(), v.at("template").get<std::string>()});
        } catch (const nlohmann::json::exception& e) {
          throw ConfigError("rule '" + fr.id + "': " + e.what());
        }
      }
    }
    out.push_back(std::move(fr));
  }
  return out;
}

std::vector<FeedbackRule> read_rules(std::istream& in) {
  try {
    return rules_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("rule config: invalid JSON: ") + e.what());
  }
}

nlohmann::json to_json(const std::vector<FeedbackRule>& rules) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rules) {
    nlohmann::json j = clause_to_json(r.when);
    j["id"] = r.id;
    j["template"] = r.text;
    j["priority"] = r.priority;
    if (!r.any_of.empty()) {
      j["any_of"] = nlohmann::json::array();
      for (const auto& c : r.any_of) j["any_of"].push_back(clause_to_json(c));
    }
    if (!r.variants.empty()) {
      j["variants"] = nlohmann::json::array();
      for (const auto& v : r.variants) j["variants"].push_back({{"max", v.max_value}, {"template", v.text}});
    }
    out.push_back(std::move(j));
  }
  return out;
}

double metric_value(std::string_view metric, const ClassDistribution& dist,
                    std::span<const Label3> labels) {
  const auto& s = dist.shares;
  if (metric == "background") return s[0];
  if (metric == "technique") return s[1];
  if (metric == "observation") return s[2];
  if (metric == "spread")
    return *std::max_element(s.begin(), s.end()) - *std::min_element(s.begin(), s.end());
  if (metric == "observation_dominant") return (s[2] >= s[0] && s[2] >= s[1]) ? 1.0 : 0.0;
  if (metric == "logical_order") return in_logical_order(labels) ? 1.0 : 0.0;
  throw ConfigError("unknown rule class '" + std::string(metric) + "'");
}

std::vector<std::string> abstract_feedback(const ClassDistribution& dist, std::span<const Label3> labels,
                                           const std::vector<FeedbackRule>& rules) {
  if (labels.empty()) throw ArgumentError("abstract_feedback: no sentences");
  std::vector<const FeedbackRule*> ordered;
  for (const auto& r : rules) ordered.push_back(&r);
  std::sort(ordered.begin(), ordered.end(), [](const FeedbackRule* a, const FeedbackRule* b) {
    return std::tie(a->priority, a->id) < std::tie(b->priority, b->id);
  });

  auto holds = [&](const Clause& c, bool none_fired) {
    const double v = c.metric == "no_comment" ? (none_fired ? 1.0 : 0.0) : metric_value(c.metric, dist, labels);
    return compare(v, c.comparator, c.threshold);
  };
  auto uses_no_comment = [](const FeedbackRule& r) {
    if (r.when.metric == "no_comment") return true;
    return std::any_of(r.any_of.begin(), r.any_of.end(), [](const Clause& c) { return c.metric == "no_comment"; });
  };
  auto fires = [&](const FeedbackRule& r, bool none_fired) {
    if (!holds(r.when, none_fired)) return false;
    if (r.any_of.empty()) return true;
    return std::any_of(r.any_of.begin(), r.any_of.end(), [&](const Clause& c) { return holds(c, none_fired); });
  };
  auto wording = [&](const FeedbackRule& r) {
    if (!r.variants.empty()) {
      const double v = r.when.metric == "no_comment" ? 1.0 : metric_value(r.when.metric, dist, labels);
      for (const auto& variant : r.variants)
        if (v <= variant.max_value) return variant.text;
    }
    return r.text;
  };

  // First pass decides which ordinary rules fire; rules on no_comment are
  // evaluated against that outcome. Output keeps priority order.
  std::vector<char> fired(ordered.size(), 0);
  bool any = false;
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    if (uses_no_comment(*ordered[i])) continue;
    fired[i] = fires(*ordered[i], false) ? 1 : 0;
    any = any || fired[i];
  }
  for (std::size_t i = 0; i < ordered.size(); ++i)
    if (uses_no_comment(*ordered[i])) fired[i] = fires(*ordered[i], !any) ? 1 : 0;

  std::vector<std::string> out;
  for (std::size_t i = 0; i < ordered.size(); ++i)
    if (fired[i]) out.push_back(wording(*ordered[i]));
  if (out.empty())
    out.emplace_back("Check that the abstract gives appropriate weight to the background, techniques and observations of the paper.");
  return out;
}

// ---------------------------------------------------------------------------

FeedbackReport build_report(std::string submission_id, const MarkSheet& marks,
                            structure::LabeledAbstract labeled, const std::vector<FeedbackRule>& rules) {
  FeedbackReport r;
  r.submission_id = std::move(submission_id);
  r.marks = marks;
  const std::array<const Mark*, 4> question_marks = {&marks.q1_impact, &marks.q2_rsc, &marks.q3_acs,
                                                     &marks.q4_cited};
  for (std::size_t i = 0; i < 4; ++i) r.question_comments[i] = fixed_comment(kQuestions[i], *question_marks[i]);
  const auto labels = labeled.labels();
  r.abstract_comments = abstract_feedback(structure::distribution(labels), labels, rules);
  r.labeled_abstract = std::move(labeled);
  return r;
}

nlohmann::json to_json(const FeedbackReport& r) {
  return {{"submission_id", r.submission_id},
          {"marks", afg::to_json(r.marks)},
          {"question_comments", r.question_comments},
          {"abstract_comments", r.abstract_comments},
          {"distribution", structure::to_json(structure::distribution(r.labeled_abstract))},
          {"labeled_abstract", structure::to_json(r.labeled_abstract)}};
}

std::optional<Format> format_from_string(std::string_view s) noexcept {
  if (s == "terminal") return Format::terminal;
  if (s == "html") return Format::html;
  if (s == "markdown" || s == "md") return Format::markdown;
  return std::nullopt;
}

std::string_view file_extension(Format f) noexcept {
  switch (f) {
    case Format::terminal: return "txt";
    case Format::html: return "html";
    case Format::markdown: return "md";
  }
  return "txt";
}

std::string marks_phrase(double value) {
  return format_number(value) + (value == 1.0 ? " mark" : " marks");
}

namespace {

struct Highlight {
  std::string_view css;   // HTML background colour
  std::string_view ansi;  // terminal background + black text
  std::string_view tag;
};

Highlight highlight(Label3 l) {
  switch (l) {
    case Label3::background: return {"#FFFF00", "\x1b[30;43m", "[B]"};
    case Label3::technique: return {"#90EE90", "\x1b[30;42m", "[T]"};
    case Label3::observation: return {"#FFC0CB", "\x1b[30;45m", "[O]"};
  }
  return {"#FFFF00", "\x1b[30;43m", "[B]"};
}

constexpr std::string_view kAnsiReset = "\x1b[0m";

std::vector<std::string> mark_lines(const MarkSheet& m) {
  const std::array<const Mark*, 4> marks = {&m.q1_impact, &m.q2_rsc, &m.q3_acs, &m.q4_cited};
  std::vector<std::string> lines;
  for (std::size_t i = 0; i < 4; ++i) {
    std::string line = std::string(question_title(kQuestions[i])) + ": " + marks_phrase(marks[i]->value);
    if (is_numeric(kQuestions[i]) && marks[i]->verdict == Verdict::incorrect) line += numeric_evidence(*marks[i]);
    lines.push_back(std::move(line));
  }
  lines.push_back("Abstract: " + marks_phrase(m.abstract_mark));
  lines.push_back("Total: " + format_number(m.total) + " / 10");
  return lines;
}

std::string html_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (const char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string render_terminal(const FeedbackReport& r, const RenderOptions& opt) {
  std::ostringstream out;
  out << "Submission " << r.submission_id << "\n\nMarks\n";
  for (const auto& line : mark_lines(r.marks)) out << "  " << line << '\n';
  out << "\nComments on questions 1-4\n";
  for (const auto& c : r.question_comments) out << "  " << c << '\n';
  out << "\nFeedback\n";
  bool first = true;
  for (const auto& s : r.labeled_abstract.sentences) {
    const auto h = highlight(s.label);
    if (!first) out << (opt.color ? " " : "\n");
    first = false;
    if (opt.color)
      out << h.ansi << s.text << kAnsiReset;
    else
      out << h.tag << ' ' << s.text;
  }
  out << "\n\n";
  for (std::size_t i = 0; i < 3; ++i) {
    const auto l = structure::kLabels3[i];
    const auto h = highlight(l);
    if (i) out << ' ';
    if (opt.color)
      out << h.ansi << structure::to_string(l) << kAnsiReset;
    else
      out << h.tag << ' ' << structure::to_string(l);
  }
  out << "\n\n";
  for (const auto& c : r.abstract_comments) out << c << '\n';
  return out.str();
}

std::string render_markdown(const FeedbackReport& r) {
  std::ostringstream out;
  out << "# Feedback for submission " << r.submission_id << "\n\n## Marks\n\n";
  for (const auto& line : mark_lines(r.marks)) out << "- " << line << '\n';
  out << "\n## Comments on questions 1-4\n\n";
  for (const auto& c : r.question_comments) out << "- " << c << '\n';
  out << "\n## Feedback\n\n";
  for (const auto& s : r.labeled_abstract.sentences)
    out << "- **[" << structure::to_string(s.label) << "]** " << s.text << '\n';
  out << "\nLegend: **[BACKGROUND]** yellow, **[TECHNIQUE]** green, **[OBSERVATION]** pink\n\n";
  out << "### Comments on the abstract\n\n";
  for (const auto& c : r.abstract_comments) out << "- " << c << '\n';
  return out.str();
}

std::string render_html(const FeedbackReport& r) {
  std::ostringstream out;
  out << "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<title>Feedback for submission "
      << html_escape(r.submission_id) << "</title>\n</head>\n"
      << "<body style=\"font-family:sans-serif;max-width:48em;margin:2em auto;line-height:1.5\">\n"
      << "<h1>Feedback for submission " << html_escape(r.submission_id) << "</h1>\n<h2>Marks</h2>\n<p>\n";
  for (const auto& line : mark_lines(r.marks)) out << html_escape(line) << "<br>\n";
  out << "</p>\n<h2>Comments on questions 1-4</h2>\n<ul>\n";
  for (const auto& c : r.question_comments) out << "<li>" << html_escape(c) << "</li>\n";
  out << "</ul>\n<h2>Feedback</h2>\n<p>\n";
  for (const auto& s : r.labeled_abstract.sentences) {
    out << "<span class=\"sentence\" data-label=\"" << structure::to_string(s.label)
        << "\" style=\"background-color:" << highlight(s.label).css << "\">" << html_escape(s.text)
        << "</span>\n";
  }
  out << "</p>\n<p>\n";
  for (const auto l : structure::kLabels3)
    out << "<span class=\"legend\" style=\"background-color:" << highlight(l).css << "\">"
        << structure::to_string(l) << "</span>\n";
  out << "</p>\n<p>\n";
  for (const auto& c : r.abstract_comments) out << html_escape(c) << "<br>\n";
  out << "</p>\n</body>\n</html>\n";
  return out.str();
}

}  // namespace

std::string render_report(const FeedbackReport& report, Format format, const RenderOptions& options) {
  switch (format) {
    case Format::terminal: return render_terminal(report, options);
    case Format::html: return render_html(report);
    case Format::markdown: return render_markdown(report);
  }
  return {};
}

}  // namespace afg::feedback
