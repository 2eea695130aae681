#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"

namespace afg {

enum class Verdict { incorrect, partially_correct, fully_correct };

std::string_view to_string(Verdict v) noexcept;

// One 0 / 0.5 / 1 mark for a factual question. `expected` and `given` are
// display forms of the key and the student's answer; `evidence` records the
// statistic the band was chosen from.
struct Mark {
  double value = 0.0;
  Verdict verdict = Verdict::incorrect;
  std::string evidence;
  std::string expected;
  std::string given;

  bool operator==(const Mark&) const = default;
};

// value 1 <-> fully_correct, 0.5 <-> partially_correct, 0 <-> incorrect.
Mark make_mark(Verdict verdict, std::string evidence = {});

// Inverse of make_mark; throws ArgumentError for values outside {0, 0.5, 1}.
Verdict verdict_for_value(double value);

struct MarkSheet {
  Mark q1_impact;
  Mark q2_rsc;
  Mark q3_acs;
  Mark q4_cited;
  int abstract_mark = 0;
  double total = 0.0;

  // Question marks only, i.e. total without the abstract.
  double questions_total() const noexcept {
    return q1_impact.value + q2_rsc.value + q3_acs.value + q4_cited.value;
  }

  bool operator==(const MarkSheet&) const = default;
};

// Recomputes `total` from the parts and checks the 10-mark ceiling.
void finalize(MarkSheet& sheet);

nlohmann::json to_json(const Mark& m);
nlohmann::json to_json(const MarkSheet& s);

// Accepts the to_json layout, and also a shorthand where each question is a
// bare number (used for human marks in submission files).
MarkSheet marksheet_from_json(const nlohmann::json& j);

// Shortest decimal text that round-trips the value ("42", "6.005", "0.5").
std::string format_number(double v);

}  // namespace afg
