#include "afg/marks.hpp"

#include <array>
#include <charconv>
#include <cmath>

#include "afg/error.hpp"

namespace afg {

std::string_view to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::incorrect: return "incorrect";
    case Verdict::partially_correct: return "partially_correct";
    case Verdict::fully_correct: return "fully_correct";
  }
  return "incorrect";
}

Mark make_mark(Verdict verdict, std::string evidence) {
  Mark m;
  m.verdict = verdict;
  switch (verdict) {
    case Verdict::incorrect: m.value = 0.0; break;
    case Verdict::partially_correct: m.value = 0.5; break;
    case Verdict::fully_correct: m.value = 1.0; break;
  }
  m.evidence = std::move(evidence);
  return m;
}

Verdict verdict_for_value(double value) {
  if (value == 1.0) return Verdict::fully_correct;
  if (value == 0.5) return Verdict::partially_correct;
  if (value == 0.0) return Verdict::incorrect;
  throw ArgumentError("question mark must be 0, 0.5 or 1, got " + format_number(value));
}

void finalize(MarkSheet& sheet) {
  if (sheet.abstract_mark < 0 || sheet.abstract_mark > 6)
    throw ArgumentError("abstract mark must be in [0, 6]");
  sheet.total = sheet.questions_total() + sheet.abstract_mark;
}

std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc{}) return std::to_string(v);
  return std::string(buf.data(), ptr);
}

nlohmann::json to_json(const Mark& m) {
  nlohmann::json j = {{"value", m.value}, {"verdict", std::string(to_string(m.verdict))},
                      {"evidence", m.evidence}};
  if (!m.expected.empty()) j["expected"] = m.expected;
  if (!m.given.empty()) j["given"] = m.given;
  return j;
}

nlohmann::json to_json(const MarkSheet& s) {
  return {{"q1_impact", to_json(s.q1_impact)}, {"q2_rsc", to_json(s.q2_rsc)},
          {"q3_acs", to_json(s.q3_acs)},       {"q4_cited", to_json(s.q4_cited)},
          {"abstract_mark", s.abstract_mark},  {"total", s.total}};
}

namespace {

Mark mark_from_json(const nlohmann::json& j, const char* name) {
  if (!j.contains(name)) throw DataError(std::string("marks: missing field '") + name + "'");
  const auto& e = j.at(name);
  Mark m;
  if (e.is_number()) {
    m = make_mark(verdict_for_value(e.get<double>()));
  } else if (e.is_object()) {
    m = make_mark(verdict_for_value(e.at("value").get<double>()), e.value("evidence", ""));
    m.expected = e.value("expected", "");
    m.given = e.value("given", "");
  } else {
    throw DataError(std::string("marks: field '") + name + "' must be a number or object");
  }
  return m;
}

}  // namespace

MarkSheet marksheet_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw DataError("marks must be a JSON object");
  MarkSheet s;
  try {
    s.q1_impact = mark_from_json(j, "q1_impact");
    s.q2_rsc = mark_from_json(j, "q2_rsc");
    s.q3_acs = mark_from_json(j, "q3_acs");
    s.q4_cited = mark_from_json(j, "q4_cited");
    if (!j.contains("abstract_mark")) throw DataError("marks: missing field 'abstract_mark'");
    s.abstract_mark = j.at("abstract_mark").get<int>();
    finalize(s);
  } catch (const ArgumentError& e) {
    throw DataError(std::string("marks: ") + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("marks: ") + e.what());
  }
  return s;
}

}  // namespace afg
