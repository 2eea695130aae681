#include "afg/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <sstream>
#include <unordered_map>

namespace afg::ingest {

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find('\t', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

std::optional<double> parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ')) s.remove_suffix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace

ScoreRanges score_ranges_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("score ranges must be an object of prompt -> [min, max]");
  ScoreRanges out;
  for (const auto& [prompt, range] : j.items()) {
    if (!range.is_array() || range.size() != 2 || !range[0].is_number() || !range[1].is_number())
      throw ConfigError("score range for prompt '" + prompt + "' must be [min, max]");
    ScoreRange r{range[0].get<double>(), range[1].get<double>()};
    if (r.min > r.max) throw ConfigError("score range for prompt '" + prompt + "' has min > max");
    out.emplace(prompt, r);
  }
  return out;
}

std::vector<RawSample> parse_scored_tsv(std::istream& in, const ColumnMap& columns,
                                        const ScoreRanges& ranges) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("scored corpus: empty input");
  strip_cr(line);
  const auto header = split_tabs(line);
  auto column_index = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ConfigError("scored corpus: missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t id_col = column_index(columns.id);
  const std::size_t prompt_col = column_index(columns.prompt);
  const std::size_t text_col = column_index(columns.text);
  const std::size_t score_col = column_index(columns.score);

  std::vector<RawSample> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != header.size())
      throw ParseError(line_no, "expected " + std::to_string(header.size()) + " fields, found " +
                                    std::to_string(fields.size()));
    RawSample s;
    s.sample_id = std::string(fields[id_col]);
    s.prompt_id = std::string(fields[prompt_col]);
    s.text = std::string(fields[text_col]);
    if (s.text.find_first_not_of(" \t") == std::string::npos)
      throw ParseError(line_no, "empty text");
    const auto score = parse_double(fields[score_col]);
    if (!score) throw ParseError(line_no, "unparseable score '" + std::string(fields[score_col]) + "'");
    const auto range = ranges.find(s.prompt_id);
    if (range == ranges.end())
      throw ConfigError("scored corpus: no score range configured for prompt '" + s.prompt_id + "'");
    s.raw_score = *score;
    s.min_score = range->second.min;
    s.max_score = range->second.max;
    if (s.raw_score < s.min_score || s.raw_score > s.max_score)
      throw ParseError(line_no, "score " + format_number(s.raw_score) + " outside range [" +
                                    format_number(s.min_score) + ", " + format_number(s.max_score) +
                                    "]");
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<NormalizedSample> normalize_scores(std::span<const RawSample> samples) {
  std::vector<NormalizedSample> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    if (s.max_score == s.min_score)
      throw DegenerateError("degenerate score range for prompt '" + s.prompt_id + "'");
    if (s.raw_score < s.min_score || s.raw_score > s.max_score || s.min_score > s.max_score)
      throw ArgumentError("sample '" + s.sample_id + "' violates min <= raw <= max");
    const double score = (s.raw_score - s.min_score) / (s.max_score - s.min_score);
    out.push_back({s.sample_id, s.prompt_id, s.text, score});
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string_view to_string(Label5 label) noexcept {
  switch (label) {
    case Label5::background: return "BACKGROUND";
    case Label5::objective: return "OBJECTIVE";
    case Label5::method: return "METHOD";
    case Label5::result: return "RESULT";
    case Label5::conclusion: return "CONCLUSION";
  }
  return "BACKGROUND";
}

std::optional<Label5> parse_label5(std::string_view name) noexcept {
  if (name == "BACKGROUND") return Label5::background;
  if (name == "OBJECTIVE") return Label5::objective;
  if (name == "METHOD" || name == "METHODS") return Label5::method;
  if (name == "RESULT" || name == "RESULTS") return Label5::result;
  if (name == "CONCLUSION" || name == "CONCLUSIONS") return Label5::conclusion;
  return std::nullopt;
}

std::vector<RctAbstract> parse_rct(std::istream& in) {
  std::vector<RctAbstract> out;
  std::optional<RctAbstract> current;
  std::size_t opened_at = 0;
  auto close = [&] {
    if (!current) return;
    if (current->sentences.empty())
      throw ParseError(opened_at, "abstract '" + current->abstract_id + "' has no sentences");
    out.push_back(std::move(*current));
    current.reset();
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.find_first_not_of(" \t") == std::string::npos) {
      close();
      continue;
    }
    if (line.rfind("###", 0) == 0) {
      close();
      current = RctAbstract{line.substr(3), {}};
      opened_at = line_no;
      continue;
    }
    if (!current) throw ParseError(line_no, "sentence line before any '###' header");
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(line_no, "expected '<LABEL>\\t<sentence>'");
    const std::string_view name(line.data(), tab);
    const auto label = parse_label5(name);
    if (!label) throw ParseError(line_no, "unknown label '" + std::string(name) + "'");
    std::string text = line.substr(tab + 1);
    if (text.find_first_not_of(" \t") == std::string::npos)
      throw ParseError(line_no, "empty sentence");
    current->sentences.push_back({*label, std::move(text)});
  }
  close();
  return out;
}

std::string serialize_rct(std::span<const RctAbstract> abstracts) {
  std::string out;
  for (const auto& a : abstracts) {
    out += "###";
    out += a.abstract_id;
    out += '\n';
    for (const auto& s : a.sentences) {
      out += to_string(s.label);
      out += '\t';
      out += s.text;
      out += '\n';
    }
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

template <typename T>
T required(const nlohmann::json& obj, const char* key, std::size_t index) {
  if (!obj.contains(key))
    throw DataError("record " + std::to_string(index) + ": missing field '" + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw DataError("record " + std::to_string(index) + ": field '" + key + "' has the wrong type");
  }
}

nlohmann::json parse_stream(std::istream& in, const char* what) {
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string(what) + ": invalid JSON: " + e.what());
  }
}

}  // namespace

std::vector<Submission> submissions_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw DataError("submission file must be a JSON array");
  std::vector<Submission> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& o = j[i];
    if (!o.is_object()) throw DataError("record " + std::to_string(i) + ": not an object");
    Submission s;
    s.submission_id = required<std::string>(o, "submission_id", i);
    s.paper_id = required<std::string>(o, "paper_id", i);
    s.impact_factor = required<double>(o, "impact_factor", i);
    s.ref_rsc = required<std::string>(o, "ref_rsc", i);
    s.ref_acs = required<std::string>(o, "ref_acs", i);
    s.times_cited = required<std::int64_t>(o, "times_cited", i);
    s.abstract = required<std::string>(o, "abstract", i);
    if (!(s.impact_factor > 0.0))
      throw DataError("submission '" + s.submission_id + "': impact_factor must be > 0");
    if (s.times_cited < 0)
      throw DataError("submission '" + s.submission_id + "': times_cited must be >= 0");
    if (s.abstract.find_first_not_of(" \t\r\n") == std::string::npos)
      throw DataError("submission '" + s.submission_id + "': empty abstract");
    if (o.contains("human_marks") && !o.at("human_marks").is_null())
      s.human_marks = marksheet_from_json(o.at("human_marks"));
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Submission> read_submissions(std::istream& in) {
  return submissions_from_json(parse_stream(in, "submission file"));
}

nlohmann::json to_json(const Submission& s) {
  nlohmann::json j = {{"submission_id", s.submission_id}, {"paper_id", s.paper_id},
                      {"impact_factor", s.impact_factor}, {"ref_rsc", s.ref_rsc},
                      {"ref_acs", s.ref_acs},             {"times_cited", s.times_cited},
                      {"abstract", s.abstract}};
  if (s.human_marks) j["human_marks"] = afg::to_json(*s.human_marks);
  return j;
}

std::vector<AnswerKey> answer_keys_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw DataError("answer-key file must be a JSON array");
  std::vector<AnswerKey> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& o = j[i];
    AnswerKey k;
    k.paper_id = required<std::string>(o, "paper_id", i);
    k.impact_factor = required<double>(o, "impact_factor", i);
    k.ref_rsc = required<std::string>(o, "ref_rsc", i);
    k.ref_acs = required<std::string>(o, "ref_acs", i);
    k.times_cited = required<std::int64_t>(o, "times_cited", i);
    for (const auto& prev : out)
      if (prev.paper_id == k.paper_id)
        throw DataError("answer-key file: duplicate key for paper '" + k.paper_id + "'");
    out.push_back(std::move(k));
  }
  return out;
}

std::vector<AnswerKey> read_answer_keys(std::istream& in) {
  return answer_keys_from_json(parse_stream(in, "answer-key file"));
}

nlohmann::json to_json(const AnswerKey& k) {
  return {{"paper_id", k.paper_id}, {"impact_factor", k.impact_factor}, {"ref_rsc", k.ref_rsc},
          {"ref_acs", k.ref_acs},   {"times_cited", k.times_cited}};
}

std::string canonical_reference(std::string_view ref) {
  std::string out;
  bool pending_space = false;
  for (const char c : ref) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += c;
  }
  if (!out.empty() && out.back() == '.') out.pop_back();
  return out;
}

namespace {

// Mode of `values` with ties resolved by operator< (smallest wins). Sets
// `tied` when more than one value reaches the top count.
template <typename T>
T mode_of(const std::vector<T>& values, bool& tied) {
  std::map<T, std::size_t> counts;
  for (const auto& v : values) ++counts[v];
  auto best = counts.begin();
  tied = false;
  for (auto it = std::next(counts.begin()); it != counts.end(); ++it) {
    if (it->second > best->second) {
      best = it;
      tied = false;
    } else if (it->second == best->second) {
      tied = true;
    }
  }
  return best->first;
}

}  // namespace

DerivedKey derive_answer_key(std::span<const Submission> submissions, std::string_view paper_id) {
  std::vector<const Submission*> matching;
  for (const auto& s : submissions)
    if (s.paper_id == paper_id) matching.push_back(&s);
  if (matching.empty())
    throw NotFoundError("no submissions for paper '" + std::string(paper_id) + "'");

  std::vector<double> impact;
  std::vector<std::int64_t> cited;
  std::vector<std::string> rsc, acs;
  for (const auto* s : matching) {
    impact.push_back(s->impact_factor);
    cited.push_back(s->times_cited);
    rsc.push_back(canonical_reference(s->ref_rsc));
    acs.push_back(canonical_reference(s->ref_acs));
  }

  DerivedKey out;
  out.key.paper_id = std::string(paper_id);
  auto note = [&](bool tied, const char* field) {
    if (tied)
      out.warnings.push_back("paper '" + std::string(paper_id) + "': tied mode for " + field +
                             ", smallest value chosen");
  };
  bool tied = false;
  out.key.impact_factor = mode_of(impact, tied);
  note(tied, "impact_factor");
  out.key.times_cited = mode_of(cited, tied);
  note(tied, "times_cited");

  // Counting happens on canonical forms; the key keeps the first raw form
  // seen for the winning canonical string.
  auto pick_reference = [&](const std::vector<std::string>& canon, auto member, const char* field) {
    const std::string winner = mode_of(canon, tied);
    note(tied, field);
    for (std::size_t i = 0; i < canon.size(); ++i)
      if (canon[i] == winner) return matching[i]->*member;
    return winner;
  };
  out.key.ref_rsc = pick_reference(rsc, &Submission::ref_rsc, "ref_rsc");
  out.key.ref_acs = pick_reference(acs, &Submission::ref_acs, "ref_acs");
  return out;
}

std::size_t train_count(std::size_t n, double fraction) {
  return static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
}

}  // namespace afg::ingest
