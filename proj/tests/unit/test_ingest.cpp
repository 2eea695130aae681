#include "doctest.h"

#include <set>
#include <sstream>

#include "afg/error.hpp"
#include "afg/ingest.hpp"
#include "fixtures.hpp"

using namespace afg;
using namespace afg::ingest;

namespace {

ScoreRanges ranges() { return score_ranges_from_json(nlohmann::json::parse(R"({"1": [0, 6], "2": [2, 12]})")); }

std::vector<RawSample> parse(const std::string& tsv, const ColumnMap& cols = {}) {
  std::istringstream in(tsv);
  return parse_scored_tsv(in, cols, ranges());
}

}  // namespace

TEST_CASE("parse_scored_tsv maps fields") {
  const auto rows = parse("id\tset\tessay\tscore\n1\t1\tSome text\t4\n");
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].sample_id == "1");
  CHECK(rows[0].prompt_id == "1");
  CHECK(rows[0].text == "Some text");
  CHECK(rows[0].raw_score == 4.0);
  CHECK(rows[0].min_score == 0.0);
  CHECK(rows[0].max_score == 6.0);
}

TEST_CASE("parse_scored_tsv keeps file order and ignores extra columns") {
  const auto rows = parse("rater\tid\tset\tessay\tscore\nx\ta\t1\tA\t1\ny\tb\t2\tB\t7\nz\tc\t1\tC\t6\n");
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].sample_id == "a");
  CHECK(rows[1].sample_id == "b");
  CHECK(rows[2].sample_id == "c");
  CHECK(rows[1].max_score == 12.0);
}

TEST_CASE("parse_scored_tsv honours a custom column map") {
  ColumnMap cols{"essay_id", "essay_set", "essay", "domain1_score"};
  const auto rows = parse("essay_id\tessay_set\tessay\tdomain1_score\n9\t2\tText\t3\n", cols);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].sample_id == "9");
}

TEST_CASE("parse_scored_tsv errors") {
  CHECK_THROWS_AS(parse(""), DataError);
  CHECK_THROWS_WITH_AS(parse("id\tset\ttext\tscore\n"), doctest::Contains("essay"), ConfigError);
  try {
    parse("id\tset\tessay\tscore\n1\t1\tA\t3\n2\t1\tB\t7\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  try {
    parse("id\tset\tessay\tscore\n1\t1\tA\tfour\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse("id\tset\tessay\tscore\n1\t9\tA\t1\n"), ConfigError);
  CHECK_THROWS_AS(parse("id\tset\tessay\tscore\n1\t1\t\t1\n"), ParseError);
}

TEST_CASE("score range config validation") {
  CHECK_THROWS_AS(score_ranges_from_json(nlohmann::json::parse(R"({"1": [5, 1]})")), ConfigError);
  CHECK_THROWS_AS(score_ranges_from_json(nlohmann::json::parse(R"({"1": [5]})")), ConfigError);
  CHECK_THROWS_AS(score_ranges_from_json(nlohmann::json::parse(R"([1, 2])")), ConfigError);
}

TEST_CASE("normalize_scores") {
  std::vector<RawSample> raw = {{"a", "1", "t", 3, 0, 6}, {"b", "1", "t", 6, 0, 6}, {"c", "2", "t", 7, 2, 12},
                                {"d", "1", "t", 0, 0, 6}};
  const auto n = normalize_scores(raw);
  CHECK(n[0].score01 == 0.5);
  CHECK(n[1].score01 == 1.0);
  CHECK(n[2].score01 == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(n[3].score01 == 0.0);

  std::vector<RawSample> flat = {{"a", "p", "t", 3, 3, 3}};
  CHECK_THROWS_WITH_AS(normalize_scores(flat), doctest::Contains("'p'"), DegenerateError);
}

TEST_CASE("parse_rct minimal and separators") {
  std::istringstream one("###42\nBACKGROUND\tA.\nRESULT\tB.\n\n");
  const auto a = parse_rct(one);
  REQUIRE(a.size() == 1);
  CHECK(a[0].abstract_id == "42");
  REQUIRE(a[0].sentences.size() == 2);
  CHECK(a[0].sentences[0].label == Label5::background);
  CHECK(a[0].sentences[1].label == Label5::result);

  std::istringstream two("###1\nMETHODS\tM.\n\n###2\nCONCLUSIONS\tC.\nOBJECTIVE\tO.\n");
  const auto b = parse_rct(two);
  REQUIRE(b.size() == 2);
  CHECK(b[0].sentences[0].label == Label5::method);
  CHECK(b[1].sentences[0].label == Label5::conclusion);
  CHECK(b[1].sentences[1].label == Label5::objective);
}

TEST_CASE("parse_rct errors") {
  std::istringstream bad_label("###1\nFOO\tX.\n");
  CHECK_THROWS_WITH_AS(parse_rct(bad_label), doctest::Contains("FOO"), ParseError);
  std::istringstream orphan("BACKGROUND\tX.\n");
  CHECK_THROWS_AS(parse_rct(orphan), ParseError);
  std::istringstream empty_abstract("###1\n\n###2\nRESULT\tY.\n");
  CHECK_THROWS_AS(parse_rct(empty_abstract), ParseError);
  std::istringstream no_tab("###1\nRESULT Y.\n");
  CHECK_THROWS_AS(parse_rct(no_tab), ParseError);
  try {
    std::istringstream in("###1\nRESULT\tok.\nBAD\tx.\n");
    parse_rct(in);
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("serialize_rct round trip") {
  const auto corpus = testing::synthetic_rct(300, 17);
  const auto text = serialize_rct(corpus);
  std::istringstream in(text);
  CHECK(parse_rct(in) == corpus);
}

TEST_CASE("label names") {
  CHECK(to_string(Label5::method) == "METHOD");
  CHECK(parse_label5("RESULTS") == Label5::result);
  CHECK(parse_label5("OBJECTIVE") == Label5::objective);
  CHECK_FALSE(parse_label5("method").has_value());
}

TEST_CASE("split cardinality, disjointness and determinism") {
  std::vector<int> v(10);
  std::iota(v.begin(), v.end(), 0);
  const auto s = split(v, 0.8, 7);
  CHECK(s.train.size() == 8);
  CHECK(s.eval.size() == 2);
  std::set<int> all(s.train.begin(), s.train.end());
  for (int x : s.eval) CHECK(all.insert(x).second);
  CHECK(all.size() == 10);
  const auto again = split(v, 0.8, 7);
  CHECK(again.train == s.train);
  CHECK(again.eval == s.eval);
  CHECK(split(v, 0.8, 8).train != s.train);
}

TEST_CASE("split of 20k at 0.9 is 18k / 2k") {
  std::vector<int> v(20000);
  std::iota(v.begin(), v.end(), 0);
  const auto s = split(std::move(v), 0.9, 1);
  CHECK(s.train.size() == 18000);
  CHECK(s.eval.size() == 2000);
}

TEST_CASE("split argument errors") {
  std::vector<int> v = {1, 2, 3};
  CHECK_THROWS_AS(split(v, 0.0, 1), ArgumentError);
  CHECK_THROWS_AS(split(v, 1.0, 1), ArgumentError);
  CHECK_THROWS_AS(split(std::vector<int>{1}, 0.5, 1), ArgumentError);
  CHECK(train_count(5, 0.5) == 3);
}

namespace {

Submission sub(std::string id, std::string paper, double impact, std::int64_t cited, std::string rsc = "R",
               std::string acs = "A") {
  Submission s;
  s.submission_id = std::move(id);
  s.paper_id = std::move(paper);
  s.impact_factor = impact;
  s.times_cited = cited;
  s.ref_rsc = std::move(rsc);
  s.ref_acs = std::move(acs);
  s.abstract = "Text.";
  return s;
}

}  // namespace

TEST_CASE("derive_answer_key takes the mode") {
  std::vector<Submission> subs = {sub("1", "p", 6.005, 42), sub("2", "p", 6.005, 42), sub("3", "p", 5.0, 10),
                                  sub("4", "q", 1.0, 1)};
  const auto k = derive_answer_key(subs, "p");
  CHECK(k.key.paper_id == "p");
  CHECK(k.key.times_cited == 42);
  CHECK(k.key.impact_factor == 6.005);
  CHECK(k.warnings.empty());
}

TEST_CASE("derive_answer_key of a single submission") {
  std::vector<Submission> subs = {sub("1", "p", 2.5, 7, "Ref one.", "Ref two.")};
  const auto k = derive_answer_key(subs, "p").key;
  CHECK(k == AnswerKey{"p", 2.5, "Ref one.", "Ref two.", 7});
}

TEST_CASE("derive_answer_key tie goes to smallest with a warning") {
  std::vector<Submission> subs = {sub("1", "p", 1, 9), sub("2", "p", 1, 5), sub("3", "p", 1, 9),
                                  sub("4", "p", 1, 5)};
  const auto k = derive_answer_key(subs, "p");
  CHECK(k.key.times_cited == 5);
  REQUIRE(k.warnings.size() == 1);
  CHECK(k.warnings[0].find("times_cited") != std::string::npos);
}

TEST_CASE("derive_answer_key compares references canonically") {
  std::vector<Submission> subs = {sub("1", "p", 1, 1, "A.  Smith,  J. Chem., 2018"),
                                  sub("2", "p", 1, 1, "A. Smith, J. Chem., 2018."),
                                  sub("3", "p", 1, 1, "B. Jones, J. Chem., 2018")};
  const auto k = derive_answer_key(subs, "p");
  CHECK(k.key.ref_rsc == "A.  Smith,  J. Chem., 2018");
  CHECK(k.warnings.empty());
  CHECK(canonical_reference("  a \t b.  ") == "a b");
  CHECK_THROWS_AS(derive_answer_key(subs, "missing"), NotFoundError);
}

TEST_CASE("derive_answer_key never synthesizes values") {
  SplitMix64 rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Submission> subs;
    const auto n = 1 + rng.below(8);
    std::set<std::int64_t> cited;
    for (std::uint64_t i = 0; i < n; ++i) {
      subs.push_back(sub(std::to_string(i), "p", 1.0 + static_cast<double>(rng.below(3)),
                         static_cast<std::int64_t>(rng.below(4))));
      cited.insert(subs.back().times_cited);
    }
    CHECK(cited.contains(derive_answer_key(subs, "p").key.times_cited));
  }
}

TEST_CASE("submission and key json") {
  const auto j = nlohmann::json::parse(R"([
    {"submission_id": "s1", "paper_id": "p", "impact_factor": 6.005, "ref_rsc": "R", "ref_acs": "A",
     "times_cited": 10, "abstract": "Text.",
     "human_marks": {"q1_impact": 1, "q2_rsc": 1, "q3_acs": 1, "q4_cited": 0, "abstract_mark": 3}}
  ])");
  const auto subs = submissions_from_json(j);
  REQUIRE(subs.size() == 1);
  CHECK(subs[0].times_cited == 10);
  REQUIRE(subs[0].human_marks.has_value());
  CHECK(subs[0].human_marks->total == 6.0);
  const auto back = submissions_from_json(nlohmann::json::array({to_json(subs[0])}));
  CHECK(back[0].abstract == subs[0].abstract);
  CHECK(back[0].human_marks == subs[0].human_marks);

  const auto keys = answer_keys_from_json(nlohmann::json::array({to_json(testing::example2_key())}));
  CHECK(keys.at(0) == testing::example2_key());
}

TEST_CASE("submission validation") {
  auto bad = [](const char* text) { return submissions_from_json(nlohmann::json::parse(text)); };
  CHECK_THROWS_AS(bad(R"({})"), DataError);
  CHECK_THROWS_AS(bad(R"([{"submission_id": "s"}])"), DataError);
  CHECK_THROWS_AS(bad(R"([{"submission_id": "s", "paper_id": "p", "impact_factor": 0, "ref_rsc": "R",
                           "ref_acs": "A", "times_cited": 1, "abstract": "T."}])"),
                  DataError);
  CHECK_THROWS_AS(bad(R"([{"submission_id": "s", "paper_id": "p", "impact_factor": 1, "ref_rsc": "R",
                           "ref_acs": "A", "times_cited": -1, "abstract": "T."}])"),
                  DataError);
  CHECK_THROWS_AS(bad(R"([{"submission_id": "s", "paper_id": "p", "impact_factor": 1, "ref_rsc": "R",
                           "ref_acs": "A", "times_cited": 1, "abstract": ""}])"),
                  DataError);
  const auto key = to_json(testing::example2_key());
  CHECK_THROWS_AS(answer_keys_from_json(nlohmann::json::array({key, key})), DataError);
  std::istringstream garbage("not json");
  CHECK_THROWS_AS(read_submissions(garbage), DataError);
}
