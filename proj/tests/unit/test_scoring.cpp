#include "doctest.h"

#include "afg/error.hpp"
#include "afg/rng.hpp"
#include "afg/scoring.hpp"
#include "fixtures.hpp"

using namespace afg;
using namespace afg::scoring;

namespace {

// ACS key with every author swapped for an unrelated name; title, journal,
// year, volume and pages kept.
const char* kAcsOtherAuthors =
    "Smith, B.; Jones, C.; Brown, D.; Taylor, E.-F. Well-Defined Phosphine-Free Iron-Catalyzed "
    "N-Ethylation and N-Methylation of Amines with Ethanol and Methanol. Organic Letters 2018, 20 (19), "
    "5985–5990.";

}  // namespace

TEST_CASE("numeric marks") {
  const auto wrong = score_numeric(10, 42);
  CHECK(wrong.value == 0.0);
  CHECK(wrong.verdict == Verdict::incorrect);
  CHECK(wrong.evidence == "percentage difference 76.19%");
  CHECK(wrong.expected == "42");
  CHECK(wrong.given == "10");
  CHECK(score_numeric(6.005, 6.005).value == 1.0);
  CHECK(score_numeric(88, 100).value == 0.5);
  CHECK(percentage_difference(88, 100) == doctest::Approx(12.0));
  CHECK_THROWS_AS(score_numeric(1, 0), DegenerateError);
}

TEST_CASE("numeric band edges") {
  CHECK(numeric_band(9.999) == Verdict::fully_correct);
  CHECK(numeric_band(10.0) == Verdict::fully_correct);
  CHECK(numeric_band(10.001) == Verdict::partially_correct);
  CHECK(numeric_band(25.0) == Verdict::partially_correct);
  CHECK(numeric_band(25.001) == Verdict::incorrect);
  CHECK(score_numeric(1100, 1000).value == 1.0);
  CHECK(score_numeric(1250, 1000).value == 0.5);
  CHECK(score_numeric(750, 1000).value == 0.5);
  CHECK(score_numeric(749, 1000).value == 0.0);
}

TEST_CASE("numeric band is symmetric in the sign of the error") {
  SplitMix64 rng(2);
  for (int i = 0; i < 1000; ++i) {
    const double correct = rng.uniform(0.5, 500.0);
    const double x = rng.uniform(0.0, 0.5);
    CHECK(score_numeric(correct * (1 + x), correct).verdict == score_numeric(correct * (1 - x), correct).verdict);
  }
}

TEST_CASE("similarity band edges") {
  CHECK(similarity_band(0.6499) == Verdict::incorrect);
  CHECK(similarity_band(0.65) == Verdict::partially_correct);
  CHECK(similarity_band(0.8999) == Verdict::partially_correct);
  CHECK(similarity_band(0.9) == Verdict::fully_correct);
  CHECK(similarity_band(0.9001) == Verdict::fully_correct);
  CHECK(similarity_band(0.0) == Verdict::incorrect);
  CHECK(similarity_band(1.0) == Verdict::fully_correct);
}

TEST_CASE("custom thresholds move the edges") {
  Thresholds t;
  t.numeric_full = 5;
  t.similarity_partial = 0.5;
  CHECK(numeric_band(6, t) == Verdict::partially_correct);
  CHECK(similarity_band(0.55, t) == Verdict::partially_correct);
}

TEST_CASE("reference marks") {
  const auto key = testing::example2_key();
  const auto same = score_reference(key.ref_acs, key.ref_acs);
  CHECK(same.value == 1.0);
  CHECK(same.evidence == "cosine similarity 1.0000");
  CHECK(score_reference("Completely unrelated words", key.ref_rsc).value == 0.0);
  const auto partial = score_reference(kAcsOtherAuthors, key.ref_acs);
  CHECK(partial.verdict == Verdict::partially_correct);
  // Frozen from an independent term-count oracle.
  CHECK(partial.evidence == "cosine similarity 0.7004");
  CHECK_THROWS_AS(score_reference("", key.ref_acs), ArgumentError);
  CHECK_THROWS_AS(score_reference("x", ""), ArgumentError);
}

TEST_CASE("abstract mark rounding") {
  CHECK(abstract_mark(1.0) == 6);
  CHECK(abstract_mark(0.5) == 3);
  CHECK(abstract_mark(0.49) == 3);
  CHECK(abstract_mark(0.0) == 0);
  CHECK(abstract_mark(0.25) == 2);
  CHECK(abstract_mark(1.0 / 12.0) == 1);
  CHECK_THROWS_AS(abstract_mark(1.01), ArgumentError);
  CHECK_THROWS_AS(abstract_mark(-0.1), ArgumentError);
  CHECK_THROWS_AS(abstract_mark(std::nan("")), ArgumentError);
}

TEST_CASE("worked submission marks") {
  const auto sheet = mark_submission(testing::example2_submission(), testing::example2_key(), testing::FixedScorer(0.5));
  CHECK(sheet.q1_impact.value == 1.0);
  CHECK(sheet.q2_rsc.value == 1.0);
  CHECK(sheet.q3_acs.value == 1.0);
  CHECK(sheet.q4_cited.value == 0.0);
  CHECK(sheet.abstract_mark == 3);
  CHECK(sheet.total == 6.0);
}

TEST_CASE("perfect and hopeless submissions") {
  auto sub = testing::example2_submission();
  sub.times_cited = 42;
  CHECK(mark_submission(sub, testing::example2_key(), testing::FixedScorer(1.0)).total == 10.0);

  sub.impact_factor = 100;
  sub.times_cited = 1000;
  sub.ref_rsc = "nothing alike";
  sub.ref_acs = "zzz";
  const auto zero = mark_submission(sub, testing::example2_key(), testing::FixedScorer(0.0));
  CHECK(zero.total == 0.0);
}

TEST_CASE("mark_submission is reproducible and checks the paper id") {
  const auto sub = testing::example2_submission();
  const testing::FixedScorer scorer(0.7);
  CHECK(mark_submission(sub, testing::example2_key(), scorer) == mark_submission(sub, testing::example2_key(), scorer));
  auto other = testing::example2_key();
  other.paper_id = "other";
  CHECK_THROWS_AS(mark_submission(sub, other, scorer), KeyMismatchError);
}

TEST_CASE("neural scorer wiring") {
  const auto vocab = text::build_vocab(std::vector<std::string>{testing::kExample2Abstract}, 60);
  nn::EncoderConfig c;
  c.vocab_size = vocab.size();
  c.embed_dim = c.hidden_dim = c.attention_dim = 4;
  const NeuralAbstractScorer scorer(nn::init_model(c), vocab);
  const double s = scorer.score01(testing::kExample2Abstract);
  CHECK(s > 0.0);
  CHECK(s < 1.0);
  c.vocab_size += 1;
  CHECK_THROWS_AS(NeuralAbstractScorer(nn::init_model(c), vocab), ConfigError);
  c.vocab_size -= 1;
  c.head = nn::HeadKind::classification;
  CHECK_THROWS_AS(NeuralAbstractScorer(nn::init_model(c), vocab), ArgumentError);
}
