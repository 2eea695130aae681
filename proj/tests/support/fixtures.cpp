#include "fixtures.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "afg/cli.hpp"
#include "afg/rng.hpp"

#ifndef AFG_TEST_DATA_DIR
#error "AFG_TEST_DATA_DIR must be defined"
#endif

namespace afg::testing {

using structure::Label3;

std::filesystem::path data_dir() { return AFG_TEST_DATA_DIR; }

std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::string kExample1Abstract =
    "Nitro-anilides are compounds essential for manufacturing a variety of chemical compounds, including "
    "pharmaceuticals, dyes and explosives. Traditional methods use concentrated sulfuric and nitric acids, "
    "where reaction conditions are harsh and have low tolerance for other functional groups. They were "
    "replaced by using nitrate salt reagents, which can be difficult to prepare and, from the resultant "
    "metal oxides, have a low atom economy. More recent methods use AgNO2 to selectively nitrate arenes, but "
    "this method uses high quantities of rare metals, which is unsustainable. This reaction uses NaNO2 and "
    "K2S2O8 in CH3CN, using catalytic AgNO2, to selectively nitrate the ortho positions on a variety of "
    "arenes, displaying high regioselectivity and chemoselectivity as well as moderate to high yields with a "
    "selection of substitutions on the starting anilide. The mechanism proceeds through silver chelation and "
    "a subsequent radical mechanism, and the silver catalyst is regenerated by the K2S2O8 oxidant.";

const std::vector<Label3> kExample1Labels = {Label3::background, Label3::background, Label3::technique,
                                             Label3::background, Label3::observation, Label3::background};

const std::array<std::string, 3> kExample1Comments = {
    "Your discussion of the paper's background has a good amount of detail.",
    "It might be useful to outline the Techniques the model uses in a bit more detail.",
    "It may be worth making sure that the discussion of the conclusions of the paper are clearer.",
};

const std::string kExample2Abstract =
    "To combat the issues of toxic chemicals and by-products, noble and precious metal catalysts, and "
    "expensive phosphorus ligands, a new method of alkylation of amines was devised. N-ethylation and "
    "N-methylation of a broad range of aliphatic and aromatic compounds were demonstrated using a "
    "(cyclopentadienone) iron tricarbonyl complex under basic conditions. These compounds were ethylated or "
    "methylated using ethanol or methanol. The use of methanol was more energetically demanding due to its "
    "higher enthalpy of dehydrogenation. Consequently, a change in hydrogen pressure was required for "
    "selective dehydration over dehydrogenation to methylate some compounds. The method shown produced mono- "
    "or dialkylated compounds in high yields. DFT calculations revealed potential pathways for the reaction "
    "and highlighted the role of hydrogen pressure in driving the equilibrium towards one intermediate and "
    "hence the reduction of imines.";

const std::vector<Label3> kExample2Labels = {Label3::background,  Label3::background,  Label3::technique,
                                             Label3::observation, Label3::observation, Label3::observation,
                                             Label3::observation};

const std::array<std::string, 3> kExample2Comments = {
    "A more balanced discussion of the background of the paper, the techniques of the paper and the "
    "observations and conclusions the paper made might improve your work.",
    "It might be worth outlining the methods of the paper in greater detail.",
    "The abstract contains discussion of each aspect of the paper in a logical order.",
};

namespace {

const std::string kRsc =
    "A. Lator, S. Gaillard, A. Poater and J.-L. Renaud, Organic Letters, 2018, 20, 5985–5990.";
const std::string kAcs =
    "Lator, A.; Gaillard, S.; Poater, A.; Renaud, J.-L. Well-Defined Phosphine-Free Iron-Catalyzed "
    "N-Ethylation and N-Methylation of Amines with Ethanol and Methanol. Organic Letters 2018, 20 (19), "
    "5985–5990.";

std::array<double, 3> one_hot(Label3 l) {
  std::array<double, 3> p{0.05, 0.05, 0.05};
  p[static_cast<std::size_t>(l)] = 0.9;
  return p;
}

}  // namespace

ingest::Submission example2_submission() {
  ingest::Submission s;
  s.submission_id = "example-2";
  s.paper_id = "lator-2018";
  s.impact_factor = 6.005;
  s.ref_rsc = kRsc;
  s.ref_acs = kAcs;
  s.times_cited = 10;
  s.abstract = kExample2Abstract;
  return s;
}

ingest::AnswerKey example2_key() {
  return {"lator-2018", 6.005, kRsc, kAcs, 42};
}

feedback::FeedbackReport example1_report() {
  auto sub = example2_submission();
  sub.submission_id = "example-1";
  sub.times_cited = 42;
  sub.abstract = kExample1Abstract;
  const std::vector<ingest::Submission> subs = {sub};
  const std::vector<ingest::AnswerKey> keys = {example2_key()};
  const auto r = cli::grade_submissions(subs, keys, FixedScorer(0.5), OracleClassifier(kExample1Labels),
                                        feedback::default_rules(), {}, {});
  return r.reports.at(0);
}

feedback::FeedbackReport example2_report() {
  const std::vector<ingest::Submission> subs = {example2_submission()};
  const std::vector<ingest::AnswerKey> keys = {example2_key()};
  const auto r = cli::grade_submissions(subs, keys, FixedScorer(0.5), OracleClassifier(kExample2Labels),
                                        feedback::default_rules(), {}, {});
  return r.reports.at(0);
}

bool matches_golden(const std::string& name, const std::string& actual) {
  const auto path = data_dir() / "golden" / name;
  if (const char* update = std::getenv("AFG_UPDATE_GOLDEN"); update && std::string(update) == "1") {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream(path, std::ios::binary) << actual;
    return true;
  }
  if (!std::filesystem::exists(path)) return false;
  return read_text(path) == actual;
}

std::array<double, 3> OracleClassifier::probabilities(std::string_view) const {
  if (labels_.empty()) return one_hot(Label3::background);
  const auto l = labels_[std::min(next_, labels_.size() - 1)];
  ++next_;
  return one_hot(l);
}

std::array<double, 3> TextOracleClassifier::probabilities(std::string_view sentence) const {
  const auto it = table_.find(sentence);
  return one_hot(it == table_.end() ? Label3::background : it->second);
}

// ---------------------------------------------------------------------------

namespace {

template <typename T>
const T& pick(const std::vector<T>& v, SplitMix64& rng) {
  return v[static_cast<std::size_t>(rng.below(v.size()))];
}

// Fills {d}, {t}, {o}, {p}, {n} slots.
std::string fill(std::string_view tmpl, SplitMix64& rng) {
  static const std::vector<std::string> diseases = {
      "asthma", "hypertension", "type 2 diabetes", "chronic pain", "heart failure", "depression",
      "osteoarthritis", "migraine", "obesity", "insomnia", "stroke", "sepsis", "anaemia", "psoriasis"};
  static const std::vector<std::string> treatments = {
      "metformin", "aspirin", "a home exercise programme", "cognitive therapy", "vitamin d", "statin therapy",
      "acupuncture", "early mobilisation", "a text message reminder", "low dose steroids", "zinc supplements",
      "telephone coaching", "a nurse led clinic", "insulin glargine"};
  static const std::vector<std::string> outcomes = {
      "blood pressure", "quality of life", "pain scores", "hospital admission", "mortality", "body weight",
      "glycaemic control", "sleep quality", "symptom burden", "length of stay", "functional status",
      "medication adherence"};
  static const std::vector<std::string> populations = {
      "older adults", "children", "pregnant women", "primary care patients", "smokers", "nursing home residents",
      "adolescents", "veterans", "outpatients", "critically ill adults", "rural communities"};
  std::string out;
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    if (tmpl[i] == '{' && i + 2 < tmpl.size() && tmpl[i + 2] == '}') {
      switch (tmpl[i + 1]) {
        case 'd': out += pick(diseases, rng); break;
        case 't': out += pick(treatments, rng); break;
        case 'o': out += pick(outcomes, rng); break;
        case 'p': out += pick(populations, rng); break;
        case 'n': out += std::to_string(2 + rng.below(98)); break;
        default: out += tmpl.substr(i, 3);
      }
      i += 2;
    } else {
      out += tmpl[i];
    }
  }
  if (!out.empty() && out[0] >= 'a' && out[0] <= 'z') out[0] = static_cast<char>(out[0] - 'a' + 'A');
  return out;
}

const std::array<std::vector<std::string>, 5>& role_templates() {
  static const std::array<std::vector<std::string>, 5> t = {{
      // background
      {"{d} is a common condition among {p} and places a large burden on health services.",
       "{d} remains a leading cause of poor {o} worldwide.",
       "Little is known about how {t} affects {o} in {p}.",
       "Previous reports on {t} for {d} have been inconsistent.",
       "The prevalence of {d} has risen steadily over the last decade.",
       "Current guidelines offer limited advice on managing {d} in {p}.",
       "Evidence supporting {t} in routine care is scarce."},
      // objective
      {"We aimed to determine whether {t} improves {o} in {p} with {d}.",
       "The objective of this study was to evaluate {t} for {d}.",
       "This trial sought to compare {t} with usual care in {p}.",
       "Our aim was to assess the effect of {t} on {o}.",
       "To investigate whether {t} reduces {o} among {p}."},
      // method
      {"In this randomised controlled trial, {n} {p} were allocated to {t} or placebo.",
       "Participants were randomly assigned to receive {t} or usual care for {n} weeks.",
       "The primary outcome was {o} measured at {n} weeks after enrolment.",
       "We recruited {n} {p} from outpatient clinics between {n} and {n} months.",
       "Data were analysed by intention to treat using mixed effects regression.",
       "Assessors blinded to allocation recorded {o} at baseline and follow up.",
       "Randomisation was stratified by site using computer generated blocks."},
      // result
      {"{o} improved by {n} % in the {t} group compared with {n} % in the control group.",
       "The mean difference in {o} was {n} points ( 95 % ci {n} to {n} ).",
       "A total of {n} participants completed follow up.",
       "Adverse events occurred in {n} patients receiving {t}.",
       "There was no significant difference in {o} between groups ( p = 0.{n} ).",
       "{t} reduced {o} by {n} % at {n} weeks."},
      // conclusion
      {"{t} appears to be a safe and effective option for {p} with {d}.",
       "These findings suggest that {t} should be considered in routine practice.",
       "Larger trials are needed to confirm the benefit of {t} on {o}.",
       "In conclusion, {t} did not improve {o} in {p}.",
       "Our results support wider use of {t} for {d}."},
  }};
  return t;
}

}  // namespace

std::vector<ingest::RctAbstract> synthetic_rct(std::size_t n_sentences, std::uint64_t seed, double label_noise) {
  SplitMix64 rng(seed);
  std::vector<ingest::RctAbstract> out;
  std::size_t total = 0;
  const std::array<std::pair<int, int>, 5> counts = {{{1, 3}, {1, 1}, {2, 4}, {2, 4}, {1, 2}}};
  while (total < n_sentences) {
    ingest::RctAbstract a;
    a.abstract_id = std::to_string(100000 + out.size());
    for (std::size_t role = 0; role < 5 && total < n_sentences; ++role) {
      const auto [lo, hi] = counts[role];
      const int k = lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
      for (int i = 0; i < k && total < n_sentences; ++i) {
        std::size_t source = role;
        if (rng.uniform() < label_noise) source = (role + 1 + rng.below(4)) % 5;
        a.sentences.push_back({static_cast<ingest::Label5>(role), fill(pick(role_templates()[source], rng), rng)});
        ++total;
      }
    }
    out.push_back(std::move(a));
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> pseudo_words(std::size_t n, SplitMix64& rng, std::set<std::string>& used) {
  static const std::string consonants = "bcdfgklmnprstvz";
  static const std::string vowels = "aeiou";
  std::vector<std::string> out;
  while (out.size() < n) {
    std::string w;
    const auto syllables = 2 + rng.below(2);
    for (std::uint64_t s = 0; s < syllables; ++s) {
      w += consonants[rng.below(consonants.size())];
      w += vowels[rng.below(vowels.size())];
    }
    if (used.insert(w).second) out.push_back(std::move(w));
  }
  return out;
}

RegressionText make_text(const std::vector<std::string>& pos, const std::vector<std::string>& neg,
                         const std::vector<std::string>& filler, double offset, double scale, SplitMix64& rng) {
  const auto n_concepts = 6 + rng.below(7);
  const auto n_filler = 6 + rng.below(7);
  const double target_frac = rng.uniform();
  std::vector<std::string> words;
  std::size_t n_pos = 0;
  for (std::uint64_t i = 0; i < n_concepts; ++i) {
    if (rng.uniform() < target_frac) {
      words.push_back(pick(pos, rng));
      ++n_pos;
    } else {
      words.push_back(pick(neg, rng));
    }
  }
  for (std::uint64_t i = 0; i < n_filler; ++i) words.push_back(pick(filler, rng));
  shuffle(std::span<std::string>(words), rng);
  RegressionText t;
  for (const auto& w : words) t.text += (t.text.empty() ? "" : " ") + w;
  const double frac = static_cast<double>(n_pos) / static_cast<double>(n_concepts);
  t.score01 = offset + scale * frac;
  return t;
}

}  // namespace

RegressionFixture synthetic_regression(std::size_t n_a, std::size_t n_b, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::set<std::string> used;
  const auto shared_pos = pseudo_words(140, rng, used);
  const auto shared_neg = pseudo_words(140, rng, used);
  const auto a_pos = pseudo_words(60, rng, used);
  const auto a_neg = pseudo_words(60, rng, used);
  const auto b_pos = pseudo_words(60, rng, used);
  const auto b_neg = pseudo_words(60, rng, used);
  const auto filler = pseudo_words(80, rng, used);

  auto join = [](std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
  };
  const auto pos_a = join(shared_pos, a_pos), neg_a = join(shared_neg, a_neg);
  const auto pos_b = join(shared_pos, b_pos), neg_b = join(shared_neg, b_neg);

  RegressionFixture f;
  for (std::size_t i = 0; i < n_a; ++i) f.family_a.push_back(make_text(pos_a, neg_a, filler, 0.0, 1.0, rng));
  for (std::size_t i = 0; i < n_b; ++i) f.family_b.push_back(make_text(pos_b, neg_b, filler, 0.15, 0.7, rng));
  return f;
}

std::vector<std::pair<std::string, int>> separable_sentences() {
  return {
      {"history context prior work", 0},    {"prior history of the field", 0},
      {"context and history matter", 0},    {"the prior context is known", 0},
      {"history shows prior context", 0},   {"earlier context and prior history", 0},
      {"context history prior", 0},         {"method protocol apparatus", 1},
      {"the protocol used an apparatus", 1}, {"apparatus and method setup", 1},
      {"a method with protocol", 1},        {"protocol method apparatus setup", 1},
      {"the apparatus protocol", 1},        {"method apparatus", 1},
      {"yield result increase", 2},         {"the result was a yield increase", 2},
      {"increase in yield result", 2},      {"result shows increase", 2},
      {"yield increase observed result", 2}, {"observed yield result increase", 2},
  };
}

}  // namespace afg::testing
