#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "afg/ingest.hpp"
#include "afg/nn.hpp"
#include "afg/textproc.hpp"
#include "json.hpp"

namespace afg::structure {

enum class Label3 { background = 0, technique = 1, observation = 2 };

inline constexpr std::array<Label3, 3> kLabels3 = {Label3::background, Label3::technique,
                                                   Label3::observation};

std::string_view to_string(Label3 label) noexcept;
Label3 label3_from_string(std::string_view name);  // throws DataError

// BACKGROUND, OBJECTIVE -> BACKGROUND; METHOD -> TECHNIQUE;
// RESULT, CONCLUSION -> OBSERVATION.
Label3 map_label(ingest::Label5 label) noexcept;

// Produces (BACKGROUND, TECHNIQUE, OBSERVATION) probabilities for a sentence.
class SentenceClassifier {
 public:
  virtual ~SentenceClassifier() = default;
  virtual std::array<double, 3> probabilities(std::string_view sentence) const = 0;
};

// Wraps a trained encoder. A 5-class head is folded onto the three classes by
// summing probabilities through map_label.
class NeuralSentenceClassifier final : public SentenceClassifier {
 public:
  NeuralSentenceClassifier(nn::Model model, text::Vocabulary vocab);
  std::array<double, 3> probabilities(std::string_view sentence) const override;

 private:
  nn::Model model_;
  text::Vocabulary vocab_;
};

struct LabeledSentence {
  std::string text;
  Label3 label = Label3::background;
  double confidence = 0.0;  // max of the probability triple

  bool operator==(const LabeledSentence&) const = default;
};

struct LabeledAbstract {
  std::vector<LabeledSentence> sentences;

  std::vector<Label3> labels() const;
  bool operator==(const LabeledAbstract&) const = default;
};

// Index of the largest probability; ties go to the lower index.
Label3 argmax(const std::array<double, 3>& probs) noexcept;

LabeledAbstract classify_abstract(std::string_view text, const SentenceClassifier& classifier,
                                  const text::SegmenterOptions& segmenter = {});

struct ClassDistribution {
  std::array<double, 3> shares{};
  std::array<std::int64_t, 3> counts{};
  int n_classes_present = 0;

  double share(Label3 l) const noexcept { return shares[static_cast<std::size_t>(l)]; }
};

ClassDistribution distribution(std::span<const Label3> labels);
ClassDistribution distribution(const LabeledAbstract& labeled);

// Reference class shares (percent) for report annotation: the PubMed RCT
// corpus and a cohort of student abstracts.
inline constexpr std::array<double, 3> kPubMedReferenceShares = {19.8, 33.0, 47.3};
inline constexpr std::array<double, 3> kStudentReferenceShares = {49.9, 11.5, 38.6};

struct CorpusStats {
  std::size_t n_abstracts = 0;
  std::size_t n_sentences = 0;
  std::array<std::int64_t, 3> counts{};
  std::array<double, 3> pooled_shares{};
  // Fraction of abstracts with sentences from at most two of the three classes.
  double at_most_two_classes = 0.0;
  std::array<double, 3> pubmed_reference = kPubMedReferenceShares;
};

CorpusStats corpus_stats(std::span<const LabeledAbstract> abstracts);

nlohmann::json to_json(const LabeledAbstract& a);
LabeledAbstract labeled_abstract_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ClassDistribution& d);
nlohmann::json to_json(const CorpusStats& s);

}  // namespace afg::structure
