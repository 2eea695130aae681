#include "afg/structure.hpp"

#include "afg/error.hpp"

namespace afg::structure {

std::string_view to_string(Label3 label) noexcept {
  switch (label) {
    case Label3::background: return "BACKGROUND";
    case Label3::technique: return "TECHNIQUE";
    case Label3::observation: return "OBSERVATION";
  }
  return "BACKGROUND";
}

Label3 label3_from_string(std::string_view name) {
  for (const auto l : kLabels3)
    if (to_string(l) == name) return l;
  throw DataError("unknown label '" + std::string(name) + "'");
}

Label3 map_label(ingest::Label5 label) noexcept {
  using ingest::Label5;
  switch (label) {
    case Label5::background:
    case Label5::objective: return Label3::background;
    case Label5::method: return Label3::technique;
    case Label5::result:
    case Label5::conclusion: return Label3::observation;
  }
  return Label3::background;
}

NeuralSentenceClassifier::NeuralSentenceClassifier(nn::Model model, text::Vocabulary vocab)
    : model_(std::move(model)), vocab_(std::move(vocab)) {
  const auto& c = model_.config;
  if (c.head != nn::HeadKind::classification || (c.n_classes != 3 && c.n_classes != 5))
    throw ArgumentError("sentence classifier needs a 3- or 5-class classification head");
  if (c.vocab_size != vocab_.size())
    throw ConfigError("sentence classifier: model and vocabulary sizes differ");
}

std::array<double, 3> NeuralSentenceClassifier::probabilities(std::string_view sentence) const {
  if (model_.config.n_classes == 3) return nn::classify_sentence(sentence, model_, vocab_);
  const auto seq = text::tokenize(sentence, vocab_);
  if (seq.ids.empty()) throw ArgumentError("classify_sentence: empty sentence");
  const auto p5 = nn::class_probabilities(seq.ids, model_);
  std::array<double, 3> out{};
  for (std::size_t i = 0; i < p5.size(); ++i)
    out[static_cast<std::size_t>(map_label(static_cast<ingest::Label5>(i)))] += p5[i];
  return out;
}

std::vector<Label3> LabeledAbstract::labels() const {
  std::vector<Label3> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) out.push_back(s.label);
  return out;
}

Label3 argmax(const std::array<double, 3>& probs) noexcept {
  std::size_t best = 0;
  for (std::size_t i = 1; i < probs.size(); ++i)
    if (probs[i] > probs[best]) best = i;
  return static_cast<Label3>(best);
}

LabeledAbstract classify_abstract(std::string_view text, const SentenceClassifier& classifier,
                                  const text::SegmenterOptions& segmenter) {
  const auto sentences = text::segment_sentences(text, segmenter);
  if (sentences.empty()) throw DataError("abstract has no sentences");
  LabeledAbstract out;
  out.sentences.reserve(sentences.size());
  for (const auto& s : sentences) {
    const auto probs = classifier.probabilities(s);
    const auto label = argmax(probs);
    out.sentences.push_back({s, label, probs[static_cast<std::size_t>(label)]});
  }
  return out;
}

ClassDistribution distribution(std::span<const Label3> labels) {
  if (labels.empty()) throw ArgumentError("distribution: no sentences");
  ClassDistribution d;
  for (const auto l : labels) ++d.counts[static_cast<std::size_t>(l)];
  const auto n = static_cast<double>(labels.size());
  for (std::size_t i = 0; i < 3; ++i) {
    d.shares[i] = static_cast<double>(d.counts[i]) / n;
    if (d.counts[i] > 0) ++d.n_classes_present;
  }
  return d;
}

ClassDistribution distribution(const LabeledAbstract& labeled) {
  const auto labels = labeled.labels();
  return distribution(labels);
}

CorpusStats corpus_stats(std::span<const LabeledAbstract> abstracts) {
  if (abstracts.empty()) throw ArgumentError("corpus_stats: no abstracts");
  CorpusStats s;
  s.n_abstracts = abstracts.size();
  std::size_t sparse = 0;
  for (const auto& a : abstracts) {
    const auto d = distribution(a);
    for (std::size_t i = 0; i < 3; ++i) s.counts[i] += d.counts[i];
    s.n_sentences += a.sentences.size();
    if (d.n_classes_present <= 2) ++sparse;
  }
  for (std::size_t i = 0; i < 3; ++i)
    s.pooled_shares[i] = static_cast<double>(s.counts[i]) / static_cast<double>(s.n_sentences);
  s.at_most_two_classes = static_cast<double>(sparse) / static_cast<double>(s.n_abstracts);
  return s;
}

nlohmann::json to_json(const LabeledAbstract& a) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& s : a.sentences)
    out.push_back({{"text", s.text}, {"label", std::string(to_string(s.label))}, {"confidence", s.confidence}});
  return out;
}

LabeledAbstract labeled_abstract_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw DataError("labeled abstract must be a JSON array");
  LabeledAbstract out;
  for (const auto& e : j) {
    try {
      out.sentences.push_back({e.at("text").get<std::string>(),
                               label3_from_string(e.at("label").get<std::string>()),
                               e.value("confidence", 1.0)});
    } catch (const nlohmann::json::exception& ex) {
      throw DataError(std::string("labeled abstract: ") + ex.what());
    }
  }
  return out;
}

namespace {

nlohmann::json triple(const std::array<double, 3>& v) {
  return {{"background", v[0]}, {"technique", v[1]}, {"observation", v[2]}};
}

}  // namespace

nlohmann::json to_json(const ClassDistribution& d) {
  return {{"shares", triple(d.shares)},
          {"counts", {{"background", d.counts[0]}, {"technique", d.counts[1]}, {"observation", d.counts[2]}}},
          {"n_classes_present", d.n_classes_present}};
}

nlohmann::json to_json(const CorpusStats& s) {
  return {{"n_abstracts", s.n_abstracts},
          {"n_sentences", s.n_sentences},
          {"shares", triple(s.pooled_shares)},
          {"at_most_two_classes", s.at_most_two_classes},
          {"reference_rows",
           {{"pubmed20k_rct_percent", triple(s.pubmed_reference)},
            {"student_abstracts_percent", triple(kStudentReferenceShares)}}}};
}

}  // namespace afg::structure
