#include "afg/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "afg/error.hpp"
#include "afg/log.hpp"
#include "afg/rng.hpp"

namespace afg::cli {

namespace {

// Root-seed stream labels.
enum SeedStream : std::uint64_t {
  kSeedPretrainInit = 1,
  kSeedPretrainBatches = 2,
  kSeedAesSplit = 3,
  kSeedFinetuneBatches = 4,
  kSeedRctSample = 5,
  kSeedRctSplit = 6,
  kSeedClassifierInit = 7,
  kSeedClassifierBatches = 8,
};

fs::path resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return {};
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

void require_path(const fs::path& p, const char* what) {
  if (p.empty()) throw ConfigError(std::string("config: no ") + what + " path configured");
  if (!fs::exists(p)) throw ConfigError(std::string(what) + " not found: " + p.string());
}

std::ifstream open_in(const fs::path& p, const char* what, std::ios::openmode mode = std::ios::in) {
  require_path(p, what);
  std::ifstream in(p, mode);
  if (!in) throw ConfigError(std::string("cannot open ") + what + ": " + p.string());
  return in;
}

void write_file(const fs::path& p, const std::string& content) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << content;
  if (!out) throw Error("cannot write " + p.string());
}

void write_json(const fs::path& p, const nlohmann::json& j) { write_file(p, j.dump(2) + "\n"); }

void apply_train(const nlohmann::json& j, TrainSettings& t) {
  t.epochs = j.value("epochs", t.epochs);
  t.batch_size = j.value("batch_size", t.batch_size);
  t.learning_rate = j.value("learning_rate", t.learning_rate);
}

nn::TrainConfig train_config(const TrainSettings& s, const objectives::LossSchedule& schedule,
                             std::uint64_t seed) {
  nn::TrainConfig c;
  c.epochs = s.epochs;
  c.batch_size = s.batch_size;
  c.learning_rate = s.learning_rate;
  c.schedule = schedule;
  c.seed = seed;
  c.validate();
  return c;
}

nlohmann::json log_to_json(const nn::TrainLog& log, std::uint64_t seed, bool regression) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : log.steps) {
    nlohmann::json e = {{"t", s.t}, {"loss", s.loss}};
    if (regression) e["p"] = s.p;
    steps.push_back(std::move(e));
  }
  const auto now = std::chrono::system_clock::now().time_since_epoch();
  return {{"header", {{"created_unix", std::chrono::duration_cast<std::chrono::seconds>(now).count()}}},
          {"seed", seed},
          {"total_steps", log.total_steps},
          {"epoch_mean_loss", log.epoch_mean_loss},
          {"steps", std::move(steps)}};
}

text::Vocabulary load_vocab(const fs::path& p, const char* what) {
  auto in = open_in(p, what);
  return text::Vocabulary::load(in);
}

nn::Model load_model_file(const fs::path& p, const char* what) {
  auto in = open_in(p, what, std::ios::binary);
  return nn::load_model(in);
}

void save_model_file(const fs::path& p, const nn::Model& m) {
  std::ostringstream out;
  nn::save_model(m, out);
  write_file(p, out.str());
}

std::vector<ingest::Submission> load_submissions(const RunConfig& c) {
  auto in = open_in(c.submissions, "submission file");
  auto subs = ingest::read_submissions(in);
  if (subs.empty()) throw DataError("submission file contains no submissions: " + c.submissions.string());
  return subs;
}

std::vector<ingest::AnswerKey> load_keys(const RunConfig& c) {
  if (c.answer_keys.empty()) return {};
  auto in = open_in(c.answer_keys, "answer-key file");
  return ingest::read_answer_keys(in);
}

std::vector<feedback::FeedbackRule> load_rules(const RunConfig& c) {
  if (c.rules.empty()) return feedback::default_rules();
  auto in = open_in(c.rules, "rule config");
  return feedback::read_rules(in);
}

std::vector<nn::Example> abstract_examples(std::span<const ingest::Submission> subs,
                                           const text::Vocabulary& vocab, std::size_t max_len) {
  std::vector<nn::Example> out;
  for (const auto& s : subs)
    if (s.human_marks)
      out.push_back(nn::make_example(s.abstract, s.human_marks->abstract_mark / 6.0, vocab, max_len));
  return out;
}

objectives::EvalReport evaluate_model(const nn::Model& m, std::span<const nn::Example> data) {
  std::vector<double> preds, targets;
  for (const auto& e : data) {
    preds.push_back(nn::predict_score(e.tokens, m));
    targets.push_back(e.target);
  }
  return objectives::evaluate(preds, targets);
}

}  // namespace

RunConfig config_from_json(const nlohmann::json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig c;
  try {
    c.seed = j.value("seed", c.seed);
    if (j.contains("out")) c.out_dir = resolve(base_dir, j.at("out").get<std::string>());
    if (j.contains("paths")) {
      const auto& p = j.at("paths");
      for (const auto& s : p.value("scored_corpora", std::vector<std::string>{}))
        c.scored_corpora.push_back(resolve(base_dir, s));
      c.rct_corpus = resolve(base_dir, p.value("rct_corpus", ""));
      c.submissions = resolve(base_dir, p.value("submissions", ""));
      c.answer_keys = resolve(base_dir, p.value("answer_keys", ""));
      c.aes_model = resolve(base_dir, p.value("aes_model", ""));
      c.aes_vocab = resolve(base_dir, p.value("aes_vocab", ""));
      c.classifier_model = resolve(base_dir, p.value("classifier_model", ""));
      c.classifier_vocab = resolve(base_dir, p.value("classifier_vocab", ""));
      c.rules = resolve(base_dir, p.value("rules", ""));
      if (p.contains("score_ranges")) {
        auto in = open_in(resolve(base_dir, p.at("score_ranges").get<std::string>()), "score-range file");
        c.score_ranges = ingest::score_ranges_from_json(nlohmann::json::parse(in));
      }
    }
    if (j.contains("score_ranges")) c.score_ranges = ingest::score_ranges_from_json(j.at("score_ranges"));
    if (j.contains("columns")) {
      const auto& col = j.at("columns");
      c.columns.id = col.value("id", c.columns.id);
      c.columns.prompt = col.value("prompt", c.columns.prompt);
      c.columns.text = col.value("text", c.columns.text);
      c.columns.score = col.value("score", c.columns.score);
    }
    if (j.contains("segmenter") && j.at("segmenter").contains("abbreviations")) {
      auto in = open_in(resolve(base_dir, j.at("segmenter").at("abbreviations").get<std::string>()),
                        "abbreviation list");
      c.segmenter.abbreviations = text::read_abbreviations(in);
    }
    if (j.contains("encoder")) {
      const auto& e = j.at("encoder");
      c.embed_dim = e.value("embed_dim", c.embed_dim);
      c.hidden_dim = e.value("hidden_dim", c.hidden_dim);
      c.attention_dim = e.value("attention_dim", c.attention_dim);
      c.max_sequence_length = e.value("max_sequence_length", c.max_sequence_length);
      c.vocab_size = e.value("vocab_size", c.vocab_size);
      c.vocab_min_frequency = e.value("vocab_min_frequency", c.vocab_min_frequency);
    }
    if (j.contains("schedule")) {
      const auto& s = j.at("schedule");
      c.schedule.a = s.value("a", c.schedule.a);
      c.schedule.b = s.value("b", c.schedule.b);
      c.schedule.c = s.value("c", c.schedule.c);
    }
    if (j.contains("pretrain")) apply_train(j.at("pretrain"), c.pretrain);
    if (j.contains("finetune")) apply_train(j.at("finetune"), c.finetune);
    if (j.contains("classifier")) apply_train(j.at("classifier"), c.classifier);
    if (j.contains("split")) {
      c.aes_split = j.at("split").value("aes_fraction", c.aes_split);
      c.rct_split = j.at("split").value("rct_fraction", c.rct_split);
    }
    if (j.contains("rct")) {
      c.rct_max_sentences = j.at("rct").value("max_sentences", c.rct_max_sentences);
      c.rct_five_class = j.at("rct").value("five_class", c.rct_five_class);
    }
    if (j.contains("thresholds")) {
      const auto& t = j.at("thresholds");
      c.thresholds.numeric_full = t.value("numeric_full", c.thresholds.numeric_full);
      c.thresholds.numeric_partial = t.value("numeric_partial", c.thresholds.numeric_partial);
      c.thresholds.similarity_full = t.value("similarity_full", c.thresholds.similarity_full);
      c.thresholds.similarity_partial = t.value("similarity_partial", c.thresholds.similarity_partial);
    }
    if (j.contains("report")) {
      const auto& r = j.at("report");
      if (r.contains("format")) {
        const auto f = feedback::format_from_string(r.at("format").get<std::string>());
        if (!f) throw ConfigError("config: unknown report format '" + r.at("format").get<std::string>() + "'");
        c.report_format = *f;
      }
      c.color = r.value("color", c.color);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  try {
    c.schedule.validate();
  } catch (const ArgumentError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

RunConfig load_config(const fs::path& path) {
  auto in = open_in(path, "config file");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config file is not valid JSON: " + std::string(e.what()));
  }
  return config_from_json(j, path.parent_path());
}

// ---------------------------------------------------------------------------

GradeResult grade_submissions(std::span<const ingest::Submission> submissions,
                              std::span<const ingest::AnswerKey> keys,
                              const scoring::AbstractScorer& scorer,
                              const structure::SentenceClassifier& classifier,
                              const std::vector<feedback::FeedbackRule>& rules,
                              const scoring::Thresholds& thresholds,
                              const text::SegmenterOptions& segmenter) {
  GradeResult out;
  std::map<std::string, ingest::AnswerKey> by_paper;
  for (const auto& k : keys) by_paper.emplace(k.paper_id, k);
  for (const auto& s : submissions) {
    if (by_paper.contains(s.paper_id)) continue;
    auto derived = ingest::derive_answer_key(submissions, s.paper_id);
    for (auto& w : derived.warnings) {
      warn(w);
      out.warnings.push_back(std::move(w));
    }
    by_paper.emplace(s.paper_id, std::move(derived.key));
  }
  for (const auto& [id, k] : by_paper) out.keys.push_back(k);

  std::vector<const ingest::Submission*> ordered;
  for (const auto& s : submissions) ordered.push_back(&s);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto* a, const auto* b) { return a->submission_id < b->submission_id; });
  for (const auto* s : ordered) {
    const auto marks = scoring::mark_submission(*s, by_paper.at(s->paper_id), scorer, thresholds);
    auto labeled = structure::classify_abstract(s->abstract, classifier, segmenter);
    out.reports.push_back(feedback::build_report(s->submission_id, marks, std::move(labeled), rules));
  }
  return out;
}

MarkEvaluation evaluate_marks(std::span<const ingest::Submission> submissions,
                              std::span<const ingest::AnswerKey> keys,
                              const scoring::AbstractScorer& scorer,
                              const scoring::Thresholds& thresholds) {
  std::map<std::string, ingest::AnswerKey> by_paper;
  for (const auto& k : keys) by_paper.emplace(k.paper_id, k);
  std::vector<double> preds, targets;
  std::vector<int> machine_marks, human_marks;
  std::array<std::size_t, 4> agree{};
  for (const auto& s : submissions) {
    if (!s.human_marks) continue;
    if (!by_paper.contains(s.paper_id))
      by_paper.emplace(s.paper_id, ingest::derive_answer_key(submissions, s.paper_id).key);
    const double score = scorer.score01(s.abstract);
    const auto sheet = scoring::mark_submission(s, by_paper.at(s.paper_id), scorer, thresholds);
    preds.push_back(score);
    targets.push_back(s.human_marks->abstract_mark / 6.0);
    machine_marks.push_back(sheet.abstract_mark);
    human_marks.push_back(s.human_marks->abstract_mark);
    const auto& h = *s.human_marks;
    agree[0] += sheet.q1_impact.value == h.q1_impact.value;
    agree[1] += sheet.q2_rsc.value == h.q2_rsc.value;
    agree[2] += sheet.q3_acs.value == h.q3_acs.value;
    agree[3] += sheet.q4_cited.value == h.q4_cited.value;
  }
  if (preds.empty()) throw DataError("no submissions with human marks to evaluate against");
  MarkEvaluation e;
  e.n = preds.size();
  e.abstract_scores = objectives::evaluate(preds, targets);
  e.abstract_marks = objectives::confusion(machine_marks, human_marks, 7);
  e.abstract_accuracy = objectives::accuracy(machine_marks, human_marks);
  for (std::size_t i = 0; i < 4; ++i) e.question_agreement[i] = static_cast<double>(agree[i]) / static_cast<double>(e.n);
  return e;
}

nlohmann::json to_json(const MarkEvaluation& e) {
  return {{"n", e.n},
          {"abstract_scores", objectives::to_json(e.abstract_scores)},
          {"abstract_mark_confusion",
           objectives::to_json(e.abstract_marks, {"0", "1", "2", "3", "4", "5", "6"})},
          {"abstract_mark_accuracy", e.abstract_accuracy},
          {"question_agreement",
           {{"q1_impact", e.question_agreement[0]},
            {"q2_rsc", e.question_agreement[1]},
            {"q3_acs", e.question_agreement[2]},
            {"q4_cited", e.question_agreement[3]}}}};
}

// ---------------------------------------------------------------------------

nlohmann::json cmd_pretrain(const RunConfig& config) {
  if (config.scored_corpora.empty()) throw ConfigError("config: no scored corpora configured");
  std::vector<ingest::RawSample> raw;
  for (const auto& p : config.scored_corpora) {
    auto in = open_in(p, "scored corpus");
    auto part = ingest::parse_scored_tsv(in, config.columns, config.score_ranges);
    raw.insert(raw.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  if (raw.empty()) throw DataError("scored corpora contain no samples");
  const auto samples = ingest::normalize_scores(raw);

  std::vector<std::string> texts;
  for (const auto& s : samples) texts.push_back(s.text);
  auto vocab = text::build_vocab(texts, config.vocab_size, config.vocab_min_frequency);

  nn::EncoderConfig enc;
  enc.vocab_size = vocab.size();
  enc.embed_dim = config.embed_dim;
  enc.hidden_dim = config.hidden_dim;
  enc.attention_dim = config.attention_dim;
  enc.max_sequence_length = config.max_sequence_length;
  enc.head = nn::HeadKind::regression;
  enc.seed = derive_seed(config.seed, kSeedPretrainInit);

  std::vector<nn::Example> data;
  for (const auto& s : samples) data.push_back(nn::make_example(s.text, s.score01, vocab, enc.max_sequence_length));
  auto result = nn::train(data, train_config(config.pretrain, config.schedule,
                                             derive_seed(config.seed, kSeedPretrainBatches)),
                          nn::init_model(enc));

  const auto model_path = config.out_dir / "aes_model.afgm";
  const auto vocab_path = config.out_dir / "aes_vocab.txt";
  save_model_file(model_path, result.model);
  std::ostringstream vs;
  vocab.save(vs);
  write_file(vocab_path, vs.str());
  write_json(config.out_dir / "pretrain_log.json", log_to_json(result.log, config.seed, true));
  return {{"command", "pretrain"},
          {"seed", config.seed},
          {"samples", samples.size()},
          {"vocab_size", vocab.size()},
          {"total_steps", result.log.total_steps},
          {"final_epoch_loss", result.log.epoch_mean_loss.back()},
          {"model", model_path.string()},
          {"vocab", vocab_path.string()}};
}

nlohmann::json cmd_finetune(const RunConfig& config, const fs::path& base_model) {
  auto base = load_model_file(base_model, "base model");
  auto vocab = load_vocab(config.aes_vocab, "AES vocabulary");
  if (base.config.head != nn::HeadKind::regression) throw ConfigError("base model is not a regression model");
  if (base.config.vocab_size != vocab.size()) throw ConfigError("base model and AES vocabulary sizes differ");
  const auto subs = load_submissions(config);
  auto examples = abstract_examples(subs, vocab, base.config.max_sequence_length);
  if (examples.size() < 2) throw DataError("fine-tuning needs at least two submissions with human marks");
  auto parts = ingest::split(std::move(examples), config.aes_split, derive_seed(config.seed, kSeedAesSplit));
  if (parts.train.empty() || parts.eval.empty()) throw DataError("fine-tuning split left an empty partition");

  const auto before = evaluate_model(base, parts.eval);
  auto result = nn::train(parts.train, train_config(config.finetune, config.schedule,
                                                    derive_seed(config.seed, kSeedFinetuneBatches)),
                          base);
  const auto after = evaluate_model(result.model, parts.eval);

  const auto model_path = config.out_dir / "aes_finetuned.afgm";
  save_model_file(model_path, result.model);
  write_json(config.out_dir / "finetune_log.json", log_to_json(result.log, config.seed, true));
  const nlohmann::json report = {{"seed", config.seed},
                                 {"train", parts.train.size()},
                                 {"eval", parts.eval.size()},
                                 {"pretrained", objectives::to_json(before)},
                                 {"finetuned", objectives::to_json(after)}};
  write_json(config.out_dir / "finetune_eval.json", report);
  nlohmann::json summary = report;
  summary["command"] = "finetune";
  summary["model"] = model_path.string();
  return summary;
}

nlohmann::json cmd_train_classifier(const RunConfig& config) {
  auto in = open_in(config.rct_corpus, "RCT corpus");
  const auto abstracts = ingest::parse_rct(in);
  struct Item {
    std::string text;
    int label;
  };
  std::vector<Item> items;
  for (const auto& a : abstracts)
    for (const auto& s : a.sentences)
      items.push_back({s.text, config.rct_five_class ? static_cast<int>(s.label)
                                                     : static_cast<int>(structure::map_label(s.label))});
  if (items.size() < 2) throw DataError("RCT corpus has fewer than two sentences");
  if (items.size() > config.rct_max_sentences) {
    SplitMix64 rng(derive_seed(config.seed, kSeedRctSample));
    shuffle(std::span<Item>(items), rng);
    items.resize(config.rct_max_sentences);
  }
  auto parts = ingest::split(std::move(items), config.rct_split, derive_seed(config.seed, kSeedRctSplit));
  if (parts.train.empty() || parts.eval.empty()) throw DataError("classifier split left an empty partition");

  std::vector<std::string> texts;
  for (const auto& it : parts.train) texts.push_back(it.text);
  auto vocab = text::build_vocab(texts, config.vocab_size, config.vocab_min_frequency);

  nn::EncoderConfig enc;
  enc.vocab_size = vocab.size();
  enc.embed_dim = config.embed_dim;
  enc.hidden_dim = config.hidden_dim;
  enc.attention_dim = config.attention_dim;
  enc.max_sequence_length = config.max_sequence_length;
  enc.head = nn::HeadKind::classification;
  enc.n_classes = config.rct_five_class ? 5 : 3;
  enc.seed = derive_seed(config.seed, kSeedClassifierInit);

  auto to_examples = [&](const std::vector<Item>& v) {
    std::vector<nn::Example> out;
    for (const auto& it : v) out.push_back(nn::make_example(it.text, it.label, vocab, enc.max_sequence_length));
    return out;
  };
  const auto train_data = to_examples(parts.train);
  const auto eval_data = to_examples(parts.eval);
  auto result = nn::train(train_data, train_config(config.classifier, config.schedule,
                                                   derive_seed(config.seed, kSeedClassifierBatches)),
                          nn::init_model(enc));

  // Accuracy is reported on the three-class scheme either way.
  const structure::NeuralSentenceClassifier clf(result.model, vocab);
  std::vector<int> predicted, truth;
  std::array<std::int64_t, 3> truth_counts{};
  for (const auto& it : parts.eval) {
    predicted.push_back(static_cast<int>(structure::argmax(clf.probabilities(it.text))));
    const int t = config.rct_five_class ? static_cast<int>(structure::map_label(static_cast<ingest::Label5>(it.label)))
                                        : it.label;
    truth.push_back(t);
    ++truth_counts[static_cast<std::size_t>(t)];
  }
  const double acc = objectives::accuracy(predicted, truth);
  const double baseline = static_cast<double>(*std::max_element(truth_counts.begin(), truth_counts.end())) /
                          static_cast<double>(truth.size());
  const auto cm = objectives::confusion(predicted, truth, 3);

  const auto model_path = config.out_dir / "classifier.afgm";
  const auto vocab_path = config.out_dir / "classifier_vocab.txt";
  save_model_file(model_path, result.model);
  std::ostringstream vs;
  vocab.save(vs);
  write_file(vocab_path, vs.str());
  write_json(config.out_dir / "classifier_log.json", log_to_json(result.log, config.seed, false));
  const nlohmann::json report = {
      {"seed", config.seed},
      {"train_sentences", parts.train.size()},
      {"eval_sentences", parts.eval.size()},
      {"accuracy", acc},
      {"majority_baseline", baseline},
      {"confusion", objectives::to_json(cm, {"BACKGROUND", "TECHNIQUE", "OBSERVATION"})}};
  write_json(config.out_dir / "classifier_report.json", report);
  nlohmann::json summary = report;
  summary["command"] = "train-classifier";
  summary["model"] = model_path.string();
  summary["vocab"] = vocab_path.string();
  return summary;
}

nlohmann::json cmd_grade(const RunConfig& config) {
  const auto subs = load_submissions(config);
  const auto keys = load_keys(config);
  const auto rules = load_rules(config);
  const scoring::NeuralAbstractScorer scorer(load_model_file(config.aes_model, "AES model"),
                                             load_vocab(config.aes_vocab, "AES vocabulary"));
  const structure::NeuralSentenceClassifier classifier(
      load_model_file(config.classifier_model, "classifier model"),
      load_vocab(config.classifier_vocab, "classifier vocabulary"));
  const auto result =
      grade_submissions(subs, keys, scorer, classifier, rules, config.thresholds, config.segmenter);

  nlohmann::json marks = nlohmann::json::array();
  nlohmann::json reports = nlohmann::json::array();
  feedback::RenderOptions opts;
  opts.color = config.color;
  for (const auto& r : result.reports) {
    marks.push_back({{"submission_id", r.submission_id}, {"marks", afg::to_json(r.marks)}});
    reports.push_back(feedback::to_json(r));
    const auto name = r.submission_id + "." + std::string(feedback::file_extension(config.report_format));
    write_file(config.out_dir / "reports" / name, feedback::render_report(r, config.report_format, opts));
  }
  nlohmann::json key_json = nlohmann::json::array();
  for (const auto& k : result.keys) key_json.push_back(ingest::to_json(k));
  write_json(config.out_dir / "marks.json", {{"seed", config.seed}, {"submissions", marks}});
  write_json(config.out_dir / "feedback.json",
             {{"seed", config.seed}, {"answer_keys", key_json}, {"warnings", result.warnings}, {"reports", reports}});
  return {{"command", "grade"}, {"seed", config.seed}, {"graded", result.reports.size()}, {"marks", marks}};
}

nlohmann::json cmd_eval(const RunConfig& config) {
  const auto subs = load_submissions(config);
  const auto keys = load_keys(config);
  const scoring::NeuralAbstractScorer scorer(load_model_file(config.aes_model, "AES model"),
                                             load_vocab(config.aes_vocab, "AES vocabulary"));
  const auto e = evaluate_marks(subs, keys, scorer, config.thresholds);
  nlohmann::json report = to_json(e);
  report["seed"] = config.seed;
  write_json(config.out_dir / "eval.json", report);
  report["command"] = "eval";
  return report;
}

// ---------------------------------------------------------------------------

namespace {

void print_summary(const nlohmann::json& summary, std::ostream& out) {
  for (const auto& [key, value] : summary.items()) {
    if (value.is_array() || value.is_object()) continue;
    out << key << ": " << (value.is_string() ? value.get<std::string>() : value.dump()) << '\n';
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Grading and structural feedback for literature-abstracting assignments", "afg"};
  app.require_subcommand(1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  bool json = false;
  bool no_color = false;
  app.add_option("--config", config_path, "Run configuration (JSON); falls back to $AFG_CONFIG");
  app.add_option("--seed", seed, "Root seed (overrides the config)");
  app.add_option("--out", out_dir, "Output directory (overrides the config)");
  app.add_flag("--json", json, "Print only a machine-readable JSON summary on stdout");
  app.add_flag("--no-color", no_color, "Plain [B]/[T]/[O] tags in terminal reports");

  auto* pretrain = app.add_subcommand("pretrain", "Pre-train the abstract scorer on scored corpora");
  auto* finetune = app.add_subcommand("finetune", "Fine-tune the abstract scorer on marked submissions");
  std::string base_model;
  finetune->add_option("--base-model", base_model, "Pre-trained model (default: paths.aes_model)");
  auto* train_classifier = app.add_subcommand("train-classifier", "Train the sentence-role classifier");
  auto* grade = app.add_subcommand("grade", "Mark submissions and write feedback reports");
  std::string format;
  grade->add_option("--format", format, "Report format: terminal, html or markdown");
  auto* eval = app.add_subcommand("eval", "Compare machine marks with human marks");
  // Global options may also follow the subcommand name.
  for (auto* sub : {pretrain, finetune, train_classifier, grade, eval}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (config_path.empty())
      if (const char* env = std::getenv("AFG_CONFIG")) config_path = env;
    if (config_path.empty()) throw ConfigError("no config given (use --config or AFG_CONFIG)");
    RunConfig config = load_config(config_path);
    if (seed) config.seed = *seed;
    if (!out_dir.empty()) config.out_dir = out_dir;
    if (no_color) config.color = false;
    if (!format.empty()) {
      const auto f = feedback::format_from_string(format);
      if (!f) throw ConfigError("unknown report format '" + format + "'");
      config.report_format = *f;
    }

    nlohmann::json summary;
    if (*pretrain) summary = cmd_pretrain(config);
    else if (*finetune) summary = cmd_finetune(config, base_model.empty() ? config.aes_model : fs::path(base_model));
    else if (*train_classifier) summary = cmd_train_classifier(config);
    else if (*grade) summary = cmd_grade(config);
    else if (*eval) summary = cmd_eval(config);

    if (json)
      out << summary.dump() << '\n';
    else
      print_summary(summary, out);
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DivergedError& e) {
    err << "training error: " << e.what() << '\n';
    return kExitDiverged;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const ModelFormatError& e) {
    err << "model error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace afg::cli
