#include "afg/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <numeric>
#include <ostream>

#include "afg/error.hpp"
#include "afg/log.hpp"
#include "afg/rng.hpp"

namespace afg::nn {

void EncoderConfig::validate() const {
  if (vocab_size == 0 || embed_dim == 0 || hidden_dim == 0 || attention_dim == 0)
    throw ArgumentError("encoder config: all dimensions must be positive");
  if (max_sequence_length == 0) throw ArgumentError("encoder config: max_sequence_length must be positive");
  if (head == HeadKind::classification && n_classes < 2)
    throw ArgumentError("encoder config: classification needs at least two classes");
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ArgumentError("train config: epochs must be >= 1");
  if (batch_size < 1) throw ArgumentError("train config: batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw ArgumentError("train config: learning_rate must be > 0");
}

Model init_model(const EncoderConfig& config) {
  config.validate();
  Model m{config, ModelParams::zeros(config)};
  SplitMix64 rng(config.seed);
  m.params.visit([&](std::string_view name, Tensor<float>& t) {
    if (name.ends_with(".bias")) return;  // biases stay zero
    const double s = std::sqrt(6.0 / static_cast<double>(t.rows + t.cols));
    for (auto& w : t.data) w = static_cast<float>(rng.uniform(-s, s));
  });
  return m;
}

namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void softmax_inplace(std::vector<double>& v) {
  const double m = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (auto& x : v) {
    x = std::exp(x - m);
    sum += x;
  }
  for (auto& x : v) x /= sum;
}

struct DirectionTrace {
  std::vector<double> gates;   // L x 4H, post-activation
  std::vector<double> cells;   // L x H
  std::vector<double> hidden;  // L x H
};

struct Trace {
  std::vector<TokenId> ids;
  DirectionTrace fwd;
  DirectionTrace bwd;
  std::vector<double> states;     // L x 2H
  std::vector<double> projected;  // L x A, tanh(W h)
  std::vector<double> attention;  // L
  std::vector<double> context;    // 2H
  std::vector<double> logits;     // K
  bool truncated = false;
};

// Position processed at step s, and its predecessor in processing order.
inline std::size_t position(std::size_t s, std::size_t len, bool reverse) {
  return reverse ? len - 1 - s : s;
}

void run_direction(const LstmWeights<float>& w, const Tensor<float>& emb,
                   std::span<const TokenId> ids, bool reverse, std::size_t hdim,
                   DirectionTrace& tr) {
  const std::size_t len = ids.size(), edim = emb.cols, h4 = 4 * hdim;
  tr.gates.assign(len * h4, 0.0);
  tr.cells.assign(len * hdim, 0.0);
  tr.hidden.assign(len * hdim, 0.0);
  std::vector<double> z(h4);
  for (std::size_t s = 0; s < len; ++s) {
    const std::size_t t = position(s, len, reverse);
    const float* x = emb.row(static_cast<std::size_t>(ids[t]));
    const double* h_prev = s > 0 ? &tr.hidden[position(s - 1, len, reverse) * hdim] : nullptr;
    const double* c_prev = s > 0 ? &tr.cells[position(s - 1, len, reverse) * hdim] : nullptr;
    for (std::size_t r = 0; r < h4; ++r) {
      double acc = w.bias.data[r];
      const float* wx = w.input.row(r);
      for (std::size_t k = 0; k < edim; ++k) acc += static_cast<double>(wx[k]) * x[k];
      if (h_prev) {
        const float* wh = w.recurrent.row(r);
        for (std::size_t k = 0; k < hdim; ++k) acc += static_cast<double>(wh[k]) * h_prev[k];
      }
      z[r] = acc;
    }
    double* g = &tr.gates[t * h4];
    double* c = &tr.cells[t * hdim];
    double* h = &tr.hidden[t * hdim];
    for (std::size_t j = 0; j < hdim; ++j) {
      const double ig = sigmoid(z[j]);
      const double fg = sigmoid(z[hdim + j]);
      const double cg = std::tanh(z[2 * hdim + j]);
      const double og = sigmoid(z[3 * hdim + j]);
      g[j] = ig;
      g[hdim + j] = fg;
      g[2 * hdim + j] = cg;
      g[3 * hdim + j] = og;
      c[j] = fg * (c_prev ? c_prev[j] : 0.0) + ig * cg;
      h[j] = og * std::tanh(c[j]);
    }
  }
}

void backprop_direction(const LstmWeights<float>& w, const Tensor<float>& emb,
                        std::span<const TokenId> ids, bool reverse, std::size_t hdim,
                        const DirectionTrace& tr, std::span<const double> dh_ext,
                        LstmWeights<double>& gw, Tensor<double>& gemb) {
  const std::size_t len = ids.size(), edim = emb.cols, h4 = 4 * hdim;
  std::vector<double> dh_next(hdim, 0.0), dc_next(hdim, 0.0), dz(h4, 0.0);
  for (std::size_t s = len; s-- > 0;) {
    const std::size_t t = position(s, len, reverse);
    const bool has_prev = s > 0;
    const std::size_t tp = has_prev ? position(s - 1, len, reverse) : 0;
    const double* g = &tr.gates[t * h4];
    const double* c = &tr.cells[t * hdim];
    for (std::size_t j = 0; j < hdim; ++j) {
      const double ig = g[j], fg = g[hdim + j], cg = g[2 * hdim + j], og = g[3 * hdim + j];
      const double dh = dh_ext[t * hdim + j] + dh_next[j];
      const double tc = std::tanh(c[j]);
      const double d_o = dh * tc;
      const double dc = dh * og * (1.0 - tc * tc) + dc_next[j];
      const double c_prev = has_prev ? tr.cells[tp * hdim + j] : 0.0;
      dz[j] = dc * cg * ig * (1.0 - ig);
      dz[hdim + j] = dc * c_prev * fg * (1.0 - fg);
      dz[2 * hdim + j] = dc * ig * (1.0 - cg * cg);
      dz[3 * hdim + j] = d_o * og * (1.0 - og);
      dc_next[j] = dc * fg;
    }
    const auto token = static_cast<std::size_t>(ids[t]);
    const float* x = emb.row(token);
    double* gx = gemb.row(token);
    const double* h_prev = has_prev ? &tr.hidden[tp * hdim] : nullptr;
    std::fill(dh_next.begin(), dh_next.end(), 0.0);
    for (std::size_t r = 0; r < h4; ++r) {
      const double d = dz[r];
      gw.bias.data[r] += d;
      double* gwx = gw.input.row(r);
      const float* wx = w.input.row(r);
      for (std::size_t k = 0; k < edim; ++k) {
        gwx[k] += d * x[k];
        gx[k] += d * wx[k];
      }
      if (h_prev) {
        double* gwh = gw.recurrent.row(r);
        const float* wh = w.recurrent.row(r);
        for (std::size_t k = 0; k < hdim; ++k) {
          gwh[k] += d * h_prev[k];
          dh_next[k] += d * wh[k];
        }
      }
    }
  }
}

Trace forward_pass(std::span<const TokenId> tokens, const Model& model) {
  const auto& cfg = model.config;
  const auto& p = model.params;
  if (tokens.empty()) throw ArgumentError("encode: empty token sequence");
  Trace tr;
  const std::size_t len = std::min(tokens.size(), cfg.max_sequence_length);
  tr.truncated = len < tokens.size();
  tr.ids.assign(tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(len));
  for (const auto id : tr.ids)
    if (id < 0 || static_cast<std::size_t>(id) >= cfg.vocab_size)
      throw ArgumentError("encode: token id " + std::to_string(id) + " outside vocabulary");

  const std::size_t hdim = cfg.hidden_dim, h2 = 2 * hdim, adim = cfg.attention_dim;
  run_direction(p.forward, p.embedding, tr.ids, false, hdim, tr.fwd);
  run_direction(p.backward, p.embedding, tr.ids, true, hdim, tr.bwd);

  tr.states.assign(len * h2, 0.0);
  for (std::size_t t = 0; t < len; ++t) {
    std::copy_n(&tr.fwd.hidden[t * hdim], hdim, &tr.states[t * h2]);
    std::copy_n(&tr.bwd.hidden[t * hdim], hdim, &tr.states[t * h2 + hdim]);
  }

  tr.projected.assign(len * adim, 0.0);
  tr.attention.assign(len, 0.0);
  for (std::size_t t = 0; t < len; ++t) {
    const double* st = &tr.states[t * h2];
    double score = 0.0;
    for (std::size_t a = 0; a < adim; ++a) {
      const float* wa = p.attention_projection.row(a);
      double acc = 0.0;
      for (std::size_t k = 0; k < h2; ++k) acc += static_cast<double>(wa[k]) * st[k];
      const double u = std::tanh(acc);
      tr.projected[t * adim + a] = u;
      score += static_cast<double>(p.attention_context.data[a]) * u;
    }
    tr.attention[t] = score;
  }
  softmax_inplace(tr.attention);

  tr.context.assign(h2, 0.0);
  for (std::size_t t = 0; t < len; ++t)
    for (std::size_t k = 0; k < h2; ++k) tr.context[k] += tr.attention[t] * tr.states[t * h2 + k];

  const std::size_t kout = cfg.head_outputs();
  tr.logits.assign(kout, 0.0);
  for (std::size_t o = 0; o < kout; ++o) {
    const float* wo = p.head_weight.row(o);
    double acc = p.head_bias.data[o];
    for (std::size_t k = 0; k < h2; ++k) acc += static_cast<double>(wo[k]) * tr.context[k];
    tr.logits[o] = acc;
  }
  return tr;
}

// Adds d(loss)/d(params) given d(loss)/d(logits).
void backward_pass(const Trace& tr, std::span<const double> dlogits, const Model& model,
                   Gradients& g) {
  const auto& cfg = model.config;
  const auto& p = model.params;
  const std::size_t len = tr.ids.size(), hdim = cfg.hidden_dim, h2 = 2 * hdim,
                    adim = cfg.attention_dim, kout = cfg.head_outputs();

  std::vector<double> dctx(h2, 0.0);
  for (std::size_t o = 0; o < kout; ++o) {
    const double d = dlogits[o];
    g.head_bias.data[o] += d;
    double* gw = g.head_weight.row(o);
    const float* wo = p.head_weight.row(o);
    for (std::size_t k = 0; k < h2; ++k) {
      gw[k] += d * tr.context[k];
      dctx[k] += d * wo[k];
    }
  }

  // Softmax-weighted pooling.
  std::vector<double> dalpha(len, 0.0);
  double weighted = 0.0;
  for (std::size_t t = 0; t < len; ++t) {
    double acc = 0.0;
    for (std::size_t k = 0; k < h2; ++k) acc += dctx[k] * tr.states[t * h2 + k];
    dalpha[t] = acc;
    weighted += tr.attention[t] * acc;
  }

  std::vector<double> dstates(len * h2, 0.0);
  for (std::size_t t = 0; t < len; ++t) {
    const double alpha = tr.attention[t];
    const double dscore = alpha * (dalpha[t] - weighted);
    const double* st = &tr.states[t * h2];
    double* ds = &dstates[t * h2];
    for (std::size_t k = 0; k < h2; ++k) ds[k] = alpha * dctx[k];
    for (std::size_t a = 0; a < adim; ++a) {
      const double u = tr.projected[t * adim + a];
      g.attention_context.data[a] += dscore * u;
      const double dpre = dscore * static_cast<double>(p.attention_context.data[a]) * (1.0 - u * u);
      double* gwa = g.attention_projection.row(a);
      const float* wa = p.attention_projection.row(a);
      for (std::size_t k = 0; k < h2; ++k) {
        gwa[k] += dpre * st[k];
        ds[k] += dpre * wa[k];
      }
    }
  }

  std::vector<double> dh_fwd(len * hdim), dh_bwd(len * hdim);
  for (std::size_t t = 0; t < len; ++t) {
    std::copy_n(&dstates[t * h2], hdim, &dh_fwd[t * hdim]);
    std::copy_n(&dstates[t * h2 + hdim], hdim, &dh_bwd[t * hdim]);
  }
  backprop_direction(p.forward, p.embedding, tr.ids, false, hdim, tr.fwd, dh_fwd, g.forward,
                     g.embedding);
  backprop_direction(p.backward, p.embedding, tr.ids, true, hdim, tr.bwd, dh_bwd, g.backward,
                     g.embedding);
}

void require_head(const Model& model, HeadKind kind, const char* what) {
  if (model.config.head != kind)
    throw ArgumentError(std::string(what) + ": model has the wrong head type");
}

void warn_truncated(std::size_t len, std::size_t limit) {
  warn("input of " + std::to_string(len) + " pieces truncated to " + std::to_string(limit));
}

}  // namespace

Encoding encode(std::span<const TokenId> tokens, const Model& model) {
  auto tr = forward_pass(tokens, model);
  if (tr.truncated) warn_truncated(tokens.size(), model.config.max_sequence_length);
  return {std::move(tr.context), std::move(tr.attention), tr.truncated};
}

std::vector<double> head_logits(std::span<const TokenId> tokens, const Model& model) {
  auto tr = forward_pass(tokens, model);
  if (tr.truncated) warn_truncated(tokens.size(), model.config.max_sequence_length);
  return std::move(tr.logits);
}

double predict_score(std::span<const TokenId> tokens, const Model& model) {
  require_head(model, HeadKind::regression, "predict_score");
  return sigmoid(head_logits(tokens, model)[0]);
}

double predict_score(std::string_view text, const Model& model, const text::Vocabulary& vocab) {
  const auto seq = text::tokenize(text, vocab);
  if (seq.ids.empty()) throw ArgumentError("predict_score: empty text");
  return predict_score(seq.ids, model);
}

std::vector<double> class_probabilities(std::span<const TokenId> tokens, const Model& model) {
  require_head(model, HeadKind::classification, "class_probabilities");
  auto logits = head_logits(tokens, model);
  softmax_inplace(logits);
  return logits;
}

std::array<double, 3> classify_sentence(std::string_view sentence, const Model& model,
                                        const text::Vocabulary& vocab) {
  if (model.config.head != HeadKind::classification || model.config.n_classes != 3)
    throw ArgumentError("classify_sentence: needs a 3-class classification head");
  const auto seq = text::tokenize(sentence, vocab);
  if (seq.ids.empty()) throw ArgumentError("classify_sentence: empty sentence");
  const auto probs = class_probabilities(seq.ids, model);
  return {probs[0], probs[1], probs[2]};
}

// ---------------------------------------------------------------------------

double batch_loss(const Model& model, std::span<const Example> batch, const LossSpec& loss,
                  Gradients* grads) {
  if (batch.empty()) throw ArgumentError("batch_loss: empty batch");
  const bool regression = model.config.head == HeadKind::regression;
  if (regression == (loss.kind == LossKind::cross_entropy))
    throw ArgumentError("batch_loss: loss kind does not match the model head");

  std::vector<Trace> traces;
  traces.reserve(batch.size());
  for (const auto& ex : batch) traces.push_back(forward_pass(ex.tokens, model));
  const std::size_t n = batch.size();
  const double inv_n = 1.0 / static_cast<double>(n);

  std::vector<std::vector<double>> dlogits(n);
  double value = 0.0;
  if (regression) {
    std::vector<double> preds(n), targets(n);
    for (std::size_t i = 0; i < n; ++i) {
      preds[i] = sigmoid(traces[i].logits[0]);
      targets[i] = batch[i].target;
    }
    // A one-element batch has no spread, so the STDE term drops out.
    const double p = (loss.kind == LossKind::combined && n >= 2) ? loss.p : 0.0;
    std::vector<double> dpred;
    if (p != 0.0) {
      value = objectives::combined_loss(preds, targets, p);
      if (grads) dpred = objectives::combined_loss_gradient(preds, targets, p);
    } else {
      value = objectives::mse(preds, targets);
      if (grads) dpred = objectives::mse_gradient(preds, targets);
    }
    if (grads)
      for (std::size_t i = 0; i < n; ++i) dlogits[i] = {dpred[i] * preds[i] * (1.0 - preds[i])};
  } else {
    const std::size_t k = model.config.n_classes;
    for (std::size_t i = 0; i < n; ++i) {
      auto probs = traces[i].logits;
      softmax_inplace(probs);
      const auto label = static_cast<std::size_t>(batch[i].target);
      if (batch[i].target < 0 || label >= k || static_cast<double>(label) != batch[i].target)
        throw ArgumentError("batch_loss: class target out of range");
      // log-sum-exp form keeps the loss finite for confident wrong answers.
      const auto& z = traces[i].logits;
      const double m = *std::max_element(z.begin(), z.end());
      double lse = 0.0;
      for (const double v : z) lse += std::exp(v - m);
      value += (m + std::log(lse) - z[label]) * inv_n;
      if (grads) {
        dlogits[i] = probs;
        dlogits[i][label] -= 1.0;
        for (auto& d : dlogits[i]) d *= inv_n;
      }
    }
  }
  if (grads)
    for (std::size_t i = 0; i < n; ++i) backward_pass(traces[i], dlogits[i], model, *grads);
  return value;
}

std::int64_t total_steps(std::size_t n, std::size_t epochs, std::size_t batch_size) {
  if (batch_size == 0) throw ArgumentError("total_steps: batch_size must be positive");
  return static_cast<std::int64_t>(epochs * ((n + batch_size - 1) / batch_size));
}

namespace {

void zero(Gradients& g) {
  g.visit([](std::string_view, Tensor<double>& t) { std::fill(t.data.begin(), t.data.end(), 0.0); });
}

}  // namespace

TrainResult train(std::span<const Example> data, const TrainConfig& config, Model model) {
  if (data.empty()) throw ArgumentError("train: empty data");
  config.validate();
  const bool regression = model.config.head == HeadKind::regression;

  TrainResult result{std::move(model), {}};
  Model& m = result.model;
  TrainLog& log = result.log;
  log.total_steps = total_steps(data.size(), config.epochs, config.batch_size);
  objectives::LossSchedule schedule = config.schedule;
  schedule.total_steps = log.total_steps;
  if (regression) schedule.validate();

  Gradients grads = Gradients::zeros(m.config);
  Gradients moment1 = Gradients::zeros(m.config);
  Gradients moment2 = Gradients::zeros(m.config);

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<Example> batch;
  std::int64_t t = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    SplitMix64 rng(derive_seed(config.seed, epoch));
    shuffle(std::span<std::size_t>(order), rng);
    double epoch_sum = 0.0;
    std::size_t epoch_batches = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(data[order[i]]);

      LossSpec spec;
      if (regression) {
        spec.kind = LossKind::combined;
        spec.p = objectives::weight_p(t, schedule);
      } else {
        spec.kind = LossKind::cross_entropy;
      }
      zero(grads);
      const double loss = batch_loss(m, batch, spec, &grads);
      if (!std::isfinite(loss)) throw DivergedError(static_cast<std::size_t>(t));

      // Adam with bias correction.
      const double step = static_cast<double>(t + 1);
      const double c1 = 1.0 - std::pow(config.beta1, step);
      const double c2 = 1.0 - std::pow(config.beta2, step);
      std::size_t idx = 0;
      std::vector<Tensor<double>*> g_list, m1_list, m2_list;
      grads.visit([&](std::string_view, Tensor<double>& x) { g_list.push_back(&x); });
      moment1.visit([&](std::string_view, Tensor<double>& x) { m1_list.push_back(&x); });
      moment2.visit([&](std::string_view, Tensor<double>& x) { m2_list.push_back(&x); });
      m.params.visit([&](std::string_view, Tensor<float>& w) {
        auto& g = g_list[idx]->data;
        auto& m1 = m1_list[idx]->data;
        auto& m2 = m2_list[idx]->data;
        for (std::size_t i = 0; i < w.data.size(); ++i) {
          m1[i] = config.beta1 * m1[i] + (1.0 - config.beta1) * g[i];
          m2[i] = config.beta2 * m2[i] + (1.0 - config.beta2) * g[i] * g[i];
          const double update =
              config.learning_rate * (m1[i] / c1) / (std::sqrt(m2[i] / c2) + config.epsilon);
          w.data[i] = static_cast<float>(static_cast<double>(w.data[i]) - update);
        }
        ++idx;
      });
      bool finite = true;
      m.params.visit([&](std::string_view, const Tensor<float>& w) {
        for (const float x : w.data) finite = finite && std::isfinite(x);
      });
      if (!finite) throw DivergedError(static_cast<std::size_t>(t));

      log.steps.push_back({t, spec.p, loss});
      epoch_sum += loss;
      ++epoch_batches;
      ++t;
    }
    log.epoch_mean_loss.push_back(epoch_sum / static_cast<double>(epoch_batches));
  }
  return result;
}

Example make_example(std::string_view text, double target, const text::Vocabulary& vocab,
                     std::size_t max_sequence_length) {
  auto seq = text::tokenize(text, vocab);
  if (seq.ids.empty()) throw ArgumentError("make_example: text has no tokens");
  if (seq.ids.size() > max_sequence_length) seq.ids.resize(max_sequence_length);
  return {std::move(seq.ids), target};
}

// ---------------------------------------------------------------------------

GradCheckResult grad_check(const Model& model, std::span<const Example> batch, const LossSpec& loss,
                           const GradCheckOptions& options) {
  if (!(options.epsilon >= 1e-6 && options.epsilon <= 1e-3))
    throw ArgumentError("grad_check: epsilon must lie in [1e-6, 1e-3]");
  Gradients analytic = Gradients::zeros(model.config);
  batch_loss(model, batch, loss, &analytic);

  std::vector<char> used_rows(model.config.vocab_size, 0);
  for (const auto& ex : batch)
    for (std::size_t i = 0; i < std::min(ex.tokens.size(), model.config.max_sequence_length); ++i)
      used_rows[static_cast<std::size_t>(ex.tokens[i])] = 1;

  // Candidate weights per tensor.
  std::vector<std::vector<std::size_t>> candidates;
  std::vector<std::string> names;
  model.params.visit([&](std::string_view name, const Tensor<float>& t) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < t.size(); ++i)
      if (name != "embedding" || used_rows[i / t.cols]) idx.push_back(i);
    candidates.push_back(std::move(idx));
    names.emplace_back(name);
  });
  std::size_t total = 0;
  for (const auto& c : candidates) total += c.size();

  SplitMix64 rng(options.seed);
  Model work = model;
  std::vector<Tensor<float>*> work_tensors;
  work.params.visit([&](std::string_view, Tensor<float>& t) { work_tensors.push_back(&t); });
  std::vector<const Tensor<double>*> grad_tensors;
  analytic.visit([&](std::string_view, const Tensor<double>& t) { grad_tensors.push_back(&t); });

  GradCheckResult result;
  for (std::size_t ti = 0; ti < candidates.size(); ++ti) {
    auto& cand = candidates[ti];
    if (cand.empty()) continue;
    const auto share = static_cast<std::size_t>(
        std::llround(static_cast<double>(options.n_weights) * static_cast<double>(cand.size()) /
                     static_cast<double>(total)));
    const std::size_t k = std::min(cand.size(), std::max<std::size_t>(share, 8));
    shuffle(std::span<std::size_t>(cand), rng);
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t i = cand[j];
      float& w = work_tensors[ti]->data[i];
      const float original = w;
      const float plus = static_cast<float>(static_cast<double>(original) + options.epsilon);
      const float minus = static_cast<float>(static_cast<double>(original) - options.epsilon);
      w = plus;
      const double lp = batch_loss(work, batch, loss);
      w = minus;
      const double lm = batch_loss(work, batch, loss);
      w = original;
      // Divide by the step actually taken after rounding to f32.
      const double numeric = (lp - lm) / (static_cast<double>(plus) - static_cast<double>(minus));
      double a = grad_tensors[ti]->data[i];
      if (options.corrupt_tensor && *options.corrupt_tensor == ti) a = -a;
      const double rel = std::abs(a - numeric) / std::max(std::abs(a) + std::abs(numeric), 1e-8);
      if (rel > result.max_relative_error || result.checked == 0) {
        result.max_relative_error = rel;
        result.worst_tensor = names[ti];
      }
      ++result.checked;
    }
  }
  return result;
}

double grad_check(const Model& model, const Example& sample, double epsilon) {
  LossSpec spec;
  spec.kind = model.config.head == HeadKind::regression ? LossKind::mse : LossKind::cross_entropy;
  GradCheckOptions opts;
  opts.epsilon = epsilon;
  return grad_check(model, std::span<const Example>(&sample, 1), spec, opts).max_relative_error;
}

// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'A', 'F', 'G', 'M'};
constexpr std::uint8_t kVersion = 1;

class Fnv1a {
 public:
  void update(const std::string& bytes) {
    for (const unsigned char c : bytes) {
      h_ ^= c;
      h_ *= 0x100000001B3ULL;
    }
  }
  std::uint64_t value() const noexcept { return h_; }

 private:
  std::uint64_t h_ = 0xCBF29CE484222325ULL;
};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void put_f32(std::string& out, float f) {
  std::uint32_t bits = 0;
  std::memcpy(&bits, &f, sizeof bits);
  put_u32(out, bits);
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return v;
  }
  float f32() {
    const std::uint32_t bits = u32();
    float f = 0.0f;
    std::memcpy(&f, &bits, sizeof f);
    return f;
  }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) throw ModelCorruptError("model file truncated");
  }
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

std::string encode_payload(const Model& model) {
  const auto& c = model.config;
  std::string out;
  put_u32(out, static_cast<std::uint32_t>(c.vocab_size));
  put_u32(out, static_cast<std::uint32_t>(c.embed_dim));
  put_u32(out, static_cast<std::uint32_t>(c.hidden_dim));
  put_u32(out, static_cast<std::uint32_t>(c.attention_dim));
  put_u32(out, static_cast<std::uint32_t>(c.head));
  put_u32(out, static_cast<std::uint32_t>(c.n_classes));
  put_u32(out, static_cast<std::uint32_t>(c.max_sequence_length));
  put_u64(out, c.seed);
  model.params.visit([&](std::string_view, const Tensor<float>& t) {
    put_u32(out, static_cast<std::uint32_t>(t.rows));
    put_u32(out, static_cast<std::uint32_t>(t.cols));
    for (const float f : t.data) put_f32(out, f);
  });
  return out;
}

}  // namespace

void save_model(const Model& model, std::ostream& out) {
  const std::string payload = encode_payload(model);
  Fnv1a h;
  h.update(payload);
  std::string trailer;
  put_u64(trailer, h.value());
  out.write(kMagic, sizeof kMagic);
  out.put(static_cast<char>(kVersion));
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  out.write(trailer.data(), static_cast<std::streamsize>(trailer.size()));
  if (!out) throw Error("save_model: write failed");
}

Model load_model(std::istream& in) {
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < sizeof kMagic || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
    throw ModelFormatError("not a model file (bad magic)");
  if (bytes.size() < 5) throw ModelCorruptError("model file truncated");
  if (static_cast<std::uint8_t>(bytes[4]) != kVersion)
    throw ModelVersionError("unsupported model file version " +
                            std::to_string(static_cast<unsigned char>(bytes[4])));
  if (bytes.size() < 5 + 8) throw ModelCorruptError("model file truncated");
  const std::string_view payload(bytes.data() + 5, bytes.size() - 5 - 8);

  Reader r(payload);
  EncoderConfig c;
  c.vocab_size = r.u32();
  c.embed_dim = r.u32();
  c.hidden_dim = r.u32();
  c.attention_dim = r.u32();
  const std::uint32_t head = r.u32();
  if (head > 1) throw ModelCorruptError("model file: unknown head type");
  c.head = static_cast<HeadKind>(head);
  c.n_classes = r.u32();
  c.max_sequence_length = r.u32();
  c.seed = r.u64();
  try {
    c.validate();
  } catch (const ArgumentError& e) {
    throw ModelCorruptError(std::string("model file: ") + e.what());
  }

  Model m{c, ModelParams::zeros(c)};
  m.params.visit([&](std::string_view name, Tensor<float>& t) {
    const std::uint32_t rows = r.u32();
    const std::uint32_t cols = r.u32();
    if (rows != t.rows || cols != t.cols)
      throw ModelShapeError("model file: tensor " + std::string(name) + " is " +
                            std::to_string(rows) + "x" + std::to_string(cols) + ", config implies " +
                            std::to_string(t.rows) + "x" + std::to_string(t.cols));
    for (auto& f : t.data) f = r.f32();
  });
  if (r.remaining() != 0) throw ModelCorruptError("model file: trailing bytes before checksum");

  Fnv1a h;
  h.update(std::string(payload));
  Reader tail(std::string_view(bytes).substr(bytes.size() - 8));
  if (tail.u64() != h.value()) throw ModelCorruptError("model file: checksum mismatch");
  return m;
}

}  // namespace afg::nn
