#include "afg/objectives.hpp"

#include <algorithm>
#include <cmath>

#include "afg/error.hpp"

namespace afg::objectives {

namespace {

void require_pair(std::span<const double> preds, std::span<const double> targets, std::size_t min_n,
                  const char* what) {
  if (preds.size() != targets.size())
    throw ArgumentError(std::string(what) + ": length mismatch (" + std::to_string(preds.size()) +
                        " vs " + std::to_string(targets.size()) + ")");
  if (preds.size() < min_n)
    throw ArgumentError(std::string(what) + ": needs at least " + std::to_string(min_n) +
                        " elements");
}

double mean(std::span<const double> v) {
  double s = 0.0;
  for (const double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

void LossSchedule::validate() const {
  if (!(a > 0.0 && a <= 1.0)) throw ArgumentError("loss schedule: a must lie in (0, 1]");
  if (!(b >= 0.0 && b <= 1.0)) throw ArgumentError("loss schedule: b must lie in [0, 1]");
  if (!(c >= 0.0)) throw ArgumentError("loss schedule: c must be >= 0");
  if (total_steps < 1) throw ArgumentError("loss schedule: T must be >= 1");
}

double weight_p(std::int64_t t, const LossSchedule& s) {
  s.validate();
  if (t < 0 || t > s.total_steps)
    throw ArgumentError("weight_p: step " + std::to_string(t) + " outside [0, " +
                        std::to_string(s.total_steps) + "]");
  const double progress = static_cast<double>(t) / static_cast<double>(s.total_steps);
  return std::min(s.a, s.a * std::exp(-s.c * (progress - s.b)));
}

double population_stddev(std::span<const double> v) {
  if (v.empty()) throw ArgumentError("stddev of empty vector");
  const double m = mean(v);
  double ss = 0.0;
  for (const double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

double stde(std::span<const double> preds, std::span<const double> targets) {
  require_pair(preds, targets, 2, "stde");
  return std::abs(population_stddev(targets) - population_stddev(preds));
}

double mse(std::span<const double> preds, std::span<const double> targets) {
  require_pair(preds, targets, 1, "mse");
  double s = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) s += (preds[i] - targets[i]) * (preds[i] - targets[i]);
  return s / static_cast<double>(preds.size());
}

double mae(std::span<const double> preds, std::span<const double> targets) {
  require_pair(preds, targets, 1, "mae");
  double s = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) s += std::abs(preds[i] - targets[i]);
  return s / static_cast<double>(preds.size());
}

double rmse(std::span<const double> preds, std::span<const double> targets) {
  return std::sqrt(mse(preds, targets));
}

double max_error(std::span<const double> preds, std::span<const double> targets) {
  require_pair(preds, targets, 1, "max_error");
  double m = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) m = std::max(m, std::abs(preds[i] - targets[i]));
  return m;
}

double r2(std::span<const double> preds, std::span<const double> targets, R2Variant variant) {
  require_pair(preds, targets, 2, "r2");
  const auto reference = variant == R2Variant::paper ? preds : targets;
  const double m = mean(reference);
  double ss_res = 0.0, ss_ref = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    ss_res += (preds[i] - targets[i]) * (preds[i] - targets[i]);
    ss_ref += (reference[i] - m) * (reference[i] - m);
  }
  if (ss_ref == 0.0)
    throw DegenerateError(variant == R2Variant::paper ? "r2: constant predictions"
                                                      : "r2: constant targets");
  return 1.0 - ss_res / ss_ref;
}

double combined_loss(std::span<const double> preds, std::span<const double> targets, double p) {
  require_pair(preds, targets, 2, "combined_loss");
  return p * stde(preds, targets) + (1.0 - p) * mse(preds, targets);
}

double combined_loss(std::span<const double> preds, std::span<const double> targets,
                     std::int64_t t, const LossSchedule& s) {
  return combined_loss(preds, targets, weight_p(t, s));
}

std::vector<double> stde_gradient(std::span<const double> preds, std::span<const double> targets) {
  require_pair(preds, targets, 2, "stde_gradient");
  const double sp = population_stddev(preds);
  const double st = population_stddev(targets);
  std::vector<double> g(preds.size(), 0.0);
  if (sp == 0.0 || sp == st) return g;
  const double sign = sp > st ? 1.0 : -1.0;
  const double m = mean(preds);
  const double n = static_cast<double>(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) g[i] = sign * (preds[i] - m) / (n * sp);
  return g;
}

std::vector<double> mse_gradient(std::span<const double> preds, std::span<const double> targets) {
  require_pair(preds, targets, 1, "mse_gradient");
  std::vector<double> g(preds.size());
  const double n = static_cast<double>(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) g[i] = 2.0 * (preds[i] - targets[i]) / n;
  return g;
}

std::vector<double> combined_loss_gradient(std::span<const double> preds,
                                           std::span<const double> targets, double p) {
  require_pair(preds, targets, 2, "combined_loss_gradient");
  auto g = mse_gradient(preds, targets);
  for (auto& x : g) x *= (1.0 - p);
  if (p != 0.0) {
    const auto gs = stde_gradient(preds, targets);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += p * gs[i];
  }
  return g;
}

EvalReport evaluate(std::span<const double> preds, std::span<const double> targets) {
  require_pair(preds, targets, 1, "evaluate");
  EvalReport r;
  r.n = preds.size();
  r.mae = mae(preds, targets);
  r.rmse = rmse(preds, targets);
  r.max_error = max_error(preds, targets);
  if (r.n >= 2) {
    try {
      r.r2_paper = r2(preds, targets, R2Variant::paper);
    } catch (const DegenerateError&) {
    }
    try {
      r.r2_standard = r2(preds, targets, R2Variant::standard);
    } catch (const DegenerateError&) {
    }
  }
  return r;
}

nlohmann::json to_json(const EvalReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); };
  return {{"r2_paper", opt(r.r2_paper)}, {"r2_standard", opt(r.r2_standard)},
          {"mae", r.mae},                {"rmse", r.rmse},
          {"max_error", r.max_error},    {"n", r.n}};
}

double accuracy(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) throw ArgumentError("accuracy: length mismatch");
  if (predicted.empty()) throw ArgumentError("accuracy: empty label vectors");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) hits += predicted[i] == truth[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

std::int64_t ConfusionMatrix::total() const {
  std::int64_t s = 0;
  for (const auto c : counts) s += c;
  return s;
}

std::int64_t ConfusionMatrix::trace() const {
  std::int64_t s = 0;
  for (std::size_t i = 0; i < n_classes; ++i) s += at(i, i);
  return s;
}

ConfusionMatrix confusion(std::span<const int> predicted, std::span<const int> truth,
                          std::size_t n_classes) {
  if (predicted.size() != truth.size()) throw ArgumentError("confusion: length mismatch");
  if (predicted.empty()) throw ArgumentError("confusion: empty label vectors");
  if (n_classes == 0) throw ArgumentError("confusion: n_classes must be positive");
  ConfusionMatrix m{n_classes, std::vector<std::int64_t>(n_classes * n_classes, 0)};
  const auto n = static_cast<int>(n_classes);
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i] < 0 || predicted[i] >= n || truth[i] < 0 || truth[i] >= n)
      throw ArgumentError("confusion: label out of range at index " + std::to_string(i));
    ++m.counts[static_cast<std::size_t>(truth[i]) * n_classes + static_cast<std::size_t>(predicted[i])];
  }
  return m;
}

nlohmann::json to_json(const ConfusionMatrix& m, const std::vector<std::string>& labels) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t r = 0; r < m.n_classes; ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t c = 0; c < m.n_classes; ++c) row.push_back(m.at(r, c));
    rows.push_back(std::move(row));
  }
  return {{"labels", labels}, {"counts", rows}, {"rows", "true"}, {"cols", "predicted"}};
}

}  // namespace afg::objectives
