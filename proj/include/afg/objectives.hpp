#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace afg::objectives {

// Dynamic weight schedule p(t) = min(a, a * exp(-c * (t/T - b))).
struct LossSchedule {
  double a = 1.0;
  double b = 0.1;
  double c = 10.0;
  std::int64_t total_steps = 1;  // T

  // a in (0, 1], b in [0, 1], c >= 0, T >= 1.
  void validate() const;
};

double weight_p(std::int64_t t, const LossSchedule& s);

// Population standard deviation (divisor N).
double population_stddev(std::span<const double> v);

// |sigma(targets) - sigma(preds)|.
double stde(std::span<const double> preds, std::span<const double> targets);
double mse(std::span<const double> preds, std::span<const double> targets);
double mae(std::span<const double> preds, std::span<const double> targets);
double rmse(std::span<const double> preds, std::span<const double> targets);
double max_error(std::span<const double> preds, std::span<const double> targets);

// `paper`: the denominator is the spread of the predictions around their own
// mean. `standard`: the usual coefficient of determination around the target
// mean.
enum class R2Variant { paper, standard };
double r2(std::span<const double> preds, std::span<const double> targets,
          R2Variant variant = R2Variant::paper);

// p * STDE + (1 - p) * MSE.
double combined_loss(std::span<const double> preds, std::span<const double> targets, double p);
double combined_loss(std::span<const double> preds, std::span<const double> targets,
                     std::int64_t t, const LossSchedule& s);

// d loss / d preds. The STDE term uses the subgradient 0 where the two
// spreads coincide or the predictions are constant.
std::vector<double> stde_gradient(std::span<const double> preds, std::span<const double> targets);
std::vector<double> mse_gradient(std::span<const double> preds, std::span<const double> targets);
std::vector<double> combined_loss_gradient(std::span<const double> preds,
                                           std::span<const double> targets, double p);

struct EvalReport {
  std::optional<double> r2_paper;     // empty when predictions are constant
  std::optional<double> r2_standard;  // empty when targets are constant
  double mae = 0.0;
  double rmse = 0.0;
  double max_error = 0.0;
  std::size_t n = 0;
};

EvalReport evaluate(std::span<const double> preds, std::span<const double> targets);
nlohmann::json to_json(const EvalReport& r);

double accuracy(std::span<const int> predicted, std::span<const int> truth);

// Rows are true labels, columns predicted labels.
struct ConfusionMatrix {
  std::size_t n_classes = 0;
  std::vector<std::int64_t> counts;  // row-major n x n

  std::int64_t at(std::size_t truth, std::size_t predicted) const {
    return counts[truth * n_classes + predicted];
  }
  std::int64_t total() const;
  std::int64_t trace() const;
};

ConfusionMatrix confusion(std::span<const int> predicted, std::span<const int> truth,
                          std::size_t n_classes);

nlohmann::json to_json(const ConfusionMatrix& m, const std::vector<std::string>& labels);

}  // namespace afg::objectives
