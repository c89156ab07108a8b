#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hmc/data/labels.hpp"

namespace hmc::metrics {

/// Rows are true classes, columns predicted classes.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t n_classes = data::kNumSubtypes);

  std::size_t n_classes() const { return n_; }
  std::size_t& at(std::size_t truth, std::size_t predicted) { return counts_[truth * n_ + predicted]; }
  std::size_t at(std::size_t truth, std::size_t predicted) const { return counts_[truth * n_ + predicted]; }
  std::size_t total() const;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::size_t n_;
  std::vector<std::size_t> counts_;
};

ConfusionMatrix confusion_matrix(std::span<const std::size_t> predictions, std::span<const std::size_t> truths,
                                 std::size_t n_classes = data::kNumSubtypes);

struct BinaryCounts {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

/// One-vs-rest reduction for `positive`.
BinaryCounts binary_counts(const ConfusionMatrix& matrix, std::size_t positive);

/// Zero denominators yield 0 with the matching flag set.
struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool precision_undefined = false;
  bool recall_undefined = false;
  bool f1_undefined = false;
};

/// precision TP/(TP+FP), recall TP/(TP+FN), F1 2TP/(2TP+FP+FN).
Prf prf(const BinaryCounts& counts);

/// Harmonic mean 2PR/(P+R); 0 when P+R = 0.
double f1_score(double precision, double recall);

/// trace / total; throws on an empty matrix.
double accuracy(const ConfusionMatrix& matrix);

/// Unweighted mean; throws on an empty list.
double macro_average(std::span<const double> values);

struct RocPoint {
  double threshold;  // score >= threshold is called positive; the first point uses +inf
  double fpr;
  double tpr;
};

using RocCurve = std::vector<RocPoint>;

/// Labels are 1 for positive, 0 for negative. One point per distinct score
/// (ties move together) plus the +inf start.
RocCurve roc_curve(std::span<const double> scores, std::span<const std::size_t> labels);

/// Trapezoidal area under the curve.
double auc(const RocCurve& curve);

std::string roc_to_csv(const RocCurve& curve);

struct ClassMetrics {
  Prf prf;
  std::optional<double> auc;  // empty when the test set lacks this class or its complement
  std::optional<RocCurve> roc;
};

struct MetricsReport {
  ConfusionMatrix matrix;
  std::array<ClassMetrics, data::kNumSubtypes> per_class;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  std::optional<double> macro_auc;  // present only when every class has an AUC
  double accuracy = 0.0;            // overall multiclass accuracy
};

/// Builds the report from hard labels and per-sample 3-class scores.
MetricsReport compute_report(std::span<const std::size_t> predictions, std::span<const std::size_t> truths,
                             std::span<const std::array<double, data::kNumSubtypes>> scores);

nlohmann::json to_json(const MetricsReport& report);
nlohmann::json to_json(const ConfusionMatrix& matrix);
ConfusionMatrix matrix_from_json(const nlohmann::json& j);
std::string confusion_to_csv(const ConfusionMatrix& matrix);

}  // namespace hmc::metrics
