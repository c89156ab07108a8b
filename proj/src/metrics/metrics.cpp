#include "hmc/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "hmc/core/error.hpp"

namespace hmc::metrics {

ConfusionMatrix::ConfusionMatrix(std::size_t n_classes) : n_(n_classes), counts_(n_classes * n_classes, 0) {
  if (n_classes == 0) throw ValidationError("confusion matrix needs at least one class");
}

std::size_t ConfusionMatrix::total() const { return std::accumulate(counts_.begin(), counts_.end(), std::size_t{0}); }

ConfusionMatrix confusion_matrix(std::span<const std::size_t> predictions, std::span<const std::size_t> truths,
                                 std::size_t n_classes) {
  if (predictions.size() != truths.size())
    throw ValidationError("confusion matrix needs equal-length label lists (" + std::to_string(predictions.size()) +
                          " predictions, " + std::to_string(truths.size()) + " truths)");
  ConfusionMatrix m(n_classes);
  for (std::size_t k = 0; k < truths.size(); ++k) {
    if (truths[k] >= n_classes || predictions[k] >= n_classes)
      throw ValidationError("label out of range at position " + std::to_string(k));
    m.at(truths[k], predictions[k]) += 1;
  }
  return m;
}

BinaryCounts binary_counts(const ConfusionMatrix& m, std::size_t positive) {
  if (positive >= m.n_classes()) throw ValidationError("positive class out of range");
  BinaryCounts c;
  c.tp = m.at(positive, positive);
  for (std::size_t j = 0; j < m.n_classes(); ++j) {
    if (j == positive) continue;
    c.fn += m.at(positive, j);
    c.fp += m.at(j, positive);
  }
  c.tn = m.total() - c.tp - c.fn - c.fp;
  return c;
}

Prf prf(const BinaryCounts& c) {
  Prf r;
  const auto tp = static_cast<double>(c.tp);
  if (c.tp + c.fp == 0)
    r.precision_undefined = true;
  else
    r.precision = tp / static_cast<double>(c.tp + c.fp);
  if (c.tp + c.fn == 0)
    r.recall_undefined = true;
  else
    r.recall = tp / static_cast<double>(c.tp + c.fn);
  const std::size_t denom = 2 * c.tp + c.fp + c.fn;
  if (denom == 0)
    r.f1_undefined = true;
  else
    r.f1 = 2.0 * tp / static_cast<double>(denom);
  return r;
}

double f1_score(double precision, double recall) {
  const double s = precision + recall;
  return s > 0.0 ? 2.0 * precision * recall / s : 0.0;
}

double accuracy(const ConfusionMatrix& m) {
  const std::size_t total = m.total();
  if (total == 0) throw ValidationError("accuracy of an empty confusion matrix is undefined");
  std::size_t trace = 0;
  for (std::size_t i = 0; i < m.n_classes(); ++i) trace += m.at(i, i);
  return static_cast<double>(trace) / static_cast<double>(total);
}

double macro_average(std::span<const double> values) {
  if (values.empty()) throw ValidationError("macro average of no values");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

RocCurve roc_curve(std::span<const double> scores, std::span<const std::size_t> labels) {
  if (scores.size() != labels.size()) throw ValidationError("ROC needs one label per score");
  for (std::size_t l : labels)
    if (l > 1) throw ValidationError("ROC labels must be 0 or 1");
  const auto n_pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), std::size_t{1}));
  const std::size_t n_neg = labels.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw ValidationError("ROC needs both positive and negative samples");
  for (double s : scores)
    if (!std::isfinite(s)) throw NumericError("ROC scores must be finite");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve curve{{std::numeric_limits<double>::infinity(), 0.0, 0.0}};
  std::size_t tp = 0, fp = 0;
  for (std::size_t k = 0; k < order.size();) {
    const double threshold = scores[order[k]];
    for (; k < order.size() && scores[order[k]] == threshold; ++k) (labels[order[k]] ? tp : fp) += 1;
    curve.push_back({threshold, static_cast<double>(fp) / static_cast<double>(n_neg),
                     static_cast<double>(tp) / static_cast<double>(n_pos)});
  }
  return curve;
}

double auc(const RocCurve& curve) {
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i)
    area += (curve[i].fpr - curve[i - 1].fpr) * (curve[i].tpr + curve[i - 1].tpr) / 2.0;
  return area;
}

namespace {

std::string number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

}  // namespace

std::string roc_to_csv(const RocCurve& curve) {
  std::string out = "threshold,fpr,tpr\n";
  for (const auto& p : curve) out += number(p.threshold) + "," + number(p.fpr) + "," + number(p.tpr) + "\n";
  return out;
}

MetricsReport compute_report(std::span<const std::size_t> predictions, std::span<const std::size_t> truths,
                             std::span<const std::array<double, data::kNumSubtypes>> scores) {
  if (truths.empty()) throw ValidationError("cannot evaluate an empty test set");
  if (scores.size() != truths.size()) throw ValidationError("one score vector per sample is required");
  MetricsReport r{confusion_matrix(predictions, truths), {}, 0, 0, 0, std::nullopt, 0};
  std::vector<double> precision, recall, f1, aucs;
  for (std::size_t c = 0; c < data::kNumSubtypes; ++c) {
    ClassMetrics& m = r.per_class[c];
    m.prf = prf(binary_counts(r.matrix, c));
    precision.push_back(m.prf.precision);
    recall.push_back(m.prf.recall);
    f1.push_back(m.prf.f1);
    std::vector<double> s;
    std::vector<std::size_t> is_c;
    for (std::size_t k = 0; k < truths.size(); ++k) {
      s.push_back(scores[k][c]);
      is_c.push_back(truths[k] == c ? 1 : 0);
    }
    const auto n_pos = static_cast<std::size_t>(std::count(is_c.begin(), is_c.end(), std::size_t{1}));
    if (n_pos > 0 && n_pos < is_c.size()) {
      m.roc = roc_curve(s, is_c);
      m.auc = auc(*m.roc);
      aucs.push_back(*m.auc);
    }
  }
  r.macro_precision = macro_average(precision);
  r.macro_recall = macro_average(recall);
  r.macro_f1 = macro_average(f1);
  if (aucs.size() == data::kNumSubtypes) r.macro_auc = macro_average(aucs);
  r.accuracy = accuracy(r.matrix);
  return r;
}

nlohmann::json to_json(const ConfusionMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < m.n_classes(); ++i) {
    std::vector<std::size_t> row;
    for (std::size_t j = 0; j < m.n_classes(); ++j) row.push_back(m.at(i, j));
    rows.push_back(row);
  }
  return rows;
}

ConfusionMatrix matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) throw ValidationError("confusion matrix JSON must be a non-empty array of rows");
  ConfusionMatrix m(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != j.size()) throw ValidationError("confusion matrix JSON is not square");
    for (std::size_t k = 0; k < j.size(); ++k) m.at(i, k) = j[i][k].get<std::size_t>();
  }
  return m;
}

std::string confusion_to_csv(const ConfusionMatrix& m) {
  std::string out = "truth\\predicted";
  for (std::size_t j = 0; j < m.n_classes(); ++j) out += "," + std::string(data::to_string(data::subtype_at(j)));
  out += "\n";
  for (std::size_t i = 0; i < m.n_classes(); ++i) {
    out += std::string(data::to_string(data::subtype_at(i)));
    for (std::size_t j = 0; j < m.n_classes(); ++j) out += "," + std::to_string(m.at(i, j));
    out += "\n";
  }
  return out;
}

nlohmann::json to_json(const MetricsReport& r) {
  nlohmann::json classes = nlohmann::json::object();
  for (std::size_t c = 0; c < data::kNumSubtypes; ++c) {
    const ClassMetrics& m = r.per_class[c];
    nlohmann::json undefined = nlohmann::json::array();
    if (m.prf.precision_undefined) undefined.push_back("precision");
    if (m.prf.recall_undefined) undefined.push_back("recall");
    if (m.prf.f1_undefined) undefined.push_back("f1");
    classes[std::string(data::to_string(data::subtype_at(c)))] = {
        {"precision", m.prf.precision},
        {"recall", m.prf.recall},
        {"f1", m.prf.f1},
        {"auc", m.auc ? nlohmann::json(*m.auc) : nlohmann::json(nullptr)},
        {"undefined", undefined}};
  }
  return {{"per_class", classes},
          {"macro",
           {{"precision", r.macro_precision},
            {"recall", r.macro_recall},
            {"f1", r.macro_f1},
            {"auc", r.macro_auc ? nlohmann::json(*r.macro_auc) : nlohmann::json(nullptr)}}},
          {"overall_accuracy", r.accuracy},
          {"confusion_matrix", to_json(r.matrix)},
          {"class_order", {"TN", "Luminal", "HER2"}}};
}

}  // namespace hmc::metrics
