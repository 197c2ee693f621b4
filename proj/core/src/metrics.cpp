#include "curate/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "curate/errors.hpp"

namespace curate {

std::size_t CellKey::index() const noexcept {
  return static_cast<std::size_t>(platform) * 2 + static_cast<std::size_t>(elem_type);
}

CellKey CellKey::from_index(std::size_t i) {
  if (i >= 6) throw InputError("cell index out of range");
  return CellKey{static_cast<Platform>(i / 2), static_cast<ElemType>(i % 2)};
}

bool prediction_hits(const GroundingPrediction& pred, const BBox& gt) noexcept {
  if (const auto* box = std::get_if<BBox>(&pred)) return center_hit(*box, gt);
  return point_in_box(std::get<Point>(pred), gt);
}

double macro_average(std::span<const double> cell_accuracies) noexcept {
  if (cell_accuracies.empty()) return 0.0;
  return std::accumulate(cell_accuracies.begin(), cell_accuracies.end(), 0.0) /
         static_cast<double>(cell_accuracies.size());
}

GroundingReport grounding_report(const PredictionMap& predictions, std::span<const GroundingRecord> gold) {
  GroundingReport report;
  for (const auto& g : gold) {
    if (!g.elem_type) {
      report.unkeyed.push_back(g.id);
      continue;
    }
    CellTally& cell = report.cells[CellKey{g.platform, *g.elem_type}.index()];
    ++cell.total;
    auto it = predictions.find(g.id);
    if (it == predictions.end()) {
      report.missing_predictions.push_back(g.id);
      continue;
    }
    if (it->second && prediction_hits(*it->second, g.gt_box)) ++cell.hits;
  }
  std::sort(report.missing_predictions.begin(), report.missing_predictions.end());
  std::sort(report.unkeyed.begin(), report.unkeyed.end());

  std::vector<double> accuracies;
  for (std::size_t i = 0; i < report.cells.size(); ++i) {
    const auto& cell = report.cells[i];
    report.hits += cell.hits;
    report.total += cell.total;
    if (cell.empty()) {
      report.empty_cells.push_back(CellKey::from_index(i));
    } else {
      accuracies.push_back(cell.accuracy());
    }
  }
  report.micro = report.total == 0 ? 0.0 : static_cast<double>(report.hits) / static_cast<double>(report.total);
  report.macro = macro_average(accuracies);
  return report;
}

namespace {

std::string pct(double v, bool empty = false) {
  if (empty) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v * 100.0);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.insert(0, width - s.size(), ' ');
  return s;
}

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

RateMetric ratio(std::size_t num, std::size_t den) {
  if (den == 0) return {0.0, true};
  return {static_cast<double>(num) / static_cast<double>(den), false};
}

ClassMetrics class_metrics(std::size_t tp, std::size_t fp, std::size_t fn) {
  return {ratio(tp, tp + fp), ratio(tp, tp + fn), ratio(2 * tp, 2 * tp + fp + fn)};
}

}  // namespace

std::string format_grounding_table(const GroundingReport& report, std::string_view row_label) {
  std::ostringstream out;
  const std::size_t label_width = std::max<std::size_t>(row_label.size(), 5);
  out << std::string(label_width, ' ') << " |      Mobile |     Desktop |         Web |\n";
  out << pad("", label_width) << " |  Text  Icon |  Text  Icon |  Text  Icon | Micro | Macro\n";
  out << std::string(row_label) << std::string(label_width - row_label.size(), ' ') << " |";
  for (std::size_t i = 0; i < report.cells.size(); ++i) {
    out << pad(pct(report.cells[i].accuracy(), report.cells[i].empty()), 6);
    if (i % 2 == 1) out << " |";
  }
  out << pad(pct(report.micro), 6) << " |" << pad(pct(report.macro), 6) << '\n';
  return out.str();
}

ClassificationReport classification_report(std::span<const Label> labels, std::span<const Label> predictions) {
  if (labels.size() != predictions.size()) {
    throw InputError("classification_report: " + std::to_string(labels.size()) + " labels vs " +
                     std::to_string(predictions.size()) + " predictions");
  }
  if (labels.empty()) throw InputError("classification_report: no samples");
  ClassificationReport r;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool actual = labels[i] == Label::Positive;
    const bool predicted = predictions[i] == Label::Positive;
    if (actual && predicted) ++r.tp;
    else if (!actual && predicted) ++r.fp;
    else if (actual && !predicted) ++r.fn;
    else ++r.tn;
  }
  r.accuracy = static_cast<double>(r.tp + r.tn) / static_cast<double>(r.samples());
  r.positive = class_metrics(r.tp, r.fp, r.fn);
  r.negative = class_metrics(r.tn, r.fn, r.fp);
  r.macro_precision = (r.positive.precision.value + r.negative.precision.value) / 2.0;
  r.macro_recall = (r.positive.recall.value + r.negative.recall.value) / 2.0;
  r.macro_f1 = (r.positive.f1.value + r.negative.f1.value) / 2.0;
  return r;
}

std::string format_classification_table(const ClassificationReport& r) {
  auto cell = [](const RateMetric& m) { return m.undefined ? std::string("undef") : fixed4(m.value); };
  std::ostringstream out;
  out << "TP " << r.tp << "  FP " << r.fp << "  FN " << r.fn << "  TN " << r.tn << "\n";
  out << "        |   Prec |    Rec |     F1\n";
  out << "    (Y) | " << pad(cell(r.positive.precision), 6) << " | " << pad(cell(r.positive.recall), 6) << " | "
      << pad(cell(r.positive.f1), 6) << "\n";
  out << "    (N) | " << pad(cell(r.negative.precision), 6) << " | " << pad(cell(r.negative.recall), 6) << " | "
      << pad(cell(r.negative.f1), 6) << "\n";
  out << "  macro | " << fixed4(r.macro_precision) << " | " << fixed4(r.macro_recall) << " | " << fixed4(r.macro_f1)
      << "\n";
  out << "accuracy " << fixed4(r.accuracy) << "\n";
  return out.str();
}

ElementAccuracy element_accuracy(const std::map<std::string, Point>& predictions,
                                 const std::map<std::string, BBox>& gold) {
  ElementAccuracy out;
  out.total = gold.size();
  for (const auto& [id, box] : gold) {
    auto it = predictions.find(id);
    if (it == predictions.end()) {
      out.missing.push_back(id);
      continue;
    }
    if (point_in_box(it->second, box)) ++out.correct;
  }
  out.accuracy = out.total == 0 ? 0.0 : static_cast<double>(out.correct) / static_cast<double>(out.total);
  return out;
}

}  // namespace curate
