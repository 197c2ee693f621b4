#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "curate/record.hpp"

namespace curate {

struct CellKey {
  Platform platform = Platform::Mobile;
  ElemType elem_type = ElemType::Text;

  // Column order of the report table: mobile/desktop/web, text before icon.
  std::size_t index() const noexcept;
  static CellKey from_index(std::size_t i);
  friend bool operator==(const CellKey&, const CellKey&) = default;
};

struct CellTally {
  std::size_t hits = 0;
  std::size_t total = 0;

  bool empty() const noexcept { return total == 0; }
  double accuracy() const noexcept { return total == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(total); }
};

struct GroundingReport {
  std::array<CellTally, 6> cells{};
  std::size_t hits = 0;
  std::size_t total = 0;
  double micro = 0.0;  // pooled over examples
  double macro = 0.0;  // unweighted mean over non-empty cells
  std::vector<CellKey> empty_cells;
  std::vector<std::string> missing_predictions;  // counted as misses
  std::vector<std::string> unkeyed;              // gold records without elem_type; excluded
};

// A prediction is a box (scored by its center) or a click point.
using GroundingPrediction = std::variant<BBox, Point>;
using PredictionMap = std::map<std::string, std::optional<GroundingPrediction>>;

bool prediction_hits(const GroundingPrediction& pred, const BBox& gt) noexcept;

GroundingReport grounding_report(const PredictionMap& predictions, std::span<const GroundingRecord> gold);

// Mean of the given cell accuracies (any unit); 0 for an empty list.
double macro_average(std::span<const double> cell_accuracies) noexcept;

// Plain-text table: Mobile/Desktop/Web x Text/Icon, then Micro and Macro, in percent.
std::string format_grounding_table(const GroundingReport& report, std::string_view row_label = "model");

struct RateMetric {
  double value = 0.0;
  bool undefined = false;  // zero denominator; value reported as 0
};

struct ClassMetrics {
  RateMetric precision;
  RateMetric recall;
  RateMetric f1;
};

struct ClassificationReport {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;
  double accuracy = 0.0;
  ClassMetrics positive;  // (Y)
  ClassMetrics negative;  // (N)
  // Unweighted mean of the per-class values (undefined entries contribute 0).
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;

  std::size_t samples() const noexcept { return tp + fp + fn + tn; }
};

// Throws InputError on length mismatch or empty input.
ClassificationReport classification_report(std::span<const Label> labels, std::span<const Label> predictions);

std::string format_classification_table(const ClassificationReport& report);

struct ElementAccuracy {
  double accuracy = 0.0;
  std::size_t correct = 0;
  std::size_t total = 0;
  std::vector<std::string> missing;  // gold ids without a prediction, counted wrong
};

ElementAccuracy element_accuracy(const std::map<std::string, Point>& predictions,
                                 const std::map<std::string, BBox>& gold);

}  // namespace curate
