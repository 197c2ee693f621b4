#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "curate/diversity.hpp"
#include "curate/errors.hpp"

namespace curate {

std::size_t diverse_count(std::size_t n, double ratio) {
  if (!(ratio > 0.0 && ratio <= 1.0)) throw InputError("diversity ratio must lie in (0, 1]");
  if (n == 0) return 0;
  // The epsilon keeps products like 0.1 * 40 from rounding up to the next integer.
  const auto k = static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(n) - 1e-9));
  return std::clamp<std::size_t>(k, 1, n);
}

DiversitySelection select_diverse(std::span<const GroundingRecord> records, const EmbeddingMatrix& embeddings,
                                  const DiversityOptions& options, std::uint64_t seed) {
  const std::size_t k = diverse_count(records.size(), options.ratio);
  embeddings.validate();

  DiversitySelection out;
  if (records.empty()) return out;

  std::vector<const GroundingRecord*> ordered;
  for (const auto& r : records) ordered.push_back(&r);
  std::sort(ordered.begin(), ordered.end(), [](auto* a, auto* b) { return a->id < b->id; });

  std::unordered_map<std::string_view, Eigen::Index> row_of;
  for (std::size_t i = 0; i < embeddings.ids.size(); ++i) row_of.emplace(embeddings.ids[i], static_cast<Eigen::Index>(i));

  const auto n = static_cast<Eigen::Index>(ordered.size());
  Matrix x(n, embeddings.rows.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& id = ordered[static_cast<std::size_t>(i)]->id;
    auto it = row_of.find(id);
    if (it == row_of.end()) throw InputError("no embedding for record " + id);
    x.row(i) = embeddings.rows.row(it->second);
    out.row_ids.push_back(id);
  }

  if (n == 1) {
    out.points = x;
    out.clustering.centroids = x;
    out.clustering.assignment = {0};
    out.clustering.inertia_history = {0.0};
    out.clustering.converged = true;
    out.selected_ids = out.row_ids;
    return out;
  }

  PcaFit fit = fit_pca_project(x, options.target_dim);
  out.pca = std::move(fit.projection);
  out.points = std::move(fit.projected);
  if (options.metric == DistanceMetric::Cosine) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double norm = out.points.row(i).norm();
      if (norm > 0.0) out.points.row(i) /= norm;
    }
  }
  out.clustering = run_kmeans(out.points, k, seed, options.kmeans);

  std::vector<Eigen::Index> best(k, -1);
  std::vector<double> best_d2(k, std::numeric_limits<double>::infinity());
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::size_t c = out.clustering.assignment[static_cast<std::size_t>(i)];
    const double d2 = (out.points.row(i) - out.clustering.centroids.row(static_cast<Eigen::Index>(c))).squaredNorm();
    // Rows are in id order, so strict < keeps the smallest id on ties.
    if (d2 < best_d2[c]) {
      best_d2[c] = d2;
      best[c] = i;
    }
  }
  for (std::size_t c = 0; c < k; ++c) out.selected_ids.push_back(out.row_ids[static_cast<std::size_t>(best[c])]);
  return out;
}

}  // namespace curate
