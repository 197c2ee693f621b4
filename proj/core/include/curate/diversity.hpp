#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "curate/record.hpp"

namespace curate {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// One latent vector per record; row i belongs to ids[i].
struct EmbeddingMatrix {
  std::vector<std::string> ids;
  Matrix rows;

  // Throws InputError on size mismatch, duplicate ids or non-finite entries.
  void validate() const;
};

struct PCAProjection {
  Eigen::VectorXd mean;
  Matrix components;                   // output_dim x input_dim, orthonormal rows
  Eigen::VectorXd explained_variance;  // non-increasing

  Eigen::Index output_dim() const noexcept { return components.rows(); }
  Matrix project(const Matrix& x) const;
  // Inverse of project() up to the discarded components; returns centered data
  // when `add_mean` is false.
  Matrix reconstruct(const Matrix& projected, bool add_mean = true) const;
};

struct PcaFit {
  PCAProjection projection;
  Matrix projected;
};

// Covariance eigendecomposition (or the Gram-matrix dual when inputs are wider
// than tall). Output dim = min(target_dim, n - 1, d_in). Each component is signed
// so its largest-magnitude entry is positive.
PcaFit fit_pca_project(const Matrix& x, std::size_t target_dim = 768);

struct KMeansOptions {
  std::size_t max_iterations = 300;
  double tolerance = 1e-6;  // max centroid shift (Euclidean)
};

struct Clustering {
  Matrix centroids;                   // k x d
  std::vector<std::size_t> assignment;  // row index -> cluster
  double inertia = 0.0;
  std::vector<double> inertia_history;  // after every assignment step
  std::size_t iterations = 0;
  bool converged = false;

  std::size_t k() const noexcept { return static_cast<std::size_t>(centroids.rows()); }
  std::vector<std::size_t> cluster_sizes() const;
};

// k-means++ seeding followed by exact Lloyd iterations (Hamerly bounds skip
// distance evaluations that cannot change an assignment). Empty clusters are
// reseeded with the point farthest from its centroid. Assignment ties keep the
// current cluster; farthest-point ties pick the lowest row. Throws InputError for
// k == 0 or k > n, and std::logic_error if inertia ever increases.
Clustering run_kmeans(const Matrix& x, std::size_t k, std::uint64_t seed, const KMeansOptions& options = {});

enum class DistanceMetric { Euclidean, Cosine };

struct DiversityOptions {
  double ratio = 0.10;
  std::size_t target_dim = 768;
  // Cosine normalizes projected rows to unit length before clustering.
  DistanceMetric metric = DistanceMetric::Euclidean;
  KMeansOptions kmeans;
};

struct DiversitySelection {
  std::vector<std::string> selected_ids;  // one per cluster, in cluster order
  std::vector<std::string> row_ids;       // records in id order; rows of `points`
  Matrix points;                          // clustered vectors (projected, maybe normalized)
  PCAProjection pca;
  Clustering clustering;
};

// k = ceil(ratio * n) clusters over the PCA projection of the records' embeddings;
// from each cluster keeps the member nearest its centroid (ties: smallest id).
// Throws InputError when ratio is outside (0, 1] or an embedding is missing.
DiversitySelection select_diverse(std::span<const GroundingRecord> records, const EmbeddingMatrix& embeddings,
                                  const DiversityOptions& options, std::uint64_t seed);

std::size_t diverse_count(std::size_t n, double ratio);

}  // namespace curate
