#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "curate/diversity.hpp"
#include "curate/errors.hpp"
#include "curate/random.hpp"

namespace curate {

std::vector<std::size_t> Clustering::cluster_sizes() const {
  std::vector<std::size_t> sizes(k(), 0);
  for (std::size_t a : assignment) ++sizes[a];
  return sizes;
}

namespace {

using Index = Eigen::Index;

Matrix kmeanspp_init(const Matrix& x, std::size_t k, Rng& rng) {
  const Index n = x.rows();
  Matrix centroids(static_cast<Index>(k), x.cols());
  std::vector<char> chosen(static_cast<std::size_t>(n), 0);

  Index first = static_cast<Index>(uniform_index(rng, static_cast<std::uint64_t>(n)));
  centroids.row(0) = x.row(first);
  chosen[static_cast<std::size_t>(first)] = 1;
  const Eigen::VectorXd norms = x.rowwise().squaredNorm();
  // |x - r|^2 via one matrix-vector product; values within rounding of zero count as zero.
  auto distances_to = [&](Index r) {
    const double rn = norms(r);
    Eigen::VectorXd d = (norms.array() + rn).matrix() - 2.0 * (x * x.row(r).transpose());
    const double tol = 8.0 * static_cast<double>(x.cols() + 1) * std::numeric_limits<double>::epsilon();
    for (Index i = 0; i < n; ++i) {
      if (d(i) <= tol * (norms(i) + rn)) d(i) = 0.0;
    }
    d(r) = 0.0;
    return d;
  };
  Eigen::VectorXd d2 = distances_to(first);

  for (std::size_t c = 1; c < k; ++c) {
    const double total = d2.sum();
    Index pick = -1;
    if (total > 0.0) {
      const double target = uniform01(rng) * total;
      double cumulative = 0.0;
      for (Index i = 0; i < n; ++i) {
        cumulative += d2(i);
        if (cumulative > target && d2(i) > 0.0) {
          pick = i;
          break;
        }
      }
      if (pick < 0) {
        for (Index i = n - 1; i >= 0; --i) {
          if (d2(i) > 0.0) {
            pick = i;
            break;
          }
        }
      }
    }
    if (pick < 0) {
      // Every point coincides with a chosen center.
      for (Index i = 0; i < n; ++i) {
        if (!chosen[static_cast<std::size_t>(i)]) {
          pick = i;
          break;
        }
      }
    }
    chosen[static_cast<std::size_t>(pick)] = 1;
    centroids.row(static_cast<Index>(c)) = x.row(pick);
    d2 = d2.cwiseMin(distances_to(pick));
  }
  return centroids;
}

class Lloyd {
 public:
  Lloyd(const Matrix& x, Matrix centroids)
      : x_(x),
        c_(std::move(centroids)),
        n_(static_cast<std::size_t>(x.rows())),
        k_(static_cast<std::size_t>(c_.rows())),
        assign_(n_, 0),
        upper_(n_, 0.0),
        lower_(n_, 0.0),
        sizes_(k_, 0),
        norms_(x.rowwise().squaredNorm()) {}

  void full_assign() {
    std::vector<std::size_t> all(n_);
    for (std::size_t i = 0; i < n_; ++i) all[i] = i;
    nearest_two(all, /*has_current=*/false);
    std::fill(sizes_.begin(), sizes_.end(), 0);
    for (std::size_t i = 0; i < n_; ++i) ++sizes_[assign_[i]];
  }

  // Hamerly step: exact assignments, skipping points whose bounds prove no change.
  void bounded_assign() {
    const Eigen::VectorXd half_gap = half_min_center_gap();
    std::vector<std::size_t> open;
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t a = assign_[i];
      const double m = std::max(half_gap(static_cast<Index>(a)), lower_[i]);
      if (upper_[i] <= m) continue;
      upper_[i] = distance(i, a);
      if (upper_[i] <= m) continue;
      open.push_back(i);
    }
    for (std::size_t i : open) --sizes_[assign_[i]];
    nearest_two(open, /*has_current=*/true);
    for (std::size_t i : open) ++sizes_[assign_[i]];
  }

  bool repair_empty() {
    bool repaired = false;
    for (std::size_t j = 0; j < k_; ++j) {
      if (sizes_[j] != 0) continue;
      std::size_t far = n_;
      double far_d2 = -1.0;
      for (std::size_t i = 0; i < n_; ++i) {
        if (sizes_[assign_[i]] < 2) continue;
        const double d2 = squared_distance(i, assign_[i]);
        if (d2 > far_d2) {
          far_d2 = d2;
          far = i;
        }
      }
      if (far == n_) throw std::logic_error("k-means: no point available to reseed an empty cluster");
      --sizes_[assign_[far]];
      assign_[far] = j;
      ++sizes_[j];
      c_.row(static_cast<Index>(j)) = x_.row(static_cast<Index>(far));
      repaired = true;
    }
    if (repaired) {
      // Moved centers invalidate every lower bound.
      std::fill(lower_.begin(), lower_.end(), 0.0);
      for (std::size_t i = 0; i < n_; ++i) upper_[i] = distance(i, assign_[i]);
    }
    return repaired;
  }

  double inertia() {
    double total = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double d2 = squared_distance(i, assign_[i]);
      upper_[i] = std::sqrt(d2);
      total += d2;
    }
    return total;
  }

  // Moves every centroid to its members' mean; returns the largest shift.
  double update_centroids() {
    Matrix sums = Matrix::Zero(c_.rows(), c_.cols());
    for (std::size_t i = 0; i < n_; ++i) sums.row(static_cast<Index>(assign_[i])) += x_.row(static_cast<Index>(i));
    std::vector<double> shift(k_, 0.0);
    for (std::size_t j = 0; j < k_; ++j) {
      if (sizes_[j] == 0) continue;
      const auto row = static_cast<Index>(j);
      Eigen::RowVectorXd updated = sums.row(row) / static_cast<double>(sizes_[j]);
      shift[j] = (updated - c_.row(row)).norm();
      c_.row(row) = updated;
    }
    std::size_t top = 0;
    for (std::size_t j = 1; j < k_; ++j) {
      if (shift[j] > shift[top]) top = j;
    }
    double second = 0.0;
    for (std::size_t j = 0; j < k_; ++j) {
      if (j != top) second = std::max(second, shift[j]);
    }
    for (std::size_t i = 0; i < n_; ++i) {
      upper_[i] += shift[assign_[i]];
      lower_[i] -= (assign_[i] == top ? second : shift[top]);
    }
    return shift[top];
  }

  Matrix& centroids() { return c_; }
  std::vector<std::size_t>& assignment() { return assign_; }

 private:
  double squared_distance(std::size_t i, std::size_t j) const {
    return (x_.row(static_cast<Index>(i)) - c_.row(static_cast<Index>(j))).squaredNorm();
  }
  double distance(std::size_t i, std::size_t j) const { return std::sqrt(squared_distance(i, j)); }

  // Nearest and second-nearest centers for the listed points. Distances come from
  // |x|^2 + |c|^2 - 2 x.c in blocks; centers within rounding of the minimum are
  // re-measured directly so the chosen center is the exact nearest (ties keep the
  // current center, else the lowest index). The second distance is a lower bound.
  void nearest_two(const std::vector<std::size_t>& points, bool has_current) {
    if (points.empty()) return;
    constexpr std::size_t kBlock = 256;
    const Eigen::VectorXd cn = c_.rowwise().squaredNorm();
    const double cmax = cn.maxCoeff();
    const double rel = 8.0 * static_cast<double>(x_.cols() + 1) * std::numeric_limits<double>::epsilon();
    const Matrix ct = c_.transpose();
    Matrix block;
    for (std::size_t start = 0; start < points.size(); start += kBlock) {
      const std::size_t m = std::min(kBlock, points.size() - start);
      block.resize(static_cast<Index>(m), x_.cols());
      for (std::size_t r = 0; r < m; ++r) block.row(static_cast<Index>(r)) = x_.row(static_cast<Index>(points[start + r]));
      const Matrix g = block * ct;
      for (std::size_t r = 0; r < m; ++r) {
        const std::size_t i = points[start + r];
        const double xn = norms_(static_cast<Index>(i));
        const double margin = rel * (xn + cmax) + std::numeric_limits<double>::min();
        double amin = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < k_; ++j) {
          const double a = xn + cn(static_cast<Index>(j)) - 2.0 * g(static_cast<Index>(r), static_cast<Index>(j));
          amin = std::min(amin, a);
        }
        std::size_t best = k_;
        double best_d2 = std::numeric_limits<double>::infinity();
        double second = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < k_; ++j) {
          const double a = xn + cn(static_cast<Index>(j)) - 2.0 * g(static_cast<Index>(r), static_cast<Index>(j));
          if (a > amin + 2.0 * margin) {
            second = std::min(second, a - margin);
            continue;
          }
          const double exact = squared_distance(i, j);
          const bool keep_current = has_current && j == assign_[i] && exact == best_d2;
          if (exact < best_d2 || keep_current) {
            if (best != k_) second = std::min(second, best_d2);
            best = j;
            best_d2 = exact;
          } else {
            second = std::min(second, exact);
          }
        }
        assign_[i] = best;
        upper_[i] = std::sqrt(best_d2);
        lower_[i] = std::sqrt(std::max(0.0, second));
      }
    }
  }

  // Half the distance from each center to its nearest other center, rounded down
  // so the pruning test stays conservative.
  Eigen::VectorXd half_min_center_gap() const {
    const Eigen::VectorXd cn = c_.rowwise().squaredNorm();
    const double rel = 8.0 * static_cast<double>(c_.cols() + 1) * std::numeric_limits<double>::epsilon();
    const Matrix g = c_ * c_.transpose();
    Eigen::VectorXd gap = Eigen::VectorXd::Constant(static_cast<Index>(k_), std::numeric_limits<double>::infinity());
    for (Index j = 0; j < static_cast<Index>(k_); ++j) {
      for (Index t = 0; t < static_cast<Index>(k_); ++t) {
        if (t == j) continue;
        const double d2 = cn(j) + cn(t) - 2.0 * g(t, j) - rel * (cn(j) + cn(t));
        gap(j) = std::min(gap(j), d2);
      }
    }
    return gap.cwiseMax(0.0).cwiseSqrt() / 2.0;
  }

  const Matrix& x_;
  Matrix c_;
  std::size_t n_;
  std::size_t k_;
  std::vector<std::size_t> assign_;
  std::vector<double> upper_;
  std::vector<double> lower_;
  std::vector<std::size_t> sizes_;
  Eigen::VectorXd norms_;
};

void record_inertia(Clustering& out, double value) {
  if (!out.inertia_history.empty()) {
    const double prev = out.inertia_history.back();
    if (value > prev + 1e-9 * std::max(1.0, prev)) {
      throw std::logic_error("k-means inertia increased from " + std::to_string(prev) + " to " + std::to_string(value));
    }
  }
  out.inertia_history.push_back(value);
}

}  // namespace

Clustering run_kmeans(const Matrix& x, std::size_t k, std::uint64_t seed, const KMeansOptions& options) {
  const auto n = static_cast<std::size_t>(x.rows());
  if (k == 0) throw InputError("k-means: k must be >= 1");
  if (k > n) throw InputError("k-means: k = " + std::to_string(k) + " exceeds n = " + std::to_string(n));
  if (!x.allFinite()) throw InputError("k-means: non-finite input");

  Rng rng(seed);
  Lloyd lloyd(x, kmeanspp_init(x, k, rng));
  Clustering out;

  lloyd.full_assign();
  lloyd.repair_empty();
  record_inertia(out, lloyd.inertia());
  while (out.iterations < options.max_iterations) {
    const double shift = lloyd.update_centroids();
    ++out.iterations;
    lloyd.bounded_assign();
    lloyd.repair_empty();
    record_inertia(out, lloyd.inertia());
    if (shift < options.tolerance) {
      out.converged = true;
      break;
    }
  }
  out.inertia = out.inertia_history.back();
  out.centroids = std::move(lloyd.centroids());
  out.assignment = std::move(lloyd.assignment());
  return out;
}

}  // namespace curate
