#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "curate/diversity.hpp"
#include "curate/errors.hpp"

namespace curate {

void EmbeddingMatrix::validate() const {
  if (static_cast<Eigen::Index>(ids.size()) != rows.rows()) {
    throw InputError("embedding matrix: " + std::to_string(ids.size()) + " ids for " + std::to_string(rows.rows()) +
                     " rows");
  }
  std::unordered_set<std::string_view> seen;
  for (const auto& id : ids) {
    if (!seen.insert(id).second) throw InputError("embedding matrix: duplicate id " + id);
  }
  if (!rows.allFinite()) throw InputError("embedding matrix: non-finite entry");
}

Matrix PCAProjection::project(const Matrix& x) const {
  return (x.rowwise() - mean.transpose()) * components.transpose();
}

Matrix PCAProjection::reconstruct(const Matrix& projected, bool add_mean) const {
  Matrix centered = projected * components;
  if (add_mean) centered.rowwise() += mean.transpose();
  return centered;
}

namespace {

// Modified Gram-Schmidt on the rows, filling numerically dependent rows from the
// standard basis.
void orthonormalize_rows(Matrix& v) {
  const Eigen::Index d = v.cols();
  Eigen::Index next_basis = 0;
  for (Eigen::Index r = 0; r < v.rows(); ++r) {
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index q = 0; q < r; ++q) v.row(r) -= v.row(r).dot(v.row(q)) * v.row(q);
    }
    double norm = v.row(r).norm();
    while (norm < 1e-10 && next_basis < d) {
      v.row(r).setZero();
      v(r, next_basis++) = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (Eigen::Index q = 0; q < r; ++q) v.row(r) -= v.row(r).dot(v.row(q)) * v.row(q);
      }
      norm = v.row(r).norm();
    }
    v.row(r) /= norm;
  }
}

void fix_signs(Matrix& v) {
  for (Eigen::Index r = 0; r < v.rows(); ++r) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < v.cols(); ++c) {
      if (std::abs(v(r, c)) > std::abs(v(r, best))) best = c;
    }
    if (v(r, best) < 0) v.row(r) *= -1.0;
  }
}

}  // namespace

PcaFit fit_pca_project(const Matrix& x, std::size_t target_dim) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d_in = x.cols();
  if (n < 2) throw InputError("PCA needs at least two samples");
  if (d_in < 1) throw InputError("PCA needs at least one feature");
  if (target_dim < 1) throw InputError("PCA target dimension must be >= 1");
  if (!x.allFinite()) throw InputError("PCA input contains non-finite values");

  const Eigen::Index d_out = std::min<Eigen::Index>({static_cast<Eigen::Index>(target_dim), n - 1, d_in});
  PcaFit fit;
  PCAProjection& p = fit.projection;
  p.mean = x.colwise().mean().transpose();
  const Matrix centered = x.rowwise() - p.mean.transpose();
  const double denom = static_cast<double>(n - 1);

  p.components.resize(d_out, d_in);
  p.explained_variance.resize(d_out);
  if (d_in <= n) {
    const Eigen::MatrixXd cov = (centered.transpose() * centered) / denom;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success) throw InputError("PCA eigendecomposition failed");
    // Eigen returns ascending eigenvalues.
    for (Eigen::Index r = 0; r < d_out; ++r) {
      const Eigen::Index src = d_in - 1 - r;
      p.components.row(r) = eig.eigenvectors().col(src).transpose();
      p.explained_variance(r) = std::max(0.0, eig.eigenvalues()(src));
    }
  } else {
    const Eigen::MatrixXd gram = (centered * centered.transpose()) / denom;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    if (eig.info() != Eigen::Success) throw InputError("PCA eigendecomposition failed");
    for (Eigen::Index r = 0; r < d_out; ++r) {
      const Eigen::Index src = n - 1 - r;
      const double lambda = std::max(0.0, eig.eigenvalues()(src));
      p.explained_variance(r) = lambda;
      if (lambda > 1e-12 * std::max(1.0, eig.eigenvalues()(n - 1))) {
        p.components.row(r) = (centered.transpose() * eig.eigenvectors().col(src)).transpose() / std::sqrt(lambda * denom);
      } else {
        p.components.row(r).setZero();
      }
    }
    orthonormalize_rows(p.components);
  }
  fix_signs(p.components);
  fit.projected = centered * p.components.transpose();
  return fit;
}

}  // namespace curate
