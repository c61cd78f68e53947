#include "gspse/linalg.hpp"

#include <algorithm>
#include <limits>

#include "gspse/errors.hpp"

namespace gspse {

IndexList complement(const IndexList& subset, int universe) {
  std::vector<bool> taken(static_cast<std::size_t>(universe), false);
  for (int i : subset) taken.at(static_cast<std::size_t>(i)) = true;
  IndexList out;
  out.reserve(static_cast<std::size_t>(universe) - subset.size());
  for (int i = 0; i < universe; ++i) {
    if (!taken[static_cast<std::size_t>(i)]) out.push_back(i);
  }
  return out;
}

IndexList all_indices(int n) {
  IndexList out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = i;
  return out;
}

IndexList indices_without(int n, int skip) {
  IndexList out;
  out.reserve(static_cast<std::size_t>(std::max(n - 1, 0)));
  for (int i = 0; i < n; ++i) {
    if (i != skip) out.push_back(i);
  }
  return out;
}

Matrix select_rows(const Matrix& a, const IndexList& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), a.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = a.row(rows[r]);
  return out;
}

Vector select(const Vector& v, const IndexList& idx) {
  Vector out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<Eigen::Index>(i)) = v(idx[i]);
  return out;
}

Matrix select(const Matrix& a, const IndexList& rows, const IndexList& cols) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    for (std::size_t r = 0; r < rows.size(); ++r) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = a(rows[r], cols[c]);
    }
  }
  return out;
}

int numerical_rank(const Matrix& a) {
  if (a.rows() == 0 || a.cols() == 0) return 0;
  const Vector sv = Eigen::BDCSVD<Matrix>(a).singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  if (smax == 0.0) return 0;
  const double tol = static_cast<double>(std::max(a.rows(), a.cols())) *
                     std::numeric_limits<double>::epsilon() * smax;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol) ++rank;
  }
  return rank;
}

Matrix solve_spd(const Matrix& a, const Matrix& b) {
  if (a.rows() != a.cols() || a.rows() != b.rows()) {
    throw DimensionMismatch("solve_spd: incompatible dimensions");
  }
  if (a.rows() == 0) return Matrix(0, b.cols());
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() == Eigen::Success) return llt.solve(b);

  const double jitter = 1e-12 * a.trace() / static_cast<double>(a.rows());
  Matrix shifted = a;
  shifted.diagonal().array() += jitter;
  Eigen::LDLT<Matrix> ldlt(shifted);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || !(jitter > 0.0)) {
    throw SingularSystem("symmetric system is not positive definite");
  }
  const Vector d = ldlt.vectorD();
  if (d.minCoeff() <= 0.0) throw SingularSystem("symmetric system is not positive definite");
  return ldlt.solve(b);
}

Vector solve_spd(const Matrix& a, const Vector& b) {
  return solve_spd(a, Matrix(b)).col(0);
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

Vector Rng::normal_vector(Eigen::Index n) {
  Vector out(n);
  for (Eigen::Index i = 0; i < n; ++i) out(i) = normal();
  return out;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

NoiseCovariance NoiseCovariance::iid(int size, double variance) {
  return diagonal(Vector::Constant(size, variance));
}

NoiseCovariance NoiseCovariance::diagonal(const Vector& variances) {
  NoiseCovariance r;
  r.size_ = static_cast<int>(variances.size());
  r.diagonal_ = true;
  r.variances_ = variances;
  return r;
}

NoiseCovariance NoiseCovariance::full(const Matrix& covariance) {
  if (covariance.rows() != covariance.cols()) {
    throw DimensionMismatch("noise covariance must be square");
  }
  const Matrix off = covariance - Matrix(covariance.diagonal().asDiagonal());
  if (off.cwiseAbs().maxCoeff() == 0.0) return diagonal(covariance.diagonal());
  NoiseCovariance r;
  r.size_ = static_cast<int>(covariance.rows());
  r.diagonal_ = false;
  r.full_ = covariance;
  return r;
}

NoiseCovariance NoiseCovariance::restricted(const IndexList& rows) const {
  if (diagonal_) return diagonal(select(variances_, rows));
  return full(select(full_, rows, rows));
}

NoiseCovariance NoiseCovariance::scaled(double factor) const {
  NoiseCovariance r = *this;
  if (diagonal_) {
    r.variances_ *= factor;
  } else {
    r.full_ *= factor;
  }
  return r;
}

Matrix NoiseCovariance::dense() const {
  if (diagonal_) return variances_.asDiagonal();
  return full_;
}

Matrix NoiseCovariance::whiten(const Matrix& a) const {
  if (a.rows() != size_) throw DimensionMismatch("whiten: row count differs from covariance size");
  if (diagonal_) {
    if (size_ > 0 && variances_.minCoeff() <= 0.0) {
      throw SingularSystem("noise covariance is not positive definite");
    }
    return variances_.cwiseSqrt().cwiseInverse().asDiagonal() * a;
  }
  Eigen::LLT<Matrix> llt(full_);
  if (llt.info() != Eigen::Success) throw SingularSystem("noise covariance is not positive definite");
  return llt.matrixL().solve(a);
}

Vector NoiseCovariance::whiten(const Vector& a) const {
  return whiten(Matrix(a)).col(0);
}

Vector NoiseCovariance::sample(Rng& rng) const {
  Vector n = rng.normal_vector(size_);
  if (diagonal_) return variances_.cwiseSqrt().cwiseProduct(n);
  Eigen::LLT<Matrix> llt(full_);
  if (llt.info() != Eigen::Success) throw SingularSystem("noise covariance is not positive definite");
  return llt.matrixL() * n;
}

}  // namespace gspse
