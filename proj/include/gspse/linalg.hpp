#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace gspse {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Sorted list of zero-based indices (rows of a measurement model, buses, ...).
using IndexList = std::vector<int>;

IndexList complement(const IndexList& subset, int universe);
IndexList all_indices(int n);

// All indices except `skip`; used to drop the reference bus column.
IndexList indices_without(int n, int skip);

Matrix select_rows(const Matrix& a, const IndexList& rows);
Vector select(const Vector& v, const IndexList& idx);
Matrix select(const Matrix& a, const IndexList& rows, const IndexList& cols);

// Rank with the tolerance max(rows, cols) * eps * sigma_max on the singular values.
int numerical_rank(const Matrix& a);

// Solves A X = B for symmetric positive definite A. Cholesky first; on failure,
// LDL^T with a 1e-12 * trace / n diagonal jitter. Throws SingularSystem if both fail.
Matrix solve_spd(const Matrix& a, const Matrix& b);
Vector solve_spd(const Matrix& a, const Vector& b);

// Sum with pairwise reduction; order-independent up to rounding of the tree.
double pairwise_sum(std::span<const double> values);

// Seeded generator. Each Monte-Carlo trial owns one, seeded through derive_seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  Vector normal_vector(Eigen::Index n);
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

// splitmix64 mixing of (master, stream) into an independent seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

// Measurement noise covariance. Diagonal storage when possible.
class NoiseCovariance {
 public:
  NoiseCovariance() = default;

  static NoiseCovariance iid(int size, double variance);
  static NoiseCovariance diagonal(const Vector& variances);
  static NoiseCovariance full(const Matrix& covariance);

  int size() const { return size_; }
  bool is_diagonal() const { return diagonal_; }

  NoiseCovariance restricted(const IndexList& rows) const;
  NoiseCovariance scaled(double factor) const;
  Matrix dense() const;

  // W such that W^T W = R^{-1} applied on the left: returns L^{-1} A with R = L L^T.
  // Throws SingularSystem when R is not positive definite.
  Matrix whiten(const Matrix& a) const;
  Vector whiten(const Vector& a) const;

  // Draws e ~ N(0, R).
  Vector sample(Rng& rng) const;

 private:
  int size_ = 0;
  bool diagonal_ = true;
  Vector variances_;
  Matrix full_;
};

}  // namespace gspse
