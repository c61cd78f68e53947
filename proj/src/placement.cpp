#include "gspse/placement.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "gspse/errors.hpp"

namespace gspse {
namespace {

// Relative gap below which two candidates count as tied; ties keep the lower index.
constexpr double kTie = 1e-12;

void check_q(int q, int n) {
  if (q < 1 || q > n) throw ConfigError("number of selected buses must be in [1, N]");
}

// Sorted copy: the CRB depends on the set, not the order.
IndexList sorted(IndexList buses) {
  std::sort(buses.begin(), buses.end());
  return buses;
}

BusSelection finish(const LaplacianMatrix& laplacian, IndexList order, std::vector<double> objective) {
  BusSelection s;
  s.sensor_set = induced_sensor_set(laplacian, order);
  s.buses = std::move(order);
  s.objective = std::move(objective);
  return s;
}

double smallest_singular_value(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  const Vector sv = Eigen::JacobiSVD<Matrix>(a).singularValues();
  return sv(sv.size() - 1);
}

// Reusable pieces of the CRB for one Laplacian.
class CrbEvaluator {
 public:
  CrbEvaluator(const LaplacianMatrix& laplacian, double mu, const NoiseCovariance& bus_noise)
      : laplacian_(laplacian), mu_(mu), noise_(bus_noise), cols_(laplacian.non_reference()) {
    if (!(mu >= 0.0)) throw ConfigError("mu must be non-negative");
    if (bus_noise.size() != laplacian.size()) throw DimensionMismatch("bus noise covariance must be N x N");
    penalty_ = mu * laplacian.reduced();
  }

  CRBReport operator()(const IndexList& buses) const {
    const IndexList rows = sorted(buses);
    const NoiseCovariance r = noise_.restricted(rows);
    const Matrix hw = r.whiten(select(laplacian_.matrix, rows, cols_));
    const Matrix a = hw.transpose() * hw + penalty_;
    Eigen::LLT<Matrix> llt(a);
    // A rank-deficient A can still factor on round-off, so also check conditioning.
    if (llt.info() != Eigen::Success || llt.rcond() < 1e-12) {
      throw SingularRegularizedSystem("regularized CRB matrix is singular for this selection");
    }
    // K R K^T = A^-1 Hw^T Hw A^-1, so the trace is ||A^-1 Hw^T||_F^2.
    const Matrix x = llt.solve(hw.transpose());
    CRBReport out;
    out.value = x.squaredNorm();
    const Matrix bias_grad = x * hw - Matrix::Identity(a.rows(), a.cols());
    out.bias_gradient_norm = bias_grad.norm();
    return out;
  }

 private:
  const LaplacianMatrix& laplacian_;
  double mu_;
  NoiseCovariance noise_;
  IndexList cols_;
  Matrix penalty_;
};

}  // namespace

CRBReport crb(const LaplacianMatrix& laplacian, const IndexList& buses, double mu, const NoiseCovariance& bus_noise) {
  return CrbEvaluator(laplacian, mu, bus_noise)(buses);
}

BusSelection greedy_selection(const LaplacianMatrix& laplacian, int q, double mu, const NoiseCovariance& bus_noise) {
  const int n = laplacian.size();
  check_q(q, n);
  const CrbEvaluator evaluate(laplacian, mu, bus_noise);
  std::vector<bool> taken(static_cast<std::size_t>(n), false);
  IndexList chosen;
  std::vector<double> trace;
  for (int step = 0; step < q; ++step) {
    int best = -1;
    double best_value = std::numeric_limits<double>::infinity();
    IndexList candidate = chosen;
    candidate.push_back(-1);
    for (int w = 0; w < n; ++w) {
      if (taken[static_cast<std::size_t>(w)]) continue;
      candidate.back() = w;
      double value = std::numeric_limits<double>::infinity();
      try {
        value = evaluate(candidate).value;
      } catch (const SingularSystem&) {
        // mu = 0 and too few buses; such candidates cannot win.
      }
      if (best < 0 || value < best_value * (1.0 - kTie)) {
        best = w;
        best_value = value;
      }
    }
    taken[static_cast<std::size_t>(best)] = true;
    chosen.push_back(best);
    trace.push_back(best_value);
  }
  return finish(laplacian, std::move(chosen), std::move(trace));
}

BusSelection edesign_selection(const LaplacianMatrix& laplacian, const GraphSpectrum& spectrum, int q, int cutoff) {
  const int n = laplacian.size();
  check_q(q, n);
  if (spectrum.size() != n) throw DimensionMismatch("spectrum does not match the Laplacian");
  if (cutoff < 1 || cutoff > n) throw ConfigError("E-design cutoff must be in [1, N]");
  const Matrix basis = spectrum.eigenvectors.leftCols(cutoff);
  std::vector<bool> taken(static_cast<std::size_t>(n), false);
  IndexList chosen;
  std::vector<double> trace;
  for (int step = 0; step < q; ++step) {
    int best = -1;
    double best_value = -1.0;
    IndexList candidate = chosen;
    candidate.push_back(-1);
    for (int w = 0; w < n; ++w) {
      if (taken[static_cast<std::size_t>(w)]) continue;
      candidate.back() = w;
      const double value = smallest_singular_value(select_rows(basis, candidate));
      if (value > best_value * (1.0 + kTie)) {
        best = w;
        best_value = value;
      }
    }
    taken[static_cast<std::size_t>(best)] = true;
    chosen.push_back(best);
    trace.push_back(best_value);
  }
  return finish(laplacian, std::move(chosen), std::move(trace));
}

BusSelection random_selection(const LaplacianMatrix& laplacian, int q, Rng& rng) {
  const int n = laplacian.size();
  check_q(q, n);
  IndexList pool = all_indices(n);
  // Partial Fisher-Yates: the first q entries are a uniform q-subset.
  for (int i = 0; i < q; ++i) {
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng.engine()))]);
  }
  pool.resize(static_cast<std::size_t>(q));
  return finish(laplacian, std::move(pool), {});
}

BusSelection random_selection(const LaplacianMatrix& laplacian, int q, std::uint64_t seed) {
  Rng rng(seed);
  return random_selection(laplacian, q, rng);
}

std::uint64_t binomial(int n, int q) {
  if (q < 0 || q > n) return 0;
  q = std::min(q, n - q);
  unsigned __int128 acc = 1;
  for (int i = 1; i <= q; ++i) {
    acc = acc * static_cast<unsigned>(n - q + i) / static_cast<unsigned>(i);
    if (acc > std::numeric_limits<std::uint64_t>::max()) return std::numeric_limits<std::uint64_t>::max();
  }
  return static_cast<std::uint64_t>(acc);
}

BusSelection exhaustive_selection(const LaplacianMatrix& laplacian, int q, double mu,
                                  const NoiseCovariance& bus_noise) {
  const int n = laplacian.size();
  check_q(q, n);
  if (binomial(n, q) > 1'000'000) throw TooLarge("more than 1e6 subsets to enumerate");
  const CrbEvaluator evaluate(laplacian, mu, bus_noise);

  // Lexicographic enumeration; strict improvement keeps the lexicographically first optimum.
  IndexList subset = all_indices(q);
  IndexList best;
  double best_value = std::numeric_limits<double>::infinity();
  while (true) {
    double value = std::numeric_limits<double>::infinity();
    try {
      value = evaluate(subset).value;
    } catch (const SingularSystem&) {
    }
    if (best.empty() || value < best_value * (1.0 - kTie)) {
      best = subset;
      best_value = value;
    }
    int i = q - 1;
    while (i >= 0 && subset[static_cast<std::size_t>(i)] == n - q + i) --i;
    if (i < 0) break;
    ++subset[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < q; ++j) subset[static_cast<std::size_t>(j)] = subset[static_cast<std::size_t>(j) - 1] + 1;
  }
  return finish(laplacian, std::move(best), {best_value});
}

}  // namespace gspse
