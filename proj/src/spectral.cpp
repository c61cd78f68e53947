#include "gspse/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gspse/errors.hpp"

namespace gspse {
namespace {

void require_size(const GraphSpectrum& spectrum, const Vector& v, const char* what) {
  if (v.size() != spectrum.size()) throw DimensionMismatch(std::string(what) + ": length differs from graph size");
}

void require_size(const LaplacianMatrix& laplacian, const Vector& v, const char* what) {
  if (v.size() != laplacian.size()) throw DimensionMismatch(std::string(what) + ": length differs from graph size");
}

}  // namespace

GraphSpectrum eig_laplacian(const Matrix& laplacian) {
  if (laplacian.rows() != laplacian.cols()) throw DimensionMismatch("Laplacian must be square");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(laplacian);
  if (solver.info() != Eigen::Success) throw ConvergenceFailure("symmetric eigensolver did not converge");
  GraphSpectrum s{solver.eigenvalues(), solver.eigenvectors()};
  for (Eigen::Index c = 0; c < s.eigenvectors.cols(); ++c) {
    Eigen::Index arg = 0;
    s.eigenvectors.col(c).cwiseAbs().maxCoeff(&arg);
    if (s.eigenvectors(arg, c) < 0.0) s.eigenvectors.col(c) *= -1.0;
  }
  return s;
}

GraphSpectrum eig_laplacian(const LaplacianMatrix& laplacian) { return eig_laplacian(laplacian.matrix); }

Vector gft(const GraphSpectrum& spectrum, const Vector& signal) {
  require_size(spectrum, signal, "gft");
  return spectrum.eigenvectors.transpose() * signal;
}

Vector igft(const GraphSpectrum& spectrum, const Vector& coefficients) {
  require_size(spectrum, coefficients, "igft");
  return spectrum.eigenvectors * coefficients;
}

double dirichlet_energy(const LaplacianMatrix& laplacian, const Vector& signal) {
  require_size(laplacian, signal, "dirichlet_energy");
  return signal.dot(laplacian.matrix * signal);
}

double dirichlet_energy_edges(const LaplacianMatrix& laplacian, const Vector& signal) {
  require_size(laplacian, signal, "dirichlet_energy_edges");
  const int n = laplacian.size();
  double sum = 0.0;
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j) {
      if (j == k) continue;
      const double d = signal(k) - signal(j);
      sum += -laplacian.matrix(k, j) * d * d;
    }
  }
  return 0.5 * sum;
}

double dirichlet_energy_spectral(const GraphSpectrum& spectrum, const Vector& signal) {
  const Vector c = gft(spectrum, signal);
  return spectrum.eigenvalues.dot(c.cwiseAbs2());
}

double normalized_energy(const LaplacianMatrix& laplacian, const Vector& signal) {
  const double norm2 = signal.squaredNorm();
  if (norm2 == 0.0) return 0.0;
  return dirichlet_energy(laplacian, signal) / norm2;
}

Vector apply_graph_filter(const GraphSpectrum& spectrum, const Vector& response, const Vector& input) {
  require_size(spectrum, response, "apply_graph_filter response");
  require_size(spectrum, input, "apply_graph_filter input");
  const Matrix& v = spectrum.eigenvectors;
  return v * response.cwiseProduct(v.transpose() * input);
}

namespace {

double lambda2_or_throw(const GraphSpectrum& spectrum) {
  const int n = spectrum.size();
  if (n < 2) throw ZeroLambda2("graph needs at least two nodes");
  const double scale = std::max(1.0, std::abs(spectrum.eigenvalues(n - 1)));
  const double lambda2 = spectrum.eigenvalues(1);
  if (!(lambda2 > 1e-9 * scale)) throw ZeroLambda2("second Laplacian eigenvalue is zero; graph is disconnected");
  return lambda2;
}

}  // namespace

Vector inverse_laplacian_response(const GraphSpectrum& spectrum, double c2) {
  lambda2_or_throw(spectrum);
  const int n = spectrum.size();
  Vector psi(n);
  psi(0) = static_cast<double>(n) * c2;
  for (int i = 1; i < n; ++i) psi(i) = 1.0 / spectrum.eigenvalues(i);
  return psi;
}

double default_c2(const GraphSpectrum& spectrum) {
  return 10.0 / (static_cast<double>(spectrum.size()) * lambda2_or_throw(spectrum));
}

std::vector<double> selectivity_ratios(const Vector& response) {
  const Eigen::Index n = response.size();
  std::vector<double> eta;
  if (n < 2) return eta;
  std::vector<double> tail_max(static_cast<std::size_t>(n) + 1, 0.0);
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    tail_max[static_cast<std::size_t>(i)] = std::max(tail_max[static_cast<std::size_t>(i) + 1], std::abs(response(i)));
  }
  double head_min = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    head_min = std::min(head_min, std::abs(response(k)));
    eta.push_back(tail_max[static_cast<std::size_t>(k) + 1] / head_min);
  }
  return eta;
}

LowPassAnalysis lowpass_analysis(const GraphSpectrum& spectrum, double c2) {
  if (!(c2 > 0.0)) throw ConfigError("c2 must be positive");
  LowPassAnalysis out;
  out.c2 = c2;
  out.frequency_response = inverse_laplacian_response(spectrum, c2);
  out.eta = selectivity_ratios(out.frequency_response);
  for (std::size_t k = 0; k < out.eta.size(); ++k) {
    if (out.eta[k] < 1.0) out.lowpass_orders.push_back(static_cast<int>(k) + 1);
  }
  return out;
}

double low_frequency_fraction(const Vector& coefficients, int count) {
  const double total = coefficients.squaredNorm();
  if (total == 0.0) return 0.0;
  count = std::clamp(count, 0, static_cast<int>(coefficients.size()));
  return coefficients.head(count).squaredNorm() / total;
}

SmoothnessReport smoothness_report(const LaplacianMatrix& laplacian, const GraphSpectrum& spectrum,
                                   const Vector& theta, const Vector& v, const Vector& z_bus) {
  SmoothnessReport r;
  r.theta = normalized_energy(laplacian, theta);
  r.v = normalized_energy(laplacian, v);
  r.z_bus = normalized_energy(laplacian, z_bus);
  r.theta_gft = gft(spectrum, theta);
  r.v_gft = gft(spectrum, v);
  r.z_bus_gft = gft(spectrum, z_bus);
  return r;
}

}  // namespace gspse
