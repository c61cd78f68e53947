#pragma once

#include <vector>

#include "gspse/laplacian.hpp"
#include "gspse/linalg.hpp"

namespace gspse {

// Eigenpairs of a graph Laplacian, eigenvalues ascending. Column n of
// `eigenvectors` pairs with eigenvalues(n). Each column is signed so that its
// largest-magnitude entry is positive.
struct GraphSpectrum {
  Vector eigenvalues;
  Matrix eigenvectors;

  int size() const { return static_cast<int>(eigenvalues.size()); }
};

GraphSpectrum eig_laplacian(const Matrix& laplacian);
GraphSpectrum eig_laplacian(const LaplacianMatrix& laplacian);

// Graph Fourier transform and its inverse.
Vector gft(const GraphSpectrum& spectrum, const Vector& signal);
Vector igft(const GraphSpectrum& spectrum, const Vector& coefficients);

// a^T L a.
double dirichlet_energy(const LaplacianMatrix& laplacian, const Vector& signal);
// 1/2 sum_{k,n} W_kn (a_k - a_n)^2 with W read off the off-diagonal entries.
double dirichlet_energy_edges(const LaplacianMatrix& laplacian, const Vector& signal);
// sum_k lambda_k * gft(a)_k^2.
double dirichlet_energy_spectral(const GraphSpectrum& spectrum, const Vector& signal);

// a^T L a / ||a||^2, zero for the zero signal.
double normalized_energy(const LaplacianMatrix& laplacian, const Vector& signal);

// V diag(response) V^T a_in.
Vector apply_graph_filter(const GraphSpectrum& spectrum, const Vector& response, const Vector& input);

// Response of the filter mapping bus injections to angles: N*c2 at lambda_1 and
// 1/lambda_n above it.
Vector inverse_laplacian_response(const GraphSpectrum& spectrum, double c2);

// 10 / (N * lambda_2).
double default_c2(const GraphSpectrum& spectrum);

struct LowPassAnalysis {
  std::vector<double> eta;         // eta_1 .. eta_{N-1}
  double c2 = 0.0;
  Vector frequency_response;       // psi(lambda_1) .. psi(lambda_N)
  std::vector<int> lowpass_orders; // every K (1-based) with eta_K < 1
};

// Filter-selectivity ratios of the inverse-Laplacian response.
// Throws ZeroLambda2 if the graph is not connected.
LowPassAnalysis lowpass_analysis(const GraphSpectrum& spectrum, double c2);

// eta_k = max_{j>k} |psi_j| / min_{j<=k} |psi_j| for an arbitrary response.
std::vector<double> selectivity_ratios(const Vector& response);

// Share of ||coeffs||^2 carried by the first `count` entries.
double low_frequency_fraction(const Vector& coefficients, int count);

struct SmoothnessReport {
  double theta = 0.0;  // normalized Dirichlet energies
  double v = 0.0;
  double z_bus = 0.0;
  Vector theta_gft;
  Vector v_gft;
  Vector z_bus_gft;
};

SmoothnessReport smoothness_report(const LaplacianMatrix& laplacian, const GraphSpectrum& spectrum,
                                   const Vector& theta, const Vector& v, const Vector& z_bus);

}  // namespace gspse
