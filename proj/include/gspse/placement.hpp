#pragma once

#include <cstdint>
#include <vector>

#include "gspse/dc_model.hpp"
#include "gspse/laplacian.hpp"
#include "gspse/spectral.hpp"

namespace gspse {

struct BusSelection {
  IndexList buses;                 // zero-based, in selection order
  SensorSet sensor_set;            // induced measurement rows
  std::vector<double> objective;   // policy objective after each step, when the policy has one
};

struct CRBReport {
  double value = 0.0;
  double bias_gradient_norm = 0.0;  // ||K H - I||_F
};

// Trace of K R_s K^T with K = (H_s^T R_s^-1 H_s + mu L_red)^-1 H_s^T R_s^-1 and
// H_s the Laplacian rows of the selected buses. `bus_noise` is the N x N
// covariance of the injection sensors.
CRBReport crb(const LaplacianMatrix& laplacian, const IndexList& buses, double mu, const NoiseCovariance& bus_noise);

// Adds, one bus at a time, the bus that minimizes the CRB. Ties go to the lowest index.
BusSelection greedy_selection(const LaplacianMatrix& laplacian, int q, double mu, const NoiseCovariance& bus_noise);

// Adds, one bus at a time, the bus maximizing the smallest singular value of
// V restricted to the selected rows and the first `cutoff` columns.
BusSelection edesign_selection(const LaplacianMatrix& laplacian, const GraphSpectrum& spectrum, int q, int cutoff);

// q distinct buses uniformly at random.
BusSelection random_selection(const LaplacianMatrix& laplacian, int q, Rng& rng);
BusSelection random_selection(const LaplacianMatrix& laplacian, int q, std::uint64_t seed);

// Global CRB minimizer over all q-subsets. Throws TooLarge beyond 1e6 subsets.
BusSelection exhaustive_selection(const LaplacianMatrix& laplacian, int q, double mu,
                                  const NoiseCovariance& bus_noise);

// Number of q-subsets of n items, saturating at UINT64_MAX.
std::uint64_t binomial(int n, int q);

}  // namespace gspse
