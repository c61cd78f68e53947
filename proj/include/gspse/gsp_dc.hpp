#pragma once

#include <optional>

#include "gspse/dc_model.hpp"
#include "gspse/laplacian.hpp"

namespace gspse {

struct GspConfig {
  double mu = 0.1;                 // weight of the Laplacian smoothness penalty
  std::optional<double> epsilon;   // smoothness budget; informational only
};

// Predicted state over the non-reference buses with its inverse covariance.
struct PriorModel {
  Vector theta_prior;  // length N - 1
  Matrix precision;    // (N - 1) x (N - 1), R_prior^{-1}
};

// Smoothness-regularized WLS:
//   theta_red = (H_s^T R_s^-1 H_s + mu L_red)^-1 H_s^T R_s^-1 z_s,  theta_ref = 0.
// Throws SingularRegularizedSystem when mu = 0 and the sensors are not observable.
DCState gsp_wls(const DCMeasurementModel& model, const Vector& z_s, const SensorSet& sensors,
                const LaplacianMatrix& laplacian, const GspConfig& config);

// Pseudo-measurement WLS: the measurements fused with a Gaussian prior.
DCState pm_wls(const DCMeasurementModel& model, const Vector& z_s, const SensorSet& sensors,
               const PriorModel& prior);

struct ReconstructedPower {
  SensorSet rows;  // the rows not in the sensor set
  Vector values;
};

// Predicts the withheld measurements from an estimated state: H_{M\S} theta_hat.
ReconstructedPower reconstruct_missing_power(const DCMeasurementModel& model, const DCState& estimate,
                                             const SensorSet& sensors);

}  // namespace gspse
