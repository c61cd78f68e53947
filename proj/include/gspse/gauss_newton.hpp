#pragma once

#include <optional>
#include <vector>

#include "gspse/ac_model.hpp"
#include "gspse/laplacian.hpp"

namespace gspse {

struct GNConfig {
  double mu_theta = 0.045;
  double mu_v = 10.0;
  double delta = 1e-8;      // stop once ||dx|| <= delta
  int max_iterations = 20;
  std::optional<ACState> initial_state;  // flat profile when empty
  bool record_iterates = false;
};

struct GNTrace {
  std::vector<double> step_norms;
  std::vector<double> objective;   // J (or J_reg) at the iterate the step starts from
  std::vector<double> condition;   // 1 / rcond estimate of the gain
  std::vector<Vector> iterates;    // free vectors x^(1), x^(2), ... when recorded
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;      // ||g_reg|| at the returned state
};

struct GNResult {
  ACState state;
  GNTrace trace;
};

// blockdiag(mu_theta L_red, mu_v L_red).
Matrix regularization_matrix(const LaplacianMatrix& laplacian, double mu_theta, double mu_v);

// x <- x + G^-1 H^T R^-1 (z - h(x)). Throws SingularGain when G is not
// numerically invertible and NonConvergence after max_iterations.
GNResult gauss_newton_wls(const ACMeasurementModel& model, const Vector& z_s, const SensorSet& sensors,
                          const GNConfig& config);

// x <- x + G_reg^-1 (H^T R^-1 (z - h(x)) - Lbar (x - x0)), G_reg = G + Lbar.
GNResult regularized_gauss_newton(const ACMeasurementModel& model, const Vector& z_s, const SensorSet& sensors,
                                  const LaplacianMatrix& laplacian, const GNConfig& config);

// As above with x0 -> x_prior and Lbar -> prior_precision. mu_theta and mu_v are ignored.
GNResult pm_gauss_newton(const ACMeasurementModel& model, const Vector& z_s, const SensorSet& sensors,
                         const Vector& x_prior, const Matrix& prior_precision, const GNConfig& config);

}  // namespace gspse
