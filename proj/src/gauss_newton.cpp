#include "gspse/gauss_newton.hpp"

#include <limits>
#include <string>

#include "gspse/errors.hpp"

namespace gspse {
namespace {

enum class Variant { Plain, Regularized };

GNResult iterate(const ACMeasurementModel& model, const Vector& z_s, const SensorSet& sensors, const Matrix* penalty,
                 const Vector& anchor, const GNConfig& config, Variant variant) {
  if (!(config.delta > 0.0)) throw ConfigError("delta must be positive");
  if (config.max_iterations < 1) throw ConfigError("max_iterations must be at least 1");
  if (z_s.size() != static_cast<Eigen::Index>(sensors.size())) {
    throw DimensionMismatch("measurement vector length differs from sensor count");
  }
  const int k = model.state_size();
  if (penalty && (penalty->rows() != k || penalty->cols() != k || anchor.size() != k)) {
    throw DimensionMismatch("regularization does not match the 2N - 2 state");
  }
  for (int r : sensors) {
    if (r < 0 || r >= model.measurements()) throw DimensionMismatch("sensor row out of range");
  }
  const NoiseCovariance r_s = model.noise().restricted(sensors);
  const Vector zw = r_s.whiten(z_s);

  Vector x = model.pack(config.initial_state ? *config.initial_state : model.flat_start());
  GNResult out;
  GNTrace& trace = out.trace;

  // Whitened residual and Jacobian at x, plus the gradient of -J/2.
  auto linearize = [&](const Vector& at, Matrix& hw, Vector& rw, Vector& g) {
    const ACState s = model.unpack(at);
    hw = r_s.whiten(select_rows(model.jacobian(s), sensors));
    rw = zw - r_s.whiten(select(model.measure(s), sensors));
    g = hw.transpose() * rw;
    if (penalty) g -= *penalty * (at - anchor);
  };

  Matrix hw;
  Vector rw;
  Vector g;
  double last_step = 0.0;
  for (int it = 1; it <= config.max_iterations; ++it) {
    linearize(x, hw, rw, g);
    double objective = rw.squaredNorm();
    Matrix gain = hw.transpose() * hw;
    if (penalty) {
      const Vector d = x - anchor;
      objective += d.dot(*penalty * d);
      gain += *penalty;
    }
    trace.objective.push_back(objective);

    Eigen::LLT<Matrix> llt(gain);
    const double rcond = llt.info() == Eigen::Success ? llt.rcond() : 0.0;
    trace.condition.push_back(rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity());
    if (variant == Variant::Plain && !(rcond >= 1e-10)) {
      throw SingularGain("gain matrix is singular at iteration " + std::to_string(it));
    }
    if (variant == Variant::Regularized && !(rcond >= 1e-14)) {
      throw SingularRegularizedGain("regularized gain matrix is singular at iteration " + std::to_string(it));
    }
    const Vector dx = llt.solve(g);
    x += dx;
    last_step = dx.norm();
    trace.step_norms.push_back(last_step);
    trace.iterations = it;
    if (config.record_iterates) trace.iterates.push_back(x);
    if (last_step <= config.delta) {
      trace.converged = true;
      break;
    }
  }
  if (!trace.converged) {
    throw NonConvergence("Gauss-Newton did not converge in " + std::to_string(config.max_iterations) + " iterations",
                         trace.iterations, last_step);
  }
  linearize(x, hw, rw, g);
  trace.gradient_norm = g.norm();
  out.state = model.unpack(x);
  return out;
}

}  // namespace

Matrix regularization_matrix(const LaplacianMatrix& laplacian, double mu_theta, double mu_v) {
  if (!(mu_theta >= 0.0) || !(mu_v >= 0.0)) throw ConfigError("regularization weights must be non-negative");
  const Matrix lr = laplacian.reduced();
  const Eigen::Index n = lr.rows();
  Matrix out = Matrix::Zero(2 * n, 2 * n);
  out.topLeftCorner(n, n) = mu_theta * lr;
  out.bottomRightCorner(n, n) = mu_v * lr;
  return out;
}

GNResult gauss_newton_wls(const ACMeasurementModel& model, const Vector& z_s, const SensorSet& sensors,
                          const GNConfig& config) {
  return iterate(model, z_s, sensors, nullptr, Vector(), config, Variant::Plain);
}

GNResult regularized_gauss_newton(const ACMeasurementModel& model, const Vector& z_s, const SensorSet& sensors,
                                  const LaplacianMatrix& laplacian, const GNConfig& config) {
  if (laplacian.size() != model.buses()) throw DimensionMismatch("Laplacian does not match the model");
  const Matrix lbar = regularization_matrix(laplacian, config.mu_theta, config.mu_v);
  return iterate(model, z_s, sensors, &lbar, model.pack(model.anchor()), config, Variant::Regularized);
}

GNResult pm_gauss_newton(const ACMeasurementModel& model, const Vector& z_s, const SensorSet& sensors,
                         const Vector& x_prior, const Matrix& prior_precision, const GNConfig& config) {
  return iterate(model, z_s, sensors, &prior_precision, x_prior, config, Variant::Regularized);
}

}  // namespace gspse
