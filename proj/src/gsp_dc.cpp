#include "gspse/gsp_dc.hpp"

#include "gspse/errors.hpp"

namespace gspse {
namespace {

struct NormalEquations {
  Matrix gram;  // H_s^T R_s^-1 H_s over the non-reference columns
  Vector rhs;   // H_s^T R_s^-1 z_s
};

NormalEquations normal_equations(const DCMeasurementModel& model, const Vector& z_s, const SensorSet& sensors) {
  if (z_s.size() != static_cast<Eigen::Index>(sensors.size())) {
    throw DimensionMismatch("measurement vector length differs from sensor count");
  }
  const IndexList cols = model.state_columns();
  const Eigen::Index dim = static_cast<Eigen::Index>(cols.size());
  if (sensors.empty()) return {Matrix::Zero(dim, dim), Vector::Zero(dim)};
  const NoiseCovariance r = model.R.restricted(sensors);
  const Matrix hw = r.whiten(select(model.H, sensors, cols));
  const Vector zw = r.whiten(z_s);
  return {hw.transpose() * hw, hw.transpose() * zw};
}

DCState expand(const DCMeasurementModel& model, const Vector& reduced) {
  const IndexList cols = model.state_columns();
  DCState out{Vector::Zero(model.buses())};
  for (std::size_t i = 0; i < cols.size(); ++i) out.theta(cols[i]) = reduced(static_cast<Eigen::Index>(i));
  return out;
}

}  // namespace

DCState gsp_wls(const DCMeasurementModel& model, const Vector& z_s, const SensorSet& sensors,
                const LaplacianMatrix& laplacian, const GspConfig& config) {
  if (!(config.mu >= 0.0)) throw ConfigError("mu must be non-negative");
  if (laplacian.size() != model.buses() || laplacian.reference != model.reference) {
    throw DimensionMismatch("Laplacian does not match the measurement model");
  }
  if (config.mu == 0.0 && !is_observable(model, sensors)) {
    throw SingularRegularizedSystem("mu = 0 on an unobservable sensor set");
  }
  NormalEquations ne = normal_equations(model, z_s, sensors);
  if (config.mu != 0.0) ne.gram += config.mu * laplacian.reduced();
  try {
    return expand(model, solve_spd(ne.gram, ne.rhs));
  } catch (const SingularSystem&) {
    throw SingularRegularizedSystem("regularized normal equations are singular");
  }
}

DCState pm_wls(const DCMeasurementModel& model, const Vector& z_s, const SensorSet& sensors,
               const PriorModel& prior) {
  const Eigen::Index dim = model.buses() - 1;
  if (prior.theta_prior.size() != dim || prior.precision.rows() != dim || prior.precision.cols() != dim) {
    throw DimensionMismatch("prior must cover the N - 1 non-reference buses");
  }
  NormalEquations ne = normal_equations(model, z_s, sensors);
  ne.gram += prior.precision;
  ne.rhs += prior.precision * prior.theta_prior;
  return expand(model, solve_spd(ne.gram, ne.rhs));
}

ReconstructedPower reconstruct_missing_power(const DCMeasurementModel& model, const DCState& estimate,
                                             const SensorSet& sensors) {
  if (estimate.theta.size() != model.buses()) throw DimensionMismatch("state length differs from N");
  ReconstructedPower out;
  out.rows = complement(sensors, model.measurements());
  out.values = select_rows(model.H, out.rows) * estimate.theta;
  return out;
}

}  // namespace gspse
