#pragma once

#include <vector>

#include <json.hpp>

#include "gspse/laplacian.hpp"
#include "gspse/linalg.hpp"

namespace gspse {

enum class SensorKind { BusInjection, BranchFlow };

// One row of the measurement matrix. Buses are zero-based.
// Rows [0, N) are injections in bus order; rows N + 2e and N + 2e + 1 are the
// flows from -> to and to -> from on merged edge e.
struct SensorIndex {
  SensorKind kind = SensorKind::BusInjection;
  int bus = -1;   // injection bus
  int from = -1;  // flow direction
  int to = -1;
  int row = 0;
};

// Sorted, duplicate-free list of measurement rows.
using SensorSet = IndexList;

struct DCMeasurementModel {
  Matrix H;  // M x N
  std::vector<SensorIndex> sensors;
  NoiseCovariance R;
  int reference = 0;

  int buses() const { return static_cast<int>(H.cols()); }
  int measurements() const { return static_cast<int>(H.rows()); }
  SensorSet all_sensors() const { return all_indices(measurements()); }
  IndexList state_columns() const { return indices_without(buses(), reference); }
};

// Angles with the reference bus pinned to zero.
struct DCState {
  Vector theta;
};

// Flow row for k -> n is W_kn (e_k - e_n)^T. R = sigma2 * I.
DCMeasurementModel build_dc_model(const LaplacianMatrix& laplacian, double sigma2);

// Same H, different noise covariance.
DCMeasurementModel with_noise(const DCMeasurementModel& model, NoiseCovariance r);

// Injections at the given buses plus both flow directions on every merged edge
// touching one of them. Buses are zero-based; order does not matter.
SensorSet induced_sensor_set(const LaplacianMatrix& laplacian, const IndexList& buses);

// z = H theta + e, e ~ N(0, R).
Vector generate_dc_measurements(const DCMeasurementModel& model, const DCState& truth, Rng& rng);

// Rank test on H restricted to `sensors` without the reference column.
bool is_observable(const DCMeasurementModel& model, const SensorSet& sensors);

// Classical WLS on the rows in `sensors`; z_s is aligned with `sensors`.
// Throws Unobservable when the reduced system is rank deficient.
DCState wls_estimate(const DCMeasurementModel& model, const Vector& z_s, const SensorSet& sensors);

// Replay format: {"sensors": [{"row", "kind", "bus"|"from","to", "value"}...]}, bus ids 1-based.
nlohmann::json measurements_to_json(const DCMeasurementModel& model, const SensorSet& sensors, const Vector& z_s);
// Returns the sensor rows and fills z_s.
SensorSet measurements_from_json(const DCMeasurementModel& model, const nlohmann::json& doc, Vector& z_s);

}  // namespace gspse
