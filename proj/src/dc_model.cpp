#include "gspse/dc_model.hpp"

#include <algorithm>
#include <set>

#include "gspse/errors.hpp"

namespace gspse {

DCMeasurementModel build_dc_model(const LaplacianMatrix& laplacian, double sigma2) {
  if (!(sigma2 >= 0.0)) throw ConfigError("noise variance must be non-negative");
  const int n = laplacian.size();
  const int p = static_cast<int>(laplacian.edges.size());
  const int m = n + 2 * p;

  DCMeasurementModel model;
  model.reference = laplacian.reference;
  model.H = Matrix::Zero(m, n);
  model.H.topRows(n) = laplacian.matrix;
  model.sensors.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < n; ++i) {
    model.sensors.push_back(SensorIndex{SensorKind::BusInjection, i, -1, -1, i});
  }
  for (int e = 0; e < p; ++e) {
    const Edge& edge = laplacian.edges[static_cast<std::size_t>(e)];
    const int fwd = n + 2 * e;
    const int bwd = fwd + 1;
    model.H(fwd, edge.from) = edge.weight;
    model.H(fwd, edge.to) = -edge.weight;
    model.H(bwd, edge.to) = edge.weight;
    model.H(bwd, edge.from) = -edge.weight;
    model.sensors.push_back(SensorIndex{SensorKind::BranchFlow, -1, edge.from, edge.to, fwd});
    model.sensors.push_back(SensorIndex{SensorKind::BranchFlow, -1, edge.to, edge.from, bwd});
  }
  model.R = NoiseCovariance::iid(m, sigma2);
  return model;
}

DCMeasurementModel with_noise(const DCMeasurementModel& model, NoiseCovariance r) {
  if (r.size() != model.measurements()) throw DimensionMismatch("noise covariance size differs from M");
  DCMeasurementModel out = model;
  out.R = std::move(r);
  return out;
}

SensorSet induced_sensor_set(const LaplacianMatrix& laplacian, const IndexList& buses) {
  const int n = laplacian.size();
  std::vector<bool> chosen(static_cast<std::size_t>(n), false);
  for (int b : buses) {
    if (b < 0 || b >= n) throw DimensionMismatch("bus index out of range");
    chosen[static_cast<std::size_t>(b)] = true;
  }
  SensorSet rows;
  for (int b = 0; b < n; ++b) {
    if (chosen[static_cast<std::size_t>(b)]) rows.push_back(b);
  }
  for (std::size_t e = 0; e < laplacian.edges.size(); ++e) {
    const Edge& edge = laplacian.edges[e];
    if (chosen[static_cast<std::size_t>(edge.from)] || chosen[static_cast<std::size_t>(edge.to)]) {
      rows.push_back(n + 2 * static_cast<int>(e));
      rows.push_back(n + 2 * static_cast<int>(e) + 1);
    }
  }
  return rows;
}

Vector generate_dc_measurements(const DCMeasurementModel& model, const DCState& truth, Rng& rng) {
  if (truth.theta.size() != model.buses()) throw DimensionMismatch("state length differs from N");
  return model.H * truth.theta + model.R.sample(rng);
}

bool is_observable(const DCMeasurementModel& model, const SensorSet& sensors) {
  const int n = model.buses();
  if (sensors.empty()) return false;
  // Both directions of a flow are the same row up to sign; one of each pair is enough.
  IndexList rows;
  rows.reserve(sensors.size());
  for (int r : sensors) {
    const int m = model.measurements();
    if (r < 0 || r >= m) throw DimensionMismatch("sensor row out of range");
    if (r >= n && (r - n) % 2 == 1 && std::binary_search(sensors.begin(), sensors.end(), r - 1)) continue;
    rows.push_back(r);
  }
  if (static_cast<int>(rows.size()) < n - 1) return false;
  const Matrix h = select(model.H, rows, model.state_columns());
  // A bus no sensor touches leaves a zero column, so the SVD can be skipped.
  for (Eigen::Index c = 0; c < h.cols(); ++c) {
    if ((h.col(c).array() == 0.0).all()) return false;
  }
  return numerical_rank(h) == n - 1;
}

DCState wls_estimate(const DCMeasurementModel& model, const Vector& z_s, const SensorSet& sensors) {
  if (z_s.size() != static_cast<Eigen::Index>(sensors.size())) {
    throw DimensionMismatch("measurement vector length differs from sensor count");
  }
  if (!is_observable(model, sensors)) throw Unobservable("sensor set does not make the network observable");
  const IndexList cols = model.state_columns();
  const NoiseCovariance r = model.R.restricted(sensors);
  const Matrix hw = r.whiten(select(model.H, sensors, cols));
  const Vector zw = r.whiten(z_s);
  Eigen::LLT<Matrix> llt(hw.transpose() * hw);
  if (llt.info() != Eigen::Success) throw Unobservable("WLS normal equations are singular");
  const Vector reduced = llt.solve(hw.transpose() * zw);

  DCState out{Vector::Zero(model.buses())};
  for (std::size_t i = 0; i < cols.size(); ++i) out.theta(cols[i]) = reduced(static_cast<Eigen::Index>(i));
  return out;
}

nlohmann::json measurements_to_json(const DCMeasurementModel& model, const SensorSet& sensors, const Vector& z_s) {
  if (z_s.size() != static_cast<Eigen::Index>(sensors.size())) {
    throw DimensionMismatch("measurement vector length differs from sensor count");
  }
  nlohmann::json list = nlohmann::json::array();
  for (std::size_t i = 0; i < sensors.size(); ++i) {
    const SensorIndex& s = model.sensors.at(static_cast<std::size_t>(sensors[i]));
    nlohmann::json item{{"row", s.row}};
    if (s.kind == SensorKind::BusInjection) {
      item["kind"] = "injection";
      item["bus"] = s.bus + 1;
    } else {
      item["kind"] = "flow";
      item["from"] = s.from + 1;
      item["to"] = s.to + 1;
    }
    item["value"] = z_s(static_cast<Eigen::Index>(i));
    list.push_back(std::move(item));
  }
  return nlohmann::json{{"sensors", std::move(list)}};
}

SensorSet measurements_from_json(const DCMeasurementModel& model, const nlohmann::json& doc, Vector& z_s) {
  std::vector<std::pair<int, double>> entries;
  for (const auto& item : doc.at("sensors")) {
    const int row = item.at("row").get<int>();
    if (row < 0 || row >= model.measurements()) throw DimensionMismatch("sensor row out of range");
    const SensorIndex& s = model.sensors[static_cast<std::size_t>(row)];
    const std::string kind = item.at("kind").get<std::string>();
    const bool consistent = kind == "injection"
                                ? s.kind == SensorKind::BusInjection && item.at("bus").get<int>() == s.bus + 1
                                : s.kind == SensorKind::BranchFlow && item.at("from").get<int>() == s.from + 1 &&
                                      item.at("to").get<int>() == s.to + 1;
    if (!consistent) throw ConfigError("sensor row " + std::to_string(row) + " does not match its label");
    entries.emplace_back(row, item.at("value").get<double>());
  }
  std::sort(entries.begin(), entries.end());
  SensorSet rows;
  z_s.resize(static_cast<Eigen::Index>(entries.size()));
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (i > 0 && entries[i].first == entries[i - 1].first) throw ConfigError("duplicate sensor row");
    rows.push_back(entries[i].first);
    z_s(static_cast<Eigen::Index>(i)) = entries[i].second;
  }
  return rows;
}

}  // namespace gspse
