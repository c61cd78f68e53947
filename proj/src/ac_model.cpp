#include "gspse/ac_model.hpp"

#include <cmath>

#include "gspse/errors.hpp"

namespace gspse {
namespace {

const Complex kJ(0.0, 1.0);

}  // namespace

ACMeasurementModel::ACMeasurementModel(const Network& net, const LaplacianMatrix& laplacian, NoiseCovariance r) {
  init(net, laplacian);
  set_noise(std::move(r));
}

ACMeasurementModel::ACMeasurementModel(const Network& net, const LaplacianMatrix& laplacian, double sigma2) {
  if (!(sigma2 >= 0.0)) throw ConfigError("noise variance must be non-negative");
  init(net, laplacian);
  r_ = NoiseCovariance::iid(measurements(), sigma2);
}

void ACMeasurementModel::init(const Network& net, const LaplacianMatrix& laplacian) {
  n_ = net.size();
  reference_ = net.reference_index();
  if (laplacian.size() != n_) throw DimensionMismatch("Laplacian does not match the network");
  v_ref_ = net.buses[static_cast<std::size_t>(reference_)].voltage_magnitude;
  if (!(v_ref_ > 0.0)) throw MalformedCase("reference voltage magnitude must be positive");

  const int p = static_cast<int>(laplacian.edges.size());
  const int mp = n_ + 2 * p;
  for (int e = 0; e < p; ++e) {
    const Edge& edge = laplacian.edges[static_cast<std::size_t>(e)];
    for (int b : edge.branches) {
      const Branch& br = net.branches.at(static_cast<std::size_t>(b));
      BranchTerm term;
      term.f = br.from_bus - 1;
      term.t = br.to_bus - 1;
      const Complex ys = 1.0 / Complex(br.resistance, br.reactance);
      const Complex tap = std::polar(br.tap_ratio, br.phase_shift);
      term.ytt = ys + kJ * (br.total_charging_susceptance / 2.0);
      term.yff = term.ytt / std::norm(tap);
      term.yft = -ys / std::conj(tap);
      term.ytf = -ys / tap;
      const bool aligned = term.f == edge.from;
      term.forward_row = n_ + 2 * e + (aligned ? 0 : 1);
      term.backward_row = n_ + 2 * e + (aligned ? 1 : 0);
      terms_.push_back(term);
    }
  }
  shunt_.reserve(static_cast<std::size_t>(n_));
  for (const Bus& bus : net.buses) shunt_.emplace_back(bus.shunt_conductance, bus.shunt_susceptance);

  sensors_.reserve(static_cast<std::size_t>(2 * mp));
  for (PowerKind power : {PowerKind::Active, PowerKind::Reactive}) {
    const int offset = power == PowerKind::Active ? 0 : mp;
    for (int i = 0; i < n_; ++i) {
      sensors_.push_back(ACSensor{power, SensorKind::BusInjection, i, -1, -1, offset + i});
    }
    for (int e = 0; e < p; ++e) {
      const Edge& edge = laplacian.edges[static_cast<std::size_t>(e)];
      sensors_.push_back(ACSensor{power, SensorKind::BranchFlow, -1, edge.from, edge.to, offset + n_ + 2 * e});
      sensors_.push_back(ACSensor{power, SensorKind::BranchFlow, -1, edge.to, edge.from, offset + n_ + 2 * e + 1});
    }
  }
}

void ACMeasurementModel::set_noise(NoiseCovariance r) {
  if (r.size() != measurements()) throw DimensionMismatch("noise covariance size differs from M");
  r_ = std::move(r);
}

void ACMeasurementModel::check(const ACState& x) const {
  if (x.theta.size() != n_ || x.v.size() != n_) throw DimensionMismatch("AC state length differs from N");
}

int ACMeasurementModel::theta_col(int bus) const {
  if (bus == reference_) return -1;
  return bus < reference_ ? bus : bus - 1;
}

int ACMeasurementModel::v_col(int bus) const {
  const int c = theta_col(bus);
  return c < 0 ? -1 : c + n_ - 1;
}

Vector ACMeasurementModel::measure(const ACState& x) const {
  check(x);
  const int mp = measurements() / 2;
  std::vector<Complex> volt(static_cast<std::size_t>(n_));
  for (int i = 0; i < n_; ++i) volt[static_cast<std::size_t>(i)] = std::polar(x.v(i), x.theta(i));

  std::vector<Complex> s(static_cast<std::size_t>(mp), Complex(0.0, 0.0));
  for (int i = 0; i < n_; ++i) s[static_cast<std::size_t>(i)] = x.v(i) * x.v(i) * std::conj(shunt_[static_cast<std::size_t>(i)]);
  for (const BranchTerm& b : terms_) {
    const Complex vf = volt[static_cast<std::size_t>(b.f)];
    const Complex vt = volt[static_cast<std::size_t>(b.t)];
    const Complex sf = vf * std::conj(b.yff * vf + b.yft * vt);
    const Complex st = vt * std::conj(b.ytf * vf + b.ytt * vt);
    s[static_cast<std::size_t>(b.f)] += sf;
    s[static_cast<std::size_t>(b.t)] += st;
    s[static_cast<std::size_t>(b.forward_row)] += sf;
    s[static_cast<std::size_t>(b.backward_row)] += st;
  }
  Vector h(2 * mp);
  for (int r = 0; r < mp; ++r) {
    h(r) = s[static_cast<std::size_t>(r)].real();
    h(mp + r) = s[static_cast<std::size_t>(r)].imag();
  }
  return h;
}

Matrix ACMeasurementModel::jacobian(const ACState& x) const {
  check(x);
  const int mp = measurements() / 2;
  Matrix jac = Matrix::Zero(2 * mp, state_size());
  auto add = [&](int row, int bus, Complex d_theta, Complex d_v) {
    const int ct = theta_col(bus);
    if (ct < 0) return;
    const int cv = v_col(bus);
    jac(row, ct) += d_theta.real();
    jac(mp + row, ct) += d_theta.imag();
    jac(row, cv) += d_v.real();
    jac(mp + row, cv) += d_v.imag();
  };

  for (int i = 0; i < n_; ++i) add(i, i, 0.0, 2.0 * x.v(i) * std::conj(shunt_[static_cast<std::size_t>(i)]));

  for (const BranchTerm& b : terms_) {
    const double vmf = x.v(b.f);
    const double vmt = x.v(b.t);
    const Complex vf = std::polar(vmf, x.theta(b.f));
    const Complex vt = std::polar(vmt, x.theta(b.t));
    const Complex cross_f = vf * std::conj(b.yft * vt);
    const Complex cross_t = vt * std::conj(b.ytf * vf);

    const Complex sf_thf = kJ * cross_f;
    const Complex sf_tht = -kJ * cross_f;
    const Complex sf_vf = 2.0 * vmf * std::conj(b.yff) + cross_f / vmf;
    const Complex sf_vt = cross_f / vmt;

    const Complex st_tht = kJ * cross_t;
    const Complex st_thf = -kJ * cross_t;
    const Complex st_vt = 2.0 * vmt * std::conj(b.ytt) + cross_t / vmt;
    const Complex st_vf = cross_t / vmf;

    for (int row : {b.f, b.forward_row}) {
      add(row, b.f, sf_thf, sf_vf);
      add(row, b.t, sf_tht, sf_vt);
    }
    for (int row : {b.t, b.backward_row}) {
      add(row, b.t, st_tht, st_vt);
      add(row, b.f, st_thf, st_vf);
    }
  }
  return jac;
}

Vector ACMeasurementModel::pack(const ACState& x) const {
  check(x);
  Vector out(state_size());
  for (int i = 0; i < n_; ++i) {
    const int ct = theta_col(i);
    if (ct < 0) continue;
    out(ct) = x.theta(i);
    out(v_col(i)) = x.v(i);
  }
  return out;
}

ACState ACMeasurementModel::unpack(const Vector& x) const {
  if (x.size() != state_size()) throw DimensionMismatch("free vector length differs from 2N - 2");
  ACState out{Vector::Zero(n_), Vector::Constant(n_, v_ref_)};
  for (int i = 0; i < n_; ++i) {
    const int ct = theta_col(i);
    if (ct < 0) continue;
    out.theta(i) = x(ct);
    out.v(i) = x(v_col(i));
  }
  return out;
}

ACState ACMeasurementModel::flat_start() const {
  ACState out{Vector::Zero(n_), Vector::Ones(n_)};
  out.v(reference_) = v_ref_;
  return out;
}

ACState ACMeasurementModel::anchor() const { return ACState{Vector::Zero(n_), Vector::Constant(n_, v_ref_)}; }

ACState ACMeasurementModel::state_from_case(const Network& net) const {
  if (net.size() != n_) throw DimensionMismatch("network size differs from the model");
  const CaseSignals sig = case_signals(net);
  return ACState{sig.theta, sig.v};
}

Vector ac_measure(const Network& net, const ACState& x) {
  return ACMeasurementModel(net, build_laplacian(net)).measure(x);
}

Matrix ac_jacobian(const Network& net, const ACState& x) {
  return ACMeasurementModel(net, build_laplacian(net)).jacobian(x);
}

Matrix ac_gain(const Matrix& h_s, const NoiseCovariance& r_s) {
  if (r_s.size() != h_s.rows()) throw DimensionMismatch("noise covariance size differs from Jacobian rows");
  const Matrix hw = r_s.whiten(h_s);
  Matrix g = hw.transpose() * hw;
  return (g + g.transpose()) / 2.0;
}

bool ac_is_observable(const ACMeasurementModel& model, const ACState& x, const SensorSet& sensors) {
  if (sensors.empty()) return false;
  const Matrix h = select_rows(model.jacobian(x), sensors);
  const Matrix g = ac_gain(h, model.noise().restricted(sensors));
  Eigen::SelfAdjointEigenSolver<Matrix> eig(g, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) return false;
  const double hi = eig.eigenvalues().maxCoeff();
  const double lo = eig.eigenvalues().minCoeff();
  return hi > 0.0 && lo / hi > 1e-10;
}

SensorSet induced_ac_sensor_set(const ACMeasurementModel& model, const LaplacianMatrix& laplacian,
                                const IndexList& buses) {
  const SensorSet active = induced_sensor_set(laplacian, buses);
  SensorSet rows = active;
  for (int r : active) rows.push_back(r + model.reactive_offset());
  return rows;
}

Vector generate_ac_measurements(const ACMeasurementModel& model, const ACState& truth, Rng& rng) {
  return model.measure(truth) + model.noise().sample(rng);
}

}  // namespace gspse
