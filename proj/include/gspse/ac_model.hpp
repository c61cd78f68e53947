#pragma once

#include <complex>
#include <vector>

#include "gspse/dc_model.hpp"
#include "gspse/laplacian.hpp"
#include "gspse/linalg.hpp"
#include "gspse/network.hpp"

namespace gspse {

using Complex = std::complex<double>;

// Voltages at every bus, reference included. The free vector x used by the
// solvers drops the reference entries: x = [theta (N-1), v (N-1)].
struct ACState {
  Vector theta;
  Vector v;
};

enum class PowerKind { Active, Reactive };

// One row of h(x). Active rows come first and follow the DC row layout
// (injections, then both directions of every merged edge); reactive rows repeat
// that layout shifted by N + 2P.
struct ACSensor {
  PowerKind power = PowerKind::Active;
  SensorKind kind = SensorKind::BusInjection;
  int bus = -1;
  int from = -1;
  int to = -1;
  int row = 0;
};

// Polar pi-model measurement functions. Branch k -> m with series admittance
// ys, total charging bc and complex tap t = tap * exp(j shift) (tap on the from side):
//   Yff = (ys + j bc/2) / |t|^2   Yft = -ys / conj(t)
//   Ytf = -ys / t                 Ytt = ys + j bc/2
//   S_from = V_k conj(Yff V_k + Yft V_m),  S_to = V_m conj(Ytf V_k + Ytt V_m).
// Injection at a bus = sum of terminal flows leaving it + v^2 conj(gs + j bs).
// The flow on a merged edge in one direction sums the terminal flows of its branches.
class ACMeasurementModel {
 public:
  ACMeasurementModel(const Network& net, const LaplacianMatrix& laplacian, NoiseCovariance r);
  // R = sigma2 * I.
  ACMeasurementModel(const Network& net, const LaplacianMatrix& laplacian, double sigma2 = 1.0);

  int buses() const { return n_; }
  int measurements() const { return static_cast<int>(sensors_.size()); }
  int state_size() const { return 2 * (n_ - 1); }
  int reference() const { return reference_; }
  double reference_magnitude() const { return v_ref_; }
  // First reactive row.
  int reactive_offset() const { return measurements() / 2; }
  const std::vector<ACSensor>& sensors() const { return sensors_; }
  const NoiseCovariance& noise() const { return r_; }
  void set_noise(NoiseCovariance r);

  Vector measure(const ACState& x) const;
  // M x (2N-2), columns ordered as the free vector.
  Matrix jacobian(const ACState& x) const;

  Vector pack(const ACState& x) const;
  ACState unpack(const Vector& x) const;

  // All magnitudes 1 except the reference, all angles 0.
  ACState flat_start() const;
  // x0: zero angles, every magnitude equal to the reference magnitude.
  ACState anchor() const;
  // The solved voltages of the case, angles shifted so the reference is 0.
  ACState state_from_case(const Network& net) const;

 private:
  struct BranchTerm {
    int f = 0;
    int t = 0;
    Complex yff, yft, ytf, ytt;
    int forward_row = 0;   // active row of the merged-edge flow leaving f
    int backward_row = 0;  // active row of the merged-edge flow leaving t
  };

  void init(const Network& net, const LaplacianMatrix& laplacian);
  void check(const ACState& x) const;
  int theta_col(int bus) const;
  int v_col(int bus) const;

  int n_ = 0;
  int reference_ = 0;
  double v_ref_ = 1.0;
  std::vector<BranchTerm> terms_;
  std::vector<Complex> shunt_;
  std::vector<ACSensor> sensors_;
  NoiseCovariance r_;
};

// Convenience wrappers that build the susceptance Laplacian and model internally.
Vector ac_measure(const Network& net, const ACState& x);
Matrix ac_jacobian(const Network& net, const ACState& x);

// H^T R^-1 H.
Matrix ac_gain(const Matrix& h_s, const NoiseCovariance& r_s);

// True when the gain at x is numerically nonsingular: lambda_min / lambda_max > 1e-10.
bool ac_is_observable(const ACMeasurementModel& model, const ACState& x, const SensorSet& sensors);

// The DC induced rows for the active part plus the matching reactive rows.
SensorSet induced_ac_sensor_set(const ACMeasurementModel& model, const LaplacianMatrix& laplacian,
                                const IndexList& buses);

// z = h(x) + e, e ~ N(0, R).
Vector generate_ac_measurements(const ACMeasurementModel& model, const ACState& truth, Rng& rng);

}  // namespace gspse
