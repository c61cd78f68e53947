#include "gspse/network.hpp"

#include "gspse/errors.hpp"

namespace gspse {

int Network::reference_index() const {
  int found = -1;
  for (int i = 0; i < size(); ++i) {
    if (!buses[static_cast<std::size_t>(i)].is_reference) continue;
    if (found >= 0) throw MalformedCase("more than one reference bus");
    found = i;
  }
  if (found < 0) throw NoReferenceBus("network has no reference bus");
  return found;
}

CaseSignals case_signals(const Network& net) {
  const int n = net.size();
  const int ref = net.reference_index();
  const double ref_angle = net.buses[static_cast<std::size_t>(ref)].voltage_angle;
  CaseSignals s{Vector(n), Vector(n), Vector(n), Vector(n)};
  for (int i = 0; i < n; ++i) {
    const Bus& b = net.buses[static_cast<std::size_t>(i)];
    s.theta(i) = b.voltage_angle - ref_angle;
    s.v(i) = b.voltage_magnitude;
    s.p_injection(i) = b.active_injection;
    s.q_injection(i) = b.reactive_injection;
  }
  return s;
}

}  // namespace gspse
