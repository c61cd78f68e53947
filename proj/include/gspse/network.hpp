#pragma once

#include <string>
#include <vector>

#include "gspse/linalg.hpp"

namespace gspse {

enum class BusType { PQ = 1, PV = 2, Reference = 3, Isolated = 4 };

// Quantities are per-unit on the network base, angles in radians.
struct Bus {
  int id = 0;       // 1..N after renumbering, file order preserved
  int case_id = 0;  // number used in the source file
  BusType type = BusType::PQ;
  double voltage_magnitude = 1.0;
  double voltage_angle = 0.0;
  bool is_reference = false;
  double active_injection = 0.0;    // generation minus load
  double reactive_injection = 0.0;
  double shunt_conductance = 0.0;
  double shunt_susceptance = 0.0;

  bool operator==(const Bus&) const = default;
};

struct Branch {
  int from_bus = 0;  // renumbered bus ids
  int to_bus = 0;
  double resistance = 0.0;
  double reactance = 0.0;
  double total_charging_susceptance = 0.0;
  double tap_ratio = 1.0;
  double phase_shift = 0.0;
  bool in_service = true;

  bool operator==(const Branch&) const = default;
};

struct Network {
  std::string name;
  double base_mva = 100.0;
  std::vector<Bus> buses;
  std::vector<Branch> branches;

  int size() const { return static_cast<int>(buses.size()); }

  // Zero-based index of the unique reference bus.
  int reference_index() const;

  bool operator==(const Network&) const = default;
};

// Solved operating point recorded in the case file, as graph signals.
// Angles are shifted so that the reference bus sits at zero.
struct CaseSignals {
  Vector theta;
  Vector v;
  Vector p_injection;
  Vector q_injection;
};

CaseSignals case_signals(const Network& net);

}  // namespace gspse
