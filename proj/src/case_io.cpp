#include "gspse/case_io.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "gspse/errors.hpp"
#include "text_util.hpp"

namespace gspse {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

using Table = std::vector<std::vector<double>>;

std::string strip_comments(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool in_comment = false;
  for (char c : text) {
    if (c == '\n') in_comment = false;
    if (c == '%') in_comment = true;
    if (!in_comment) out.push_back(c);
  }
  return out;
}

// Position just after "mpc.<name>" followed by optional spaces and '='.
std::size_t find_assignment(const std::string& text, const std::string& name) {
  const std::string key = "mpc." + name;
  std::size_t pos = 0;
  while ((pos = text.find(key, pos)) != std::string::npos) {
    std::size_t p = pos + key.size();
    while (p < text.size() && (text[p] == ' ' || text[p] == '\t')) ++p;
    if (p < text.size() && text[p] == '=') return p + 1;
    pos += key.size();
  }
  return std::string::npos;
}

double parse_number(const std::string& token, const std::string& section) {
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0') {
    throw MalformedCase("non-numeric field '" + token + "' in mpc." + section);
  }
  return v;
}

Table parse_table(const std::string& text, const std::string& name, bool required) {
  const std::size_t eq = find_assignment(text, name);
  if (eq == std::string::npos) {
    if (required) throw MalformedCase("missing section mpc." + name);
    return {};
  }
  const std::size_t open = text.find('[', eq);
  const std::size_t close = text.find(']', open);
  if (open == std::string::npos || close == std::string::npos) {
    throw MalformedCase("mpc." + name + " is not a bracketed matrix");
  }
  for (std::size_t p = eq; p < open; ++p) {
    if (!std::isspace(static_cast<unsigned char>(text[p]))) {
      throw MalformedCase("mpc." + name + " is not a bracketed matrix");
    }
  }
  Table rows;
  std::vector<double> row;
  std::string token;
  auto flush_token = [&] {
    if (!token.empty()) {
      row.push_back(parse_number(token, name));
      token.clear();
    }
  };
  auto flush_row = [&] {
    flush_token();
    if (!row.empty()) {
      if (!rows.empty() && rows.front().size() != row.size()) {
        throw MalformedCase("ragged rows in mpc." + name);
      }
      rows.push_back(std::move(row));
      row.clear();
    }
  };
  for (std::size_t p = open + 1; p < close; ++p) {
    const char c = text[p];
    if (c == ';' || c == '\n') {
      flush_row();
    } else if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
      flush_token();
    } else {
      token.push_back(c);
    }
  }
  flush_row();
  return rows;
}

double parse_scalar(const std::string& text, const std::string& name) {
  const std::size_t eq = find_assignment(text, name);
  if (eq == std::string::npos) throw MalformedCase("missing section mpc." + name);
  const std::size_t semi = text.find(';', eq);
  std::string token = text.substr(eq, semi == std::string::npos ? std::string::npos : semi - eq);
  std::istringstream in(token);
  std::string word;
  in >> word;
  return parse_number(word, name);
}

std::string parse_function_name(const std::string& text) {
  const std::size_t f = text.find("function");
  if (f == std::string::npos) return {};
  const std::size_t eq = text.find('=', f);
  const std::size_t eol = text.find('\n', f);
  if (eq == std::string::npos || (eol != std::string::npos && eq > eol)) return {};
  std::istringstream in(text.substr(eq + 1, eol == std::string::npos ? std::string::npos : eol - eq - 1));
  std::string name;
  in >> name;
  return name;
}

// Raw records before renumbering; bus endpoints still carry case ids.
struct RawCase {
  std::string name;
  double base_mva = 100.0;
  std::vector<Bus> buses;
  std::vector<Branch> branches;
};

Network finalize(RawCase raw) {
  if (!(raw.base_mva > 0.0)) throw MalformedCase("baseMVA must be positive");
  if (raw.buses.size() < 2) throw MalformedCase("a network needs at least two buses");

  std::unordered_map<int, int> renumber;
  int reference_count = 0;
  for (std::size_t i = 0; i < raw.buses.size(); ++i) {
    Bus& b = raw.buses[i];
    if (!renumber.emplace(b.case_id, static_cast<int>(i) + 1).second) {
      throw MalformedCase("duplicate bus id " + std::to_string(b.case_id));
    }
    b.id = static_cast<int>(i) + 1;
    b.is_reference = b.type == BusType::Reference;
    if (b.is_reference) ++reference_count;
  }
  if (reference_count == 0) throw NoReferenceBus("no bus of type 3 in case");
  if (reference_count > 1) throw MalformedCase("more than one bus of type 3 in case");

  Network net;
  net.name = std::move(raw.name);
  net.base_mva = raw.base_mva;
  net.buses = std::move(raw.buses);
  for (Branch br : raw.branches) {
    if (!br.in_service) continue;
    auto f = renumber.find(br.from_bus);
    auto t = renumber.find(br.to_bus);
    if (f == renumber.end() || t == renumber.end()) {
      throw MalformedCase("branch references unknown bus");
    }
    br.from_bus = f->second;
    br.to_bus = t->second;
    if (br.from_bus == br.to_bus) throw MalformedCase("branch connects a bus to itself");
    if (br.reactance == 0.0) {
      throw ZeroReactanceBranch("in-service branch " + std::to_string(net.buses[br.from_bus - 1].case_id) +
                                "-" + std::to_string(net.buses[br.to_bus - 1].case_id) +
                                " has zero reactance");
    }
    net.branches.push_back(br);
  }
  return net;
}

BusType bus_type_from(double code) {
  const int t = static_cast<int>(code);
  if (t < 1 || t > 4 || t != code) throw MalformedCase("invalid bus type " + detail::format_double(code));
  return static_cast<BusType>(t);
}

}  // namespace

Network parse_matpower_case(std::string_view text) {
  const std::string clean = strip_comments(text);
  RawCase raw;
  raw.name = parse_function_name(clean);
  raw.base_mva = parse_scalar(clean, "baseMVA");

  const Table bus = parse_table(clean, "bus", true);
  const Table branch = parse_table(clean, "branch", true);
  const Table gen = parse_table(clean, "gen", false);
  if (!bus.empty() && bus.front().size() < 9) throw MalformedCase("mpc.bus needs at least 9 columns");
  if (!branch.empty() && branch.front().size() < 11) {
    throw MalformedCase("mpc.branch needs at least 11 columns");
  }
  if (!gen.empty() && gen.front().size() < 8) throw MalformedCase("mpc.gen needs at least 8 columns");

  const double base = raw.base_mva;
  std::unordered_map<int, std::size_t> by_case_id;
  for (const auto& r : bus) {
    Bus b;
    b.case_id = static_cast<int>(r[0]);
    b.type = bus_type_from(r[1]);
    b.active_injection = -r[2] / base;
    b.reactive_injection = -r[3] / base;
    b.shunt_conductance = r[4] / base;
    b.shunt_susceptance = r[5] / base;
    b.voltage_magnitude = r[7];
    b.voltage_angle = r[8] * kDegToRad;
    by_case_id[b.case_id] = raw.buses.size();
    raw.buses.push_back(b);
  }
  for (const auto& r : gen) {
    if (!(r[7] > 0.0)) continue;
    auto it = by_case_id.find(static_cast<int>(r[0]));
    if (it == by_case_id.end()) throw MalformedCase("generator at unknown bus");
    raw.buses[it->second].active_injection += r[1] / base;
    raw.buses[it->second].reactive_injection += r[2] / base;
  }
  for (const auto& r : branch) {
    Branch br;
    br.from_bus = static_cast<int>(r[0]);
    br.to_bus = static_cast<int>(r[1]);
    br.resistance = r[2];
    br.reactance = r[3];
    br.total_charging_susceptance = r[4];
    br.tap_ratio = r[8] == 0.0 ? 1.0 : r[8];
    br.phase_shift = r[9] * kDegToRad;
    br.in_service = r[10] > 0.0;
    raw.branches.push_back(br);
  }
  return finalize(std::move(raw));
}

std::string to_matpower_case(const Network& net) {
  using detail::format_double;
  const double base = net.base_mva;
  std::ostringstream out;
  out << "function mpc = " << (net.name.empty() ? "case" : net.name) << "\n";
  out << "mpc.version = '2';\n";
  out << "mpc.baseMVA = " << format_double(base) << ";\n\n";
  out << "%% bus_i type Pd Qd Gs Bs area Vm Va baseKV zone Vmax Vmin\n";
  out << "mpc.bus = [\n";
  for (const Bus& b : net.buses) {
    out << "\t" << b.case_id << "\t" << static_cast<int>(b.type) << "\t" << format_double(-b.active_injection * base)
        << "\t" << format_double(-b.reactive_injection * base) << "\t" << format_double(b.shunt_conductance * base)
        << "\t" << format_double(b.shunt_susceptance * base) << "\t1\t" << format_double(b.voltage_magnitude) << "\t"
        << format_double(b.voltage_angle / kDegToRad) << "\t0\t1\t1.1\t0.9;\n";
  }
  out << "];\n\n";
  out << "%% fbus tbus r x b rateA rateB rateC ratio angle status angmin angmax\n";
  out << "mpc.branch = [\n";
  for (const Branch& br : net.branches) {
    out << "\t" << net.buses.at(static_cast<std::size_t>(br.from_bus - 1)).case_id << "\t"
        << net.buses.at(static_cast<std::size_t>(br.to_bus - 1)).case_id << "\t" << format_double(br.resistance)
        << "\t" << format_double(br.reactance) << "\t" << format_double(br.total_charging_susceptance)
        << "\t0\t0\t0\t" << format_double(br.tap_ratio) << "\t" << format_double(br.phase_shift / kDegToRad) << "\t"
        << (br.in_service ? 1 : 0) << "\t-360\t360;\n";
  }
  out << "];\n";
  return out.str();
}

Network parse_json_case(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw MalformedCase(std::string("invalid JSON case: ") + e.what());
  }
  try {
    RawCase raw;
    raw.name = doc.value("name", std::string{});
    raw.base_mva = doc.value("base_mva", 100.0);
    if (!doc.contains("buses") || !doc.contains("branches")) {
      throw MalformedCase("JSON case needs 'buses' and 'branches'");
    }
    for (const auto& jb : doc.at("buses")) {
      Bus b;
      b.case_id = jb.at("id").get<int>();
      b.type = bus_type_from(jb.value("type", 1));
      b.voltage_magnitude = jb.value("vm", 1.0);
      b.voltage_angle = jb.value("va", 0.0);
      b.active_injection = jb.value("p", 0.0);
      b.reactive_injection = jb.value("q", 0.0);
      b.shunt_conductance = jb.value("gs", 0.0);
      b.shunt_susceptance = jb.value("bs", 0.0);
      raw.buses.push_back(b);
    }
    for (const auto& jr : doc.at("branches")) {
      Branch br;
      br.from_bus = jr.at("from").get<int>();
      br.to_bus = jr.at("to").get<int>();
      br.resistance = jr.value("r", 0.0);
      br.reactance = jr.at("x").get<double>();
      br.total_charging_susceptance = jr.value("b", 0.0);
      br.tap_ratio = jr.value("tap", 1.0);
      if (br.tap_ratio == 0.0) br.tap_ratio = 1.0;
      br.phase_shift = jr.value("shift", 0.0);
      br.in_service = jr.value("status", 1) != 0;
      raw.branches.push_back(br);
    }
    return finalize(std::move(raw));
  } catch (const nlohmann::json::exception& e) {
    throw MalformedCase(std::string("invalid JSON case: ") + e.what());
  }
}

std::string to_json_case(const Network& net) {
  nlohmann::ordered_json doc;
  doc["name"] = net.name;
  doc["base_mva"] = net.base_mva;
  auto& buses = doc["buses"] = nlohmann::ordered_json::array();
  for (const Bus& b : net.buses) {
    buses.push_back({{"id", b.case_id},
                     {"type", static_cast<int>(b.type)},
                     {"vm", b.voltage_magnitude},
                     {"va", b.voltage_angle},
                     {"p", b.active_injection},
                     {"q", b.reactive_injection},
                     {"gs", b.shunt_conductance},
                     {"bs", b.shunt_susceptance}});
  }
  auto& branches = doc["branches"] = nlohmann::ordered_json::array();
  for (const Branch& br : net.branches) {
    branches.push_back({{"from", net.buses.at(static_cast<std::size_t>(br.from_bus - 1)).case_id},
                        {"to", net.buses.at(static_cast<std::size_t>(br.to_bus - 1)).case_id},
                        {"r", br.resistance},
                        {"x", br.reactance},
                        {"b", br.total_charging_susceptance},
                        {"tap", br.tap_ratio},
                        {"shift", br.phase_shift},
                        {"status", br.in_service ? 1 : 0}});
  }
  return doc.dump(2) + "\n";
}

Network load_case(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MalformedCase("cannot read case file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (path.extension() == ".json") return parse_json_case(buf.str());
  Network net = parse_matpower_case(buf.str());
  if (net.name.empty()) net.name = path.stem().string();
  return net;
}

}  // namespace gspse
