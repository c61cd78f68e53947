#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "gspse/network.hpp"

namespace gspse {

// MATPOWER case subset: mpc.baseMVA, mpc.bus, mpc.gen, mpc.branch.
// Out-of-service branches are dropped; bus ids are renumbered 1..N in file order.
Network parse_matpower_case(std::string_view text);

// Writes a case that parse_matpower_case reads back into an identical Network.
// Net injections are written as negative loads; no generator rows are emitted.
std::string to_matpower_case(const Network& net);

// Native JSON schema, see README ("Case files").
Network parse_json_case(std::string_view text);
std::string to_json_case(const Network& net);

// Dispatches on extension: .json uses the JSON schema, anything else MATPOWER.
Network load_case(const std::filesystem::path& path);

}  // namespace gspse
