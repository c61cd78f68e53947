#include <fstream>
#include <sstream>

#include "gspse/errors.hpp"
#include "gspse/experiment.hpp"
#include "text_util.hpp"

namespace gspse {
namespace {

std::string opt(const std::optional<double>& v) { return v ? detail::format_double(*v) : std::string(); }

nlohmann::json opt_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace

std::string csv_header() {
  return "case,model,policy,estimator,q,sigma2,trials,mse_theta,mse_v,mse_power,observable_fraction,"
         "excluded_trials,runtime_ms";
}

std::string to_csv(const std::vector<ResultRecord>& records, bool include_runtime) {
  std::ostringstream os;
  os << csv_header() << '\n';
  for (const ResultRecord& r : records) {
    os << r.case_name << ',' << to_string(r.model) << ',' << to_string(r.policy) << ','
       << (r.estimator ? to_string(*r.estimator) : std::string("none")) << ',' << r.q << ','
       << detail::format_double(r.sigma2) << ',' << r.trials << ',' << opt(r.mse_theta) << ',' << opt(r.mse_v) << ','
       << opt(r.mse_power) << ',' << detail::format_double(r.observable_fraction) << ',' << r.excluded_trials << ','
       << (include_runtime ? detail::format_double(r.runtime_ms) : std::string()) << '\n';
  }
  return os.str();
}

nlohmann::json to_json(const std::vector<ResultRecord>& records, bool include_runtime) {
  nlohmann::json list = nlohmann::json::array();
  for (const ResultRecord& r : records) {
    list.push_back({{"case", r.case_name},
                    {"model", to_string(r.model)},
                    {"policy", to_string(r.policy)},
                    {"estimator", r.estimator ? to_string(*r.estimator) : std::string("none")},
                    {"q", r.q},
                    {"sigma2", r.sigma2},
                    {"trials", r.trials},
                    {"mse_theta", opt_json(r.mse_theta)},
                    {"mse_v", opt_json(r.mse_v)},
                    {"mse_power", opt_json(r.mse_power)},
                    {"observable_fraction", r.observable_fraction},
                    {"excluded_trials", r.excluded_trials},
                    {"singular_trials", r.singular_trials},
                    {"runtime_ms", include_runtime ? nlohmann::json(r.runtime_ms) : nlohmann::json(nullptr)}});
  }
  return nlohmann::json{{"records", std::move(list)}};
}

void emit_report(const std::vector<ResultRecord>& records, const std::filesystem::path& dir, const std::string& stem,
                 bool include_runtime) {
  if (records.empty()) throw ConfigError("no records to write");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());
  write_file(dir / (stem + ".csv"), to_csv(records, include_runtime));
  write_file(dir / (stem + ".json"), to_json(records, include_runtime).dump(2) + "\n");
}

}  // namespace gspse
