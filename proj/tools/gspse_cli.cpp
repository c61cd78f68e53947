// gspse command-line front end. Subcommands share --case, --seed, --out,
// --threads and --format, which may appear before or after the subcommand.
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gspse/ac_model.hpp"
#include "gspse/case_io.hpp"
#include "gspse/dc_model.hpp"
#include "gspse/errors.hpp"
#include "gspse/experiment.hpp"
#include "gspse/gauss_newton.hpp"
#include "gspse/gsp_dc.hpp"
#include "gspse/placement.hpp"
#include "gspse/spectral.hpp"

using namespace gspse;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Globals {
  std::vector<std::string> cases;
  std::uint64_t seed = 1;
  std::string out;
  int threads = 1;
  std::string format;
};

// Writes to <out>/<file> when --out is set, stdout otherwise.
void emit(const Globals& g, const std::string& file, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::error_code ec;
  fs::create_directories(g.out, ec);
  if (ec) throw Error("cannot create " + g.out + ": " + ec.message());
  const fs::path path = fs::path(g.out) / file;
  std::ofstream os(path, std::ios::binary);
  os << text;
  if (!text.empty() && text.back() != '\n') os << '\n';
  if (!os) throw Error("failed writing " + path.string());
  std::cerr << "wrote " << path.string() << '\n';
}

std::string case_stem(const std::string& path) { return fs::path(path).stem().string(); }

Network single_case(const Globals& g) {
  if (g.cases.size() != 1) throw ConfigError("this command takes exactly one --case");
  return load_case(g.cases.front());
}

WeightConvention parse_weights(const std::string& s) {
  if (s == "susceptance") return WeightConvention::Susceptance;
  if (s == "inverse-reactance") return WeightConvention::InverseReactance;
  throw ConfigError("unknown weight convention '" + s + "'");
}

std::vector<int> to_one_based(const IndexList& buses) {
  std::vector<int> out;
  for (int b : buses) out.push_back(b + 1);
  return out;
}

std::vector<double> to_std(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

IndexList from_one_based(const std::vector<int>& ids, int n) {
  IndexList out;
  for (int id : ids) {
    if (id < 1 || id > n) throw ConfigError("bus id " + std::to_string(id) + " outside 1.." + std::to_string(n));
    out.push_back(id - 1);
  }
  return out;
}

// --buses accepts a policy name (with --q), a comma/space separated list of
// 1-based bus ids, or a file holding either such a list or the JSON written by `place`.
IndexList resolve_buses(const std::string& spec, int q, double mu, int cutoff, double sigma2, std::uint64_t seed,
                        const LaplacianMatrix& lap) {
  const int n = lap.size();
  if (spec == "random" || spec == "greedy" || spec == "edesign" || spec == "all") {
    if (spec == "all") return all_indices(n);
    if (q < 1) throw ConfigError("--buses " + spec + " needs --q");
    if (spec == "random") return random_selection(lap, q, seed).buses;
    if (spec == "edesign") return edesign_selection(lap, eig_laplacian(lap), q, std::min(cutoff, n)).buses;
    return greedy_selection(lap, q, mu, NoiseCovariance::iid(n, sigma2 > 0.0 ? sigma2 : 1.0)).buses;
  }
  std::string text = spec;
  if (fs::exists(spec)) {
    std::ifstream in(spec);
    std::ostringstream os;
    os << in.rdbuf();
    text = os.str();
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
      try {
        return from_one_based(json::parse(text).at("buses").get<std::vector<int>>(), n);
      } catch (const json::exception& e) {
        throw ConfigError(spec + ": " + e.what());
      }
    }
  }
  std::vector<int> ids;
  for (char& c : text) {
    if (c == ',' || c == ';') c = ' ';
  }
  std::istringstream is(text);
  std::string tok;
  while (is >> tok) {
    try {
      std::size_t used = 0;
      ids.push_back(std::stoi(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ConfigError("cannot read bus id '" + tok + "'");
    }
  }
  if (ids.empty()) throw ConfigError("no buses given");
  return from_one_based(ids, n);
}

int run_smoothness(const Globals& g, const std::string& weights) {
  if (g.cases.empty()) throw ConfigError("--case is required");
  const WeightConvention conv = parse_weights(weights);
  std::ostringstream csv;
  csv << "case,metric,value\n";
  json doc = json::array();
  for (const std::string& path : g.cases) {
    const Network net = load_case(path);
    const LaplacianMatrix lap = build_laplacian(net, conv);
    const GraphSpectrum spec = eig_laplacian(lap);
    const CaseSignals sig = case_signals(net);
    const SmoothnessReport rep = smoothness_report(lap, spec, sig.theta, sig.v, sig.p_injection);
    const std::string name = net.name.empty() ? case_stem(path) : net.name;
    char buf[128];
    for (auto [metric, value] : {std::pair{"theta", rep.theta}, std::pair{"v", rep.v}, std::pair{"z_bus", rep.z_bus}}) {
      std::snprintf(buf, sizeof(buf), "%.6g", value);
      csv << name << ',' << metric << ',' << buf << '\n';
    }
    doc.push_back({{"case", name}, {"weights", weights}, {"theta", rep.theta}, {"v", rep.v}, {"z_bus", rep.z_bus}});
    if (!g.out.empty()) {
      std::ostringstream gft;
      gft << "k,lambda,theta,v,z_bus\n";
      for (int k = 0; k < spec.size(); ++k) {
        gft << k + 1 << ',' << spec.eigenvalues(k) << ',' << rep.theta_gft(k) << ',' << rep.v_gft(k) << ','
            << rep.z_bus_gft(k) << '\n';
      }
      emit(g, name + "_gft.csv", gft.str());
    }
  }
  if (g.format == "json") {
    emit(g, "smoothness.json", doc.dump(2));
  } else {
    emit(g, "smoothness.csv", csv.str());
  }
  return 0;
}

void emit_records(const Globals& g, const std::vector<ResultRecord>& recs, const std::string& stem, bool runtime) {
  if (!g.out.empty()) {
    emit_report(recs, g.out, stem, runtime);
    std::cerr << "wrote " << (fs::path(g.out) / (stem + ".csv")).string() << " and .json\n";
    return;
  }
  if (g.format == "json") {
    std::cout << to_json(recs, runtime).dump(2) << '\n';
  } else {
    std::cout << to_csv(recs, runtime);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph-signal-processing state estimation for power grids"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--case", g.cases, "case file (MATPOWER .m or JSON); repeatable for smoothness");
  app.add_option("--seed", g.seed, "master seed")->capture_default_str();
  app.add_option("--out", g.out, "output directory (default: stdout)");
  app.add_option("--threads", g.threads, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--format", g.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  // smoothness
  auto* smooth = app.add_subcommand("smoothness", "normalized Dirichlet energies of the case signals");
  std::string weights = "susceptance";
  smooth->add_option("--weights", weights, "susceptance or inverse-reactance")->capture_default_str();

  // observability
  auto* obs = app.add_subcommand("observability", "fraction of random bus selections that are observable");
  std::vector<int> obs_q{24, 36, 48, 60, 72, 84, 96, 108, 118};
  int obs_trials = 10000;
  obs->add_option("--q", obs_q, "numbers of measured buses")->delimiter(',');
  obs->add_option("--trials", obs_trials, "random selections per q")->capture_default_str();

  // estimate-dc
  auto* edc = app.add_subcommand("estimate-dc", "DC state estimate from synthetic or replayed measurements");
  std::string dc_buses = "all";
  int dc_q = 0;
  double dc_mu = 0.1, dc_sigma2 = 0.01;
  int dc_cutoff = 48;
  std::string dc_method = "gsp";
  bool dc_reconstruct = false;
  std::string dc_replay, dc_save;
  edc->add_option("--buses", dc_buses, "random|greedy|edesign|all, id list, or selection file")->capture_default_str();
  edc->add_option("--q", dc_q, "number of buses for policy selections");
  edc->add_option("--mu", dc_mu)->capture_default_str();
  edc->add_option("--sigma2", dc_sigma2)->capture_default_str();
  edc->add_option("--cutoff", dc_cutoff, "E-design cutoff")->capture_default_str();
  edc->add_option("--method", dc_method)->check(CLI::IsMember({"gsp", "pm", "wls"}))->capture_default_str();
  edc->add_flag("--reconstruct-power", dc_reconstruct, "predict the withheld measurements");
  edc->add_option("--measurements", dc_replay, "replay measurements from this JSON file");
  edc->add_option("--save-measurements", dc_save, "write the measurements used to this JSON file");

  // estimate-ac
  auto* eac = app.add_subcommand("estimate-ac", "AC state estimate by Gauss-Newton");
  std::string ac_buses = "all";
  int ac_q = 0;
  GNConfig gn;
  double ac_sigma2 = 0.01, ac_mu = 0.1;
  int ac_cutoff = 48;
  std::string ac_method = "gsp";
  eac->add_option("--buses", ac_buses, "random|greedy|edesign|all, id list, or selection file")->capture_default_str();
  eac->add_option("--q", ac_q);
  eac->add_option("--mu-theta", gn.mu_theta)->capture_default_str();
  eac->add_option("--mu-v", gn.mu_v)->capture_default_str();
  eac->add_option("--delta", gn.delta)->capture_default_str();
  eac->add_option("--max-iter", gn.max_iterations)->capture_default_str();
  eac->add_option("--sigma2", ac_sigma2)->capture_default_str();
  eac->add_option("--mu", ac_mu, "CRB weight for greedy selections")->capture_default_str();
  eac->add_option("--cutoff", ac_cutoff)->capture_default_str();
  eac->add_option("--method", ac_method)->check(CLI::IsMember({"gsp", "pm", "plain"}))->capture_default_str();

  // place
  auto* place = app.add_subcommand("place", "choose buses to measure");
  std::string policy = "greedy";
  int place_q = 0;
  double place_mu = 0.1, place_sigma2 = 0.01;
  int place_cutoff = 48;
  place->add_option("--policy", policy)->check(CLI::IsMember({"greedy", "edesign", "random", "exhaustive"}))->capture_default_str();
  place->add_option("--q", place_q)->required();
  place->add_option("--mu", place_mu)->capture_default_str();
  place->add_option("--sigma2", place_sigma2, "noise variance in the CRB")->capture_default_str();
  place->add_option("--cutoff", place_cutoff, "E-design cutoff")->capture_default_str();

  // monte-carlo
  auto* mc = app.add_subcommand("monte-carlo", "MSE experiments over policies, estimators, q and sigma2");
  ExperimentConfig cfg;
  std::string mc_model = "dc";
  std::vector<std::string> mc_policies{"random", "edesign", "greedy"};
  std::vector<std::string> mc_estimators{"gsp", "pm"};
  bool no_runtime = false;
  mc->add_option("--model", mc_model)->check(CLI::IsMember({"dc", "ac"}))->capture_default_str();
  mc->add_option("--policies", mc_policies)->delimiter(',');
  mc->add_option("--estimators", mc_estimators)->delimiter(',');
  mc->add_option("--q", cfg.q_values)->delimiter(',');
  mc->add_option("--sigma2", cfg.sigma2_values)->delimiter(',');
  mc->add_option("--trials", cfg.trials)->capture_default_str();
  mc->add_option("--mu", cfg.mu)->capture_default_str();
  mc->add_option("--mu-theta", cfg.mu_theta)->capture_default_str();
  mc->add_option("--mu-v", cfg.mu_v)->capture_default_str();
  mc->add_option("--cutoff", cfg.edesign_cutoff)->capture_default_str();
  mc->add_option("--weights", weights, "susceptance or inverse-reactance")->capture_default_str();
  mc->add_flag("--no-runtime", no_runtime, "leave runtime_ms empty so reruns are byte-identical");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*smooth) return run_smoothness(g, weights);

    if (*obs) {
      const Network net = single_case(g);
      ExperimentConfig oc;
      oc.case_name = net.name;
      oc.q_values = obs_q;
      oc.trials = obs_trials;
      oc.seed = g.seed;
      oc.threads = g.threads;
      emit_records(g, run_observability_sweep(net, oc), net.name + "_observability", true);
      return 0;
    }

    if (*place) {
      const Network net = single_case(g);
      const LaplacianMatrix lap = build_laplacian(net);
      const int n = lap.size();
      const NoiseCovariance r = NoiseCovariance::iid(n, place_sigma2 > 0.0 ? place_sigma2 : 1.0);
      BusSelection sel;
      if (policy == "greedy") {
        sel = greedy_selection(lap, place_q, place_mu, r);
      } else if (policy == "edesign") {
        sel = edesign_selection(lap, eig_laplacian(lap), place_q, std::min(place_cutoff, n));
      } else if (policy == "random") {
        sel = random_selection(lap, place_q, g.seed);
      } else {
        sel = exhaustive_selection(lap, place_q, place_mu, r);
      }
      json doc{{"case", net.name},
               {"policy", policy},
               {"q", place_q},
               {"buses", to_one_based(sel.buses)},
               {"sensor_rows", sel.sensor_set},
               {"observable", is_observable(build_dc_model(lap, 1.0), sel.sensor_set)}};
      try {
        doc["crb"] = crb(lap, sel.buses, place_mu, r).value;
      } catch (const SingularSystem&) {
        doc["crb"] = nullptr;
      }
      emit(g, net.name + "_" + policy + "_q" + std::to_string(place_q) + ".json", doc.dump(2));
      return 0;
    }

    if (*edc) {
      const Network net = single_case(g);
      const LaplacianMatrix lap = build_laplacian(net);
      if (!(dc_sigma2 >= 0.0)) throw ConfigError("--sigma2 must be non-negative");
      const DCMeasurementModel model = build_dc_model(lap, dc_sigma2 > 0.0 ? dc_sigma2 : 1.0);
      const DCState truth{case_signals(net).theta};
      SensorSet s;
      Vector z;
      if (!dc_replay.empty()) {
        std::ifstream in(dc_replay);
        if (!in) throw ConfigError("cannot open " + dc_replay);
        json doc;
        try {
          doc = json::parse(in);
        } catch (const json::exception& e) {
          throw ConfigError(dc_replay + ": " + e.what());
        }
        s = measurements_from_json(model, doc, z);
      } else {
        const IndexList buses = resolve_buses(dc_buses, dc_q, dc_mu, dc_cutoff, dc_sigma2, g.seed, lap);
        s = induced_sensor_set(lap, buses);
        Rng rng(derive_seed(g.seed, 1));
        z = select(model.H * truth.theta, s) + std::sqrt(dc_sigma2) * rng.normal_vector(static_cast<Eigen::Index>(s.size()));
      }
      if (!dc_save.empty()) {
        std::ofstream os(dc_save);
        os << measurements_to_json(model, s, z).dump(2) << '\n';
        if (!os) throw Error("failed writing " + dc_save);
      }
      DCState est;
      if (dc_method == "gsp") {
        est = gsp_wls(model, z, s, lap, GspConfig{dc_mu, std::nullopt});
      } else if (dc_method == "pm") {
        Rng prior_rng(derive_seed(g.seed, 2));
        const int k = lap.size() - 1;
        est = pm_wls(model, z, s, PriorModel{std::sqrt(0.015) * prior_rng.normal_vector(k), 0.5 * Matrix::Identity(k, k)});
      } else {
        est = wls_estimate(model, z, s);
      }
      json doc{{"case", net.name},
               {"method", dc_method},
               {"sensor_rows", s},
               {"observable", is_observable(model, s)},
               {"theta_hat", to_std(est.theta)},
               {"mse_vs_truth", (est.theta - truth.theta).squaredNorm()}};
      if (dc_reconstruct) {
        const ReconstructedPower rec = reconstruct_missing_power(model, est, s);
        doc["reconstructed_power"] = {{"rows", rec.rows}, {"values", to_std(rec.values)}};
      }
      emit(g, net.name + "_estimate_dc.json", doc.dump(2));
      return 0;
    }

    if (*eac) {
      const Network net = single_case(g);
      const LaplacianMatrix lap = build_laplacian(net);
      if (!(ac_sigma2 >= 0.0)) throw ConfigError("--sigma2 must be non-negative");
      const ACMeasurementModel model(net, lap, ac_sigma2 > 0.0 ? ac_sigma2 : 1.0);
      const ACState truth = model.state_from_case(net);
      const IndexList buses = resolve_buses(ac_buses, ac_q, ac_mu, ac_cutoff, ac_sigma2, g.seed, lap);
      const SensorSet s = induced_ac_sensor_set(model, lap, buses);
      Rng rng(derive_seed(g.seed, 1));
      const Vector z = select(model.measure(truth), s) +
                       std::sqrt(ac_sigma2) * rng.normal_vector(static_cast<Eigen::Index>(s.size()));
      GNResult res;
      if (ac_method == "gsp") {
        res = regularized_gauss_newton(model, z, s, lap, gn);
      } else if (ac_method == "pm") {
        Rng prior_rng(derive_seed(g.seed, 2));
        const int k = model.state_size();
        const Vector prior = model.pack(model.anchor()) + std::sqrt(0.015) * prior_rng.normal_vector(k);
        res = pm_gauss_newton(model, z, s, prior, Matrix::Identity(k, k), gn);
      } else {
        res = gauss_newton_wls(model, z, s, gn);
      }
      const Vector err = model.pack(res.state) - model.pack(truth);
      const int n = model.buses();
      json doc{{"case", net.name},
               {"method", ac_method},
               {"buses", to_one_based(buses)},
               {"theta_hat", to_std(res.state.theta)},
               {"v_hat", to_std(res.state.v)},
               {"converged", res.trace.converged},
               {"trace",
                {{"iterations", res.trace.iterations},
                 {"step_norms", res.trace.step_norms},
                 {"objective", res.trace.objective},
                 {"condition", res.trace.condition}}},
               {"mse_theta", err.head(n - 1).squaredNorm()},
               {"mse_v", err.tail(n - 1).squaredNorm()}};
      emit(g, net.name + "_estimate_ac.json", doc.dump(2));
      return 0;
    }

    if (*mc) {
      const Network net = single_case(g);
      cfg.case_name = net.name;
      cfg.model = parse_model(mc_model);
      cfg.policies.clear();
      for (const std::string& p : mc_policies) cfg.policies.push_back(parse_policy(p));
      cfg.estimators.clear();
      for (const std::string& e : mc_estimators) cfg.estimators.push_back(parse_estimator(e));
      cfg.seed = g.seed;
      cfg.threads = g.threads;
      cfg.weights = parse_weights(weights);
      emit_records(g, run_mse_experiment(net, cfg), net.name + "_" + mc_model + "_mse", !no_runtime);
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const CaseError& e) {
    std::cerr << "case error: " << e.what() << '\n';
    return 3;
  } catch (const NonConvergence& e) {
    std::cerr << "numerical failure: " << e.what() << " (last step " << e.last_step_norm() << ")\n";
    return 4;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
