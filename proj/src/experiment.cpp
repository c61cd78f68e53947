#include "gspse/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include "gspse/ac_model.hpp"
#include "gspse/dc_model.hpp"
#include "gspse/errors.hpp"
#include "gspse/gauss_newton.hpp"
#include "gspse/gsp_dc.hpp"
#include "gspse/placement.hpp"
#include "gspse/spectral.hpp"

namespace gspse {

std::string to_string(ModelKind m) { return m == ModelKind::DC ? "dc" : "ac"; }

std::string to_string(Policy p) {
  switch (p) {
    case Policy::Random:
      return "random";
    case Policy::EDesign:
      return "edesign";
    case Policy::Greedy:
      return "greedy";
  }
  return "?";
}

std::string to_string(Estimator e) {
  switch (e) {
    case Estimator::Gsp:
      return "gsp";
    case Estimator::Pm:
      return "pm";
    case Estimator::Plain:
      return "plain";
  }
  return "?";
}

ModelKind parse_model(const std::string& s) {
  if (s == "dc") return ModelKind::DC;
  if (s == "ac") return ModelKind::AC;
  throw ConfigError("unknown model '" + s + "' (dc|ac)");
}

Policy parse_policy(const std::string& s) {
  if (s == "random") return Policy::Random;
  if (s == "edesign") return Policy::EDesign;
  if (s == "greedy") return Policy::Greedy;
  throw ConfigError("unknown policy '" + s + "' (random|edesign|greedy)");
}

Estimator parse_estimator(const std::string& s) {
  if (s == "gsp") return Estimator::Gsp;
  if (s == "pm") return Estimator::Pm;
  if (s == "plain" || s == "wls") return Estimator::Plain;
  throw ConfigError("unknown estimator '" + s + "' (gsp|pm|plain)");
}

namespace {

using Clock = std::chrono::steady_clock;

// Runs body(i) for i in [0, n) on up to `threads` workers. The first exception wins.
template <class Body>
void parallel_for(int n, int threads, Body&& body) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

void validate(const Network& net, const ExperimentConfig& cfg) {
  if (cfg.trials < 1) throw ConfigError("trials must be at least 1");
  if (cfg.threads < 1) throw ConfigError("threads must be at least 1");
  if (cfg.q_values.empty()) throw ConfigError("no q values given");
  for (int q : cfg.q_values) {
    if (q < 1 || q > net.size()) throw ConfigError("q = " + std::to_string(q) + " outside [1, N]");
  }
  for (double s : cfg.sigma2_values) {
    if (!(s >= 0.0)) throw ConfigError("sigma2 must be non-negative");
  }
  if (!(cfg.mu >= 0.0) || !(cfg.mu_theta >= 0.0) || !(cfg.mu_v >= 0.0)) {
    throw ConfigError("regularization weights must be non-negative");
  }
  if (!(cfg.prior_variance >= 0.0)) throw ConfigError("prior variance must be non-negative");
}

// Random selections depend on (q, trial) only, so every sigma2 and policy sees the same draws.
std::uint64_t selection_seed(std::uint64_t master, int q, int trial) {
  return derive_seed(derive_seed(master, 0x5e1ec7000000ULL + static_cast<std::uint64_t>(q)),
                     static_cast<std::uint64_t>(trial));
}

std::uint64_t trial_seed(std::uint64_t master, std::uint64_t grid_point, int trial) {
  return derive_seed(derive_seed(master, grid_point), static_cast<std::uint64_t>(trial));
}

// Estimation needs an invertible R; noiseless runs use unit weights.
double weight_variance(double sigma2) { return sigma2 > 0.0 ? sigma2 : 1.0; }

struct Outcome {
  bool ok = false;
  bool singular = false;
  double err_theta = 0.0;
  double err_v = 0.0;
  double err_power = 0.0;
};

std::optional<double> mean_of(const std::vector<Outcome>& outcomes, double Outcome::*field) {
  std::vector<double> vals;
  for (const Outcome& o : outcomes) {
    if (o.ok) vals.push_back(o.*field);
  }
  if (vals.empty()) return std::nullopt;
  return pairwise_sum(vals) / static_cast<double>(vals.size());
}

template <class Fn>
Outcome guarded(Fn&& fn) {
  Outcome o;
  try {
    fn(o);
    o.ok = true;
  } catch (const SingularSystem&) {
    o.singular = true;
  } catch (const SingularGain&) {
    o.singular = true;
  } catch (const Unobservable&) {
    o.singular = true;
  } catch (const NumericalError&) {
  }
  return o;
}

// Deterministic selections computed once for the largest q; smaller q take prefixes.
class SelectionCache {
 public:
  SelectionCache(const LaplacianMatrix& laplacian, const ExperimentConfig& cfg)
      : laplacian_(laplacian), cfg_(cfg), q_max_(*std::max_element(cfg.q_values.begin(), cfg.q_values.end())) {}

  IndexList get(Policy policy, int q, double sigma2) {
    std::lock_guard<std::mutex> lock(mutex_);
    IndexList* full = nullptr;
    if (policy == Policy::EDesign) {
      if (edesign_.empty()) {
        const int cutoff = std::min(cfg_.edesign_cutoff, laplacian_.size());
        edesign_ = edesign_selection(laplacian_, eig_laplacian(laplacian_), q_max_, cutoff).buses;
      }
      full = &edesign_;
    } else {
      auto it = greedy_.find(sigma2);
      if (it == greedy_.end()) {
        const NoiseCovariance r = NoiseCovariance::iid(laplacian_.size(), weight_variance(sigma2));
        it = greedy_.emplace(sigma2, greedy_selection(laplacian_, q_max_, cfg_.mu, r).buses).first;
      }
      full = &it->second;
    }
    return IndexList(full->begin(), full->begin() + q);
  }

 private:
  const LaplacianMatrix& laplacian_;
  const ExperimentConfig& cfg_;
  int q_max_;
  std::mutex mutex_;
  IndexList edesign_;
  std::map<double, IndexList> greedy_;
};

IndexList pick_buses(SelectionCache& cache, const LaplacianMatrix& laplacian, Policy policy, int q, double sigma2,
                     std::uint64_t seed, int trial) {
  if (policy == Policy::Random) return random_selection(laplacian, q, selection_seed(seed, q, trial)).buses;
  return cache.get(policy, q, sigma2);
}

}  // namespace

std::vector<ResultRecord> run_observability_sweep(const Network& net, const ExperimentConfig& cfg) {
  validate(net, cfg);
  const LaplacianMatrix laplacian = build_laplacian(net, cfg.weights);
  const DCMeasurementModel model = build_dc_model(laplacian, 1.0);
  std::vector<ResultRecord> out;
  for (int q : cfg.q_values) {
    const auto start = Clock::now();
    std::vector<char> observable(static_cast<std::size_t>(cfg.trials), 0);
    parallel_for(cfg.trials, cfg.threads, [&](int t) {
      const BusSelection sel = random_selection(laplacian, q, selection_seed(cfg.seed, q, t));
      observable[static_cast<std::size_t>(t)] = is_observable(model, sel.sensor_set) ? 1 : 0;
    });
    ResultRecord rec;
    rec.case_name = cfg.case_name;
    rec.model = ModelKind::DC;
    rec.policy = Policy::Random;
    rec.q = q;
    rec.trials = cfg.trials;
    rec.observable_fraction =
        static_cast<double>(std::count(observable.begin(), observable.end(), 1)) / static_cast<double>(cfg.trials);
    rec.runtime_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    out.push_back(rec);
  }
  return out;
}

std::vector<ResultRecord> run_mse_experiment(const Network& net, const ExperimentConfig& cfg) {
  validate(net, cfg);
  if (cfg.policies.empty() || cfg.estimators.empty()) throw ConfigError("no policies or estimators given");
  if (cfg.sigma2_values.empty()) throw ConfigError("no sigma2 values given");

  const LaplacianMatrix laplacian = build_laplacian(net, cfg.weights);
  const int n = laplacian.size();
  const CaseSignals signals = case_signals(net);
  const DCMeasurementModel dc_base = build_dc_model(laplacian, 1.0);
  const Vector dc_truth_z = dc_base.H * signals.theta;
  SelectionCache cache(laplacian, cfg);

  std::optional<ACMeasurementModel> ac;
  Vector ac_truth_x;
  Vector ac_truth_h;
  if (cfg.model == ModelKind::AC) {
    ac.emplace(net, laplacian, 1.0);
    const ACState truth = ac->state_from_case(net);
    ac_truth_x = ac->pack(truth);
    ac_truth_h = ac->measure(truth);
  }

  const std::size_t n_est = cfg.estimators.size();
  std::vector<ResultRecord> out;
  for (std::size_t si = 0; si < cfg.sigma2_values.size(); ++si) {
    const double sigma2 = cfg.sigma2_values[si];
    const double w = weight_variance(sigma2);
    const DCMeasurementModel dc = with_noise(dc_base, NoiseCovariance::iid(dc_base.measurements(), w));
    if (ac) ac->set_noise(NoiseCovariance::iid(ac->measurements(), w));
    const double noise_sd = std::sqrt(sigma2);

    for (std::size_t qi = 0; qi < cfg.q_values.size(); ++qi) {
      const int q = cfg.q_values[qi];
      for (std::size_t pi = 0; pi < cfg.policies.size(); ++pi) {
        const Policy policy = cfg.policies[pi];
        const auto start = Clock::now();
        const std::uint64_t grid =
            (static_cast<std::uint64_t>(si) << 40) | (static_cast<std::uint64_t>(qi) << 20) | static_cast<std::uint64_t>(pi);
        // Deterministic policies are built outside the worker loop.
        if (policy != Policy::Random) cache.get(policy, q, sigma2);

        std::vector<std::vector<Outcome>> outcomes(n_est, std::vector<Outcome>(static_cast<std::size_t>(cfg.trials)));
        std::vector<char> observable(static_cast<std::size_t>(cfg.trials), 0);

        parallel_for(cfg.trials, cfg.threads, [&](int t) {
          const IndexList buses = pick_buses(cache, laplacian, policy, q, sigma2, cfg.seed, t);
          const SensorSet s_dc = induced_sensor_set(laplacian, buses);
          observable[static_cast<std::size_t>(t)] = is_observable(dc_base, s_dc) ? 1 : 0;
          const std::uint64_t base_seed = trial_seed(cfg.seed, grid, t);
          Rng noise_rng(derive_seed(base_seed, 0));

          if (cfg.model == ModelKind::DC) {
            const Vector z = select(dc_truth_z, s_dc) + noise_sd * noise_rng.normal_vector(static_cast<Eigen::Index>(s_dc.size()));
            for (std::size_t e = 0; e < n_est; ++e) {
              Outcome o = guarded([&](Outcome& res) {
                DCState est;
                switch (cfg.estimators[e]) {
                  case Estimator::Gsp:
                    est = gsp_wls(dc, z, s_dc, laplacian, GspConfig{cfg.mu, std::nullopt});
                    break;
                  case Estimator::Pm: {
                    Rng prior_rng(derive_seed(base_seed, 1));
                    PriorModel prior{std::sqrt(cfg.prior_variance) * prior_rng.normal_vector(n - 1),
                                     cfg.dc_prior_precision * Matrix::Identity(n - 1, n - 1)};
                    est = pm_wls(dc, z, s_dc, prior);
                    break;
                  }
                  case Estimator::Plain:
                    est = wls_estimate(dc, z, s_dc);
                    break;
                }
                res.err_theta = (est.theta - signals.theta).squaredNorm();
                const ReconstructedPower rec = reconstruct_missing_power(dc, est, s_dc);
                res.err_power = (rec.values - select(dc_truth_z, rec.rows)).squaredNorm();
              });
              outcomes[e][static_cast<std::size_t>(t)] = o;
            }
          } else {
            const SensorSet s_ac = induced_ac_sensor_set(*ac, laplacian, buses);
            const Vector z = select(ac_truth_h, s_ac) + noise_sd * noise_rng.normal_vector(static_cast<Eigen::Index>(s_ac.size()));
            GNConfig gn;
            gn.mu_theta = cfg.mu_theta;
            gn.mu_v = cfg.mu_v;
            gn.delta = cfg.delta;
            gn.max_iterations = cfg.max_iterations;
            for (std::size_t e = 0; e < n_est; ++e) {
              Outcome o = guarded([&](Outcome& res) {
                GNResult r;
                switch (cfg.estimators[e]) {
                  case Estimator::Gsp:
                    r = regularized_gauss_newton(*ac, z, s_ac, laplacian, gn);
                    break;
                  case Estimator::Pm: {
                    Rng prior_rng(derive_seed(base_seed, 1));
                    const int k = ac->state_size();
                    const Vector x_prior = ac->pack(ac->anchor()) + std::sqrt(cfg.prior_variance) * prior_rng.normal_vector(k);
                    r = pm_gauss_newton(*ac, z, s_ac, x_prior, cfg.ac_prior_precision * Matrix::Identity(k, k), gn);
                    break;
                  }
                  case Estimator::Plain:
                    r = gauss_newton_wls(*ac, z, s_ac, gn);
                    break;
                }
                const Vector err = ac->pack(r.state) - ac_truth_x;
                res.err_theta = err.head(n - 1).squaredNorm();
                res.err_v = err.tail(n - 1).squaredNorm();
              });
              outcomes[e][static_cast<std::size_t>(t)] = o;
            }
          }
        });

        const double elapsed = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
        const double obs = static_cast<double>(std::count(observable.begin(), observable.end(), 1)) /
                           static_cast<double>(cfg.trials);
        for (std::size_t e = 0; e < n_est; ++e) {
          ResultRecord rec;
          rec.case_name = cfg.case_name;
          rec.model = cfg.model;
          rec.policy = policy;
          rec.estimator = cfg.estimators[e];
          rec.q = q;
          rec.sigma2 = sigma2;
          rec.trials = cfg.trials;
          rec.mse_theta = mean_of(outcomes[e], &Outcome::err_theta);
          if (cfg.model == ModelKind::AC) {
            rec.mse_v = mean_of(outcomes[e], &Outcome::err_v);
          } else {
            rec.mse_power = mean_of(outcomes[e], &Outcome::err_power);
          }
          rec.observable_fraction = obs;
          for (const Outcome& o : outcomes[e]) {
            if (!o.ok) ++rec.excluded_trials;
            if (o.singular) ++rec.singular_trials;
          }
          rec.runtime_ms = elapsed;
          out.push_back(rec);
        }
      }
    }
  }
  return out;
}

}  // namespace gspse
