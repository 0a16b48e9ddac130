#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

#include "aisopt/experiment.hpp"

namespace aisopt {

namespace {

std::vector<long> resolve_checkpoints(const ExperimentConfig& cfg) {
  std::set<long> cps;
  if (!cfg.checkpoints.empty()) {
    cps.insert(cfg.checkpoints.begin(), cfg.checkpoints.end());
  } else {
    // geometric grid keeps the CSVs small across long horizons
    for (double n = 100.0; n < double(cfg.horizon); n = std::ceil(n * 1.3))
      cps.insert(static_cast<long>(n));
  }
  cps.insert(cfg.horizon);
  if (cfg.burn_in > 0) cps.insert(cfg.burn_in);
  return {cps.begin(), cps.end()};
}

Polytope theta_domain(const ExperimentConfig& cfg, int dim) {
  if (cfg.theta_A) {
    if (!cfg.theta_b) throw std::runtime_error("invalid config: theta_A without theta_b");
    return Polytope(*cfg.theta_A, *cfg.theta_b);
  }
  if (cfg.theta_lower || cfg.theta_upper) {
    double lo = cfg.theta_lower.value_or(-std::numeric_limits<double>::infinity());
    double hi = cfg.theta_upper.value_or(std::numeric_limits<double>::infinity());
    return Polytope::box(lo, hi, dim);
  }
  return Polytope::unconstrained(dim);
}

EngineKind engine_kind(const std::string& name) {
  if (name == "joint-nda") return EngineKind::JointNda;
  if (name == "joint-nda-secondary") return EngineKind::JointNdaSecondary;
  if (name == "vanilla-nda") return EngineKind::VanillaNda;
  if (name == "projected-sgd") return EngineKind::ProjectedSgd;
  if (name == "pr-sa") return EngineKind::PrSa;
  if (name == "rm-sa") return EngineKind::RmSa;
  throw std::runtime_error("invalid config: unknown engine `" + name + "`");
}

std::string csv_double(double v) { return fmt::format("{}", v); }

std::string join_rows(const std::vector<int>& rows) {
  std::string out;
  for (size_t i = 0; i < rows.size(); ++i) {
    if (i) out += ';';
    out += std::to_string(rows[i]);
  }
  return out;
}

}  // namespace

BuiltExperiment build_experiment(const ExperimentConfig& cfg) {
  BuiltExperiment built;

  int dim = 1;
  if (cfg.problem_kind == "constrained_quadratic") {
    if (!cfg.quad_H || !cfg.quad_Sigma)
      throw std::runtime_error("invalid config: constrained_quadratic needs quad_H and quad_Sigma");
    dim = static_cast<int>(cfg.quad_H->rows());
  }
  Polytope Theta = theta_domain(cfg, dim);

  if (cfg.problem_kind == "normal_quantile") {
    built.problem = normal_quantile_problem(cfg.alpha_tail, Theta, cfg.gradient_scale);
  } else if (cfg.problem_kind == "exponential_quantile") {
    built.problem = exponential_quantile_problem(cfg.alpha_tail, Theta, cfg.gradient_scale);
  } else if (cfg.problem_kind == "constrained_quadratic") {
    built.problem = constrained_quadratic_problem(*cfg.quad_H, *cfg.quad_Sigma, Theta);
  } else {
    throw std::runtime_error("invalid config: unknown problem kind `" + cfg.problem_kind + "`");
  }

  if (cfg.is_kind != "none" && !cfg.is_kind.empty()) {
    BaseDistribution base;
    if (cfg.is_base == "standard_normal")
      base = BaseDistribution::standard_normal(built.problem.nominal.dim());
    else if (cfg.is_base == "symmetric_exponential")
      base = BaseDistribution::symmetric_exponential();
    else
      throw std::runtime_error("invalid config: unknown is base `" + cfg.is_base + "`");

    if (cfg.is_kind == "exponential_tilting" || cfg.is_kind == "mean_translation") {
      double lo = cfg.mu_lower.value_or(-std::numeric_limits<double>::infinity());
      double hi = cfg.mu_upper.value_or(std::numeric_limits<double>::infinity());
      Polytope M = Polytope::box(lo, hi, base.dim());
      built.family = cfg.is_kind == "exponential_tilting"
                         ? ISFamily::exponential_tilting(base, M)
                         : ISFamily::mean_translation(base, M);
    } else if (cfg.is_kind == "mixture") {
      if (!cfg.mixture_means)
        throw std::runtime_error("invalid config: mixture needs mixture_means");
      std::vector<MixtureComponent> comps;
      for (int i = 0; i < cfg.mixture_means->size(); ++i) {
        double m = (*cfg.mixture_means)(i);
        comps.push_back({[m](RngStream& rng) { return Vector::Constant(1, rng.normal() + m); },
                         // l_i = phi(x)/phi(x - m) for the N(m, 1) component
                         [m](const Vector& x) {
                           return -0.5 * (x(0) * x(0) - (x(0) - m) * (x(0) - m));
                         }});
      }
      built.family = ISFamily::mixture(base, std::move(comps));
    } else {
      throw std::runtime_error("invalid config: unknown is kind `" + cfg.is_kind + "`");
    }
  }

  RunSpec spec;
  spec.engine = engine_kind(cfg.engine);
  spec.schedule = StepSchedule(cfg.alpha0_theta, cfg.alpha0_mu, cfg.gamma);
  spec.theta0 = cfg.theta0.size() > 0 ? cfg.theta0 : Vector::Zero(built.problem.dim);
  if (spec.theta0.size() != built.problem.dim)
    throw std::runtime_error("invalid config: theta0 dimension mismatch");
  if (built.family) {
    spec.mu0 = cfg.mu0.size() > 0 ? cfg.mu0 : Vector::Zero(built.family->param_dim());
    if (spec.mu0.size() != built.family->param_dim())
      throw std::runtime_error("invalid config: mu0 dimension mismatch");
  }
  spec.horizon = cfg.horizon;
  spec.freeze_mu = cfg.freeze_mu;
  spec.plan.stride = cfg.thinning;
  spec.plan.dense_window = 200;
  spec.plan.forced = resolve_checkpoints(cfg);
  built.spec = spec;
  return built;
}

ExperimentSummary run_experiment(const ExperimentConfig& cfg) {
  BuiltExperiment built = build_experiment(cfg);
  const ISFamily* family = built.family ? &*built.family : nullptr;
  const long T = cfg.trajectories;

  std::vector<TrajectoryRecord> records(T);
  long workers = 0;
  if (const char* env = std::getenv("AISOPT_WORKERS")) workers = std::atol(env);
  if (workers < 1) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<long>(workers, T);

  std::atomic<long> next{0};
  std::mutex err_mutex;
  std::string first_error;
  auto worker = [&]() {
    for (long i = next.fetch_add(1); i < T; i = next.fetch_add(1)) {
      std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(i);
      try {
        records[i] = run(built.spec, built.problem, family, seed);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lk(err_mutex);
        if (first_error.empty())
          first_error = "trajectory seed " + std::to_string(seed) + ": " + e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (long w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (!first_error.empty()) throw std::runtime_error("run_experiment: " + first_error);

  // ---- aggregate ----
  ExperimentSummary summary;
  summary.checkpoints = resolve_checkpoints(cfg);
  summary.burn_in = cfg.burn_in;
  summary.trajectories = T;
  summary.samples_per_trajectory = records[0].samples_drawn;
  const bool has_mu = family && records[0].points[0].mu.size() > 0;
  for (long n : summary.checkpoints) {
    summary.theta_band[n] = quantile_band(records, n, TrackField::Theta);
    summary.theta_bar_band[n] = quantile_band(records, n, TrackField::ThetaBar);
    if (has_mu) {
      summary.mu_band[n] = quantile_band(records, n, TrackField::Mu);
      summary.mu_bar_band[n] = quantile_band(records, n, TrackField::MuBar);
    }
  }
  if (built.problem.theta_star && T >= 2) {
    std::vector<long> usable;
    for (long n : summary.checkpoints)
      if (n > cfg.burn_in) usable.push_back(n);
    summary.scaled_variance =
        scaled_error_variance(records, *built.problem.theta_star, usable, cfg.burn_in);
  }
  if (built.problem.grad_f && built.problem.theta_star) {
    for (long n : summary.checkpoints) {
      double acc = 0.0;
      for (const auto& rec : records) {
        auto it = std::lower_bound(
            rec.points.begin(), rec.points.end(), n,
            [](const RecordPoint& p, long v) { return p.n < v; });
        acc += projected_gradient_residual(it->theta_bar, built.problem);
      }
      summary.projected_gradient_residual_mean[n] = acc / double(T);
    }
  }
  if (has_mu) {
    for (const auto& rec : records) {
      const auto& final_rows = rec.points.back().active_mu_rows;
      if (final_rows.empty())
        summary.mu_hit_times.push_back(std::nullopt);
      else
        summary.mu_hit_times.push_back(active_set_hit_time(rec, final_rows, true));
    }
  }

  // ---- write artifacts ----
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  const int s = built.problem.dim;
  const int m = has_mu ? family->param_dim() : 0;
  {
    std::ofstream csv(fs::path(cfg.out_dir) / "trajectories.csv");
    csv << "traj,seed,n";
    for (int i = 0; i < s; ++i) csv << ",theta_" << i;
    for (int j = 0; j < m; ++j) csv << ",mu_" << j;
    for (int i = 0; i < s; ++i) csv << ",theta_bar_" << i;
    for (int j = 0; j < m; ++j) csv << ",mu_bar_" << j;
    csv << ",active_theta_rows,active_mu_rows\n";
    for (long t = 0; t < T; ++t) {
      for (const auto& p : records[t].points) {
        csv << t << ',' << records[t].seed << ',' << p.n;
        for (int i = 0; i < s; ++i) csv << ',' << csv_double(p.theta(i));
        for (int j = 0; j < m; ++j) csv << ',' << csv_double(p.mu(j));
        for (int i = 0; i < s; ++i) csv << ',' << csv_double(p.theta_bar(i));
        for (int j = 0; j < m; ++j) csv << ',' << csv_double(p.mu_bar(j));
        csv << ',' << join_rows(p.active_theta_rows) << ',' << join_rows(p.active_mu_rows)
            << '\n';
      }
    }
  }
  {
    std::ofstream csv(fs::path(cfg.out_dir) / "summary.csv");
    csv << "n,theta_mean,theta_lo,theta_hi,theta_bar_mean,theta_bar_lo,theta_bar_hi,"
           "mu_mean,mu_lo,mu_hi,mu_bar_mean,mu_bar_lo,mu_bar_hi,scaled_var_trace,"
           "pg_residual\n";
    for (long n : summary.checkpoints) {
      auto band = [&](const std::map<long, Band>& src) {
        if (!src.count(n)) return std::string(",,");
        const Band& b = src.at(n);
        return csv_double(b.mean) + ',' + csv_double(b.lo) + ',' + csv_double(b.hi);
      };
      csv << n << ',' << band(summary.theta_band) << ',' << band(summary.theta_bar_band)
          << ',' << band(summary.mu_band) << ',' << band(summary.mu_bar_band) << ',';
      if (summary.scaled_variance.count(n))
        csv << csv_double(summary.scaled_variance.at(n).trace());
      csv << ',';
      if (summary.projected_gradient_residual_mean.count(n))
        csv << csv_double(summary.projected_gradient_residual_mean.at(n));
      csv << '\n';
    }
  }
  {
    nlohmann::json j;
    j["config"] = {{"name", cfg.name},
                   {"problem", cfg.problem_kind},
                   {"engine", cfg.engine},
                   {"alpha_tail", cfg.alpha_tail},
                   {"gradient_scale", cfg.gradient_scale},
                   {"gamma", cfg.gamma},
                   {"alpha0_theta", cfg.alpha0_theta},
                   {"alpha0_mu", cfg.alpha0_mu},
                   {"horizon", cfg.horizon},
                   {"trajectories", cfg.trajectories},
                   {"seed", cfg.seed},
                   {"thinning", cfg.thinning},
                   {"burn_in", cfg.burn_in}};
    j["samples_per_trajectory"] = summary.samples_per_trajectory;
    j["checkpoints"] = summary.checkpoints;
    if (built.problem.theta_star) {
      j["theta_star"] = (*built.problem.theta_star)(0);
      for (const auto& [n, var] : summary.scaled_variance)
        j["scaled_error_variance"][std::to_string(n)] = var.trace();
    }
    for (const auto& [n, b] : summary.theta_band)
      j["theta_band"][std::to_string(n)] = {{"mean", b.mean}, {"lo", b.lo}, {"hi", b.hi}};
    for (const auto& [n, b] : summary.mu_band)
      j["mu_band"][std::to_string(n)] = {{"mean", b.mean}, {"lo", b.lo}, {"hi", b.hi}};
    if (has_mu) {
      nlohmann::json hits = nlohmann::json::array();
      for (const auto& h : summary.mu_hit_times)
        hits.push_back(h ? nlohmann::json(*h) : nlohmann::json(nullptr));
      j["mu_hit_times"] = hits;
    }
    std::ofstream out(fs::path(cfg.out_dir) / "summary.json");
    out << j.dump(2) << '\n';
  }
  return summary;
}

}  // namespace aisopt
