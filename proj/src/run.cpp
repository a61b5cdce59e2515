#include "ppmc/run.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <json.hpp>

#include "ppmc/copulas.hpp"
#include "ppmc/io.hpp"
#include "ppmc/samplers.hpp"

namespace ppmc {

using nlohmann::json;

SamplerKind sampler_from_name(const std::string& s) {
  if (s == "pmwg") return SamplerKind::Pmwg;
  if (s == "pmmh") return SamplerKind::Pmmh;
  if (s == "da-gibbs") return SamplerKind::DaGibbs;
  if (s == "mcmc-mh") return SamplerKind::McmcMh;
  throw ConfigError("unknown sampler: " + s);
}

std::string sampler_name(SamplerKind k) {
  switch (k) {
    case SamplerKind::Pmwg: return "pmwg";
    case SamplerKind::Pmmh: return "pmmh";
    case SamplerKind::DaGibbs: return "da-gibbs";
    case SamplerKind::McmcMh: return "mcmc-mh";
  }
  return "?";
}

void RunConfig::validate() const {
  if (burnin >= iterations) throw ConfigError("burnin must be smaller than iterations");
  if (sampler == SamplerKind::Pmwg && particles < 2)
    throw ConfigError("pmwg needs at least 2 particles");
  if (particles < 1) throw ConfigError("particles must be >= 1");
  if (chains < 1) throw ConfigError("chains must be >= 1");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  if (sampler == SamplerKind::DaGibbs && family != Family::BivProbit)
    throw ConfigError("da-gibbs supports the bivariate probit family only");
  if (data_path.empty() && !sim.has_value())
    throw ConfigError("either a data path or a simulation design is required");
}

RunConfig config_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config JSON: ") + e.what());
  }
  RunConfig cfg;
  try {
    if (j.contains("family")) cfg.family = family_from_name(j["family"].get<std::string>());
    if (j.contains("sampler")) cfg.sampler = sampler_from_name(j["sampler"].get<std::string>());
    if (j.contains("particles")) cfg.particles = j["particles"].get<int>();
    if (j.contains("iterations")) cfg.iterations = j["iterations"].get<long>();
    if (j.contains("burnin")) cfg.burnin = j["burnin"].get<long>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("chains")) cfg.chains = j["chains"].get<int>();
    if (j.contains("threads")) cfg.threads = j["threads"].get<int>();
    if (j.contains("mcmc_mh_inner")) cfg.mcmc_mh_inner = j["mcmc_mh_inner"].get<int>();
    if (j.contains("data")) cfg.data_path = j["data"].get<std::string>();
    if (j.contains("sim")) {
      const json& s = j["sim"];
      const std::string preset = s.value("preset", "probit-sec3.6");
      const int p = s.value("P", 1000);
      const int t = s.value("T", 4);
      const std::uint64_t sim_seed = s.value("seed", cfg.seed);
      SimDesign d = preset_by_name(preset, p, t, sim_seed);
      if (s.contains("dep")) d.dep = s["dep"].get<double>();
      if (s.contains("family")) d.family = family_from_name(s["family"].get<std::string>());
      cfg.sim = d;
      cfg.family = d.family;
    }
    if (j.contains("priors")) {
      const json& p = j["priors"];
      cfg.priors.v0 = p.value("v0", cfg.priors.v0);
      cfg.priors.r0_scale = p.value("r0_scale", cfg.priors.r0_scale);
      cfg.priors.beta_var = p.value("beta_var", cfg.priors.beta_var);
      cfg.priors.dep_max = p.value("dep_max", cfg.priors.dep_max);
    }
    if (j.contains("hmc")) {
      const json& h = j["hmc"];
      cfg.hmc_target_accept = h.value("target_accept", cfg.hmc_target_accept);
      cfg.hmc_max_tree_depth = h.value("max_tree_depth", cfg.hmc_max_tree_depth);
      cfg.hmc_adapt_iters = h.value("adapt_iters", cfg.hmc_adapt_iters);
      cfg.hmc_full_covariance = h.value("full_covariance", cfg.hmc_full_covariance);
    }
    if (j.contains("out")) cfg.out_dir = j["out"].get<std::string>();
    if (j.contains("ape")) {
      for (const auto& e : j["ape"]) cfg.ape_events.push_back(e.get<std::string>());
    }
    if (j.contains("ape_mc_draws")) cfg.ape_mc_draws = j["ape_mc_draws"].get<int>();
    if (j.contains("ape_thin")) cfg.ape_thin = j["ape_thin"].get<int>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  return cfg;
}

RunConfig config_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return config_from_json_text(text);
}

std::string config_to_json(const RunConfig& cfg) {
  json j;
  j["family"] = family_name(cfg.family);
  j["sampler"] = sampler_name(cfg.sampler);
  j["particles"] = cfg.particles;
  j["iterations"] = cfg.iterations;
  j["burnin"] = cfg.burnin;
  j["seed"] = cfg.seed;
  j["chains"] = cfg.chains;
  j["threads"] = cfg.threads;
  j["mcmc_mh_inner"] = cfg.mcmc_mh_inner;
  if (!cfg.data_path.empty()) j["data"] = cfg.data_path;
  if (cfg.sim) {
    json s;
    s["P"] = cfg.sim->P;
    s["T"] = cfg.sim->T;
    s["seed"] = cfg.sim->seed;
    s["family"] = family_name(cfg.sim->family);
    s["dep"] = cfg.sim->dep;
    j["sim"] = s;
  }
  j["priors"] = {{"v0", cfg.priors.v0},
                 {"r0_scale", cfg.priors.r0_scale},
                 {"beta_var", cfg.priors.beta_var},
                 {"dep_max", cfg.priors.dep_max}};
  j["hmc"] = {{"target_accept", cfg.hmc_target_accept},
              {"max_tree_depth", cfg.hmc_max_tree_depth},
              {"adapt_iters", cfg.hmc_adapt_iters},
              {"full_covariance", cfg.hmc_full_covariance}};
  j["out"] = cfg.out_dir;
  j["ape"] = cfg.ape_events;
  j["ape_mc_draws"] = cfg.ape_mc_draws;
  j["ape_thin"] = cfg.ape_thin;
  return j.dump(2);
}

ChainOutput run_chain(const RunConfig& cfg, const ModelSpec& model, const PanelData& data,
                      int chain_index) {
  RngPool pool(cfg.seed + static_cast<std::uint64_t>(chain_index), chain_index, data.P);
  const long keep = cfg.iterations - cfg.burnin;
  ChainOutput chain;
  chain.param_names = param_names(model, data);
  chain.draws.resize(keep, model.n_params());

  HmcConfig hmc;
  hmc.target_accept = cfg.hmc_target_accept;
  hmc.max_leapfrog = cfg.hmc_max_tree_depth;
  hmc.adapt_iters = cfg.hmc_adapt_iters;

  const auto t0 = std::chrono::steady_clock::now();
  SamplerState state;
  auto record = [&](long iter) {
    if (iter >= cfg.burnin)
      chain.draws.row(iter - cfg.burnin) = pack_theta(model, state.theta);
  };

  switch (cfg.sampler) {
    case SamplerKind::Pmwg: {
      PmwgSampler sampler(model, data, cfg.priors, cfg.particles, hmc,
                          static_cast<int>(cfg.burnin));
      state = sampler.init(pool);
      for (long it = 0; it < cfg.iterations; ++it) {
        sampler.step(state, pool);
        record(it);
      }
      break;
    }
    case SamplerKind::Pmmh: {
      PmmhSampler sampler(model, data, cfg.priors, cfg.particles,
                          static_cast<int>(cfg.burnin));
      state = sampler.init(pool);
      for (long it = 0; it < cfg.iterations; ++it) {
        sampler.step(state, pool);
        record(it);
      }
      break;
    }
    case SamplerKind::DaGibbs: {
      DaGibbsSampler sampler(model, data, cfg.priors);
      state = sampler.init(pool);
      for (long it = 0; it < cfg.iterations; ++it) {
        sampler.step(state, pool);
        record(it);
      }
      break;
    }
    case SamplerKind::McmcMh: {
      McmcMhSampler sampler(model, data, cfg.priors, cfg.mcmc_mh_inner, hmc,
                            static_cast<int>(cfg.burnin));
      state = sampler.init(pool);
      for (long it = 0; it < cfg.iterations; ++it) {
        sampler.step(state, pool);
        record(it);
      }
      break;
    }
  }
  const auto t1 = std::chrono::steady_clock::now();
  chain.wall_time = std::chrono::duration<double>(t1 - t0).count();
  chain.accept_rates = state.accept.rates();
  return chain;
}

namespace {

json summary_to_json(const PosteriorSummary& s) {
  json j;
  j["mean"] = s.mean;
  j["ci_low"] = s.ci_low;
  j["ci_high"] = s.ci_high;
  j["iact"] = s.iact;
  j["significant"] = s.significant;
  if (s.degenerate) j["degenerate"] = true;
  return j;
}

int resolve_column(const std::vector<std::string>& names, const std::string& target) {
  for (std::size_t j = 0; j < names.size(); ++j)
    if (names[j] == target) return static_cast<int>(j);
  return -1;
}

}  // namespace

int run(const RunConfig& cfg) {
  namespace fs = std::filesystem;
  std::vector<std::string> written;
  auto cleanup = [&]() {
    for (const auto& f : written) {
      std::error_code ec;
      fs::remove(f, ec);
    }
  };
  try {
    cfg.validate();
#ifdef _OPENMP
    omp_set_num_threads(cfg.threads);
#endif
    PanelData data;
    Theta truth;
    bool have_truth = false;
    if (!cfg.data_path.empty()) {
      try {
        data = ingest_csv(cfg.data_path);
      } catch (const std::exception& e) {
        throw DataError(e.what());
      }
    } else {
      SimOutput sim = generate(*cfg.sim);
      data = std::move(sim.data);
      truth = sim.truth;
      have_truth = true;
    }
    const ModelSpec model = data.spec(cfg.family);

    fs::create_directories(cfg.out_dir);
    reset_clamp_count();

    std::vector<ChainOutput> chains;
    for (int c = 0; c < cfg.chains; ++c) {
      chains.push_back(run_chain(cfg, model, data, c));
      const std::string path = cfg.out_dir + "/draws_chain" + std::to_string(c) + ".csv";
      write_draws_csv(chains.back(), path);
      written.push_back(path);
    }

    // pooled draws for posterior summaries; IACT averaged over chains
    const long keep = cfg.iterations - cfg.burnin;
    Eigen::MatrixXd pooled(keep * cfg.chains, model.n_params());
    for (int c = 0; c < cfg.chains; ++c) pooled.middleRows(keep * c, keep) = chains[c].draws;

    json summary;
    double iact_sum = 0.0;
    for (int p = 0; p < model.n_params(); ++p) {
      PosteriorSummary s = summarize_series(pooled.col(p));
      double iact_avg = 0.0;
      for (const auto& ch : chains) iact_avg += iact(ch.draws.col(p)).value;
      s.iact = iact_avg / cfg.chains;
      iact_sum += s.iact;
      json js = summary_to_json(s);
      js["name"] = chains[0].param_names[p];
      summary["params"].push_back(js);
    }
    const double iact_mean = iact_sum / model.n_params();

    // dependence-measure posteriors: per-draw transforms of dep and rho_alpha
    const int dep_col = model.k1() + model.k2();
    const int rho_alpha_col = dep_col + 3;
    const Copula cop = copula_of(cfg.family);
    Eigen::VectorXd ktau(pooled.rows()), ktau_alpha(pooled.rows());
    Eigen::VectorXd tail_lo(pooled.rows()), tail_hi(pooled.rows());
    for (Eigen::Index m = 0; m < pooled.rows(); ++m) {
      ktau[m] = kendall_tau(cop, pooled(m, dep_col));
      ktau_alpha[m] = kendall_tau(Copula::Gaussian, pooled(m, rho_alpha_col));
      const auto [lo, hi] = tail_dependence(cop, pooled(m, dep_col));
      tail_lo[m] = lo;
      tail_hi[m] = hi;
    }
    summary["dependence"]["kendall_tau_dep"] = summary_to_json(summarize_series(ktau));
    summary["dependence"]["kendall_tau_rho_alpha"] =
        summary_to_json(summarize_series(ktau_alpha));
    if (cop == Copula::Clayton)
      summary["dependence"]["lower_tail"] = summary_to_json(summarize_series(tail_lo));
    if (cop == Copula::Gumbel)
      summary["dependence"]["upper_tail"] = summary_to_json(summarize_series(tail_hi));

    // average partial effects
    for (const auto& event : cfg.ape_events) {
      ApeRequest req;
      req.name = event;
      req.col1 = resolve_column(data.x1_names, event);
      req.col2 = resolve_column(data.x2_names, event);
      req.mc_draws = cfg.ape_mc_draws;
      req.seed = cfg.seed ^ 0x9e3779b97f4a7c15ull;
      if (req.col1 < 0 && req.col2 < 0)
        throw ConfigError("ape: covariate '" + event + "' not found in either equation");
      ChainOutput pooled_chain;
      pooled_chain.param_names = chains[0].param_names;
      if (cfg.ape_thin > 1) {
        const Eigen::Index kept = (pooled.rows() + cfg.ape_thin - 1) / cfg.ape_thin;
        pooled_chain.draws.resize(kept, pooled.cols());
        for (Eigen::Index m = 0; m < kept; ++m)
          pooled_chain.draws.row(m) = pooled.row(m * cfg.ape_thin);
      } else {
        pooled_chain.draws = pooled;
      }
      const ApeResult res = ape(pooled_chain, model, data, req);
      json js = summary_to_json(res.summary);
      js["name"] = event;
      js["simulation_based"] = !(cfg.family == Family::BivProbit ||
                                 cfg.family == Family::MixedGaussian);
      summary["ape"].push_back(js);
    }

    double total_time = 0.0;
    for (const auto& ch : chains) total_time += ch.wall_time;
    summary["iact_mean"] = iact_mean;
    summary["wall_time"] = total_time;
    summary["tnv"] = tnv(iact_mean, total_time);
    summary["clamp_events"] = clamp_count();
    for (const auto& [k, v] : chains[0].accept_rates) summary["accept_rates"][k] = v;
    if (have_truth) {
      summary["sim_truth"] = json::array();
      const Eigen::VectorXd truth_row = pack_theta(model, truth);
      for (Eigen::Index p = 0; p < truth_row.size(); ++p)
        summary["sim_truth"].push_back(truth_row[p]);
    }

    {
      const std::string path = cfg.out_dir + "/summary.json";
      std::ofstream out(path);
      out << summary.dump(2) << "\n";
      written.push_back(path);
    }
    {
      json manifest;
      manifest["config"] = json::parse(config_to_json(cfg));
      manifest["seed"] = cfg.seed;
      for (int c = 0; c < cfg.chains; ++c) {
        const std::string name = "draws_chain" + std::to_string(c) + ".csv";
        manifest["files"][name] = file_content_hash(cfg.out_dir + "/" + name);
      }
      std::ofstream out(cfg.out_dir + "/manifest.json");
      out << manifest.dump(2) << "\n";
    }
    return 0;
  } catch (const ConfigError& e) {
    cleanup();
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    cleanup();
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    cleanup();
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}

}  // namespace ppmc
