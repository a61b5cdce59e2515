#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ppmc/analysis.hpp"
#include "ppmc/data.hpp"
#include "ppmc/models.hpp"
#include "ppmc/simgen.hpp"

namespace ppmc {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class SamplerKind { Pmwg, Pmmh, DaGibbs, McmcMh };

SamplerKind sampler_from_name(const std::string& s);
std::string sampler_name(SamplerKind k);

struct RunConfig {
  Family family = Family::BivProbit;
  SamplerKind sampler = SamplerKind::Pmwg;
  int particles = 100;
  long iterations = 11000;
  long burnin = 1000;
  std::uint64_t seed = 1;
  int chains = 1;
  int threads = 1;
  int mcmc_mh_inner = 10;

  std::string data_path;              // or
  std::optional<SimDesign> sim;       // simulate when data_path is empty

  Priors priors;
  double hmc_target_accept = 0.8;
  int hmc_max_tree_depth = 10;
  int hmc_adapt_iters = 1000;
  bool hmc_full_covariance = false;

  std::string out_dir = "out";
  std::vector<std::string> ape_events;
  int ape_mc_draws = 10000;
  int ape_thin = 1;

  void validate() const;
};

RunConfig config_from_json_file(const std::string& path);
RunConfig config_from_json_text(const std::string& text);
std::string config_to_json(const RunConfig& cfg);

/// One chain of the configured sampler; chain_index offsets the RNG streams.
ChainOutput run_chain(const RunConfig& cfg, const ModelSpec& model, const PanelData& data,
                      int chain_index);

/// Full batch run: data, chains, draw files, summary.json, manifest.json.
/// Returns the process exit code (0 ok, 2 config, 3 data, 4 numeric); partial
/// outputs are removed on failure.
int run(const RunConfig& cfg);

}  // namespace ppmc
