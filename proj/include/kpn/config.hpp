#pragma once

// Run configuration: one JSON document with the blocks operator, solver,
// polyspace, kplane, lasso and io, plus the mode. Dot-path overrides such as
// `--solver.lambda=0.1` are applied on top; KPN_CONFIG names a default file.
//
// Randomness: the only seed is solver.seed. Every consumer draws from
// derive_seed(seed, label) with a fixed label.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "kpn/greens.hpp"
#include "kpn/operator.hpp"
#include "kpn/polyspace.hpp"
#include "kpn/solver.hpp"

namespace kpn {

enum class Mode { fit, lasso, predict, prune, transform, greens, verify };

std::string to_string(Mode m);
Mode mode_from_string(const std::string& s);

struct KPlaneConfig {
  int grid_points = 256;   // per axis
  double extent = 6.5;     // grid on [-extent, extent]^d
  int directions = 180;
  int pad = 2;
  bool filter = true;      // transform mode: also write R^* K R phi
};

struct LassoModeConfig {
  int atoms = 500;         // random dictionary size
  bool prune = true;
};

struct IoConfig {
  std::string data;        // dataset CSV
  std::string model;       // model JSON (input for predict / prune)
  std::string inputs;      // predict: CSV of inputs
  std::string grid;        // transform: input grid (binary), empty for a Gaussian
  std::string output_dir = "kpn_out";
};

struct RunConfig {
  Mode mode = Mode::verify;
  OperatorSpec op;
  ActivationAlias alias = ActivationAlias::none;
  FitConfig solver;
  CorrectorGrid polyspace;
  KPlaneConfig kplane;
  LassoModeConfig lasso;
  IoConfig io;
  int threads = 1;

  /// Block invariants and mode-specific file checks; ConfigError.
  void validate() const;
};

nlohmann::json default_config_json();
nlohmann::json to_json(const RunConfig& c);
RunConfig config_from_json(const nlohmann::json& j);

/// Applies "a.b=value" (leading dashes allowed). The value is parsed as JSON
/// when possible and taken as a string otherwise. Unknown paths are rejected.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// defaults <- file (explicit path, else $KPN_CONFIG, else none) <- overrides.
RunConfig load_config(const std::optional<std::string>& path, const std::vector<std::string>& overrides);

/// SplitMix64 finalizer of seed combined with the FNV-1a hash of label.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label);
std::mt19937_64 make_rng(std::uint64_t seed, std::string_view label);

}  // namespace kpn
