#include "kpn/config.hpp"

#include <cstdlib>
#include <filesystem>

#include "kpn/error.hpp"
#include "kpn/io.hpp"

namespace kpn {

namespace {

constexpr const char* kModes[] = {"fit", "lasso", "predict", "prune", "transform", "greens", "verify"};

void merge_into(nlohmann::json& base, const nlohmann::json& patch, const std::string& where) {
  if (!patch.is_object()) throw SchemaError("config" + where + ": expected an object");
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string path = where + "." + it.key();
    if (!base.contains(it.key())) throw SchemaError("config: unknown key '" + path.substr(1) + "'");
    auto& slot = base[it.key()];
    if (slot.is_object()) {
      merge_into(slot, it.value(), path);
    } else {
      slot = it.value();
    }
  }
}

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw ConfigError(std::string("io.") + what + " is required for this mode");
  if (!std::filesystem::is_regular_file(path)) throw ConfigError(std::string("io.") + what + ": no such file '" + path + "'");
}

}  // namespace

std::string to_string(Mode m) { return kModes[static_cast<int>(m)]; }

Mode mode_from_string(const std::string& s) {
  for (int i = 0; i < 7; ++i) {
    if (s == kModes[i]) return static_cast<Mode>(i);
  }
  throw ConfigError("unknown mode '" + s + "'");
}

nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j;
  j["mode"] = to_string(c.mode);
  j["operator"] = c.op;
  j["operator"]["activation_alias"] = to_string(c.alias);
  j["solver"] = c.solver;
  j["polyspace"] = c.polyspace;
  j["kplane"] = {{"grid_points", c.kplane.grid_points}, {"extent", c.kplane.extent},
                 {"directions", c.kplane.directions}, {"pad", c.kplane.pad}, {"filter", c.kplane.filter}};
  j["lasso"] = {{"atoms", c.lasso.atoms}, {"prune", c.lasso.prune}};
  j["io"] = {{"data", c.io.data}, {"model", c.io.model}, {"inputs", c.io.inputs},
             {"grid", c.io.grid}, {"output_dir", c.io.output_dir}};
  j["threads"] = c.threads;
  return j;
}

nlohmann::json default_config_json() {
  RunConfig c;
  c.polyspace = CorrectorGrid::defaults(c.op.d);
  return to_json(c);
}

RunConfig config_from_json(const nlohmann::json& j) {
  RunConfig c;
  try {
    c.mode = mode_from_string(j.at("mode").get<std::string>());
    nlohmann::json op = j.at("operator");
    c.alias = activation_alias_from_string(op.value("activation_alias", std::string("none")));
    op.erase("activation_alias");
    c.op = op.get<OperatorSpec>();
    c.solver = j.at("solver").get<FitConfig>();
    c.polyspace = j.at("polyspace").get<CorrectorGrid>();
    const auto& kp = j.at("kplane");
    c.kplane.grid_points = kp.at("grid_points").get<int>();
    c.kplane.extent = kp.at("extent").get<double>();
    c.kplane.directions = kp.at("directions").get<int>();
    c.kplane.pad = kp.at("pad").get<int>();
    c.kplane.filter = kp.at("filter").get<bool>();
    const auto& la = j.at("lasso");
    c.lasso.atoms = la.at("atoms").get<int>();
    c.lasso.prune = la.at("prune").get<bool>();
    const auto& io = j.at("io");
    c.io.data = io.at("data").get<std::string>();
    c.io.model = io.at("model").get<std::string>();
    c.io.inputs = io.at("inputs").get<std::string>();
    c.io.grid = io.at("grid").get<std::string>();
    c.io.output_dir = io.at("output_dir").get<std::string>();
    c.threads = j.at("threads").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("config: ") + e.what());
  }
  return c;
}

void RunConfig::validate() const {
  const auto report = check_admissibility(op);
  if (!report.ok) {
    std::string msg = "operator not admissible";
    for (const auto& m : report.messages) msg += "; " + m;
    throw ConfigError(msg);
  }
  solver.validate();
  if (polyspace.R0 <= 0.0 || polyspace.R0 > 0.5 || polyspace.extent <= 0.0 || polyspace.points_per_axis < 8) {
    throw ConfigError("polyspace: need 0 < R0 <= 0.5, extent > 0, points_per_axis >= 8");
  }
  if (kplane.grid_points < 8 || kplane.extent <= 0.0 || kplane.directions < 2 || kplane.pad < 1) {
    throw ConfigError("kplane: need grid_points >= 8, extent > 0, directions >= 2, pad >= 1");
  }
  if (lasso.atoms < 1) throw ConfigError("lasso.atoms must be >= 1");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  switch (mode) {
    case Mode::fit:
    case Mode::lasso:
      require_file(io.data, "data");
      break;
    case Mode::predict:
      require_file(io.model, "model");
      require_file(io.inputs, "inputs");
      break;
    case Mode::prune:
      require_file(io.model, "model");
      require_file(io.data, "data");
      break;
    case Mode::transform:
      if (!io.grid.empty()) require_file(io.grid, "grid");
      break;
    case Mode::greens:
    case Mode::verify:
      break;
  }
}

void apply_override(nlohmann::json& doc, const std::string& assignment) {
  std::string s = assignment;
  while (!s.empty() && s.front() == '-') s.erase(s.begin());
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "': expected key=value");
  const std::string key = s.substr(0, eq);
  const std::string text = s.substr(eq + 1);
  nlohmann::json value = nlohmann::json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  nlohmann::json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!node->is_object() || !node->contains(part)) throw ConfigError("override: unknown key '" + key + "'");
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  if (node->is_object()) throw ConfigError("override: '" + key + "' names a block, not a value");
  if (node->is_string() && !value.is_string()) value = text;
  *node = value;
}

RunConfig load_config(const std::optional<std::string>& path, const std::vector<std::string>& overrides) {
  nlohmann::json doc = default_config_json();
  std::optional<std::string> file = path;
  if (!file) {
    if (const char* env = std::getenv("KPN_CONFIG"); env && *env) file = env;
  }
  if (file) merge_into(doc, read_json(*file), "");
  // A changed dimension without an explicit polyspace block picks that
  // dimension's corrector defaults.
  const int d0 = doc["operator"]["d"].get<int>();
  for (const auto& o : overrides) apply_override(doc, o);
  const int d1 = doc["operator"]["d"].get<int>();
  if (d1 != d0 && d1 >= 1 && d1 <= 3) doc["polyspace"] = CorrectorGrid::defaults(d1);
  for (const auto& o : overrides) {
    if (o.find("polyspace.") != std::string::npos) apply_override(doc, o);
  }
  RunConfig c = config_from_json(doc);
  c.validate();
  return c;
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : label) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (h | 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::mt19937_64 make_rng(std::uint64_t seed, std::string_view label) {
  return std::mt19937_64(derive_seed(seed, label));
}

}  // namespace kpn
