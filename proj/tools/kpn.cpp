// kpn: command-line front end.
//
//   kpn [--config FILE] [--threads N] <mode> [--data F] [--model F] [--inputs F]
//       [--grid F] [--out DIR] [--block.key=value ...]

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kpn/config.hpp"
#include "kpn/error.hpp"
#include "kpn/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Sparse k-plane networks: fitting, transforms and acceptance checks"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  std::string config_path;
  std::optional<int> threads;
  app.add_option("--config", config_path, "JSON config file (default: $KPN_CONFIG)");
  app.add_option("--threads", threads, "OpenMP threads (default 1)")->check(CLI::PositiveNumber);

  struct Paths {
    std::string data, model, inputs, grid, out;
  } paths;
  const char* modes[][2] = {
      {"fit", "train a width-N network by proximal gradient"},
      {"lasso", "convex fit over a random dictionary, then prune"},
      {"predict", "evaluate a model on a CSV of inputs"},
      {"prune", "reduce a model's support on a dataset"},
      {"transform", "k-plane transform and filtered backprojection of a grid"},
      {"greens", "Green's function constant and radial profile"},
      {"verify", "run the acceptance checks"},
  };
  for (const auto& [name, help] : modes) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->allow_extras();
    sub->add_option("--data", paths.data, "dataset CSV");
    sub->add_option("--model", paths.model, "model JSON");
    sub->add_option("--inputs", paths.inputs, "CSV of inputs");
    sub->add_option("--grid", paths.grid, "input grid (binary)");
    sub->add_option("--out", paths.out, "output directory");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  CLI::App* sub = app.get_subcommands().front();
  std::vector<std::string> overrides{"mode=" + sub->get_name()};
  const std::pair<const char*, const std::string*> path_keys[] = {
      {"io.data", &paths.data},     {"io.model", &paths.model}, {"io.inputs", &paths.inputs},
      {"io.grid", &paths.grid},     {"io.output_dir", &paths.out}};
  for (const auto& [key, value] : path_keys) {
    if (!value->empty()) overrides.push_back(std::string(key) + "=" + *value);
  }
  if (threads) overrides.push_back("threads=" + std::to_string(*threads));
  for (const auto& extra : sub->remaining()) {
    if (extra.rfind("--", 0) != 0 || extra.find('=') == std::string::npos) {
      std::cerr << R"({"error":"configuration","message":"unrecognized argument ')" << extra
                << R"('; overrides take the form --block.key=value"})" << '\n';
      return 2;
    }
    overrides.push_back(extra);
  }

  try {
    const kpn::RunConfig config =
        kpn::load_config(config_path.empty() ? std::nullopt : std::optional<std::string>(config_path), overrides);
    return kpn::run(config, std::cout);
  } catch (const kpn::Error& e) {
    std::cerr << nlohmann::json{{"error", std::string(kpn::to_string(e.code()))}, {"message", e.what()}}.dump()
              << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"error", "internal"}, {"message", e.what()}}.dump() << '\n';
    return 3;
  }
}
