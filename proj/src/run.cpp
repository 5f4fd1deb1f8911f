#include "kpn/run.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>

#include "kpn/error.hpp"
#include "kpn/greens.hpp"
#include "kpn/io.hpp"
#include "kpn/kplane.hpp"
#include "kpn/oracles.hpp"
#include "kpn/parallel.hpp"
#include "kpn/solver.hpp"
#include "kpn/stiefel.hpp"
#include "kpn/verify.hpp"

namespace kpn {

namespace {

std::string out_path(const RunConfig& c, const std::string& name) {
  return (std::filesystem::path(c.io.output_dir) / name).string();
}

Model model_from_weights(const OperatorSpec& spec, ActivationAlias alias, const std::vector<Atom>& atoms,
                         const Eigen::VectorXd& v, const Eigen::VectorXd& c) {
  Model model = Model::empty(spec, alias);
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v[i] != 0.0) model.atoms.push_back({v[i], atoms[i].A, atoms[i].t});
  }
  model.poly = PolyCoeffs(spec.d, spec.n_L(), c);
  return model;
}

void write_fit_artifacts(const RunConfig& cfg, const Model& model, const Trace& trace, const Dataset& data,
                         std::ostream& log) {
  const nlohmann::json metrics = model_metrics(model, data, cfg.solver.lambda);
  write_json(out_path(cfg, "model.json"), serialize(model));
  write_text(out_path(cfg, "trace.csv"), trace.to_csv());
  write_json(out_path(cfg, "metrics.json"), metrics);
  log << metrics.dump() << '\n';
}

Dataset load_dataset(const RunConfig& cfg) {
  Dataset ds = ingest_csv(cfg.io.data);
  if (ds.dim() != cfg.op.d) {
    throw ConfigError("dataset has " + std::to_string(ds.dim()) + " feature columns but operator.d = " +
                      std::to_string(cfg.op.d));
  }
  return ds;
}

int run_fit(const RunConfig& cfg, std::ostream& log) {
  const Dataset ds = load_dataset(cfg);
  const TrainResult tr = train(ds, cfg.op, cfg.solver, cfg.alias);
  write_fit_artifacts(cfg, tr.model, tr.trace, ds, log);
  return 0;
}

int run_lasso(const RunConfig& cfg, std::ostream& log) {
  const Dataset ds = load_dataset(cfg);
  const auto atoms = random_dictionary(cfg.op, ds, cfg.lasso.atoms, derive_seed(cfg.solver.seed, "dictionary"));
  const Dictionary D = dictionary_matrix(cfg.op, atoms, ds.X, cfg.alias);
  const LassoResult lr = lasso(D.G, D.P, ds.y, cfg.solver.lambda, LassoOptions{cfg.solver.tol_kkt, 200000});
  Eigen::VectorXd v = lr.v;
  Eigen::VectorXd c = lr.c;
  Trace trace;
  auto add_row = [&](int iter, const char* kind) {
    Eigen::VectorXd r = ds.y - D.G * v - D.P * c;
    const double l1 = v.lpNorm<1>();
    trace.rows.push_back({iter, r.squaredNorm() + cfg.solver.lambda * l1, r.squaredNorm(), l1, 0.0, 0.0, kind});
  };
  add_row(lr.sweeps, "lasso");
  if (cfg.lasso.prune) {
    const PruneResult pr = prune_support(D.G, D.P, v, c, ds.y);
    v = pr.v;
    c = pr.c;
    add_row(lr.sweeps, "prune");
  }
  write_fit_artifacts(cfg, model_from_weights(cfg.op, cfg.alias, atoms, v, c), trace, ds, log);
  return 0;
}

int run_predict(const RunConfig& cfg, std::ostream& log) {
  const Model model = deserialize(read_json(cfg.io.model));
  const NumericTable table = read_csv(cfg.io.inputs);
  const int d = model.spec.d;
  const auto cols = table.values.cols();
  if (cols != d && cols != d + 1) {
    throw ConfigError("inputs have " + std::to_string(cols) + " columns; model expects " + std::to_string(d) +
                      " (optionally followed by a target column)");
  }
  const Eigen::VectorXd f = forward(model, table.values.leftCols(d));
  write_csv(out_path(cfg, "predictions.csv"), {"prediction"}, f);
  log << "wrote " << f.size() << " predictions\n";
  return 0;
}

int run_prune(const RunConfig& cfg, std::ostream& log) {
  const Model model = deserialize(read_json(cfg.io.model));
  const Dataset ds = load_dataset(cfg);
  const Dictionary D = dictionary_matrix(model.spec, model.atoms, ds.X, model.alias);
  Eigen::VectorXd v(static_cast<Eigen::Index>(model.atoms.size()));
  for (std::size_t i = 0; i < model.atoms.size(); ++i) v[static_cast<Eigen::Index>(i)] = model.atoms[i].v;
  const PruneResult pr = prune_support(D.G, D.P, v, model.poly.coeffs(), ds.y);
  const Model pruned = model_from_weights(model.spec, model.alias, model.atoms, pr.v, pr.c);
  nlohmann::json metrics = model_metrics(pruned, ds, cfg.solver.lambda);
  metrics["removed"] = pr.removed;
  write_json(out_path(cfg, "model.json"), serialize(pruned));
  write_json(out_path(cfg, "metrics.json"), metrics);
  log << metrics.dump() << '\n';
  return 0;
}

int run_transform(const RunConfig& cfg, std::ostream& log) {
  GridFunction phi;
  if (cfg.io.grid.empty()) {
    phi = GridFunction::sample(uniform_axes(cfg.op.d, cfg.kplane.grid_points, cfg.kplane.extent),
                               [](std::span<const double> x) {
                                 double r2 = 0.0;
                                 for (std::size_t a = 0; a < x.size(); ++a) {
                                   const double c = a == 0 ? 1.0 : (a == 1 ? 0.3 : 0.0);
                                   r2 += (x[a] - c) * (x[a] - c);
                                 }
                                 return std::exp(-0.5 * r2);
                               });
  } else {
    phi = read_grid(cfg.io.grid);
    if (phi.dim() != cfg.op.d) throw ConfigError("grid dimension does not match operator.d");
  }
  const DirectionDesign design = DirectionDesign::standard(cfg.op.d, cfg.op.k, cfg.kplane.directions);
  const PlaneFunction R = kplane_transform(phi, design, default_t_axes(phi.axes(), cfg.op.m()));
  write_plane(out_path(cfg, "plane.bin"), R);
  nlohmann::json metrics{{"directions", design.size()}, {"warnings", R.warnings.messages}};
  if (cfg.kplane.filter) {
    TransformWarnings w;
    const GridFunction back = backproject(filter_K(R, cfg.op, cfg.kplane.pad), phi.axes(), &w);
    write_grid(out_path(cfg, "fbp.bin"), back);
    std::vector<double> diff(phi.size());
    for (std::size_t i = 0; i < phi.size(); ++i) diff[i] = back[i] - phi[i];
    const double res = GridFunction(phi.axes(), diff).max_abs_central(0.5) / std::max(phi.max_abs(), 1e-300);
    metrics["fbp_residual"] = res;
    for (const auto& m : w.messages) metrics["warnings"].push_back(m);
  }
  write_json(out_path(cfg, "metrics.json"), metrics);
  log << metrics.dump() << '\n';
  return 0;
}

int run_greens(const RunConfig& cfg, std::ostream& log) {
  const GreensProfile p = make_profile(cfg.op);
  nlohmann::json info{{"alpha", p.alpha},
                      {"m", p.m},
                      {"branch", to_string(p.branch)},
                      {"constant", p.constant},
                      {"m_prime", p.m_prime},
                      {"weak_identity_residual", weak_identity_residual_default(p)}};
  Eigen::MatrixXd profile(501, 2);
  for (int i = 0; i <= 500; ++i) {
    const double r = 0.01 * i;
    profile(i, 0) = r;
    profile(i, 1) = rho_radial(p, r);
  }
  write_csv(out_path(cfg, "rho_profile.csv"), {"r", "rho"}, profile);
  write_json(out_path(cfg, "greens.json"), info);
  log << info.dump() << '\n';
  return 0;
}

int run_verify(const RunConfig& cfg, std::ostream& log) {
  const VerifyReport rep = run_acceptance();
  for (const auto& c : rep.checks) log << format_line(c) << '\n';
  write_json(out_path(cfg, "report.json"), rep.to_json());
  for (const auto& plot : rep.plots) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(plot.rows.size()), static_cast<Eigen::Index>(plot.header.size()));
    for (std::size_t i = 0; i < plot.rows.size(); ++i) {
      for (std::size_t j = 0; j < plot.header.size(); ++j) {
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = plot.rows[i][j];
      }
    }
    write_csv(out_path(cfg, plot.name + ".csv"), plot.header, m);
  }
  return rep.all_pass() ? 0 : 1;
}

}  // namespace

nlohmann::json model_metrics(const Model& model, const Dataset& data, double lambda) {
  const Dictionary D = dictionary_matrix(model.spec, model.atoms, data.X, model.alias);
  Eigen::VectorXd v(static_cast<Eigen::Index>(model.atoms.size()));
  for (std::size_t i = 0; i < model.atoms.size(); ++i) v[static_cast<Eigen::Index>(i)] = model.atoms[i].v;
  const SparsityCertificate cert = sparsity_certificate(model, data.size());
  return {{"objective", network_objective(model, data, lambda)},
          {"reg_cost", reg_cost(model)},
          {"nnz", cert.nnz},
          {"sparsity_bound", cert.bound},
          {"kkt_residual", kkt_residual(D.G, D.P, data.y, v, model.poly.coeffs(), lambda)}};
}

std::vector<Atom> random_dictionary(const OperatorSpec& spec, const Dataset& data, int size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  std::vector<int> order;
  std::vector<Atom> atoms;
  for (int n = 0; n < size; ++n) {
    const Eigen::MatrixXd A = random_stiefel(spec.m(), spec.d, rng());
    if (order.empty()) {
      order.resize(data.size());
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), rng);
    }
    const Eigen::MatrixXd proj = A * data.X.transpose();
    Eigen::VectorXd t = proj.col(order.back());
    order.pop_back();
    for (Eigen::Index a = 0; a < t.size(); ++a) {
      const double mean = proj.row(a).mean();
      const double spread = std::sqrt((proj.row(a).array() - mean).square().mean());
      t[a] += 0.5 * spread * n01(rng);
    }
    atoms.push_back({0.0, A, t});
  }
  return atoms;
}

int run(const RunConfig& config, std::ostream& log) {
  config.validate();
  parallel::set_threads(config.threads);
  std::error_code ec;
  std::filesystem::create_directories(config.io.output_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + config.io.output_dir + "': " + ec.message());
  switch (config.mode) {
    case Mode::fit:
      return run_fit(config, log);
    case Mode::lasso:
      return run_lasso(config, log);
    case Mode::predict:
      return run_predict(config, log);
    case Mode::prune:
      return run_prune(config, log);
    case Mode::transform:
      return run_transform(config, log);
    case Mode::greens:
      return run_greens(config, log);
    case Mode::verify:
      return run_verify(config, log);
  }
  return 1;
}

}  // namespace kpn
