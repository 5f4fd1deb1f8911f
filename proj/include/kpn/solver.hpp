#pragma once

// Fitting: convex LASSO over a fixed dictionary with an unpenalized polynomial
// block, Caratheodory support pruning, and a proximal-gradient trainer for the
// full network with Stiefel retraction.
//
// Objective convention throughout: sum (y - f)^2 + lambda ||v||_1, no 1/M.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "kpn/network.hpp"

namespace kpn {

enum class LossKind { squared };

struct FitConfig {
  double lambda = 0.1;
  int width = 16;
  int max_iter = 2000;
  double step = 1.0;               // initial step size
  double shrink = 0.5;             // backtracking factor
  double sufficient_decrease = 1e-4;
  double tol_kkt = 1e-8;           // convex refits
  double tol_objective = 1e-13;    // relative stall threshold
  int refit_every = 50;            // exact (v, c) refit period, 0 disables
  int polish_iter = 200;           // final Levenberg-Marquardt steps, 0 disables
  int exchange_pool = 64;          // candidates per dead atom at each refit, 0 disables
  std::uint64_t seed = 0;
  LossKind loss = LossKind::squared;
  std::string init = "data";       // "data" or "range"

  /// ConfigError on invalid values.
  void validate() const;
};

void to_json(nlohmann::json& j, const FitConfig& c);
void from_json(const nlohmann::json& j, FitConfig& c);

struct TraceRow {
  int iter = 0;
  double objective = 0.0;
  double data_fit = 0.0;
  double l1 = 0.0;
  double stiefel_violation = 0.0;
  double step = 0.0;
  std::string kind;  // "init", "prox", "refit" or "polish"
};

struct Trace {
  std::vector<TraceRow> rows;

  std::string to_csv() const;
  double max_stiefel_violation() const;
  /// True when every recorded objective is <= its predecessor + slack.
  bool monotone(double slack = 1e-12) const;
};

double soft_threshold(double x, double tau);

struct LassoOptions {
  double tol_kkt = 1e-8;
  int max_sweeps = 200000;
};

struct LassoResult {
  Eigen::VectorXd v;
  Eigen::VectorXd c;
  double objective = 0.0;
  double kkt_residual = 0.0;
  int sweeps = 0;
};

/// 2 ||G^T (y - P c_LS)||_inf: the smallest lambda with v = 0 optimal.
double lambda_max(const Eigen::MatrixXd& G, const Eigen::MatrixXd& P, const Eigen::VectorXd& y);

/// Relative KKT violation of (v, c), measured in units of lambda:
/// max over active i of |2 G_i^T r - lambda sign v_i| / lambda, over inactive
/// i of (|2 G_i^T r| - lambda)_+ / lambda, and 2 ||P^T r||_inf / lambda.
double kkt_residual(const Eigen::MatrixXd& G, const Eigen::MatrixXd& P, const Eigen::VectorXd& y,
                    const Eigen::VectorXd& v, const Eigen::VectorXd& c, double lambda);

double lasso_objective(const Eigen::MatrixXd& G, const Eigen::MatrixXd& P, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& v, const Eigen::VectorXd& c, double lambda);

/// Minimizes ||y - G v - P c||^2 + lambda ||v||_1. The polynomial block is
/// eliminated by projection, v is found by cyclic coordinate descent and the
/// result is polished by an exact solve on the active set. DomainError when P
/// lacks full column rank.
LassoResult lasso(const Eigen::MatrixXd& G, const Eigen::MatrixXd& P, const Eigen::VectorXd& y,
                  double lambda, const LassoOptions& opts = {});

struct PruneResult {
  Eigen::VectorXd v;
  Eigen::VectorXd c;
  int removed = 0;
};

/// Moves (v, c) along null directions of [G_S P] (S = support of v) in the
/// l1-nonincreasing sense until a weight vanishes, while nnz(v) + q > M or the
/// active columns are numerically dependent. Predictions are kept to 1e-8.
PruneResult prune_support(const Eigen::MatrixXd& G, const Eigen::MatrixXd& P, const Eigen::VectorXd& v,
                          const Eigen::VectorXd& c, const Eigen::VectorXd& y);

struct TrainResult {
  Model model;
  Trace trace;
};

/// sum (y - f)^2 + lambda ||v||_1 of a model on a dataset.
double network_objective(const Model& model, const Dataset& data, double lambda);

/// Proximal-gradient training of a width-N network. Each accepted step
/// satisfies the sufficient-decrease test; every `refit_every` iterations the
/// weights (v, c) are replaced by the exact LASSO solution at the current
/// atoms when that lowers the objective, and atoms left at zero weight are
/// moved to the candidate plane most correlated with the residual. A final Levenberg-Marquardt phase
/// polishes the active atoms, again accepting only decreasing steps. NumericalError if the objective
/// becomes non-finite.
TrainResult train(const Dataset& data, const OperatorSpec& spec, const FitConfig& config,
                  ActivationAlias alias = ActivationAlias::none);

}  // namespace kpn
