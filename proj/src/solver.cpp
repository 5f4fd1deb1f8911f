#include "kpn/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "kpn/error.hpp"
#include "kpn/stiefel.hpp"

namespace kpn {

// ---------------------------------------------------------------- config

void FitConfig::validate() const {
  if (!(lambda > 0.0)) throw ConfigError("solver.lambda must be > 0");
  if (width < 1) throw ConfigError("solver.width must be >= 1");
  if (max_iter < 0) throw ConfigError("solver.max_iter must be >= 0");
  if (!(step > 0.0)) throw ConfigError("solver.step must be > 0");
  if (!(shrink > 0.0 && shrink < 1.0)) throw ConfigError("solver.shrink must lie in (0, 1)");
  if (!(sufficient_decrease >= 0.0 && sufficient_decrease < 1.0)) {
    throw ConfigError("solver.sufficient_decrease must lie in [0, 1)");
  }
  if (!(tol_kkt > 0.0)) throw ConfigError("solver.tol_kkt must be > 0");
  if (refit_every < 0) throw ConfigError("solver.refit_every must be >= 0");
  if (polish_iter < 0) throw ConfigError("solver.polish_iter must be >= 0");
  if (exchange_pool < 0) throw ConfigError("solver.exchange_pool must be >= 0");
  if (init != "data" && init != "range") throw ConfigError("solver.init must be 'data' or 'range'");
}

void to_json(nlohmann::json& j, const FitConfig& c) {
  j = nlohmann::json{{"lambda", c.lambda},
                     {"width", c.width},
                     {"max_iter", c.max_iter},
                     {"step", c.step},
                     {"shrink", c.shrink},
                     {"sufficient_decrease", c.sufficient_decrease},
                     {"tol_kkt", c.tol_kkt},
                     {"tol_objective", c.tol_objective},
                     {"refit_every", c.refit_every},
                     {"polish_iter", c.polish_iter},
                     {"exchange_pool", c.exchange_pool},
                     {"seed", c.seed},
                     {"loss", "squared"},
                     {"init", c.init}};
}

void from_json(const nlohmann::json& j, FitConfig& c) {
  c.lambda = j.value("lambda", c.lambda);
  c.width = j.value("width", c.width);
  c.max_iter = j.value("max_iter", c.max_iter);
  c.step = j.value("step", c.step);
  c.shrink = j.value("shrink", c.shrink);
  c.sufficient_decrease = j.value("sufficient_decrease", c.sufficient_decrease);
  c.tol_kkt = j.value("tol_kkt", c.tol_kkt);
  c.tol_objective = j.value("tol_objective", c.tol_objective);
  c.refit_every = j.value("refit_every", c.refit_every);
  c.polish_iter = j.value("polish_iter", c.polish_iter);
  c.exchange_pool = j.value("exchange_pool", c.exchange_pool);
  c.seed = j.value("seed", c.seed);
  c.init = j.value("init", c.init);
  if (j.value("loss", std::string("squared")) != "squared") throw ConfigError("solver.loss: only 'squared'");
}

std::string Trace::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "iter,kind,objective,data_fit,l1,stiefel_violation,step\n";
  for (const auto& r : rows) {
    os << r.iter << ',' << r.kind << ',' << r.objective << ',' << r.data_fit << ',' << r.l1 << ','
       << r.stiefel_violation << ',' << r.step << '\n';
  }
  return os.str();
}

double Trace::max_stiefel_violation() const {
  double m = 0.0;
  for (const auto& r : rows) m = std::max(m, r.stiefel_violation);
  return m;
}

bool Trace::monotone(double slack) const {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].objective > rows[i - 1].objective + slack) return false;
  }
  return true;
}

double soft_threshold(double x, double tau) {
  if (tau < 0.0) throw DomainError("soft_threshold: tau must be >= 0");
  if (x > tau) return x - tau;
  if (x < -tau) return x + tau;
  return 0.0;
}

// ---------------------------------------------------------------- lasso

namespace {

struct PolyProjector {
  Eigen::MatrixXd Q;  // orthonormal basis of range(P)
  Eigen::MatrixXd R;  // P = Q R
  Eigen::Index q = 0;

  explicit PolyProjector(const Eigen::MatrixXd& P) : q(P.cols()) {
    if (q == 0) return;
    if (P.rows() < q) {
      throw DomainError("data-fitting problem ill-posed over the null space: fewer samples than polynomial terms");
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(P);
    Q = qr.householderQ() * Eigen::MatrixXd::Identity(P.rows(), q);
    R = qr.matrixQR().topRows(q).triangularView<Eigen::Upper>();
    const double scale = std::max(R.diagonal().cwiseAbs().maxCoeff(), 1e-300);
    if (R.diagonal().cwiseAbs().minCoeff() <= 1e-12 * scale) {
      throw DomainError("data-fitting problem ill-posed over the null space: polynomial block is rank deficient");
    }
  }

  Eigen::MatrixXd project(const Eigen::MatrixXd& A) const {
    if (q == 0) return A;
    return A - Q * (Q.transpose() * A);
  }

  // Least-squares coefficients of r on P.
  Eigen::VectorXd solve(const Eigen::VectorXd& r) const {
    if (q == 0) return Eigen::VectorXd(0);
    return R.triangularView<Eigen::Upper>().solve(Q.transpose() * r);
  }
};

// Exact minimizer on the active set with fixed signs; false if inconsistent.
bool polish_active_set(const Eigen::MatrixXd& Gt, const Eigen::VectorXd& yt, double lambda,
                       Eigen::VectorXd& v) {
  std::vector<Eigen::Index> S;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v[i] != 0.0) S.push_back(i);
  }
  if (S.empty()) return true;
  const auto n = static_cast<Eigen::Index>(S.size());
  Eigen::MatrixXd GS(Gt.rows(), n);
  Eigen::VectorXd s(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    GS.col(j) = Gt.col(S[j]);
    s[j] = v[S[j]] > 0 ? 1.0 : -1.0;
  }
  const Eigen::MatrixXd H = GS.transpose() * GS;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return false;
  const double dmax = ldlt.vectorD().cwiseAbs().maxCoeff();
  if (ldlt.vectorD().minCoeff() <= 1e-13 * dmax) return false;
  Eigen::VectorXd vs = ldlt.solve(GS.transpose() * yt - 0.5 * lambda * s);
  // One step of iterative refinement.
  vs += ldlt.solve(GS.transpose() * yt - 0.5 * lambda * s - H * vs);
  for (Eigen::Index j = 0; j < n; ++j) {
    if (vs[j] * s[j] <= 0.0) return false;
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(v.size());
  for (Eigen::Index j = 0; j < n; ++j) out[S[j]] = vs[j];
  v = out;
  return true;
}

double reduced_kkt(const Eigen::MatrixXd& Gt, const Eigen::VectorXd& yt, const Eigen::VectorXd& v,
                   double lambda) {
  const Eigen::VectorXd g = 2.0 * Gt.transpose() * (yt - Gt * v);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v[i] != 0.0) {
      worst = std::max(worst, std::abs(g[i] - lambda * (v[i] > 0 ? 1.0 : -1.0)) / lambda);
    } else {
      worst = std::max(worst, (std::abs(g[i]) - lambda) / lambda);
    }
  }
  return worst;
}

}  // namespace

double lambda_max(const Eigen::MatrixXd& G, const Eigen::MatrixXd& P, const Eigen::VectorXd& y) {
  const PolyProjector proj(P);
  const Eigen::VectorXd r = proj.q > 0 ? Eigen::VectorXd(y - P * proj.solve(y)) : y;
  if (G.cols() == 0) return 0.0;
  return 2.0 * (G.transpose() * r).cwiseAbs().maxCoeff();
}

double kkt_residual(const Eigen::MatrixXd& G, const Eigen::MatrixXd& P, const Eigen::VectorXd& y,
                    const Eigen::VectorXd& v, const Eigen::VectorXd& c, double lambda) {
  Eigen::VectorXd r = y - G * v;
  if (P.cols() > 0) r -= P * c;
  double worst = 0.0;
  if (G.cols() > 0) {
    const Eigen::VectorXd g = 2.0 * G.transpose() * r;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (v[i] != 0.0) {
        worst = std::max(worst, std::abs(g[i] - lambda * (v[i] > 0 ? 1.0 : -1.0)) / lambda);
      } else {
        worst = std::max(worst, std::max(0.0, std::abs(g[i]) - lambda) / lambda);
      }
    }
  }
  if (P.cols() > 0) worst = std::max(worst, 2.0 * (P.transpose() * r).cwiseAbs().maxCoeff() / lambda);
  return worst;
}

double lasso_objective(const Eigen::MatrixXd& G, const Eigen::MatrixXd& P, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& v, const Eigen::VectorXd& c, double lambda) {
  Eigen::VectorXd r = y;
  if (G.cols() > 0) r -= G * v;
  if (P.cols() > 0) r -= P * c;
  double l1 = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) l1 += std::abs(v[i]);
  return r.squaredNorm() + lambda * l1;
}

LassoResult lasso(const Eigen::MatrixXd& G, const Eigen::MatrixXd& P, const Eigen::VectorXd& y,
                  double lambda, const LassoOptions& opts) {
  if (!(lambda > 0.0)) throw DomainError("lasso: lambda must be > 0");
  if (G.rows() != y.size() || (P.cols() > 0 && P.rows() != y.size())) {
    throw DomainError("lasso: row counts of G, P and y differ");
  }
  if (!G.allFinite() || !P.allFinite() || !y.allFinite()) throw DomainError("lasso: non-finite input");
  const PolyProjector proj(P);
  const Eigen::MatrixXd Gt = proj.project(G);
  const Eigen::VectorXd yt = proj.project(y);
  const Eigen::Index N = G.cols();

  Eigen::VectorXd a(N);
  for (Eigen::Index i = 0; i < N; ++i) a[i] = Gt.col(i).squaredNorm();
  const double amax = N > 0 ? a.maxCoeff() : 0.0;

  LassoResult res;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(N);
  Eigen::VectorXd r = yt;
  for (int sweep = 0; sweep < opts.max_sweeps && N > 0; ++sweep) {
    double max_change = 0.0;
    for (Eigen::Index i = 0; i < N; ++i) {
      if (a[i] <= 1e-28 * std::max(amax, 1e-300)) continue;
      const double z = Gt.col(i).dot(r) + a[i] * v[i];
      const double vi = soft_threshold(z, 0.5 * lambda) / a[i];
      const double delta = vi - v[i];
      if (delta != 0.0) {
        r -= delta * Gt.col(i);
        v[i] = vi;
        max_change = std::max(max_change, std::abs(delta) * std::sqrt(a[i]));
      }
    }
    res.sweeps = sweep + 1;
    // Recompute the residual occasionally to shed accumulated rounding.
    if (sweep % 50 == 49) r = yt - Gt * v;
    if (max_change <= 1e-3 * opts.tol_kkt * std::max(lambda, 1e-300) || sweep % 20 == 19) {
      // Dependent active columns (e.g. neighbouring knots) make the polish
      // singular; reduce to an independent support with the same fit first.
      Eigen::VectorXd trial = prune_support(Gt, Eigen::MatrixXd(yt.size(), 0), v, Eigen::VectorXd(0), yt).v;
      if (polish_active_set(Gt, yt, lambda, trial) && reduced_kkt(Gt, yt, trial, lambda) <= opts.tol_kkt) {
        v = trial;
        break;
      }
      if (max_change == 0.0 && reduced_kkt(Gt, yt, v, lambda) <= opts.tol_kkt) break;
    }
  }
  res.v = v;
  res.c = proj.q > 0 ? proj.solve(y - G * v) : Eigen::VectorXd(0);
  res.objective = lasso_objective(G, P, y, res.v, res.c, lambda);
  res.kkt_residual = kkt_residual(G, P, y, res.v, res.c, lambda);
  return res;
}

// ---------------------------------------------------------------- pruning

PruneResult prune_support(const Eigen::MatrixXd& G, const Eigen::MatrixXd& P, const Eigen::VectorXd& v,
                          const Eigen::VectorXd& c, const Eigen::VectorXd& y) {
  const Eigen::Index M = G.rows();
  const Eigen::Index q = P.cols();
  if (v.size() != G.cols() || c.size() != q || (q > 0 && P.rows() != M) || y.size() != M) {
    throw DomainError("prune_support: inconsistent shapes");
  }
  PruneResult out{v, c, 0};
  auto predictions = [&](const Eigen::VectorXd& vv, const Eigen::VectorXd& cc) {
    Eigen::VectorXd p = G * vv;
    if (q > 0) p += P * cc;
    return p;
  };
  const Eigen::VectorXd target = predictions(v, c);
  const double scale = std::max(1.0, target.cwiseAbs().maxCoeff());

  while (true) {
    std::vector<Eigen::Index> S;
    for (Eigen::Index i = 0; i < out.v.size(); ++i) {
      if (out.v[i] != 0.0) S.push_back(i);
    }
    const auto nS = static_cast<Eigen::Index>(S.size());
    if (nS == 0) break;
    Eigen::MatrixXd B(M, nS + q);
    for (Eigen::Index j = 0; j < nS; ++j) B.col(j) = G.col(S[j]);
    if (q > 0) B.rightCols(q) = P;
    const bool forced = nS + q > M;

    Eigen::VectorXd z;
    if (forced) {
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(B, Eigen::ComputeFullV);
      z = svd.matrixV().col(nS + q - 1);
    } else {
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(B, Eigen::ComputeFullV);
      const auto& sv = svd.singularValues();
      if (sv.size() == 0 || sv[sv.size() - 1] > 1e-12 * std::max(sv[0], 1e-300)) break;
      z = svd.matrixV().col(nS + q - 1);
    }
    Eigen::VectorXd zv = z.head(nS);
    Eigen::VectorXd zc = z.tail(q);
    if (zv.cwiseAbs().maxCoeff() <= 1e-14) {
      if (forced) throw NumericalError("prune_support: null direction does not involve the atom weights");
      break;
    }
    double slope = 0.0;
    for (Eigen::Index j = 0; j < nS; ++j) slope += (out.v[S[j]] > 0 ? 1.0 : -1.0) * zv[j];
    if (slope > 0.0) {
      zv = -zv;
      zc = -zc;
    }
    double theta = std::numeric_limits<double>::infinity();
    Eigen::Index hit = -1;
    for (Eigen::Index j = 0; j < nS; ++j) {
      const double vj = out.v[S[j]];
      if (vj * zv[j] < 0.0) {
        const double th = -vj / zv[j];
        if (th < theta) {
          theta = th;
          hit = j;
        }
      }
    }
    if (hit < 0) throw NumericalError("prune_support: no l1-nonincreasing direction found");
    Eigen::VectorXd nv = out.v;
    Eigen::VectorXd nc = out.c;
    for (Eigen::Index j = 0; j < nS; ++j) nv[S[j]] += theta * zv[j];
    nv[S[hit]] = 0.0;
    if (q > 0) nc += theta * zc;
    const double drift = (predictions(nv, nc) - target).cwiseAbs().maxCoeff();
    if (drift > 1e-9 * scale) {
      if (forced) throw NumericalError("prune_support: predictions drifted while pruning");
      break;
    }
    out.v = nv;
    out.c = nc;
    ++out.removed;
  }
  return out;
}

// ---------------------------------------------------------------- trainer

namespace {

struct Params {
  std::vector<Eigen::MatrixXd> A;
  std::vector<Eigen::VectorXd> t;
  Eigen::VectorXd v;
  Eigen::VectorXd c;
};

struct Evaluation {
  double data_fit = 0.0;
  double l1 = 0.0;
  double objective = 0.0;
  Eigen::VectorXd residual;
};

class Problem {
 public:
  Problem(const Dataset& data, const OperatorSpec& spec, ActivationAlias alias, double lambda)
      : data_(data), spec_(spec), act_{make_profile(spec), alias}, lambda_(lambda) {
    P_ = poly_matrix(spec.d, spec.n_L(), data.X);
  }

  const Eigen::MatrixXd& P() const { return P_; }

  Evaluation evaluate(const Params& p) const {
    const int M = data_.size();
    const int m = spec_.m();
    Evaluation e;
    e.residual = data_.y;
    if (P_.cols() > 0) e.residual -= P_ * p.c;
    std::vector<double> u(m);
    for (int i = 0; i < M; ++i) {
      double f = 0.0;
      for (std::size_t n = 0; n < p.A.size(); ++n) {
        if (p.v[n] == 0.0) continue;
        project(p, n, i, u);
        f += p.v[n] * act_(u);
      }
      e.residual[i] -= f;
    }
    e.data_fit = e.residual.squaredNorm();
    for (Eigen::Index n = 0; n < p.v.size(); ++n) e.l1 += std::abs(p.v[n]);
    e.objective = e.data_fit + lambda_ * e.l1;
    return e;
  }

  // Gradient of the data-fit term.
  Params gradient(const Params& p, const Eigen::VectorXd& r) const {
    const int M = data_.size();
    const int m = spec_.m();
    const int d = spec_.d;
    Params g;
    g.v = Eigen::VectorXd::Zero(p.v.size());
    g.c = P_.cols() > 0 ? Eigen::VectorXd(-2.0 * P_.transpose() * r) : Eigen::VectorXd(0);
    std::vector<double> u(m), du(m);
    for (std::size_t n = 0; n < p.A.size(); ++n) {
      Eigen::MatrixXd gA = Eigen::MatrixXd::Zero(m, d);
      Eigen::VectorXd gt = Eigen::VectorXd::Zero(m);
      double gv = 0.0;
      for (int i = 0; i < M; ++i) {
        project(p, n, i, u);
        gv += -2.0 * r[i] * act_(u);
        if (p.v[n] != 0.0) {
          act_.gradient(u, du);
          for (int a = 0; a < m; ++a) {
            const double w = -2.0 * r[i] * p.v[n] * du[a];
            gt[a] -= w;
            for (int b = 0; b < d; ++b) gA(a, b) += w * data_.X(i, b);
          }
        }
      }
      g.A.push_back(gA);
      g.t.push_back(gt);
      g.v[static_cast<Eigen::Index>(n)] = gv;
    }
    return g;
  }

  // d f / d(A_n, t_n, v_n) for the atoms in `active`, then d f / d c.
  Eigen::MatrixXd jacobian(const Params& p, const std::vector<std::size_t>& active) const {
    const int M = data_.size();
    const int m = spec_.m();
    const int d = spec_.d;
    const Eigen::Index per = m * d + m + 1;
    Eigen::MatrixXd J(M, per * static_cast<Eigen::Index>(active.size()) + P_.cols());
    std::vector<double> u(m), du(m);
    for (std::size_t q = 0; q < active.size(); ++q) {
      const std::size_t n = active[q];
      const double vn = p.v[static_cast<Eigen::Index>(n)];
      const Eigen::Index base = per * static_cast<Eigen::Index>(q);
      for (int i = 0; i < M; ++i) {
        project(p, n, i, u);
        act_.gradient(u, du);
        for (int a = 0; a < m; ++a) {
          for (int b = 0; b < d; ++b) J(i, base + a * d + b) = vn * du[a] * data_.X(i, b);
          J(i, base + m * d + a) = -vn * du[a];
        }
        J(i, base + m * d + m) = act_(u);
      }
    }
    if (P_.cols() > 0) J.rightCols(P_.cols()) = P_;
    return J;
  }

  std::vector<Atom> atoms(const Params& p) const {
    std::vector<Atom> out;
    for (std::size_t n = 0; n < p.A.size(); ++n) out.push_back(Atom{p.v[static_cast<Eigen::Index>(n)], p.A[n], p.t[n]});
    return out;
  }

 private:
  void project(const Params& p, std::size_t n, int i, std::vector<double>& u) const {
    const auto& A = p.A[n];
    for (int a = 0; a < A.rows(); ++a) {
      double s = -p.t[n][a];
      for (int b = 0; b < A.cols(); ++b) s += A(a, b) * data_.X(i, b);
      u[a] = s;
    }
  }

  const Dataset& data_;
  OperatorSpec spec_;
  Activation act_;
  double lambda_;
  Eigen::MatrixXd P_;
};

double max_violation(const Params& p) {
  double m = 0.0;
  for (const auto& A : p.A) m = std::max(m, stiefel_violation(A));
  return m;
}

double squared_distance(const Params& a, const Params& b) {
  double s = (a.v - b.v).squaredNorm() + (a.c - b.c).squaredNorm();
  for (std::size_t n = 0; n < a.A.size(); ++n) {
    s += (a.A[n] - b.A[n]).squaredNorm() + (a.t[n] - b.t[n]).squaredNorm();
  }
  return s;
}

Params initialize(const Dataset& data, const OperatorSpec& spec, const FitConfig& cfg, const Eigen::MatrixXd& P) {
  const int m = spec.m();
  const int d = spec.d;
  const int M = data.size();
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Params p;
  std::vector<int> order;
  for (int n = 0; n < cfg.width; ++n) {
    const std::uint64_t s = rng();
    Eigen::MatrixXd A = random_stiefel(m, d, s);
    Eigen::VectorXd t(m);
    if (cfg.init == "data") {
      // Plane through a data point; points are drawn in shuffled passes so
      // that every point carries an atom once width >= M.
      if (order.empty()) {
        order.resize(M);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
      }
      t = A * data.X.row(order.back()).transpose();
      order.pop_back();
    } else {
      const Eigen::MatrixXd proj = A * data.X.transpose();
      for (int a = 0; a < m; ++a) {
        const double lo = proj.row(a).minCoeff();
        const double hi = proj.row(a).maxCoeff();
        t[a] = lo + (hi - lo) * unit(rng);
      }
    }
    p.A.push_back(A);
    p.t.push_back(t);
  }
  p.v = Eigen::VectorXd::Zero(cfg.width);
  if (P.cols() > 0) {
    p.c = P.colPivHouseholderQr().solve(data.y);
  } else {
    p.c = Eigen::VectorXd(0);
  }
  return p;
}

}  // namespace

double network_objective(const Model& model, const Dataset& data, double lambda) {
  const Eigen::VectorXd f = forward(model, data.X);
  return (data.y - f).squaredNorm() + lambda * l1_norm(model.atoms);
}

TrainResult train(const Dataset& data, const OperatorSpec& spec, const FitConfig& config, ActivationAlias alias) {
  config.validate();
  data.validate();
  if (data.dim() != spec.d) throw DomainError("train: dataset dimension does not match the operator");
  if (!check_admissibility(spec).ok) throw DomainError("train: operator is not admissible");
  check_alias(make_profile(spec), alias);

  const double lambda = config.lambda;
  const Problem prob(data, spec, alias, lambda);
  // Checks the polynomial block before any work.
  (void)lambda_max(Eigen::MatrixXd(data.size(), 0), prob.P(), data.y);

  Params cur = initialize(data, spec, config, prob.P());
  Evaluation ev = prob.evaluate(cur);
  TrainResult result;
  auto record = [&](int iter, double step, const char* kind) {
    if (!std::isfinite(ev.objective)) {
      throw NumericalError("train: non-finite objective at iteration " + std::to_string(iter) +
                           "; trace so far:\n" + result.trace.to_csv());
    }
    result.trace.rows.push_back({iter, ev.objective, ev.data_fit, ev.l1, max_violation(cur), step, kind});
  };
  record(0, 0.0, "init");

  // Zero-weight atoms are moved to the best of a random pool of planes,
  // scored by |2 g^T r|; the objective is unchanged by the move.
  std::mt19937_64 pool_rng(config.seed + 0x9E3779B97F4A7C15ULL);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto exchange_dead_atoms = [&]() {
    if (config.exchange_pool <= 0) return;
    const int m = spec.m();
    const Activation act{make_profile(spec), alias};
    std::vector<double> u(m);
    for (std::size_t n = 0; n < cur.A.size(); ++n) {
      if (cur.v[static_cast<Eigen::Index>(n)] != 0.0) continue;
      double best = lambda;
      for (int q = 0; q < config.exchange_pool; ++q) {
        const Eigen::MatrixXd A = random_stiefel(m, spec.d, pool_rng());
        const Eigen::MatrixXd proj = A * data.X.transpose();
        Eigen::VectorXd t(m);
        for (int a = 0; a < m; ++a) {
          const double lo = proj.row(a).minCoeff();
          const double hi = proj.row(a).maxCoeff();
          t[a] = lo + (hi - lo) * unit(pool_rng);
        }
        double score = 0.0;
        for (int i = 0; i < data.size(); ++i) {
          for (int a = 0; a < m; ++a) u[a] = proj(a, i) - t[a];
          score += act(u) * ev.residual[i];
        }
        score = 2.0 * std::abs(score);
        if (score > best) {
          best = score;
          cur.A[n] = A;
          cur.t[n] = t;
        }
      }
    }
  };

  auto refit = [&](int iter) {
    Model tmp = Model::empty(spec, alias);
    tmp.atoms = prob.atoms(cur);
    const Dictionary D = dictionary_matrix(spec, tmp.atoms, data.X, alias);
    const LassoResult lr = lasso(D.G, D.P, data.y, lambda, LassoOptions{config.tol_kkt, 200000});
    Params trial = cur;
    trial.v = lr.v;
    trial.c = lr.c;
    const Evaluation te = prob.evaluate(trial);
    if (te.objective < ev.objective) {
      cur = std::move(trial);
      ev = te;
      record(iter, 0.0, "refit");
    }
    exchange_dead_atoms();
  };

  double step = config.step;
  int stall = 0;
  for (int iter = 1; iter <= config.max_iter; ++iter) {
    if (config.refit_every > 0 && (iter - 1) % config.refit_every == 0) refit(iter);

    const Params g = prob.gradient(cur, ev.residual);
    bool accepted = false;
    while (step > 1e-18) {
      Params trial;
      for (std::size_t n = 0; n < cur.A.size(); ++n) {
        trial.A.push_back(stiefel_project(cur.A[n] - step * g.A[n], config.seed + n));
        trial.t.push_back(cur.t[n] - step * g.t[n]);
      }
      trial.v.resize(cur.v.size());
      for (Eigen::Index n = 0; n < cur.v.size(); ++n) {
        trial.v[n] = soft_threshold(cur.v[n] - step * g.v[n], step * lambda);
      }
      trial.c = cur.c - step * g.c;
      const Evaluation te = prob.evaluate(trial);
      const double dist2 = squared_distance(trial, cur);
      if (std::isfinite(te.objective) &&
          te.objective <= ev.objective - config.sufficient_decrease / step * dist2 && dist2 > 0.0) {
        const double rel = (ev.objective - te.objective) / std::max(std::abs(ev.objective), 1e-300);
        stall = rel < config.tol_objective ? stall + 1 : 0;
        cur = std::move(trial);
        ev = te;
        accepted = true;
        break;
      }
      step *= config.shrink;
    }
    if (!accepted) {
      if (config.refit_every > 0) refit(iter);
      break;
    }
    record(iter, step, "prox");
    step = std::min(step / config.shrink, 1e6);
    if (stall >= 20) {
      if (config.refit_every > 0) refit(iter);
      break;
    }
  }
  if (config.refit_every > 0 && result.trace.rows.back().kind != "refit") refit(config.max_iter + 1);

  // Levenberg-Marquardt on the active atoms with the signs of v frozen in the
  // model of the l1 term; steps are kept only if the true objective drops.
  double mu = 1e-3;
  for (int it = 0; it < config.polish_iter; ++it) {
    std::vector<std::size_t> active;
    for (std::size_t n = 0; n < cur.A.size(); ++n) {
      if (cur.v[static_cast<Eigen::Index>(n)] != 0.0) active.push_back(n);
    }
    const Eigen::MatrixXd J = prob.jacobian(cur, active);
    const int m = spec.m();
    const Eigen::Index per = m * spec.d + m + 1;
    Eigen::VectorXd rhs = 2.0 * J.transpose() * ev.residual;
    for (std::size_t q = 0; q < active.size(); ++q) {
      const double vn = cur.v[static_cast<Eigen::Index>(active[q])];
      rhs[per * static_cast<Eigen::Index>(q) + per - 1] -= lambda * (vn > 0.0 ? 1.0 : -1.0);
    }
    const Eigen::MatrixXd H = 2.0 * J.transpose() * J;
    const double scale = std::max(H.diagonal().maxCoeff(), 1e-300);
    bool improved = false;
    while (mu < 1e8) {
      Eigen::MatrixXd Hm = H;
      Hm.diagonal().array() += mu * scale;
      const Eigen::VectorXd delta = Hm.ldlt().solve(rhs);
      Params trial = cur;
      for (std::size_t q = 0; q < active.size(); ++q) {
        const std::size_t n = active[q];
        const Eigen::Index base = per * static_cast<Eigen::Index>(q);
        Eigen::MatrixXd A = cur.A[n];
        for (int a = 0; a < m; ++a) {
          for (int b = 0; b < spec.d; ++b) A(a, b) += delta[base + a * spec.d + b];
          trial.t[n][a] += delta[base + m * spec.d + a];
        }
        trial.A[n] = stiefel_project(A, config.seed + n);
        trial.v[static_cast<Eigen::Index>(n)] += delta[base + per - 1];
      }
      if (trial.c.size() > 0) trial.c += delta.tail(trial.c.size());
      const Evaluation te = prob.evaluate(trial);
      if (std::isfinite(te.objective) && te.objective < ev.objective) {
        improved = (ev.objective - te.objective) > config.tol_objective * std::abs(ev.objective);
        cur = std::move(trial);
        ev = te;
        record(config.max_iter + 2 + it, mu, "polish");
        mu = std::max(mu / 3.0, 1e-12);
        break;
      }
      mu *= 4.0;
    }
    if (!improved) break;
  }
  if (config.polish_iter > 0 && config.refit_every > 0) refit(config.max_iter + 2 + config.polish_iter);

  Model model = Model::empty(spec, alias);
  for (const auto& a : prob.atoms(cur)) {
    if (a.v != 0.0) model.atoms.push_back(a);
  }
  model.poly = PolyCoeffs(spec.d, spec.n_L(), cur.c);
  result.model = std::move(model);
  return result;
}

}  // namespace kpn
