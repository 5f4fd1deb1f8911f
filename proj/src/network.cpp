#include "kpn/network.hpp"

#include <cmath>

#include "kpn/error.hpp"
#include "kpn/stiefel.hpp"

namespace kpn {

Model Model::empty(const OperatorSpec& spec, ActivationAlias alias) {
  Model m;
  m.spec = spec;
  m.poly = PolyCoeffs(spec.d, spec.n_L());
  m.alias = alias;
  return m;
}

Activation Model::activation() const { return Activation{make_profile(spec), alias}; }

void Model::validate() const {
  const auto report = check_admissibility(spec);
  if (!report.ok) throw DomainError("Model: operator not admissible");
  const int d = spec.d;
  const int m = spec.m();
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const auto& a = atoms[i];
    const std::string where = "Model: atom " + std::to_string(i);
    if (a.A.rows() != m || a.A.cols() != d || a.t.size() != m) throw DomainError(where + " has wrong shape");
    if (!a.A.allFinite() || !a.t.allFinite() || !std::isfinite(a.v)) throw DomainError(where + " is not finite");
    if (stiefel_violation(a.A) > 1e-10) throw DomainError(where + " violates A A^T = I");
  }
  if (poly.dim() != d || poly.degree() > spec.n_L()) {
    throw DomainError("Model: polynomial dimension or degree inconsistent with the operator");
  }
  check_alias(make_profile(spec), alias);
}

void Dataset::validate() const {
  if (X.rows() < 1) throw DomainError("Dataset: need at least one sample");
  if (X.rows() != y.size()) throw DomainError("Dataset: X and y lengths differ");
  if (!X.allFinite() || !y.allFinite()) throw DomainError("Dataset: non-finite entries");
}

double forward(const Model& model, std::span<const double> x) {
  if (static_cast<int>(x.size()) != model.spec.d) throw DomainError("forward: input dimension mismatch");
  const Activation act = model.activation();
  const int m = model.spec.m();
  double f = model.poly.size() > 0 ? model.poly(x) : 0.0;
  std::vector<double> u(m);
  for (const auto& a : model.atoms) {
    for (int r = 0; r < m; ++r) {
      double s = -a.t[r];
      for (int c = 0; c < model.spec.d; ++c) s += a.A(r, c) * x[c];
      u[r] = s;
    }
    f += a.v * act(u);
  }
  return f;
}

Eigen::VectorXd forward(const Model& model, const Eigen::MatrixXd& X) {
  if (X.cols() != model.spec.d) throw DomainError("forward: input dimension mismatch");
  const Eigen::Index n = X.rows();
  Eigen::VectorXd out(n);
#pragma omp parallel
  {
    std::vector<double> x(model.spec.d);
#pragma omp for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) {
      for (int c = 0; c < model.spec.d; ++c) x[c] = X(i, c);
      out[i] = forward(model, x);
    }
  }
  return out;
}

bool equivalent_atoms(const Atom& a, const Atom& b, double tol) {
  if (a.A.rows() != b.A.rows() || a.A.cols() != b.A.cols()) return false;
  const Eigen::MatrixXd Ga = a.A.transpose() * a.A;
  const Eigen::MatrixXd Gb = b.A.transpose() * b.A;
  if ((Ga - Gb).cwiseAbs().maxCoeff() > tol) return false;
  const Eigen::VectorXd ta = a.A.transpose() * a.t;
  const Eigen::VectorXd tb = b.A.transpose() * b.t;
  return (ta - tb).cwiseAbs().maxCoeff() <= tol;
}

std::vector<Atom> merge_atoms(const std::vector<Atom>& atoms, double tol) {
  std::vector<Atom> merged;
  for (const auto& a : atoms) {
    bool found = false;
    for (auto& g : merged) {
      if (equivalent_atoms(g, a, tol)) {
        g.v += a.v;
        found = true;
        break;
      }
    }
    if (!found) merged.push_back(a);
  }
  return merged;
}

double l1_norm(const std::vector<Atom>& atoms) {
  double s = 0.0;
  for (const auto& a : atoms) s += std::abs(a.v);
  return s;
}

double reg_cost(const Model& model) { return l1_norm(merge_atoms(model.atoms)); }

Eigen::MatrixXd poly_matrix(int d, int n_L, const Eigen::MatrixXd& X) {
  const auto basis = enumerate_multi_indices(d, n_L);
  Eigen::MatrixXd P(X.rows(), static_cast<Eigen::Index>(basis.size()));
  std::vector<double> x(d);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (int c = 0; c < d; ++c) x[c] = X(i, c);
    for (std::size_t j = 0; j < basis.size(); ++j) P(i, static_cast<Eigen::Index>(j)) = monomial_eval(basis[j], x);
  }
  return P;
}

namespace detail {

void check_dictionary_inputs(const OperatorSpec& spec, const std::vector<Atom>& atoms,
                             const Eigen::MatrixXd& X) {
  if (X.cols() != spec.d) throw DomainError("dictionary_matrix: data dimension mismatch");
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const auto& a = atoms[i];
    if (a.A.rows() != spec.m() || a.A.cols() != spec.d || a.t.size() != spec.m()) {
      throw DomainError("dictionary_matrix: atom " + std::to_string(i) + " has wrong shape");
    }
    if (!(stiefel_violation(a.A) < 1e-8)) {
      throw DomainError("dictionary_matrix: atom " + std::to_string(i) + " violates A A^T = I");
    }
  }
}

}  // namespace detail

Dictionary dictionary_matrix(const OperatorSpec& spec, const std::vector<Atom>& atoms,
                             const Eigen::MatrixXd& X, ActivationAlias alias) {
  detail::check_dictionary_inputs(spec, atoms, X);
  const Activation act{make_profile(spec), alias};
  check_alias(act.profile, alias);
  const int m = spec.m();
  const int d = spec.d;
  Dictionary D;
  D.G.resize(X.rows(), static_cast<Eigen::Index>(atoms.size()));
  const Eigen::Index rows = X.rows();
#pragma omp parallel
  {
    std::vector<double> u(m);
#pragma omp for schedule(static)
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < atoms.size(); ++j) {
        const auto& a = atoms[j];
        for (int r = 0; r < m; ++r) {
          double s = -a.t[r];
          for (int c = 0; c < d; ++c) s += a.A(r, c) * X(i, c);
          u[r] = s;
        }
        D.G(i, static_cast<Eigen::Index>(j)) = act(u);
      }
    }
  }
  D.P = poly_matrix(d, spec.n_L(), X);
  return D;
}

nlohmann::json serialize(const Model& model) {
  nlohmann::json j;
  j["spec"] = model.spec;
  j["atoms"] = nlohmann::json::array();
  for (const auto& a : model.atoms) {
    nlohmann::json A = nlohmann::json::array();
    for (Eigen::Index r = 0; r < a.A.rows(); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index c = 0; c < a.A.cols(); ++c) row.push_back(a.A(r, c));
      A.push_back(row);
    }
    nlohmann::json t = nlohmann::json::array();
    for (Eigen::Index r = 0; r < a.t.size(); ++r) t.push_back(a.t[r]);
    j["atoms"].push_back({{"v", a.v}, {"A", A}, {"t", t}});
  }
  j["poly"] = model.poly;
  if (model.alias != ActivationAlias::none) j["activation_alias"] = to_string(model.alias);
  return j;
}

namespace {

double number_at(const nlohmann::json& j, const std::string& what) {
  if (!j.is_number()) throw SchemaError(what + " must be a number");
  return j.get<double>();
}

}  // namespace

Model deserialize(const nlohmann::json& j) {
  if (!j.is_object()) throw SchemaError("model: expected a JSON object");
  for (const char* key : {"spec", "atoms", "poly"}) {
    if (!j.contains(key)) throw SchemaError(std::string("model: missing key '") + key + "'");
  }
  Model model;
  try {
    model.spec = j.at("spec").get<OperatorSpec>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("model.spec: ") + e.what());
  }
  const int d = model.spec.d;
  const int m = model.spec.m();
  if (!j.at("atoms").is_array()) throw SchemaError("model.atoms must be an array");
  for (const auto& ja : j.at("atoms")) {
    if (!ja.is_object() || !ja.contains("v") || !ja.contains("A") || !ja.contains("t")) {
      throw SchemaError("model.atoms: each atom needs v, A and t");
    }
    Atom a;
    a.v = number_at(ja.at("v"), "atom.v");
    const auto& JA = ja.at("A");
    const auto& Jt = ja.at("t");
    if (!JA.is_array() || static_cast<int>(JA.size()) != m) throw SchemaError("atom.A must have d-k rows");
    if (!Jt.is_array() || static_cast<int>(Jt.size()) != m) throw SchemaError("atom.t must have d-k entries");
    a.A.resize(m, d);
    a.t.resize(m);
    for (int r = 0; r < m; ++r) {
      if (!JA[r].is_array() || static_cast<int>(JA[r].size()) != d) throw SchemaError("atom.A rows must have d entries");
      for (int c = 0; c < d; ++c) a.A(r, c) = number_at(JA[r][c], "atom.A entry");
      a.t[r] = number_at(Jt[r], "atom.t entry");
    }
    model.atoms.push_back(std::move(a));
  }
  try {
    model.poly = poly_from_json(j.at("poly"), d);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("model.poly: ") + e.what());
  }
  if (j.contains("activation_alias")) {
    if (!j.at("activation_alias").is_string()) throw SchemaError("activation_alias must be a string");
    model.alias = activation_alias_from_string(j.at("activation_alias").get<std::string>());
  }
  model.validate();
  return model;
}

}  // namespace kpn
