#include "kpn/operator.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "kpn/error.hpp"

namespace kpn {

int OperatorSpec::n_L() const {
  return static_cast<int>(std::ceil(alpha)) - 1;
}

AdmissibilityReport check_admissibility(const OperatorSpec& spec) {
  AdmissibilityReport report;
  report.n_L = spec.n_L();
  report.gamma_L = spec.gamma_L();
  report.gamma_L_prime = spec.gamma_L_prime();
  report.ok = true;

  auto fail = [&](const std::string& msg) {
    report.ok = false;
    report.messages.push_back(msg);
  };

  if (spec.d < 1) fail("ambient dimension d must be >= 1");
  if (spec.k < 0 || spec.k >= spec.d) fail("plane index k must satisfy 0 <= k < d");
  if (!(spec.alpha > 0.0) || !std::isfinite(spec.alpha)) {
    fail("alpha must be a finite positive real");
    return report;
  }
  if (!report.ok) return report;

  const int m = spec.m();
  if (!(spec.alpha > m)) {
    std::ostringstream os;
    os << "growth condition violated: need gamma_L' = alpha > d - k = " << m << " (alpha = "
       << spec.alpha << ")";
    fail(os.str());
    std::ostringstream os2;
    os2 << "zero-cancellation condition violated: need gamma_L = alpha > d - k = " << m;
    fail(os2.str());
  }
  if (!(report.gamma_L > report.n_L && report.gamma_L <= report.n_L + 1)) {
    fail("order of the zero at the origin must lie in (n_L, n_L + 1]");
  }
  return report;
}

double radial_symbol(const OperatorSpec& spec, double omega) {
  if (omega < 0.0) throw DomainError("radial_symbol: omega must be nonnegative");
  if (omega == 0.0) return 0.0;
  return std::pow(omega, spec.alpha);
}

double sphere_area(int m) {
  if (m <= 0) throw DomainError("sphere_area: m must be >= 1, got " + std::to_string(m));
  return 2.0 * std::pow(std::numbers::pi, 0.5 * m) / std::tgamma(0.5 * m);
}

double backprojection_constant(int d, int k) {
  if (k < 0 || k >= d) {
    throw DomainError("backprojection_constant: need 0 <= k < d (d=" + std::to_string(d) +
                      ", k=" + std::to_string(k) + ")");
  }
  if (k == 0) return 1.0;
  double denom = sphere_area(d - k);
  for (int n = k; n <= d - 1; ++n) denom *= sphere_area(n);
  return std::pow(2.0 * std::numbers::pi, -k) * sphere_area(k) / denom;
}

double stiefel_volume(int d, int k) {
  if (k < 0 || k >= d) throw DomainError("stiefel_volume: need 0 <= k < d");
  if (k == 0) return 1.0;
  double vol = 1.0;
  for (int n = k + 1; n <= d; ++n) vol *= sphere_area(n);
  return vol;
}

long null_space_dim(int d, int n_L) {
  if (d < 1) throw DomainError("null_space_dim: d must be >= 1");
  if (n_L < 0) return 0;
  // C(n_L + d, d), computed incrementally to stay exact.
  long result = 1;
  for (int i = 1; i <= d; ++i) result = result * (n_L + i) / i;
  return result;
}

std::string to_string(OperatorFamily family) {
  switch (family) {
    case OperatorFamily::fractional_laplacian: return "fractional_laplacian";
  }
  return "unknown";
}

OperatorFamily operator_family_from_string(const std::string& name) {
  if (name == "fractional_laplacian") return OperatorFamily::fractional_laplacian;
  throw SchemaError("unknown operator family '" + name + "'");
}

void to_json(nlohmann::json& j, const OperatorSpec& spec) {
  j = nlohmann::json{{"family", to_string(spec.family)},
                     {"alpha", spec.alpha},
                     {"d", spec.d},
                     {"k", spec.k}};
}

void from_json(const nlohmann::json& j, OperatorSpec& spec) {
  if (!j.is_object()) throw SchemaError("operator spec must be a JSON object");
  try {
    spec.family = operator_family_from_string(j.at("family").get<std::string>());
    spec.alpha = j.at("alpha").get<double>();
    spec.d = j.at("d").get<int>();
    spec.k = j.at("k").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("operator spec: ") + e.what());
  }
}

}  // namespace kpn
