#include "kpn/error.hpp"

namespace kpn {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::domain: return "domain_error";
    case ErrorCode::configuration: return "configuration_error";
    case ErrorCode::numerical: return "numerical_error";
    case ErrorCode::parse: return "parse_error";
    case ErrorCode::schema: return "schema_error";
    case ErrorCode::io: return "io_error";
  }
  return "unknown_error";
}

}  // namespace kpn
