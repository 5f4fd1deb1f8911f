#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

// Reference values produced by tools/oracles/golden.py.
inline const nlohmann::json& golden() {
  static const nlohmann::json j = [] {
    std::ifstream in(std::string(KPN_FIXTURES_DIR) + "/golden.json");
    return nlohmann::json::parse(in);
  }();
  return j;
}
