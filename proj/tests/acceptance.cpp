// Prints one line per acceptance criterion; exit status 0 iff all pass.
// Optional arguments restrict the run to the given criterion ids.

#include <cstdio>
#include <string>
#include <vector>

#include "kpn/verify.hpp"

int main(int argc, char** argv) {
  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) ids.push_back(std::stoi(argv[i]));
  const kpn::VerifyReport rep = kpn::run_acceptance(ids);
  for (const auto& c : rep.checks) std::printf("%s\n", kpn::format_line(c).c_str());
  std::printf("%s\n", rep.all_pass() ? "ALL PASS" : "SOME CRITERIA FAILED");
  return rep.all_pass() ? 0 : 1;
}
