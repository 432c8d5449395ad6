#include <cstdio>

#include "rpf/acceptance.hpp"

int main() {
  int failed = 0;
  rpf::run_acceptance([&](const rpf::CriterionResult& r) {
    std::printf("%s\n", rpf::format_result(r).c_str());
    std::fflush(stdout);
    if (!r.pass) ++failed;
  });
  std::printf("%d of 9 criteria passed\n", 9 - failed);
  return failed == 0 ? 0 : 1;
}
