#include <iostream>

#include "geoflow/acceptance.hpp"

int main(int argc, char** argv) {
  geoflow::AcceptanceOptions opts;
  if (argc > 1) opts.scenario = argv[1];
  int failed = 0;
  try {
    geoflow::run_acceptance(opts, [&](const geoflow::CriterionResult& r) {
      std::cout << geoflow::summary_line(r) << std::endl;
      if (!r.passed()) ++failed;
    });
  } catch (const geoflow::Error& e) {
    std::cout << "FAIL acceptance aborted: [" << e.module() << "] " << e.what() << std::endl;
    return 1;
  }
  std::cout << (failed ? "FAILED " : "PASSED ") << failed << " failing criteria" << std::endl;
  return failed ? 1 : 0;
}
