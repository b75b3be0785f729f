#include <cstdio>
#include <string>
#include <vector>

#include "epsflow/driver.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  const epsflow::CommandOutcome out = epsflow::dispatch(args);
  if (!out.summary.empty()) {
    std::fputs(out.summary.c_str(), stdout);
    if (out.summary.back() != '\n') std::fputc('\n', stdout);
  }
  return out.exit_code;
}
