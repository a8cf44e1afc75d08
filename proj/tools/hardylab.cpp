#include <cstdio>
#include <string>
#include <vector>

#include "hardylab/cli.hpp"

int main(int argc, char** argv) {
  using namespace hardylab::cli;
  std::vector<std::string> args(argv + 1, argv + argc);
  RunConfig config;
  try {
    config = parse_config(args);
  } catch (const UsageError& e) {
    std::fputs(e.text().c_str(), e.exit_code() == 0 ? stdout : stderr);
    std::fputc('\n', e.exit_code() == 0 ? stdout : stderr);
    return e.exit_code();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "hardylab: %s\n", e.what());
    return 1;
  }
  return run(config);
}
