#include <string>
#include <vector>

#include "gradbalance/harness.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return gradbalance::harness::run_cli(args);
}
