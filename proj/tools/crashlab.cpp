#include <string>
#include <vector>

#include "crashlab/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return crashlab::run_cli(std::move(args));
}
