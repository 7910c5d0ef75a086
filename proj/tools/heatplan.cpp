#include <string>
#include <vector>

#include "heatplan/cli/run.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return heatplan::cli::run(args);
}
