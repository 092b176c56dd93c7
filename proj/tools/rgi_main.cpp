#include <string>
#include <vector>

#include "rgi/cli_app.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return rgi::run_cli(args);
}
