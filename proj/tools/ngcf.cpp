#include <iostream>
#include <string>
#include <vector>

#include "commands.hpp"

int main(int argc, char** argv) {
  std::ios::sync_with_stdio(false);
  return ngcf::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
