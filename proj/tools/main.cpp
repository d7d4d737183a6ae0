#include <iostream>

#include "varkde_app/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return varkde::app::run(args, std::cout, std::cerr);
}
