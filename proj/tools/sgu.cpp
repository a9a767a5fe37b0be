#include <iostream>

#include "sgu/cli.hpp"

int main(int argc, char** argv) {
  return sgu::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
