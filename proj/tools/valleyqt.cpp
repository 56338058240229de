#include <iostream>

#include "valleyqt/cli.hpp"

int main(int argc, char** argv) {
  return valleyqt::cli::run(argc, argv, std::cout, std::cerr);
}
