#include <iostream>
#include <string>

#include "datagen.hpp"

// Regenerates a bundled dataset on stdout: datagen <synthetic_fairness|two_moons>
int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: datagen <synthetic_fairness|two_moons>\n";
    return 1;
  }
  std::string name = argv[1];
  if (name == "synthetic_fairness") {
    std::cout << testsupport::synthetic_fairness_csv();
    return 0;
  }
  if (name == "two_moons") {
    std::cout << testsupport::two_moons_csv();
    return 0;
  }
  std::cerr << "unknown dataset '" << name << "'\n";
  return 1;
}
