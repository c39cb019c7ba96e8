#pragma once

#include <string>

namespace testsupport {

// The bundled CSV datasets, regenerated byte-for-byte. Tests compare these
// against the files under data/ so the committed corpus stays in sync with
// the generator.
std::string synthetic_fairness_csv();
std::string two_moons_csv();

}  // namespace testsupport
