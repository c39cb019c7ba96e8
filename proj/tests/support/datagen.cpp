#include "datagen.hpp"

#include <cmath>
#include <cstdio>

#include "pacc/rng.hpp"

namespace testsupport {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

}  // namespace

// 200 rows, protected attribute z in {a, b}. The "hard" subgroup's label
// equals z, so a model free to read z predicts z there (every hard row's
// prediction flips when z is swapped) while a z-blind model must fall back
// to the subgroup's 70/30 class prior, which is confidently off the decision
// tie. The "easy" subgroup's label follows x1 alone, with a margin band
// carved out around the 0.5 threshold and a little label noise.
std::string synthetic_fairness_csv() {
  pacc::Rng rng(424242);
  std::string out = "z,group,x1,x2,label\n";
  for (int i = 0; i < 200; ++i) {
    bool hard = rng.uniform01() < 0.3;
    bool z_b = rng.uniform01() < (hard ? 0.7 : 0.5);
    double x1 = rng.uniform01();
    while (std::fabs(x1 - 0.5) < 0.08) x1 = rng.uniform01();
    double x2 = rng.uniform01();
    bool rule = x1 > 0.5;
    bool y;
    if (hard) {
      y = z_b;
    } else {
      y = rng.uniform01() < 0.04 ? !rule : rule;
    }
    out += z_b ? "b," : "a,";
    out += hard ? "hard," : "easy,";
    out += fmt(x1) + "," + fmt(x2) + "," + (y ? "1" : "0") + "\n";
  }
  return out;
}

// Two gently arched bands in the unit box (the attack's L-inf geometry is
// the plotted geometry), separated by a wide channel. The upper band is
// densest right at its lower edge, so robustness there is governed by how
// far below the edge the decision boundary sits. 10% of the lower class are
// "stragglers" seeded across the channel's upper half: a clean loss carves
// pockets around them and drags the boundary up under the dense edge, which
// costs robustness for the whole upper band, while an adversarially
// constrained loss can only chase stragglers as far as its margin budget
// allows and writes the rest off.
std::string two_moons_csv() {
  pacc::Rng rng(77);
  std::string out = "x1,x2,label\n";
  const double pi = 3.14159265358979323846;
  int straggler = 0;
  for (int i = 0; i < 400; ++i) {
    int cls = i % 2;
    double x = 0.02 + 0.96 * rng.uniform01();
    double arch = 0.02 * std::sin(pi * x);
    double y;
    double r = rng.uniform01();
    if (cls == 1 && r < 0.15) {
      // Stragglers come in vertical clumps of four on a low-discrepancy x
      // grid dense enough that the clean boundary stays dragged up under the
      // upper band across the whole plot, densest near their own top.
      x = 0.05 + 0.90 * std::fmod(0.5 + 0.61803398874989484 * (straggler / 4), 1.0) +
          0.018 * rng.normal();
      ++straggler;
      double v = rng.uniform01();
      y = 0.79 - 0.15 * v * v + 0.02 * std::sin(pi * x);
    } else if (cls == 1 && r < 0.21) {
      // A sparse shelf forms the channel floor a fixed gap below the band
      // edge. The gap fits two modest margins but not two generous ones, so
      // how a trained boundary splits it between shelf and band is the
      // experiment's telltale.
      y = 0.60 + 0.02 * rng.uniform01() + arch;
    } else if (cls == 0) {
      // The upper band is densest right at its lower edge (quartic pull
      // toward the edge), so robust accuracy directly reflects how much
      // margin the boundary leaves below it.
      double w = rng.uniform01();
      y = 0.86 + 0.12 * w * w * w * w + arch;
    } else {
      // The deep bulk anchors the lower class well away from the action.
      y = 0.02 + 0.40 * rng.uniform01() + arch;
    }
    y += 0.003 * rng.normal();
    out += fmt(clamp01(x)) + "," + fmt(clamp01(y)) + "," + std::to_string(cls) + "\n";
  }
  return out;
}

}  // namespace testsupport
