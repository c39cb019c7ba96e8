#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pacc/constraint.hpp"
#include "pacc/loss.hpp"
#include "pacc/model.hpp"
#include "pacc/sample.hpp"

namespace pacc {

// Inputs for generalization-budget queries: accuracy eps, confidence delta,
// VC dimension d, the ratio constant C (taken as 1 unless calibrated), and
// the constraint counts used by the deviation bound.
struct PaccQuery {
  double epsilon = 0.1;
  double delta = 0.1;
  double vc_dim = 1.0;
  double constant = 1.0;
  int num_average = 0;    // m
  int num_pointwise = 0;  // q

  void validate() const;
};

// ceil(C * (d + ln(1/delta)) / eps^2)
long long sample_complexity(const PaccQuery& query);

// sqrt((1/N) * (1 + log(4 (m+q+2) (2N)^d / delta))), computed in log space so
// large d does not overflow.
double zeta_bound(std::size_t n, double delta, double vc_dim, int m, int q);

// A finite class of predictors: each maps a feature row to an output vector
// (a simplex for classification losses).
struct FiniteHypothesisClass {
  std::vector<std::function<NumArray(const NumArray&)>> hypotheses;
};

struct EcrmResult {
  std::size_t index = 0;
  double objective = 0.0;
};

// Exhaustive constrained empirical risk minimization: feasibility first
// (average means <= c_i, every pointwise sample loss <= c_j), then minimum
// objective among the feasible, ties to the lowest index. Adversarial sources
// are rejected (a black-box hypothesis cannot be attacked); no feasible
// hypothesis raises InfeasibleError listing each hypothesis's worst violation.
EcrmResult ecrm_bruteforce(const FiniteHypothesisClass& hclass,
                           const LossSpec& objective,
                           const std::vector<ConstraintSpec>& constraints,
                           const SampleSet& data);

// Heldout sets for certification: one for the objective, one base set per
// constraint (source transforms are re-applied on the heldout rows).
struct HeldoutData {
  SampleSet objective;
  std::vector<SampleSet> per_constraint;
};

struct CertificateObjective {
  double value = 0.0;
  double reference = 0.0;  // the P-hat the objective is compared against
  bool pass = false;
};

struct CertificateAverage {
  std::string id;
  double mean = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct CertificatePointwise {
  std::string id;
  double satisfied_fraction = 0.0;
  double required_fraction = 0.0;
  bool pass = false;
};

struct PaccCertificate {
  double epsilon = 0.0;
  CertificateObjective objective;
  std::vector<CertificateAverage> average;
  std::vector<CertificatePointwise> pointwise;
  bool verdict = false;

  std::string to_json() const;  // stable key order, no timestamps
};

// Checks the trained parameters on heldout data: objective <= p_hat + eps,
// each average mean <= c_i + eps, each pointwise satisfied on at least a
// 1 - eps fraction. seed feeds adversarial source resolution.
PaccCertificate pacc_certificate(const ModelSpec& model,
                                 const ParameterVector& params,
                                 const LossSpec& objective,
                                 const std::vector<ConstraintSpec>& constraints,
                                 const HeldoutData& heldout, double epsilon,
                                 double p_hat, std::uint64_t seed = 0);

// (1 + ||mu||_1 + sum_j (1/N_j) ||lambda_j||_1) * M * nu: how far the
// Lagrangian can move under a nu-parametrization gap with M-Lipschitz losses.
struct NearOptimalityEstimate {
  double epsilon0 = 0.0;
  double mu_l1 = 0.0;
  double lambda_l1 = 0.0;
};

NearOptimalityEstimate epsilon0_estimate(const DualState& duals,
                                         double lipschitz, double nu);

struct SlacknessEntry {
  std::string id;
  bool pass = false;
  double max_product = 0.0;  // worst |dual * slack| for the constraint
};

// Complementary slackness at tolerance tol: |mu_i * avg_slack_i| <= tol and
// max_n |lambda_{j,n} * slack_{j,n}| <= tol.
std::vector<SlacknessEntry> comp_slackness_check(const DualState& duals,
                                                 const SlackReport& slacks,
                                                 double tol);

}  // namespace pacc
