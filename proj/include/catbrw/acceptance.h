#pragma once

#include <string>
#include <vector>

#include "catbrw/experiment.h"
#include "catbrw/kernels.h"
#include "catbrw/limit_laws.h"

namespace catbrw {

struct CriterionResult {
  int id = 0;
  std::string title;
  std::string tolerance;
  std::string measured;
  bool pass = false;
};

std::string format_result(const CriterionResult& r);

// Everything deterministic that the criteria need, rebuilt from a calibration.
struct ModelBundle {
  OffspringLaw offspring;
  ModelConstants constants;
  KernelSet ks;
  SolutionTable q;
  std::vector<SolutionTable> P;  // P_1, P_2
  double epsilon = 0.1;
};

ModelBundle build_bundle(const ExperimentConfig& cfg, const Calibration& cal);

CriterionResult check_survival_equivalence(const ModelBundle& b, const McSummary& mc);
CriterionResult check_moment_equivalence(const ModelBundle& b, const McSummary& mc);
CriterionResult check_kernel_tail(const ModelBundle& b);
CriterionResult check_renewal_closed_forms();
CriterionResult check_partition_identity();
CriterionResult check_monotone_operator(const ModelBundle& b);
CriterionResult check_sandwich(const ModelBundle& b);
CriterionResult check_yaglom(const McSummary& mc);
CriterionResult check_asymptote_trend(const ModelBundle& b);
CriterionResult check_integral_lemmas(const ModelBundle& b);
CriterionResult check_determinism(bool identical, const std::string& detail);

// Criteria 1-10 in order.
std::vector<CriterionResult> evaluate_model_criteria(const ModelBundle& b, const McSummary& mc);

// Ratio (int_0^t phi(t-u) k(u) du - phi(t)) / (c4 (2+p)/(1+p) log^{1+p} t / t^2),
// phi(v) = log^p(v+1)/(v+1).
double integral_lemma_ratio(const KernelSet& ks, double p, double t);
// k I_k(t) log^{2k+1} t / t^k with unit delta factors.
double renewal_sum_ratio(int k, double t);

}  // namespace catbrw
