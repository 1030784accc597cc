#pragma once

#include <vector>

#include "trwbin/certificates.hpp"
#include "trwbin/energy_model.hpp"
#include "trwbin/tree_inference.hpp"

namespace trwbin {

/// Exhaustive ground truth for desk-scale instances.
struct OracleResult {
  double min_value;
  std::vector<Assignment> optima;  // all global minimizers, lexicographic
  MinMarginals min_marginals;      // exact tables per definition
};

inline constexpr int kDefaultOracleLimit = 20;

/// Enumerates all 2^n assignments. Throws SizeLimitError above limit.
OracleResult brute_solve(const EnergyModel& model, int limit = kDefaultOracleLimit);

/// Minimum energy over assignments agreeing with the fixed part.
double constrained_min(const EnergyModel& model, const PartialLabeling& partial,
                       int limit = kDefaultOracleLimit);

/// True iff fixing the partial does not raise the achievable minimum.
bool verify_weak_persistency(const EnergyModel& model, const PartialLabeling& partial,
                             int limit = kDefaultOracleLimit, double tol = kDefaultTol);

}  // namespace trwbin
