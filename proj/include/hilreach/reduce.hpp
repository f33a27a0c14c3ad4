#pragma once

#include <cstddef>
#include <vector>

#include "hilreach/exec.hpp"
#include "hilreach/mixture.hpp"

namespace hilreach {

struct MergeRecord {
  std::size_t first = 0;   // indices in the mixture as it was before this merge
  std::size_t second = 0;
  double klUpperBound = 0.0;
  std::size_t result = 0;  // index of the merged component afterwards
};

// Moment-preserving merge of two weighted Gaussians. Throws ConfigError when
// the combined weight is zero.
GaussianComponent mergePair(const GaussianComponent& a, const GaussianComponent& b);

// Upper bound on the K-L divergence incurred by replacing a and b with their
// merge: 0.5 [(wa + wb) ln|S_ab| - wa ln|S_a| - wb ln|S_b|]. Requires positive
// definite covariances (throws NotPositiveDefinite otherwise).
double klUpperBound(const GaussianComponent& a, const GaussianComponent& b);

struct ReductionResult {
  Mixture mixture;
  std::vector<MergeRecord> merges;
  // Smallest bound among every pair scored during the reduction
  // (+inf when nothing was scored).
  double minScoredBound;
};

/// Greedy pairwise reduction: while more than `target` components remain,
/// merge the pair with the smallest K-L upper bound (lowest index pair on
/// ties). Covariances get 1e-12 I added for scoring only; merges use the raw
/// matrices so moments are preserved.
ReductionResult reduceMixture(const Mixture& mixture, std::size_t target,
                              Exec exec = Exec::Parallel);

}  // namespace hilreach
