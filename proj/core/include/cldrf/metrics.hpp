#pragma once

#include "cldrf/types.hpp"

namespace cldrf {

/// Fraction of unit pairs grouped consistently (together in both partitions
/// or apart in both). Computed from the contingency table in O(n + K_a*K_b).
/// Throws LengthMismatchError for partitions of different length.
double rand_index(const ClusterAssignment& a, const ClusterAssignment& b);

/// Counts of units with label pair (i+1, j+1); rows index a, columns b.
std::vector<std::vector<long long>> contingency_table(const ClusterAssignment& a,
                                                      const ClusterAssignment& b);

/// Greedy maximal-overlap matching from estimated clusters to reference
/// clusters: repeatedly pairs the (estimated, reference) cell with the
/// largest contingency count (ties to lowest indices). Returns, for each
/// estimated cluster, the matched reference cluster or 0 when unmatched.
std::vector<int> match_clusters(const ClusterAssignment& estimated,
                                const ClusterAssignment& reference);

}  // namespace cldrf
