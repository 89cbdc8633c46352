#include "cldrf/metrics.hpp"

#include <algorithm>

namespace cldrf {

namespace {

long long choose2(long long m) { return m * (m - 1) / 2; }

}  // namespace

std::vector<std::vector<long long>> contingency_table(const ClusterAssignment& a,
                                                      const ClusterAssignment& b) {
    if (a.labels.size() != b.labels.size()) {
        throw LengthMismatchError("partitions have different lengths: " +
                                  std::to_string(a.labels.size()) + " vs " +
                                  std::to_string(b.labels.size()));
    }
    std::vector<std::vector<long long>> table(
        static_cast<std::size_t>(a.C),
        std::vector<long long>(static_cast<std::size_t>(b.C), 0));
    for (std::size_t i = 0; i < a.labels.size(); ++i) {
        ++table[static_cast<std::size_t>(a.labels[i] - 1)]
               [static_cast<std::size_t>(b.labels[i] - 1)];
    }
    return table;
}

double rand_index(const ClusterAssignment& a, const ClusterAssignment& b) {
    const auto table = contingency_table(a, b);
    const auto n = static_cast<long long>(a.labels.size());
    if (n < 2) return 1.0;

    long long same_both = 0;   // sum over cells of C(n_ij, 2)
    long long same_a = 0;      // sum over rows of C(n_i., 2)
    long long same_b = 0;      // sum over cols of C(n_.j, 2)
    std::vector<long long> col_sums(static_cast<std::size_t>(b.C), 0);
    for (std::size_t i = 0; i < table.size(); ++i) {
        long long row_sum = 0;
        for (std::size_t j = 0; j < table[i].size(); ++j) {
            same_both += choose2(table[i][j]);
            row_sum += table[i][j];
            col_sums[j] += table[i][j];
        }
        same_a += choose2(row_sum);
    }
    for (long long cs : col_sums) same_b += choose2(cs);

    const long long total = choose2(n);
    // Agreements = together in both + apart in both.
    const long long agree = total + 2 * same_both - same_a - same_b;
    return static_cast<double>(agree) / static_cast<double>(total);
}

std::vector<int> match_clusters(const ClusterAssignment& estimated,
                                const ClusterAssignment& reference) {
    auto table = contingency_table(estimated, reference);
    std::vector<int> match(static_cast<std::size_t>(estimated.C), 0);
    std::vector<bool> row_used(static_cast<std::size_t>(estimated.C), false);
    std::vector<bool> col_used(static_cast<std::size_t>(reference.C), false);

    const int pairs = std::min(estimated.C, reference.C);
    for (int k = 0; k < pairs; ++k) {
        long long best = -1;
        int best_i = -1;
        int best_j = -1;
        for (int i = 0; i < estimated.C; ++i) {
            if (row_used[static_cast<std::size_t>(i)]) continue;
            for (int j = 0; j < reference.C; ++j) {
                if (col_used[static_cast<std::size_t>(j)]) continue;
                if (table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] >
                    best) {
                    best = table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
                    best_i = i;
                    best_j = j;
                }
            }
        }
        row_used[static_cast<std::size_t>(best_i)] = true;
        col_used[static_cast<std::size_t>(best_j)] = true;
        match[static_cast<std::size_t>(best_i)] = best_j + 1;
    }
    return match;
}

}  // namespace cldrf
