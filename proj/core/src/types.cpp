#include "cldrf/types.hpp"

#include <algorithm>
#include <set>

namespace cldrf {

std::string term_name(Term t) {
    switch (t) {
        case Term::One: return "1";
        case Term::T: return "t";
        case Term::T2: return "t^2";
        case Term::R: return "r";
        case Term::R2: return "r^2";
        case Term::TxR: return "t*r";
    }
    return "?";
}

void ModelSpec::validate() const {
    if (outcome_terms.empty()) {
        throw std::invalid_argument("outcome_terms must be non-empty");
    }
    std::set<Term> seen;
    for (Term t : outcome_terms) {
        if (!seen.insert(t).second) {
            throw std::invalid_argument("duplicate outcome term: " + term_name(t));
        }
    }
    if (seen.count(Term::T2) && !seen.count(Term::T)) {
        throw std::invalid_argument("t^2 requires t in outcome_terms");
    }
    if (seen.count(Term::R2) && !seen.count(Term::R)) {
        throw std::invalid_argument("r^2 requires r in outcome_terms");
    }
}

void Dataset::validate() const {
    if (y.size() < 1) {
        throw std::invalid_argument("dataset must contain at least one unit");
    }
    if (t.size() != y.size() || X.rows() != y.size()) {
        throw std::invalid_argument("y, t and X must share length n");
    }
    if (!y.allFinite() || !t.allFinite() || !X.allFinite()) {
        throw std::invalid_argument("dataset entries must all be finite");
    }
}

std::vector<std::vector<int>> ClusterAssignment::members() const {
    std::vector<std::vector<int>> by_cluster(static_cast<std::size_t>(C));
    for (int i = 0; i < static_cast<int>(labels.size()); ++i) {
        by_cluster[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)] - 1)]
            .push_back(i);
    }
    return by_cluster;
}

std::vector<int> ClusterAssignment::cluster_sizes() const {
    std::vector<int> sizes(static_cast<std::size_t>(C), 0);
    for (int lab : labels) {
        ++sizes[static_cast<std::size_t>(lab - 1)];
    }
    return sizes;
}

void ClusterAssignment::validate() const {
    if (C < 1) {
        throw std::invalid_argument("cluster count must be >= 1");
    }
    for (int lab : labels) {
        if (lab < 1 || lab > C) {
            throw std::invalid_argument("cluster label out of range {1..C}");
        }
    }
    auto sizes = cluster_sizes();
    if (std::any_of(sizes.begin(), sizes.end(), [](int s) { return s == 0; })) {
        throw std::invalid_argument("every cluster must have at least one member");
    }
}

}  // namespace cldrf
