#pragma once

// Test-side reference implementations, deliberately independent of the
// library's solve paths: explicit normal equations with Gauss-Jordan
// inversion, composite Simpson quadrature, O(n^2) pair enumeration, and the
// naive double-loop objective.

#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "cldrf/types.hpp"

namespace oracle {

using cldrf::Matrix;
using cldrf::Vector;

// Gauss-Jordan inversion with partial pivoting.
inline Matrix invert(Matrix a) {
    const auto k = a.rows();
    Matrix inv = Matrix::Identity(k, k);
    for (Eigen::Index col = 0; col < k; ++col) {
        Eigen::Index pivot = col;
        for (Eigen::Index r = col + 1; r < k; ++r) {
            if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
        }
        if (a(pivot, col) == 0.0) {
            throw std::runtime_error("oracle: singular matrix");
        }
        a.row(col).swap(a.row(pivot));
        inv.row(col).swap(inv.row(pivot));
        const double d = a(col, col);
        a.row(col) /= d;
        inv.row(col) /= d;
        for (Eigen::Index r = 0; r < k; ++r) {
            if (r == col) continue;
            const double f = a(r, col);
            a.row(r) -= f * a.row(col);
            inv.row(r) -= f * inv.row(col);
        }
    }
    return inv;
}

// alpha = (Z'Z)^-1 Z'y over the member rows, by explicit inversion.
inline Vector normal_equation_ols(const Matrix& Z, const Vector& y,
                                  const std::vector<int>& members) {
    const auto k = Z.cols();
    Matrix ztz = Matrix::Zero(k, k);
    Vector zty = Vector::Zero(k);
    for (int i : members) {
        ztz += Z.row(i).transpose() * Z.row(i);
        zty += Z.row(i).transpose() * y[i];
    }
    return invert(ztz) * zty;
}

// Composite Simpson rule with 4096 panels.
inline double simpson(const std::function<double(double)>& f, double a, double b) {
    const int panels = 4096;
    const double h = (b - a) / panels;
    double sum = f(a) + f(b);
    for (int i = 1; i < panels; ++i) {
        sum += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    }
    return sum * h / 3.0;
}

inline double normal_pdf(double x, double mean, double var) {
    const double d = x - mean;
    return std::exp(-d * d / (2.0 * var)) / std::sqrt(2.0 * std::numbers::pi * var);
}

// Rand index by direct enumeration of all pairs.
inline double rand_index_bruteforce(const std::vector<int>& a,
                                    const std::vector<int>& b) {
    const std::size_t n = a.size();
    long long agree = 0;
    long long total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            ++total;
            const bool same_a = a[i] == a[j];
            const bool same_b = b[i] == b[j];
            if (same_a == same_b) ++agree;
        }
    }
    return total == 0 ? 1.0 : static_cast<double>(agree) / static_cast<double>(total);
}

// All set partitions of {0..n-1} as restricted growth strings (labels 1-based).
inline std::vector<std::vector<int>> all_partitions(int n) {
    std::vector<std::vector<int>> out;
    std::vector<int> a(static_cast<std::size_t>(n), 0);
    std::function<void(int, int)> rec = [&](int i, int max_used) {
        if (i == n) {
            std::vector<int> labels(a.size());
            for (std::size_t k = 0; k < a.size(); ++k) labels[k] = a[k] + 1;
            out.push_back(std::move(labels));
            return;
        }
        for (int v = 0; v <= max_used + 1; ++v) {
            a[static_cast<std::size_t>(i)] = v;
            rec(i + 1, std::max(max_used, v));
        }
    };
    rec(0, -1);
    return out;
}

// Objective by the naive double loop over units and clusters.
inline double objective_bruteforce(const Vector& y, const Matrix& Z,
                                   const std::vector<int>& labels,
                                   const std::vector<Vector>& alpha) {
    double j = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        for (std::size_t c = 0; c < alpha.size(); ++c) {
            const double indicator =
                labels[static_cast<std::size_t>(i)] == static_cast<int>(c) + 1 ? 1.0
                                                                               : 0.0;
            const double resid = y[i] - Z.row(i).dot(alpha[c]);
            j += indicator * resid * resid;
        }
    }
    return j;
}

// Independent per-cluster two-step GPS fit: Gaussian treatment model by
// normal equations, density by hand, outcome regression by normal equations.
struct TwoStepGpsFit {
    Vector beta;
    double sigma2 = 0.0;
    Vector alpha;
    std::vector<double> gps;  // one entry per member, member order
};

inline TwoStepGpsFit two_step_gps_fit(const Matrix& X, const Vector& t,
                                    const Vector& y, const std::vector<int>& members,
                                    bool intercept,
                                    const std::vector<cldrf::Term>& terms) {
    const auto p = X.cols();
    const auto cols = p + (intercept ? 1 : 0);
    Matrix D(static_cast<Eigen::Index>(members.size()), cols);
    Vector tm(static_cast<Eigen::Index>(members.size()));
    for (std::size_t k = 0; k < members.size(); ++k) {
        const auto i = static_cast<Eigen::Index>(members[k]);
        Eigen::Index col = 0;
        if (intercept) D(static_cast<Eigen::Index>(k), col++) = 1.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            D(static_cast<Eigen::Index>(k), col++) = X(i, j);
        }
        tm[static_cast<Eigen::Index>(k)] = t[i];
    }

    TwoStepGpsFit fit;
    {
        Matrix dtd = D.transpose() * D;
        fit.beta = invert(dtd) * (D.transpose() * tm);
        const double rss = (tm - D * fit.beta).squaredNorm();
        fit.sigma2 = std::max(rss / static_cast<double>(members.size()), 1e-10);
    }

    Matrix Zm(static_cast<Eigen::Index>(members.size()),
              static_cast<Eigen::Index>(terms.size()));
    Vector ym(static_cast<Eigen::Index>(members.size()));
    for (std::size_t k = 0; k < members.size(); ++k) {
        const auto i = static_cast<Eigen::Index>(members[k]);
        double mean = 0.0;
        Eigen::Index col = 0;
        if (intercept) mean += fit.beta[col++];
        for (Eigen::Index j = 0; j < p; ++j) mean += fit.beta[col++] * X(i, j);
        const double r = normal_pdf(t[i], mean, fit.sigma2);
        fit.gps.push_back(r);
        const double ti = t[i];
        for (std::size_t q = 0; q < terms.size(); ++q) {
            double v = 0.0;
            switch (terms[q]) {
                case cldrf::Term::One: v = 1.0; break;
                case cldrf::Term::T: v = ti; break;
                case cldrf::Term::T2: v = ti * ti; break;
                case cldrf::Term::R: v = r; break;
                case cldrf::Term::R2: v = r * r; break;
                case cldrf::Term::TxR: v = ti * r; break;
            }
            Zm(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(q)) = v;
        }
        ym[static_cast<Eigen::Index>(k)] = y[i];
    }
    Matrix ztz = Zm.transpose() * Zm;
    fit.alpha = invert(ztz) * (Zm.transpose() * ym);
    return fit;
}

}  // namespace oracle
