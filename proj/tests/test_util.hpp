#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "sdle/linalg.hpp"

namespace testutil {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline sdle::Matrix random_matrix(std::mt19937_64& rng, int n, double lo = -1.0, double hi = 1.0) {
    sdle::Matrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = uniform(rng, lo, hi);
    return m;
}

/// Random full-rank matrix with a guard on conditioning (min |R_ii| vs norm).
inline sdle::Matrix random_nonsingular(std::mt19937_64& rng, int n) {
    for (;;) {
        sdle::Matrix m = random_matrix(rng, n);
        try {
            const auto f = sdle::qr_signfix(m);
            double rmin = f.r(0, 0);
            for (int i = 1; i < n; ++i) rmin = std::min(rmin, f.r(i, i));
            if (rmin > 1e-3 * m.frobenius_norm()) return m;
        } catch (const sdle::RankDeficientError&) {
        }
    }
}

inline sdle::Matrix random_orthogonal(std::mt19937_64& rng, int n) {
    return sdle::orthonormalize(random_nonsingular(rng, n));
}

/// Normal stable matrix Q^T D Q where D is block diagonal with real entries and
/// 2x2 rotation-scale blocks. Distinct blocks keep a real-part gap >= 0.15 and Q
/// is a moderate rotation away from the identity: the finite-time QR estimate
/// carries a (1/T) log(alignment) transient, so matching eigenvalues to 1e-3 at
/// T = 200 requires a controlled initial overlap. Returns the exact eigenvalue
/// real parts descending.
inline sdle::Matrix random_normal_stable(std::mt19937_64& rng, int n, std::vector<double>& re_out) {
    sdle::Matrix d(n, n);
    re_out.clear();
    int i = 0;
    double next_a = uniform(rng, -0.15, -0.05);
    while (i < n) {
        const double a = next_a;
        next_a = a - 0.15 - uniform(rng, 0.0, 0.1);
        if (i + 1 < n && uniform(rng, 0.0, 1.0) < 0.5) {
            const double b = uniform(rng, 0.1, 1.0);
            d(i, i) = a;
            d(i, i + 1) = b;
            d(i + 1, i) = -b;
            d(i + 1, i + 1) = a;
            re_out.push_back(a);
            re_out.push_back(a);
            i += 2;
        } else {
            d(i, i) = a;
            re_out.push_back(a);
            i += 1;
        }
    }
    std::sort(re_out.begin(), re_out.end(), std::greater<double>());
    sdle::Matrix near_id = sdle::Matrix::identity(n);
    near_id += 0.1 * random_matrix(rng, n);
    const sdle::Matrix q = sdle::orthonormalize(near_id);
    return q.transposed() * d * q;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace testutil
