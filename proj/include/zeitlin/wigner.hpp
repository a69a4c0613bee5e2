#pragma once

// Wigner 3j symbols via the Racah single-sum formula with precomputed
// log-factorials. All angular momenta are passed as doubled integers
// (two_j = 2j) so half-integer spins are represented exactly. Double
// precision is adequate for j up to a few tens; callers that need the
// symbols for matrix harmonics stay within N <= 32.

#include <zeitlin/matrix_core.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

namespace zeitlin {

namespace detail {

// log(k!) table; magic-static initialization keeps it thread-safe.
inline const std::vector<double>& log_factorials() {
    static const std::vector<double> table = [] {
        std::vector<double> t(260);
        t[0] = 0.0;
        for (std::size_t k = 1; k < t.size(); ++k)
            t[k] = t[k - 1] + std::log(static_cast<double>(k));
        return t;
    }();
    return table;
}

inline double log_fact(int k) {
    const auto& t = log_factorials();
    if (k < 0 || static_cast<std::size_t>(k) >= t.size())
        throw usage_error("wigner_3j: angular momentum outside supported range");
    return t[static_cast<std::size_t>(k)];
}

} // namespace detail

inline double wigner_3j(int two_j1, int two_j2, int two_j3,
                        int two_m1, int two_m2, int two_m3) {
    if (two_j1 < 0 || two_j2 < 0 || two_j3 < 0)
        throw usage_error("wigner_3j: negative angular momentum");

    // selection rules; violations give a zero symbol
    if (two_m1 + two_m2 + two_m3 != 0) return 0.0;
    if (std::abs(two_m1) > two_j1 || std::abs(two_m2) > two_j2 ||
        std::abs(two_m3) > two_j3)
        return 0.0;
    if ((two_j1 + two_m1) % 2 != 0 || (two_j2 + two_m2) % 2 != 0 ||
        (two_j3 + two_m3) % 2 != 0)
        return 0.0; // j and m of different half-integer parity
    if ((two_j1 + two_j2 + two_j3) % 2 != 0) return 0.0;
    if (two_j3 < std::abs(two_j1 - two_j2) || two_j3 > two_j1 + two_j2)
        return 0.0;

    using detail::log_fact;

    // all of these are genuine integers once the selection rules hold
    const int a1 = (two_j1 + two_j2 - two_j3) / 2;
    const int a2 = (two_j1 - two_j2 + two_j3) / 2;
    const int a3 = (-two_j1 + two_j2 + two_j3) / 2;
    const int per = (two_j1 + two_j2 + two_j3) / 2 + 1;

    const double log_delta = 0.5 * (log_fact(a1) + log_fact(a2) +
                                    log_fact(a3) - log_fact(per));

    const double log_ms =
        0.5 * (log_fact((two_j1 + two_m1) / 2) + log_fact((two_j1 - two_m1) / 2) +
               log_fact((two_j2 + two_m2) / 2) + log_fact((two_j2 - two_m2) / 2) +
               log_fact((two_j3 + two_m3) / 2) + log_fact((two_j3 - two_m3) / 2));

    const int k_lo = std::max({0, (two_j2 - two_j3 - two_m1) / 2,
                               (two_j1 - two_j3 + two_m2) / 2});
    const int k_hi = std::min({a1, (two_j1 - two_m1) / 2, (two_j2 + two_m2) / 2});

    double sum = 0.0;
    for (int k = k_lo; k <= k_hi; ++k) {
        const double log_term =
            log_fact(k) + log_fact(a1 - k) + log_fact((two_j1 - two_m1) / 2 - k) +
            log_fact((two_j2 + two_m2) / 2 - k) +
            log_fact((two_j3 - two_j2 + two_m1) / 2 + k) +
            log_fact((two_j3 - two_j1 - two_m2) / 2 + k);
        const double term = std::exp(log_delta + log_ms - log_term);
        sum += (k % 2 ? -term : term);
    }

    const int phase_exp = (two_j1 - two_j2 - two_m3) / 2;
    const double phase = (phase_exp % 2) ? -1.0 : 1.0;
    return phase * sum;
}

} // namespace zeitlin
