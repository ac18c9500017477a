#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "voterlab/acceptance.hpp"
#include "voterlab/errors.hpp"
#include "voterlab/linalg.hpp"

namespace voterlab {

// Birth-death chain on states 0..n: from state k the chain moves up with
// probability up[k], down with down[k], and holds with 1 - up[k] - down[k].
// States 0 and n are absorbing (up[0] = down[n] = 0, hold = 1).
struct BirthDeathChain {
    std::uint32_t n = 0;
    std::vector<double> up;    // p_k, size n+1
    std::vector<double> down;  // q_k, size n+1

    double hold(std::uint32_t k) const { return 1.0 - up[k] - down[k]; }
};

// Count chain of the asynchronous dynamics on the loop-free n-clique:
//   p_k = alpha01 k(n-k)/(n(n-1)),  q_k = alpha10 k(n-k)/(n(n-1)).
inline BirthDeathChain clique_async_chain(std::uint32_t n, const AcceptanceMatrix& acc) {
    if (n < 2) throw invalid_parameter("clique chain needs n >= 2");
    BirthDeathChain chain;
    chain.n = n;
    chain.up.assign(n + 1, 0.0);
    chain.down.assign(n + 1, 0.0);
    const double denom = static_cast<double>(n) * (n - 1);
    for (std::uint32_t k = 1; k < n; ++k) {
        const double kink = static_cast<double>(k) * (n - k) / denom;
        chain.up[k] = acc.alpha01() * kink;
        chain.down[k] = acc.alpha10() * kink;
    }
    return chain;
}

// Probability of absorbing at state n starting from k, by the standard
// ratio-product formula with gamma_j = q_j/p_j. Works for any birth-death
// chain. A blocked up-move (p_j = 0) at or above k makes fixation
// impossible; one strictly below k acts as a reflecting-into-absorbing
// floor, so the formula is evaluated on the chain restricted above it.
inline double fixation_birth_death(const BirthDeathChain& chain, std::uint32_t k) {
    const std::uint32_t n = chain.n;
    if (k > n) throw invalid_parameter("start state out of range");
    if (k == 0) return 0.0;
    if (k == n) return 1.0;
    for (std::uint32_t j = k; j < n; ++j)
        if (chain.up[j] == 0.0) return 0.0;
    std::uint32_t base = 0;
    for (std::uint32_t j = k; j-- > 1;) {
        if (chain.up[j] == 0.0) {
            base = j;
            break;
        }
    }
    long double partial = 1.0L;  // sum over i = base..k-1 of prod_{j=base+1..i} gamma_j
    long double total = 1.0L;
    long double product = 1.0L;
    for (std::uint32_t i = base + 1; i < n; ++i) {
        product *= static_cast<long double>(chain.down[i]) / chain.up[i];
        total += product;
        if (i < k) partial += product;
    }
    return static_cast<double>(partial / total);
}

// Fixation probability on a regular graph with relative fitness
// r = alpha01/alpha10:  phi_k = (1 - r^{-k}) / (1 - r^{-n}).
// Evaluated in a form that avoids overflow for r > 1 and cancellation for
// r < 1; within 1e-8 of r = 1 the L'Hopital limit k/n is returned.
inline double fixation_closed_form(double r, std::uint32_t n, std::uint32_t k) {
    if (r < 0.0) throw invalid_parameter("fitness r must be nonnegative");
    if (k > n) throw invalid_parameter("start state out of range");
    if (k == n) return 1.0;
    if (k == 0 || r == 0.0) return 0.0;
    if (std::fabs(r - 1.0) < 1e-8)
        return static_cast<double>(k) / static_cast<double>(n);
    const double lr = std::log(r);
    if (r > 1.0)
        return std::expm1(-static_cast<double>(k) * lr) /
               std::expm1(-static_cast<double>(n) * lr);
    // r < 1: phi_k = r^{n-k} (1 - r^k) / (1 - r^n), factors via expm1.
    return std::exp(static_cast<double>(n - k) * lr) * std::expm1(static_cast<double>(k) * lr) /
           std::expm1(static_cast<double>(n) * lr);
}

// Expected number of steps to absorption from state k, by the tridiagonal
// solve B T = 1 with diagonal p_j + q_j and off-diagonals -p_j, -q_j.
// Throws divergence_error if some interior state cannot reach absorption.
inline double absorption_time_birth_death(const BirthDeathChain& chain, std::uint32_t k) {
    const std::uint32_t n = chain.n;
    if (k > n) throw invalid_parameter("start state out of range");
    if (k == 0 || k == n) return 0.0;

    // Mark states that can reach {0, n}: walk reversed positive-rate edges.
    std::vector<bool> reaches(n + 1, false);
    std::vector<std::uint32_t> work;
    auto mark = [&](std::uint32_t s) {
        if (!reaches[s]) {
            reaches[s] = true;
            work.push_back(s);
        }
    };
    mark(0);
    mark(n);
    while (!work.empty()) {
        const std::uint32_t s = work.back();
        work.pop_back();
        if (s + 1 <= n - 1 && chain.down[s + 1] > 0.0) mark(s + 1);
        if (s >= 2 && chain.up[s - 1] > 0.0) mark(s - 1);
    }
    for (std::uint32_t j = 1; j < n; ++j)
        if (!reaches[j])
            throw divergence_error("state " + std::to_string(j) + " cannot reach absorption");

    const std::size_t m = n - 1;
    std::vector<double> sub(m), diag(m), super(m), rhs(m, 1.0);
    for (std::uint32_t j = 1; j < n; ++j) {
        diag[j - 1] = chain.up[j] + chain.down[j];
        sub[j - 1] = -chain.down[j];
        super[j - 1] = -chain.up[j];
    }
    return solve_tridiagonal(sub, diag, super, rhs)[k - 1];
}

namespace detail {

// Harmonic numbers by compensated summation, grown on demand.
inline double harmonic_number(std::uint32_t j) {
    thread_local std::vector<double> table{0.0};  // table[j] = H_j
    thread_local double compensation = 0.0;
    while (table.size() <= j) {
        const double term = 1.0 / static_cast<double>(table.size());
        const double y = term - compensation;
        const double t = table.back() + y;
        compensation = (t - table.back()) - y;
        table.push_back(t);
    }
    return table[j];
}

// Geometric sum 1 + r + ... + r^{t-1} given lr = log r; the removable
// singularity at r = 1 becomes the plain count t.
inline double geometric_sum(double lr, std::uint32_t t) {
    if (t == 0) return 0.0;
    if (lr == 0.0) return static_cast<double>(t);
    return std::expm1(static_cast<double>(t) * lr) / std::expm1(lr);
}

} // namespace detail

// Exact expected consensus time of the unbiased asynchronous dynamics on
// the loop-free n-clique:
//   T_k(n) = (n-1)/alpha ((n-k)(H_{n-1} - H_{n-k}) + k (H_{n-1} - H_{k-1})).
inline double unbiased_clique_time_closed(std::uint32_t n, std::uint32_t k, double alpha) {
    if (alpha <= 0.0) throw invalid_parameter("alpha must be positive");
    if (n < 2) throw invalid_parameter("need n >= 2");
    if (k > n) throw invalid_parameter("start state out of range");
    if (k == 0 || k == n) return 0.0;
    const double h_n1 = detail::harmonic_number(n - 1);
    const double lhs = static_cast<double>(n - k) * (h_n1 - detail::harmonic_number(n - k));
    const double rhs = static_cast<double>(k) * (h_n1 - detail::harmonic_number(k - 1));
    return (static_cast<double>(n - 1) / alpha) * (lhs + rhs);
}

// Binary entropy in nats, h(p) = -p ln p - (1-p) ln(1-p), with the limit
// convention h(0) = h(1) = 0. Maximum ln 2 at p = 1/2.
inline double entropy_h(double p) {
    if (p < 0.0 || p > 1.0) throw invalid_parameter("p must lie in [0,1]");
    if (p == 0.0 || p == 1.0) return 0.0;
    return -p * std::log(p) - (1.0 - p) * std::log1p(-p);
}

// Diffusion approximation of the unbiased async clique consensus time,
// n^2 h(k/n) / alpha; correct up to an O(n/alpha) additive term.
inline double diffusion_estimate(std::uint32_t n, std::uint32_t k, double alpha) {
    if (alpha <= 0.0) throw invalid_parameter("alpha must be positive");
    if (k > n) throw invalid_parameter("start state out of range");
    return static_cast<double>(n) * static_cast<double>(n) *
           entropy_h(static_cast<double>(k) / static_cast<double>(n)) / alpha;
}

// Exact expected consensus time of the (possibly biased) asynchronous
// dynamics on the loop-free n-clique, via the inverted-tridiagonal form
//
//   T_k(n) = sum_{s=1}^{n-1} q_s^{-1} (sum_{l=1}^{min(s,k)} r^{s-l})
//                                     (sum_{l=1}^{n-max(s,k)} r^{l-1})
//            / sum_{l=1}^{n} r^{l-1},
//
// each inner sum collapsed to a geometric sum, O(n) total. Evaluated with
// r <= 1 (relabeling opinions when r > 1) so no power overflows; r = 1
// replaces geometric sums by term counts.
inline double glaz_time(std::uint32_t n, std::uint32_t k, const AcceptanceMatrix& acc) {
    if (n < 2) throw invalid_parameter("need n >= 2");
    if (acc.alpha01() <= 0.0 || acc.alpha10() <= 0.0)
        throw invalid_parameter("glaz_time requires alpha01 > 0 and alpha10 > 0");
    if (k > n) throw invalid_parameter("start state out of range");
    if (k == 0 || k == n) return 0.0;
    if (acc.alpha01() > acc.alpha10())
        return glaz_time(n, n - k, acc.swapped());

    const double r = acc.fitness();  // <= 1 here
    const double lr = (r == 1.0) ? 0.0 : std::log(r);
    const double scale = static_cast<double>(n) * (n - 1) / acc.alpha10();
    double total = 0.0;
    for (std::uint32_t s = 1; s < n; ++s) {
        const std::uint32_t m = std::min(s, k);
        const std::uint32_t cap = n - std::max(s, k);
        // sum_{l=1}^{m} r^{s-l} = r^{s-m} (1 + ... + r^{m-1})
        const double up_sum =
            std::exp(static_cast<double>(s - m) * lr) * detail::geometric_sum(lr, m);
        const double down_sum = detail::geometric_sum(lr, cap);
        const double inv_q = scale / (static_cast<double>(s) * (n - s));
        total += inv_q * up_sum * down_sum;
    }
    return total / detail::geometric_sum(lr, n);
}

struct DriftBound {
    double value;       // n k / (eps (n-1))
    double simplified;  // min(2k/eps, n/eps)
};

// Upper bound on the synchronous biased clique consensus time under
// alpha01 = alpha10 - eps, from one-step drift of the opinion-1 fraction.
inline DriftBound drift_bound_sync(std::uint32_t n, std::uint32_t k, double eps) {
    if (!(eps > 0.0 && eps <= 1.0)) throw invalid_parameter("eps must lie in (0,1]");
    if (n < 2) throw invalid_parameter("need n >= 2");
    if (k == 0 || k >= n) throw invalid_parameter("need 1 <= k <= n-1");
    const double nk = static_cast<double>(n) * static_cast<double>(k);
    return {nk / (eps * static_cast<double>(n - 1)),
            std::min(2.0 * static_cast<double>(k) / eps, static_cast<double>(n) / eps)};
}

// One-step conditional expectation of the opinion-1 fraction on the clique
// with loops:  E[y' | y] = y + (alpha01 - alpha10) y (1 - y).
inline double sync_drift(double y, const AcceptanceMatrix& acc) {
    if (y < 0.0 || y > 1.0) throw invalid_parameter("fraction must lie in [0,1]");
    return y + (acc.alpha01() - acc.alpha10()) * y * (1.0 - y);
}

namespace detail {

// Binomial(m, p) probability mass, by the stable multiplicative recurrence.
inline std::vector<double> binomial_pmf(std::uint32_t m, double p) {
    std::vector<double> pmf(m + 1, 0.0);
    if (p <= 0.0) {
        pmf[0] = 1.0;
        return pmf;
    }
    if (p >= 1.0) {
        pmf[m] = 1.0;
        return pmf;
    }
    // Start from the mode region to avoid underflow of the first term:
    // compute log pmf at a and extend multiplicatively both ways.
    const std::uint32_t a = static_cast<std::uint32_t>(p * m);
    double log_at_a = 0.0;
    log_at_a += std::lgamma(m + 1.0) - std::lgamma(a + 1.0) - std::lgamma(m - a + 1.0);
    log_at_a += a * std::log(p) + (m - a) * std::log1p(-p);
    pmf[a] = std::exp(log_at_a);
    const double odds = p / (1.0 - p);
    for (std::uint32_t i = a; i < m; ++i)
        pmf[i + 1] = pmf[i] * odds * (static_cast<double>(m - i) / (i + 1.0));
    for (std::uint32_t i = a; i > 0; --i)
        pmf[i - 1] = pmf[i] / odds * (static_cast<double>(i) / (m - i + 1.0));
    return pmf;
}

} // namespace detail

// Exact distribution of the next opinion-1 count under the synchronous
// clique-with-loops kernel: the convolution of Binomial(k, beta_k) and
// Binomial(n-k, gamma_k).
inline std::vector<double> sync_clique_count_pmf(std::uint32_t n, std::uint32_t k,
                                                 const AcceptanceMatrix& acc) {
    if (k > n) throw invalid_parameter("count k out of range");
    const double y = static_cast<double>(k) / static_cast<double>(n);
    const double beta = 1.0 - acc.alpha10() * (1.0 - y);
    const double gamma = acc.alpha01() * y;
    const std::vector<double> stay = detail::binomial_pmf(k, beta);
    const std::vector<double> join = detail::binomial_pmf(n - k, gamma);
    std::vector<double> pmf(n + 1, 0.0);
    for (std::uint32_t a = 0; a <= k; ++a) {
        if (stay[a] == 0.0) continue;
        for (std::uint32_t b = 0; b <= n - k; ++b) pmf[a + b] += stay[a] * join[b];
    }
    return pmf;
}

} // namespace voterlab
