#include <doctest.h>

#include <cmath>
#include <vector>

#include "voterlab/birth_death.hpp"
#include "voterlab/linalg.hpp"

using namespace voterlab;

namespace {

// Independent oracle: the expected absorption time of the clique count
// chain evaluated term by term,
//   sum_s q_s^-1 (sum_{l=1..min(s,k)} r^{s-l}) (sum_{l=1..n-max(s,k)} r^{l-1})
//   / sum_{l=1..n} r^{l-1},
// with every inner sum written out as a literal loop (O(n^2)).
double clique_time_literal_sums(std::uint32_t n, std::uint32_t k, const AcceptanceMatrix& acc) {
    const double r = acc.alpha01() / acc.alpha10();
    long double numerator = 0.0L;
    for (std::uint32_t s = 1; s < n; ++s) {
        const double q_s =
            acc.alpha10() * static_cast<double>(s) * (n - s) / (static_cast<double>(n) * (n - 1));
        long double up = 0.0L;
        for (std::uint32_t l = 1; l <= std::min(s, k); ++l)
            up += std::pow(static_cast<long double>(r), static_cast<int>(s - l));
        long double down = 0.0L;
        for (std::uint32_t l = 1; l <= n - std::max(s, k); ++l)
            down += std::pow(static_cast<long double>(r), static_cast<int>(l - 1));
        numerator += up * down / q_s;
    }
    long double denominator = 0.0L;
    for (std::uint32_t l = 1; l <= n; ++l)
        denominator += std::pow(static_cast<long double>(r), static_cast<int>(l - 1));
    return static_cast<double>(numerator / denominator);
}

// Independent oracle: absorption probability at state n by solving the
// (n-1)-dimensional linear system of the full chain with dense LU.
double fixation_by_linear_solve(const BirthDeathChain& chain, std::uint32_t k) {
    const std::uint32_t n = chain.n;
    const std::size_t m = n - 1;
    DenseMatrix a(m, m);
    std::vector<double> b(m, 0.0);
    for (std::uint32_t j = 1; j < n; ++j) {
        const std::size_t r = j - 1;
        a.at(r, r) = 1.0 - chain.hold(j);
        if (j > 1) a.at(r, r - 1) = -chain.down[j];
        if (j < n - 1) a.at(r, r + 1) = -chain.up[j];
        if (j == n - 1) b[r] = chain.up[j];
    }
    std::vector<std::vector<double>> rhs{b};
    lu_solve_in_place(a, rhs);
    return rhs[0][k - 1];
}

} // namespace

TEST_SUITE("chain") {

TEST_CASE("clique chain transition rates") {
    const BirthDeathChain c2 = clique_async_chain(2, AcceptanceMatrix(1.0, 1.0));
    CHECK(c2.up[1] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(c2.down[1] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(c2.hold(1) == doctest::Approx(0.0).epsilon(1e-15));

    const BirthDeathChain c3 = clique_async_chain(3, AcceptanceMatrix(0.5, 0.25));
    CHECK(c3.up[1] == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
    CHECK(c3.down[1] == doctest::Approx(1.0 / 12.0).epsilon(1e-15));

    for (std::uint32_t n : {2u, 5u, 17u}) {
        const BirthDeathChain c = clique_async_chain(n, AcceptanceMatrix(0.7, 0.3));
        CHECK(c.up[0] == 0.0);
        CHECK(c.down[n] == 0.0);
        for (std::uint32_t k = 0; k <= n; ++k) {
            CHECK(c.up[k] >= 0.0);
            CHECK(c.down[k] >= 0.0);
            CHECK(c.hold(k) >= -1e-15);
        }
    }
}

TEST_CASE("fixation from the ratio formula") {
    const BirthDeathChain c = clique_async_chain(6, AcceptanceMatrix(0.5, 0.25));
    CHECK(fixation_birth_death(c, 0) == 0.0);
    CHECK(fixation_birth_death(c, 6) == 1.0);

    // Unbiased: phi_k = k/n for every k.
    const BirthDeathChain u = clique_async_chain(9, AcceptanceMatrix::unbiased(0.4));
    for (std::uint32_t k = 0; k <= 9; ++k)
        CHECK(fixation_birth_death(u, k) == doctest::Approx(k / 9.0).epsilon(1e-12));

    // n=3, r=2, k=1: 4/7, against the dense-solve oracle as well.
    const BirthDeathChain biased = clique_async_chain(3, AcceptanceMatrix(1.0, 0.5));
    CHECK(fixation_birth_death(biased, 1) == doctest::Approx(4.0 / 7.0).epsilon(1e-12));
    CHECK(fixation_by_linear_solve(biased, 1) == doctest::Approx(4.0 / 7.0).epsilon(1e-10));

    // Blocked up-moves above k: fixation impossible.
    const BirthDeathChain blocked = clique_async_chain(5, AcceptanceMatrix(0.0, 0.5));
    for (std::uint32_t k = 1; k < 5; ++k) CHECK(fixation_birth_death(blocked, k) == 0.0);

    // A blocked up-move strictly below k acts as an absorbing floor; the
    // dense solve handles the zero rate directly and must agree.
    BirthDeathChain floor_chain = clique_async_chain(7, AcceptanceMatrix(0.6, 0.3));
    floor_chain.up[2] = 0.0;
    for (std::uint32_t k = 3; k < 7; ++k)
        CHECK(fixation_birth_death(floor_chain, k) ==
              doctest::Approx(fixation_by_linear_solve(floor_chain, k)).epsilon(1e-10));

    CHECK_THROWS_AS(fixation_birth_death(biased, 4), invalid_parameter);
}

TEST_CASE("fixation against the dense-solve oracle on a grid") {
    for (std::uint32_t n : {4u, 7u}) {
        for (double a01 : {0.25, 0.75, 1.0}) {
            for (double a10 : {0.25, 0.5, 1.0}) {
                const BirthDeathChain c = clique_async_chain(n, AcceptanceMatrix(a01, a10));
                for (std::uint32_t k = 1; k < n; ++k)
                    CHECK(fixation_birth_death(c, k) ==
                          doctest::Approx(fixation_by_linear_solve(c, k)).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("closed-form fixation") {
    CHECK(fixation_closed_form(1.0, 10, 3) == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(fixation_closed_form(2.0, 3, 1) == doctest::Approx(4.0 / 7.0).epsilon(1e-14));
    CHECK(fixation_closed_form(0.0, 5, 4) == 0.0);
    CHECK(fixation_closed_form(0.5, 8, 8) == 1.0);
    CHECK(fixation_closed_form(3.0, 12, 0) == 0.0);

    // Near r = 1 the L'Hopital limit takes over smoothly.
    CHECK(fixation_closed_form(1.0 + 1e-10, 10, 3) == doctest::Approx(0.3).epsilon(1e-9));
    CHECK(fixation_closed_form(1.0 - 1e-10, 10, 3) == doctest::Approx(0.3).epsilon(1e-9));

    // Stability at sizes where raw powers would overflow or underflow.
    const double tiny = fixation_closed_form(0.5, 4000, 2000);
    CHECK(tiny >= 0.0);
    CHECK(tiny <= 1e-300);
    const double huge = fixation_closed_form(2.0, 4000, 1);
    CHECK(huge == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("moran correspondence: closed form equals the general chain") {
    for (std::uint32_t n : {2u, 5u, 23u, 60u}) {
        for (double r : {0.25, 0.5, 2.0, 4.0}) {
            const BirthDeathChain c = clique_async_chain(n, AcceptanceMatrix(r * 0.25, 0.25));
            for (std::uint32_t k = 0; k <= n; ++k)
                CHECK(fixation_birth_death(c, k) ==
                      doctest::Approx(fixation_closed_form(r, n, k)).epsilon(1e-11));
        }
    }
}

TEST_CASE("fixation monotonicity") {
    for (double r : {0.5, 1.5, 3.0}) {
        double prev = -1.0;
        for (std::uint32_t k = 0; k <= 12; ++k) {
            const double phi = fixation_closed_form(r, 12, k);
            CHECK(phi > prev);
            prev = phi;
        }
    }
    for (std::uint32_t k : {1u, 5u, 11u}) {
        double prev = -1.0;
        for (double r : {0.25, 0.5, 1.0, 2.0, 4.0}) {
            const double phi = fixation_closed_form(r, 12, k);
            CHECK(phi > prev);
            prev = phi;
        }
    }
}

TEST_CASE("unbiased martingale: one-step expected count is conserved") {
    const BirthDeathChain c = clique_async_chain(15, AcceptanceMatrix::unbiased(0.7));
    for (std::uint32_t k = 0; k <= 15; ++k) {
        const double mean = c.up[k] * (k + 1.0) + c.down[k] * (k - 1.0) + c.hold(k) * k;
        CHECK(mean == doctest::Approx(static_cast<double>(k)).epsilon(1e-13));
    }
    for (std::uint32_t n : {3u, 40u, 200u}) {
        for (std::uint32_t k = 0; k <= n; ++k) {
            const std::vector<double> pmf =
                sync_clique_count_pmf(n, k, AcceptanceMatrix::unbiased(0.6));
            double mean = 0.0;
            for (std::uint32_t j = 0; j <= n; ++j) mean += pmf[j] * j;
            CHECK(mean == doctest::Approx(static_cast<double>(k)).epsilon(1e-10));
        }
    }
}

TEST_CASE("absorption time by tridiagonal solve") {
    const BirthDeathChain c = clique_async_chain(8, AcceptanceMatrix(0.5, 0.25));
    CHECK(absorption_time_birth_death(c, 0) == 0.0);
    CHECK(absorption_time_birth_death(c, 8) == 0.0);

    // One step always absorbs from the middle of K2.
    const BirthDeathChain k2 = clique_async_chain(2, AcceptanceMatrix(1.0, 1.0));
    CHECK(absorption_time_birth_death(k2, 1) == doctest::Approx(1.0).epsilon(1e-14));

    // Two exact methods agree.
    const BirthDeathChain big = clique_async_chain(100, AcceptanceMatrix::unbiased(1.0));
    CHECK(absorption_time_birth_death(big, 50) ==
          doctest::Approx(unbiased_clique_time_closed(100, 50, 1.0)).epsilon(1e-9));

    // Frozen interior diverges.
    BirthDeathChain frozen = clique_async_chain(5, AcceptanceMatrix(0.5, 0.5));
    frozen.up[2] = frozen.down[2] = 0.0;
    CHECK_THROWS_AS(absorption_time_birth_death(frozen, 3), divergence_error);
}

TEST_CASE("harmonic closed form") {
    CHECK(unbiased_clique_time_closed(2, 1, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
    // n=3, k=1: 2 (2 (H2-H2) + 1 (H2-H0)) = 3.
    CHECK(unbiased_clique_time_closed(3, 1, 1.0) == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(unbiased_clique_time_closed(3, 1, 0.5) ==
          doctest::Approx(2.0 * unbiased_clique_time_closed(3, 1, 1.0)).epsilon(1e-14));
    CHECK(unbiased_clique_time_closed(50, 0, 1.0) == 0.0);
    CHECK(unbiased_clique_time_closed(50, 50, 1.0) == 0.0);
    CHECK_THROWS_AS(unbiased_clique_time_closed(10, 5, 0.0), invalid_parameter);
}

TEST_CASE("entropy") {
    CHECK(entropy_h(0.5) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(entropy_h(0.0) == 0.0);
    CHECK(entropy_h(1.0) == 0.0);
    for (double p : {0.01, 0.2, 0.37, 0.49}) {
        CHECK(entropy_h(p) == doctest::Approx(entropy_h(1.0 - p)).epsilon(1e-13));
        CHECK(entropy_h(p) > 0.0);
        CHECK(entropy_h(p) <= std::log(2.0));
    }
    CHECK(entropy_h(1.0 / 100.0) > 0.0);
    CHECK_THROWS_AS(entropy_h(-0.1), invalid_parameter);
}

TEST_CASE("diffusion estimate") {
    CHECK(diffusion_estimate(10, 5, 1.0) == doctest::Approx(100.0 * std::log(2.0)).epsilon(1e-14));
    const double err =
        std::fabs(unbiased_clique_time_closed(100, 50, 1.0) - diffusion_estimate(100, 50, 1.0));
    CHECK(err <= 5.0 * 100.0);
}

TEST_CASE("glaz formula agrees with the other exact routes") {
    // r = 1: matches the harmonic closed form.
    for (const auto& [n, k] : std::vector<std::pair<std::uint32_t, std::uint32_t>>{
             {10, 3}, {50, 25}}) {
        const double glaz = glaz_time(n, k, AcceptanceMatrix::unbiased(1.0));
        const double closed = unbiased_clique_time_closed(n, k, 1.0);
        CHECK(std::fabs(glaz - closed) / closed <= 1e-9);
    }

    // Biased: matches the tridiagonal solve.
    {
        const AcceptanceMatrix acc(0.5, 0.25);
        const double glaz = glaz_time(6, 3, acc);
        const double tri = absorption_time_birth_death(clique_async_chain(6, acc), 3);
        CHECK(std::fabs(glaz - tri) / tri <= 1e-9);
    }

    // Three-way exactness across sizes, counts and the acceptance grid.
    for (std::uint32_t n : {2u, 3u, 7u, 21u, 60u}) {
        for (double a01 : {0.25, 0.75, 1.0}) {
            for (double a10 : {0.25, 0.5, 1.0}) {
                const AcceptanceMatrix acc(a01, a10);
                const BirthDeathChain chain = clique_async_chain(n, acc);
                for (std::uint32_t k = 1; k < n; ++k) {
                    const double glaz = glaz_time(n, k, acc);
                    const double tri = absorption_time_birth_death(chain, k);
                    CHECK(std::fabs(glaz - tri) / tri <= 1e-9);
                    if (a01 == a10) {
                        const double closed = unbiased_clique_time_closed(n, k, a01);
                        CHECK(std::fabs(glaz - closed) / closed <= 1e-9);
                    }
                }
            }
        }
    }

    // Relabeling opinions mirrors the start state.
    const AcceptanceMatrix acc(0.8, 0.4);
    CHECK(glaz_time(9, 2, acc) == doctest::Approx(glaz_time(9, 7, acc.swapped())).epsilon(1e-12));

    CHECK_THROWS_AS(glaz_time(5, 2, AcceptanceMatrix(0.0, 1.0)), invalid_parameter);
}

TEST_CASE("glaz evaluation matches the literal term-by-term sums") {
    // The geometric-sum evaluation against the written-out formula,
    // including r < 1, r = 1 and the relabeled r > 1 branch.
    for (const auto& [a01, a10] : std::vector<std::pair<double, double>>{
             {0.5, 1.0}, {1.0, 1.0}, {1.0, 0.5}, {0.3, 0.9}, {0.9, 0.3}}) {
        const AcceptanceMatrix acc(a01, a10);
        for (std::uint32_t n : {2u, 5u, 13u, 40u}) {
            for (std::uint32_t k = 1; k < n; k += 3) {
                const double literal = clique_time_literal_sums(n, k, acc);
                const double fast = glaz_time(n, k, acc);
                CHECK(std::fabs(fast - literal) / literal <= 1e-11);
            }
        }
    }
}

TEST_CASE("sync drift bound") {
    const DriftBound b = drift_bound_sync(100, 10, 0.1);
    CHECK(b.value == doctest::Approx(1000.0 / 9.9).epsilon(1e-14));
    CHECK(drift_bound_sync(2, 1, 1.0).value == doctest::Approx(2.0).epsilon(1e-15));

    // The exact bound dominates the simplified min form everywhere.
    for (std::uint32_t n : {2u, 3u, 10u, 57u}) {
        for (std::uint32_t k = 1; k < n; ++k) {
            const DriftBound d = drift_bound_sync(n, k, 0.3);
            CHECK(d.value <= d.simplified + 1e-12);
        }
    }
    CHECK_THROWS_AS(drift_bound_sync(10, 5, 0.0), invalid_parameter);
}

TEST_CASE("sync drift identity") {
    const AcceptanceMatrix acc(0.3, 0.5);
    CHECK(sync_drift(0.0, acc) == 0.0);
    CHECK(sync_drift(1.0, acc) == 1.0);
    CHECK(sync_drift(0.5, acc) == doctest::Approx(0.45).epsilon(1e-15));
    for (double y : {0.1, 0.33, 0.9})
        CHECK(sync_drift(y, AcceptanceMatrix::unbiased(0.8)) == doctest::Approx(y).epsilon(1e-15));

    // Exact kernel mean equals n * drift for a biased matrix too.
    for (std::uint32_t n : {2u, 13u, 80u}) {
        for (std::uint32_t k = 0; k <= n; ++k) {
            const std::vector<double> pmf = sync_clique_count_pmf(n, k, acc);
            double mean = 0.0;
            for (std::uint32_t j = 0; j <= n; ++j) mean += pmf[j] * j;
            const double expected = n * sync_drift(static_cast<double>(k) / n, acc);
            CHECK(mean == doctest::Approx(expected).epsilon(1e-12));
        }
    }
}

} // TEST_SUITE
