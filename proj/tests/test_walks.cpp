#include <doctest.h>

#include <cmath>

#include "voterlab/rng.hpp"
#include "voterlab/walks.hpp"

using namespace voterlab;

TEST_SUITE("walks") {

TEST_CASE("transition rows are stochastic and pi is stationary") {
    const Graph graphs[] = {make_clique(6, false), make_cycle(7), make_star(6),
                            make_clique(4, true)};
    for (const Graph& g : graphs) {
        for (WalkMode mode : {WalkMode::Plain, WalkMode::SyncLazy, WalkMode::AsyncLazy}) {
            const WalkAnalysis wa = walk_analysis(g, 0.5, mode);
            const NodeId n = g.node_count();
            for (NodeId u = 0; u < n; ++u) {
                double row = 0.0;
                for (NodeId v = 0; v < n; ++v) row += wa.transition.at(u, v);
                CHECK(std::fabs(row - 1.0) <= 1e-12);
                CHECK(wa.hitting.at(u, u) == 0.0);
            }
            for (NodeId v = 0; v < n; ++v) {
                double mass = 0.0;
                for (NodeId u = 0; u < n; ++u)
                    mass += wa.stationary[u] * wa.transition.at(u, v);
                CHECK(std::fabs(mass - wa.stationary[v]) <= 1e-10);
            }
        }
    }
}

TEST_CASE("stationary distribution is degree proportional") {
    const WalkAnalysis wa = walk_analysis(make_star(5), 0.5, WalkMode::SyncLazy);
    CHECK(wa.stationary[0] == doctest::Approx(0.5).epsilon(1e-15));  // hub: 4 of 8
    for (NodeId u = 1; u < 5; ++u)
        CHECK(wa.stationary[u] == doctest::Approx(0.125).epsilon(1e-15));
}

TEST_CASE("plain clique hitting times are n-1") {
    for (NodeId n : {3, 5, 9}) {
        const WalkAnalysis wa = walk_analysis(make_clique(n, false), 1.0, WalkMode::Plain);
        for (NodeId u = 0; u < n; ++u)
            for (NodeId v = 0; v < n; ++v)
                if (u != v)
                    CHECK(wa.hitting.at(u, v) ==
                          doctest::Approx(static_cast<double>(n - 1)).epsilon(1e-10));
        CHECK(wa.t_hit == doctest::Approx(static_cast<double>(n - 1)).epsilon(1e-10));
    }
}

TEST_CASE("laziness rescales hitting times by 1/alpha") {
    const Graph c6 = make_cycle(6);
    const WalkAnalysis plain = walk_analysis(c6, 1.0, WalkMode::Plain);
    for (double alpha : {0.25, 0.5}) {
        const WalkAnalysis lazy = walk_analysis(c6, alpha, WalkMode::SyncLazy);
        for (NodeId u = 0; u < 6; ++u)
            for (NodeId v = 0; v < 6; ++v)
                CHECK(std::fabs(lazy.hitting.at(u, v) - plain.hitting.at(u, v) / alpha) <= 1e-8);
    }
    // The async-lazy walk moves with probability alpha/n instead.
    const WalkAnalysis async_lazy = walk_analysis(c6, 0.5, WalkMode::AsyncLazy);
    for (NodeId u = 0; u < 6; ++u)
        for (NodeId v = 0; v < 6; ++v)
            CHECK(std::fabs(async_lazy.hitting.at(u, v) -
                            plain.hitting.at(u, v) * 6.0 / 0.5) <= 1e-7);
}

TEST_CASE("cycle hitting time is d(n-d)") {
    const WalkAnalysis wa = walk_analysis(make_cycle(8), 1.0, WalkMode::Plain);
    for (NodeId u = 0; u < 8; ++u) {
        for (NodeId v = 0; v < 8; ++v) {
            if (u == v) continue;
            const double d = std::min((8 + v - u) % 8, (8 + u - v) % 8);
            CHECK(wa.hitting.at(u, v) == doctest::Approx(d * (8 - d)).epsilon(1e-10));
        }
    }
    CHECK(wa.t_hit == doctest::Approx(16.0).epsilon(1e-10));
}

TEST_CASE("walk analysis guards") {
    const Graph split = Graph::from_edges(4, {{0, 1}, {2, 3}});
    CHECK_THROWS_AS(walk_analysis(split, 0.5, WalkMode::Plain), invalid_parameter);
    CHECK_THROWS_AS(walk_analysis(make_cycle(4), 0.0, WalkMode::SyncLazy), invalid_parameter);
    CHECK_THROWS_AS(walk_analysis(make_cycle(2001), 1.0, WalkMode::Plain), resource_error);
}

TEST_CASE("degree weighted fixation") {
    const Graph s4 = make_star(4);
    CHECK(degree_weighted_fixation(s4, {0}) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(degree_weighted_fixation(s4, {0, 1, 2, 3}) == 1.0);
    CHECK(degree_weighted_fixation(s4, {}) == 0.0);
    CHECK(degree_weighted_fixation(s4, {1, 1, 1}) ==
          doctest::Approx(1.0 / 6.0).epsilon(1e-15));  // duplicates count once

    // Regular graph: plain fraction k/n.
    const Graph c8 = make_cycle(8);
    CHECK(degree_weighted_fixation(c8, {0, 3, 5}) == doctest::Approx(3.0 / 8.0).epsilon(1e-15));
}

TEST_CASE("cut ratio invariance on regular graphs") {
    RngStream rng(13, 0);
    CHECK(fitness_cut_invariance_check(make_cycle(8), AcceptanceMatrix(0.75, 0.25), 200, rng));
    CHECK(fitness_cut_invariance_check(make_clique(5, false), AcceptanceMatrix(0.75, 0.25), 200,
                                       rng));
    CHECK_THROWS_AS(fitness_cut_invariance_check(make_star(5), AcceptanceMatrix(0.5, 0.5), 10,
                                                 rng),
                    invalid_parameter);
    CHECK_THROWS_AS(fitness_cut_invariance_check(make_cycle(5), AcceptanceMatrix(0.5, 0.0), 10,
                                                 rng),
                    invalid_parameter);
}

} // TEST_SUITE
