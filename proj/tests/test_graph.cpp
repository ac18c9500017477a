#include <doctest.h>

#include <set>

#include "voterlab/graph.hpp"
#include "voterlab/rng.hpp"

using namespace voterlab;

namespace {

void check_invariants(const Graph& g) {
    for (NodeId u = 0; u < g.node_count(); ++u) {
        CHECK(g.degree(u) >= 1);
        NodeId prev = 0;
        bool first = true;
        for (const NodeId* it = g.neighbors_begin(u); it != g.neighbors_end(u); ++it) {
            CHECK(*it < g.node_count());
            if (!first) CHECK(prev < *it);  // sorted, no duplicates
            prev = *it;
            first = false;
            CHECK(g.has_edge(*it, u));  // symmetry
            if (!g.allows_self_loops()) CHECK(*it != u);
        }
    }
}

} // namespace

TEST_SUITE("graph") {

TEST_CASE("clique generator") {
    const Graph k3 = make_clique(3, false);
    CHECK(k3.node_count() == 3);
    for (NodeId u = 0; u < 3; ++u) CHECK(k3.degree(u) == 2);
    check_invariants(k3);

    const Graph k3l = make_clique(3, true);
    for (NodeId u = 0; u < 3; ++u) CHECK(k3l.degree(u) == 3);
    CHECK(k3l.allows_self_loops());
    CHECK(k3l.has_edge(1, 1));
    check_invariants(k3l);

    const Graph k2 = make_clique(2, false);
    CHECK(k2.degree(0) == 1);
    CHECK(k2.degree(1) == 1);

    CHECK_THROWS_AS(make_clique(1, false), invalid_parameter);
}

TEST_CASE("cycle generator") {
    const Graph c4 = make_cycle(4);
    for (NodeId u = 0; u < 4; ++u) CHECK(c4.degree(u) == 2);
    CHECK(c4.edge_count() == 4);
    check_invariants(c4);

    const Graph c5 = make_cycle(5);
    CHECK(c5.edge_count() == 5);

    // C3 is exactly K3.
    const Graph c3 = make_cycle(3);
    const Graph k3 = make_clique(3, false);
    for (NodeId u = 0; u < 3; ++u)
        for (NodeId v = 0; v < 3; ++v) CHECK(c3.has_edge(u, v) == k3.has_edge(u, v));

    CHECK_THROWS_AS(make_cycle(2), invalid_parameter);
}

TEST_CASE("star generator") {
    const Graph s5 = make_star(5);
    CHECK(s5.degree(0) == 4);
    for (NodeId u = 1; u < 5; ++u) CHECK(s5.degree(u) == 1);
    check_invariants(s5);

    const Graph s3 = make_star(3);
    CHECK(s3.degree(0) == 2);

    const Graph s2 = make_star(2);
    CHECK(s2.degree(0) == 1);
    CHECK_THROWS_AS(make_star(1), invalid_parameter);
}

TEST_CASE("regular degree") {
    CHECK(regular_degree(make_clique(4, false)) == NodeId{3});
    CHECK(regular_degree(make_cycle(6)) == NodeId{2});
    CHECK(!regular_degree(make_star(4)).has_value());
}

TEST_CASE("cut size") {
    const Graph c4 = make_cycle(4);
    CHECK(cut_size(c4, std::vector<NodeId>{0}) == 2);

    const Graph k4 = make_clique(4, false);
    CHECK(cut_size(k4, std::vector<NodeId>{0, 1}) == 4);
    CHECK(cut_size(k4, std::vector<NodeId>{}) == 0);

    // Self-loops never cross the cut.
    const Graph k4l = make_clique(4, true);
    CHECK(cut_size(k4l, std::vector<NodeId>{0, 1}) == 4);
}

TEST_CASE("cut of complement equals cut") {
    RngStream rng(7, 0);
    const Graph graphs[] = {make_clique(6, false), make_cycle(9), make_star(7),
                            make_clique(5, true)};
    for (const Graph& g : graphs) {
        for (int rep = 0; rep < 50; ++rep) {
            std::vector<bool> s(g.node_count());
            std::vector<bool> comp(g.node_count());
            for (NodeId u = 0; u < g.node_count(); ++u) {
                s[u] = rng.bernoulli(0.5);
                comp[u] = !s[u];
            }
            CHECK(cut_size(g, s) == cut_size(g, comp));
        }
    }
}

TEST_CASE("edge list parsing") {
    const Graph path = parse_edge_list("n=3\n0 1\n1 2\n");
    CHECK(path.node_count() == 3);
    CHECK(path.degree(1) == 2);
    CHECK(path.has_edge(0, 1));
    CHECK(!path.has_edge(0, 2));

    // duplicate orientation collapses
    const Graph e = parse_edge_list("n=2\n0 1\n1 0\n");
    CHECK(e.edge_count() == 1);

    // comments, blank lines, self-loop
    const Graph lg = parse_edge_list("# a comment\nn=2\n\n0 0\n0 1\n");
    CHECK(lg.allows_self_loops());
    CHECK(lg.degree(0) == 2);

    CHECK_THROWS_AS(parse_edge_list("n=3\n0 5\n"), parse_error);
    CHECK_THROWS_AS(parse_edge_list("0 1\n"), parse_error);
    CHECK_THROWS_AS(parse_edge_list("n=3\n0 1 2\n"), parse_error);
    CHECK_THROWS_AS(parse_edge_list("n=3\nx y\n"), parse_error);
    CHECK_THROWS_AS(parse_edge_list(""), parse_error);
    // node 2 isolated
    CHECK_THROWS_AS(parse_edge_list("n=3\n0 1\n"), parse_error);

    try {
        parse_edge_list("n=3\n0 1\n9 9\n");
        CHECK(false);
    } catch (const parse_error& err) {
        CHECK(err.line() == 3);
    }
}

TEST_CASE("serialize round trip") {
    const Graph graphs[] = {make_clique(5, true), make_cycle(7), make_star(6),
                            parse_edge_list("n=4\n0 1\n1 2\n2 3\n3 0\n0 2\n")};
    for (const Graph& g : graphs) {
        const Graph back = parse_edge_list(serialize_edge_list(g));
        REQUIRE(back.node_count() == g.node_count());
        for (NodeId u = 0; u < g.node_count(); ++u) {
            REQUIRE(back.degree(u) == g.degree(u));
            for (NodeId v = 0; v < g.node_count(); ++v)
                CHECK(back.has_edge(u, v) == g.has_edge(u, v));
        }
    }
}

TEST_CASE("connectivity") {
    CHECK(make_cycle(5).is_connected());
    // two disjoint edges
    const Graph g = Graph::from_edges(4, {{0, 1}, {2, 3}});
    CHECK(!g.is_connected());
}

} // TEST_SUITE

