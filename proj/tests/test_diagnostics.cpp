#include <doctest.h>

#include <cmath>

#include "uygraph/datasets.hpp"
#include "uygraph/diagnostics.hpp"
#include "uygraph/eig.hpp"
#include "uygraph/graph_core.hpp"

using namespace uygraph;

namespace {

DatasetBundle connected_sbm(int classes, int per_class, double p_in, double p_out,
                            std::uint64_t seed, int per_class_train) {
    SbmSpec spec;
    spec.num_classes = classes;
    spec.nodes_per_class = per_class;
    spec.p_in = p_in;
    spec.p_out = p_out;
    spec.feature_dim = 4;
    spec.seed = seed;
    spec.require_connected = true;
    auto bundle = generate_sbm(spec);
    auto masks = make_split(bundle.graph, per_class_train, 0.2, seed);
    bundle.graph.train_mask = masks.train;
    bundle.graph.val_mask = masks.val;
    bundle.graph.test_mask = masks.test;
    return bundle;
}

} // namespace

TEST_CASE("osm probe: plain graph collapses, augmented graph does not") {
    auto bundle = connected_sbm(3, 12, 0.5, 0.2, 11, 1);

    CsrMatrix plain = normalize_rw(adjacency_matrix(bundle.graph), true);
    auto base = osm_fixed_point_probe(plain, bundle.graph.num_nodes, 2000, 1e-6);
    CHECK(base.converged_to_constant);
    CHECK(base.x_block_std < 1e-6);

    Rng arng(3);
    auto aug = augment(bundle.graph, 1, CnCnPolicy::negative, CnFeaturePolicy::zeros, false, arng);
    CHECK(aug.cns.count == 3); // K = C >= 3, one train node per class
    CsrMatrix a_hat = normalize_rw(aug.a_c, true);
    auto probe = osm_fixed_point_probe(a_hat, bundle.graph.num_nodes, 2000, 1e-3);
    CHECK_FALSE(probe.converged_to_constant);
    CHECK(probe.x_block_std > 1e-3);
}

TEST_CASE("osm probe flags the single-node graph as degenerate") {
    SignedMatrix lone(1);
    lone.set(0, 0, 1.0);
    auto rep = osm_fixed_point_probe(to_csr(lone), 1, 100, 1e-6);
    CHECK(rep.degenerate);
    CHECK(rep.converged_to_constant);
}

TEST_CASE("sensitivity: r = 0 reduces to the indicator") {
    auto bundle = connected_sbm(2, 8, 0.5, 0.2, 5, 2);
    Rng arng(1);
    auto aug = augment(bundle.graph, 1, CnCnPolicy::negative, CnFeaturePolicy::zeros, false, arng);
    CsrMatrix a_hat = to_csr(normalize_sym(aug.a_c, true));
    Matrix x(aug.total_nodes(), 4);
    Rng rng(2);
    for (int i = 0; i < x.rows(); ++i)
        for (int j = 0; j < 4; ++j) x(i, j) = rng.normal();
    auto rep = sensitivity_check({}, a_hat, x, 0, 1.0, {{0, 0}, {0, 1}, {3, 3}});
    REQUIRE(rep.pairs.size() == 3);
    CHECK(rep.pairs[0].empirical == doctest::Approx(1.0));
    CHECK(rep.pairs[0].bound == 1.0);
    CHECK(rep.pairs[1].empirical == doctest::Approx(0.0));
    CHECK(rep.pairs[1].bound == 0.0);
    CHECK(rep.pairs[2].satisfied);
    CHECK(rep.all_satisfied);
}

TEST_CASE("sensitivity: no path at r = 1 means an exactly-zero Jacobian") {
    // path graph 0-1-2: nodes 0 and 2 are not adjacent
    LabeledGraph g;
    g.num_nodes = 3;
    g.num_classes = 2;
    g.edges = {{0, 1}, {1, 2}};
    g.features = Matrix(3, 2);
    g.labels = {0, 1, 0};
    g.train_mask.assign(3, 0);
    g.val_mask.assign(3, 0);
    g.test_mask.assign(3, 0);
    CsrMatrix a = to_csr(adjacency_matrix(g)); // no self loops: (0,2) unreachable in one hop
    Matrix x(3, 2);
    x(0, 0) = 0.3;
    x(1, 1) = -0.4;
    x(2, 0) = 0.9;
    Rng rng(7);
    Matrix w(2, 3);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 3; ++j) w(i, j) = rng.normal();
    auto rep = sensitivity_check({w}, a, x, 1, 1.0, {{0, 2}});
    CHECK(rep.pairs[0].bound == 0.0);
    CHECK(rep.pairs[0].empirical == doctest::Approx(0.0));
    CHECK(rep.pairs[0].satisfied);
}

TEST_CASE("sensitivity bound holds on a random augmented graph at r = 3") {
    auto bundle = connected_sbm(3, 10, 0.4, 0.15, 21, 2);
    Rng arng(9);
    auto aug = augment(bundle.graph, 1, CnCnPolicy::negative, CnFeaturePolicy::zeros, false, arng);
    CsrMatrix a_hat = to_csr(normalize_sym(aug.a_c, true));
    const int n = aug.total_nodes();
    Matrix x(n, 4);
    Rng rng(3);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < 4; ++j) x(i, j) = rng.normal();
    std::vector<Matrix> w_in;
    for (int l = 0; l < 3; ++l) {
        Matrix w(l == 0 ? 4 : 5, 5);
        for (int i = 0; i < w.rows(); ++i)
            for (int j = 0; j < 5; ++j) w(i, j) = 0.5 * rng.normal();
        w_in.push_back(std::move(w));
    }
    std::vector<std::pair<int, int>> pairs;
    for (int k = 0; k < 100; ++k) pairs.emplace_back(rng.uniform_int(0, n - 1), rng.uniform_int(0, n - 1));
    auto rep = sensitivity_check(w_in, a_hat, x, 3, 1.0, pairs);
    CHECK(rep.all_satisfied);
    CHECK(rep.beta_in > 0.0);
}

TEST_CASE("spectrum report: all-positive graph has no negative eigenvalues") {
    auto bundle = connected_sbm(2, 8, 0.5, 0.3, 31, 2);
    auto aug = augment_none(bundle.graph);
    auto rep = spectrum_report(aug);
    CHECK(rep.negative_count == 0);
    CHECK(rep.edge_negative_count == 0);
    CHECK_FALSE(rep.bound_violated);
}

TEST_CASE("spectrum report: signed triangle has one negative eigenvalue") {
    LabeledGraph g;
    g.num_nodes = 2;
    g.num_classes = 2;
    g.edges = {{0, 1}};
    g.features = Matrix(2, 1);
    g.labels = {0, 1};
    g.train_mask = {1, 1};
    g.val_mask = {0, 0};
    g.test_mask = {0, 0};
    // K = 1 CN labeled 0: +1 to node 0, -1 to node 1 -> triangle (+1, +1, -1)
    CollapsingNodeSet cns;
    cns.count = 1;
    cns.cn_labels = {0};
    cns.multiplicity = 1;
    cns.feature_policy = CnFeaturePolicy::zeros;
    auto c = build_connection_matrix(g.labels, g.train_mask, cns.cn_labels);
    auto aug = assemble_augmented(g, cns, c, CnCnPolicy::none, false);
    auto rep = spectrum_report(aug);
    CHECK(rep.negative_count == 1);
    CHECK(rep.edge_negative_count == 1);
    CHECK(rep.negative_count <= rep.edge_negative_count);
    CHECK_FALSE(rep.bound_violated);
    // spectrum is {-1, 0, 3}
    CHECK(rep.eigenvalues.front() == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(rep.eigenvalues.back() == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("spectrum bound holds over randomized augmented graphs") {
    Rng rng(41);
    for (int trial = 0; trial < 25; ++trial) {
        int classes = rng.uniform_int(2, 4);
        auto bundle = connected_sbm(classes, rng.uniform_int(5, 10), 0.4, 0.15, 600 + trial, 2);
        Rng arng(trial);
        auto aug = augment(bundle.graph, rng.uniform_int(1, 3),
                           rng.bernoulli(0.5) ? CnCnPolicy::negative : CnCnPolicy::none,
                           CnFeaturePolicy::zeros, false, arng);
        auto rep = spectrum_report(aug);
        CHECK(rep.negative_count <= rep.theorem_bound);
        CHECK(rep.negative_count <= rep.edge_negative_count);
        CHECK(rep.negative_count >= 0);
        CHECK_FALSE(rep.bound_violated);
    }
}

TEST_CASE("forman fc3 on hand-checked shapes") {
    // path 0-1-2: middle edge has degrees (1, 2), no triangles -> 4-1-2 = 1
    SignedMatrix path(3);
    path.set(0, 1, 1.0);
    path.set(1, 2, 1.0);
    CHECK(forman_fc3(path, 0, 1) == doctest::Approx(1.0));

    SignedMatrix tri(3);
    tri.set(0, 1, 1.0);
    tri.set(1, 2, 1.0);
    tri.set(0, 2, 1.0);
    CHECK(forman_fc3(tri, 0, 1) == doctest::Approx(3.0)); // 4-2-2+3

    CHECK_THROWS_AS(forman_fc3(path, 0, 2), DataError); // not an edge
}

TEST_CASE("a shared CN raises edge curvature by exactly one") {
    LabeledGraph g;
    g.num_nodes = 2;
    g.num_classes = 1;
    g.edges = {{0, 1}};
    g.features = Matrix(2, 1);
    g.labels = {0, 0};
    g.train_mask = {1, 1};
    g.val_mask = {0, 0};
    g.test_mask = {0, 0};
    double before = forman_fc3(adjacency_matrix(g), 0, 1);
    Rng arng(1);
    auto aug = augment(g, 1, CnCnPolicy::none, CnFeaturePolicy::zeros, false, arng);
    double after = forman_fc3(aug.a_c, 0, 1);
    CHECK(after - before == doctest::Approx(1.0));
}

TEST_CASE("curvature deltas: +shared CNs on train-train edges, -k on train-test edges") {
    Rng rng(51);
    for (int trial = 0; trial < 50; ++trial) {
        auto bundle = connected_sbm(rng.uniform_int(2, 4), rng.uniform_int(5, 9), 0.5, 0.2,
                                    900 + trial, 2);
        int mult = rng.uniform_int(1, 3);
        Rng arng(trial);
        auto aug = augment(bundle.graph, mult,
                           rng.bernoulli(0.5) ? CnCnPolicy::negative : CnCnPolicy::none,
                           CnFeaturePolicy::zeros, false, arng);
        auto rep = curvature_delta_report(bundle.graph, aug);
        const int k = aug.cns.count;
        for (std::size_t e = 0; e < rep.edges.size(); ++e) {
            auto [i, j] = rep.edges[e];
            const bool ti = bundle.graph.train_mask[i] != 0;
            const bool tj = bundle.graph.train_mask[j] != 0;
            if (ti && tj) {
                CHECK(rep.delta[e] == doctest::Approx(static_cast<double>(k)));
            } else if (ti != tj) {
                CHECK(rep.delta[e] == doctest::Approx(-static_cast<double>(k)));
            } else {
                CHECK(rep.delta[e] == doctest::Approx(0.0));
            }
        }
    }
}

TEST_CASE("empty train mask leaves all curvature deltas at zero") {
    auto bundle = connected_sbm(2, 6, 0.5, 0.3, 71, 2);
    bundle.graph.train_mask.assign(bundle.graph.num_nodes, 0);
    CollapsingNodeSet cns = make_cn_set(2, 1, CnFeaturePolicy::zeros);
    auto c = build_connection_matrix(bundle.graph.labels, bundle.graph.train_mask, cns.cn_labels);
    auto aug = assemble_augmented(bundle.graph, cns, c, CnCnPolicy::none, false);
    auto rep = curvature_delta_report(bundle.graph, aug);
    for (double d : rep.delta) CHECK(d == doctest::Approx(0.0));
}

TEST_CASE("energy trace: constant state, eigenvector tightness, and well boundedness") {
    SignedEdgeList el{3, {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, -1.0}}};
    SignedMatrix l = signed_laplacian(el);

    Trajectory constant;
    constant.times = {0.0, 1.0};
    constant.states = {Matrix(3, 2, 1.5), Matrix(3, 2, 1.5)};
    auto tr = energy_trace(constant, l);
    CHECK(tr.dirichlet[0] == doctest::Approx(0.0));
    CHECK(tr.violations.empty());

    // the top eigenvector makes the bound tight
    EigResult eig = symmetric_eig(l);
    Matrix top(3, 1);
    for (int i = 0; i < 3; ++i) top(i, 0) = eig.eigenvectors(i, 2);
    Trajectory tight;
    tight.times = {0.0};
    tight.states = {top};
    auto tr2 = energy_trace(tight, l);
    CHECK(tr2.dirichlet[0] == doctest::Approx(tr2.bound[0]).epsilon(1e-9));
    CHECK(tr2.violations.empty());
}
