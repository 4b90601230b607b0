#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "uygraph/datasets.hpp"
#include "uygraph/graph_core.hpp"
#include "uygraph/model.hpp"

using namespace uygraph;

namespace {

LabeledGraph grad_fixture() {
    // 20 nodes, 2 classes, deterministic
    SbmSpec spec;
    spec.num_classes = 2;
    spec.nodes_per_class = 10;
    spec.p_in = 0.4;
    spec.p_out = 0.15;
    spec.feature_dim = 4;
    spec.separation = 1.0;
    spec.feature_noise = 0.5;
    spec.seed = 2024;
    auto bundle = generate_sbm(spec);
    auto masks = make_split(bundle.graph, 4, 0.3, 1);
    bundle.graph.train_mask = masks.train;
    bundle.graph.val_mask = masks.val;
    bundle.graph.test_mask = masks.test;
    return bundle.graph;
}

struct FlatParams {
    std::vector<double*> slots;

    explicit FlatParams(ModelParams& p) {
        for (int l = 0; l < p.depth; ++l) {
            for (std::size_t k = 0; k < p.w_in[l].size(); ++k) slots.push_back(p.w_in[l].data() + k);
            for (std::size_t k = 0; k < p.w_out[l].size(); ++k)
                slots.push_back(p.w_out[l].data() + k);
            if (!p.att.empty())
                for (std::size_t k = 0; k < p.att[l].size(); ++k) slots.push_back(p.att[l].data() + k);
        }
        if (p.cn_trainable)
            for (std::size_t k = 0; k < p.cn_features.size(); ++k)
                slots.push_back(p.cn_features.data() + k);
    }
};

// Central finite differences against the reverse-mode gradient, every
// parameter, 1e-4 relative.
void gradient_check(ModelKind kind, const LabeledGraph& graph, double delta) {
    TrainConfig config;
    config.hidden_dim = 6;
    config.depth = 2;
    config.dropout = 0.0; // finite differences need a deterministic forward
    config.weight_decay = 0.01;
    config.delta = delta;
    config.seed = 3;

    AugmentedGraph aug;
    if (kind_uses_cns(kind)) {
        Rng arng(11);
        aug = augment(graph, 1, CnCnPolicy::negative, CnFeaturePolicy::class_mean_linear, false,
                      arng);
    } else {
        aug = augment_none(graph);
    }
    ModelInputs inputs = build_model_inputs(aug, kind, config);
    Rng prng(17);
    ModelParams params = init_params(kind, graph.feature_dim(), graph.num_classes,
                                     aug.cn_features, kind_uses_cns(kind), config, prng);

    ModelParams grads;
    Rng dummy(0);
    loss_and_gradients(params, inputs, config, dummy, grads);

    FlatParams pf(params), gf(grads);
    REQUIRE(pf.slots.size() == gf.slots.size());
    const double step = 1e-5;
    int checked = 0;
    ModelParams scratch;
    for (std::size_t k = 0; k < pf.slots.size(); ++k) {
        double saved = *pf.slots[k];
        *pf.slots[k] = saved + step;
        double lp = loss_and_gradients(params, inputs, config, dummy, scratch);
        *pf.slots[k] = saved - step;
        double lm = loss_and_gradients(params, inputs, config, dummy, scratch);
        *pf.slots[k] = saved;
        double fd = (lp - lm) / (2.0 * step);
        double an = *gf.slots[k];
        double rel = std::abs(fd - an) / std::max({1e-6, std::abs(fd), std::abs(an)});
        if (rel > 1e-4) {
            CAPTURE(kind_uses_attention(kind));
            CAPTURE(k);
            CAPTURE(fd);
            CAPTURE(an);
        }
        CHECK(rel <= 1e-4);
        ++checked;
    }
    CHECK(checked > 0);
}

} // namespace

TEST_CASE("forward with identity mixers reduces to one propagation") {
    LabeledGraph g = grad_fixture();
    TrainConfig config;
    config.hidden_dim = g.feature_dim();
    config.depth = 1;
    config.dropout = 0.0;
    ModelInputs inputs = build_model_inputs(g, ModelKind::gcn, config);

    ModelParams params;
    params.kind = ModelKind::gcn;
    params.depth = 1;
    params.w_in.push_back(Matrix::identity(g.feature_dim()));
    params.w_out.push_back(Matrix::identity(g.feature_dim()));
    params.cn_features = Matrix(0, g.feature_dim());

    Matrix out = forward(params, inputs, config);
    Matrix expected = spmm(inputs.prop, g.features); // A_hat X
    CHECK(out == expected);
}

TEST_CASE("gradients match central finite differences for every kind") {
    LabeledGraph g = grad_fixture();
    gradient_check(ModelKind::gcn, g, 0.0);
    gradient_check(ModelKind::uygcn, g, 0.5); // exercises the double-well path
    gradient_check(ModelKind::gat, g, 0.0);
    gradient_check(ModelKind::uygat, g, 0.5);
}

TEST_CASE("gradients also match for the diffusion baselines") {
    LabeledGraph g = grad_fixture();
    gradient_check(ModelKind::grand, g, 0.0);
    gradient_check(ModelKind::acmp, g, 0.5); // pre-activation well term
}

TEST_CASE("uniform logits give ln C loss") {
    LabeledGraph g = grad_fixture();
    TrainConfig config;
    config.hidden_dim = 3;
    config.depth = 1;
    config.dropout = 0.0;
    config.weight_decay = 0.0;
    ModelInputs inputs = build_model_inputs(g, ModelKind::gcn, config);
    ModelParams params;
    params.kind = ModelKind::gcn;
    params.depth = 1;
    params.w_in.push_back(Matrix(g.feature_dim(), 3));
    params.w_out.push_back(Matrix(3, g.num_classes)); // all-zero -> logits 0
    params.cn_features = Matrix(0, g.feature_dim());
    ModelParams grads;
    Rng rng(0);
    double loss = loss_and_gradients(params, inputs, config, rng, grads);
    CHECK(loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("attention coefficients: equal scores, normalization, masked zeros") {
    // star of node 0 with neighbors 1,2 plus self-loop: degree 3 support
    std::vector<SparseEntry> trip = {{0, 0, 1.0}, {0, 1, 1.0}, {0, 2, 1.0},
                                     {1, 1, 1.0}, {1, 0, 1.0}, {2, 2, 1.0}, {2, 0, 1.0}};
    CsrMatrix support = csr_from_triplets(3, 3, trip);
    Matrix h(3, 2);
    h(0, 0) = 1.0;
    h(1, 0) = 2.0;
    h(2, 0) = 3.0;
    std::vector<double> att_zero(4, 0.0); // all scores equal
    auto alpha = attention_coefficients(h, att_zero, support);
    for (int k = support.row_ptr[0]; k < support.row_ptr[1]; ++k)
        CHECK(alpha[k] == doctest::Approx(1.0 / 3.0));

    Rng rng(5);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> att(4);
        for (double& v : att) v = rng.normal();
        auto a = attention_coefficients(h, att, support);
        for (int i = 0; i < 3; ++i) {
            double sum = 0.0;
            for (int k = support.row_ptr[i]; k < support.row_ptr[i + 1]; ++k) {
                CHECK(a[k] > 0.0);
                sum += a[k];
            }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
    // (1,2) is not a support pair: no coefficient slot exists for it
    CHECK(support.get(1, 2) == 0.0);
}

TEST_CASE("single-node neighborhood gets coefficient 1") {
    CsrMatrix support = csr_from_triplets(1, 1, {{0, 0, 1.0}});
    Matrix h(1, 2, 0.3);
    auto alpha = attention_coefficients(h, std::vector<double>(4, 0.5), support);
    CHECK(alpha.size() == 1);
    CHECK(alpha[0] == doctest::Approx(1.0));
}

TEST_CASE("uygat effective weights preserve the sign of the gcn weights") {
    LabeledGraph g = grad_fixture();
    TrainConfig config;
    config.hidden_dim = 5;
    config.depth = 1;
    config.dropout = 0.0;
    Rng arng(2);
    auto aug = augment(g, 1, CnCnPolicy::negative, CnFeaturePolicy::class_mean_linear, false, arng);
    ModelInputs inputs = build_model_inputs(aug, ModelKind::uygat, config);

    Rng rng(10);
    for (int trial = 0; trial < 100; ++trial) {
        Matrix h(inputs.n_total, 5);
        for (int i = 0; i < h.rows(); ++i)
            for (int j = 0; j < 5; ++j) h(i, j) = rng.normal();
        std::vector<double> att(10);
        for (double& v : att) v = rng.normal();
        auto alpha = attention_coefficients(h, att, inputs.prop);
        for (std::size_t k = 0; k < inputs.prop.val.size(); ++k) {
            double effective = inputs.prop.val[k] * alpha[k];
            if (inputs.prop.val[k] > 0.0) CHECK(effective > 0.0);
            if (inputs.prop.val[k] < 0.0) CHECK(effective < 0.0);
        }
    }
}

TEST_CASE("adam: zero gradient leaves params unchanged; unit step is about lr") {
    TrainConfig config;
    ModelParams p;
    p.kind = ModelKind::gcn;
    p.depth = 1;
    p.w_in.push_back(Matrix(2, 2, 1.5));
    p.w_out.push_back(Matrix(2, 2, -0.5));
    p.cn_features = Matrix(0, 2);
    ModelParams zero_g = p;
    zero_g.w_in[0] = Matrix(2, 2, 0.0);
    zero_g.w_out[0] = Matrix(2, 2, 0.0);
    AdamState st;
    ModelParams before = p;
    adam_step(p, zero_g, st, 0.05);
    CHECK(p.w_in[0] == before.w_in[0]);
    CHECK(p.w_out[0] == before.w_out[0]);

    ModelParams const_g = zero_g;
    const_g.w_in[0] = Matrix(2, 2, 3.0);
    const_g.w_out[0] = Matrix(2, 2, -7.0);
    AdamState st2;
    ModelParams q = before;
    adam_step(q, const_g, st2, 0.05);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            CHECK(before.w_in[0](i, j) - q.w_in[0](i, j) == doctest::Approx(0.05).epsilon(1e-6));
            CHECK(q.w_out[0](i, j) - before.w_out[0](i, j) == doctest::Approx(0.05).epsilon(1e-6));
        }
}

TEST_CASE("adam drives a quadratic bowl below 1e-6") {
    ModelParams p;
    p.kind = ModelKind::gcn;
    p.depth = 1;
    p.w_in.push_back(Matrix(3, 3, 2.0));
    p.w_out.push_back(Matrix(3, 3, -1.0));
    p.cn_features = Matrix(0, 1);
    AdamState st;
    for (int step = 0; step < 5000; ++step) {
        ModelParams g = p; // gradient of ||p||^2 / 2 is p itself
        adam_step(p, g, st, 0.01);
        double norm = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                norm = std::max({norm, std::abs(p.w_in[0](i, j)), std::abs(p.w_out[0](i, j))});
        if (norm < 1e-6) {
            CHECK(step < 5000);
            return;
        }
    }
    FAIL("did not converge in 5000 steps");
}

TEST_CASE("evaluate: perfect, collapsed and random predictors") {
    // no-edge graph: propagation is the identity, logits = X
    auto make = [](std::vector<int> labels, Matrix features, std::vector<char> mask) {
        LabeledGraph g;
        g.num_nodes = static_cast<int>(labels.size());
        g.num_classes = 2;
        g.features = std::move(features);
        g.labels = std::move(labels);
        g.train_mask.assign(g.num_nodes, 0);
        g.val_mask.assign(g.num_nodes, 0);
        g.test_mask = std::move(mask);
        return g;
    };
    TrainConfig config;
    config.hidden_dim = 2;
    config.depth = 1;
    config.dropout = 0.0;
    ModelParams params;
    params.kind = ModelKind::gcn;
    params.depth = 1;
    params.w_in.push_back(Matrix::identity(2));
    params.w_out.push_back(Matrix::identity(2));
    params.cn_features = Matrix(0, 2);

    Matrix perfect(4, 2);
    perfect(0, 0) = 1;
    perfect(1, 0) = 1;
    perfect(2, 1) = 1;
    perfect(3, 1) = 1;
    auto g1 = make({0, 0, 1, 1}, perfect, {1, 1, 1, 1});
    auto inputs1 = build_model_inputs(g1, ModelKind::gcn, config);
    auto r1 = evaluate(params, inputs1, config, g1.test_mask);
    CHECK(r1.accuracy == doctest::Approx(1.0));
    CHECK(r1.macro_f1 == doctest::Approx(1.0));

    Matrix collapsed(4, 2);
    for (int i = 0; i < 4; ++i) collapsed(i, 0) = 1.0; // everything predicted class 0
    auto g2 = make({0, 0, 1, 1}, collapsed, {1, 1, 1, 1});
    auto inputs2 = build_model_inputs(g2, ModelKind::gcn, config);
    auto r2 = evaluate(params, inputs2, config, g2.test_mask);
    CHECK(r2.accuracy == doctest::Approx(0.5));
    CHECK(r2.macro_f1 == doctest::Approx(1.0 / 3.0));

    Rng rng(31);
    int n = 400;
    Matrix noise(n, 2);
    std::vector<int> labels(n);
    for (int i = 0; i < n; ++i) {
        labels[i] = i % 2;
        noise(i, 0) = rng.normal();
        noise(i, 1) = rng.normal();
    }
    auto g3 = make(labels, noise, std::vector<char>(n, 1));
    auto inputs3 = build_model_inputs(g3, ModelKind::gcn, config);
    auto r3 = evaluate(params, inputs3, config, g3.test_mask);
    CHECK(std::abs(r3.accuracy - 0.5) < 0.15); // ~1/C for independent predictions
}

TEST_CASE("uygcn with zero CNs reproduces gcn bitwise") {
    LabeledGraph g = grad_fixture();
    TrainConfig config;
    config.hidden_dim = 8;
    config.depth = 2;
    config.dropout = 0.4;
    config.epochs_max = 30;
    config.lr = 0.05;
    config.seed = 91;

    TrainResult plain = train(g, ModelKind::gcn, config);
    TrainResult uy = train(augment_none(g), ModelKind::uygcn, config);
    REQUIRE(plain.metrics.train_loss.size() == uy.metrics.train_loss.size());
    CHECK(plain.metrics.train_loss == uy.metrics.train_loss);
    CHECK(plain.metrics.val_acc == uy.metrics.val_acc);
    CHECK(plain.metrics.test_accuracy == uy.metrics.test_accuracy);
    for (int l = 0; l < config.depth; ++l) {
        CHECK(plain.params.w_in[l] == uy.params.w_in[l]);
        CHECK(plain.params.w_out[l] == uy.params.w_out[l]);
    }
}

TEST_CASE("training is deterministic per seed") {
    LabeledGraph g = grad_fixture();
    TrainConfig config;
    config.hidden_dim = 8;
    config.epochs_max = 20;
    config.dropout = 0.5;
    config.seed = 7;
    Rng a1(4), a2(4);
    auto aug1 = augment(g, 1, CnCnPolicy::negative, CnFeaturePolicy::class_mean_linear, false, a1);
    auto aug2 = augment(g, 1, CnCnPolicy::negative, CnFeaturePolicy::class_mean_linear, false, a2);
    TrainResult r1 = train(aug1, ModelKind::uygcn, config);
    TrainResult r2 = train(aug2, ModelKind::uygcn, config);
    CHECK(r1.metrics.train_loss == r2.metrics.train_loss);
    CHECK(r1.metrics.val_acc == r2.metrics.val_acc);
    CHECK(r1.metrics.test_accuracy == r2.metrics.test_accuracy);
    CHECK(r1.metrics.dirichlet == r2.metrics.dirichlet);
}

TEST_CASE("zeroing val/test labels changes no forward output or gradient") {
    LabeledGraph g = grad_fixture();
    LabeledGraph blinded = g;
    for (int v = 0; v < g.num_nodes; ++v)
        if (!g.train_mask[v]) blinded.labels[v] = kNoLabel;

    TrainConfig config;
    config.hidden_dim = 8;
    config.dropout = 0.0;
    Rng a1(4), a2(4);
    auto aug1 = augment(g, 1, CnCnPolicy::negative, CnFeaturePolicy::class_mean_linear, false, a1);
    auto aug2 =
        augment(blinded, 1, CnCnPolicy::negative, CnFeaturePolicy::class_mean_linear, false, a2);
    auto in1 = build_model_inputs(aug1, ModelKind::uygcn, config);
    auto in2 = build_model_inputs(aug2, ModelKind::uygcn, config);
    Rng prng1(9), prng2(9);
    ModelParams p1 = init_params(ModelKind::uygcn, g.feature_dim(), g.num_classes,
                                 aug1.cn_features, true, config, prng1);
    ModelParams p2 = init_params(ModelKind::uygcn, g.feature_dim(), g.num_classes,
                                 aug2.cn_features, true, config, prng2);
    Matrix f1 = forward(p1, in1, config);
    Matrix f2 = forward(p2, in2, config);
    CHECK(f1 == f2);
    ModelParams g1, g2;
    Rng d1(0), d2(0);
    double l1 = loss_and_gradients(p1, in1, config, d1, g1);
    double l2 = loss_and_gradients(p2, in2, config, d2, g2);
    CHECK(l1 == l2);
    CHECK(g1.w_in[0] == g2.w_in[0]);
    CHECK(g1.cn_features == g2.cn_features);
}

TEST_CASE("easy homophilic sbm: gcn and uygcn both reach 0.95") {
    SbmSpec spec;
    spec.num_classes = 2;
    spec.nodes_per_class = 30;
    spec.p_in = 0.3;
    spec.p_out = 0.02;
    spec.feature_dim = 8;
    spec.separation = 2.0;
    spec.feature_noise = 0.5;
    spec.seed = 500;
    auto bundle = generate_sbm(spec);
    auto masks = make_split(bundle.graph, 5, 0.2, 3);
    bundle.graph.train_mask = masks.train;
    bundle.graph.val_mask = masks.val;
    bundle.graph.test_mask = masks.test;

    TrainConfig config;
    config.hidden_dim = 16;
    config.epochs_max = 120;
    config.lr = 0.05;
    config.dropout = 0.2;
    config.weight_decay = 0.0005;
    config.seed = 1;

    TrainResult plain = train(bundle.graph, ModelKind::gcn, config);
    CHECK(plain.metrics.test_accuracy >= 0.95);

    Rng arng(8);
    auto aug = augment(bundle.graph, 1, CnCnPolicy::negative, CnFeaturePolicy::class_mean_linear,
                       false, arng);
    TrainResult uy = train(aug, ModelKind::uygcn, config);
    CHECK(uy.metrics.test_accuracy >= 0.95);
}

TEST_CASE("checkpoint save/load round-trips bitwise") {
    LabeledGraph g = grad_fixture();
    TrainConfig config;
    config.hidden_dim = 5;
    config.depth = 2;
    Rng arng(6);
    auto aug = augment(g, 1, CnCnPolicy::negative, CnFeaturePolicy::learnable_embedding, false,
                       arng);
    Rng prng(12);
    ModelParams p = init_params(ModelKind::uygat, g.feature_dim(), g.num_classes, aug.cn_features,
                                true, config, prng);
    auto path = std::filesystem::temp_directory_path() / "uygraph_ckpt_test.txt";
    save_checkpoint(p, path.string());
    ModelParams q = load_checkpoint(path.string());
    std::filesystem::remove(path);
    CHECK(q.kind == p.kind);
    CHECK(q.depth == p.depth);
    CHECK(q.cn_trainable == p.cn_trainable);
    for (int l = 0; l < p.depth; ++l) {
        CHECK(q.w_in[l] == p.w_in[l]);
        CHECK(q.w_out[l] == p.w_out[l]);
        CHECK(q.att[l] == p.att[l]);
    }
    CHECK(q.cn_features == p.cn_features);
}

TEST_CASE("unknown model kind raises a usage error") {
    CHECK_THROWS_AS(parse_model_kind("transformer"), UsageError);
    CHECK(parse_model_kind("uygat") == ModelKind::uygat);
}
