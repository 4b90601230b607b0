#include "uygraph/model.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "uygraph/graph_core.hpp"

namespace uygraph {

ModelKind parse_model_kind(const std::string& name) {
    if (name == "gcn") return ModelKind::gcn;
    if (name == "gat") return ModelKind::gat;
    if (name == "uygcn") return ModelKind::uygcn;
    if (name == "uygat") return ModelKind::uygat;
    if (name == "grand") return ModelKind::grand;
    if (name == "acmp") return ModelKind::acmp;
    throw UsageError("unknown model kind: " + name);
}

std::string model_kind_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::gcn: return "gcn";
        case ModelKind::gat: return "gat";
        case ModelKind::uygcn: return "uygcn";
        case ModelKind::uygat: return "uygat";
        case ModelKind::grand: return "grand";
        case ModelKind::acmp: return "acmp";
    }
    return "?";
}

bool kind_uses_attention(ModelKind kind) {
    return kind == ModelKind::gat || kind == ModelKind::uygat;
}

bool kind_uses_cns(ModelKind kind) {
    return kind == ModelKind::uygcn || kind == ModelKind::uygat;
}

std::size_t ModelParams::parameter_count() const {
    std::size_t n = 0;
    for (const auto& m : w_in) n += m.size();
    for (const auto& m : w_out) n += m.size();
    for (const auto& a : att) n += a.size();
    if (cn_trainable) n += cn_features.size();
    return n;
}

namespace {

// Fixed traversal order shared by Adam, weight decay and the checkpoint
// format: per layer w_in, w_out, att; then the CN feature block.
template <typename P, typename S>
void collect_spans(P& params, std::vector<S>& out) {
    for (int l = 0; l < params.depth; ++l) {
        out.emplace_back(params.w_in[l].data(), params.w_in[l].size());
        out.emplace_back(params.w_out[l].data(), params.w_out[l].size());
        if (!params.att.empty() && !params.att[l].empty())
            out.emplace_back(params.att[l].data(), params.att[l].size());
    }
    if (params.cn_trainable && !params.cn_features.empty())
        out.emplace_back(params.cn_features.data(), params.cn_features.size());
}

std::vector<std::pair<double*, std::size_t>> param_spans(ModelParams& p) {
    std::vector<std::pair<double*, std::size_t>> s;
    collect_spans(p, s);
    return s;
}

std::vector<std::pair<const double*, std::size_t>> param_spans(const ModelParams& p) {
    std::vector<std::pair<const double*, std::size_t>> s;
    collect_spans(p, s);
    return s;
}

void build_transpose_map(const CsrMatrix& prop, CsrMatrix& prop_t, std::vector<int>& t_edge) {
    prop_t.rows = prop.cols;
    prop_t.cols = prop.rows;
    prop_t.row_ptr.assign(prop.cols + 1, 0);
    for (int c : prop.col) ++prop_t.row_ptr[c + 1];
    for (int i = 0; i < prop.cols; ++i) prop_t.row_ptr[i + 1] += prop_t.row_ptr[i];
    prop_t.col.assign(prop.col.size(), 0);
    prop_t.val.assign(prop.col.size(), 0.0);
    t_edge.assign(prop.col.size(), 0);
    std::vector<int> cursor(prop_t.row_ptr.begin(), prop_t.row_ptr.end() - 1);
    for (int i = 0; i < prop.rows; ++i) {
        for (int k = prop.row_ptr[i]; k < prop.row_ptr[i + 1]; ++k) {
            int slot = cursor[prop.col[k]]++;
            prop_t.col[slot] = i;
            prop_t.val[slot] = prop.val[k];
            t_edge[slot] = k;
        }
    }
}

// Euler-step layer operator for the diffusion baselines:
// P = I + dt * (M - diag(rowsum M)) with M the normalized adjacency minus
// beta on the off-diagonal support. The diagonal of M cancels in the flow.
SignedMatrix euler_layer_operator(const SignedMatrix& a_norm, double dt, double beta) {
    const int n = a_norm.dim();
    std::vector<double> offdiag_rowsum(n, 0.0);
    SignedMatrix p(n);
    for (const auto& e : a_norm.entries()) {
        if (e.w == 0.0 || e.i == e.j) continue;
        const double m = e.w - beta;
        p.set(e.i, e.j, dt * m);
        offdiag_rowsum[e.i] += m;
        offdiag_rowsum[e.j] += m;
    }
    for (int i = 0; i < n; ++i) p.set(i, i, 1.0 - dt * offdiag_rowsum[i]);
    return p;
}

ModelInputs build_inputs_impl(const AugmentedGraph& aug, ModelKind kind,
                              const TrainConfig& config) {
    ModelInputs in;
    in.n_original = aug.base.num_nodes;
    in.n_total = aug.total_nodes();
    in.num_classes = aug.base.num_classes;
    in.x_base = aug.base.features;
    in.labels = aug.base.labels;
    in.train_mask = aug.base.train_mask;
    in.val_mask = aug.base.val_mask;
    in.test_mask = aug.base.test_mask;

    SignedMatrix a_norm = normalize_sym(aug.a_c, /*add_self_loops=*/true);
    if (kind == ModelKind::grand || kind == ModelKind::acmp) {
        double beta = kind == ModelKind::acmp ? config.beta : 0.0;
        in.prop = to_csr(euler_layer_operator(a_norm, config.step_size, beta));
    } else {
        in.prop = to_csr(a_norm);
    }
    build_transpose_map(in.prop, in.prop_t, in.t_edge);
    return in;
}

} // namespace

AugmentedGraph augment_none(const LabeledGraph& graph) {
    AugmentedGraph aug;
    aug.base = graph;
    aug.cns.count = 0;
    aug.cns.multiplicity = 0;
    aug.cns.feature_policy = CnFeaturePolicy::zeros;
    aug.connections.rows = graph.num_nodes;
    aug.connections.cols = 0;
    aug.a_c = adjacency_matrix(graph);
    aug.cn_features = Matrix(0, graph.feature_dim());
    aug.cn_cn_policy = CnCnPolicy::none;
    return aug;
}

ModelInputs build_model_inputs(const LabeledGraph& graph, ModelKind kind,
                               const TrainConfig& config) {
    if (kind_uses_cns(kind))
        throw DataError("build_model_inputs: " + model_kind_name(kind) +
                        " requires an augmented graph");
    return build_inputs_impl(augment_none(graph), kind, config);
}

ModelInputs build_model_inputs(const AugmentedGraph& aug, ModelKind kind,
                               const TrainConfig& config) {
    return build_inputs_impl(aug, kind, config);
}

ModelParams init_params(ModelKind kind, int input_dim, int num_classes, const Matrix& cn_features,
                        bool cn_trainable, const TrainConfig& config, Rng& rng) {
    if (config.depth < 1) throw DataError("init_params: depth must be >= 1");
    ModelParams p;
    p.kind = kind;
    p.depth = config.depth;
    p.cn_features = cn_features;
    p.cn_trainable = cn_trainable && cn_features.rows() > 0;
    const int h = config.hidden_dim;
    auto glorot = [&rng](int rows, int cols) {
        Matrix m(rows, cols);
        const double s = std::sqrt(6.0 / (rows + cols));
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) m(i, j) = rng.uniform(-s, s);
        return m;
    };
    for (int l = 0; l < config.depth; ++l) {
        const int d_in = l == 0 ? input_dim : h;
        const int d_out = l == config.depth - 1 ? num_classes : h;
        p.w_in.push_back(glorot(d_in, h));
        p.w_out.push_back(glorot(h, d_out));
        if (kind_uses_attention(kind)) {
            std::vector<double> a(2 * h);
            const double s = std::sqrt(6.0 / (2 * h + 1));
            for (double& v : a) v = rng.uniform(-s, s);
            p.att.push_back(std::move(a));
        }
    }
    return p;
}

namespace {

struct LayerCache {
    Matrix x_in; // layer input after dropout
    std::vector<char> drop_mask;
    Matrix h1; // x_in * w_in
    std::vector<double> alpha, pre_scores;
    std::vector<double> p_vals; // prop values, attention-reweighted if any
    Matrix z;
    Matrix u; // activation output
    Matrix v; // after the double-well term, input to w_out
};

struct Cache {
    std::vector<LayerCache> layers;
    Matrix logits;
};

Matrix stack_features(const ModelInputs& in, const ModelParams& params) {
    const int k = params.cn_features.rows();
    if (in.x_base.rows() + k != in.n_total)
        throw DataError("forward: CN feature block does not match augmentation");
    Matrix x(in.n_total, in.x_base.cols());
    for (int i = 0; i < in.x_base.rows(); ++i)
        for (int j = 0; j < x.cols(); ++j) x(i, j) = in.x_base(i, j);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < x.cols(); ++j) x(in.x_base.rows() + i, j) = params.cn_features(i, j);
    return x;
}

void attention_scores(const Matrix& h, const std::vector<double>& att, const CsrMatrix& support,
                      std::vector<double>& alpha, std::vector<double>& pre) {
    const int d = h.cols();
    if (static_cast<int>(att.size()) != 2 * d)
        throw DataError("attention_coefficients: parameter length != 2*dim");
    const int n = support.rows;
    std::vector<double> src(n, 0.0), dst(n, 0.0);
    for (int i = 0; i < n; ++i) {
        const double* hi = h.row(i);
        double a = 0.0, b = 0.0;
        for (int f = 0; f < d; ++f) {
            a += att[f] * hi[f];
            b += att[d + f] * hi[f];
        }
        src[i] = a;
        dst[i] = b;
    }
    alpha.assign(support.val.size(), 0.0);
    pre.assign(support.val.size(), 0.0);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        const int lo = support.row_ptr[i], hi = support.row_ptr[i + 1];
        if (lo == hi) continue;
        double mx = -std::numeric_limits<double>::infinity();
        for (int k = lo; k < hi; ++k) {
            double p = src[i] + dst[support.col[k]];
            pre[k] = p;
            double score = p > 0.0 ? p : 0.2 * p; // LeakyReLU(0.2)
            if (score > mx) mx = score;
        }
        double sum = 0.0;
        for (int k = lo; k < hi; ++k) {
            double score = pre[k] > 0.0 ? pre[k] : 0.2 * pre[k];
            double e = std::exp(score - mx);
            alpha[k] = e;
            sum += e;
        }
        for (int k = lo; k < hi; ++k) alpha[k] /= sum;
    }
}

Matrix apply_dropout(const Matrix& h, double p, Rng& rng, std::vector<char>& mask) {
    mask.assign(h.size(), 1);
    Matrix out = h;
    const double keep = 1.0 - p;
    double* data = out.data();
    for (std::size_t idx = 0; idx < out.size(); ++idx) {
        if (rng.bernoulli(keep)) {
            data[idx] /= keep;
        } else {
            data[idx] = 0.0;
            mask[idx] = 0;
        }
    }
    return out;
}

bool layer_has_double_well(const ModelParams& params, const TrainConfig& config, int layer) {
    if (config.delta == 0.0 || layer == params.depth - 1) return false;
    return params.kind != ModelKind::grand && params.kind != ModelKind::acmp;
}

bool layer_has_acmp_well(const ModelParams& params, const TrainConfig& config, int layer) {
    return params.kind == ModelKind::acmp && config.delta != 0.0 && layer != params.depth - 1;
}

Matrix forward_impl(const ModelParams& params, const ModelInputs& inputs,
                    const TrainConfig& config, bool training, Rng* rng, Cache* cache) {
    if (params.depth < 1) throw DataError("forward: uninitialized params");
    if (cache) cache->layers.assign(params.depth, {});
    Matrix h = stack_features(inputs, params);
    const bool attn = kind_uses_attention(params.kind);
    for (int l = 0; l < params.depth; ++l) {
        LayerCache scratch;
        LayerCache& lc = cache ? cache->layers[l] : scratch;

        if (training && config.dropout > 0.0) {
            if (!rng) throw DataError("forward: training mode requires an Rng");
            lc.x_in = apply_dropout(h, config.dropout, *rng, lc.drop_mask);
        } else {
            lc.x_in = h;
        }

        lc.h1 = matmul(lc.x_in, params.w_in[l]);

        if (attn) {
            attention_scores(lc.h1, params.att[l], inputs.prop, lc.alpha, lc.pre_scores);
            lc.p_vals.resize(inputs.prop.val.size());
            for (std::size_t k = 0; k < lc.p_vals.size(); ++k)
                lc.p_vals[k] = inputs.prop.val[k] * lc.alpha[k]; // sign of the edge preserved
            lc.z = spmm_vals(inputs.prop, lc.p_vals, lc.h1);
        } else {
            lc.z = spmm(inputs.prop, lc.h1);
        }

        if (layer_has_acmp_well(params, config, l)) {
            const double c = config.step_size * config.delta;
            for (int i = 0; i < lc.z.rows(); ++i)
                for (int f = 0; f < lc.z.cols(); ++f) {
                    double u = lc.h1(i, f);
                    lc.z(i, f) += c * u * (1.0 - u * u);
                }
        }

        if (l == params.depth - 1) {
            lc.u = lc.z;
        } else {
            lc.u = lc.z;
            double* d = lc.u.data();
            if (config.activation == Activation::relu) {
                for (std::size_t k = 0; k < lc.u.size(); ++k)
                    if (d[k] < 0.0) d[k] = 0.0;
            } else {
                for (std::size_t k = 0; k < lc.u.size(); ++k) d[k] = std::tanh(d[k]);
            }
        }

        if (layer_has_double_well(params, config, l)) {
            lc.v = lc.u;
            const double delta = config.delta;
            for (int i = 0; i < lc.v.rows(); ++i)
                for (int f = 0; f < lc.v.cols(); ++f) {
                    double u = lc.u(i, f);
                    lc.v(i, f) = u + delta * u * (1.0 - u * u);
                }
        } else {
            lc.v = lc.u;
        }

        h = matmul(lc.v, params.w_out[l]);
        if (!h.all_finite())
            throw NumericalError("forward: non-finite activation at layer " + std::to_string(l));
    }
    if (cache) cache->logits = h;
    return h;
}

double cross_entropy_and_dlogits(const Matrix& logits, const ModelInputs& in,
                                 const std::vector<char>& mask, Matrix* dlogits) {
    int count = 0;
    for (int r = 0; r < in.n_original; ++r)
        if (mask[r]) ++count;
    if (count == 0) throw DataError("loss: mask selects no nodes");
    double loss = 0.0;
    if (dlogits) *dlogits = Matrix(logits.rows(), logits.cols());
    for (int r = 0; r < in.n_original; ++r) {
        if (!mask[r]) continue;
        const int y = in.labels[r];
        if (y == kNoLabel) throw DataError("loss: masked node without label");
        const double* row = logits.row(r);
        double mx = row[0];
        for (int c = 1; c < logits.cols(); ++c) mx = std::max(mx, row[c]);
        double sum = 0.0;
        for (int c = 0; c < logits.cols(); ++c) sum += std::exp(row[c] - mx);
        const double lse = mx + std::log(sum);
        loss += lse - row[y];
        if (dlogits) {
            for (int c = 0; c < logits.cols(); ++c) {
                double p = std::exp(row[c] - lse);
                (*dlogits)(r, c) = (p - (c == y ? 1.0 : 0.0)) / count;
            }
        }
    }
    return loss / count;
}

} // namespace

Matrix forward(const ModelParams& params, const ModelInputs& inputs, const TrainConfig& config,
               bool training, Rng* rng) {
    return forward_impl(params, inputs, config, training, rng, nullptr);
}

std::vector<double> attention_coefficients(const Matrix& h, const std::vector<double>& att_params,
                                           const CsrMatrix& support) {
    std::vector<double> alpha, pre;
    attention_scores(h, att_params, support, alpha, pre);
    return alpha;
}

double loss_and_gradients(const ModelParams& params, const ModelInputs& inputs,
                          const TrainConfig& config, Rng& rng, ModelParams& grads) {
    Cache cache;
    forward_impl(params, inputs, config, /*training=*/true, &rng, &cache);

    // gradient container with the parameter structure, zero-filled
    grads = params;
    for (auto [p, n] : param_spans(grads)) std::fill(p, p + n, 0.0);
    if (!grads.cn_trainable && grads.cn_features.rows() > 0)
        grads.cn_features = Matrix(grads.cn_features.rows(), grads.cn_features.cols());

    Matrix dh;
    double loss = cross_entropy_and_dlogits(cache.logits, inputs, inputs.train_mask, &dh);

    const bool attn = kind_uses_attention(params.kind);
    for (int l = params.depth - 1; l >= 0; --l) {
        const LayerCache& lc = cache.layers[l];

        grads.w_out[l] = matmul_at(lc.v, dh);
        Matrix dv = matmul_bt(dh, params.w_out[l]);

        Matrix du = std::move(dv);
        if (layer_has_double_well(params, config, l)) {
            const double delta = config.delta;
            for (int i = 0; i < du.rows(); ++i)
                for (int f = 0; f < du.cols(); ++f) {
                    double u = lc.u(i, f);
                    du(i, f) *= 1.0 + delta * (1.0 - 3.0 * u * u);
                }
        }

        Matrix dz = std::move(du);
        if (l != params.depth - 1) {
            if (config.activation == Activation::relu) {
                for (int i = 0; i < dz.rows(); ++i)
                    for (int f = 0; f < dz.cols(); ++f)
                        if (lc.z(i, f) <= 0.0) dz(i, f) = 0.0;
            } else {
                for (int i = 0; i < dz.rows(); ++i)
                    for (int f = 0; f < dz.cols(); ++f) {
                        double t = lc.u(i, f); // tanh(z)
                        dz(i, f) *= 1.0 - t * t;
                    }
            }
        }

        Matrix dh1;
        if (attn) {
            const CsrMatrix& prop = inputs.prop;
            // through the propagation values
            std::vector<double> t_vals(prop.val.size());
            for (std::size_t k = 0; k < t_vals.size(); ++k)
                t_vals[k] = lc.p_vals[inputs.t_edge[k]];
            dh1 = spmm_vals(inputs.prop_t, t_vals, dz);

            // through the attention coefficients
            std::vector<double> dpre(prop.val.size(), 0.0);
            std::vector<double> row_dpre(prop.rows, 0.0);
#pragma omp parallel for schedule(static)
            for (int i = 0; i < prop.rows; ++i) {
                const int lo = prop.row_ptr[i], hi = prop.row_ptr[i + 1];
                double srow = 0.0;
                for (int k = lo; k < hi; ++k) {
                    double dp = 0.0;
                    const double* dzi = dz.row(i);
                    const double* h1j = lc.h1.row(prop.col[k]);
                    for (int f = 0; f < dz.cols(); ++f) dp += dzi[f] * h1j[f];
                    double dalpha = prop.val[k] * dp;
                    dpre[k] = dalpha; // stash dalpha, finish after the row sum
                    srow += lc.alpha[k] * dalpha;
                }
                double acc = 0.0;
                for (int k = lo; k < hi; ++k) {
                    double dscore = lc.alpha[k] * (dpre[k] - srow);
                    dpre[k] = dscore * (lc.pre_scores[k] > 0.0 ? 1.0 : 0.2);
                    acc += dpre[k];
                }
                row_dpre[i] = acc;
            }
            std::vector<double> col_dpre(prop.cols, 0.0);
            for (int j = 0; j < prop.cols; ++j) {
                double acc = 0.0;
                for (int s = inputs.prop_t.row_ptr[j]; s < inputs.prop_t.row_ptr[j + 1]; ++s)
                    acc += dpre[inputs.t_edge[s]];
                col_dpre[j] = acc;
            }
            const int d = lc.h1.cols();
            auto& datt = grads.att[l];
            for (int i = 0; i < prop.rows; ++i) {
                const double* h1i = lc.h1.row(i);
                for (int f = 0; f < d; ++f) datt[f] += row_dpre[i] * h1i[f];
            }
            for (int j = 0; j < prop.cols; ++j) {
                const double* h1j = lc.h1.row(j);
                for (int f = 0; f < d; ++f) datt[d + f] += col_dpre[j] * h1j[f];
            }
#pragma omp parallel for schedule(static)
            for (int i = 0; i < dh1.rows(); ++i) {
                double* r = dh1.row(i);
                for (int f = 0; f < d; ++f)
                    r[f] += row_dpre[i] * params.att[l][f] + col_dpre[i] * params.att[l][d + f];
            }
        } else {
            dh1 = spmm(inputs.prop_t, dz);
        }

        if (layer_has_acmp_well(params, config, l)) {
            const double c = config.step_size * config.delta;
            for (int i = 0; i < dh1.rows(); ++i)
                for (int f = 0; f < dh1.cols(); ++f) {
                    double u = lc.h1(i, f);
                    dh1(i, f) += dz(i, f) * c * (1.0 - 3.0 * u * u);
                }
        }

        grads.w_in[l] = matmul_at(lc.x_in, dh1);
        Matrix dx = matmul_bt(dh1, params.w_in[l]);

        if (!lc.drop_mask.empty()) {
            const double keep = 1.0 - config.dropout;
            double* d = dx.data();
            for (std::size_t k = 0; k < dx.size(); ++k)
                d[k] = lc.drop_mask[k] ? d[k] / keep : 0.0;
        }
        dh = std::move(dx);
    }

    if (params.cn_trainable) {
        const int n = inputs.x_base.rows();
        for (int i = 0; i < params.cn_features.rows(); ++i)
            for (int j = 0; j < params.cn_features.cols(); ++j)
                grads.cn_features(i, j) = dh(n + i, j);
    }

    // L2 penalty over every trainable parameter
    if (config.weight_decay != 0.0) {
        auto pspans = param_spans(params);
        auto gspans = param_spans(grads);
        double sq = 0.0;
        for (auto [p, n] : pspans)
            for (std::size_t k = 0; k < n; ++k) sq += p[k] * p[k];
        loss += 0.5 * config.weight_decay * sq;
        for (std::size_t s = 0; s < gspans.size(); ++s)
            for (std::size_t k = 0; k < gspans[s].second; ++k)
                gspans[s].first[k] += config.weight_decay * pspans[s].first[k];
    }
    return loss;
}

void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state, double lr) {
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    auto pspans = param_spans(params);
    auto gspans = param_spans(grads);
    if (pspans.size() != gspans.size()) throw DataError("adam_step: gradient structure mismatch");
    std::size_t total = 0;
    for (const auto& [p, n] : pspans) total += n;
    if (state.m.empty()) {
        state.m.assign(total, 0.0);
        state.v.assign(total, 0.0);
        state.t = 0;
    }
    if (state.m.size() != total) throw DataError("adam_step: state size mismatch");
    ++state.t;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
    std::size_t off = 0;
    for (std::size_t s = 0; s < pspans.size(); ++s) {
        double* p = pspans[s].first;
        const double* g = gspans[s].first;
        const std::size_t n = pspans[s].second;
        for (std::size_t k = 0; k < n; ++k) {
            double& m = state.m[off + k];
            double& v = state.v[off + k];
            m = beta1 * m + (1.0 - beta1) * g[k];
            v = beta2 * v + (1.0 - beta2) * g[k] * g[k];
            p[k] -= lr * (m / bc1) / (std::sqrt(v / bc2) + eps);
        }
        off += n;
    }
}

EvalResult evaluate(const ModelParams& params, const ModelInputs& inputs,
                    const TrainConfig& config, const std::vector<char>& mask) {
    Matrix logits = forward(params, inputs, config, /*training=*/false);
    EvalResult r;
    const int c = inputs.num_classes;
    std::vector<long> tp(c, 0), fp(c, 0), fn(c, 0);
    long correct = 0, total = 0;
    for (int i = 0; i < inputs.n_original; ++i) {
        if (!mask[i]) continue;
        const double* row = logits.row(i);
        int pred = 0;
        for (int k = 1; k < logits.cols(); ++k)
            if (row[k] > row[pred]) pred = k;
        const int y = inputs.labels[i];
        if (y == kNoLabel) throw DataError("evaluate: masked node without label");
        ++total;
        if (pred == y) {
            ++correct;
            ++tp[y];
        } else {
            ++fp[pred];
            ++fn[y];
        }
    }
    if (total == 0) throw DataError("evaluate: mask selects no nodes");
    r.accuracy = static_cast<double>(correct) / total;
    double f1_sum = 0.0;
    for (int k = 0; k < c; ++k) {
        if (tp[k] + fn[k] == 0) ++r.absent_classes;
        const double denom_p = tp[k] + fp[k], denom_r = tp[k] + fn[k];
        const double prec = denom_p > 0 ? tp[k] / denom_p : 0.0;
        const double rec = denom_r > 0 ? tp[k] / denom_r : 0.0;
        f1_sum += (prec + rec) > 0.0 ? 2.0 * prec * rec / (prec + rec) : 0.0;
    }
    r.macro_f1 = f1_sum / c;
    return r;
}

namespace {

TrainResult train_impl(const AugmentedGraph& aug, ModelKind kind, const TrainConfig& config) {
    ModelInputs inputs = build_inputs_impl(aug, kind, config);
    Rng rng(config.seed);
    const bool cn_trainable =
        aug.cns.count > 0 && aug.cns.feature_policy != CnFeaturePolicy::zeros;
    ModelParams params = init_params(kind, inputs.x_base.cols(), inputs.num_classes,
                                     aug.cn_features, cn_trainable, config, rng);
    AdamState adam;
    ModelParams grads;

    // informational energy trace: signed Laplacian of the propagation support
    SignedMatrix prop_signed(inputs.prop.rows);
    for (int i = 0; i < inputs.prop.rows; ++i)
        for (int k = inputs.prop.row_ptr[i]; k < inputs.prop.row_ptr[i + 1]; ++k)
            if (inputs.prop.col[k] > i) prop_signed.set(i, inputs.prop.col[k], inputs.prop.val[k]);
    SignedEdgeList prop_edges = edge_list_of(prop_signed);
    SignedMatrix l_c =
        prop_edges.edges.empty() ? SignedMatrix(inputs.prop.rows) : signed_laplacian(prop_edges);

    TrainResult out;
    out.params = params;
    double best_val = -1.0;

    for (int epoch = 0; epoch < config.epochs_max; ++epoch) {
        double loss;
        try {
            loss = loss_and_gradients(params, inputs, config, rng, grads);
        } catch (const NumericalError&) {
            out.metrics.diverged = true;
            break;
        }
        if (!std::isfinite(loss)) {
            out.metrics.diverged = true;
            break;
        }
        adam_step(params, grads, adam, config.lr);

        Cache cache;
        try {
            forward_impl(params, inputs, config, false, nullptr, &cache);
        } catch (const NumericalError&) {
            out.metrics.diverged = true;
            break;
        }
        double train_loss = cross_entropy_and_dlogits(cache.logits, inputs, inputs.train_mask, nullptr);
        double val_loss = 0.0, val_acc = 0.0;
        bool has_val = std::count(inputs.val_mask.begin(), inputs.val_mask.end(), 1) > 0;
        auto acc_of = [&](const std::vector<char>& mask) {
            long correct = 0, total = 0;
            for (int i = 0; i < inputs.n_original; ++i) {
                if (!mask[i]) continue;
                const double* row = cache.logits.row(i);
                int pred = 0;
                for (int k = 1; k < cache.logits.cols(); ++k)
                    if (row[k] > row[pred]) pred = k;
                ++total;
                correct += pred == inputs.labels[i];
            }
            return total == 0 ? 0.0 : static_cast<double>(correct) / total;
        };
        double train_acc = acc_of(inputs.train_mask);
        if (has_val) {
            val_loss = cross_entropy_and_dlogits(cache.logits, inputs, inputs.val_mask, nullptr);
            val_acc = acc_of(inputs.val_mask);
        }
        out.metrics.train_loss.push_back(train_loss);
        out.metrics.train_acc.push_back(train_acc);
        out.metrics.val_loss.push_back(val_loss);
        out.metrics.val_acc.push_back(val_acc);
        const Matrix& hidden = cache.layers.back().v;
        out.metrics.dirichlet.push_back(l_c.entries().empty() ? 0.0
                                                              : dirichlet_energy(l_c, hidden));

        const double select = has_val ? val_acc : train_acc;
        if (select > best_val) {
            best_val = select;
            out.params = params;
            out.metrics.best_epoch = epoch;
        }
    }

    bool has_test = std::count(inputs.test_mask.begin(), inputs.test_mask.end(), 1) > 0;
    if (has_test) {
        EvalResult test = evaluate(out.params, inputs, config, inputs.test_mask);
        out.metrics.test_accuracy = test.accuracy;
        out.metrics.test_macro_f1 = test.macro_f1;
    }
    return out;
}

} // namespace

TrainResult train(const LabeledGraph& graph, ModelKind kind, const TrainConfig& config) {
    if (kind_uses_cns(kind))
        throw DataError("train: " + model_kind_name(kind) + " requires an augmented graph");
    return train_impl(augment_none(graph), kind, config);
}

TrainResult train(const AugmentedGraph& aug, ModelKind kind, const TrainConfig& config) {
    return train_impl(aug, kind, config);
}

namespace {

void write_matrix(std::FILE* f, const char* name, const Matrix& m) {
    std::fprintf(f, "matrix %s %d %d\n", name, m.rows(), m.cols());
    for (int i = 0; i < m.rows(); ++i) {
        for (int j = 0; j < m.cols(); ++j)
            std::fprintf(f, j ? " %.17g" : "%.17g", m(i, j));
        std::fprintf(f, "\n");
    }
}

} // namespace

void save_checkpoint(const ModelParams& params, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw DataError("save_checkpoint: cannot open " + path);
    std::fprintf(f, "uygraph-checkpoint v1\n");
    std::fprintf(f, "kind %s\n", model_kind_name(params.kind).c_str());
    std::fprintf(f, "depth %d\n", params.depth);
    std::fprintf(f, "cn_trainable %d\n", params.cn_trainable ? 1 : 0);
    for (int l = 0; l < params.depth; ++l) {
        write_matrix(f, ("w_in" + std::to_string(l)).c_str(), params.w_in[l]);
        write_matrix(f, ("w_out" + std::to_string(l)).c_str(), params.w_out[l]);
        if (!params.att.empty()) {
            std::fprintf(f, "vector att%d %zu\n", l, params.att[l].size());
            for (std::size_t k = 0; k < params.att[l].size(); ++k)
                std::fprintf(f, k ? " %.17g" : "%.17g", params.att[l][k]);
            std::fprintf(f, "\n");
        }
    }
    write_matrix(f, "cn_features", params.cn_features);
    std::fclose(f);
}

ModelParams load_checkpoint(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("load_checkpoint: cannot open " + path);
    std::string line;
    if (!std::getline(f, line) || line != "uygraph-checkpoint v1")
        throw DataError("load_checkpoint: bad header in " + path);
    ModelParams p;
    std::string word, name;
    f >> word >> name;
    if (word != "kind") throw DataError("load_checkpoint: expected kind");
    p.kind = parse_model_kind(name);
    f >> word >> p.depth;
    if (word != "depth") throw DataError("load_checkpoint: expected depth");
    int cn_trainable = 0;
    f >> word >> cn_trainable;
    if (word != "cn_trainable") throw DataError("load_checkpoint: expected cn_trainable");
    p.cn_trainable = cn_trainable != 0;

    auto read_matrix = [&f](Matrix& m) {
        int rows, cols;
        std::string nm;
        f >> nm >> rows >> cols;
        m = Matrix(rows, cols);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) f >> m(i, j);
    };
    for (int l = 0; l < p.depth; ++l) {
        f >> word;
        if (word != "matrix") throw DataError("load_checkpoint: expected w_in matrix");
        Matrix w;
        read_matrix(w);
        p.w_in.push_back(std::move(w));
        f >> word;
        if (word != "matrix") throw DataError("load_checkpoint: expected w_out matrix");
        read_matrix(w);
        p.w_out.push_back(std::move(w));
        if (kind_uses_attention(p.kind)) {
            std::size_t n;
            f >> word >> name >> n;
            if (word != "vector") throw DataError("load_checkpoint: expected att vector");
            std::vector<double> a(n);
            for (auto& v : a) f >> v;
            p.att.push_back(std::move(a));
        }
    }
    f >> word;
    if (word != "matrix") throw DataError("load_checkpoint: expected cn_features");
    read_matrix(p.cn_features);
    if (!f) throw DataError("load_checkpoint: truncated file " + path);
    return p;
}

} // namespace uygraph
