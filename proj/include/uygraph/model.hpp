#pragma once

#include <optional>
#include <string>
#include <vector>

#include "uygraph/augment.hpp"
#include "uygraph/graph.hpp"
#include "uygraph/kernels.hpp"
#include "uygraph/matrix.hpp"
#include "uygraph/rng.hpp"
#include "uygraph/sparse.hpp"

namespace uygraph {

enum class ModelKind { gcn, gat, uygcn, uygat, grand, acmp };
enum class Activation { relu, tanh_act };

ModelKind parse_model_kind(const std::string& name);
std::string model_kind_name(ModelKind kind);
bool kind_uses_attention(ModelKind kind); // gat, uygat
bool kind_uses_cns(ModelKind kind);       // uygcn, uygat

struct TrainConfig {
    double lr = 0.01;
    double weight_decay = 0.005;
    double dropout = 0.5;
    int hidden_dim = 16;
    int depth = 2; // two layers default; deeper for long-range runs
    int epochs_max = 200;
    std::uint64_t seed = 0;
    double delta = 0.0;     // double-well coefficient
    double beta = 1.0;      // acmp repulsion constant
    double step_size = 1.0; // Euler step inside grand/acmp layers
    Activation activation = Activation::relu;
};

// Per-layer channel mixers W_in/W_out, single-head attention parameters for
// the attention kinds, and the trainable CN feature block.
struct ModelParams {
    ModelKind kind = ModelKind::gcn;
    int depth = 0;
    std::vector<Matrix> w_in;
    std::vector<Matrix> w_out;
    std::vector<std::vector<double>> att; // per layer, length 2*hidden
    Matrix cn_features;                   // K x d0; K = 0 without CNs
    bool cn_trainable = false;

    std::size_t parameter_count() const;
};

// Everything the forward pass needs, precomputed once per run: the
// propagation operator (with transpose wiring for the backward pass),
// features, labels and masks.
struct ModelInputs {
    int n_total = 0;    // N + K
    int n_original = 0; // N: loss and metrics read only these rows
    int num_classes = 0;
    CsrMatrix prop;          // propagation weights (normalized, signed)
    CsrMatrix prop_t;        // transpose structure
    std::vector<int> t_edge; // prop_t slot -> prop slot
    Matrix x_base;           // N x d0
    std::vector<int> labels; // size N
    std::vector<char> train_mask, val_mask, test_mask;
};

ModelInputs build_model_inputs(const LabeledGraph& graph, ModelKind kind,
                               const TrainConfig& config);
ModelInputs build_model_inputs(const AugmentedGraph& aug, ModelKind kind,
                               const TrainConfig& config);

// K=0 augmentation wrapper: the uy* code path on it is the plain model.
AugmentedGraph augment_none(const LabeledGraph& graph);

ModelParams init_params(ModelKind kind, int input_dim, int num_classes, const Matrix& cn_features,
                        bool cn_trainable, const TrainConfig& config, Rng& rng);

struct ForwardCache; // internal; declared in model.cpp

// Logits over all N+K rows. Training mode applies inverted dropout to each
// layer input and requires an Rng.
Matrix forward(const ModelParams& params, const ModelInputs& inputs, const TrainConfig& config,
               bool training = false, Rng* rng = nullptr);

// Softmax attention over each row's support neighborhood (self-loop
// included), LeakyReLU(0.2) scores, single head. Returns one strictly
// positive coefficient per support entry; rows sum to 1.
std::vector<double> attention_coefficients(const Matrix& h, const std::vector<double>& att_params,
                                           const CsrMatrix& support);

// Mean cross-entropy over train rows plus weight_decay/2 * ||params||^2.
// Gradients are exact for the fixed computation graph and mirror the
// parameter structure.
double loss_and_gradients(const ModelParams& params, const ModelInputs& inputs,
                          const TrainConfig& config, Rng& rng, ModelParams& grads);

// Bias-corrected Adam with beta1=0.9, beta2=0.999, eps=1e-8.
struct AdamState {
    std::vector<double> m, v;
    long t = 0;
};
void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state, double lr);

struct EvalResult {
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    int absent_classes = 0; // classes with no mask nodes contribute F1 = 0
};
EvalResult evaluate(const ModelParams& params, const ModelInputs& inputs,
                    const TrainConfig& config, const std::vector<char>& mask);

struct Metrics {
    std::vector<double> train_loss, train_acc, val_loss, val_acc;
    std::vector<double> dirichlet; // energy of the last hidden state per epoch
    double test_accuracy = 0.0;
    double test_macro_f1 = 0.0;
    int best_epoch = -1;
    bool diverged = false;
};

struct TrainResult {
    ModelParams params; // best-validation-accuracy checkpoint
    Metrics metrics;
};

// Full-batch training, best-val checkpoint selection, deterministic per
// seed. Divergence aborts and returns the best checkpoint so far.
TrainResult train(const LabeledGraph& graph, ModelKind kind, const TrainConfig& config);
TrainResult train(const AugmentedGraph& aug, ModelKind kind, const TrainConfig& config);

void save_checkpoint(const ModelParams& params, const std::string& path);
ModelParams load_checkpoint(const std::string& path);

} // namespace uygraph
