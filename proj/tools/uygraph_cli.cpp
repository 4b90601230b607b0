// uygraph command line: augment | train | diagnose | simulate | sweep.
// Every report embeds the fully-resolved configuration so any run can be
// reproduced from its own output. Exit codes: 0 ok, 1 usage, 2 data,
// 3 numerical.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "uygraph/augment.hpp"
#include "uygraph/datasets.hpp"
#include "uygraph/diagnostics.hpp"
#include "uygraph/dynamics.hpp"
#include "uygraph/eig.hpp"
#include "uygraph/graph_core.hpp"
#include "uygraph/model.hpp"

using namespace uygraph;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

int log_level() {
    const char* env = std::getenv("UYGRAPH_LOG");
    if (!env) return 0;
    std::string v(env);
    if (v == "debug") return 2;
    if (v.empty() || v == "0" || v == "off") return 0;
    return 1;
}

void log_info(const std::string& msg) {
    if (log_level() >= 1) std::fprintf(stderr, "uygraph: %s\n", msg.c_str());
}

struct RunConfig {
    std::string dataset;
    std::string sbm;
    std::string model = "uygcn";
    int cn_mult = 1;
    std::string cn_cn = "negative";
    std::string cn_features = "class_mean";
    double delta = 0.0;
    double beta = 1.0;
    double lr = 0.01;
    double weight_decay = 0.005;
    double dropout = 0.5;
    int hidden = 16;
    int depth = 2;
    int epochs = 200;
    std::string seeds = "0";
    std::string out = "out";
    int per_class_train = 20;
    double val_fraction = 0.2;
    double dt = 0.01;
    double horizon = 10.0;
    double c_prime = 0.5;
    int window = 50;
    int probe_iterations = 2000;
    int sens_r = 3;
    int sens_pairs = 100;
    std::string m_list; // sweep multiplicity override, e.g. "1,2,3"

    json to_json() const {
        json j;
        j["dataset"] = dataset;
        j["sbm"] = sbm;
        j["model"] = model;
        j["cn-mult"] = cn_mult;
        j["cn-cn"] = cn_cn;
        j["cn-features"] = cn_features;
        j["delta"] = delta;
        j["beta"] = beta;
        j["lr"] = lr;
        j["weight-decay"] = weight_decay;
        j["dropout"] = dropout;
        j["hidden"] = hidden;
        j["depth"] = depth;
        j["epochs"] = epochs;
        j["seeds"] = seeds;
        j["out"] = out;
        j["per-class-train"] = per_class_train;
        j["val-fraction"] = val_fraction;
        j["dt"] = dt;
        j["horizon"] = horizon;
        j["c-prime"] = c_prime;
        j["window"] = window;
        j["probe-iterations"] = probe_iterations;
        j["sens-r"] = sens_r;
        j["sens-pairs"] = sens_pairs;
        j["m-list"] = m_list;
        return j;
    }
};

// Flat key=value config file; keys are the long flag names without the
// leading dashes. Flags override file values; unknown keys are rejected.
void apply_config_file(const std::string& path, RunConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file " + path);
    std::map<std::string, std::function<void(const std::string&)>> setters = {
        {"dataset", [&](const std::string& v) { cfg.dataset = v; }},
        {"sbm", [&](const std::string& v) { cfg.sbm = v; }},
        {"model", [&](const std::string& v) { cfg.model = v; }},
        {"cn-mult", [&](const std::string& v) { cfg.cn_mult = std::stoi(v); }},
        {"cn-cn", [&](const std::string& v) { cfg.cn_cn = v; }},
        {"cn-features", [&](const std::string& v) { cfg.cn_features = v; }},
        {"delta", [&](const std::string& v) { cfg.delta = std::stod(v); }},
        {"beta", [&](const std::string& v) { cfg.beta = std::stod(v); }},
        {"lr", [&](const std::string& v) { cfg.lr = std::stod(v); }},
        {"weight-decay", [&](const std::string& v) { cfg.weight_decay = std::stod(v); }},
        {"dropout", [&](const std::string& v) { cfg.dropout = std::stod(v); }},
        {"hidden", [&](const std::string& v) { cfg.hidden = std::stoi(v); }},
        {"depth", [&](const std::string& v) { cfg.depth = std::stoi(v); }},
        {"epochs", [&](const std::string& v) { cfg.epochs = std::stoi(v); }},
        {"seeds", [&](const std::string& v) { cfg.seeds = v; }},
        {"out", [&](const std::string& v) { cfg.out = v; }},
        {"per-class-train", [&](const std::string& v) { cfg.per_class_train = std::stoi(v); }},
        {"val-fraction", [&](const std::string& v) { cfg.val_fraction = std::stod(v); }},
        {"dt", [&](const std::string& v) { cfg.dt = std::stod(v); }},
        {"horizon", [&](const std::string& v) { cfg.horizon = std::stod(v); }},
        {"c-prime", [&](const std::string& v) { cfg.c_prime = std::stod(v); }},
        {"window", [&](const std::string& v) { cfg.window = std::stoi(v); }},
        {"probe-iterations", [&](const std::string& v) { cfg.probe_iterations = std::stoi(v); }},
        {"sens-r", [&](const std::string& v) { cfg.sens_r = std::stoi(v); }},
        {"sens-pairs", [&](const std::string& v) { cfg.sens_pairs = std::stoi(v); }},
        {"m-list", [&](const std::string& v) { cfg.m_list = v; }},
    };
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw UsageError(path + ":" + std::to_string(line_no) + ": expected key=value");
        std::string key = line.substr(0, eq);
        std::string val = line.substr(eq + 1);
        auto it = setters.find(key);
        if (it == setters.end())
            throw UsageError(path + ":" + std::to_string(line_no) + ": unknown config key '" +
                             key + "'");
        try {
            it->second(val);
        } catch (const std::exception&) {
            throw UsageError(path + ":" + std::to_string(line_no) + ": bad value for '" + key +
                             "'");
        }
    }
}

// The --config file is applied before CLI11 re-parses the flags, so flags
// always win over file values.
std::string find_config_arg(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        if (a == "--config" && i + 1 < argc) return argv[i + 1];
        if (a.rfind("--config=", 0) == 0) return a.substr(9);
    }
    return "";
}

void add_common_options(CLI::App* cmd, RunConfig& cfg, std::string& config_path) {
    cmd->add_option("--config", config_path,
                    "key=value config file; flags override file values");
    cmd->add_option("--dataset", cfg.dataset, "dataset directory with the four CSV files");
    cmd->add_option("--sbm", cfg.sbm,
                    "synthetic spec, e.g. classes=2,per_class=100,p_in=0.02,p_out=0.2");
    cmd->add_option("--model", cfg.model, "gcn|gat|uygcn|uygat|grand|acmp");
    cmd->add_option("--cn-mult", cfg.cn_mult, "CN multiplicity m; K = m*C");
    cmd->add_option("--cn-cn", cfg.cn_cn, "CN-CN block policy: none|negative|identity")
        ->check(CLI::IsMember({"none", "negative", "identity"}));
    cmd->add_option("--cn-features", cfg.cn_features, "class_mean|learnable|zeros")
        ->check(CLI::IsMember({"class_mean", "learnable", "zeros"}));
    cmd->add_option("--delta", cfg.delta, "double-well coefficient");
    cmd->add_option("--beta", cfg.beta, "acmp repulsion constant");
    cmd->add_option("--lr", cfg.lr, "learning rate");
    cmd->add_option("--weight-decay", cfg.weight_decay, "L2 penalty");
    cmd->add_option("--dropout", cfg.dropout, "input dropout probability");
    cmd->add_option("--hidden", cfg.hidden, "hidden width");
    cmd->add_option("--depth", cfg.depth, "number of layers");
    cmd->add_option("--epochs", cfg.epochs, "maximum training epochs");
    cmd->add_option("--seeds", cfg.seeds, "comma-separated seed list");
    cmd->add_option("--out", cfg.out, "output directory");
    cmd->add_option("--per-class-train", cfg.per_class_train, "train nodes per class");
    cmd->add_option("--val-fraction", cfg.val_fraction, "validation share of the remainder");
    cmd->add_option("--dt", cfg.dt, "integration step size");
    cmd->add_option("--horizon", cfg.horizon, "integration horizon");
    cmd->add_option("--c-prime", cfg.c_prime, "flocking separation threshold");
    cmd->add_option("--window", cfg.window, "flocking trailing window (samples)");
    cmd->add_option("--probe-iterations", cfg.probe_iterations, "OSM probe iterations");
    cmd->add_option("--sens-r", cfg.sens_r, "sensitivity depth r");
    cmd->add_option("--sens-pairs", cfg.sens_pairs, "sensitivity pair count");
    cmd->add_option("--m-list", cfg.m_list, "sweep multiplicities, e.g. 1,2,3,4,5");
}

std::vector<std::uint64_t> parse_seed_list(const std::string& s) {
    std::vector<std::uint64_t> seeds;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            seeds.push_back(std::stoull(item));
        } catch (const std::exception&) {
            throw UsageError("bad seed '" + item + "' in --seeds");
        }
    }
    if (seeds.empty()) throw UsageError("--seeds is empty");
    return seeds;
}

std::vector<int> parse_int_list(const std::string& s, const char* flag) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            out.push_back(std::stoi(item));
        } catch (const std::exception&) {
            throw UsageError(std::string("bad value '") + item + "' in " + flag);
        }
    }
    return out;
}

SbmSpec parse_sbm_spec(const std::string& s, std::uint64_t seed) {
    SbmSpec spec;
    spec.seed = seed;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos) throw UsageError("bad --sbm entry '" + item + "'");
        std::string key = item.substr(0, eq);
        std::string val = item.substr(eq + 1);
        try {
            if (key == "classes") spec.num_classes = std::stoi(val);
            else if (key == "per_class") spec.nodes_per_class = std::stoi(val);
            else if (key == "p_in") spec.p_in = std::stod(val);
            else if (key == "p_out") spec.p_out = std::stod(val);
            else if (key == "dim") spec.feature_dim = std::stoi(val);
            else if (key == "separation") spec.separation = std::stod(val);
            else if (key == "noise") spec.feature_noise = std::stod(val);
            else if (key == "connected") spec.require_connected = std::stoi(val) != 0;
            else if (key == "seed") spec.seed = std::stoull(val);
            else throw UsageError("unknown --sbm key '" + key + "'");
        } catch (const UsageError&) {
            throw;
        } catch (const std::exception&) {
            throw UsageError("bad --sbm value '" + item + "'");
        }
    }
    return spec;
}

void write_atomic(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw DataError("cannot open " + tmp.string());
        out << content;
    }
    fs::rename(tmp, path);
}

CnCnPolicy parse_cn_cn(const std::string& s) {
    if (s == "none") return CnCnPolicy::none;
    if (s == "negative") return CnCnPolicy::negative;
    if (s == "identity") return CnCnPolicy::identity_block;
    throw UsageError("unknown --cn-cn policy '" + s + "'");
}

CnFeaturePolicy parse_cn_features(const std::string& s) {
    if (s == "class_mean") return CnFeaturePolicy::class_mean_linear;
    if (s == "learnable") return CnFeaturePolicy::learnable_embedding;
    if (s == "zeros") return CnFeaturePolicy::zeros;
    throw UsageError("unknown --cn-features policy '" + s + "'");
}

// Dataset directory or SBM spec; splits come from the files when present,
// otherwise from the stratified splitter.
DatasetBundle acquire_data(const RunConfig& cfg, std::uint64_t seed) {
    DatasetBundle bundle;
    if (!cfg.dataset.empty() && !cfg.sbm.empty())
        throw UsageError("--dataset and --sbm are mutually exclusive");
    if (cfg.dataset.empty() && cfg.sbm.empty())
        throw UsageError("one of --dataset or --sbm is required");
    if (!cfg.dataset.empty()) {
        bundle = load_dataset(cfg.dataset);
    } else {
        bundle = generate_sbm(parse_sbm_spec(cfg.sbm, seed));
    }
    auto& g = bundle.graph;
    const bool has_split = std::count(g.train_mask.begin(), g.train_mask.end(), 1) > 0 ||
                           std::count(g.val_mask.begin(), g.val_mask.end(), 1) > 0 ||
                           std::count(g.test_mask.begin(), g.test_mask.end(), 1) > 0;
    if (!has_split) {
        auto masks = make_split(g, cfg.per_class_train, cfg.val_fraction, seed);
        g.train_mask = masks.train;
        g.val_mask = masks.val;
        g.test_mask = masks.test;
    }
    return bundle;
}

TrainConfig train_config_of(const RunConfig& cfg, std::uint64_t seed) {
    TrainConfig tc;
    tc.lr = cfg.lr;
    tc.weight_decay = cfg.weight_decay;
    tc.dropout = cfg.dropout;
    tc.hidden_dim = cfg.hidden;
    tc.depth = cfg.depth;
    tc.epochs_max = cfg.epochs;
    tc.seed = seed;
    tc.delta = cfg.delta;
    tc.beta = cfg.beta;
    return tc;
}

AugmentedGraph augment_for(const RunConfig& cfg, const LabeledGraph& graph, std::uint64_t seed) {
    long train_count = std::count(graph.train_mask.begin(), graph.train_mask.end(), 1);
    if (train_count == 0) throw DataError("empty train mask: collapsing nodes need labels");
    Rng rng(seed);
    return augment(graph, cfg.cn_mult, parse_cn_cn(cfg.cn_cn), parse_cn_features(cfg.cn_features),
                   false, rng);
}

// ---------------------------------------------------------------------------

int cmd_augment(const RunConfig& cfg) {
    auto seeds = parse_seed_list(cfg.seeds);
    auto bundle = acquire_data(cfg, seeds[0]);
    auto aug = augment_for(cfg, bundle.graph, seeds[0]);

    std::ostringstream edges;
    write_augmented_edge_csv(aug, edges);
    write_atomic(fs::path(cfg.out) / "edges_augmented.csv", edges.str());

    std::ostringstream cmat;
    cmat << "node_id";
    for (int k = 0; k < aug.connections.cols; ++k) cmat << ",cn" << k;
    cmat << "\n";
    for (int i = 0; i < aug.connections.rows; ++i) {
        cmat << i;
        for (int k = 0; k < aug.connections.cols; ++k) cmat << ',' << aug.connections.get(i, k);
        cmat << "\n";
    }
    write_atomic(fs::path(cfg.out) / "connection_matrix.csv", cmat.str());

    int train_count =
        static_cast<int>(std::count(bundle.graph.train_mask.begin(),
                                    bundle.graph.train_mask.end(), 1));
    json j;
    j["command"] = "augment";
    j["config"] = cfg.to_json();
    j["seed"] = seeds[0];
    j["dataset"] = json::parse(dataset_summary_json(bundle));
    j["num_collapsing_nodes"] = aug.cns.count;
    j["negative_edge_count"] = count_negative_edges(aug.a_c);
    j["theorem_bound"] = theorem_negative_edge_bound(aug.cns.count, train_count);
    write_atomic(fs::path(cfg.out) / "augment_summary.json", j.dump(2) + "\n");
    log_info("augment: wrote " + cfg.out);
    return 0;
}

int cmd_train(const RunConfig& cfg) {
    ModelKind kind = parse_model_kind(cfg.model);
    auto seeds = parse_seed_list(cfg.seeds);
    std::vector<double> accs;
    json per_seed = json::array();

    for (std::uint64_t seed : seeds) {
        auto bundle = acquire_data(cfg, seed);
        TrainConfig tc = train_config_of(cfg, seed);
        TrainResult result;
        if (kind_uses_cns(kind)) {
            auto aug = augment_for(cfg, bundle.graph, seed);
            result = train(aug, kind, tc);
        } else {
            result = train(bundle.graph, kind, tc);
        }
        if (result.metrics.diverged && result.metrics.best_epoch < 0)
            throw NumericalError("training diverged before any checkpoint (seed " +
                                 std::to_string(seed) + ")");

        std::ostringstream lines;
        for (std::size_t e = 0; e < result.metrics.train_loss.size(); ++e) {
            json row;
            row["epoch"] = e;
            row["train_loss"] = result.metrics.train_loss[e];
            row["train_acc"] = result.metrics.train_acc[e];
            row["val_loss"] = result.metrics.val_loss[e];
            row["val_acc"] = result.metrics.val_acc[e];
            row["dirichlet"] = result.metrics.dirichlet[e];
            lines << row.dump() << "\n";
        }
        write_atomic(fs::path(cfg.out) / ("metrics_seed" + std::to_string(seed) + ".jsonl"),
                     lines.str());
        fs::create_directories(cfg.out);
        save_checkpoint(result.params,
                        (fs::path(cfg.out) / ("checkpoint_seed" + std::to_string(seed) + ".txt"))
                            .string());

        json s;
        s["seed"] = seed;
        s["test_accuracy"] = result.metrics.test_accuracy;
        s["test_macro_f1"] = result.metrics.test_macro_f1;
        s["best_epoch"] = result.metrics.best_epoch;
        s["diverged"] = result.metrics.diverged;
        per_seed.push_back(s);
        accs.push_back(result.metrics.test_accuracy);
        log_info("train: seed " + std::to_string(seed) + " test acc " +
                 std::to_string(result.metrics.test_accuracy));
    }

    double mean = 0.0;
    for (double a : accs) mean += a;
    mean /= accs.size();
    double var = 0.0;
    for (double a : accs) var += (a - mean) * (a - mean);
    double stddev = accs.size() > 1 ? std::sqrt(var / (accs.size() - 1)) : 0.0;

    json j;
    j["command"] = "train";
    j["config"] = cfg.to_json();
    j["model"] = cfg.model;
    j["seeds"] = seeds;
    j["per_seed"] = per_seed;
    j["mean_test_accuracy"] = mean;
    j["std_test_accuracy"] = stddev;
    write_atomic(fs::path(cfg.out) / "train_summary.json", j.dump(2) + "\n");
    std::printf("%s: test accuracy %.4f +/- %.4f over %zu seed(s)\n", cfg.model.c_str(), mean,
                stddev, accs.size());
    return 0;
}

int cmd_diagnose(const RunConfig& cfg) {
    auto seeds = parse_seed_list(cfg.seeds);
    const std::uint64_t seed = seeds[0];
    auto bundle = acquire_data(cfg, seed);
    auto aug = augment_for(cfg, bundle.graph, seed);

    json j;
    j["command"] = "diagnose";
    j["config"] = cfg.to_json();
    j["seed"] = seed;

    { // signed spectrum vs the negative-eigenvalue budget
        auto rep = spectrum_report(aug);
        json s;
        s["negative_count"] = rep.negative_count;
        s["theorem_bound"] = rep.theorem_bound;
        s["edge_negative_count"] = rep.edge_negative_count;
        s["bound_violated"] = rep.bound_violated;
        s["min_eigenvalue"] = rep.eigenvalues.front();
        s["max_eigenvalue"] = rep.eigenvalues.back();
        j["spectrum"] = s;
        std::ostringstream csv;
        csv << "index,eigenvalue\n";
        char buf[64];
        for (std::size_t k = 0; k < rep.eigenvalues.size(); ++k) {
            std::snprintf(buf, sizeof buf, "%.17g", rep.eigenvalues[k]);
            csv << k << ',' << buf << '\n';
        }
        write_atomic(fs::path(cfg.out) / "eigenvalues.csv", csv.str());
    }

    { // OSM probe, baseline vs augmented
        CsrMatrix plain = normalize_rw(adjacency_matrix(bundle.graph), true);
        auto base = osm_fixed_point_probe(plain, bundle.graph.num_nodes, cfg.probe_iterations,
                                          1e-6, seed);
        CsrMatrix a_hat = normalize_rw(aug.a_c, true);
        auto probe = osm_fixed_point_probe(a_hat, bundle.graph.num_nodes, cfg.probe_iterations,
                                           1e-3, seed);
        json s;
        s["baseline_x_std"] = base.x_block_std;
        s["baseline_collapsed"] = base.converged_to_constant;
        s["augmented_x_std"] = probe.x_block_std;
        s["augmented_collapsed"] = probe.converged_to_constant;
        j["osm_probe"] = s;
    }

    { // OSQ sensitivity bound
        TrainConfig tc = train_config_of(cfg, seed);
        tc.depth = std::max(cfg.sens_r, 1);
        Rng prng(seed);
        ModelParams params = init_params(ModelKind::uygcn, bundle.graph.feature_dim(),
                                         bundle.graph.num_classes, aug.cn_features, false, tc,
                                         prng);
        CsrMatrix a_hat = to_csr(normalize_sym(aug.a_c, true));
        Matrix x(aug.total_nodes(), bundle.graph.feature_dim());
        for (int i = 0; i < bundle.graph.num_nodes; ++i)
            for (int f = 0; f < x.cols(); ++f) x(i, f) = bundle.graph.features(i, f);
        for (int k = 0; k < aug.cns.count; ++k)
            for (int f = 0; f < x.cols(); ++f)
                x(bundle.graph.num_nodes + k, f) = aug.cn_features(k, f);
        Rng prng2(seed + 1);
        std::vector<std::pair<int, int>> pairs;
        for (int k = 0; k < cfg.sens_pairs; ++k)
            pairs.emplace_back(prng2.uniform_int(0, aug.total_nodes() - 1),
                               prng2.uniform_int(0, aug.total_nodes() - 1));
        auto rep = sensitivity_check(params.w_in, a_hat, x, cfg.sens_r, 1.0, pairs);
        json s;
        s["r"] = rep.r;
        s["alpha"] = rep.alpha;
        s["beta_in"] = rep.beta_in;
        s["pairs_checked"] = rep.pairs.size();
        int violations = 0;
        for (const auto& p : rep.pairs)
            if (!p.satisfied) ++violations;
        s["violations"] = violations;
        s["all_satisfied"] = rep.all_satisfied;
        j["osq_sensitivity"] = s;
    }

    { // curvature deltas
        auto rep = curvature_delta_report(bundle.graph, aug);
        json s;
        s["edges"] = rep.edges.size();
        s["min_delta"] = rep.min_delta;
        s["mean_delta"] = rep.mean_delta;
        j["curvature"] = s;
    }

    write_atomic(fs::path(cfg.out) / "diagnose_report.json", j.dump(2) + "\n");
    log_info("diagnose: wrote " + cfg.out);
    return 0;
}

int cmd_simulate(const RunConfig& cfg) {
    auto seeds = parse_seed_list(cfg.seeds);
    const std::uint64_t seed = seeds[0];
    auto bundle = acquire_data(cfg, seed);

    DynamicsSpec spec;
    spec.step_size = cfg.dt;
    spec.horizon = cfg.horizon;
    spec.delta = cfg.delta;
    spec.beta = cfg.beta;

    CsrMatrix a_c;
    SignedMatrix a_y;
    bool use_ay = false;
    Matrix h0;
    const int n = bundle.graph.num_nodes;

    if (cfg.model == "grand" || cfg.model == "acmp") {
        spec.variant = cfg.model == "grand" ? DynamicsVariant::grand : DynamicsVariant::acmp;
        a_c = to_csr(normalize_sym(adjacency_matrix(bundle.graph), true));
        h0 = bundle.graph.features;
    } else if (cfg.model == "uygcn" || cfg.model == "uygat" || cfg.model == "label_universe") {
        auto aug = augment_for(cfg, bundle.graph, seed);
        a_c = to_csr(normalize_sym(aug.a_c, true));
        h0 = Matrix(aug.total_nodes(), bundle.graph.feature_dim());
        for (int i = 0; i < n; ++i)
            for (int f = 0; f < h0.cols(); ++f) h0(i, f) = bundle.graph.features(i, f);
        for (int k = 0; k < aug.cns.count; ++k)
            for (int f = 0; f < h0.cols(); ++f) h0(n + k, f) = aug.cn_features(k, f);
        if (cfg.model == "uygcn") spec.variant = DynamicsVariant::uygcn;
        if (cfg.model == "uygat") {
            spec.variant = DynamicsVariant::uygat;
            Rng arng(seed + 17);
            spec.attention_params.resize(2 * h0.cols());
            for (double& v : spec.attention_params) v = arng.normal();
        }
        if (cfg.model == "label_universe") {
            spec.variant = DynamicsVariant::label_universe;
            a_y = build_label_adjacency(bundle.graph);
            use_ay = true;
        }
    } else {
        throw UsageError("unknown simulation variant '" + cfg.model + "'");
    }

    auto traj = integrate_euler(spec, a_c, use_ay ? &a_y : nullptr, h0);

    std::ostringstream csv;
    csv << "t,node_id,component_id,value\n";
    char buf[64];
    for (std::size_t s = 0; s < traj.states.size(); ++s)
        for (int i = 0; i < traj.states[s].rows(); ++i)
            for (int f = 0; f < traj.states[s].cols(); ++f) {
                std::snprintf(buf, sizeof buf, "%.17g", traj.states[s](i, f));
                csv << traj.times[s] << ',' << i << ',' << f << ',' << buf << '\n';
            }
    write_atomic(fs::path(cfg.out) / "trajectory.csv", csv.str());

    // flocking over the two largest classes of original nodes
    std::vector<int> group1, group2;
    std::vector<int> counts(bundle.graph.num_classes, 0);
    for (int v = 0; v < n; ++v)
        if (bundle.graph.labeled(v)) ++counts[bundle.graph.labels[v]];
    int c1 = 0, c2 = 1;
    if (bundle.graph.num_classes > 1 && counts[c2] > counts[c1]) std::swap(c1, c2);
    for (int c = 2; c < bundle.graph.num_classes; ++c) {
        if (counts[c] > counts[c1]) {
            c2 = c1;
            c1 = c;
        } else if (counts[c] > counts[c2]) {
            c2 = c;
        }
    }
    for (int v = 0; v < n; ++v) {
        if (!bundle.graph.labeled(v)) continue;
        if (bundle.graph.labels[v] == c1) group1.push_back(v);
        if (bundle.graph.labels[v] == c2) group2.push_back(v);
    }

    json j;
    j["command"] = "simulate";
    j["config"] = cfg.to_json();
    j["seed"] = seed;
    j["explosive"] = traj.explosive();
    if (traj.diverged_at) j["diverged_at"] = *traj.diverged_at;
    j["steps_recorded"] = traj.states.size();
    if (!group1.empty() && !group2.empty() &&
        static_cast<int>(traj.states.size()) > cfg.window) {
        auto rep = detect_bicluster_flocking(traj, group1, group2, cfg.c_prime, cfg.window);
        json fl;
        fl["flocked"] = rep.flocked;
        fl["within_diameter_1"] = rep.within_diameter_1;
        fl["within_diameter_2"] = rep.within_diameter_2;
        fl["between_separation"] = rep.between_separation;
        if (rep.t_star) fl["t_star"] = *rep.t_star;
        fl["c_prime"] = cfg.c_prime;
        fl["group_classes"] = {c1, c2};
        j["flocking"] = fl;
    }
    write_atomic(fs::path(cfg.out) / "flocking.json", j.dump(2) + "\n");
    log_info("simulate: wrote " + cfg.out);
    return 0;
}

int cmd_sweep(const RunConfig& cfg) {
    ModelKind kind = parse_model_kind(cfg.model);
    if (!kind_uses_cns(kind))
        throw UsageError("sweep varies collapsing nodes; --model must be uygcn or uygat");
    auto seeds = parse_seed_list(cfg.seeds);
    std::vector<int> mults =
        cfg.m_list.empty() ? std::vector<int>{1, 2, 3, 4, 5} : parse_int_list(cfg.m_list, "--m-list");
    if (mults.empty()) throw UsageError("--m-list is empty");

    json rows = json::array();
    std::ostringstream csv;
    csv << "multiplicity,K,mean_test_accuracy,std_test_accuracy\n";
    for (int m : mults) {
        std::vector<double> accs;
        int k_count = 0;
        for (std::uint64_t seed : seeds) {
            auto bundle = acquire_data(cfg, seed);
            RunConfig local = cfg;
            local.cn_mult = m;
            auto aug = augment_for(local, bundle.graph, seed);
            k_count = aug.cns.count;
            TrainConfig tc = train_config_of(cfg, seed);
            TrainResult result = train(aug, kind, tc);
            accs.push_back(result.metrics.test_accuracy);
        }
        double mean = 0.0;
        for (double a : accs) mean += a;
        mean /= accs.size();
        double var = 0.0;
        for (double a : accs) var += (a - mean) * (a - mean);
        double stddev = accs.size() > 1 ? std::sqrt(var / (accs.size() - 1)) : 0.0;
        csv << m << ',' << k_count << ',' << mean << ',' << stddev << '\n';
        json row;
        row["multiplicity"] = m;
        row["K"] = k_count;
        row["mean_test_accuracy"] = mean;
        row["std_test_accuracy"] = stddev;
        rows.push_back(row);
        log_info("sweep: m=" + std::to_string(m) + " acc " + std::to_string(mean));
    }
    write_atomic(fs::path(cfg.out) / "sweep.csv", csv.str());
    json j;
    j["command"] = "sweep";
    j["config"] = cfg.to_json();
    j["seeds"] = seeds;
    j["rows"] = rows;
    write_atomic(fs::path(cfg.out) / "sweep_summary.json", j.dump(2) + "\n");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"label-guided signed-graph augmentation for graph neural diffusion"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string config_path;
    auto* augment_cmd = app.add_subcommand("augment", "build and export the CN-augmented graph");
    auto* train_cmd = app.add_subcommand("train", "train a model over a seed list");
    auto* diagnose_cmd = app.add_subcommand("diagnose", "spectrum/OSM/OSQ/curvature reports");
    auto* simulate_cmd = app.add_subcommand("simulate", "integrate the diffusion dynamics");
    auto* sweep_cmd = app.add_subcommand("sweep", "accuracy across CN multiplicities");
    for (auto* cmd : {augment_cmd, train_cmd, diagnose_cmd, simulate_cmd, sweep_cmd})
        add_common_options(cmd, cfg, config_path);

    try {
        if (std::string file = find_config_arg(argc, argv); !file.empty())
            apply_config_file(file, cfg);
        app.parse(argc, argv);
        if (augment_cmd->parsed()) return cmd_augment(cfg);
        if (train_cmd->parsed()) return cmd_train(cfg);
        if (diagnose_cmd->parsed()) return cmd_diagnose(cfg);
        if (simulate_cmd->parsed()) return cmd_simulate(cfg);
        if (sweep_cmd->parsed()) return cmd_sweep(cfg);
        return 1;
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const UsageError& e) {
        std::fprintf(stderr, "uygraph: usage error: %s\n", e.what());
        return 1;
    } catch (const DataError& e) {
        std::fprintf(stderr, "uygraph: data error: %s\n", e.what());
        return 2;
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "uygraph: numerical error: %s\n", e.what());
        return 3;
    }
}
