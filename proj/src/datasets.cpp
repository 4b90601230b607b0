#include "uygraph/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <queue>
#include <sstream>

#include <nlohmann/json.hpp>

#include "uygraph/graph_core.hpp"

namespace uygraph {

double SbmSpec::expected_homophily() const {
    const double n = nodes_per_class;
    const double same = (n - 1.0) * p_in;
    const double diff = n * (num_classes - 1) * p_out;
    return same + diff == 0.0 ? 0.0 : same / (same + diff);
}

namespace {

struct CsvReader {
    std::string path;
    std::ifstream in;
    int line_no = 0;

    explicit CsvReader(const std::string& p) : path(p), in(p) {
        if (!in) throw DataError("missing file: " + p);
    }

    bool next(std::vector<std::string>& fields) {
        std::string line;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            fields.clear();
            std::size_t start = 0;
            while (true) {
                std::size_t comma = line.find(',', start);
                if (comma == std::string::npos) {
                    fields.push_back(line.substr(start));
                    break;
                }
                fields.push_back(line.substr(start, comma - start));
                start = comma + 1;
            }
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& why) const {
        throw DataError(path + ":" + std::to_string(line_no) + ": " + why);
    }

    int parse_int(const std::string& s) const {
        int v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size()) fail("expected integer, got '" + s + "'");
        return v;
    }

    double parse_double(const std::string& s) const {
        try {
            std::size_t pos = 0;
            double v = std::stod(s, &pos);
            if (pos != s.size()) fail("expected number, got '" + s + "'");
            return v;
        } catch (const std::exception&) {
            fail("expected number, got '" + s + "'");
        }
    }
};

std::uint64_t fnv1a_file(const std::string& path, std::uint64_t h) {
    std::ifstream in(path, std::ios::binary);
    char buf[4096];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ULL;
        }
    }
    return h;
}

} // namespace

DatasetBundle load_dataset(const std::string& dir) {
    DatasetBundle bundle;
    bundle.source_path = dir;
    bundle.name = dir;
    if (auto slash = dir.find_last_of('/'); slash != std::string::npos && slash + 1 < dir.size())
        bundle.name = dir.substr(slash + 1);
    LabeledGraph& g = bundle.graph;

    std::vector<std::string> f;

    { // features.csv fixes N and d0
        CsvReader r(dir + "/features.csv");
        if (!r.next(f) || f.empty() || f[0] != "node_id") r.fail("expected header node_id,f0,...");
        const int d = static_cast<int>(f.size()) - 1;
        std::vector<std::vector<double>> rows;
        std::vector<int> ids;
        while (r.next(f)) {
            if (static_cast<int>(f.size()) != d + 1) r.fail("wrong column count");
            ids.push_back(r.parse_int(f[0]));
            std::vector<double> feat(d);
            for (int k = 0; k < d; ++k) feat[k] = r.parse_double(f[k + 1]);
            rows.push_back(std::move(feat));
        }
        g.num_nodes = static_cast<int>(rows.size());
        g.features = Matrix(g.num_nodes, d);
        std::vector<char> seen(g.num_nodes, 0);
        for (std::size_t k = 0; k < rows.size(); ++k) {
            int id = ids[k];
            if (id < 0 || id >= g.num_nodes)
                throw DataError(dir + "/features.csv: node id " + std::to_string(id) +
                                " out of range [0, " + std::to_string(g.num_nodes) + ")");
            if (seen[id]) throw DataError(dir + "/features.csv: duplicate node id " + std::to_string(id));
            seen[id] = 1;
            for (int j = 0; j < d; ++j) g.features(id, j) = rows[k][j];
        }
    }

    { // edges.csv
        CsvReader r(dir + "/edges.csv");
        if (!r.next(f) || f.size() != 2 || f[0] != "src" || f[1] != "dst")
            r.fail("expected header src,dst");
        int dropped = 0;
        while (r.next(f)) {
            if (f.size() != 2) r.fail("wrong column count");
            int a = r.parse_int(f[0]);
            int b = r.parse_int(f[1]);
            if (a < 0 || b < 0 || a >= g.num_nodes || b >= g.num_nodes)
                r.fail("edge endpoint out of range");
            g.edges.emplace_back(a, b);
        }
        dropped = canonicalize_edges(g.edges);
        if (dropped > 0)
            std::fprintf(stderr, "uygraph: warning: dropped %d self-loop(s) in %s/edges.csv\n",
                         dropped, dir.c_str());
    }

    { // labels.csv (unlabeled nodes omitted)
        CsvReader r(dir + "/labels.csv");
        if (!r.next(f) || f.size() != 2 || f[0] != "node_id" || f[1] != "label")
            r.fail("expected header node_id,label");
        g.labels.assign(g.num_nodes, kNoLabel);
        int max_label = -1;
        while (r.next(f)) {
            if (f.size() != 2) r.fail("wrong column count");
            int id = r.parse_int(f[0]);
            int lab = r.parse_int(f[1]);
            if (id < 0 || id >= g.num_nodes) r.fail("node id out of range");
            if (lab < 0) r.fail("negative label");
            g.labels[id] = lab;
            max_label = std::max(max_label, lab);
        }
        g.num_classes = max_label + 1;
    }

    { // splits.csv
        CsvReader r(dir + "/splits.csv");
        if (!r.next(f) || f.size() != 2 || f[0] != "node_id" || f[1] != "split")
            r.fail("expected header node_id,split");
        g.train_mask.assign(g.num_nodes, 0);
        g.val_mask.assign(g.num_nodes, 0);
        g.test_mask.assign(g.num_nodes, 0);
        while (r.next(f)) {
            if (f.size() != 2) r.fail("wrong column count");
            int id = r.parse_int(f[0]);
            if (id < 0 || id >= g.num_nodes) r.fail("node id out of range");
            if (g.train_mask[id] || g.val_mask[id] || g.test_mask[id])
                r.fail("node " + std::to_string(id) + " assigned to multiple splits");
            if (f[1] == "train")
                g.train_mask[id] = 1;
            else if (f[1] == "val")
                g.val_mask[id] = 1;
            else if (f[1] == "test")
                g.test_mask[id] = 1;
            else
                r.fail("unknown split '" + f[1] + "'");
        }
    }

    g.validate();
    std::uint64_t h = 1469598103934665603ULL;
    for (const char* name : {"edges.csv", "features.csv", "labels.csv", "splits.csv"})
        h = fnv1a_file(dir + "/" + name, h);
    bundle.checksum = h;
    return bundle;
}

void save_dataset(const LabeledGraph& graph, const std::string& dir) {
    auto open = [&dir](const char* name) {
        std::string path = dir + "/" + name;
        std::FILE* fp = std::fopen(path.c_str(), "w");
        if (!fp) throw DataError("save_dataset: cannot open " + path);
        return fp;
    };
    std::FILE* fp = open("edges.csv");
    std::fprintf(fp, "src,dst\n");
    for (auto [a, b] : graph.edges) std::fprintf(fp, "%d,%d\n", a, b);
    std::fclose(fp);

    fp = open("features.csv");
    std::fprintf(fp, "node_id");
    for (int j = 0; j < graph.feature_dim(); ++j) std::fprintf(fp, ",f%d", j);
    std::fprintf(fp, "\n");
    for (int i = 0; i < graph.num_nodes; ++i) {
        std::fprintf(fp, "%d", i);
        for (int j = 0; j < graph.feature_dim(); ++j)
            std::fprintf(fp, ",%.17g", graph.features(i, j));
        std::fprintf(fp, "\n");
    }
    std::fclose(fp);

    fp = open("labels.csv");
    std::fprintf(fp, "node_id,label\n");
    for (int i = 0; i < graph.num_nodes; ++i)
        if (graph.labels[i] != kNoLabel) std::fprintf(fp, "%d,%d\n", i, graph.labels[i]);
    std::fclose(fp);

    fp = open("splits.csv");
    std::fprintf(fp, "node_id,split\n");
    for (int i = 0; i < graph.num_nodes; ++i) {
        if (graph.train_mask[i]) std::fprintf(fp, "%d,train\n", i);
        else if (graph.val_mask[i]) std::fprintf(fp, "%d,val\n", i);
        else if (graph.test_mask[i]) std::fprintf(fp, "%d,test\n", i);
    }
    std::fclose(fp);
}

namespace {

bool is_connected(const LabeledGraph& g) {
    if (g.num_nodes == 0) return true;
    auto adj = g.adjacency_lists();
    std::vector<char> seen(g.num_nodes, 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    int visited = 1;
    while (!q.empty()) {
        int v = q.front();
        q.pop();
        for (int u : adj[v])
            if (!seen[u]) {
                seen[u] = 1;
                ++visited;
                q.push(u);
            }
    }
    return visited == g.num_nodes;
}

LabeledGraph sample_sbm(const SbmSpec& spec, Rng& rng) {
    LabeledGraph g;
    g.num_classes = spec.num_classes;
    g.num_nodes = spec.num_classes * spec.nodes_per_class;
    g.labels.resize(g.num_nodes);
    for (int v = 0; v < g.num_nodes; ++v) g.labels[v] = v / spec.nodes_per_class;

    for (int i = 0; i < g.num_nodes; ++i)
        for (int j = i + 1; j < g.num_nodes; ++j) {
            double p = g.labels[i] == g.labels[j] ? spec.p_in : spec.p_out;
            if (rng.bernoulli(p)) g.edges.emplace_back(i, j);
        }

    // class means: axis-aligned when the dimension allows, random otherwise
    Matrix means(spec.num_classes, spec.feature_dim);
    if (spec.feature_dim >= spec.num_classes) {
        for (int c = 0; c < spec.num_classes; ++c) means(c, c) = spec.separation;
    } else {
        for (int c = 0; c < spec.num_classes; ++c)
            for (int j = 0; j < spec.feature_dim; ++j)
                means(c, j) = spec.separation * rng.normal();
    }
    g.features = Matrix(g.num_nodes, spec.feature_dim);
    for (int v = 0; v < g.num_nodes; ++v)
        for (int j = 0; j < spec.feature_dim; ++j)
            g.features(v, j) = means(g.labels[v], j) + spec.feature_noise * rng.normal();

    g.train_mask.assign(g.num_nodes, 0);
    g.val_mask.assign(g.num_nodes, 0);
    g.test_mask.assign(g.num_nodes, 0);
    return g;
}

} // namespace

DatasetBundle generate_sbm(const SbmSpec& spec) {
    if (spec.p_in < 0.0 || spec.p_in > 1.0 || spec.p_out < 0.0 || spec.p_out > 1.0)
        throw DataError("generate_sbm: probabilities must lie in [0, 1]");
    if (spec.num_classes < 1 || spec.nodes_per_class < 1)
        throw DataError("generate_sbm: need at least one class and one node per class");
    Rng rng(spec.seed);
    DatasetBundle bundle;
    for (int attempt = 0; attempt < 20; ++attempt) {
        bundle.graph = sample_sbm(spec, rng);
        if (!spec.require_connected || is_connected(bundle.graph)) {
            bundle.graph.validate();
            std::ostringstream name;
            name << "sbm_c" << spec.num_classes << "_n" << spec.nodes_per_class << "_seed"
                 << spec.seed;
            bundle.name = name.str();
            bundle.source_path = "";
            return bundle;
        }
    }
    throw DataError("generate_sbm: no connected sample in 20 attempts");
}

SplitMasks make_split(const LabeledGraph& graph, int per_class_train, double val_fraction,
                      std::uint64_t seed) {
    if (per_class_train < 1) throw DataError("make_split: per_class_train must be >= 1");
    if (val_fraction < 0.0 || val_fraction >= 1.0)
        throw DataError("make_split: val_fraction must lie in [0, 1)");
    Rng rng(seed);
    std::vector<std::vector<int>> by_class(graph.num_classes);
    for (int v = 0; v < graph.num_nodes; ++v)
        if (graph.labeled(v)) by_class[graph.labels[v]].push_back(v);

    SplitMasks m;
    m.train.assign(graph.num_nodes, 0);
    m.val.assign(graph.num_nodes, 0);
    m.test.assign(graph.num_nodes, 0);
    std::vector<int> remainder;
    for (int c = 0; c < graph.num_classes; ++c) {
        if (by_class[c].empty())
            throw DataError("make_split: class " + std::to_string(c) + " absent");
        if (static_cast<int>(by_class[c].size()) < per_class_train)
            throw DataError("make_split: class " + std::to_string(c) +
                            " has fewer nodes than per_class_train");
        rng.shuffle(by_class[c]);
        for (int k = 0; k < per_class_train; ++k) m.train[by_class[c][k]] = 1;
        for (std::size_t k = per_class_train; k < by_class[c].size(); ++k)
            remainder.push_back(by_class[c][k]);
    }
    rng.shuffle(remainder);
    const int val_count = static_cast<int>(val_fraction * remainder.size());
    for (int k = 0; k < static_cast<int>(remainder.size()); ++k) {
        if (k < val_count)
            m.val[remainder[k]] = 1;
        else
            m.test[remainder[k]] = 1;
    }
    return m;
}

std::string dataset_summary_json(const DatasetBundle& bundle) {
    nlohmann::json j;
    j["name"] = bundle.name;
    j["source_path"] = bundle.source_path;
    j["checksum"] = bundle.checksum;
    j["num_nodes"] = bundle.graph.num_nodes;
    j["num_edges"] = bundle.graph.edges.size();
    j["num_classes"] = bundle.graph.num_classes;
    j["feature_dim"] = bundle.graph.feature_dim();
    auto h = homophily_score(bundle.graph);
    j["homophily"] = h.score;
    j["homophily_skipped_nodes"] = h.skipped;
    long tr = std::count(bundle.graph.train_mask.begin(), bundle.graph.train_mask.end(), 1);
    long va = std::count(bundle.graph.val_mask.begin(), bundle.graph.val_mask.end(), 1);
    long te = std::count(bundle.graph.test_mask.begin(), bundle.graph.test_mask.end(), 1);
    j["train_nodes"] = tr;
    j["val_nodes"] = va;
    j["test_nodes"] = te;
    return j.dump(2);
}

} // namespace uygraph
