#include "ptensor/gnn.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

#include "ptensor/error.hpp"
#include "ptensor/random.hpp"

namespace ptensor {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Graphs

Graph Graph::from_edges(std::size_t n, std::vector<std::pair<std::size_t, std::size_t>> edges) {
    Graph g;
    g.n = n;
    g.adjacency.assign(n, {});
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (auto [u, v] : edges) {
        if (u >= n || v >= n) throw ContractError("edge endpoint out of range");
        if (u == v) throw ContractError("self-loop at vertex " + std::to_string(u));
        auto e = std::minmax(u, v);
        if (!seen.insert(e).second)
            throw ContractError("duplicate edge " + std::to_string(e.first) + " " + std::to_string(e.second));
    }
    g.edges.assign(seen.begin(), seen.end());
    for (auto [u, v] : g.edges) {
        g.adjacency[u].push_back(v);
        g.adjacency[v].push_back(u);
    }
    for (auto& nb : g.adjacency) std::sort(nb.begin(), nb.end());
    return g;
}

std::vector<std::size_t> Graph::closed_neighborhood(std::size_t v) const {
    auto out = adjacency.at(v);
    out.insert(std::lower_bound(out.begin(), out.end(), v), v);
    return out;
}

namespace {

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

std::vector<std::string> tokens(const std::string& line) {
    std::istringstream is(line);
    std::vector<std::string> out;
    std::string t;
    while (is >> t) out.push_back(t);
    return out;
}

std::size_t parse_count(const std::string& tok, std::size_t line) {
    std::size_t v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size()) throw ParseError("expected a nonnegative integer, got '" + tok + "'", line);
    return v;
}

bool blank(const std::string& line) { return line.find_first_not_of(" \t") == std::string::npos; }

}  // namespace

Graph parse_graph(const std::string& text) {
    const auto lines = split_lines(text);
    if (lines.empty() || blank(lines[0])) throw ParseError("missing header 'n m'", 1);
    const auto header = tokens(lines[0]);
    if (header.size() != 2) throw ParseError("header must be 'n m'", 1);
    const std::size_t n = parse_count(header[0], 1), m = parse_count(header[1], 1);
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    std::set<std::pair<std::size_t, std::size_t>> seen;
    std::size_t line_no = 1;
    for (; line_no < lines.size() && edges.size() < m; ++line_no) {
        const auto tok = tokens(lines[line_no]);
        if (tok.size() != 2) throw ParseError("edge line must be 'u v'", line_no + 1);
        const std::size_t u = parse_count(tok[0], line_no + 1), v = parse_count(tok[1], line_no + 1);
        if (u >= n || v >= n) throw ParseError("vertex out of range (n = " + std::to_string(n) + ")", line_no + 1);
        if (u == v) throw ParseError("self-loop", line_no + 1);
        if (!seen.insert(std::minmax(u, v)).second) throw ParseError("duplicate edge", line_no + 1);
        edges.emplace_back(u, v);
    }
    if (edges.size() < m)
        throw ParseError("expected " + std::to_string(m) + " edges, found " + std::to_string(edges.size()), line_no + 1);
    for (; line_no < lines.size(); ++line_no)
        if (!blank(lines[line_no])) throw ParseError("unexpected content after the edge list", line_no + 1);
    return Graph::from_edges(n, std::move(edges));
}

Matrix<double> parse_features(const std::string& text, std::size_t n) {
    const auto lines = split_lines(text);
    std::vector<double> data;
    std::size_t channels = 0, rows = 0;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (blank(lines[i])) continue;
        const auto tok = tokens(lines[i]);
        if (rows == 0) channels = tok.size();
        if (tok.size() != channels)
            throw ParseError("expected " + std::to_string(channels) + " values, got " + std::to_string(tok.size()), i + 1);
        for (const auto& t : tok) {
            try {
                std::size_t used = 0;
                double v = std::stod(t, &used);
                if (used != t.size() || !std::isfinite(v)) throw std::invalid_argument(t);
                data.push_back(v);
            } catch (const std::exception&) {
                throw ParseError("not a number: '" + t + "'", i + 1);
            }
        }
        ++rows;
    }
    if (rows != n) throw ParseError("expected " + std::to_string(n) + " feature rows, got " + std::to_string(rows));
    if (n > 0 && channels == 0) throw ParseError("feature rows are empty");
    return Matrix<double>(n, channels, std::move(data));
}

Graph relabel_graph(const Graph& g, const Permutation& perm) {
    if (perm.size() != g.n) throw ContractError("relabeling permutation size does not match the graph");
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    edges.reserve(g.edges.size());
    for (auto [u, v] : g.edges) edges.emplace_back(perm[u], perm[v]);
    return Graph::from_edges(g.n, std::move(edges));
}

template <class Scalar>
Matrix<Scalar> relabel_features(const Matrix<Scalar>& features, const Permutation& perm) {
    if (perm.size() != features.rows()) throw ContractError("relabeling permutation size does not match the features");
    Matrix<Scalar> out(features.rows(), features.cols());
    for (std::size_t v = 0; v < features.rows(); ++v)
        for (std::size_t c = 0; c < features.cols(); ++c) out(perm[v], c) = features(v, c);
    return out;
}

Matrix<std::int64_t> integer_features(const Matrix<double>& features) {
    Matrix<std::int64_t> out(features.rows(), features.cols());
    for (std::size_t i = 0; i < features.data().size(); ++i) {
        const double v = features.data()[i];
        if (v != std::floor(v) || std::abs(v) > 9.0e15) throw ContractError("integer mode requires integral features");
        out.data()[i] = static_cast<std::int64_t>(v);
    }
    return out;
}

Matrix<double> default_features(std::size_t n) { return Matrix<double>(n, 1, 1.0); }

// ---------------------------------------------------------------------------
// Domain policies

std::string DomainPolicy::to_string() const {
    switch (kind) {
    case Kind::Vertices: return "vertices";
    case Kind::Edges: return "edges";
    case Kind::Ball: return radius ? "ball(" + std::to_string(*radius) + ")" : "ball";
    case Kind::SubgraphList: return "subgraph-list";
    }
    return "?";
}

DomainPolicy parse_policy(const std::string& text) {
    DomainPolicy p;
    if (text == "vertices") {
        p.kind = DomainPolicy::Kind::Vertices;
    } else if (text == "edges") {
        p.kind = DomainPolicy::Kind::Edges;
    } else if (text == "ball") {
        p.kind = DomainPolicy::Kind::Ball;
    } else if (text.rfind("ball(", 0) == 0 && text.back() == ')') {
        p.kind = DomainPolicy::Kind::Ball;
        const std::string inner = text.substr(5, text.size() - 6);
        int r = -1;
        auto [ptr, ec] = std::from_chars(inner.data(), inner.data() + inner.size(), r);
        if (ec != std::errc() || ptr != inner.data() + inner.size() || r < 0)
            throw ConfigError("invalid ball radius in policy '" + text + "'");
        p.radius = r;
    } else if (text == "subgraph-list") {
        p.kind = DomainPolicy::Kind::SubgraphList;
    } else {
        throw ConfigError("unknown domain policy '" + text + "'");
    }
    return p;
}

RefDomain ball_domain(const Graph& g, std::size_t v, int radius) {
    if (v >= g.n) throw ContractError("ball center out of range");
    if (radius < 0) throw ContractError("negative ball radius");
    std::vector<int> dist(g.n, -1);
    std::deque<std::size_t> queue{v};
    dist[v] = 0;
    std::vector<std::uint64_t> others;
    while (!queue.empty()) {
        const auto u = queue.front();
        queue.pop_front();
        if (dist[u] == radius) continue;
        for (auto w : g.adjacency[u]) {
            if (dist[w] >= 0) continue;
            dist[w] = dist[u] + 1;
            others.push_back(w);
            queue.push_back(w);
        }
    }
    std::sort(others.begin(), others.end());
    others.insert(others.begin(), v);
    return RefDomain::from_ids(others);
}

std::vector<RefDomain> build_domains(const Graph& g, const DomainPolicy& policy) {
    std::vector<RefDomain> out;
    switch (policy.kind) {
    case DomainPolicy::Kind::Vertices:
        for (std::size_t v = 0; v < g.n; ++v) out.push_back(RefDomain{v});
        break;
    case DomainPolicy::Kind::Edges:
        for (auto [u, v] : g.edges) out.push_back(RefDomain{u, v});
        break;
    case DomainPolicy::Kind::Ball:
        if (!policy.radius) throw ContractError("ball policy needs an explicit radius to build domains");
        for (std::size_t v = 0; v < g.n; ++v) out.push_back(ball_domain(g, v, *policy.radius));
        break;
    case DomainPolicy::Kind::SubgraphList:
        for (const auto& s : policy.subgraphs) {
            if (s.empty()) throw ContractError("empty subgraph in subgraph-list policy");
            for (auto v : s)
                if (v >= g.n) throw ContractError("subgraph vertex " + std::to_string(v) + " out of range");
            out.push_back(RefDomain::from_ids(std::vector<std::uint64_t>(s.begin(), s.end())));
        }
        break;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Configuration

const char* to_string(LayerKind k) {
    switch (k) {
    case LayerKind::Mpnn: return "mpnn";
    case LayerKind::Edge: return "edge";
    case LayerKind::Unite: return "unite";
    case LayerKind::Subgraph: return "subgraph";
    }
    return "?";
}

const char* to_string(NumericMode m) { return m == NumericMode::Integer ? "integer" : "float"; }

namespace {

LayerKind parse_kind(const std::string& s, int layer) {
    if (s == "mpnn") return LayerKind::Mpnn;
    if (s == "edge") return LayerKind::Edge;
    if (s == "unite") return LayerKind::Unite;
    if (s == "subgraph") return LayerKind::Subgraph;
    throw ConfigError("unknown layer kind '" + s + "'", layer);
}

DomainPolicy default_policy(LayerKind k) {
    DomainPolicy p;
    switch (k) {
    case LayerKind::Mpnn: p.kind = DomainPolicy::Kind::Vertices; break;
    case LayerKind::Edge: p.kind = DomainPolicy::Kind::Edges; break;
    case LayerKind::Unite: p.kind = DomainPolicy::Kind::Ball; break;
    case LayerKind::Subgraph: p.kind = DomainPolicy::Kind::SubgraphList; break;
    }
    return p;
}

DomainPolicy::Kind expected_policy(LayerKind k) { return default_policy(k).kind; }

}  // namespace

ModelConfig parse_model_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("model config is not valid JSON: ") + e.what());
    }
    ModelConfig cfg;
    int current = -1;
    try {
        if (!j.is_object()) throw ConfigError("model config must be a JSON object");
        for (const auto& [key, value] : j.items())
            if (key != "v" && key != "layers" && key != "numeric") throw ConfigError("unknown model field '" + key + "'");
        if (!j.contains("v") || j.at("v").get<int>() != 1) throw ConfigError("model config must declare \"v\": 1");
        if (j.contains("numeric")) {
            const auto m = j.at("numeric").get<std::string>();
            if (m == "float")
                cfg.numeric = NumericMode::Float;
            else if (m == "integer")
                cfg.numeric = NumericMode::Integer;
            else
                throw ConfigError("numeric must be float|integer");
        }
        const auto& layers = j.at("layers");
        if (!layers.is_array()) throw ConfigError("\"layers\" must be an array");
        for (const auto& lj : layers) {
            ++current;
            static const std::set<std::string> allowed{"kind", "order", "channels", "policy", "nonlinearity", "seed"};
            for (const auto& [key, value] : lj.items())
                if (!allowed.count(key)) throw ConfigError("unknown layer field '" + key + "'", current);
            LayerConfig lc;
            lc.kind = parse_kind(lj.at("kind").get<std::string>(), current);
            lc.order = lj.at("order").get<int>();
            const auto channels = lj.at("channels").get<long long>();
            if (channels < 1) throw ConfigError("channels must be >= 1", current);
            lc.channels = static_cast<std::size_t>(channels);
            lc.policy = default_policy(lc.kind);
            if (lj.contains("policy")) {
                const auto& pj = lj.at("policy");
                if (pj.is_string()) {
                    lc.policy = parse_policy(pj.get<std::string>());
                } else if (pj.is_object()) {
                    lc.policy = parse_policy(pj.at("name").get<std::string>());
                    if (pj.contains("subgraphs"))
                        lc.policy.subgraphs = pj.at("subgraphs").get<std::vector<std::vector<std::size_t>>>();
                } else {
                    throw ConfigError("policy must be a string or an object", current);
                }
            }
            if (lj.contains("nonlinearity")) lc.nonlinearity = parse_nonlinearity(lj.at("nonlinearity").get<std::string>());
            if (lj.contains("seed")) lc.seed = lj.at("seed").get<std::uint64_t>();
            cfg.layers.push_back(std::move(lc));
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed model config: ") + e.what(), current);
    } catch (const ContractError& e) {
        throw ConfigError(e.what(), current);
    }
    return cfg;
}

std::string model_config_to_json(const ModelConfig& config) {
    nlohmann::ordered_json j;
    j["v"] = 1;
    j["numeric"] = to_string(config.numeric);
    j["layers"] = nlohmann::ordered_json::array();
    for (const auto& l : config.layers) {
        nlohmann::ordered_json lj;
        lj["kind"] = to_string(l.kind);
        lj["order"] = l.order;
        lj["channels"] = l.channels;
        if (l.policy.kind == DomainPolicy::Kind::SubgraphList)
            lj["policy"] = {{"name", "subgraph-list"}, {"subgraphs", l.policy.subgraphs}};
        else
            lj["policy"] = l.policy.to_string();
        lj["nonlinearity"] = to_string(l.nonlinearity);
        lj["seed"] = l.seed;
        j["layers"].push_back(std::move(lj));
    }
    return j.dump(2);
}

ModelConfig relabel_config(const ModelConfig& config, const Permutation& perm) {
    ModelConfig out = config;
    for (auto& l : out.layers)
        for (auto& s : l.policy.subgraphs)
            for (auto& v : s) {
                if (v >= perm.size()) throw ContractError("subgraph vertex outside the relabeling");
                v = perm[v];
            }
    return out;
}

// ---------------------------------------------------------------------------
// Layers

std::vector<BasisMapSpec> edge_message_maps(EdgeDirection direction) {
    switch (direction) {
    case EdgeDirection::VertexToEdge: return enumerate_specs(0, 1, MapMode::Overlap);
    case EdgeDirection::EdgeToVertex: return enumerate_specs(1, 0, MapMode::Overlap);
    case EdgeDirection::EdgeToEdge: return enumerate_specs(1, 1, MapMode::Overlap);
    }
    return {};
}

template <class Scalar>
NeuronSet<Scalar> vertex_neurons(const Matrix<Scalar>& features) {
    NeuronSet<Scalar> out;
    out.reserve(features.rows());
    for (std::size_t v = 0; v < features.rows(); ++v) {
        std::vector<Scalar> vals(features.row(v).begin(), features.row(v).end());
        out.push_back({v, BasicPTensor<Scalar>(RefDomain{v}, 0, features.cols(), std::move(vals))});
    }
    return out;
}

template <class Scalar>
Matrix<Scalar> mpnn_forward(const Graph& g, const Matrix<Scalar>& features, const Matrix<Scalar>& weight,
                            const std::vector<Scalar>& bias, Nonlinearity eta) {
    if (features.rows() != g.n) throw ContractError("mpnn: one feature row per vertex required");
    if (weight.cols() != features.cols() || weight.rows() != bias.size())
        throw ContractError("mpnn: weight must be C_out x C_in and bias C_out");
    const std::size_t cin = features.cols(), cout = weight.rows();
    Matrix<Scalar> out(g.n, cout);
    std::vector<Scalar> agg(cin);
    for (std::size_t i = 0; i < g.n; ++i) {
        std::fill(agg.begin(), agg.end(), Scalar{});
        for (auto j : g.adjacency[i])
            for (std::size_t c = 0; c < cin; ++c) agg[c] += features(j, c);
        for (std::size_t a = 0; a < cout; ++a) {
            Scalar acc{};
            for (std::size_t b = 0; b < cin; ++b) acc += weight(a, b) * agg[b];
            out(i, a) = activate(eta, acc + bias[a]);
        }
    }
    return out;
}

namespace {

enum class Family { Vertex, Edge, Ball, Subgraph };

template <class Scalar>
Scalar draw_weight(Rng& rng, double bound) {
    if constexpr (std::is_integral_v<Scalar>)
        return static_cast<Scalar>(rng.uniform_int(-2, 2));
    else
        return static_cast<Scalar>(rng.uniform_real(-bound, bound));
}

}  // namespace

template <class Scalar>
Model<Scalar> build_model(const ModelConfig& config, std::size_t input_channels, std::uint64_t seed) {
    if (input_channels == 0) throw ConfigError("input features need at least one channel");
    Model<Scalar> model;
    model.config = config;
    model.input_channels = input_channels;
    int k_in = 0;
    std::size_t cin = input_channels;
    Family family = Family::Vertex;
    for (std::size_t li = 0; li < config.layers.size(); ++li) {
        const auto& lc = config.layers[li];
        const int idx = static_cast<int>(li);
        if (lc.order < 0 || lc.order > 3) throw ConfigError("order must be in 0..3", idx);
        if (lc.channels < 1) throw ConfigError("channels must be >= 1", idx);
        if (lc.policy.kind != expected_policy(lc.kind))
            throw ConfigError(std::string("policy '") + lc.policy.to_string() + "' does not fit a " + to_string(lc.kind) +
                                  " layer",
                              idx);
        Layer<Scalar> layer;
        layer.config = lc;
        layer.index = idx;
        layer.k_in = k_in;
        layer.in_channels = cin;
        switch (lc.kind) {
        case LayerKind::Mpnn:
            if (family != Family::Vertex || k_in != 0)
                throw ConfigError("mpnn layers need zeroth-order vertex neurons as input", idx);
            if (lc.order != 0) throw ConfigError("mpnn layers produce zeroth-order neurons (order must be 0)", idx);
            layer.maps.specs = enumerate_specs(0, 0, MapMode::SameDomain);
            family = Family::Vertex;
            break;
        case LayerKind::Edge:
            layer.maps.specs = enumerate_specs(k_in, lc.order, MapMode::Overlap);
            family = Family::Edge;
            break;
        case LayerKind::Unite:
            layer.maps.specs = enumerate_specs(k_in, lc.order, MapMode::Overlap);
            family = Family::Ball;
            break;
        case LayerKind::Subgraph:
            if (lc.policy.subgraphs.empty()) throw ConfigError("subgraph layers need a nonempty subgraph list", idx);
            layer.maps.specs = enumerate_specs(k_in, lc.order, MapMode::Overlap);
            family = Family::Subgraph;
            break;
        }
        layer.maps.nonlinearity = lc.nonlinearity;
        Rng rng(mix_seed(seed, mix_seed(lc.seed, li)));
        const double bound = 1.0 / std::sqrt(static_cast<double>(cin * layer.maps.specs.size()));
        for (std::size_t s = 0; s < layer.maps.specs.size(); ++s) {
            Matrix<Scalar> w(lc.channels, cin);
            for (auto& x : w.data()) x = draw_weight<Scalar>(rng, bound);
            layer.maps.weights.push_back(std::move(w));
        }
        layer.maps.bias.resize(lc.channels);
        for (auto& b : layer.maps.bias) b = draw_weight<Scalar>(rng, bound);
        model.layers.push_back(std::move(layer));
        k_in = lc.order;
        cin = lc.channels;
    }
    return model;
}

template <class Scalar>
NeuronSet<Scalar> message_layer_forward(const Layer<Scalar>& layer, const NeuronSet<Scalar>& inputs,
                                        const std::vector<RefDomain>& out_domains,
                                        const std::vector<std::optional<std::size_t>>& out_anchors,
                                        const std::vector<std::vector<std::size_t>>& contributors) {
    if (out_domains.size() != contributors.size() || out_domains.size() != out_anchors.size())
        throw ContractError("one contributor list and anchor per output neuron required");
    const auto& maps = layer.maps;
    maps.validate();
    const int k_out = layer.config.order;
    const std::size_t cout = maps.out_channels();
    NeuronSet<Scalar> out;
    out.reserve(out_domains.size());
    for (std::size_t o = 0; o < out_domains.size(); ++o) {
        if (contributors[o].empty())
            throw IsolatedNeuronError("layer " + std::to_string(layer.index) + ": output neuron over " +
                                      out_domains[o].to_string() + " has no contributing input neuron");
        BasicPTensor<Scalar> acc(out_domains[o], k_out, cout);
        for (auto src : contributors[o]) {
            const auto& in = inputs.at(src).tensor;
            if (in.order() != layer.k_in || in.channels() != maps.in_channels())
                throw ContractError("input neuron does not match the layer's order or channels");
            const auto al = align_domains(in.domain(), out_domains[o]);
            BasicPTensor<Scalar> msg(al.out_aligned, k_out, cout);
            accumulate_layer(maps, geometry_of(al), permute_ptensor(in, al.perm_in), msg);
            const auto back = permute_ptensor(msg, al.perm_out.inverse());
            auto dst = acc.values();
            const auto srcv = back.values();
            for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += srcv[i];
        }
        finish_layer(maps, acc);
        out.push_back({out_anchors[o], std::move(acc)});
    }
    return out;
}

namespace {

// Input neurons whose domain contains each atom.
template <class Scalar>
std::map<std::uint64_t, std::vector<std::size_t>> atom_index(const NeuronSet<Scalar>& inputs) {
    std::map<std::uint64_t, std::vector<std::size_t>> idx;
    for (std::size_t i = 0; i < inputs.size(); ++i)
        for (const auto& a : inputs[i].tensor.domain().atoms()) idx[a.id].push_back(i);
    return idx;
}

// Input neurons whose domain meets `domain`, ascending.
template <class Scalar>
std::vector<std::size_t> intersecting(const std::map<std::uint64_t, std::vector<std::size_t>>& index,
                                      const RefDomain& domain) {
    std::set<std::size_t> hits;
    for (const auto& a : domain.atoms())
        if (auto it = index.find(a.id); it != index.end()) hits.insert(it->second.begin(), it->second.end());
    return {hits.begin(), hits.end()};
}

}  // namespace

template <class Scalar>
NeuronSet<Scalar> mpnn_layer_forward(const Graph& g, const NeuronSet<Scalar>& inputs, const Layer<Scalar>& layer) {
    if (inputs.size() != g.n) throw ContractError("mpnn: one input neuron per vertex required");
    const std::size_t cin = layer.in_channels;
    Matrix<Scalar> features(g.n, cin);
    for (const auto& nrn : inputs) {
        if (!nrn.anchor || nrn.tensor.order() != 0 || nrn.tensor.d() != 1 || nrn.tensor.channels() != cin)
            throw ContractError("mpnn: inputs must be zeroth-order vertex neurons");
        for (std::size_t c = 0; c < cin; ++c) features(*nrn.anchor, c) = nrn.tensor.values()[c];
    }
    const auto out = mpnn_forward(g, features, layer.maps.weights.at(0), layer.maps.bias, layer.maps.nonlinearity);
    return vertex_neurons(out);
}

template <class Scalar>
NeuronSet<Scalar> edge_layer_forward(const Graph& g, const NeuronSet<Scalar>& inputs, const Layer<Scalar>& layer) {
    const auto domains = build_domains(g, layer.config.policy);
    const auto index = atom_index(inputs);
    std::vector<std::vector<std::size_t>> contributors;
    for (const auto& d : domains) contributors.push_back(intersecting<Scalar>(index, d));
    return message_layer_forward(layer, inputs, domains, std::vector<std::optional<std::size_t>>(domains.size()),
                                 contributors);
}

template <class Scalar>
NeuronSet<Scalar> unite_layer_forward(const Graph& g, const NeuronSet<Scalar>& inputs, const Layer<Scalar>& layer) {
    std::map<std::size_t, std::vector<std::size_t>> by_anchor;
    for (std::size_t i = 0; i < inputs.size(); ++i)
        if (inputs[i].anchor) by_anchor[*inputs[i].anchor].push_back(i);
    const auto index = atom_index(inputs);

    std::vector<RefDomain> domains;
    std::vector<std::optional<std::size_t>> anchors;
    std::vector<std::vector<std::size_t>> contributors;
    for (std::size_t v = 0; v < g.n; ++v) {
        std::set<std::size_t> contrib;
        for (auto u : g.closed_neighborhood(v))
            if (auto it = by_anchor.find(u); it != by_anchor.end()) contrib.insert(it->second.begin(), it->second.end());
        // Non-anchored inputs (edges, subgraphs) contribute when they contain v.
        if (auto it = index.find(v); it != index.end())
            for (auto i : it->second)
                if (!inputs[i].anchor) contrib.insert(i);
        if (contrib.empty())
            throw IsolatedNeuronError("layer " + std::to_string(layer.index) + ": vertex " + std::to_string(v) +
                                      " has no contributing input neuron");
        std::set<std::uint64_t> uni;
        for (auto i : contrib)
            for (const auto& a : inputs[i].tensor.domain().atoms()) uni.insert(a.id);
        uni.erase(v);
        std::vector<std::uint64_t> ids{v};
        ids.insert(ids.end(), uni.begin(), uni.end());
        RefDomain dom = RefDomain::from_ids(ids);
        if (layer.config.policy.radius && !dom.same_set(ball_domain(g, v, *layer.config.policy.radius)))
            throw ConfigError("united domain of vertex " + std::to_string(v) + " is not the ball of radius " +
                                  std::to_string(*layer.config.policy.radius),
                              layer.index);
        domains.push_back(std::move(dom));
        anchors.emplace_back(v);
        contributors.emplace_back(contrib.begin(), contrib.end());
    }
    return message_layer_forward(layer, inputs, domains, anchors, contributors);
}

template <class Scalar>
NeuronSet<Scalar> subgraph_layer_forward(const Graph& g, const NeuronSet<Scalar>& inputs, const Layer<Scalar>& layer) {
    std::vector<RefDomain> domains;
    try {
        domains = build_domains(g, layer.config.policy);
    } catch (const ContractError& e) {
        throw ConfigError(e.what(), layer.index);
    }
    const auto index = atom_index(inputs);
    std::vector<std::vector<std::size_t>> contributors;
    for (const auto& d : domains) contributors.push_back(intersecting<Scalar>(index, d));
    return message_layer_forward(layer, inputs, domains, std::vector<std::optional<std::size_t>>(domains.size()),
                                 contributors);
}

template <class Scalar>
std::vector<Scalar> invariant_readout(const NeuronSet<Scalar>& neurons) {
    std::map<int, std::vector<std::size_t>> by_order;
    for (std::size_t i = 0; i < neurons.size(); ++i) by_order[neurons[i].tensor.order()].push_back(i);
    std::vector<Scalar> out;
    for (const auto& [k, members] : by_order) {
        const auto specs = enumerate_specs(k, 0, MapMode::SameDomain);
        const std::size_t C = neurons[members.front()].tensor.channels();
        std::vector<Scalar> pooled(specs.size() * C);
        for (auto i : members) {
            const auto& t = neurons[i].tensor;
            if (t.channels() != C) throw ContractError("readout: neurons of equal order must share channel counts");
            const Geometry g{t.d(), t.d(), t.d()};
            for (std::size_t s = 0; s < specs.size(); ++s)
                accumulate_map<Scalar>(specs[s], g, t.values(), std::span<Scalar>(pooled.data() + s * C, C), C);
        }
        out.insert(out.end(), pooled.begin(), pooled.end());
    }
    return out;
}

template <class Scalar>
NeuronSet<Scalar> run_layers(const Graph& g, const Matrix<Scalar>& features, const Model<Scalar>& model) {
    if (features.rows() != g.n) throw ContractError("one feature row per vertex required");
    if (features.cols() != model.input_channels)
        throw ContractError("feature channel count does not match the model's input channels");
    auto neurons = vertex_neurons(features);
    for (const auto& layer : model.layers) {
        switch (layer.config.kind) {
        case LayerKind::Mpnn: neurons = mpnn_layer_forward(g, neurons, layer); break;
        case LayerKind::Edge: neurons = edge_layer_forward(g, neurons, layer); break;
        case LayerKind::Unite: neurons = unite_layer_forward(g, neurons, layer); break;
        case LayerKind::Subgraph: neurons = subgraph_layer_forward(g, neurons, layer); break;
        }
    }
    return neurons;
}

template <class Scalar>
std::vector<Scalar> model_forward(const Graph& g, const Matrix<Scalar>& features, const Model<Scalar>& model) {
    return invariant_readout(run_layers(g, features, model));
}

#define PTENSOR_INSTANTIATE_GNN(S)                                                                                \
    template Matrix<S> relabel_features(const Matrix<S>&, const Permutation&);                                    \
    template NeuronSet<S> vertex_neurons(const Matrix<S>&);                                                       \
    template Matrix<S> mpnn_forward(const Graph&, const Matrix<S>&, const Matrix<S>&, const std::vector<S>&,      \
                                    Nonlinearity);                                                                \
    template Model<S> build_model(const ModelConfig&, std::size_t, std::uint64_t);                                \
    template NeuronSet<S> message_layer_forward(const Layer<S>&, const NeuronSet<S>&, const std::vector<RefDomain>&, \
                                                const std::vector<std::optional<std::size_t>>&,                   \
                                                const std::vector<std::vector<std::size_t>>&);                    \
    template NeuronSet<S> mpnn_layer_forward(const Graph&, const NeuronSet<S>&, const Layer<S>&);                 \
    template NeuronSet<S> edge_layer_forward(const Graph&, const NeuronSet<S>&, const Layer<S>&);                 \
    template NeuronSet<S> unite_layer_forward(const Graph&, const NeuronSet<S>&, const Layer<S>&);                \
    template NeuronSet<S> subgraph_layer_forward(const Graph&, const NeuronSet<S>&, const Layer<S>&);             \
    template std::vector<S> invariant_readout(const NeuronSet<S>&);                                               \
    template NeuronSet<S> run_layers(const Graph&, const Matrix<S>&, const Model<S>&);                            \
    template std::vector<S> model_forward(const Graph&, const Matrix<S>&, const Model<S>&);

PTENSOR_INSTANTIATE_GNN(double)
PTENSOR_INSTANTIATE_GNN(std::int64_t)

#undef PTENSOR_INSTANTIATE_GNN

}  // namespace ptensor
