#include "doctest.h"

#include <cmath>
#include <numeric>
#include <set>

#include "ptensor/error.hpp"
#include "ptensor/gnn.hpp"
#include "ptensor/random.hpp"

using namespace ptensor;

namespace {

Graph path3() { return parse_graph("3 2\n0 1\n1 2\n"); }

Graph random_connected(std::size_t n, Rng& rng) {
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (std::size_t v = 1; v < n; ++v) {
        const std::size_t u = rng.index(v);
        edges.emplace_back(u, v);
        seen.insert({u, v});
    }
    for (std::size_t t = 0; t < n; ++t) {
        std::size_t u = rng.index(n), v = rng.index(n);
        if (u == v) continue;
        if (u > v) std::swap(u, v);
        if (seen.insert({u, v}).second) edges.emplace_back(u, v);
    }
    return Graph::from_edges(n, edges);
}

Permutation random_perm(std::size_t n, Rng& rng) {
    std::vector<std::size_t> m(n);
    std::iota(m.begin(), m.end(), 0);
    rng.shuffle(m);
    return Permutation(m);
}

LayerConfig layer(LayerKind kind, int order, std::size_t channels, const std::string& policy = "") {
    LayerConfig l;
    l.kind = kind;
    l.order = order;
    l.channels = channels;
    if (!policy.empty()) {
        l.policy = parse_policy(policy);
    } else {
        switch (kind) {
        case LayerKind::Mpnn: l.policy = parse_policy("vertices"); break;
        case LayerKind::Edge: l.policy = parse_policy("edges"); break;
        case LayerKind::Unite: l.policy = parse_policy("ball"); break;
        case LayerKind::Subgraph: l.policy = parse_policy("subgraph-list"); break;
        }
    }
    return l;
}

ModelConfig three_kinds(NumericMode mode) {
    ModelConfig cfg;
    cfg.numeric = mode;
    cfg.layers = {layer(LayerKind::Mpnn, 0, 3), layer(LayerKind::Edge, 1, 2), layer(LayerKind::Unite, 2, 2, "ball(1)")};
    cfg.layers.back().nonlinearity = Nonlinearity::Identity;
    return cfg;
}

}  // namespace

TEST_CASE("graph parsing") {
    const auto g = path3();
    CHECK(g.n == 3);
    CHECK(g.edges == std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}, {1, 2}});
    CHECK(g.adjacency[1] == std::vector<std::size_t>{0, 2});

    auto line_of = [](const std::string& text) {
        try {
            parse_graph(text);
        } catch (const ParseError& e) {
            return e.line();
        }
        return std::size_t{0};
    };
    CHECK(line_of("2 1\n0 2\n") == 2);
    CHECK(line_of("3 2\n0 1\n0 1\n") == 3);
    CHECK(line_of("3 2\n0 1\n1 0\n") == 3);
    CHECK(line_of("3 1\n1 1\n") == 2);
    CHECK(line_of("3 2\n0 1\n") == 3);
    CHECK(line_of("3\n") == 1);
    CHECK(line_of("3 1\n0 x\n") == 2);
    CHECK(line_of("3 1\n0 1\n1 2\n") == 3);
    CHECK(parse_graph("3 1\n2 0\n\n").edges == std::vector<std::pair<std::size_t, std::size_t>>{{0, 2}});
}

TEST_CASE("feature parsing") {
    const auto f = parse_features("1 2\n3 4.5\n-1 0\n", 3);
    CHECK(f.rows() == 3);
    CHECK(f.cols() == 2);
    CHECK(f(1, 1) == 4.5);
    CHECK_THROWS_AS(parse_features("1 2\n3\n", 2), ParseError);
    CHECK_THROWS_AS(parse_features("1\n", 2), ParseError);
    CHECK_THROWS_AS(parse_features("1\nfoo\n", 2), ParseError);
    CHECK_THROWS_AS(integer_features(f), ContractError);
}

TEST_CASE("domain policies") {
    const auto g = path3();
    const auto edges = build_domains(g, parse_policy("edges"));
    CHECK(edges == std::vector<RefDomain>{RefDomain{0, 1}, RefDomain{1, 2}});
    CHECK(build_domains(g, parse_policy("vertices")) == std::vector<RefDomain>{RefDomain{0}, RefDomain{1}, RefDomain{2}});

    const auto star = parse_graph("4 3\n0 3\n0 1\n2 0\n");
    CHECK(ball_domain(star, 0, 1) == RefDomain{0, 1, 2, 3});
    CHECK(ball_domain(star, 2, 1) == RefDomain{2, 0});
    CHECK(ball_domain(star, 2, 2) == RefDomain{2, 0, 1, 3});
    CHECK(ball_domain(star, 2, 0) == RefDomain{2});

    auto sub = parse_policy("subgraph-list");
    sub.subgraphs = {{2, 1}, {0}};
    CHECK(build_domains(g, sub) == std::vector<RefDomain>{RefDomain{2, 1}, RefDomain{0}});
    sub.subgraphs = {{5}};
    CHECK_THROWS_AS(build_domains(g, sub), ContractError);

    CHECK(parse_policy("ball(2)").radius == 2);
    CHECK_FALSE(parse_policy("ball").radius.has_value());
    CHECK_THROWS_AS(parse_policy("ball(-1)"), ConfigError);
    CHECK_THROWS_AS(parse_policy("cycles"), ConfigError);
}

TEST_CASE("classical message passing") {
    const auto g = path3();
    const Matrix<double> f(3, 1, std::vector<double>{1, 2, 3});
    const auto out = mpnn_forward(g, f, Matrix<double>::identity(1), {0.0}, Nonlinearity::Identity);
    CHECK(std::vector<double>(out.data().begin(), out.data().end()) == std::vector<double>{2, 4, 2});
    const auto twice = mpnn_forward(g, f, Matrix<double>(1, 1, 2.0), {0.0}, Nonlinearity::Identity);
    CHECK(std::vector<double>(twice.data().begin(), twice.data().end()) == std::vector<double>{4, 8, 4});
    CHECK_THROWS_AS(mpnn_forward(g, f, Matrix<double>(1, 2), {0.0}, Nonlinearity::Identity), ContractError);

    // Relabeling the graph relabels the output.
    const Permutation p({2, 0, 1});
    const auto relabeled = mpnn_forward(relabel_graph(g, p), relabel_features(f, p), Matrix<double>::identity(1), {0.0},
                                        Nonlinearity::Identity);
    CHECK(relabeled == relabel_features(out, p));
}

TEST_CASE("message passing is the zeroth-order layer") {
    Rng rng(21);
    for (int t = 0; t < 20; ++t) {
        const auto g = random_connected(2 + rng.index(9), rng);
        Matrix<std::int64_t> f(g.n, 2);
        for (auto& v : f.data()) v = rng.uniform_int(-5, 5);
        ModelConfig cfg;
        cfg.layers = {layer(LayerKind::Mpnn, 0, 3)};
        const auto model = build_model<std::int64_t>(cfg, 2, rng.next());
        const auto& maps = model.layers[0].maps;
        const auto direct = mpnn_forward(g, f, maps.weights[0], maps.bias, maps.nonlinearity);

        // Each neighbor's scalar P-tensor is carried onto the receiving vertex and
        // passed through the generic layer with its single scalar map.
        const auto inputs = vertex_neurons(f);
        for (std::size_t i = 0; i < g.n; ++i) {
            IntPTensor acc(RefDomain{i}, 0, 3);
            for (auto j : g.adjacency[i])
                accumulate_layer(maps, Geometry{1, 1, 1}, inputs[j].tensor.with_domain(RefDomain{i}), acc);
            finish_layer(maps, acc);
            for (std::size_t c = 0; c < 3; ++c) CHECK(acc.values()[c] == direct(i, c));
        }
        const auto layered = mpnn_layer_forward(g, inputs, model.layers[0]);
        for (std::size_t i = 0; i < g.n; ++i)
            for (std::size_t c = 0; c < 3; ++c) CHECK(layered[i].tensor.values()[c] == direct(i, c));
    }
}

TEST_CASE("edge network maps") {
    CHECK(edge_message_maps(EdgeDirection::VertexToEdge).size() == 2);
    CHECK(edge_message_maps(EdgeDirection::EdgeToVertex).size() == 2);
    const auto ee = edge_message_maps(EdgeDirection::EdgeToEdge);
    CHECK(ee.size() == 5);
    std::set<std::vector<std::uint8_t>> distinct;
    for (const auto& s : ee) {
        const auto m = realize_matrix(s, Geometry{1, 2, 2});
        distinct.insert({m.data().begin(), m.data().end()});
    }
    CHECK(distinct.size() == 4);
}

TEST_CASE("unite layer on a single vertex is a weighted self-message") {
    const Graph g = Graph::from_edges(1, {});
    ModelConfig cfg;
    cfg.layers = {layer(LayerKind::Unite, 0, 2)};
    cfg.layers[0].nonlinearity = Nonlinearity::Identity;
    const auto model = build_model<std::int64_t>(cfg, 1, 4);
    const Matrix<std::int64_t> f(1, 1, std::vector<std::int64_t>{3});
    const auto out = run_layers(g, f, model);
    REQUIRE(out.size() == 1);
    CHECK(out[0].tensor.domain() == RefDomain{0});
    const auto& m = model.layers[0].maps;
    for (std::size_t c = 0; c < 2; ++c) CHECK(out[0].tensor.values()[c] == m.weights[0](c, 0) * 3 + m.bias[c]);
}

TEST_CASE("unite layer domains grow as balls") {
    const auto g = path3();
    ModelConfig cfg;
    cfg.layers = {layer(LayerKind::Unite, 1, 1, "ball(1)"), layer(LayerKind::Unite, 1, 1, "ball(2)")};
    const auto model = build_model<std::int64_t>(cfg, 1, 0);
    const auto f = integer_features(default_features(3));
    auto first = unite_layer_forward(g, vertex_neurons(f), model.layers[0]);
    CHECK(first[1].tensor.domain() == RefDomain{1, 0, 2});
    CHECK(first[0].tensor.domain() == RefDomain{0, 1});
    auto second = unite_layer_forward(g, first, model.layers[1]);
    CHECK(second[0].tensor.domain() == RefDomain{0, 1, 2});

    ModelConfig wrong;
    wrong.layers = {layer(LayerKind::Unite, 1, 1, "ball(2)")};
    const auto wm = build_model<std::int64_t>(wrong, 1, 0);
    CHECK_THROWS_AS(run_layers(g, f, wm), ConfigError);
}

TEST_CASE("isolated neurons are reported") {
    const Graph g = Graph::from_edges(3, {{0, 1}});
    ModelConfig cfg;
    cfg.layers = {layer(LayerKind::Edge, 1, 1), layer(LayerKind::Unite, 1, 1)};
    const auto model = build_model<std::int64_t>(cfg, 1, 0);
    CHECK_THROWS_AS(run_layers(g, integer_features(default_features(3)), model), IsolatedNeuronError);

    ModelConfig sub;
    sub.layers = {layer(LayerKind::Edge, 1, 1), layer(LayerKind::Subgraph, 1, 1)};
    sub.layers[1].policy.subgraphs = {{2}};
    const auto sm = build_model<std::int64_t>(sub, 1, 0);
    CHECK_THROWS_AS(run_layers(g, integer_features(default_features(3)), sm), IsolatedNeuronError);
}

TEST_CASE("readout") {
    NeuronSet<std::int64_t> one{{std::nullopt, IntPTensor(RefDomain{0, 1}, 1, 1, {4, 9})}};
    CHECK(invariant_readout(one) == std::vector<std::int64_t>{13});

    // Second order: trace then total sum, per channel.
    NeuronSet<std::int64_t> two{{std::nullopt, IntPTensor(RefDomain{0, 1}, 2, 1, {1, 2, 3, 4})}};
    CHECK(invariant_readout(two) == std::vector<std::int64_t>{5, 10});

    NeuronSet<std::int64_t> mixed{{std::nullopt, IntPTensor(RefDomain{0, 1}, 2, 2, {1, 0, 2, 0, 3, 0, 4, 1})},
                                  {std::nullopt, IntPTensor(RefDomain{2}, 0, 1, {7})},
                                  {std::nullopt, IntPTensor(RefDomain{1, 2}, 2, 2, {1, 1, 1, 1, 1, 1, 1, 1})}};
    // Order 0 first: [7]; order 2: trace c0, trace c1, total c0, total c1.
    CHECK(invariant_readout(mixed) == std::vector<std::int64_t>{7, 1 + 4 + 2, 1 + 2, 10 + 4, 1 + 4});

    // Output size is sum of B(k) * C over the orders present.
    const auto r = invariant_readout(NeuronSet<std::int64_t>{{std::nullopt, IntPTensor(RefDomain{0, 1, 2}, 3, 2)}});
    CHECK(r.size() == 5 * 2);
}

TEST_CASE("readout is invariant under reordering a domain") {
    const auto t = random_ptensor<std::int64_t>(RefDomain{0, 1, 2, 3}, 3, 2, 6);
    const auto u = permute_ptensor(t, Permutation({3, 1, 0, 2}));
    CHECK(invariant_readout(NeuronSet<std::int64_t>{{std::nullopt, t}}) ==
          invariant_readout(NeuronSet<std::int64_t>{{std::nullopt, u}}));
}

TEST_CASE("model composition") {
    const auto g = path3();
    ModelConfig empty;
    const Matrix<double> f(3, 2, std::vector<double>{1, 2, 3, 4, 5, 6});
    CHECK(model_forward(g, f, build_model<double>(empty, 2, 0)) == std::vector<double>{9, 12});

    const auto model = build_model<double>(three_kinds(NumericMode::Float), 1, 3);
    const auto emb = model_forward(g, default_features(3), model);
    CHECK(emb.size() == 4);
    for (double v : emb) CHECK(std::isfinite(v));
    CHECK(model_forward(g, default_features(3), build_model<double>(three_kinds(NumericMode::Float), 1, 3)) == emb);
    CHECK(model_forward(g, default_features(3), build_model<double>(three_kinds(NumericMode::Float), 1, 4)) != emb);

    ModelConfig bad;
    bad.layers = {layer(LayerKind::Edge, 1, 2), layer(LayerKind::Mpnn, 0, 2)};
    try {
        build_model<double>(bad, 1, 0);
        FAIL("expected a config error");
    } catch (const ConfigError& e) {
        CHECK(e.layer() == 1);
    }
    ModelConfig deep;
    deep.layers = {layer(LayerKind::Edge, 4, 1)};
    CHECK_THROWS_AS(build_model<double>(deep, 1, 0), ConfigError);
    ModelConfig mismatch;
    mismatch.layers = {layer(LayerKind::Edge, 1, 1, "vertices")};
    CHECK_THROWS_AS(build_model<double>(mismatch, 1, 0), ConfigError);
    CHECK_THROWS_AS(model_forward(g, Matrix<double>(3, 2), model), ContractError);
}

TEST_CASE("integer weights stay in range") {
    const auto model = build_model<std::int64_t>(three_kinds(NumericMode::Integer), 2, 9);
    for (const auto& l : model.layers) {
        for (const auto& w : l.maps.weights)
            for (auto v : w.data()) CHECK(std::abs(v) <= 2);
        for (auto b : l.maps.bias) CHECK(std::abs(b) <= 2);
    }
    const auto fm = build_model<double>(three_kinds(NumericMode::Float), 2, 9);
    for (const auto& l : fm.layers) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(l.in_channels * l.maps.specs.size()));
        for (const auto& w : l.maps.weights)
            for (auto v : w.data()) CHECK(std::abs(v) <= bound);
    }
}

TEST_CASE("relabeling invariance after one unite layer, exact") {
    Rng rng(5);
    ModelConfig cfg;
    cfg.numeric = NumericMode::Integer;
    cfg.layers = {layer(LayerKind::Unite, 2, 2, "ball(1)")};
    cfg.layers[0].nonlinearity = Nonlinearity::Identity;
    for (int t = 0; t < 10; ++t) {
        const auto g = random_connected(3 + rng.index(8), rng);
        Matrix<std::int64_t> f(g.n, 1);
        for (auto& v : f.data()) v = rng.uniform_int(-4, 4);
        const auto model = build_model<std::int64_t>(cfg, 1, rng.next());
        const auto base = model_forward(g, f, model);
        for (int r = 0; r < 10; ++r) {
            const auto p = random_perm(g.n, rng);
            CHECK(model_forward(relabel_graph(g, p), relabel_features(f, p), model) == base);
        }
    }
}

TEST_CASE("relabeling equivariance of every layer kind") {
    // Relabeled runs produce the same neurons with relabeled domains.
    Rng rng(8);
    const auto g = random_connected(7, rng);
    ModelConfig cfg;
    cfg.layers = {layer(LayerKind::Mpnn, 0, 2), layer(LayerKind::Edge, 1, 2), layer(LayerKind::Unite, 1, 2),
                  layer(LayerKind::Subgraph, 2, 2)};
    cfg.layers[3].policy.subgraphs = {{0, 1, 2}, {3, 4}, {6, 5, 1}};
    Matrix<std::int64_t> f(g.n, 2);
    for (auto& v : f.data()) v = rng.uniform_int(-3, 3);
    const auto p = random_perm(g.n, rng);
    const auto a = run_layers(g, f, build_model<std::int64_t>(cfg, 2, 1));
    const auto b = run_layers(relabel_graph(g, p), relabel_features(f, p), build_model<std::int64_t>(relabel_config(cfg, p), 2, 1));
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        std::vector<std::uint64_t> ids;
        for (const auto& x : a[i].tensor.domain().atoms()) ids.push_back(p[x.id]);
        const auto moved = RefDomain::from_ids(ids);
        CHECK(moved == b[i].tensor.domain());
        CHECK(a[i].tensor.values().size() == b[i].tensor.values().size());
        for (std::size_t j = 0; j < a[i].tensor.values().size(); ++j) CHECK(a[i].tensor.values()[j] == b[i].tensor.values()[j]);
    }
}

TEST_CASE("float readout is invariant within tolerance") {
    Rng rng(12);
    const auto g = random_connected(12, rng);
    Matrix<double> f(12, 2);
    for (auto& v : f.data()) v = rng.uniform_real(-1, 1);
    const auto model = build_model<double>(three_kinds(NumericMode::Float), 2, 77);
    const auto base = model_forward(g, f, model);
    double scale = 0;
    for (double v : base) scale = std::max(scale, std::abs(v));
    REQUIRE(scale > 0);
    for (int r = 0; r < 100; ++r) {
        const auto p = random_perm(12, rng);
        const auto y = model_forward(relabel_graph(g, p), relabel_features(f, p), model);
        for (std::size_t i = 0; i < y.size(); ++i) CHECK(std::abs(y[i] - base[i]) <= 1e-9 * scale);
    }
}

TEST_CASE("model config JSON") {
    const std::string text = R"j({"v":1,"numeric":"integer","layers":[
        {"kind":"mpnn","order":0,"channels":2},
        {"kind":"edge","order":1,"channels":3,"policy":"edges","nonlinearity":"identity","seed":5},
        {"kind":"unite","order":2,"channels":1,"policy":"ball(1)"},
        {"kind":"subgraph","order":1,"channels":1,"policy":{"name":"subgraph-list","subgraphs":[[0,1],[2]]}}]})j";
    const auto cfg = parse_model_config(text);
    CHECK(cfg.numeric == NumericMode::Integer);
    REQUIRE(cfg.layers.size() == 4);
    CHECK(cfg.layers[0].policy.kind == DomainPolicy::Kind::Vertices);
    CHECK(cfg.layers[0].nonlinearity == Nonlinearity::ReLU);
    CHECK(cfg.layers[1].nonlinearity == Nonlinearity::Identity);
    CHECK(cfg.layers[1].seed == 5);
    CHECK(cfg.layers[2].policy.radius == 1);
    CHECK(cfg.layers[3].policy.subgraphs == std::vector<std::vector<std::size_t>>{{0, 1}, {2}});

    const auto again = parse_model_config(model_config_to_json(cfg));
    CHECK(model_config_to_json(again) == model_config_to_json(cfg));

    auto layer_of = [](const std::string& t) {
        try {
            parse_model_config(t);
        } catch (const ConfigError& e) {
            return e.layer();
        }
        return -2;
    };
    CHECK(layer_of(R"({"v":1,"layers":[{"kind":"mpnn","order":0,"channels":1,"colour":1}]})") == 0);
    CHECK(layer_of(R"({"v":1,"layers":[{"kind":"mpnn","order":0,"channels":1},{"kind":"conv","order":0,"channels":1}]})") == 1);
    CHECK(layer_of(R"({"v":1,"layers":[{"kind":"mpnn","order":0,"channels":0}]})") == 0);
    CHECK(layer_of(R"({"v":1,"layers":[{"kind":"edge","order":1}]})") == 0);
    CHECK(layer_of(R"({"v":2,"layers":[]})") == -1);
    CHECK(layer_of(R"({"v":1,"layers":[],"extra":0})") == -1);
    CHECK(layer_of("[1,2") == -1);
}
