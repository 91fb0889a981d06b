// ptensor: count, enumerate, verify and demo.
// Exit codes: 0 ok, 1 usage, 2 parse/file, 3 verification failure, 4 size cap.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "ptensor/combinatorics.hpp"
#include "ptensor/error.hpp"
#include "ptensor/gnn.hpp"
#include "ptensor/maps.hpp"
#include "ptensor/random.hpp"
#include "ptensor/verify.hpp"

using namespace ptensor;
using json = nlohmann::ordered_json;

namespace {

enum Exit { kOk = 0, kUsage = 1, kParse = 2, kVerify = 3, kSize = 4 };

struct FileError : Error {
    using Error::Error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileError("cannot read '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct CountArgs {
    int k_in = 0, k_out = 0;
    std::string mode = "same", format = "text";
    int max_order = -1;
};

int run_count(const CountArgs& a) {
    const int cap = a.max_order < 0 ? kDefaultBellCap : a.max_order;
    const auto mode = parse_map_mode(a.mode);
    const BigInt n = mode == MapMode::SameDomain ? count_same_domain(a.k_in, a.k_out, cap)
                                                 : count_overlap(a.k_in, a.k_out, cap);
    if (a.format == "json") {
        json j{{"v", 1}, {"k_in", a.k_in}, {"k_out", a.k_out}, {"mode", a.mode}};
        // Counts outgrow 64 bits quickly; keep them exact as a JSON number when they fit.
        if (n <= BigInt(std::numeric_limits<std::uint64_t>::max()))
            j["count"] = n.convert_to<std::uint64_t>();
        else
            j["count"] = n.str();
        std::cout << j.dump() << "\n";
    } else {
        std::cout << n << "\n";
    }
    return kOk;
}

int run_enumerate(const CountArgs& a) {
    const int cap = a.max_order < 0 ? kDefaultSpecOrderCap : a.max_order;
    const auto specs = enumerate_specs(a.k_in, a.k_out, parse_map_mode(a.mode), cap);
    if (a.format == "json") {
        json list = json::array();
        for (const auto& s : specs) list.push_back(json::parse(spec_to_json(s)));
        json j{{"v", 1}, {"k_in", a.k_in}, {"k_out", a.k_out}, {"mode", a.mode}, {"specs", list}};
        std::cout << j.dump(2) << "\n";
    } else {
        for (const auto& s : specs) std::cout << describe_spec(s) << "\n";
    }
    return kOk;
}

int run_verify(const std::string& suite, std::uint64_t seed, const std::string& format) {
    bool ok = true;
    json rows = json::array();
    for (int id : suite_criteria(suite)) {
        const auto r = run_criterion(id, seed);
        ok = ok && r.passed();
        if (format == "json")
            rows.push_back({{"id", r.id}, {"name", r.name}, {"passed", r.passed()}, {"correct", r.correct},
                            {"budget_seconds", r.budget}, {"detail", r.detail}});
        else
            std::cout << format_result(r) << "\n";
    }
    if (format == "json") std::cout << json{{"v", 1}, {"suite", suite}, {"seed", seed}, {"passed", ok}, {"criteria", rows}}.dump(2) << "\n";
    return ok ? kOk : kVerify;
}

struct DemoArgs {
    std::string graph, features, config, format = "text";
    std::uint64_t seed = 0;
    int check = 0;
    std::size_t max_vertices = 10000;
};

template <class Scalar>
int demo_with(const Graph& g, const Matrix<Scalar>& features, const ModelConfig& cfg, const DemoArgs& a) {
    const auto model = build_model<Scalar>(cfg, features.cols(), a.seed);
    const auto emb = model_forward(g, features, model);

    double worst = 0.0, scale = 0.0;
    bool invariant = true;
    for (auto v : emb) scale = std::max(scale, std::abs(static_cast<double>(v)));
    Rng rng(mix_seed(a.seed, 0xde70));
    for (int r = 0; r < a.check; ++r) {
        std::vector<std::size_t> m(g.n);
        for (std::size_t i = 0; i < g.n; ++i) m[i] = i;
        rng.shuffle(m);
        const Permutation p(std::move(m));
        const auto relabeled = build_model<Scalar>(relabel_config(cfg, p), features.cols(), a.seed);
        const auto y = model_forward(relabel_graph(g, p), relabel_features(features, p), relabeled);
        double diff = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i)
            diff = std::max(diff, std::abs(static_cast<double>(y[i]) - static_cast<double>(emb[i])));
        if constexpr (std::is_integral_v<Scalar>)
            invariant = invariant && y == emb;
        else
            invariant = invariant && diff <= 1e-9 * scale;
        worst = std::max(worst, scale > 0 ? diff / scale : diff);
    }

    if (a.format == "json") {
        json j{{"v", 1}, {"n", g.n}, {"m", g.edges.size()}, {"numeric", to_string(cfg.numeric)}, {"seed", a.seed}};
        j["embedding"] = emb;
        if (a.check > 0)
            j["invariance"] = {{"relabelings", a.check}, {"passed", invariant}, {"max_relative_deviation", worst}};
        std::cout << j.dump(2) << "\n";
    } else {
        for (std::size_t i = 0; i < emb.size(); ++i) {
            if constexpr (std::is_integral_v<Scalar>)
                std::cout << (i ? " " : "") << emb[i];
            else
                std::cout << (i ? " " : "") << fmt(emb[i]);
        }
        std::cout << "\n";
        if (a.check > 0)
            std::cout << "invariance: " << a.check << " relabelings, max relative deviation " << fmt(worst) << ", "
                      << (invariant ? "ok" : "FAILED") << "\n";
    }
    return invariant ? kOk : kVerify;
}

int run_demo(const DemoArgs& a) {
    const Graph g = parse_graph(read_file(a.graph));
    if (g.n > a.max_vertices)
        throw SizeError("graph has " + std::to_string(g.n) + " vertices, cap is " + std::to_string(a.max_vertices));
    const auto cfg = parse_model_config(read_file(a.config));
    const auto features = a.features.empty() ? default_features(g.n) : parse_features(read_file(a.features), g.n);
    if (cfg.numeric == NumericMode::Integer) {
        Matrix<std::int64_t> fi;
        try {
            fi = integer_features(features);
        } catch (const ContractError& e) {
            throw ParseError(e.what());
        }
        return demo_with(g, fi, cfg, a);
    }
    return demo_with(g, features, cfg, a);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"P-tensor equivariant maps: counting, enumeration, verification and a message-passing demo"};
    app.require_subcommand(1);

    CountArgs ca;
    auto add_count_flags = [&](CLI::App* sub, const char* formats) {
        sub->add_option("--k-in", ca.k_in, "input order")->required()->check(CLI::NonNegativeNumber);
        sub->add_option("--k-out", ca.k_out, "output order")->required()->check(CLI::NonNegativeNumber);
        sub->add_option("--mode", ca.mode, "same|overlap")->check(CLI::IsMember({"same", "overlap"}));
        sub->add_option("--format", ca.format, formats)->check(CLI::IsMember({"text", "json"}));
        sub->add_option("--max-order", ca.max_order, "cap on k_in + k_out");
    };
    auto* count = app.add_subcommand("count", "number of basis maps");
    add_count_flags(count, "text|json");
    auto* enumerate = app.add_subcommand("enumerate", "list basis maps");
    add_count_flags(enumerate, "text|json");

    std::string suite, vformat = "text";
    std::uint64_t vseed = 0;
    auto* verify = app.add_subcommand("verify", "run an acceptance suite");
    verify->add_option("--suite", suite, "counts|equivariance|rank|burnside|gnn")
        ->required()
        ->check(CLI::IsMember({"counts", "equivariance", "rank", "burnside", "gnn"}));
    verify->add_option("--seed", vseed, "random seed");
    verify->add_option("--format", vformat, "text|json")->check(CLI::IsMember({"text", "json"}));

    DemoArgs da;
    auto* demo = app.add_subcommand("demo", "run a model on a graph and print its invariant embedding");
    demo->add_option("--graph", da.graph, "edge-list file")->required();
    demo->add_option("--features", da.features, "feature file (default: one constant channel)");
    demo->add_option("--config", da.config, "model config JSON")->required();
    demo->add_option("--seed", da.seed, "parameter seed");
    demo->add_option("--check-invariance", da.check, "rerun under N random relabelings")->check(CLI::NonNegativeNumber);
    demo->add_option("--format", da.format, "text|json")->check(CLI::IsMember({"text", "json"}));
    demo->add_option("--max-vertices", da.max_vertices, "cap on graph size");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (*count) return run_count(ca);
        if (*enumerate) return run_enumerate(ca);
        if (*verify) return run_verify(suite, vseed, vformat);
        if (*demo) return run_demo(da);
    } catch (const SizeError& e) {
        std::cerr << "size cap: " << e.what() << "\n";
        return kSize;
    } catch (const FileError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kParse;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kParse;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kParse;
    } catch (const IsolatedNeuronError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kParse;
    } catch (const ConsistencyError& e) {
        std::cerr << "consistency failure: " << e.what() << "\n";
        return kVerify;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}
