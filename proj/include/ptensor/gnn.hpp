#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ptensor/domain.hpp"
#include "ptensor/maps.hpp"
#include "ptensor/matrix.hpp"
#include "ptensor/ptensor.hpp"

namespace ptensor {

/// Undirected simple graph on vertices 0..n-1.
struct Graph {
    std::size_t n = 0;
    std::vector<std::pair<std::size_t, std::size_t>> edges;  // u < v, sorted
    std::vector<std::vector<std::size_t>> adjacency;         // sorted neighbor lists

    /// Throws ContractError on self-loops, duplicates or out-of-range endpoints.
    static Graph from_edges(std::size_t n, std::vector<std::pair<std::size_t, std::size_t>> edges);
    /// Sorted closed neighborhood N[v].
    std::vector<std::size_t> closed_neighborhood(std::size_t v) const;
};

/// "n m" header followed by m lines "u v". Throws ParseError naming the line.
Graph parse_graph(const std::string& text);
/// n lines of whitespace-separated decimals, all with the same count.
Matrix<double> parse_features(const std::string& text, std::size_t n);

/// Vertices are relabeled v -> perm[v].
Graph relabel_graph(const Graph& g, const Permutation& perm);
template <class Scalar>
Matrix<Scalar> relabel_features(const Matrix<Scalar>& features, const Permutation& perm);

// ---------------------------------------------------------------------------
// Reference-domain policies

struct DomainPolicy {
    enum class Kind { Vertices, Edges, Ball, SubgraphList };
    Kind kind = Kind::Vertices;
    std::optional<int> radius;                          // Ball; unset means "union of contributors"
    std::vector<std::vector<std::size_t>> subgraphs;    // SubgraphList

    std::string to_string() const;
};

/// "vertices", "edges", "ball", "ball(2)", "subgraph-list".
DomainPolicy parse_policy(const std::string& text);

/// BFS ball of the given radius: v first, then the remaining vertices ascending.
RefDomain ball_domain(const Graph& g, std::size_t v, int radius);

/// vertices: n singletons; edges: (u,v) ascending per edge; ball(l): one ball
/// per vertex; subgraph-list: as given (validated).
std::vector<RefDomain> build_domains(const Graph& g, const DomainPolicy& policy);

// ---------------------------------------------------------------------------
// Layers and models

enum class LayerKind { Mpnn, Edge, Unite, Subgraph };
enum class NumericMode { Float, Integer };

const char* to_string(LayerKind k);
const char* to_string(NumericMode m);

struct LayerConfig {
    LayerKind kind = LayerKind::Mpnn;
    int order = 0;
    std::size_t channels = 1;
    DomainPolicy policy;
    Nonlinearity nonlinearity = Nonlinearity::ReLU;
    std::uint64_t seed = 0;
};

struct ModelConfig {
    std::vector<LayerConfig> layers;
    NumericMode numeric = NumericMode::Float;
};

/// JSON with "v":1. Throws ConfigError.
ModelConfig parse_model_config(const std::string& json_text);
std::string model_config_to_json(const ModelConfig& config);

/// Subgraph-list policies name vertices, so relabeling a graph relabels them too.
ModelConfig relabel_config(const ModelConfig& config, const Permutation& perm);

/// A neuron: a P-tensor plus, for vertex-level neurons, the vertex it belongs to.
template <class Scalar>
struct Neuron {
    std::optional<std::size_t> anchor;
    BasicPTensor<Scalar> tensor;
};

template <class Scalar>
using NeuronSet = std::vector<Neuron<Scalar>>;

/// Zeroth-order neurons over singleton domains, one per vertex.
template <class Scalar>
NeuronSet<Scalar> vertex_neurons(const Matrix<Scalar>& features);

/// f_i <- eta(W * sum_{j in N(i)} f_j + bias), features are n x C_in.
template <class Scalar>
Matrix<Scalar> mpnn_forward(const Graph& g, const Matrix<Scalar>& features, const Matrix<Scalar>& weight,
                            const std::vector<Scalar>& bias, Nonlinearity eta);

enum class EdgeDirection { VertexToEdge, EdgeToVertex, EdgeToEdge };

/// Basis maps for first-order edge tensors and zeroth-order vertex tensors.
std::vector<BasisMapSpec> edge_message_maps(EdgeDirection direction);

/// A configured layer with its parameters.
template <class Scalar>
struct Layer {
    LayerConfig config;
    int index = 0;  // position in the model, for error reporting
    int k_in = 0;
    std::size_t in_channels = 0;
    EquivariantLayer<Scalar> maps;  // mpnn layers use a single scalar spec
};

template <class Scalar>
struct Model {
    ModelConfig config;
    std::size_t input_channels = 0;
    std::vector<Layer<Scalar>> layers;
};

/// Draws parameters: float weights uniform in +-1/sqrt(C_in * #specs),
/// integer weights and biases uniform in {-2..2}. Throws ConfigError.
template <class Scalar>
Model<Scalar> build_model(const ModelConfig& config, std::size_t input_channels, std::uint64_t seed);

/// Messages from every contributor are aligned, mapped, summed in ascending
/// contributor order; bias and nonlinearity are applied once afterwards.
template <class Scalar>
NeuronSet<Scalar> message_layer_forward(const Layer<Scalar>& layer, const NeuronSet<Scalar>& inputs,
                                        const std::vector<RefDomain>& out_domains,
                                        const std::vector<std::optional<std::size_t>>& out_anchors,
                                        const std::vector<std::vector<std::size_t>>& contributors);

template <class Scalar>
NeuronSet<Scalar> mpnn_layer_forward(const Graph& g, const NeuronSet<Scalar>& inputs, const Layer<Scalar>& layer);
template <class Scalar>
NeuronSet<Scalar> edge_layer_forward(const Graph& g, const NeuronSet<Scalar>& inputs, const Layer<Scalar>& layer);
template <class Scalar>
NeuronSet<Scalar> unite_layer_forward(const Graph& g, const NeuronSet<Scalar>& inputs, const Layer<Scalar>& layer);
template <class Scalar>
NeuronSet<Scalar> subgraph_layer_forward(const Graph& g, const NeuronSet<Scalar>& inputs, const Layer<Scalar>& layer);

/// Per neuron, every order-k -> order-0 contraction (B(k) of them) per channel,
/// summed over neurons. Orders are concatenated ascending:
/// [order k: spec 0 channels..., spec 1 channels..., ...].
template <class Scalar>
std::vector<Scalar> invariant_readout(const NeuronSet<Scalar>& neurons);

template <class Scalar>
NeuronSet<Scalar> run_layers(const Graph& g, const Matrix<Scalar>& features, const Model<Scalar>& model);

template <class Scalar>
std::vector<Scalar> model_forward(const Graph& g, const Matrix<Scalar>& features, const Model<Scalar>& model);

/// Converts float features to integers; throws ContractError if any is not integral.
Matrix<std::int64_t> integer_features(const Matrix<double>& features);

/// One constant channel per vertex.
Matrix<double> default_features(std::size_t n);

}  // namespace ptensor
