#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ptensor/combinatorics.hpp"
#include "ptensor/domain.hpp"
#include "ptensor/matrix.hpp"
#include "ptensor/ptensor.hpp"

namespace ptensor {

inline constexpr int kDefaultSpecOrderCap = 8;
inline constexpr std::size_t kDefaultRealizeCap = 10'000'000;

/// Whether a pure sum or broadcast block ranges over the common atoms only or
/// over the whole domain of its tensor.
enum class Variant { CommonOnly, All };

/// Same-domain maps index by partitions alone; overlap maps add one variant
/// flag per pure block.
enum class MapMode { SameDomain, Overlap };

const char* to_string(Variant v);
const char* to_string(MapMode m);
MapMode parse_map_mode(const std::string& text);

/// Sizes of the realigned domains: positions [0, d_cap) are shared by both.
struct Geometry {
    std::size_t d_cap = 0;
    std::size_t d1 = 0;  // input domain size
    std::size_t d2 = 0;  // output domain size
    friend bool operator==(const Geometry&, const Geometry&) = default;
};

/// One basis element of the equivariant maps from order k_in to order k_out.
/// The partition is over the k_out + k_in modes, output modes first. Flags are
/// stored per block (block order = order of block minimum elements) and are
/// present exactly for the pure blocks.
class BasisMapSpec {
public:
    BasisMapSpec() = default;
    /// Throws ContractError on an inconsistent flag layout.
    BasisMapSpec(int k_in, int k_out, SetPartition partition, std::vector<std::optional<Variant>> flags);

    int k_in() const noexcept { return k_in_; }
    int k_out() const noexcept { return k_out_; }
    const SetPartition& partition() const noexcept { return partition_; }
    const std::vector<std::optional<Variant>>& flags() const noexcept { return flags_; }
    const std::vector<BlockRole>& roles() const noexcept { return roles_; }
    PartitionType type() const noexcept { return type_; }

    /// Same partition with every pure flag set to All.
    BasisMapSpec normalized_same_domain() const;

    friend bool operator==(const BasisMapSpec& a, const BasisMapSpec& b) {
        return a.k_in_ == b.k_in_ && a.k_out_ == b.k_out_ && a.partition_ == b.partition_ && a.flags_ == b.flags_;
    }

private:
    int k_in_ = 0;
    int k_out_ = 0;
    SetPartition partition_;
    std::vector<std::optional<Variant>> flags_;
    std::vector<BlockRole> roles_;
    PartitionType type_;
};

/// All basis specs in deterministic order: partitions in lexicographic
/// restricted-growth order, then flag tuples (blocks by minimum element,
/// first block most significant, CommonOnly before All).
std::vector<BasisMapSpec> enumerate_specs(int k_in, int k_out, MapMode mode, int cap = kDefaultSpecOrderCap);

namespace detail {

struct BlockPlan {
    std::size_t range = 0;       // number of values the block index takes
    std::size_t out_stride = 0;  // sum of row-major strides of its output modes
    std::size_t in_stride = 0;   // sum of row-major strides of its input modes
};

std::vector<BlockPlan> plan_blocks(const BasisMapSpec& spec, const Geometry& g);

}  // namespace detail

void validate_geometry(const Geometry& g);

/// Calls f(out_entry, in_entry) once for every nonzero (= 1) entry of the
/// realized map. Entry indices are row-major over the domain modes.
template <class F>
void for_each_nonzero(const BasisMapSpec& spec, const Geometry& g, F&& f) {
    const auto plan = detail::plan_blocks(spec, g);
    for (const auto& b : plan)
        if (b.range == 0) return;
    std::vector<std::size_t> idx(plan.size(), 0);
    std::size_t out = 0, in = 0;
    while (true) {
        f(out, in);
        std::size_t b = plan.size();
        while (b-- > 0) {
            if (++idx[b] < plan[b].range) {
                out += plan[b].out_stride;
                in += plan[b].in_stride;
                break;
            }
            out -= (plan[b].range - 1) * plan[b].out_stride;
            in -= (plan[b].range - 1) * plan[b].in_stride;
            idx[b] = 0;
        }
        if (b == static_cast<std::size_t>(-1)) return;
    }
}

/// out[o, c] += scale * in[i, c] over the nonzeros (o, i) of the map.
template <class Scalar>
void accumulate_map(const BasisMapSpec& spec, const Geometry& g, std::span<const Scalar> in, std::span<Scalar> out,
                    std::size_t channels, Scalar scale = Scalar(1)) {
    for_each_nonzero(spec, g, [&](std::size_t o, std::size_t i) {
        Scalar* dst = out.data() + o * channels;
        const Scalar* src = in.data() + i * channels;
        for (std::size_t c = 0; c < channels; ++c) dst[c] += scale * src[c];
    });
}

/// in[i, c] += y[o, c]: the transpose of accumulate_map.
template <class Scalar>
void accumulate_adjoint(const BasisMapSpec& spec, const Geometry& g, std::span<const Scalar> y, std::span<Scalar> in,
                        std::size_t channels) {
    for_each_nonzero(spec, g, [&](std::size_t o, std::size_t i) {
        Scalar* dst = in.data() + i * channels;
        const Scalar* src = y.data() + o * channels;
        for (std::size_t c = 0; c < channels; ++c) dst[c] += src[c];
    });
}

/// Checks that `t` and `out_domain` carry the realigned domains of `al`.
void check_aligned(const DomainAlignment& al, const RefDomain& in_domain, const RefDomain& out_domain);

inline Geometry geometry_of(const DomainAlignment& al) { return Geometry{al.d_cap, al.d1, al.d2}; }

/// Applies one basis map to a tensor over the realigned input domain,
/// producing a tensor over the realigned output domain.
template <class Scalar>
BasicPTensor<Scalar> apply_map(const BasisMapSpec& spec, const BasicPTensor<Scalar>& in, const DomainAlignment& al,
                               const RefDomain& out_domain) {
    check_aligned(al, in.domain(), out_domain);
    if (in.order() != spec.k_in()) throw ContractError("input order does not match spec k_in");
    BasicPTensor<Scalar> out(out_domain, spec.k_out(), in.channels());
    accumulate_map<Scalar>(spec, geometry_of(al), in.values(), out.values(), in.channels());
    return out;
}

/// Adjoint of apply_map: takes a tensor over the realigned output domain.
template <class Scalar>
BasicPTensor<Scalar> apply_adjoint(const BasisMapSpec& spec, const BasicPTensor<Scalar>& y, const DomainAlignment& al,
                                   const RefDomain& in_domain) {
    check_aligned(al, in_domain, y.domain());
    if (y.order() != spec.k_out()) throw ContractError("adjoint input order does not match spec k_out");
    BasicPTensor<Scalar> out(in_domain, spec.k_in(), y.channels());
    accumulate_adjoint<Scalar>(spec, geometry_of(al), y.values(), out.values(), y.channels());
    return out;
}

/// Applies a map between tensors given in arbitrary domain orders: aligns,
/// applies in the aligned frame and re-expresses the result over `out_domain`.
template <class Scalar>
BasicPTensor<Scalar> apply_map_unaligned(const BasisMapSpec& spec, const BasicPTensor<Scalar>& in,
                                         const RefDomain& out_domain) {
    const auto al = align_domains(in.domain(), out_domain);
    auto y = apply_map(spec, permute_ptensor(in, al.perm_in), al, al.out_aligned);
    return permute_ptensor(y, al.perm_out.inverse());
}

/// (d2^k_out) x (d1^k_in) 0/1 matrix; column j is the image of the j-th standard basis tensor.
Matrix<std::uint8_t> realize_matrix(const BasisMapSpec& spec, const Geometry& g, std::size_t cap = kDefaultRealizeCap);

/// Same, but in the original (unaligned) orders of D1 and D2.
Matrix<std::uint8_t> realize_matrix(const BasisMapSpec& spec, const RefDomain& in_domain, const RefDomain& out_domain,
                                    std::size_t cap = kDefaultRealizeCap);

/// Exact rank of the vectorized realized maps.
std::size_t span_rank(const std::vector<BasisMapSpec>& specs, const Geometry& g, std::size_t cap = kDefaultRealizeCap);

/// Human-readable formula, e.g. "out[a,b,a] = sum_{c in common} in[c,b,b]".
std::string describe_spec(const BasisMapSpec& spec);

/// Inverse of describe_spec. Throws ParseError.
BasisMapSpec parse_spec_description(const std::string& text);

/// {"v":1,"k_in":..,"k_out":..,"rgs":[..],"flags":{"<block min element, 1-based>":"common"|"all"}}
std::string spec_to_json(const BasisMapSpec& spec);
BasisMapSpec spec_from_json(const std::string& text);

// ---------------------------------------------------------------------------
// Channel-mixing layers

enum class Nonlinearity { Identity, ReLU };
const char* to_string(Nonlinearity n);
Nonlinearity parse_nonlinearity(const std::string& text);

template <class Scalar>
Scalar activate(Nonlinearity n, Scalar x) {
    return n == Nonlinearity::ReLU ? std::max(Scalar(0), x) : x;
}

/// sum over specs of W_spec (C_out x C_in) applied to the spec's map, plus a
/// per-channel bias added to every entry, followed by an entrywise nonlinearity.
template <class Scalar>
struct EquivariantLayer {
    std::vector<BasisMapSpec> specs;
    std::vector<Matrix<Scalar>> weights;
    std::vector<Scalar> bias;
    Nonlinearity nonlinearity = Nonlinearity::Identity;

    std::size_t in_channels() const { return weights.empty() ? 0 : weights.front().cols(); }
    std::size_t out_channels() const { return bias.size(); }

    void validate() const {
        if (specs.size() != weights.size()) throw ContractError("one weight matrix per spec required");
        for (const auto& w : weights)
            if (w.rows() != bias.size() || w.cols() != in_channels())
                throw ContractError("weight matrices must all be C_out x C_in");
        for (std::size_t s = 1; s < specs.size(); ++s)
            if (specs[s].k_in() != specs[0].k_in() || specs[s].k_out() != specs[0].k_out())
                throw ContractError("layer specs must share k_in and k_out");
    }
};

/// Linear part of the layer in the aligned frame: out += sum_s W_s map_s(in).
template <class Scalar>
void accumulate_layer(const EquivariantLayer<Scalar>& layer, const Geometry& g, const BasicPTensor<Scalar>& in,
                      BasicPTensor<Scalar>& out) {
    const std::size_t cin = layer.in_channels(), cout = layer.out_channels();
    if (in.channels() != cin || out.channels() != cout) throw ContractError("layer channel counts do not match tensors");
    std::vector<Scalar> mixed(in.entries() * cout);
    const auto src = in.values();
    for (std::size_t s = 0; s < layer.specs.size(); ++s) {
        const auto& w = layer.weights[s];
        std::fill(mixed.begin(), mixed.end(), Scalar{});
        for (std::size_t e = 0; e < in.entries(); ++e)
            for (std::size_t a = 0; a < cout; ++a) {
                Scalar acc{};
                for (std::size_t b = 0; b < cin; ++b) acc += w(a, b) * src[e * cin + b];
                mixed[e * cout + a] = acc;
            }
        accumulate_map<Scalar>(layer.specs[s], g, mixed, out.values(), cout);
    }
}

template <class Scalar>
void finish_layer(const EquivariantLayer<Scalar>& layer, BasicPTensor<Scalar>& out) {
    const std::size_t C = layer.out_channels();
    auto v = out.values();
    for (std::size_t e = 0; e < out.entries(); ++e)
        for (std::size_t c = 0; c < C; ++c) v[e * C + c] = activate(layer.nonlinearity, v[e * C + c] + layer.bias[c]);
}

template <class Scalar>
BasicPTensor<Scalar> layer_forward(const EquivariantLayer<Scalar>& layer, const BasicPTensor<Scalar>& in,
                                   const DomainAlignment& al, const RefDomain& out_domain) {
    layer.validate();
    check_aligned(al, in.domain(), out_domain);
    if (!layer.specs.empty() && in.order() != layer.specs.front().k_in())
        throw ContractError("input order does not match layer k_in");
    const int k_out = layer.specs.empty() ? 0 : layer.specs.front().k_out();
    BasicPTensor<Scalar> out(out_domain, k_out, layer.out_channels());
    accumulate_layer(layer, geometry_of(al), in, out);
    finish_layer(layer, out);
    return out;
}

}  // namespace ptensor
