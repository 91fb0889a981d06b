#include "ptensor/maps.hpp"

#include <cctype>
#include <map>
#include <sstream>

#include "json.hpp"

#include "ptensor/error.hpp"
#include "ptensor/linalg.hpp"

namespace ptensor {

const char* to_string(Variant v) { return v == Variant::CommonOnly ? "common" : "all"; }

const char* to_string(MapMode m) { return m == MapMode::SameDomain ? "same" : "overlap"; }

MapMode parse_map_mode(const std::string& text) {
    if (text == "same") return MapMode::SameDomain;
    if (text == "overlap") return MapMode::Overlap;
    throw ContractError("unknown map mode '" + text + "' (expected same|overlap)");
}

const char* to_string(Nonlinearity n) { return n == Nonlinearity::ReLU ? "relu" : "identity"; }

Nonlinearity parse_nonlinearity(const std::string& text) {
    if (text == "identity") return Nonlinearity::Identity;
    if (text == "relu") return Nonlinearity::ReLU;
    throw ContractError("unknown nonlinearity '" + text + "' (expected identity|relu)");
}

BasisMapSpec::BasisMapSpec(int k_in, int k_out, SetPartition partition, std::vector<std::optional<Variant>> flags)
    : k_in_(k_in), k_out_(k_out), partition_(std::move(partition)), flags_(std::move(flags)) {
    auto c = classify_partition(partition_, k_out_, k_in_);
    roles_ = std::move(c.roles);
    type_ = c.type;
    if (flags_.size() != roles_.size()) throw ContractError("one flag slot per block required");
    for (std::size_t b = 0; b < roles_.size(); ++b) {
        const bool pure = roles_[b] != BlockRole::Mixed;
        if (pure != flags_[b].has_value())
            throw ContractError("block " + std::to_string(b) + ": flags must be present exactly for pure blocks");
    }
}

BasisMapSpec BasisMapSpec::normalized_same_domain() const {
    auto flags = flags_;
    for (auto& f : flags)
        if (f) f = Variant::All;
    return BasisMapSpec(k_in_, k_out_, partition_, std::move(flags));
}

std::vector<BasisMapSpec> enumerate_specs(int k_in, int k_out, MapMode mode, int cap) {
    if (k_in < 0 || k_out < 0) throw ContractError("negative tensor order");
    if (k_in + k_out > cap)
        throw SizeError("spec enumeration for k_in + k_out = " + std::to_string(k_in + k_out) + " exceeds cap " +
                        std::to_string(cap));
    std::vector<BasisMapSpec> out;
    for_each_partition(k_in + k_out, [&](const SetPartition& p) {
        const auto roles = classify_partition(p, k_out, k_in).roles;
        std::vector<std::size_t> pure;
        for (std::size_t b = 0; b < roles.size(); ++b)
            if (roles[b] != BlockRole::Mixed) pure.push_back(b);
        const std::size_t variants = mode == MapMode::Overlap ? (std::size_t{1} << pure.size()) : 1;
        for (std::size_t code = 0; code < variants; ++code) {
            std::vector<std::optional<Variant>> flags(roles.size());
            for (std::size_t j = 0; j < pure.size(); ++j) {
                bool all = mode == MapMode::SameDomain || ((code >> (pure.size() - 1 - j)) & 1u);
                flags[pure[j]] = all ? Variant::All : Variant::CommonOnly;
            }
            out.emplace_back(k_in, k_out, p, std::move(flags));
        }
        return true;
    });
    return out;
}

void validate_geometry(const Geometry& g) {
    if (g.d_cap > g.d1 || g.d_cap > g.d2) throw ContractError("geometry: d_cap exceeds a domain size");
}

namespace detail {

std::vector<BlockPlan> plan_blocks(const BasisMapSpec& spec, const Geometry& g) {
    validate_geometry(g);
    const int k_out = spec.k_out(), k_in = spec.k_in();
    std::vector<BlockPlan> plan(spec.roles().size());
    for (std::size_t b = 0; b < plan.size(); ++b) {
        const auto& flag = spec.flags()[b];
        switch (spec.roles()[b]) {
        case BlockRole::Mixed: plan[b].range = g.d_cap; break;
        case BlockRole::PureInput: plan[b].range = *flag == Variant::All ? g.d1 : g.d_cap; break;
        case BlockRole::PureOutput: plan[b].range = *flag == Variant::All ? g.d2 : g.d_cap; break;
        }
    }
    // row-major strides, last mode fastest
    std::size_t stride = 1;
    for (int m = k_out - 1; m >= 0; --m) {
        plan[static_cast<std::size_t>(spec.partition().block_of(m))].out_stride += stride;
        stride *= g.d2;
    }
    stride = 1;
    for (int m = k_in - 1; m >= 0; --m) {
        plan[static_cast<std::size_t>(spec.partition().block_of(k_out + m))].in_stride += stride;
        stride *= g.d1;
    }
    return plan;
}

}  // namespace detail

void check_aligned(const DomainAlignment& al, const RefDomain& in_domain, const RefDomain& out_domain) {
    if (in_domain != al.in_aligned)
        throw ContractError("input domain " + in_domain.to_string() + " is not the realigned domain " +
                            al.in_aligned.to_string());
    if (out_domain != al.out_aligned)
        throw ContractError("output domain " + out_domain.to_string() + " is not the realigned domain " +
                            al.out_aligned.to_string());
}

namespace {

std::pair<std::size_t, std::size_t> realized_shape(const BasisMapSpec& spec, const Geometry& g, std::size_t cap) {
    const std::size_t rows = checked_power(g.d2, spec.k_out(), cap);
    const std::size_t cols = checked_power(g.d1, spec.k_in(), cap);
    if (cols != 0 && rows > cap / cols) throw SizeError("realized matrix exceeds cap " + std::to_string(cap));
    return {rows, cols};
}

// Maps a row-major offset over aligned positions to one over original positions.
std::vector<std::size_t> offset_table(const Permutation& to_aligned, int order) {
    const auto back = to_aligned.inverse();
    const std::size_t d = to_aligned.size();
    const std::size_t n = checked_power(d, order, kDefaultRealizeCap);
    std::vector<std::size_t> table(n);
    std::vector<std::size_t> idx(static_cast<std::size_t>(order), 0);
    for (std::size_t off = 0; off < n; ++off) {
        std::size_t orig = 0;
        for (auto i : idx) orig = orig * d + back[i];
        table[off] = orig;
        for (std::size_t m = idx.size(); m-- > 0;) {
            if (++idx[m] < d) break;
            idx[m] = 0;
        }
    }
    return table;
}

}  // namespace

Matrix<std::uint8_t> realize_matrix(const BasisMapSpec& spec, const Geometry& g, std::size_t cap) {
    const auto [rows, cols] = realized_shape(spec, g, cap);
    Matrix<std::uint8_t> m(rows, cols);
    for_each_nonzero(spec, g, [&](std::size_t o, std::size_t i) { m(o, i) = 1; });
    return m;
}

Matrix<std::uint8_t> realize_matrix(const BasisMapSpec& spec, const RefDomain& in_domain, const RefDomain& out_domain,
                                    std::size_t cap) {
    const auto al = align_domains(in_domain, out_domain);
    const Geometry g = geometry_of(al);
    const auto [rows, cols] = realized_shape(spec, g, cap);
    const auto out_map = offset_table(al.perm_out, spec.k_out());
    const auto in_map = offset_table(al.perm_in, spec.k_in());
    Matrix<std::uint8_t> m(rows, cols);
    for_each_nonzero(spec, g, [&](std::size_t o, std::size_t i) { m(out_map[o], in_map[i]) = 1; });
    return m;
}

std::size_t span_rank(const std::vector<BasisMapSpec>& specs, const Geometry& g, std::size_t cap) {
    if (specs.empty()) return 0;
    const auto [rows, cols] = realized_shape(specs.front(), g, cap);
    ExactRowReducer reducer(rows * cols);
    for (const auto& spec : specs) {
        if (spec.k_in() != specs.front().k_in() || spec.k_out() != specs.front().k_out())
            throw ContractError("span_rank: specs must share k_in and k_out");
        SparseRow row;
        for_each_nonzero(spec, g, [&](std::size_t o, std::size_t i) { row.emplace_back(o * cols + i, Rational(1)); });
        std::sort(row.begin(), row.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        reducer.add_row(row);
    }
    return reducer.rank();
}

// ---------------------------------------------------------------------------
// Text form

namespace {

// Letter for each block: index blocks (those with an output mode) take a, b, ...
// in block order; summation letters start at 'c' or after the last index letter.
std::vector<char> block_letters(const BasisMapSpec& spec) {
    std::size_t n_index = 0;
    for (auto r : spec.roles())
        if (r != BlockRole::PureInput) ++n_index;
    std::vector<char> letters(spec.roles().size());
    std::size_t next_sum = std::max<std::size_t>(2, n_index);
    std::size_t next_index = 0;
    for (std::size_t b = 0; b < letters.size(); ++b) {
        const std::size_t pos = spec.roles()[b] == BlockRole::PureInput ? next_sum++ : next_index++;
        letters[b] = static_cast<char>('a' + pos);
    }
    return letters;
}

}  // namespace

std::string describe_spec(const BasisMapSpec& spec) {
    const auto letters = block_letters(spec);
    const auto& part = spec.partition();
    std::ostringstream os;
    os << "out[";
    for (int m = 0; m < spec.k_out(); ++m) os << (m ? "," : "") << letters[static_cast<std::size_t>(part.block_of(m))];
    os << "] = ";
    for (std::size_t b = 0; b < letters.size(); ++b) {
        if (spec.roles()[b] != BlockRole::PureInput) continue;
        os << "sum_{" << letters[b] << " in " << (*spec.flags()[b] == Variant::All ? "D1" : "common") << "} ";
    }
    os << "in[";
    for (int m = 0; m < spec.k_in(); ++m)
        os << (m ? "," : "") << letters[static_cast<std::size_t>(part.block_of(spec.k_out() + m))];
    os << "]";
    std::vector<char> broadcast;
    for (std::size_t b = 0; b < letters.size(); ++b)
        if (spec.roles()[b] == BlockRole::PureOutput && *spec.flags()[b] == Variant::All) broadcast.push_back(letters[b]);
    if (!broadcast.empty()) {
        os << " for all ";
        for (std::size_t i = 0; i < broadcast.size(); ++i) os << (i ? ", " : "") << broadcast[i];
        os << " in D2";
    }
    return os.str();
}

namespace {

class DescriptionParser {
public:
    explicit DescriptionParser(const std::string& text) : s_(text) {}

    BasisMapSpec parse() {
        expect("out[");
        auto out_letters = letter_list(']');
        expect("] = ");
        std::map<char, Variant> sums;
        while (peek("sum_{")) {
            expect("sum_{");
            char v = letter();
            expect(" in ");
            Variant var;
            if (peek("common")) {
                expect("common");
                var = Variant::CommonOnly;
            } else {
                expect("D1");
                var = Variant::All;
            }
            expect("} ");
            if (!sums.emplace(v, var).second) fail("summation letter repeated");
        }
        expect("in[");
        auto in_letters = letter_list(']');
        expect("]");
        std::vector<char> broadcast;
        if (peek(" for all ")) {
            expect(" for all ");
            broadcast.push_back(letter());
            while (peek(", ")) {
                expect(", ");
                broadcast.push_back(letter());
            }
            expect(" in D2");
        }
        if (pos_ != s_.size()) fail("trailing characters");

        std::vector<char> all = out_letters;
        all.insert(all.end(), in_letters.begin(), in_letters.end());
        std::map<char, int> label;
        std::vector<int> rgs;
        for (char c : all) {
            auto [it, fresh] = label.emplace(c, static_cast<int>(label.size()));
            rgs.push_back(it->second);
        }
        const int k_out = static_cast<int>(out_letters.size()), k_in = static_cast<int>(in_letters.size());
        auto partition = SetPartition::from_rgs(rgs);
        auto roles = classify_partition(partition, k_out, k_in).roles;
        std::vector<char> block_letter(roles.size());
        for (auto [c, b] : label) block_letter[static_cast<std::size_t>(b)] = c;
        std::vector<std::optional<Variant>> flags(roles.size());
        for (std::size_t b = 0; b < roles.size(); ++b) {
            const char c = block_letter[b];
            const bool summed = sums.count(c) > 0;
            const bool bcast = std::find(broadcast.begin(), broadcast.end(), c) != broadcast.end();
            switch (roles[b]) {
            case BlockRole::PureInput:
                if (!summed) fail(std::string("input-only index '") + c + "' is not summed");
                flags[b] = sums[c];
                break;
            case BlockRole::PureOutput:
                if (summed) fail(std::string("output index '") + c + "' cannot be summed");
                flags[b] = bcast ? Variant::All : Variant::CommonOnly;
                break;
            case BlockRole::Mixed:
                if (summed || bcast) fail(std::string("transfer index '") + c + "' cannot be summed or broadcast");
                break;
            }
        }
        for (auto [c, v] : sums)
            if (!label.count(c)) fail(std::string("summation letter '") + c + "' unused");
        for (char c : broadcast)
            if (!label.count(c)) fail(std::string("broadcast letter '") + c + "' unused");
        return BasisMapSpec(k_in, k_out, std::move(partition), std::move(flags));
    }

private:
    [[noreturn]] void fail(const std::string& why) const {
        throw ParseError("map description, column " + std::to_string(pos_ + 1) + ": " + why);
    }
    bool peek(const std::string& tok) const { return s_.compare(pos_, tok.size(), tok) == 0; }
    void expect(const std::string& tok) {
        if (!peek(tok)) fail("expected '" + tok + "'");
        pos_ += tok.size();
    }
    char letter() {
        if (pos_ >= s_.size() || !std::islower(static_cast<unsigned char>(s_[pos_]))) fail("expected an index letter");
        return s_[pos_++];
    }
    std::vector<char> letter_list(char close) {
        std::vector<char> out;
        if (pos_ < s_.size() && s_[pos_] == close) return out;
        out.push_back(letter());
        while (pos_ < s_.size() && s_[pos_] == ',') {
            ++pos_;
            out.push_back(letter());
        }
        return out;
    }

    const std::string& s_;
    std::size_t pos_ = 0;
};

}  // namespace

BasisMapSpec parse_spec_description(const std::string& text) { return DescriptionParser(text).parse(); }

std::string spec_to_json(const BasisMapSpec& spec) {
    nlohmann::ordered_json j;
    j["v"] = 1;
    j["k_in"] = spec.k_in();
    j["k_out"] = spec.k_out();
    j["rgs"] = spec.partition().rgs();
    nlohmann::ordered_json flags = nlohmann::ordered_json::object();
    const auto blocks = spec.partition().blocks();
    for (std::size_t b = 0; b < blocks.size(); ++b)
        if (spec.flags()[b]) flags[std::to_string(blocks[b].front() + 1)] = to_string(*spec.flags()[b]);
    j["flags"] = std::move(flags);
    return j.dump();
}

BasisMapSpec spec_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("spec JSON: ") + e.what());
    }
    try {
        if (j.at("v").get<int>() != 1) throw ParseError("spec JSON: unsupported version");
        const int k_in = j.at("k_in").get<int>(), k_out = j.at("k_out").get<int>();
        auto partition = SetPartition::from_rgs(j.at("rgs").get<std::vector<int>>());
        const auto blocks = partition.blocks();
        std::vector<std::optional<Variant>> flags(blocks.size());
        std::map<std::string, std::size_t> by_min;
        for (std::size_t b = 0; b < blocks.size(); ++b) by_min[std::to_string(blocks[b].front() + 1)] = b;
        for (const auto& [key, value] : j.at("flags").items()) {
            auto it = by_min.find(key);
            if (it == by_min.end()) throw ParseError("spec JSON: flag key " + key + " is not a block minimum");
            const auto v = value.get<std::string>();
            if (v == "common")
                flags[it->second] = Variant::CommonOnly;
            else if (v == "all")
                flags[it->second] = Variant::All;
            else
                throw ParseError("spec JSON: flag value must be common|all");
        }
        return BasisMapSpec(k_in, k_out, std::move(partition), std::move(flags));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("spec JSON: ") + e.what());
    } catch (const ContractError& e) {
        throw ParseError(std::string("spec JSON: ") + e.what());
    }
}

}  // namespace ptensor
