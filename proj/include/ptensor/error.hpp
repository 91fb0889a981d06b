#pragma once

#include <stdexcept>
#include <string>

namespace ptensor {

// Base class for every failure raised by the library. The CLI maps each
// subclass onto a documented exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A configured size cap (Bell cap, enumeration cap, group order, ...) was exceeded.
class SizeError : public Error {
public:
    using Error::Error;
};

// Caller violated a precondition (shape mismatch, unaligned domains, bad permutation).
class ContractError : public Error {
public:
    using Error::Error;
};

// Overlap maps were requested between two domains with no common atom.
class DisjointDomainsError : public ContractError {
public:
    using ContractError::ContractError;
};

// Malformed text input. `line()` is 1-based, 0 when not applicable.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Model configuration that cannot be executed. `layer()` is the 0-based
// offending layer, or -1 for model-level problems.
class ConfigError : public Error {
public:
    ConfigError(const std::string& what, int layer = -1)
        : Error(layer >= 0 ? "layer " + std::to_string(layer) + ": " + what : what),
          layer_(layer) {}
    int layer() const noexcept { return layer_; }

private:
    int layer_;
};

// An output neuron had no contributing input neuron.
class IsolatedNeuronError : public Error {
public:
    using Error::Error;
};

// Two independent computations of the same quantity disagreed.
class ConsistencyError : public Error {
public:
    using Error::Error;
};

}  // namespace ptensor
