#pragma once

#include <stdexcept>
#include <string>

namespace vrpkit {

// Malformed instance text. line is 1-based, 0 when not tied to a line.
class ParseError : public std::runtime_error {
public:
    ParseError(std::string message, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message
                                      : message),
          line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

// No feasible construction exists (e.g. a customer that cannot be served alone).
class ConstructionError : public std::runtime_error {
public:
    ConstructionError(std::string message, int node = 0)
        : std::runtime_error(std::move(message)), node_(node) {}
    int node() const { return node_; }

private:
    int node_;
};

// A solution that should have been feasible failed validation: an internal bug,
// never an input problem.
class SolverDefect : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad provider/CLI configuration (missing key, bad endpoint, ...).
class ConfigError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Transport or format failure talking to a text-model provider.
class ProviderError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace vrpkit
