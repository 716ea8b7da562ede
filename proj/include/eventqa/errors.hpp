#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace eventqa {

/// Base of every error raised by the library. The CLI maps these to exit code 3.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (overlapping spawns, unknown ids, schema violations).
class InputError : public Error {
public:
    using Error::Error;
};

class InfeasibleInterception : public Error {
public:
    using Error::Error;
};

class GenerationExhausted : public Error {
public:
    using Error::Error;
};

/// Static type error in a program. `node` is the index of the offending node.
class ProgramTypeError : public Error {
public:
    ProgramTypeError(int node, const std::string& what)
        : Error("node " + std::to_string(node) + ": " + what), node_(node) {}
    int node() const noexcept { return node_; }

private:
    int node_;
};

/// Runtime failure while executing a program node (Unique on a non-singleton, etc).
class ExecError : public Error {
public:
    ExecError(int node, const std::string& what)
        : Error("node " + std::to_string(node) + ": " + what), node_(node) {}
    int node() const noexcept { return node_; }

private:
    int node_;
};

/// Question or choice text outside the grammar. `position` is a token index.
class ParseError : public Error {
public:
    ParseError(std::size_t position, const std::string& what)
        : Error("token " + std::to_string(position) + ": " + what), position_(position) {}
    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

}  // namespace eventqa
