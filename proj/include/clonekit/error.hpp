#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace clonekit {

class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Wrong number of inputs, mismatched component arities, arity overflow.
class arity_error : public error {
public:
    using error::error;
};

// Operation would produce a nullary function.
class convention_error : public error {
public:
    using error::error;
};

// A combinatorial bound (matrix count, enumeration size) was exceeded.
class resource_error : public error {
public:
    using error::error;
};

// Malformed term, family binding or matrix data.
class structural_error : public error {
public:
    using error::error;
};

class parse_error : public error {
public:
    parse_error(const std::string& what, std::size_t pos)
        : error(what + " at position " + std::to_string(pos)), pos_(pos) {}
    std::size_t position() const noexcept { return pos_; }

private:
    std::size_t pos_;
};

// Unknown names, scopes, suites and out-of-range parameters.
class usage_error : public error {
public:
    using error::error;
};

}  // namespace clonekit
