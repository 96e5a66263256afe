#pragma once

#include <stdexcept>
#include <string>

namespace gumbelmark {

/// Caller supplied an argument outside an operation's domain.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed or inconsistent data read from a file or buffer.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Internal consistency check failed.
class InvariantError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

inline void require(bool ok, const std::string& what) {
    if (!ok) throw InputError(what);
}

}  // namespace gumbelmark
