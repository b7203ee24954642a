#pragma once

#include <stdexcept>
#include <string>

namespace dualsynth {

/// Malformed or inconsistent user input (problem files, specs, arguments).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A soundness check failed; always a bug, never a user error.
class InternalError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// A request the library declines to serve (e.g. controller outside its winning region).
class RefusalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace dualsynth
