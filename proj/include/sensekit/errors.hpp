#pragma once

#include <stdexcept>
#include <string>

namespace sensekit {

/// Malformed or inconsistent user input (files, records, indices).
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A numeric operation produced or received NaN/Inf.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Artifacts built under incompatible configurations (weights vs cache,
/// checkpoint vs inventory, context-mode mismatches).
struct ConfigMismatchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace sensekit
