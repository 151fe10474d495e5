#ifndef TABREG_ERROR_HPP
#define TABREG_ERROR_HPP

#include <stdexcept>
#include <string>

namespace tabreg {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration: bad parameter values, unknown keys, malformed specs.
/// The CLI maps this to exit code 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Data or I/O problem: missing files, schema mismatches, degenerate inputs.
/// The CLI maps this to exit code 3.
class DataError : public Error {
public:
    using Error::Error;
};

} // namespace tabreg

#endif
