#pragma once

#include <stdexcept>
#include <string>

namespace nids {

// Malformed input data (bad file contents, unknown labels, schema violations).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad configuration or arguments.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Persisted artifact that cannot be read back (format/version skew).
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace nids
