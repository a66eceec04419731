#pragma once

#include <stdexcept>
#include <string>

namespace relanno {

/// Input or configuration did not satisfy a documented contract. CLI exit code 1.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// A referenced entity (run, instance id, file) does not exist.
class NotFoundError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// A remote call failed after exhausting its retry budget. CLI exit code 2.
class TransportError : public std::runtime_error {
public:
    TransportError(const std::string& what, int attempts)
        : std::runtime_error(what), attempts_(attempts) {}

    int attempts() const noexcept { return attempts_; }

private:
    int attempts_;
};

} // namespace relanno
