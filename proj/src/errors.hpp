#pragma once

#include <stdexcept>
#include <string>

namespace canopy {

// Error categories; the CLI and C API map these to exit/status codes.
class Error : public std::runtime_error {
public:
    enum class Kind { Usage, Domain, Config, Data, Numeric, Io };

    Error(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

// Bad command-line invocation.
struct UsageError : Error {
    explicit UsageError(const std::string& w) : Error(Kind::Usage, w) {}
};

// Argument value outside its documented domain.
struct DomainError : Error {
    explicit DomainError(const std::string& w) : Error(Kind::Domain, w) {}
};

// Invalid or inconsistent configuration.
struct ConfigError : Error {
    explicit ConfigError(const std::string& w) : Error(Kind::Config, w) {}
};

// Malformed input data or file format.
struct DataError : Error {
    explicit DataError(const std::string& w) : Error(Kind::Data, w) {}
};

// Numerical failure (non-PD kernel matrix, non-finite objective, ...).
struct NumericError : Error {
    explicit NumericError(const std::string& w) : Error(Kind::Numeric, w) {}
};

struct IoError : Error {
    explicit IoError(const std::string& w) : Error(Kind::Io, w) {}
};

}  // namespace canopy
