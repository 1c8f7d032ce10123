#pragma once

#include <stdexcept>
#include <string>

namespace lcfollow {

/// Broad failure classes; the CLI maps these onto exit codes.
enum class ErrorKind { usage, data, numerical };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Malformed input files, invalid parameters, missing series.
class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

/// Singular systems, non-finite losses, inference with no active rule.
class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

class NoRuleFiresError : public NumericalError {
public:
    explicit NoRuleFiresError(const std::string& what) : NumericalError(what) {}
};

class SingularSystemError : public NumericalError {
public:
    explicit SingularSystemError(const std::string& what) : NumericalError(what) {}
};

}  // namespace lcfollow
