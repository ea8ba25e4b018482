#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace canonoid {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SyntaxError : public Error {
public:
    SyntaxError(std::size_t position, const std::string& message)
        : Error("syntax error at position " + std::to_string(position) + ": " + message),
          position_(position) {}
    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

class UnknownVariable : public Error {
public:
    explicit UnknownVariable(const std::string& name)
        : Error("unknown variable '" + name + "'"), name_(name) {}
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

class UnknownFunction : public Error {
public:
    explicit UnknownFunction(const std::string& name)
        : Error("unknown function '" + name + "'"), name_(name) {}
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

/// Evaluation left the real domain; `subexpression` is the offending node re-serialized.
class DomainError : public Error {
public:
    DomainError(const std::string& what, const std::string& subexpression)
        : Error(what + " in '" + subexpression + "'"), subexpression_(subexpression) {}
    const std::string& subexpression() const noexcept { return subexpression_; }

private:
    std::string subexpression_;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class WrongGeometry : public Error {
public:
    using Error::Error;
};

class InvalidTransform : public Error {
public:
    using Error::Error;
};

class SingularJacobian : public Error {
public:
    using Error::Error;
};

class SingularReeb : public Error {
public:
    using Error::Error;
};

class SingularPullback : public Error {
public:
    using Error::Error;
};

class NonCanonoid : public Error {
public:
    using Error::Error;
};

class StepFailure : public Error {
public:
    using Error::Error;
};

/// Configuration schema violation; `path` names the offending field (e.g. "trajectory.x0.q1").
class ConfigError : public Error {
public:
    ConfigError(const std::string& path, const std::string& message)
        : Error("config error at '" + path + "': " + message), path_(path) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

}  // namespace canonoid
