#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dgparam {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NonFiniteInput : public Error {
public:
    using Error::Error;
};

class NonFiniteState : public Error {
public:
    using Error::Error;
};

class NoEquilibrium : public Error {
public:
    using Error::Error;
};

class SimulationBlewUp : public Error {
public:
    SimulationBlewUp(double time, const std::string& what)
        : Error(what), time_(time) {}

    /// Simulation time (s) of the first offending grid point.
    double time() const noexcept { return time_; }

private:
    double time_;
};

class SingularNormalMatrix : public Error {
public:
    SingularNormalMatrix(double condition, const std::string& what)
        : Error(what), condition_(condition) {}

    double condition() const noexcept { return condition_; }

private:
    double condition_;
};

class StalledIteration : public Error {
public:
    using Error::Error;
};

class OutOfBounds : public Error {
public:
    OutOfBounds(std::size_t index, const std::string& what)
        : Error(what), index_(index) {}

    /// Position of the offending entry in the free-parameter vector.
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

class BadBounds : public Error {
public:
    using Error::Error;
};

class AllInfeasible : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& reason)
        : Error("line " + std::to_string(line) + ": " + reason), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class NonMonotonicTime : public ParseError {
public:
    explicit NonMonotonicTime(std::size_t line)
        : ParseError(line, "time stamps must be strictly increasing") {}
};

}  // namespace dgparam
