#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace rh {

// Mirrors the rh_status codes of the C API.
enum class ErrorKind {
    domain = 1,
    numerical = 2,
    validation = 3,
    accuracy = 4,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(ErrorKind::domain, what) {}
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

// Raised when a curve violates its admissibility conditions. Carries the
// indices of the offending grid nodes.
class ValidationError : public Error {
public:
    ValidationError(const std::string& what, std::vector<std::size_t> nodes)
        : Error(ErrorKind::validation, what), nodes_(std::move(nodes)) {}
    const std::vector<std::size_t>& nodes() const noexcept { return nodes_; }

private:
    std::vector<std::size_t> nodes_;
};

// Fourier quadrature could not reach its tolerance; tail_bound is the
// estimated truncation error at the largest frequency used.
class AccuracyError : public Error {
public:
    AccuracyError(const std::string& what, double tail_bound)
        : Error(ErrorKind::accuracy, what), tail_bound_(tail_bound) {}
    double tail_bound() const noexcept { return tail_bound_; }

private:
    double tail_bound_;
};

}  // namespace rh
