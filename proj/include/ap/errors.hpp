#pragma once

#include <stdexcept>
#include <string>

namespace ap {

// Base class for every error thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed textual input. `line` is 1-based; 0 means "not line-specific".
class ParseError : public Error {
public:
    ParseError(std::string source, std::size_t line, const std::string& what)
        : Error(line > 0 ? source + ":" + std::to_string(line) + ": " + what
                         : source + ": " + what),
          source_(std::move(source)),
          line_(line) {}

    const std::string& source() const { return source_; }
    std::size_t line() const { return line_; }

private:
    std::string source_;
    std::size_t line_;
};

// Domain violations (invalid premeasure, bad weight function, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// Machine pair set violates its structural contract (monotone consistency
// or prefix-freeness / functionality). Carries a witness rendered into the
// message by the checker.
class MachineContractError : public Error {
public:
    using Error::Error;
};

// Conditioning on a cylinder of measure zero.
class ZeroMeasureError : public Error {
public:
    using Error::Error;
};

// Construction from an atomic source measure is rejected up front.
class AtomicMeasureError : public Error {
public:
    using Error::Error;
};

// Target approximant decreased in t, or exceeded 1 at the root.
class InvalidApproximantError : public Error {
public:
    using Error::Error;
};

// Encoding/measure incompatibility: some code word has cylinder measure 0.
class IncompatibilityError : public Error {
public:
    explicit IncompatibilityError(const std::string& what, std::size_t index)
        : Error(what), index_(index) {}
    std::size_t index() const { return index_; }

private:
    std::size_t index_;
};

// An explicit resource budget ran out (enumeration scans, expansion caps,
// component caps). `phase` names the exhausted budget.
class BudgetError : public Error {
public:
    BudgetError(std::string phase, const std::string& what)
        : Error(phase + ": " + what), phase_(std::move(phase)) {}
    const std::string& phase() const { return phase_; }

private:
    std::string phase_;
};

// The length schedule is too small for the pending region.
class LengthScheduleError : public Error {
public:
    using Error::Error;
};

// A hypothesis the operation must certify before proceeding failed its
// check: the inputs were well formed, the required bound just does not hold
// (or could not be established at the given budgets).
class CertificationError : public Error {
public:
    using Error::Error;
};

}  // namespace ap
