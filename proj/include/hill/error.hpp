#pragma once

#include <stdexcept>
#include <string>

namespace hill {

// Base of all domain failures. `stage` names the module operation that failed
// so the CLI can report where a pipeline stopped.
class Error : public std::runtime_error {
public:
    Error(std::string stage, const std::string& what)
        : std::runtime_error(stage + ": " + what), stage_(std::move(stage)), message_(what) {}

    const std::string& stage() const noexcept { return stage_; }
    // what() without the stage prefix
    const std::string& message() const noexcept { return message_; }

private:
    std::string stage_;
    std::string message_;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class PropagationError : public Error {
public:
    PropagationError(const std::string& what, double a, double b)
        : Error("propagator", what + " on [" + std::to_string(a) + ", " + std::to_string(b) + "]"),
          a_(a), b_(b) {}

    double a() const noexcept { return a_; }
    double b() const noexcept { return b_; }

private:
    double a_, b_;
};

class NotElliptic : public Error {
public:
    explicit NotElliptic(double trace)
        : Error("floquet", "not elliptic (trace " + std::to_string(trace) + ")"), trace_(trace) {}

    double trace() const noexcept { return trace_; }

private:
    double trace_;
};

// Raised when a request would exceed a configured computational budget.
class BudgetExceeded : public Error {
public:
    using Error::Error;
};

} // namespace hill
