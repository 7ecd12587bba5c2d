#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace aet {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an input value was violated (bad size, out-of-range angle, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A conductivity fell below the admissibility floor.
class AdmissibilityError : public Error {
public:
    using Error::Error;
};

/// A linear solve or factorization failed, or missed its residual target.
class SolverError : public Error {
public:
    SolverError(const std::string& what, double achieved_residual)
        : Error(what), residual_(achieved_residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

class IoError : public Error {
public:
    using Error::Error;
};

using WarningHandler = std::function<void(const std::string&)>;

/// Installs a process-wide sink for non-fatal warnings and returns the previous one.
/// The default handler prints to stderr.
WarningHandler set_warning_handler(WarningHandler handler);

void warn(const std::string& message);

}  // namespace aet
