#pragma once

#include <stdexcept>
#include <string>

namespace corrugate {

// Exit code attached to each error family by the command-line front end.
enum class ErrorKind { Input = 2, Nonconvergence = 3, Capability = 4, Numerical = 1 };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct InputError : Error {
    explicit InputError(const std::string& w) : Error(ErrorKind::Input, w) {}
};
struct CapabilityError : Error {
    explicit CapabilityError(const std::string& w) : Error(ErrorKind::Capability, w) {}
};
struct NonconvergenceError : Error {
    explicit NonconvergenceError(const std::string& w) : Error(ErrorKind::Nonconvergence, w) {}
};
struct AliasingError : Error {
    explicit AliasingError(const std::string& w) : Error(ErrorKind::Input, w) {}
};
struct CoverageError : Error {
    explicit CoverageError(const std::string& w) : Error(ErrorKind::Nonconvergence, w) {}
};
struct PropagationError : Error {
    explicit PropagationError(const std::string& w) : Error(ErrorKind::Numerical, w) {}
};
struct ResolutionError : Error {
    explicit ResolutionError(const std::string& w) : Error(ErrorKind::Capability, w) {}
};
struct SingularityError : Error {
    explicit SingularityError(const std::string& w) : Error(ErrorKind::Numerical, w) {}
};
struct ConsistencyError : Error {
    explicit ConsistencyError(const std::string& w) : Error(ErrorKind::Numerical, w) {}
};
struct StageError : Error {
    explicit StageError(const std::string& w) : Error(ErrorKind::Nonconvergence, w) {}
};
struct DivergenceError : Error {
    explicit DivergenceError(const std::string& w) : Error(ErrorKind::Nonconvergence, w) {}
};

}  // namespace corrugate
