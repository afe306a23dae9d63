#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ccopf {

/// Malformed or inconsistent input: case files, configs, out-of-range parameters.
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& what) : std::runtime_error(what) {}

    InputError(const std::string& what, int line, int column)
        : std::runtime_error(what + " (line " + std::to_string(line) + ", column " +
                             std::to_string(column) + ")"),
          line_(line),
          column_(column) {}

    /// 1-based source position, or 0 when the error is not tied to a location.
    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    int line_ = 0;
    int column_ = 0;
};

/// The reduced Laplacian is singular: the grid has more than one component.
class DisconnectedGridError : public InputError {
public:
    using InputError::InputError;
};

/// An optimization problem has no feasible point. `binding()` names the
/// constraint classes that had to be relaxed to restore feasibility.
class InfeasibleError : public std::runtime_error {
public:
    InfeasibleError(const std::string& what, std::vector<std::string> binding)
        : std::runtime_error(what), binding_(std::move(binding)) {}

    const std::vector<std::string>& binding() const noexcept { return binding_; }

private:
    std::vector<std::string> binding_;
};

/// The solver could not reach its tolerances for reasons other than infeasibility.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ccopf
