#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tecell {

/// Malformed or out-of-range configuration input (maps to CLI exit code 3).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Fields that do not match the mesh they are used with, or data attached to
/// the wrong region. Distinct from a failed hypothesis check.
class StructuralError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

enum class SolverStage { Potential, Heat, Picard, Constraint, Oracle };

std::string_view to_string(SolverStage stage);

/// Nonlinear or linear solve failure. Carries the stage that failed and the
/// residual history up to the failure.
class SolverError : public std::runtime_error {
public:
    SolverError(SolverStage stage, const std::string& message, std::vector<double> trace = {});

    SolverStage stage() const noexcept { return stage_; }
    const std::vector<double>& trace() const noexcept { return trace_; }

private:
    SolverStage stage_;
    std::vector<double> trace_;
};

}  // namespace tecell
