#include "tecell/errors.hpp"

namespace tecell {

std::string_view to_string(SolverStage stage)
{
    switch (stage) {
    case SolverStage::Potential: return "potential";
    case SolverStage::Heat: return "heat";
    case SolverStage::Picard: return "picard";
    case SolverStage::Constraint: return "constraint";
    case SolverStage::Oracle: return "oracle";
    }
    return "unknown";
}

SolverError::SolverError(SolverStage stage, const std::string& message, std::vector<double> trace)
    : std::runtime_error(std::string(to_string(stage)) + " stage: " + message),
      stage_(stage),
      trace_(std::move(trace))
{
}

}  // namespace tecell
