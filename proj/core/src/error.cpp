#include "mal/error.hpp"

#include <sstream>

namespace mal {

namespace {

template <typename... Args>
std::string concat(const Args&... args) {
    std::ostringstream os;
    os.precision(17);
    (os << ... << args);
    return os.str();
}

}  // namespace

NotKahler::NotKahler(double min_density)
    : Error(concat("not a Kahler potential: minimum Monge-Ampere density ", min_density)),
      min_density_(min_density) {}

MassMismatch::MassMismatch(double mass_a, double mass_b)
    : Error(concat("total masses differ: ", mass_a, " vs ", mass_b)), mass_a_(mass_a), mass_b_(mass_b) {}

NotEquidistributed::NotEquidistributed(double discrepancy)
    : Error(concat("inputs are not equidistributed (discrepancy ", discrepancy, ")")),
      discrepancy_(discrepancy) {}

StepUnstable::StepUnstable(double displacement, double cell_width)
    : Error(concat("flow substep moved a point by ", displacement, " > cell width ", cell_width,
                   "; increase substeps")),
      displacement_(displacement) {}

NonConvergence::NonConvergence(int iterations, double residual)
    : Error(concat("solver did not converge after ", iterations, " iterations (residual ", residual, ")")),
      iterations_(iterations),
      residual_(residual) {}

PositivityLoss::PositivityLoss(std::size_t time_index, std::size_t cell)
    : Error(concat("iterate left the positive-density set at knot ", time_index, ", cell ", cell)),
      time_index_(time_index),
      cell_(cell) {}

PerturbationTooLarge::PerturbationTooLarge(double delta)
    : Error(concat("endpoint perturbation of size ", delta, " leaves the potential space")) {}

HomogeneityRequired::HomogeneityRequired(const std::string& spec_text)
    : Error(concat("Lagrangian '", spec_text, "' is not positively homogeneous")) {}

GenerationFailed::GenerationFailed(std::size_t knot, int shrinkages)
    : Error(concat("could not place competitor knot ", knot, " after ", shrinkages, " shrinkages")) {}

}  // namespace mal
