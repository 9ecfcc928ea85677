#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mal {

/// Base class of every failure the library reports. Precondition violations
/// on plain arguments use std::invalid_argument instead.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A field was offered as a potential but 1 + lap(u)/2 is not positive.
class NotKahler : public Error {
public:
    explicit NotKahler(double min_density);
    double min_density() const noexcept { return min_density_; }

private:
    double min_density_;
};

class MassMismatch : public Error {
public:
    MassMismatch(double mass_a, double mass_b);
    double mass_a() const noexcept { return mass_a_; }
    double mass_b() const noexcept { return mass_b_; }

private:
    double mass_a_;
    double mass_b_;
};

class NotEquidistributed : public Error {
public:
    explicit NotEquidistributed(double discrepancy);
    double discrepancy() const noexcept { return discrepancy_; }

private:
    double discrepancy_;
};

/// A flow substep displaced some point by more than one cell width.
class StepUnstable : public Error {
public:
    StepUnstable(double displacement, double cell_width);
    double displacement() const noexcept { return displacement_; }

private:
    double displacement_;
};

class NonConvergence : public Error {
public:
    NonConvergence(int iterations, double residual);
    int iterations() const noexcept { return iterations_; }
    double residual() const noexcept { return residual_; }

private:
    int iterations_;
    double residual_;
};

/// Damping could not keep a Newton iterate inside the positive-density set.
class PositivityLoss : public Error {
public:
    PositivityLoss(std::size_t time_index, std::size_t cell);
    std::size_t time_index() const noexcept { return time_index_; }
    std::size_t cell() const noexcept { return cell_; }

private:
    std::size_t time_index_;
    std::size_t cell_;
};

class PerturbationTooLarge : public Error {
public:
    explicit PerturbationTooLarge(double delta);
};

class HomogeneityRequired : public Error {
public:
    explicit HomogeneityRequired(const std::string& spec_text);
};

class GenerationFailed : public Error {
public:
    GenerationFailed(std::size_t knot, int shrinkages);
};

}  // namespace mal
