#include "mal/lagrangian.hpp"

#include "mal/error.hpp"
#include "mal/fields.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <stdexcept>

namespace mal {

namespace {

std::string short_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

void spot_check_convexity(const std::string& name, const std::function<double(double)>& chi) {
    constexpr int probes = 200;
    constexpr double span = 10.0;
    for (int k = 0; k < probes; ++k) {
        const double a = -span + 2.0 * span * k / probes;
        for (double width : {0.01, 0.5, 3.0}) {
            const double b = a + width;
            const double ca = chi(a);
            const double cb = chi(b);
            const double cm = chi(0.5 * (a + b));
            if (!std::isfinite(ca) || !std::isfinite(cb)) {
                throw std::invalid_argument("Young weight '" + name + "' is not finite on the probe range");
            }
            const double slack = 1e-12 * (1.0 + std::abs(ca) + std::abs(cb));
            if (cm > 0.5 * (ca + cb) + slack) {
                throw std::invalid_argument("Young weight '" + name + "' fails the midpoint convexity probe");
            }
        }
    }
}

double orlicz_value(const Orlicz& o, const WeightedValues& xi) {
    std::vector<double> terms(xi.size());
    for (std::size_t k = 0; k < xi.size(); ++k) terms[k] = o.chi(xi.values()[k]) * xi.weights()[k];
    return compensated_sum(terms);
}

double power_value(const Power& p, const WeightedValues& xi) {
    std::vector<double> terms(xi.size());
    for (std::size_t k = 0; k < xi.size(); ++k) terms[k] = std::pow(std::abs(xi.values()[k]), p.p) * xi.weights()[k];
    const double s = compensated_sum(terms);
    return p.p == 1.0 ? s : std::pow(s, 1.0 / p.p);
}

// Max over prefix masses s of I(s)/s^alpha, I(s) the integral of |xi|* over
// (0, s]. Between breakpoints the ratio is quasi-convex in s, so only the
// breakpoints need probing.
double lorentz_value(const LorentzWeak& l, const WeightedValues& xi) {
    std::vector<double> abs_values(xi.size());
    for (std::size_t k = 0; k < xi.size(); ++k) abs_values[k] = std::abs(xi.values()[k]);
    const StepFunction star = decreasing_rearrangement(
        WeightedValues(std::move(abs_values), std::vector<double>(xi.weights().begin(), xi.weights().end())));
    const auto bps = star.breakpoints();
    const auto levels = star.levels();
    double best = 0.0;
    double integral = 0.0;
    double carry = 0.0;
    for (std::size_t j = 0; j < levels.size(); ++j) {
        // Neumaier step for the running integral.
        const double term = levels[j] * (bps[j + 1] - bps[j]);
        const double t = integral + term;
        carry += (std::abs(integral) >= std::abs(term)) ? (integral - t) + term : (term - t) + integral;
        integral = t;
        best = std::max(best, (integral + carry) / std::pow(bps[j + 1], l.alpha));
    }
    return best;
}

double sup_family_value(const SupFamily& f, const WeightedValues& xi) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& m : f.members) best = std::max(best, m.a + hardy_littlewood_sup(m.f0, xi));
    return best;
}

}  // namespace

LagrangianSpec LagrangianSpec::orlicz_power(double p) {
    if (!(p >= 1.0) || !std::isfinite(p)) throw std::invalid_argument("Orlicz power must be >= 1");
    Orlicz o{"p" + short_number(p), [p](double t) { return std::pow(std::abs(t), p); }, p};
    return LagrangianSpec(std::move(o), "orlicz:p" + short_number(p));
}

LagrangianSpec LagrangianSpec::orlicz(std::string name, std::function<double(double)> chi) {
    spot_check_convexity(name, chi);
    std::string text = "orlicz:" + name;
    return LagrangianSpec(Orlicz{std::move(name), std::move(chi), std::nullopt}, std::move(text));
}

LagrangianSpec LagrangianSpec::lorentz_weak(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("Lorentz exponent must lie strictly in (0,1)");
    return LagrangianSpec(LorentzWeak{alpha}, "lorentz:a" + short_number(alpha));
}

LagrangianSpec LagrangianSpec::power(double p) {
    if (!(p >= 1.0) || !std::isfinite(p)) throw std::invalid_argument("power exponent must be >= 1");
    return LagrangianSpec(Power{p}, "power:p" + short_number(p));
}

LagrangianSpec LagrangianSpec::sup_family(std::vector<SupFamily::Member> members, std::string source) {
    if (members.empty()) throw std::invalid_argument("sup family must have at least one member");
    for (const auto& m : members) {
        if (std::abs(m.f0.total_mass() - 1.0) > 1e-12) {
            throw std::invalid_argument("sup family members must have total mass 1");
        }
        if (!std::isfinite(m.a)) throw std::invalid_argument("sup family offsets must be finite");
    }
    return LagrangianSpec(SupFamily{std::move(members)}, "supfam:" + source);
}

bool LagrangianSpec::positively_homogeneous() const {
    return std::visit(
        [](const auto& v) -> bool {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Orlicz>) {
                return v.power.has_value() && *v.power == 1.0;
            } else if constexpr (std::is_same_v<T, SupFamily>) {
                return std::all_of(v.members.begin(), v.members.end(), [](const auto& m) { return m.a == 0.0; });
            } else {
                return true;
            }
        },
        variant_);
}

bool LagrangianSpec::even() const {
    return std::visit(
        [](const auto& v) -> bool {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Orlicz>) {
                return v.power.has_value();
            } else if constexpr (std::is_same_v<T, SupFamily>) {
                return false;
            } else {
                return true;
            }
        },
        variant_);
}

double evaluate(const LagrangianSpec& spec, const WeightedValues& xi) {
    return std::visit(
        [&](const auto& v) -> double {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Orlicz>) {
                return orlicz_value(v, xi);
            } else if constexpr (std::is_same_v<T, LorentzWeak>) {
                return lorentz_value(v, xi);
            } else if constexpr (std::is_same_v<T, Power>) {
                return power_value(v, xi);
            } else {
                return sup_family_value(v, xi);
            }
        },
        spec.variant());
}

double evaluate(const LagrangianSpec& spec, const Potential& u, const GridField& xi) {
    return evaluate(spec, weighted_values(u, xi));
}

InvarianceReport check_invariance(const LagrangianSpec& spec, const WeightedValues& a, const WeightedValues& b,
                                  double tol, double lipschitz_bound) {
    const StepFunction sa = decreasing_rearrangement(a);
    const StepFunction sb = decreasing_rearrangement(b);
    if (!equidistributed(sa, sb, tol)) throw NotEquidistributed(rearrangement_distance(sa, sb));
    const double discrepancy = std::abs(evaluate(spec, a) - evaluate(spec, b));
    const double threshold = tol * std::max(1.0, lipschitz_bound);
    return {discrepancy, threshold, discrepancy <= threshold};
}

InvarianceReport check_invariance(const LagrangianSpec& spec, const Potential& u, const GridField& xi,
                                  const Potential& v, const GridField& eta, double tol, double lipschitz_bound) {
    return check_invariance(spec, weighted_values(u, xi), weighted_values(v, eta), tol, lipschitz_bound);
}

ConvexityReport check_fiber_convexity(const LagrangianSpec& spec, const Potential& u, const GridField& xi,
                                      const GridField& eta, int samples, std::uint64_t seed) {
    const double lx = evaluate(spec, u, xi);
    const double ly = evaluate(spec, u, eta);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst = -std::numeric_limits<double>::infinity();
    for (int k = 0; k <= samples; ++k) {
        const double s = (k == 0) ? 0.5 : unit(rng);
        const double combined = evaluate(spec, u, lerp(eta, xi, s));
        worst = std::max(worst, combined - (s * lx + (1.0 - s) * ly));
    }
    return {worst, samples + 1, worst <= 1e-12};
}

double estimate_lipschitz(const LagrangianSpec& spec, const Grid& grid, double radius, int trials, std::uint64_t seed) {
    if (!(radius > 0.0)) throw std::invalid_argument("radius must be positive");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ball(-radius, radius);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double best = 0.0;
    for (int t = 0; t < trials; ++t) {
        GridField direction = random_band_limited(grid, 2, rng);
        const Potential zero = constant_potential(grid, 0.0);
        const double scale = admissible_scale(zero, direction, 0.05, 1.0) * unit(rng);
        direction *= scale;
        const Potential u = make_potential(std::move(direction));
        GridField xi(grid);
        GridField eta(grid);
        const bool nearby = (t % 2) == 1;
        const double step = radius * std::pow(10.0, -3.0 * unit(rng));
        for (std::size_t k = 0; k < xi.size(); ++k) {
            xi[k] = ball(rng);
            eta[k] = nearby ? std::clamp(xi[k] + step * (2.0 * unit(rng) - 1.0), -radius, radius) : ball(rng);
        }
        const double gap = sup_distance(xi, eta);
        if (gap == 0.0) continue;
        best = std::max(best, std::abs(evaluate(spec, u, xi) - evaluate(spec, u, eta)) / gap);
    }
    return best;
}

ContinuityReport check_strong_continuity(const LagrangianSpec& spec, const std::vector<ContinuityStep>& schedule,
                                         double tol, double tol_mass) {
    ContinuityReport report{{}, {}, true};
    for (const auto& step : schedule) {
        if (step.base.size() != step.perturbed.size()) {
            throw std::invalid_argument("continuity step must compare fields on the same atoms");
        }
        double mass = 0.0;
        for (std::size_t k = 0; k < step.base.size(); ++k) {
            if (step.base.values()[k] != step.perturbed.values()[k]) mass += step.base.weights()[k];
        }
        const double d = std::abs(evaluate(spec, step.base) - evaluate(spec, step.perturbed));
        report.discrepancies.push_back(d);
        report.masses.push_back(mass);
        if (mass < tol_mass && d > tol) report.pass = false;
    }
    return report;
}

}  // namespace mal
