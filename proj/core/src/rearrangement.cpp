#include "mal/rearrangement.hpp"

#include "mal/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace mal {

namespace {

// Running sum that stays within one rounding of the exact prefix sums.
class RunningSum {
public:
    void add(double v) {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v)) {
            carry_ += (sum_ - t) + v;
        } else {
            carry_ += (v - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + carry_; }

private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

std::vector<std::size_t> descending_order(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
    return order;
}

// Calls fn(length, level_a, level_b) on each piece of the common refinement
// of (0, min(Ma, Mb)].
template <typename Fn>
void for_each_common_piece(const StepFunction& a, const StepFunction& b, Fn&& fn) {
    const auto ba = a.breakpoints();
    const auto bb = b.breakpoints();
    const double end = std::min(a.total_mass(), b.total_mass());
    std::size_t ia = 1;
    std::size_t ib = 1;
    double left = 0.0;
    while (left < end && ia < ba.size() && ib < bb.size()) {
        const double right = std::min({ba[ia], bb[ib], end});
        if (right > left) fn(left, right, a.levels()[ia - 1], b.levels()[ib - 1]);
        left = right;
        if (ba[ia] <= left) ++ia;
        if (bb[ib] <= left) ++ib;
    }
}

}  // namespace

StepFunction::StepFunction(std::vector<double> breakpoints, std::vector<double> levels)
    : breakpoints_(std::move(breakpoints)), levels_(std::move(levels)) {
    if (levels_.empty() || breakpoints_.size() != levels_.size() + 1) {
        throw std::invalid_argument("step function needs k levels and k+1 breakpoints");
    }
    if (breakpoints_.front() != 0.0) throw std::invalid_argument("first breakpoint must be 0");
    for (std::size_t j = 1; j < breakpoints_.size(); ++j) {
        if (!(breakpoints_[j] > breakpoints_[j - 1])) throw std::invalid_argument("breakpoints must increase strictly");
    }
    for (std::size_t j = 0; j < levels_.size(); ++j) {
        if (!std::isfinite(levels_[j])) throw std::invalid_argument("levels must be finite");
        if (j > 0 && !(levels_[j] < levels_[j - 1])) throw std::invalid_argument("levels must decrease strictly");
    }
}

StepFunction StepFunction::constant(double c, double mass) { return StepFunction({0.0, mass}, {c}); }

double StepFunction::operator()(double s) const {
    if (s <= 0.0) return levels_.front();
    // First breakpoint >= s closes the interval containing s.
    auto it = std::lower_bound(breakpoints_.begin() + 1, breakpoints_.end(), s);
    if (it == breakpoints_.end()) return levels_.back();
    return levels_[static_cast<std::size_t>(it - breakpoints_.begin()) - 1];
}

double StepFunction::integrate(const std::function<double(double)>& fn) const {
    std::vector<double> terms(levels_.size());
    for (std::size_t j = 0; j < levels_.size(); ++j) terms[j] = fn(levels_[j]) * (breakpoints_[j + 1] - breakpoints_[j]);
    return compensated_sum(terms);
}

double StepFunction::integral() const {
    return integrate([](double v) { return v; });
}

StepFunction decreasing_rearrangement(const WeightedValues& wv) {
    const auto values = wv.values();
    const auto weights = wv.weights();
    const auto order = descending_order(values);
    std::vector<double> breakpoints{0.0};
    std::vector<double> levels;
    RunningSum mass;
    for (std::size_t p = 0; p < order.size(); ++p) {
        const std::size_t k = order[p];
        mass.add(weights[k]);
        if (!levels.empty() && values[k] == levels.back()) {
            breakpoints.back() = mass.value();
        } else {
            levels.push_back(values[k]);
            breakpoints.push_back(mass.value());
        }
    }
    breakpoints.back() = wv.total_mass();
    return StepFunction(std::move(breakpoints), std::move(levels));
}

bool equidistributed(const StepFunction& a, const StepFunction& b, double tol) {
    if (std::abs(a.total_mass() - b.total_mass()) > tol) throw MassMismatch(a.total_mass(), b.total_mass());
    bool same = true;
    for_each_common_piece(a, b, [&](double left, double right, double la, double lb) {
        if (right - left > tol && std::abs(la - lb) > tol) same = false;
    });
    return same;
}

bool equidistributed(const WeightedValues& a, const WeightedValues& b, double tol) {
    if (std::abs(a.total_mass() - b.total_mass()) > tol) throw MassMismatch(a.total_mass(), b.total_mass());
    return equidistributed(decreasing_rearrangement(a), decreasing_rearrangement(b), tol);
}

double rearrangement_distance(const StepFunction& a, const StepFunction& b) {
    std::vector<double> terms;
    for_each_common_piece(a, b, [&](double left, double right, double la, double lb) {
        terms.push_back((right - left) * std::abs(la - lb));
    });
    return compensated_sum(terms);
}

ThetaMap theta_map(const WeightedValues& wv) {
    ThetaMap theta;
    theta.ordering = descending_order(wv.values());
    theta.interval_bounds.reserve(theta.ordering.size() + 1);
    theta.interval_bounds.push_back(0.0);
    RunningSum mass;
    for (std::size_t k : theta.ordering) {
        mass.add(wv.weights()[k]);
        theta.interval_bounds.push_back(mass.value());
    }
    theta.interval_bounds.back() = wv.total_mass();
    return theta;
}

TransferredValues transfer(const StepFunction& f, const ThetaMap& theta) {
    std::vector<double> values;
    std::vector<double> weights;
    std::vector<std::size_t> owner;
    const auto bps = f.breakpoints();
    std::size_t j = 1;
    for (std::size_t p = 0; p < theta.ordering.size(); ++p) {
        double left = theta.interval_bounds[p];
        const double right = theta.interval_bounds[p + 1];
        while (left < right) {
            while (j + 1 < bps.size() && bps[j] <= left) ++j;
            const double piece_end = (j + 1 < bps.size()) ? std::min(right, bps[j]) : right;
            if (piece_end > left) {
                values.push_back(f.levels()[j - 1]);
                weights.push_back(piece_end - left);
                owner.push_back(theta.ordering[p]);
            }
            left = piece_end;
        }
    }
    return {WeightedValues(std::move(values), std::move(weights)), std::move(owner)};
}

WeightedValues pull_back(const StepFunction& f, const ThetaMap& theta, const WeightedValues& wv) {
    std::vector<double> values(wv.size());
    for (std::size_t p = 0; p < theta.ordering.size(); ++p) {
        const double mid = 0.5 * (theta.interval_bounds[p] + theta.interval_bounds[p + 1]);
        values[theta.ordering[p]] = f(mid);
    }
    return WeightedValues(std::move(values), std::vector<double>(wv.weights().begin(), wv.weights().end()));
}

bool similarly_ordered(std::span<const double> g, std::span<const double> h) {
    if (g.size() != h.size()) throw std::invalid_argument("similarly_ordered needs the same atom set");
    std::vector<std::size_t> order(g.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return g[a] < g[b]; });
    // Walk groups of equal g; every h in a group must dominate all h below it.
    double max_below = -std::numeric_limits<double>::infinity();
    std::size_t p = 0;
    while (p < order.size()) {
        std::size_t q = p;
        double group_min = std::numeric_limits<double>::infinity();
        double group_max = -std::numeric_limits<double>::infinity();
        while (q < order.size() && g[order[q]] == g[order[p]]) {
            group_min = std::min(group_min, h[order[q]]);
            group_max = std::max(group_max, h[order[q]]);
            ++q;
        }
        if (group_min < max_below) return false;
        max_below = std::max(max_below, group_max);
        p = q;
    }
    return true;
}

bool similarly_ordered(const WeightedValues& g, const WeightedValues& h) {
    return similarly_ordered(g.values(), h.values());
}

double hardy_littlewood_sup(const StepFunction& f0, const WeightedValues& eta) {
    const double mf = f0.total_mass();
    const double me = eta.total_mass();
    if (std::abs(mf - me) > 1e-9 * std::max(1.0, std::max(mf, me))) throw MassMismatch(mf, me);
    const StepFunction eta_star = decreasing_rearrangement(eta);
    std::vector<double> terms;
    for_each_common_piece(f0, eta_star, [&](double left, double right, double la, double lb) {
        terms.push_back((right - left) * la * lb);
    });
    return compensated_sum(terms);
}

}  // namespace mal
