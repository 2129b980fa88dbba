#include "opinion_lab/profile.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

namespace opinion_lab {

PiecewiseConstant::PiecewiseConstant(double value) : values_{value} {}

PiecewiseConstant::PiecewiseConstant(std::vector<double> breaks, std::vector<double> values)
    : breaks_(std::move(breaks)), values_(std::move(values)) {
    if (values_.size() != breaks_.size() + 1) {
        throw std::invalid_argument("piecewise profile needs exactly one more value than breakpoints");
    }
    for (std::size_t k = 0; k < breaks_.size(); ++k) {
        if (!(breaks_[k] > 0.0 && breaks_[k] < 1.0)) {
            throw std::invalid_argument("piecewise breakpoints must lie strictly inside (0, 1)");
        }
        if (k > 0 && !(breaks_[k] > breaks_[k - 1])) {
            throw std::invalid_argument("piecewise breakpoints must be strictly increasing");
        }
    }
    for (double v : values_) {
        if (!std::isfinite(v)) throw std::invalid_argument("piecewise values must be finite");
    }
}

double PiecewiseConstant::operator()(double alpha) const {
    const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), alpha);
    return values_[static_cast<std::size_t>(it - breaks_.begin())];
}

bool PiecewiseConstant::is_uniform() const {
    return std::all_of(values_.begin(), values_.end(), [&](double v) { return v == values_.front(); });
}

double PiecewiseConstant::min() const { return *std::min_element(values_.begin(), values_.end()); }
double PiecewiseConstant::max() const { return *std::max_element(values_.begin(), values_.end()); }

OpinionProfile OpinionProfile::identity() {
    return {"uniform", [](double alpha) { return alpha; }};
}

OpinionProfile OpinionProfile::constant(double value) {
    return {"constant(" + std::to_string(value) + ")", [value](double) { return value; }};
}

OpinionProfile OpinionProfile::piecewise(PiecewiseConstant steps) {
    return {"piecewise", [steps = std::move(steps)](double alpha) { return steps(alpha); }};
}

OpinionProfile OpinionProfile::expression(const std::string& source) {
    auto expr = std::make_shared<Expression>(source, std::vector<std::string>{"a", "alpha"});
    return {"expression(" + source + ")", [expr](double alpha) {
                const double vars[2] = {alpha, alpha};
                return expr->evaluate(vars);
            }};
}

}  // namespace opinion_lab
