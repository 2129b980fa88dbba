#pragma once

#include <functional>
#include <string>
#include <vector>

#include "opinion_lab/expression.hpp"

namespace opinion_lab {

/// Step function over agent indices in [0, 1].
///
/// `breaks` are strictly increasing interior points; piece k covers
/// [breaks[k-1], breaks[k]) and takes values[k], so values has one more entry
/// than breaks.
class PiecewiseConstant {
public:
    explicit PiecewiseConstant(double value);
    PiecewiseConstant(std::vector<double> breaks, std::vector<double> values);

    [[nodiscard]] double operator()(double alpha) const;
    [[nodiscard]] bool is_uniform() const;
    [[nodiscard]] double min() const;
    [[nodiscard]] double max() const;
    [[nodiscard]] const std::vector<double>& breaks() const { return breaks_; }
    [[nodiscard]] const std::vector<double>& values() const { return values_; }

private:
    std::vector<double> breaks_;
    std::vector<double> values_;
};

/// Initial opinion as a function of the agent index.
struct OpinionProfile {
    std::string description;
    std::function<double(double)> rule;

    [[nodiscard]] double operator()(double alpha) const { return rule(alpha); }

    static OpinionProfile identity();
    static OpinionProfile constant(double value);
    static OpinionProfile piecewise(PiecewiseConstant steps);
    /// Expression in the variable `a` (alias `alpha`).
    static OpinionProfile expression(const std::string& source);
};

}  // namespace opinion_lab
