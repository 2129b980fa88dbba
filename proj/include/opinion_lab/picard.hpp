#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "opinion_lab/ensemble.hpp"
#include "opinion_lab/kernels.hpp"
#include "opinion_lab/parallel.hpp"

namespace opinion_lab {

/// The kernel or the iterate falls outside the class where the integral
/// operator is a contraction (no Lipschitz constant, sup-norm above 2, window
/// too long).
class PicardPreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class PicardConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Opinions of every node on a uniform time grid over [t_start, t_start + b].
struct WindowFunction {
    double t_start = 0.0;
    double b = 0.0;
    std::vector<std::vector<double>> values;  // values[k][i] at t_start + k b / (values.size() - 1)

    [[nodiscard]] std::size_t intervals() const { return values.size() - 1; }
    [[nodiscard]] double time(std::size_t k) const {
        return t_start + b * static_cast<double>(k) / static_cast<double>(intervals());
    }
    [[nodiscard]] double sup_norm() const;
    /// max over grid steps of |y(t_{k+1}) - y(t_k)| / (t_{k+1} - t_k)
    [[nodiscard]] double time_lipschitz() const;

    /// y(t) = x0 + offset on every grid point.
    static WindowFunction constant(std::span<const double> x0, double t_start, double b, std::size_t intervals,
                                   double offset = 0.0);
};

double sup_distance(const WindowFunction& a, const WindowFunction& b);

/// min(1 / (4 W), 1 / (2 (W + 4 L))); +inf for the zero kernel. Throws
/// PicardPreconditionError when L is not declared.
double picard_window_bound(const Kernel& kernel);

struct PicardOptions {
    double tol = 1e-9;
    std::size_t max_iters = 500;
    std::size_t intervals = 64;  // trapezoid cells per window
    double window_fraction = 0.9;  // window length as a fraction of the bound
    double initial_offset = 0.0;   // first iterate is x0 + offset
    bool uniqueness_probe = true;  // re-solve every window from x0 + 0.5
    bool keep_iterates = false;
    /// Evaluate the kernel just before the right end of the window, for
    /// windows that stop at a switching time.
    bool left_limit_at_end = false;
};

/// [P y](t, a) = x0(a) + integral over [t_start, t] of
/// sum_j m_j w(s, a, a_j, y_s(a), y_s(a_j)) (y_s(a_j) - y_s(a)) ds,
/// the time integral taken by the trapezoid rule on y's grid.
WindowFunction picard_operator_apply(const Kernel& kernel, const Ensemble& x0, const WindowFunction& y,
                                     WorkerPool* pool = nullptr, bool left_limit_at_end = false);

struct PicardWindow {
    double t_start = 0.0;
    double b = 0.0;
    double ratio_bound = 0.0;  // 2 b (W + 4 L)
    std::vector<double> residuals;  // sup |y^{k+1} - y^k|
    std::vector<double> ratios;     // residuals[k + 1] / residuals[k]
    std::vector<double> iterate_sup_norms;
    std::vector<double> iterate_lipschitz;  // time-Lipschitz constant of each iterate
    std::vector<WindowFunction> iterates;   // only with keep_iterates
    bool converged = false;
    double fixed_point_residual = 0.0;  // sup |P y* - y*|
    double uniqueness_gap = -1.0;       // distance to the probe's fixed point; < 0 when not run
    WindowFunction solution;

    [[nodiscard]] std::size_t iterations() const { return residuals.size(); }
    [[nodiscard]] double max_ratio() const;
};

/// Iterates P from the constant function x0 + initial_offset until the
/// residual drops below tol. Throws PicardPreconditionError when b is not
/// strictly inside the window bound or x0 leaves [0, 1]. Returns with
/// converged = false when max_iters is exhausted.
PicardWindow picard_window_solve(const Kernel& kernel, const Ensemble& x0, double b, const PicardOptions& options,
                                 WorkerPool* pool = nullptr);

struct PicardSolution {
    double b_max = 0.0;
    std::vector<PicardWindow> windows;
    Trajectory trajectory;  // every grid time, window ends shared
    double box_excursion = 0.0;
    double max_time_lipschitz = 0.0;
};

/// Chains windows of window_fraction * b_max from x0.time() to t_end,
/// shortening windows at t_end and at the kernel's switching times. Throws
/// PicardConvergenceError naming the window start when a window fails.
PicardSolution picard_solve(const Kernel& kernel, const Ensemble& x0, double t_end, const PicardOptions& options = {},
                            WorkerPool* pool = nullptr);

struct CrossValidation {
    double sup_distance = 0.0;
    double worst_time = 0.0;
    double reference_dt = 0.0;
};

/// Compares a Picard solution with an RK4 run at step reference_dt,
/// interpolated linearly onto the Picard grid.
CrossValidation cross_validate(const Kernel& kernel, const Ensemble& x0, const PicardSolution& solution,
                               double reference_dt, std::size_t threads = 1);

}  // namespace opinion_lab
