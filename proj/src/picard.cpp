#include "opinion_lab/picard.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace opinion_lab {

double WindowFunction::sup_norm() const {
    double m = 0.0;
    for (const auto& row : values) {
        for (double v : row) m = std::max(m, std::abs(v));
    }
    return m;
}

double WindowFunction::time_lipschitz() const {
    if (values.size() < 2 || !(b > 0.0)) return 0.0;
    const double h = b / static_cast<double>(intervals());
    double m = 0.0;
    for (std::size_t k = 0; k + 1 < values.size(); ++k) {
        for (std::size_t i = 0; i < values[k].size(); ++i) {
            m = std::max(m, std::abs(values[k + 1][i] - values[k][i]) / h);
        }
    }
    return m;
}

WindowFunction WindowFunction::constant(std::span<const double> x0, double t_start, double b, std::size_t intervals,
                                        double offset) {
    if (intervals == 0) throw std::invalid_argument("window grid needs at least one interval");
    WindowFunction y;
    y.t_start = t_start;
    y.b = b;
    std::vector<double> row(x0.begin(), x0.end());
    for (double& v : row) v += offset;
    y.values.assign(intervals + 1, row);
    return y;
}

double sup_distance(const WindowFunction& a, const WindowFunction& b) {
    if (a.values.size() != b.values.size()) throw std::invalid_argument("window grids differ");
    double m = 0.0;
    for (std::size_t k = 0; k < a.values.size(); ++k) {
        for (std::size_t i = 0; i < a.values[k].size(); ++i) {
            m = std::max(m, std::abs(a.values[k][i] - b.values[k][i]));
        }
    }
    return m;
}

double picard_window_bound(const Kernel& kernel) {
    if (!kernel.lipschitz()) {
        throw PicardPreconditionError("kernel '" + kernel.name() +
                                      "' declares no Lipschitz constant; the Picard construction needs one");
    }
    const double W = kernel.weight_bound();
    const double L = *kernel.lipschitz();
    if (W == 0.0 && L == 0.0) return std::numeric_limits<double>::infinity();
    const double first = W > 0.0 ? 1.0 / (4.0 * W) : std::numeric_limits<double>::infinity();
    return std::min(first, 1.0 / (2.0 * (W + 4.0 * L)));
}

WindowFunction picard_operator_apply(const Kernel& kernel, const Ensemble& x0, const WindowFunction& y,
                                     WorkerPool* pool, bool left_limit_at_end) {
    picard_window_bound(kernel);
    if (y.values.size() < 2) throw std::invalid_argument("window function needs at least two grid times");
    const std::size_t n = x0.size();
    for (const auto& row : y.values) {
        if (row.size() != n) throw std::invalid_argument("window function does not match the ensemble size");
    }
    const double norm = y.sup_norm();
    if (norm > 2.0) {
        std::ostringstream msg;
        msg << "iterate sup-norm " << norm << " exceeds 2";
        throw PicardPreconditionError(msg.str());
    }

    const std::size_t K = y.intervals();
    const double h = y.b / static_cast<double>(K);
    WindowFunction out;
    out.t_start = y.t_start;
    out.b = y.b;
    out.values.resize(K + 1);
    out.values[0].assign(x0.opinion().begin(), x0.opinion().end());

    std::vector<double> g_prev(n), g_next(n);
    const auto eval_time = [&](std::size_t k) {
        double t = y.time(k);
        if (k != K || !left_limit_at_end) return t;
        // t_start + b may round onto or past the switch; back off below it
        t = std::nextafter(t, y.t_start);
        while (t > y.t_start &&
               !kernel.time_breakpoints(y.t_start, std::nextafter(t, std::numeric_limits<double>::infinity()))
                    .empty()) {
            t = std::nextafter(t, y.t_start);
        }
        return t;
    };
    rhs_into(x0, y.values[0], eval_time(0), kernel, g_prev, pool);
    for (std::size_t k = 1; k <= K; ++k) {
        rhs_into(x0, y.values[k], eval_time(k), kernel, g_next, pool);
        auto& row = out.values[k];
        row.resize(n);
        for (std::size_t i = 0; i < n; ++i) row[i] = out.values[k - 1][i] + 0.5 * h * (g_prev[i] + g_next[i]);
        g_prev.swap(g_next);
    }
    return out;
}

double PicardWindow::max_ratio() const {
    double m = 0.0;
    for (double r : ratios) m = std::max(m, r);
    return m;
}

namespace {

PicardWindow solve_from(const Kernel& kernel, const Ensemble& x0, double b, const PicardOptions& options,
                        WorkerPool* pool) {
    PicardWindow w;
    w.t_start = x0.time();
    w.b = b;
    const double W = kernel.weight_bound();
    const double L = *kernel.lipschitz();
    w.ratio_bound = 2.0 * b * (W + 4.0 * L);

    auto y = WindowFunction::constant(x0.opinion(), x0.time(), b, options.intervals, options.initial_offset);
    w.iterate_sup_norms.push_back(y.sup_norm());
    w.iterate_lipschitz.push_back(y.time_lipschitz());
    if (options.keep_iterates) w.iterates.push_back(y);

    for (std::size_t it = 0; it < options.max_iters; ++it) {
        auto next = picard_operator_apply(kernel, x0, y, pool, options.left_limit_at_end);
        const double res = sup_distance(next, y);
        if (!w.residuals.empty() && w.residuals.back() > 0.0) w.ratios.push_back(res / w.residuals.back());
        w.residuals.push_back(res);
        w.iterate_sup_norms.push_back(next.sup_norm());
        w.iterate_lipschitz.push_back(next.time_lipschitz());
        if (options.keep_iterates) w.iterates.push_back(next);
        y = std::move(next);
        if (res < options.tol) {
            w.converged = true;
            break;
        }
    }
    const auto check = picard_operator_apply(kernel, x0, y, pool, options.left_limit_at_end);
    w.fixed_point_residual = sup_distance(check, y);
    w.solution = std::move(y);
    return w;
}

}  // namespace

PicardWindow picard_window_solve(const Kernel& kernel, const Ensemble& x0, double b, const PicardOptions& options,
                                 WorkerPool* pool) {
    const double b_max = picard_window_bound(kernel);
    if (!(b > 0.0 && b < b_max)) {
        std::ostringstream msg;
        msg << "window length " << b << " is not inside (0, " << b_max << ")";
        throw PicardPreconditionError(msg.str());
    }
    for (double x : x0.opinion()) {
        if (!(x >= 0.0 && x <= 1.0)) throw PicardPreconditionError("window start opinions must lie in [0, 1]");
    }
    auto w = solve_from(kernel, x0, b, options, pool);
    if (options.uniqueness_probe && w.converged) {
        PicardOptions probe = options;
        probe.initial_offset = options.initial_offset + 0.5;
        probe.keep_iterates = false;
        const auto other = solve_from(kernel, x0, b, probe, pool);
        w.uniqueness_gap = other.converged ? sup_distance(other.solution, w.solution)
                                           : std::numeric_limits<double>::infinity();
    }
    return w;
}

PicardSolution picard_solve(const Kernel& kernel, const Ensemble& x0, double t_end, const PicardOptions& options,
                            WorkerPool* pool) {
    if (!(t_end > x0.time())) throw std::invalid_argument("t_end must exceed the start time");
    if (!(options.window_fraction > 0.0 && options.window_fraction < 1.0)) {
        throw std::invalid_argument("window_fraction must lie in (0, 1)");
    }
    PicardSolution sol;
    sol.b_max = picard_window_bound(kernel);
    sol.trajectory.weight_bound = kernel.weight_bound();
    sol.trajectory.snapshots.push_back(x0);

    Ensemble state = x0;
    double t = x0.time();
    while (t_end - t > 1e-12 * std::max(1.0, t_end)) {
        double end = std::min(t + options.window_fraction * sol.b_max, t_end);
        PicardOptions window_options = options;
        window_options.left_limit_at_end = false;
        const auto breaks = kernel.time_breakpoints(t, std::nextafter(end, std::numeric_limits<double>::infinity()));
        if (!breaks.empty()) {
            end = breaks.front();
            window_options.left_limit_at_end = true;
        }
        auto w = picard_window_solve(kernel, state, end - t, window_options, pool);
        if (!w.converged) {
            std::ostringstream msg;
            msg << "Picard window starting at t = " << t << " did not converge in " << options.max_iters
                << " iterations (last residual " << w.residuals.back() << ", last ratio "
                << (w.ratios.empty() ? 0.0 : w.ratios.back()) << ")";
            throw PicardConvergenceError(msg.str());
        }
        for (std::size_t k = 1; k < w.solution.values.size(); ++k) {
            const double tk = k + 1 == w.solution.values.size() ? end : w.solution.time(k);
            sol.trajectory.snapshots.push_back(x0.with_opinions(w.solution.values[k], tk));
            for (double v : w.solution.values[k]) {
                sol.box_excursion = std::max({sol.box_excursion, -v, v - 1.0});
            }
        }
        sol.max_time_lipschitz = std::max(sol.max_time_lipschitz, w.solution.time_lipschitz());
        state = sol.trajectory.snapshots.back();
        t = end;
        sol.windows.push_back(std::move(w));
    }
    return sol;
}

CrossValidation cross_validate(const Kernel& kernel, const Ensemble& x0, const PicardSolution& solution,
                               double reference_dt, std::size_t threads) {
    IntegratorConfig cfg;
    cfg.method = Method::Rk4;
    cfg.dt = reference_dt;
    cfg.t_end = solution.trajectory.final().time() - x0.time();
    cfg.clamp_to_box = false;
    cfg.threads = threads;
    const auto reference = integrate(x0, kernel, cfg);

    CrossValidation cv;
    cv.reference_dt = reference_dt;
    for (const auto& snap : solution.trajectory.snapshots) {
        const auto ref = reference.opinions_at(snap.time());
        for (std::size_t i = 0; i < ref.size(); ++i) {
            const double d = std::abs(ref[i] - snap.opinion()[i]);
            if (d > cv.sup_distance) {
                cv.sup_distance = d;
                cv.worst_time = snap.time();
            }
        }
    }
    return cv;
}

}  // namespace opinion_lab
