#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "opinion_lab/ensemble.hpp"
#include "opinion_lab/kernels.hpp"

namespace opinion_lab {

// --- observables --------------------------------------------------------------

/// Mass-weighted power sum sum_i m_i x_i^k, k >= 1.
double moment(const Ensemble& ensemble, int k);

/// A scalar convex test function and its name.
struct ConvexFunction {
    std::string name;
    std::function<double(double)> f;
};

/// sum_i m_i f(x_i).
double lyapunov(const Ensemble& ensemble, const std::function<double(double)>& f);

/// The fixed dictionary x, -x, x^2, x^4, exp(x), exp(-x) and Huber-smoothed
/// |x - c| for c in {0.25, 0.5, 0.75}.
std::vector<ConvexFunction> convex_dictionary();

/// Huber smoothing of |x - center| with quadratic zone of half-width delta.
double huber(double x, double center, double delta);

/// Random convex piecewise-linear function: the maximum of `pieces` affine
/// functions with sorted slopes.
ConvexFunction random_piecewise_linear_convex(std::uint64_t seed, int pieces = 5);

/// D = sum_i sum_j m_i m_j w(t, a_i, a_j, x_i, x_j) (x_j - x_i)^2, over
/// ordered pairs. Equals -dm2/dt along trajectories of symmetric kernels.
double dissipation(const Ensemble& ensemble, const Kernel& kernel, WorkerPool* pool = nullptr);

struct VarianceIdentity {
    double lhs = 0.0;  // sum_i sum_j m_i m_j (a_i - a_j)^2
    double rhs = 0.0;  // 2 M sum_i m_i (a_i - mean)^2
    double abs_error = 0.0;
};

/// Both sides of the pair-sum / variance identity, computed independently.
VarianceIdentity variance_identity_check(std::span<const double> values, std::span<const double> masses);

/// W1 distance between two discrete measures, the L1 distance between their
/// quantile functions. Each measure's masses must sum to 1.
double wasserstein1(std::span<const double> xa, std::span<const double> ma, std::span<const double> xb,
                    std::span<const double> mb);
double wasserstein1(const Ensemble& a, const Ensemble& b);

/// W1 distance between a discrete measure and the uniform probability measure
/// on [lo, hi].
double wasserstein1_to_uniform(std::span<const double> x, std::span<const double> m, double lo, double hi);

// --- clusters -----------------------------------------------------------------

struct ClusterSet {
    std::vector<double> centers;  // strictly increasing
    std::vector<double> masses;
    std::vector<double> spreads;  // max - min opinion inside each cluster
    double residual_mass = 0.0;

    /// Smallest distance between consecutive centers; +inf with < 2 clusters.
    [[nodiscard]] double min_separation() const;
};

/// Sorts opinions and splits wherever consecutive opinions differ by more
/// than gap_threshold. Groups lighter than mass_floor go to residual_mass.
ClusterSet detect_clusters(const Ensemble& ensemble, double gap_threshold, double mass_floor = 0.0);

// --- order ----------------------------------------------------------------------

struct OrderViolation {
    std::size_t i = 0;
    std::size_t j = 0;
    double t_flip = 0.0;
};

struct OrderAuditReport {
    std::size_t pairs_checked = 0;
    bool full_audit = false;
    std::vector<OrderViolation> violations;
    /// Smallest observed log(gap_t / gap_0) / t over checked pairs and snapshots.
    double min_gap_ratio_log = 0.0;
    /// Rate bound -(L + W); only meaningful when rate_bound_checked.
    double rate_bound = 0.0;
    bool rate_bound_checked = false;
    /// Largest relative shortfall below gap_0 e^{-(L+W)t}; <= 0 when the bound holds.
    double worst_rate_shortfall = 0.0;
};

struct OrderAuditOptions {
    std::size_t pair_budget = 10000;
    std::uint64_t rng_seed = 1;
    std::size_t full_audit_below = 200;
    /// Pass W and L to also check the exponential gap bound.
    std::optional<double> weight_bound;
    std::optional<double> lipschitz;
};

/// Checks that sign(x_i - x_j) never changes along the trajectory. All pairs
/// are checked below full_audit_below nodes, otherwise pair_budget random
/// pairs. Pairs that start equal are skipped.
OrderAuditReport order_audit(const Trajectory& trajectory, const OrderAuditOptions& options = {});

/// Options for a kernel whose order-preservation rate bound applies: symmetric,
/// position-only and Lipschitz. Returns options without bounds otherwise.
OrderAuditOptions order_audit_options_for(const Kernel& kernel);

// --- series -----------------------------------------------------------------------

struct MomentSeries {
    std::vector<double> times;
    std::map<int, std::vector<double>> values;  // order k -> m_t(k)
};

MomentSeries moment_series(const Trajectory& trajectory, int max_order = 6);

struct MonotonicityReport {
    bool pass = true;
    double worst_uptick = 0.0;  // largest consecutive increase, 0 when none
    std::size_t worst_index = 0;  // index of the later sample of the worst uptick
};

/// Passes iff every consecutive difference is <= tolerance.
MonotonicityReport monotonicity_report(std::span<const double> series, double tolerance);

/// Largest |value - value[0]| over the series.
double max_drift(std::span<const double> series);

struct DissipationStep {
    double t0 = 0.0;
    double t1 = 0.0;
    double m2_rate = 0.0;      // (m2(t1) - m2(t0)) / (t1 - t0)
    double dissipation = 0.0;  // trapezoid average of D over the step
    double residual = 0.0;     // m2_rate + dissipation
    bool switching = false;    // the weight pattern changed inside the step
};

struct DissipationAudit {
    std::vector<DissipationStep> steps;
    double worst_residual = 0.0;  // over non-switching steps
    double cumulative = 0.0;      // trapezoid integral of D over the horizon
    double m2_drop = 0.0;         // m2(0) - m2(t_end)
};

/// Compares dm2/dt with -D between consecutive snapshots. For kernels
/// without a Lipschitz constant, steps where any pair weight changed are
/// flagged as switching and excluded from worst_residual.
DissipationAudit dissipation_audit(const Trajectory& trajectory, const Kernel& kernel,
                                   WorkerPool* pool = nullptr);

/// Per snapshot W1 distance to the final snapshot.
std::vector<double> wasserstein_to_final(const Trajectory& trajectory);

/// Largest W1-to-final over snapshots with t >= t_from.
double tail_wasserstein(const Trajectory& trajectory, double t_from);

}  // namespace opinion_lab
