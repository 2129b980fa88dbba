#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "opinion_lab/counterexample_model.hpp"
#include "opinion_lab/ensemble.hpp"
#include "opinion_lab/parallel.hpp"

namespace opinion_lab {

class FoldPointError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

struct CounterexampleState {
    double t = 0.0;
    double phase = 0.0;
    double cluster_left = 0.0;
    double cluster_right = 0.0;
    std::vector<double> interval_index;      // midpoints of n equal cells of [0, 2)
    std::vector<double> interval_positions;  // fold(index + phase)
};

/// Closed-form state with n_interval interval agents.
CounterexampleState analytic_state(const cycling::Params& params, double t, std::size_t n_interval);

/// Closed-form velocity. Throws FoldPointError when an interval agent sits on
/// a fold, i.e. index + phase is an integer.
double analytic_velocity(const cycling::Params& params, double t, const cycling::Agent& agent);

/// The symmetric construction weight, in the populations' own measure.
double counterexample_weight(const cycling::Params& params, double t, const cycling::Agent& a,
                             const cycling::Agent& b, double xa, double xb);

struct RhsCheck {
    double t = 0.0;
    std::size_t n_interval = 0;
    double exclusion_radius = 0.0;
    double max_abs_error = 0.0;
    double interior_error = 0.0;  // interval agents away from both ends
    double edge_error = 0.0;      // interval agents within the window of an end
    double cluster_error = 0.0;
    std::size_t evaluated = 0;
    std::size_t excluded = 0;
};

/// Evaluates the interaction integral by quadrature (interval cells of mass
/// 2/n, point clusters of unit mass) and compares it with the closed-form
/// velocity. Interval agents within exclusion_radius of a fold are skipped.
RhsCheck verify_rhs(const cycling::Params& params, double t, std::size_t n_interval, double exclusion_radius,
                    WorkerPool* pool = nullptr);

/// The full system packed into the unit agent domain: interval agents on
/// [0, 1/2), n_cluster nodes per cluster on [1/2, 3/4) and [3/4, 1].
Ensemble packed_ensemble(const cycling::Params& params, double t, std::size_t n_interval, std::size_t n_cluster);

/// Closed-form trajectory of the packed system at the given times.
Trajectory analytic_trajectory(const cycling::Params& params, const std::vector<double>& times,
                               std::size_t n_interval, std::size_t n_cluster);

struct CounterexampleOptions {
    double t_end = 80.0;
    std::size_t n_interval = 4000;
    std::size_t n_cluster = 4;
    double sample_dt = 0.05;       // spacing of the internal sampling grid
    double stationary_from = 1.0;  // distribution checks start here
    std::size_t tracked_agents = 16;
    double exclusion_radius = 0.01;
    std::vector<double> rhs_times{0.5, 5.0, 50.0};
    double trajectory_dt = 1.0;  // spacing of the stored analytic trajectory
};

struct TrackedAgent {
    double index = 0.0;
    std::size_t observed_reversals = 0;
    std::size_t expected_folds = 0;
    double total_variation = 0.0;
};

struct RhsConvergence {
    RhsCheck coarse;
    RhsCheck fine;  // twice the interval resolution
    double ratio = 0.0;  // coarse.max_abs_error / fine.max_abs_error
};

struct CounterexampleReport {
    cycling::Params params;
    CounterexampleOptions options;
    double final_phase = 0.0;
    double max_w1_to_uniform = 0.0;     // over sampled t >= stationary_from
    double max_w1_between_times = 0.0;  // W1(mu_t, mu_{stationary_from})
    double min_cluster_gap = 0.0;       // min over samples of cluster_right - 1/2
    double gap_bound = 0.0;             // c0 - 1/2 - drift(t_end)
    double max_mirror_defect = 0.0;     // |cluster_left + cluster_right|
    bool cluster_monotone = true;       // cluster_right strictly decreasing
    std::vector<TrackedAgent> tracked;
    std::size_t order_flips = 0;  // flipped pairs found by the order audit
    std::size_t order_pairs = 0;
    std::vector<RhsConvergence> rhs;
    Trajectory trajectory;
};

CounterexampleReport run_counterexample_report(const cycling::Params& params, const CounterexampleOptions& options,
                                               WorkerPool* pool = nullptr);

}  // namespace opinion_lab
