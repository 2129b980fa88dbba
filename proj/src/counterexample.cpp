#include "opinion_lab/counterexample.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "opinion_lab/diagnostics.hpp"
#include "opinion_lab/summation.hpp"

namespace opinion_lab {

using cycling::Agent;
using cycling::Population;

CounterexampleState analytic_state(const cycling::Params& params, double t, std::size_t n_interval) {
    if (!(t >= 0.0)) throw std::invalid_argument("time must be >= 0");
    if (n_interval == 0) throw std::invalid_argument("n_interval must be positive");
    CounterexampleState s;
    s.t = t;
    s.phase = cycling::phase(params, t);
    s.cluster_right = cycling::cluster_right_position(params, t);
    s.cluster_left = -s.cluster_right;
    s.interval_index.resize(n_interval);
    s.interval_positions.resize(n_interval);
    const double cell = 2.0 / static_cast<double>(n_interval);
    for (std::size_t j = 0; j < n_interval; ++j) {
        s.interval_index[j] = (static_cast<double>(j) + 0.5) * cell;
        s.interval_positions[j] = cycling::fold(s.interval_index[j] + s.phase);
    }
    return s;
}

double analytic_velocity(const cycling::Params& params, double t, const Agent& agent) {
    switch (agent.population) {
        case Population::ClusterRight:
            return -cycling::cluster_speed(params, t);
        case Population::ClusterLeft:
            return cycling::cluster_speed(params, t);
        case Population::Interval:
            break;
    }
    const double u = agent.index + cycling::phase(params, t);
    if (std::abs(u - std::round(u)) < 1e-12) {
        std::ostringstream msg;
        msg << "fold point: index " << agent.index << " + phase " << (u - agent.index) << " is an integer";
        throw FoldPointError(msg.str());
    }
    const double v = cycling::speed(params, t);
    return cycling::moving_right(params, agent.index, t) ? v : -v;
}

double counterexample_weight(const cycling::Params& params, double t, const Agent& a, const Agent& b, double xa,
                             double xb) {
    return cycling::weight(params, t, a, b, xa, xb);
}

RhsCheck verify_rhs(const cycling::Params& params, double t, std::size_t n_interval, double exclusion_radius,
                    WorkerPool* pool) {
    if (!(exclusion_radius > 0.0)) throw std::invalid_argument("exclusion radius must be positive");
    if (n_interval < 2) throw std::invalid_argument("n_interval must be at least 2");
    const auto state = analytic_state(params, t, n_interval);
    const auto f = cycling::frame(params, t);
    const double mass = 2.0 / static_cast<double>(n_interval);
    const double v = cycling::speed(params, t);
    const double eps = f.window;

    const std::size_t n = n_interval;
    std::vector<Agent> agents(n + 2);
    std::vector<double> x(n + 2), m(n + 2);
    for (std::size_t j = 0; j < n; ++j) {
        agents[j] = {Population::Interval, state.interval_index[j]};
        x[j] = state.interval_positions[j];
        m[j] = mass;
    }
    agents[n] = {Population::ClusterLeft, 0.0};
    x[n] = state.cluster_left;
    m[n] = 1.0;
    agents[n + 1] = {Population::ClusterRight, 0.0};
    x[n + 1] = state.cluster_right;
    m[n + 1] = 1.0;

    // error per evaluated agent; negative marks an excluded agent
    std::vector<double> err(n + 2, -1.0);
    for_each_index(pool, n + 2, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            double expected = 0.0;
            if (i < n) {
                const double u = agents[i].index + f.phase;
                if (std::abs(u - std::round(u)) < exclusion_radius) continue;
                expected = cycling::moving_right_at_phase(agents[i].index, f.phase) ? v : -v;
            } else {
                expected = analytic_velocity(params, t, agents[i]);
            }
            CompensatedSum acc;
            for (std::size_t j = 0; j < n + 2; ++j) {
                acc += (m[j] * cycling::weight(f, agents[i], agents[j], x[i], x[j])) * (x[j] - x[i]);
            }
            err[i] = std::abs(acc.value() - expected);
        }
    });

    RhsCheck out;
    out.t = t;
    out.n_interval = n_interval;
    out.exclusion_radius = exclusion_radius;
    for (std::size_t i = 0; i < n + 2; ++i) {
        if (err[i] < 0.0) {
            ++out.excluded;
            continue;
        }
        ++out.evaluated;
        if (i >= n) {
            out.cluster_error = std::max(out.cluster_error, err[i]);
        } else if (x[i] > 0.5 - eps || x[i] < -0.5 + eps) {
            out.edge_error = std::max(out.edge_error, err[i]);
        } else {
            out.interior_error = std::max(out.interior_error, err[i]);
        }
        out.max_abs_error = std::max(out.max_abs_error, err[i]);
    }
    return out;
}

Ensemble packed_ensemble(const cycling::Params& params, double t, std::size_t n_interval, std::size_t n_cluster) {
    if (n_cluster == 0) throw std::invalid_argument("n_cluster must be positive");
    const auto state = analytic_state(params, t, n_interval);
    const std::size_t total = n_interval + 2 * n_cluster;
    std::vector<double> index, opinion, mass;
    index.reserve(total);
    opinion.reserve(total);
    mass.reserve(total);
    const double interval_mass = 1.0 / (2.0 * static_cast<double>(n_interval));
    for (std::size_t j = 0; j < n_interval; ++j) {
        index.push_back(state.interval_index[j] / cycling::kTotalMass);
        opinion.push_back(state.interval_positions[j]);
        mass.push_back(interval_mass);
    }
    const double cluster_mass = 1.0 / (4.0 * static_cast<double>(n_cluster));
    for (int side = 0; side < 2; ++side) {
        const double base = side == 0 ? 0.5 : 0.75;
        for (std::size_t k = 0; k < n_cluster; ++k) {
            index.push_back(base + (static_cast<double>(k) + 0.5) * 0.25 / static_cast<double>(n_cluster));
            opinion.push_back(side == 0 ? state.cluster_left : state.cluster_right);
            mass.push_back(cluster_mass);
        }
    }
    return Ensemble(std::move(index), std::move(opinion), std::move(mass), t);
}

Trajectory analytic_trajectory(const cycling::Params& params, const std::vector<double>& times,
                               std::size_t n_interval, std::size_t n_cluster) {
    Trajectory traj;
    traj.weight_bound = cycling::kTotalMass * cycling::weight_bound(params);
    for (double t : times) traj.snapshots.push_back(packed_ensemble(params, t, n_interval, n_cluster));
    return traj;
}

namespace {

std::vector<double> grid(double t_end, double spacing) {
    const auto count = static_cast<std::size_t>(std::ceil(t_end / spacing - 1e-9));
    std::vector<double> times;
    times.reserve(count + 1);
    for (std::size_t k = 0; k < count; ++k) times.push_back(static_cast<double>(k) * spacing);
    times.push_back(t_end);
    return times;
}

}  // namespace

CounterexampleReport run_counterexample_report(const cycling::Params& params, const CounterexampleOptions& options,
                                               WorkerPool* pool) {
    params.validate();
    if (!(options.t_end > 0.0)) throw std::invalid_argument("t_end must be positive");
    if (!(options.sample_dt > 0.0) || !(options.trajectory_dt > 0.0)) {
        throw std::invalid_argument("sampling steps must be positive");
    }
    if (options.tracked_agents == 0) throw std::invalid_argument("track at least one agent");

    CounterexampleReport r;
    r.params = params;
    r.options = options;
    r.final_phase = cycling::phase(params, options.t_end);
    r.gap_bound = params.c0 - 0.5 - cycling::cluster_drift(params, options.t_end);
    r.min_cluster_gap = std::numeric_limits<double>::infinity();

    const std::size_t n = options.n_interval;
    const std::vector<double> uniform_mass(n, 1.0 / static_cast<double>(n));
    const auto times = grid(options.t_end, options.sample_dt);

    r.tracked.resize(options.tracked_agents);
    std::vector<double> last_pos(options.tracked_agents), last_step(options.tracked_agents, 0.0);
    for (std::size_t k = 0; k < r.tracked.size(); ++k) {
        r.tracked[k].index = 2.0 * (static_cast<double>(k) + 0.5) / static_cast<double>(r.tracked.size());
        r.tracked[k].expected_folds = static_cast<std::size_t>(std::floor(r.tracked[k].index + r.final_phase) -
                                                               std::floor(r.tracked[k].index));
    }

    std::vector<double> reference;
    double previous_right = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < times.size(); ++s) {
        const double t = times[s];
        const auto state = analytic_state(params, t, n);

        r.max_mirror_defect = std::max(r.max_mirror_defect, std::abs(state.cluster_left + state.cluster_right));
        r.min_cluster_gap = std::min(r.min_cluster_gap, state.cluster_right - 0.5);
        if (!(state.cluster_right < previous_right)) r.cluster_monotone = false;
        previous_right = state.cluster_right;

        if (t >= options.stationary_from) {
            r.max_w1_to_uniform = std::max(
                r.max_w1_to_uniform, wasserstein1_to_uniform(state.interval_positions, uniform_mass, -0.5, 0.5));
            if (reference.empty()) {
                reference = state.interval_positions;
            } else {
                r.max_w1_between_times = std::max(
                    r.max_w1_between_times,
                    wasserstein1(state.interval_positions, uniform_mass, reference, uniform_mass));
            }
        }

        for (std::size_t k = 0; k < r.tracked.size(); ++k) {
            const double pos = cycling::fold(r.tracked[k].index + state.phase);
            if (s > 0) {
                const double step = pos - last_pos[k];
                r.tracked[k].total_variation += std::abs(step);
                if (step != 0.0) {
                    if (last_step[k] != 0.0 && (step > 0.0) != (last_step[k] > 0.0)) {
                        ++r.tracked[k].observed_reversals;
                    }
                    last_step[k] = step;
                }
            }
            last_pos[k] = pos;
        }
    }

    for (double t : options.rhs_times) {
        RhsConvergence c;
        c.coarse = verify_rhs(params, t, n, options.exclusion_radius, pool);
        c.fine = verify_rhs(params, t, 2 * n, options.exclusion_radius, pool);
        c.ratio = c.fine.max_abs_error > 0.0 ? c.coarse.max_abs_error / c.fine.max_abs_error : 0.0;
        r.rhs.push_back(c);
    }

    r.trajectory = analytic_trajectory(params, grid(options.t_end, options.trajectory_dt), n, options.n_cluster);
    OrderAuditOptions audit;
    audit.full_audit_below = 0;  // sample pairs; the analytic system is large
    const auto order = order_audit(r.trajectory, audit);
    r.order_flips = order.violations.size();
    r.order_pairs = order.pairs_checked;
    return r;
}

}  // namespace opinion_lab
