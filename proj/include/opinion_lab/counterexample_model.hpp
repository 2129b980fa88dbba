#pragma once

// Closed-form pieces of the cycling construction: a mass of agents sweeping
// back and forth across [-1/2, 1/2] at a decaying speed v(t) = (1 + t)^-p,
// held in place by two slowly drifting end clusters.
//
// Populations live on their own index sets: the interval population I is
// indexed by [0, 2) with unit density, each cluster has unit mass. When the
// system is packed into the unit agent domain, I occupies [0, 1/2), the left
// cluster [1/2, 3/4) and the right cluster [3/4, 1]; weights are then scaled
// by the total mass 4 so velocities are unchanged.

#include <cmath>
#include <numbers>

namespace opinion_lab::cycling {

inline constexpr double kClusterRate = 2.0 * std::numbers::sqrt2 / 3.0;
inline constexpr double kTotalMass = 4.0;

struct Params {
    double v_exponent = 0.75;  // p in v(t) = (1 + t)^-p, must lie in (2/3, 1)
    double c0 = 8.05;          // initial distance of the clusters from 0

    /// Throws std::invalid_argument on p outside (2/3, 1) or c0 not above
    /// 1/2 plus the total cluster drift.
    void validate() const;
};

enum class Population { Interval, ClusterLeft, ClusterRight };

struct Agent {
    Population population = Population::Interval;
    double index = 0.0;  // position in [0, 2) for interval agents, unused otherwise
};

/// Interaction speed v(t).
inline double speed(const Params& p, double t) { return std::pow(1.0 + t, -p.v_exponent); }

/// Cumulative drift of interval agents, the integral of v over [0, t].
inline double phase(const Params& p, double t) {
    const double q = 1.0 - p.v_exponent;
    return (std::pow(1.0 + t, q) - 1.0) / q;
}

/// Cluster speed (2 sqrt 2 / 3) v^(3/2).
inline double cluster_speed(const Params& p, double t) {
    return kClusterRate * std::pow(speed(p, t), 1.5);
}

/// Distance travelled by each cluster over [0, t].
inline double cluster_drift(const Params& p, double t) {
    const double e = 1.5 * p.v_exponent - 1.0;
    return kClusterRate * (1.0 - std::pow(1.0 + t, -e)) / e;
}

/// Distance travelled by each cluster over [0, infinity).
inline double total_cluster_drift(const Params& p) {
    return kClusterRate / (1.5 * p.v_exponent - 1.0);
}

/// Interaction window epsilon(t) with epsilon^2 / 2 = v(t).
inline double window(const Params& p, double t) { return std::sqrt(2.0 * speed(p, t)); }

/// Triangle wave -1/2 + |1 - (u mod 2)|.
inline double fold(double u) {
    double r = std::fmod(u, 2.0);
    if (r < 0.0) r += 2.0;
    return -0.5 + std::abs(1.0 - r);
}

/// True when the interval agent at `index` is on a rightward sweep, given the
/// current phase.
inline bool moving_right_at_phase(double index, double phase_now) {
    const double turns = std::floor(index + phase_now);
    return std::fmod(turns, 2.0) != 0.0;
}

/// True when the interval agent at `index` is on a rightward sweep at time t.
inline bool moving_right(const Params& p, double index, double t) {
    return moving_right_at_phase(index, phase(p, t));
}

inline double cluster_right_position(const Params& p, double t) { return p.c0 - cluster_drift(p, t); }
inline double cluster_left_position(const Params& p, double t) { return -cluster_right_position(p, t); }

/// Time-dependent quantities shared by every weight evaluation at one time.
struct Frame {
    double window = 0.0;
    double phase = 0.0;
};

inline Frame frame(const Params& p, double t) { return {window(p, t), phase(p, t)}; }

/// Symmetric interaction weight in the populations' own measure (interval
/// density 1 per unit index, unit cluster masses).
double weight(const Frame& f, const Agent& a, const Agent& b, double xa, double xb);

inline double weight(const Params& p, double t, const Agent& a, const Agent& b, double xa, double xb) {
    return weight(frame(p, t), a, b, xa, xb);
}

/// Maps a unit-domain agent index to its population tag.
Agent agent_from_unit_index(double alpha);

/// Upper bound on the weight over all t >= 0 in the population measure.
double weight_bound(const Params& p);

}  // namespace opinion_lab::cycling
