#include "opinion_lab/counterexample_model.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace opinion_lab::cycling {

void Params::validate() const {
    if (!(v_exponent > 2.0 / 3.0 && v_exponent < 1.0)) {
        throw std::invalid_argument("v_exponent must lie in (2/3, 1), got " + std::to_string(v_exponent));
    }
    const double bound = 0.5 + total_cluster_drift(*this);
    if (!(c0 > bound)) {
        throw std::invalid_argument("c0 must exceed 1/2 + total cluster drift = " + std::to_string(bound) +
                                    ", got " + std::to_string(c0));
    }
}

namespace {

// Weight agent a places on agent b before symmetrisation.
double one_sided(const Frame& f, const Agent& a, const Agent& b, double xa, double xb) {
    if (a.population != Population::Interval) return 0.0;
    const double eps = f.window;
    const bool a_right = moving_right_at_phase(a.index, f.phase);

    if (b.population == Population::Interval) {
        if (a_right && !moving_right_at_phase(b.index, f.phase)) {
            const double ahead = xb - xa;
            return (ahead > 0.0 && ahead < eps) ? 1.0 : 0.0;
        }
        return 0.0;
    }

    // Edge agents lean on the cluster they are heading towards. The numerator
    // vanishes at the window edge; the denominator is the distance to that
    // cluster, which keeps the pull equal to half the numerator.
    if (a_right && b.population == Population::ClusterRight && xa >= 0.5 - eps) {
        const double edge = 0.5 - xa;
        const double num = eps * eps - edge * edge;
        const double den = 2.0 * (xb - xa);
        return (num > 0.0 && den > 0.0) ? num / den : 0.0;
    }
    if (!a_right && b.population == Population::ClusterLeft && xa <= -0.5 + eps) {
        const double edge = 0.5 + xa;
        const double num = eps * eps - edge * edge;
        const double den = 2.0 * (xa - xb);
        return (num > 0.0 && den > 0.0) ? num / den : 0.0;
    }
    return 0.0;
}

}  // namespace

double weight(const Frame& f, const Agent& a, const Agent& b, double xa, double xb) {
    // The one-sided rules have disjoint supports, so the sum is the symmetrisation.
    return one_sided(f, a, b, xa, xb) + one_sided(f, b, a, xb, xa);
}

Agent agent_from_unit_index(double alpha) {
    if (alpha < 0.5) return {Population::Interval, 4.0 * alpha};
    if (alpha < 0.75) return {Population::ClusterLeft, 0.0};
    return {Population::ClusterRight, 0.0};
}

double weight_bound(const Params& p) {
    const double gap = p.c0 - 0.5 - total_cluster_drift(p);
    return std::max(1.0, gap > 0.0 ? 1.0 / gap : 1.0);
}

}  // namespace opinion_lab::cycling
