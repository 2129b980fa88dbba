#include "opinion_lab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "opinion_lab/summation.hpp"

namespace opinion_lab {

// --- observables --------------------------------------------------------------

double moment(const Ensemble& ensemble, int k) {
    if (k < 1) throw std::invalid_argument("moment order must be >= 1");
    const auto x = ensemble.opinion();
    const auto m = ensemble.mass();
    CompensatedSum acc;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double p = x[i];
        for (int e = 1; e < k; ++e) p *= x[i];
        acc += m[i] * p;
    }
    return acc.value();
}

double lyapunov(const Ensemble& ensemble, const std::function<double(double)>& f) {
    const auto x = ensemble.opinion();
    const auto m = ensemble.mass();
    CompensatedSum acc;
    for (std::size_t i = 0; i < x.size(); ++i) acc += m[i] * f(x[i]);
    return acc.value();
}

double huber(double x, double center, double delta) {
    const double d = std::abs(x - center);
    return d <= delta ? d * d / (2.0 * delta) : d - 0.5 * delta;
}

std::vector<ConvexFunction> convex_dictionary() {
    std::vector<ConvexFunction> out{
        {"x", [](double x) { return x; }},
        {"-x", [](double x) { return -x; }},
        {"x^2", [](double x) { return x * x; }},
        {"x^4", [](double x) { return x * x * x * x; }},
        {"exp(x)", [](double x) { return std::exp(x); }},
        {"exp(-x)", [](double x) { return std::exp(-x); }},
    };
    for (double c : {0.25, 0.5, 0.75}) {
        out.push_back({"huber|x-" + std::to_string(c).substr(0, 4) + "|", [c](double x) { return huber(x, c, 0.01); }});
    }
    return out;
}

ConvexFunction random_piecewise_linear_convex(std::uint64_t seed, int pieces) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> slope(-3.0, 3.0);
    std::uniform_real_distribution<double> offset(-1.0, 1.0);
    std::vector<std::pair<double, double>> lines(static_cast<std::size_t>(std::max(pieces, 1)));
    for (auto& [s, c] : lines) {
        s = slope(rng);
        c = offset(rng);
    }
    std::sort(lines.begin(), lines.end());
    return {"pl_convex_" + std::to_string(seed), [lines](double x) {
                double best = -std::numeric_limits<double>::infinity();
                for (const auto& [s, c] : lines) best = std::max(best, s * x + c);
                return best;
            }};
}

double dissipation(const Ensemble& ensemble, const Kernel& kernel, WorkerPool* pool) {
    const std::size_t n = ensemble.size();
    const auto a = ensemble.agent_index();
    const auto x = ensemble.opinion();
    const auto m = ensemble.mass();
    const double t = ensemble.time();
    std::vector<double> rows(n);
    kernel.visit([&](const auto& w) {
        for_each_index(pool, n, [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                CompensatedSum acc;
                for (std::size_t j = 0; j < n; ++j) {
                    const double d = x[j] - x[i];
                    acc += (m[j] * w(t, a[i], a[j], x[i], x[j])) * (d * d);
                }
                rows[i] = m[i] * acc.value();
            }
        });
    });
    return compensated_sum(rows);
}

VarianceIdentity variance_identity_check(std::span<const double> values, std::span<const double> masses) {
    if (values.size() != masses.size()) throw std::invalid_argument("values and masses differ in length");
    for (double m : masses) {
        if (!(m > 0.0)) throw std::invalid_argument("masses must be positive");
    }
    const std::size_t n = values.size();

    CompensatedSum pairs;
    for (std::size_t i = 0; i < n; ++i) {
        CompensatedSum row;
        for (std::size_t j = 0; j < n; ++j) {
            const double d = values[i] - values[j];
            row += masses[j] * (d * d);
        }
        pairs += masses[i] * row.value();
    }

    CompensatedSum total, weighted;
    for (std::size_t i = 0; i < n; ++i) {
        total += masses[i];
        weighted += masses[i] * values[i];
    }
    const double M = total.value();
    const double mean = weighted.value() / M;
    CompensatedSum spread;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = values[i] - mean;
        spread += masses[i] * (d * d);
    }

    VarianceIdentity out;
    out.lhs = pairs.value();
    out.rhs = 2.0 * M * spread.value();
    out.abs_error = std::abs(out.lhs - out.rhs);
    return out;
}

namespace {

struct Atom {
    double x;
    double m;
};

std::vector<Atom> sorted_atoms(std::span<const double> x, std::span<const double> m) {
    if (x.size() != m.size() || x.empty()) throw std::invalid_argument("measure needs matching nonempty lists");
    std::vector<Atom> atoms(x.size());
    CompensatedSum total;
    for (std::size_t i = 0; i < x.size(); ++i) total += m[i];
    const double norm = total.value();
    for (std::size_t i = 0; i < x.size(); ++i) atoms[i] = {x[i], m[i] / norm};
    std::stable_sort(atoms.begin(), atoms.end(), [](const Atom& p, const Atom& q) { return p.x < q.x; });
    return atoms;
}

}  // namespace

double wasserstein1(std::span<const double> xa, std::span<const double> ma, std::span<const double> xb,
                    std::span<const double> mb) {
    const auto a = sorted_atoms(xa, ma);
    const auto b = sorted_atoms(xb, mb);
    // Walk both quantile functions over the shared levels of cumulative mass.
    CompensatedSum acc;
    std::size_t i = 0, j = 0;
    double left_a = a[0].m, left_b = b[0].m;
    while (i < a.size() && j < b.size()) {
        const double step = std::min(left_a, left_b);
        acc += step * std::abs(a[i].x - b[j].x);
        left_a -= step;
        left_b -= step;
        if (left_a <= 0.0) {
            if (++i < a.size()) left_a = a[i].m;
        }
        if (left_b <= 0.0) {
            if (++j < b.size()) left_b = b[j].m;
        }
    }
    return acc.value();
}

double wasserstein1(const Ensemble& a, const Ensemble& b) {
    return wasserstein1(a.opinion(), a.mass(), b.opinion(), b.mass());
}

double wasserstein1_to_uniform(std::span<const double> x, std::span<const double> m, double lo, double hi) {
    if (!(hi > lo)) throw std::invalid_argument("uniform reference needs lo < hi");
    const auto atoms = sorted_atoms(x, m);
    const double len = hi - lo;
    CompensatedSum acc;
    double c0 = 0.0;
    for (std::size_t k = 0; k < atoms.size(); ++k) {
        const double c1 = (k + 1 == atoms.size()) ? 1.0 : std::min(1.0, c0 + atoms[k].m);
        // |g| with g(q) = y - lo - q len, integrated over [c0, c1]
        const double g0 = atoms[k].x - lo - c0 * len;
        const double g1 = atoms[k].x - lo - c1 * len;
        if ((g0 >= 0.0) == (g1 >= 0.0)) {
            acc += 0.5 * std::abs(g0 + g1) * (c1 - c0);
        } else {
            acc += 0.5 * (g0 * g0 + g1 * g1) / len;
        }
        c0 = c1;
    }
    return acc.value();
}

// --- clusters -----------------------------------------------------------------

double ClusterSet::min_separation() const {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < centers.size(); ++k) best = std::min(best, centers[k] - centers[k - 1]);
    return best;
}

ClusterSet detect_clusters(const Ensemble& ensemble, double gap_threshold, double mass_floor) {
    if (!(gap_threshold > 0.0 && gap_threshold < 1.0)) {
        throw std::invalid_argument("gap_threshold must lie in (0, 1)");
    }
    const auto atoms = sorted_atoms(ensemble.opinion(), ensemble.mass());
    ClusterSet out;
    std::size_t start = 0;
    for (std::size_t k = 1; k <= atoms.size(); ++k) {
        if (k < atoms.size() && atoms[k].x - atoms[k - 1].x <= gap_threshold) continue;
        CompensatedSum mass, first;
        for (std::size_t q = start; q < k; ++q) {
            mass += atoms[q].m;
            first += atoms[q].m * atoms[q].x;
        }
        const double cm = mass.value();
        if (cm < mass_floor) {
            out.residual_mass += cm;
        } else {
            out.centers.push_back(first.value() / cm);
            out.masses.push_back(cm);
            out.spreads.push_back(atoms[k - 1].x - atoms[start].x);
        }
        start = k;
    }
    return out;
}

// --- order ----------------------------------------------------------------------

OrderAuditOptions order_audit_options_for(const Kernel& kernel) {
    OrderAuditOptions o;
    if (kernel.symmetric() && kernel.position_only() && kernel.lipschitz()) {
        o.weight_bound = kernel.weight_bound();
        o.lipschitz = kernel.lipschitz();
    }
    return o;
}

OrderAuditReport order_audit(const Trajectory& trajectory, const OrderAuditOptions& options) {
    if (trajectory.snapshots.size() < 2) throw std::invalid_argument("order audit needs >= 2 snapshots");
    const std::size_t n = trajectory.initial().size();

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    OrderAuditReport report;
    if (n < options.full_audit_below) {
        report.full_audit = true;
        pairs.reserve(n * (n - 1) / 2);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
        }
    } else {
        std::mt19937_64 rng(options.rng_seed);
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        pairs.reserve(options.pair_budget);
        while (pairs.size() < options.pair_budget) {
            const std::size_t i = pick(rng), j = pick(rng);
            if (i != j) pairs.emplace_back(std::min(i, j), std::max(i, j));
        }
    }

    const bool rate = options.weight_bound && options.lipschitz;
    report.rate_bound_checked = rate;
    if (rate) report.rate_bound = -(*options.weight_bound + *options.lipschitz);
    report.min_gap_ratio_log = 0.0;
    report.worst_rate_shortfall = -std::numeric_limits<double>::infinity();

    const auto x0 = trajectory.initial().opinion();
    const double t0 = trajectory.initial().time();
    constexpr std::size_t kMaxStored = 10000;
    for (const auto& [i, j] : pairs) {
        const double d0 = x0[j] - x0[i];
        if (d0 == 0.0) continue;
        ++report.pairs_checked;
        const bool positive = d0 > 0.0;
        for (std::size_t s = 1; s < trajectory.snapshots.size(); ++s) {
            const auto& snap = trajectory.snapshots[s];
            const double d = snap.opinion()[j] - snap.opinion()[i];
            if ((positive && !(d > 0.0)) || (!positive && !(d < 0.0))) {
                if (report.violations.size() < kMaxStored) report.violations.push_back({i, j, snap.time()});
                break;
            }
            const double elapsed = snap.time() - t0;
            if (elapsed <= 0.0) continue;
            const double ratio = std::abs(d) / std::abs(d0);
            report.min_gap_ratio_log = std::min(report.min_gap_ratio_log, std::log(ratio) / elapsed);
            if (rate) {
                const double floor_ratio = std::exp(report.rate_bound * elapsed);
                report.worst_rate_shortfall = std::max(report.worst_rate_shortfall, 1.0 - ratio / floor_ratio);
            }
        }
    }
    if (!rate || report.pairs_checked == 0) report.worst_rate_shortfall = 0.0;
    return report;
}

// --- series -----------------------------------------------------------------------

MomentSeries moment_series(const Trajectory& trajectory, int max_order) {
    MomentSeries out;
    for (const auto& snap : trajectory.snapshots) {
        out.times.push_back(snap.time());
        for (int k = 1; k <= max_order; ++k) out.values[k].push_back(moment(snap, k));
    }
    return out;
}

MonotonicityReport monotonicity_report(std::span<const double> series, double tolerance) {
    if (series.empty()) throw std::invalid_argument("monotonicity report needs a nonempty series");
    MonotonicityReport r;
    for (std::size_t k = 1; k < series.size(); ++k) {
        const double up = series[k] - series[k - 1];
        if (up > r.worst_uptick) {
            r.worst_uptick = up;
            r.worst_index = k;
        }
        if (up > tolerance) r.pass = false;
    }
    return r;
}

double max_drift(std::span<const double> series) {
    double worst = 0.0;
    for (double v : series) worst = std::max(worst, std::abs(v - series.front()));
    return worst;
}

namespace {

bool weight_pattern_changed(const Ensemble& a, const Ensemble& b, const Kernel& kernel) {
    if (!kernel.time_breakpoints(a.time(), b.time()).empty()) return true;
    const std::size_t n = a.size();
    const auto idx = a.agent_index();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double wa = kernel(a.time(), idx[i], idx[j], a.opinion()[i], a.opinion()[j]);
            const double wb = kernel(b.time(), idx[i], idx[j], b.opinion()[i], b.opinion()[j]);
            if (wa != wb) return true;
        }
    }
    return false;
}

}  // namespace

DissipationAudit dissipation_audit(const Trajectory& trajectory, const Kernel& kernel, WorkerPool* pool) {
    DissipationAudit audit;
    const auto& snaps = trajectory.snapshots;
    if (snaps.size() < 2) return audit;
    const bool smooth = kernel.lipschitz().has_value() && kernel.time_breakpoints(0.0, snaps.back().time()).empty();

    std::vector<double> m2(snaps.size()), D(snaps.size());
    for (std::size_t s = 0; s < snaps.size(); ++s) {
        m2[s] = moment(snaps[s], 2);
        D[s] = dissipation(snaps[s], kernel, pool);
    }
    CompensatedSum cumulative;
    for (std::size_t s = 0; s + 1 < snaps.size(); ++s) {
        DissipationStep step;
        step.t0 = snaps[s].time();
        step.t1 = snaps[s + 1].time();
        const double h = step.t1 - step.t0;
        step.m2_rate = (m2[s + 1] - m2[s]) / h;
        step.dissipation = 0.5 * (D[s] + D[s + 1]);
        step.residual = step.m2_rate + step.dissipation;
        step.switching = !smooth && weight_pattern_changed(snaps[s], snaps[s + 1], kernel);
        if (!step.switching) audit.worst_residual = std::max(audit.worst_residual, std::abs(step.residual));
        cumulative += step.dissipation * h;
        audit.steps.push_back(step);
    }
    audit.cumulative = cumulative.value();
    audit.m2_drop = m2.front() - m2.back();
    return audit;
}

std::vector<double> wasserstein_to_final(const Trajectory& trajectory) {
    std::vector<double> out;
    out.reserve(trajectory.snapshots.size());
    for (const auto& snap : trajectory.snapshots) out.push_back(wasserstein1(snap, trajectory.final()));
    return out;
}

double tail_wasserstein(const Trajectory& trajectory, double t_from) {
    double worst = 0.0;
    for (const auto& snap : trajectory.snapshots) {
        if (snap.time() >= t_from) worst = std::max(worst, wasserstein1(snap, trajectory.final()));
    }
    return worst;
}

}  // namespace opinion_lab
