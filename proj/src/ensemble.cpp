#include "opinion_lab/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include "opinion_lab/summation.hpp"

namespace opinion_lab {

Ensemble::Ensemble(std::vector<double> agent_index, std::vector<double> opinion, std::vector<double> mass,
                   double time)
    : agent_index_(std::move(agent_index)), opinion_(std::move(opinion)), mass_(std::move(mass)), time_(time) {
    const std::size_t n = opinion_.size();
    if (n == 0 || agent_index_.size() != n || mass_.size() != n) {
        throw std::invalid_argument("ensemble needs equally sized, nonempty index/opinion/mass lists");
    }
    if (!(time_ >= 0.0) || !std::isfinite(time_)) throw std::invalid_argument("ensemble time must be >= 0");
    CompensatedSum total;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = agent_index_[i];
        if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument("agent indices must lie in [0, 1]");
        if (i > 0 && !(a > agent_index_[i - 1])) {
            throw std::invalid_argument("agent indices must be strictly increasing");
        }
        if (!(mass_[i] > 0.0) || !std::isfinite(mass_[i])) throw std::invalid_argument("masses must be positive");
        if (!std::isfinite(opinion_[i])) throw std::invalid_argument("opinions must be finite");
        total += mass_[i];
    }
    if (std::abs(total.value() - 1.0) > 1e-12) {
        throw std::invalid_argument("masses must sum to 1");
    }
}

Ensemble Ensemble::with_opinions(std::vector<double> opinion, double time) const {
    if (opinion.size() != size()) throw std::invalid_argument("opinion count does not match ensemble");
    for (double x : opinion) {
        if (!std::isfinite(x)) throw std::invalid_argument("opinions must be finite");
    }
    Ensemble out;
    out.agent_index_ = agent_index_;
    out.mass_ = mass_;
    out.opinion_ = std::move(opinion);
    out.time_ = time;
    return out;
}

Ensemble uniform_ensemble(std::size_t n, const OpinionProfile& profile) {
    if (n < 2) throw std::invalid_argument("uniform ensemble needs n >= 2");
    std::vector<double> index(n), opinion(n), mass(n, 1.0 / static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        index[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
        const double x = profile(index[i]);
        if (!(x >= 0.0 && x <= 1.0)) {
            std::ostringstream msg;
            msg << "initial profile '" << profile.description << "' gives " << x << " at alpha = " << index[i]
                << ", outside [0, 1]";
            throw std::invalid_argument(msg.str());
        }
        opinion[i] = x;
    }
    return Ensemble(std::move(index), std::move(opinion), std::move(mass));
}

void rhs_into(const Ensemble& nodes, std::span<const double> x, double t, const Kernel& kernel,
              std::span<double> out, WorkerPool* pool) {
    const std::size_t n = nodes.size();
    const auto a = nodes.agent_index();
    const auto m = nodes.mass();
    kernel.visit([&](const auto& w) {
        for_each_index(pool, n, [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                const double ai = a[i];
                const double xi = x[i];
                CompensatedSum acc;
                for (std::size_t j = 0; j < n; ++j) {
                    acc += (m[j] * w(t, ai, a[j], xi, x[j])) * (x[j] - xi);
                }
                out[i] = acc.value();
            }
        });
    });
}

std::vector<double> rhs(const Ensemble& ensemble, const Kernel& kernel, WorkerPool* pool) {
    std::vector<double> v(ensemble.size());
    rhs_into(ensemble, ensemble.opinion(), ensemble.time(), kernel, v, pool);
    return v;
}

void IntegratorConfig::validate(const Kernel& kernel) const {
    std::ostringstream msg;
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        msg << "dt must be positive, got " << dt;
    } else if (!(t_end > 0.0) || !std::isfinite(t_end)) {
        msg << "t_end must be positive, got " << t_end;
    } else if (record_every == 0) {
        msg << "record_every must be at least 1";
    } else if (kernel.weight_bound() > 0.0 && dt > 0.5 / kernel.weight_bound()) {
        msg << "step-size guard violated: dt = " << dt << " exceeds 0.5 / W = " << 0.5 / kernel.weight_bound()
            << " (W = " << kernel.weight_bound() << ")";
    } else {
        return;
    }
    throw IntegrationError(msg.str());
}

std::vector<double> Trajectory::opinions_at(double t) const {
    if (snapshots.empty()) throw std::logic_error("empty trajectory");
    if (t <= snapshots.front().time()) {
        const auto x = snapshots.front().opinion();
        return {x.begin(), x.end()};
    }
    if (t >= snapshots.back().time()) {
        const auto x = snapshots.back().opinion();
        return {x.begin(), x.end()};
    }
    const auto it = std::upper_bound(snapshots.begin(), snapshots.end(), t,
                                     [](double v, const Ensemble& e) { return v < e.time(); });
    const Ensemble& hi = *it;
    const Ensemble& lo = *(it - 1);
    const double span = hi.time() - lo.time();
    const double theta = span > 0.0 ? (t - lo.time()) / span : 0.0;
    std::vector<double> out(lo.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = lo.opinion()[i] + theta * (hi.opinion()[i] - lo.opinion()[i]);
    }
    return out;
}

namespace {

void require_finite(std::span<const double> v, double t) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i])) {
            std::ostringstream msg;
            msg << "non-finite velocity at node " << i << ", t = " << t << " (kernel produced NaN or inf)";
            throw IntegrationError(msg.str());
        }
    }
}

}  // namespace

Trajectory integrate(const Ensemble& initial, const Kernel& kernel, const IntegratorConfig& config) {
    config.validate(kernel);
    for (double x : initial.opinion()) {
        if (!(x >= 0.0 && x <= 1.0)) throw IntegrationError("initial opinions must lie in [0, 1]");
    }

    std::unique_ptr<WorkerPool> pool;
    if (config.threads > 1) pool = std::make_unique<WorkerPool>(config.threads);

    const std::size_t n = initial.size();
    const double W = kernel.weight_bound();
    const double t0 = initial.time();
    const double tol_box = 10.0 * config.dt * config.dt * W * W;
    const auto steps = static_cast<std::size_t>(std::ceil(config.t_end / config.dt - 1e-9));

    Trajectory traj;
    traj.weight_bound = W;
    traj.snapshots.push_back(initial);
    traj.steps.reserve(steps);

    std::vector<double> x(initial.opinion().begin(), initial.opinion().end());
    std::vector<double> k1(n), k2(n), k3(n), k4(n), stage(n), next(n);

    for (std::size_t s = 0; s < steps; ++s) {
        const double t = t0 + static_cast<double>(s) * config.dt;
        const double t_next = std::min(t0 + static_cast<double>(s + 1) * config.dt, t0 + config.t_end);
        const double h = t_next - t;

        rhs_into(initial, x, t, kernel, k1, pool.get());
        require_finite(k1, t);
        double vmax = 0.0;
        for (double v : k1) vmax = std::max(vmax, std::abs(v));

        if (config.stop_velocity && vmax < *config.stop_velocity) {
            traj.reached_steady = true;
            if (traj.snapshots.back().time() != t) traj.snapshots.push_back(initial.with_opinions(x, t));
            return traj;
        }

        if (config.method == Method::ExplicitEuler) {
            for (std::size_t i = 0; i < n; ++i) next[i] = x[i] + h * k1[i];
        } else {
            for (std::size_t i = 0; i < n; ++i) stage[i] = x[i] + 0.5 * h * k1[i];
            rhs_into(initial, stage, t + 0.5 * h, kernel, k2, pool.get());
            for (std::size_t i = 0; i < n; ++i) stage[i] = x[i] + 0.5 * h * k2[i];
            rhs_into(initial, stage, t + 0.5 * h, kernel, k3, pool.get());
            for (std::size_t i = 0; i < n; ++i) stage[i] = x[i] + h * k3[i];
            // a switch at the step end belongs to the next step
            const bool switch_at_end =
                !kernel.time_breakpoints(t, std::nextafter(t_next, std::numeric_limits<double>::infinity())).empty();
            rhs_into(initial, stage, switch_at_end ? std::nextafter(t_next, t) : t_next, kernel, k4, pool.get());
            for (std::size_t i = 0; i < n; ++i) {
                next[i] = x[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        require_finite(next, t_next);

        StepRecord rec;
        rec.t = t;
        rec.dt = h;
        rec.max_velocity = vmax;
        double max_move = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            rec.excursion = std::max({rec.excursion, -next[i], next[i] - 1.0});
            max_move = std::max(max_move, std::abs(next[i] - x[i]));
        }
        rec.lipschitz_ratio = W > 0.0 ? max_move / (W * h) : (max_move > 0.0 ? INFINITY : 0.0);
        if (rec.excursion > tol_box) {
            std::ostringstream msg;
            msg << "box invariant violated at t = " << t_next << ": excursion " << rec.excursion
                << " exceeds tolerance 10 dt^2 W^2 = " << tol_box;
            throw IntegrationError(msg.str());
        }
        if (config.clamp_to_box) {
            for (double& v : next) v = std::clamp(v, 0.0, 1.0);
        }
        x.swap(next);

        rec.recorded = ((s + 1) % config.record_every == 0) || (s + 1 == steps);
        if (rec.recorded) traj.snapshots.push_back(initial.with_opinions(x, t_next));
        traj.steps.push_back(rec);
    }
    return traj;
}

}  // namespace opinion_lab
