#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "opinion_lab/kernels.hpp"
#include "opinion_lab/parallel.hpp"
#include "opinion_lab/profile.hpp"

namespace opinion_lab {

/// Quadrature snapshot of the agent continuum: node indices in [0, 1],
/// opinions and masses, at one time.
///
/// Invariants checked at construction: indices strictly increasing inside
/// [0, 1], masses positive and summing to 1 within 1e-12, opinions finite.
class Ensemble {
public:
    Ensemble(std::vector<double> agent_index, std::vector<double> opinion, std::vector<double> mass,
             double time = 0.0);

    [[nodiscard]] std::size_t size() const { return opinion_.size(); }
    [[nodiscard]] double time() const { return time_; }
    [[nodiscard]] std::span<const double> agent_index() const { return agent_index_; }
    [[nodiscard]] std::span<const double> opinion() const { return opinion_; }
    [[nodiscard]] std::span<const double> mass() const { return mass_; }

    /// Same nodes and masses, new opinions and time. Opinions must be finite.
    [[nodiscard]] Ensemble with_opinions(std::vector<double> opinion, double time) const;

private:
    Ensemble() = default;

    std::vector<double> agent_index_;
    std::vector<double> opinion_;
    std::vector<double> mass_;
    double time_ = 0.0;
};

/// Midpoint nodes (i - 1/2) / n with mass 1/n. Throws std::invalid_argument
/// for n < 2 or a profile value outside [0, 1].
Ensemble uniform_ensemble(std::size_t n, const OpinionProfile& profile);

/// v_i = sum_j m_j w(t, a_i, a_j, x_i, x_j) (x_j - x_i), summed over j in node
/// order with compensated summation. Each v_i is computed independently, so
/// the result is the same for any pool size.
std::vector<double> rhs(const Ensemble& ensemble, const Kernel& kernel, WorkerPool* pool = nullptr);

/// rhs evaluated at explicit opinions and time; `out` must have ensemble size.
void rhs_into(const Ensemble& nodes, std::span<const double> opinion, double t, const Kernel& kernel,
              std::span<double> out, WorkerPool* pool = nullptr);

enum class Method { ExplicitEuler, Rk4 };

struct IntegratorConfig {
    Method method = Method::Rk4;
    double dt = 0.01;
    double t_end = 1.0;
    bool clamp_to_box = true;
    std::size_t record_every = 1;
    std::size_t threads = 1;
    /// Stop early once the largest speed drops below this value.
    std::optional<double> stop_velocity;

    /// Throws IntegrationError naming the offending value.
    void validate(const Kernel& kernel) const;
};

class IntegrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct StepRecord {
    double t = 0.0;  // step start
    double dt = 0.0;
    double max_velocity = 0.0;   // at the step start
    double excursion = 0.0;      // largest distance outside [0, 1] before clamping
    double lipschitz_ratio = 0.0;  // max |dx| / (W dt)
    bool recorded = false;       // a snapshot was taken at the step end
};

struct Trajectory {
    std::vector<Ensemble> snapshots;
    std::vector<StepRecord> steps;
    double weight_bound = 0.0;
    bool reached_steady = false;

    [[nodiscard]] const Ensemble& initial() const { return snapshots.front(); }
    [[nodiscard]] const Ensemble& final() const { return snapshots.back(); }
    /// Linear interpolation between the bracketing snapshots.
    [[nodiscard]] std::vector<double> opinions_at(double t) const;
};

/// Integrates from `initial` with the configured method. Snapshots are taken
/// at t = 0, every record_every steps, and at the final time.
///
/// Throws IntegrationError when dt violates dt <= 0.5 / W, when opinions leave
/// [0, 1] by more than 10 dt^2 W^2, or when the right-hand side is not finite.
Trajectory integrate(const Ensemble& initial, const Kernel& kernel, const IntegratorConfig& config);

}  // namespace opinion_lab
