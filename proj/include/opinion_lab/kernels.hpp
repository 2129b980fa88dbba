#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "opinion_lab/counterexample_model.hpp"
#include "opinion_lab/profile.hpp"

namespace opinion_lab {

/// Piecewise-constant-in-time interaction matrix for a finite set of blocks.
///
/// Segment k applies from segments[k].start until the next segment's start.
/// With a positive period the pattern repeats, times being reduced modulo the
/// period before lookup.
struct WeightSchedule {
    struct Segment {
        double start = 0.0;
        std::vector<double> matrix;  // row-major, blocks x blocks
    };

    std::size_t blocks = 0;
    std::vector<Segment> segments;
    double period = 0.0;

    void validate() const;
    [[nodiscard]] const std::vector<double>& at(double t) const;
    [[nodiscard]] double max_entry() const;
    [[nodiscard]] bool symmetric() const;
    /// Switching times strictly inside (t0, t1).
    [[nodiscard]] std::vector<double> breakpoints(double t0, double t1) const;
};

namespace families {

/// 1 when |xb - xa| < radius.
struct HegselmannKrause {
    double radius;
    double operator()(double, double, double, double xa, double xb) const {
        return std::abs(xb - xa) < radius ? 1.0 : 0.0;
    }
};

/// Hegselmann-Krause with a radius that depends on the listening agent.
struct BoundedConfidence {
    PiecewiseConstant radius;
    double operator()(double, double a, double, double xa, double xb) const {
        return std::abs(xb - xa) < radius(a) ? 1.0 : 0.0;
    }
};

/// Hegselmann-Krause with a radius that depends on the broadcasting agent.
struct BoundedInfluence {
    PiecewiseConstant radius;
    double operator()(double, double, double b, double xa, double xb) const {
        return std::abs(xb - xa) < radius(b) ? 1.0 : 0.0;
    }
};

/// exp(-(xa - xb)^2 / sigma_a^2).
struct GaussianDecay {
    PiecewiseConstant sigma;
    double operator()(double, double a, double, double xa, double xb) const {
        const double s = sigma(a);
        const double d = xa - xb;
        return std::exp(-(d * d) / (s * s));
    }
};

/// 1 when r_min <= |xa - xb| <= r_max.
struct RingSensing {
    double r_min;
    double r_max;
    double operator()(double, double, double, double xa, double xb) const {
        const double d = std::abs(xa - xb);
        return (d >= r_min && d <= r_max) ? 1.0 : 0.0;
    }
};

/// Interaction only between similar agents (|a - b| < similarity) that also
/// hold close opinions (|xa - xb| < radius).
struct TypedConfidence {
    double radius;
    double similarity;
    double operator()(double, double a, double b, double xa, double xb) const {
        return (std::abs(a - b) < similarity && std::abs(xa - xb) < radius) ? 1.0 : 0.0;
    }
};

/// Embeds the finite system dz_i/dt = sum_j w_ij(t) (z_j - z_i) by splitting
/// [0, 1] into equal blocks and setting w = blocks * w_ij.
struct FiniteConsensusEmbed {
    WeightSchedule schedule;
    static std::size_t block_of(double alpha, std::size_t blocks) {
        const auto k = static_cast<std::size_t>(alpha * static_cast<double>(blocks));
        return k < blocks ? k : blocks - 1;
    }
    double operator()(double t, double a, double b, double, double) const {
        const std::size_t n = schedule.blocks;
        const auto& m = schedule.at(t);
        return static_cast<double>(n) * m[block_of(a, n) * n + block_of(b, n)];
    }
};

/// Weights of the cycling construction, packed into the unit agent domain.
struct CycleWeights {
    cycling::Params params;
    double operator()(double t, double a, double b, double xa, double xb) const {
        return cycling::kTotalMass * cycling::weight(params, t, cycling::agent_from_unit_index(a),
                                                     cycling::agent_from_unit_index(b), xa, xb);
    }
};

struct Constant {
    double value;
    double operator()(double, double, double, double, double) const { return value; }
};

struct Custom {
    std::function<double(double, double, double, double, double)> rule;
    double operator()(double t, double a, double b, double xa, double xb) const {
        return rule(t, a, b, xa, xb);
    }
};

}  // namespace families

/// Declared structural properties of a kernel.
struct KernelTraits {
    double weight_bound = 0.0;        // W
    std::optional<double> lipschitz;  // L in (xa, xb); absent for discontinuous rules
    bool symmetric = false;
    bool position_only = false;  // depends on (t, xa, xb) only
};

/// Interaction weight w(t, a, b, xa, xb) together with its declared bounds.
class Kernel {
public:
    using Family = std::variant<families::HegselmannKrause, families::BoundedConfidence,
                                families::BoundedInfluence, families::GaussianDecay, families::RingSensing,
                                families::TypedConfidence, families::FiniteConsensusEmbed,
                                families::CycleWeights, families::Constant, families::Custom>;

    static Kernel hegselmann_krause(double radius);
    static Kernel bounded_confidence(PiecewiseConstant radius_of_agent);
    static Kernel bounded_influence(PiecewiseConstant radius_of_source);
    static Kernel gaussian_decay(PiecewiseConstant sigma_of_agent);
    static Kernel ring_sensing(double r_min, double r_max);
    static Kernel typed_confidence(double opinion_radius, double similarity_radius);
    static Kernel cycle_weights(cycling::Params params);
    static Kernel constant(double value);
    static Kernel zero() { return constant(0.0); }
    /// The declared traits are trusted here; probe_kernel checks them.
    static Kernel custom(std::function<double(double, double, double, double, double)> rule,
                         KernelTraits traits, std::string name = "custom");

    /// Evaluates the weight. Debug builds assert 0 <= w <= W.
    [[nodiscard]] double operator()(double t, double a, double b, double xa, double xb) const;

    template <class F>
    decltype(auto) visit(F&& f) const {
        return std::visit(std::forward<F>(f), family_);
    }

    [[nodiscard]] const KernelTraits& traits() const { return traits_; }
    [[nodiscard]] double weight_bound() const { return traits_.weight_bound; }
    [[nodiscard]] std::optional<double> lipschitz() const { return traits_.lipschitz; }
    [[nodiscard]] bool symmetric() const { return traits_.symmetric; }
    [[nodiscard]] bool position_only() const { return traits_.position_only; }
    [[nodiscard]] const std::string& name() const { return name_; }

    /// Times strictly inside (t0, t1) at which the kernel jumps in t.
    [[nodiscard]] std::vector<double> time_breakpoints(double t0, double t1) const;

private:
    Kernel(Family family, KernelTraits traits, std::string name)
        : family_(std::move(family)), traits_(traits), name_(std::move(name)) {}

    friend Kernel finite_consensus_embed(WeightSchedule schedule);

    Family family_;
    KernelTraits traits_;
    std::string name_;
};

/// Kernel reproducing a finite consensus system on equal blocks of [0, 1].
/// Throws std::invalid_argument on negative or non-finite schedule entries.
Kernel finite_consensus_embed(WeightSchedule schedule);

/// The switching three-block system: block 2 is pulled towards block 1 on
/// [2k, 2k + 1) and towards block 3 on [2k + 1, 2k + 2).
WeightSchedule alternating_three_block_schedule();

/// Membership query for the class of kernels with w >= delta whenever
/// |xa - xb| <= r.
struct GammaQuery {
    double r = 0.0;
    double delta = 0.0;
};

struct KernelProbeReport {
    std::size_t samples_tested = 0;
    double max_symmetry_violation = 0.0;
    double gamma_r = 0.0;
    double gamma_delta = 0.0;
    bool gamma_holds = true;
    double lipschitz_estimate = 0.0;  // lower bound on the true constant
    double max_weight_seen = 0.0;
    bool bound_respected = true;  // every sample in [0, W]
};

/// Samples (t, a, b, xa, xb) on a randomly shifted Halton sequence and measures
/// symmetry defect, Gamma(r, delta) membership and finite-difference
/// Lipschitz ratios. Half of the samples are drawn with |xa - xb| <= r so the
/// Gamma check is not starved.
KernelProbeReport probe_kernel(const Kernel& kernel, std::size_t sample_count, std::uint64_t rng_seed,
                               GammaQuery gamma = {}, double t_max = 10.0);

}  // namespace opinion_lab
