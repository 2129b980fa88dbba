#include "opinion_lab/kernels.hpp"

#include <algorithm>
#include <array>
#include <cassert>
#include <random>
#include <stdexcept>

namespace opinion_lab {

// --- WeightSchedule --------------------------------------------------------

void WeightSchedule::validate() const {
    if (blocks == 0) throw std::invalid_argument("schedule needs at least one block");
    if (segments.empty()) throw std::invalid_argument("schedule needs at least one segment");
    if (segments.front().start != 0.0) throw std::invalid_argument("first schedule segment must start at t = 0");
    if (period < 0.0 || !std::isfinite(period)) throw std::invalid_argument("schedule period must be >= 0");
    for (std::size_t k = 0; k < segments.size(); ++k) {
        const auto& s = segments[k];
        if (k > 0 && !(s.start > segments[k - 1].start)) {
            throw std::invalid_argument("schedule segment starts must be strictly increasing");
        }
        if (period > 0.0 && s.start >= period) {
            throw std::invalid_argument("schedule segment starts must lie inside the period");
        }
        if (s.matrix.size() != blocks * blocks) {
            throw std::invalid_argument("schedule matrix must have blocks x blocks entries");
        }
        for (double w : s.matrix) {
            if (!std::isfinite(w)) throw std::invalid_argument("schedule entries must be finite");
            if (w < 0.0) throw std::invalid_argument("schedule entries must be nonnegative");
        }
    }
}

const std::vector<double>& WeightSchedule::at(double t) const {
    double tau = t;
    if (period > 0.0) {
        tau = std::fmod(t, period);
        if (tau < 0.0) tau += period;
    }
    const auto it = std::upper_bound(segments.begin(), segments.end(), tau,
                                     [](double v, const Segment& s) { return v < s.start; });
    return (it == segments.begin() ? segments.front() : *(it - 1)).matrix;
}

double WeightSchedule::max_entry() const {
    double m = 0.0;
    for (const auto& s : segments) {
        for (double w : s.matrix) m = std::max(m, w);
    }
    return m;
}

bool WeightSchedule::symmetric() const {
    for (const auto& s : segments) {
        for (std::size_t i = 0; i < blocks; ++i) {
            for (std::size_t j = i + 1; j < blocks; ++j) {
                if (s.matrix[i * blocks + j] != s.matrix[j * blocks + i]) return false;
            }
        }
    }
    return true;
}

std::vector<double> WeightSchedule::breakpoints(double t0, double t1) const {
    std::vector<double> out;
    if (segments.size() < 2 && period <= 0.0) return out;
    if (period <= 0.0) {
        for (std::size_t k = 1; k < segments.size(); ++k) {
            if (segments[k].start > t0 && segments[k].start < t1) out.push_back(segments[k].start);
        }
        return out;
    }
    // A single-segment periodic schedule never switches.
    if (segments.size() < 2) return out;
    for (double cycle = std::floor(t0 / period) * period; cycle < t1; cycle += period) {
        for (const auto& s : segments) {
            const double when = cycle + s.start;
            if (when > t0 && when < t1) out.push_back(when);
        }
    }
    return out;
}

// --- Kernel -----------------------------------------------------------------

namespace {

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(what) + " must be positive");
}

void require_positive(const PiecewiseConstant& p, const char* what) {
    for (double v : p.values()) require_positive(v, what);
}

}  // namespace

Kernel Kernel::hegselmann_krause(double radius) {
    require_positive(radius, "radius");
    return {families::HegselmannKrause{radius}, {1.0, std::nullopt, true, true}, "hegselmann_krause"};
}

Kernel Kernel::bounded_confidence(PiecewiseConstant radius_of_agent) {
    require_positive(radius_of_agent, "radius");
    const bool uniform = radius_of_agent.is_uniform();
    return {families::BoundedConfidence{std::move(radius_of_agent)},
            {1.0, std::nullopt, uniform, uniform},
            "bounded_confidence"};
}

Kernel Kernel::bounded_influence(PiecewiseConstant radius_of_source) {
    require_positive(radius_of_source, "radius");
    const bool uniform = radius_of_source.is_uniform();
    return {families::BoundedInfluence{std::move(radius_of_source)},
            {1.0, std::nullopt, uniform, uniform},
            "bounded_influence"};
}

Kernel Kernel::gaussian_decay(PiecewiseConstant sigma_of_agent) {
    require_positive(sigma_of_agent, "sigma");
    const bool uniform = sigma_of_agent.is_uniform();
    // |d/dx exp(-x^2/s^2)| peaks at sqrt(2) e^(-1/2) / s < 1 / s.
    const double lipschitz = 1.0 / sigma_of_agent.min();
    return {families::GaussianDecay{std::move(sigma_of_agent)},
            {1.0, lipschitz, uniform, uniform},
            "gaussian_decay"};
}

Kernel Kernel::ring_sensing(double r_min, double r_max) {
    if (!(r_min >= 0.0) || !(r_max > r_min) || !std::isfinite(r_max)) {
        throw std::invalid_argument("ring sensing needs 0 <= r_min < r_max");
    }
    return {families::RingSensing{r_min, r_max}, {1.0, std::nullopt, true, true}, "ring_sensing"};
}

Kernel Kernel::typed_confidence(double opinion_radius, double similarity_radius) {
    require_positive(opinion_radius, "radius");
    require_positive(similarity_radius, "similarity radius");
    return {families::TypedConfidence{opinion_radius, similarity_radius},
            {1.0, std::nullopt, true, false},
            "typed_confidence"};
}

Kernel Kernel::cycle_weights(cycling::Params params) {
    params.validate();
    const double bound = cycling::kTotalMass * cycling::weight_bound(params);
    return {families::CycleWeights{params}, {bound, std::nullopt, true, false}, "cycle_weights"};
}

Kernel Kernel::constant(double value) {
    if (!(value >= 0.0) || !std::isfinite(value)) throw std::invalid_argument("constant weight must be >= 0");
    return {families::Constant{value}, {value, 0.0, true, true}, "constant"};
}

Kernel Kernel::custom(std::function<double(double, double, double, double, double)> rule, KernelTraits traits,
                      std::string name) {
    if (!rule) throw std::invalid_argument("custom kernel needs a rule");
    if (!(traits.weight_bound >= 0.0) || !std::isfinite(traits.weight_bound)) {
        throw std::invalid_argument("custom kernel needs a finite weight bound W >= 0");
    }
    if (traits.lipschitz && !(*traits.lipschitz >= 0.0)) {
        throw std::invalid_argument("declared Lipschitz constant must be >= 0");
    }
    return {families::Custom{std::move(rule)}, traits, std::move(name)};
}

Kernel finite_consensus_embed(WeightSchedule schedule) {
    schedule.validate();
    const double n = static_cast<double>(schedule.blocks);
    KernelTraits traits{n * schedule.max_entry(), 0.0, schedule.symmetric(), false};
    return {families::FiniteConsensusEmbed{std::move(schedule)}, traits, "finite_consensus"};
}

WeightSchedule alternating_three_block_schedule() {
    WeightSchedule s;
    s.blocks = 3;
    s.period = 2.0;
    // row i lists the weights block i places on each block
    s.segments.push_back({0.0, {0, 0, 0, 1, 0, 0, 0, 0, 0}});
    s.segments.push_back({1.0, {0, 0, 0, 0, 0, 1, 0, 0, 0}});
    return s;
}

double Kernel::operator()(double t, double a, double b, double xa, double xb) const {
    const double w = std::visit([&](const auto& f) { return f(t, a, b, xa, xb); }, family_);
    assert(!(w < 0.0) && "kernel weight must be nonnegative");
    assert(!(w > traits_.weight_bound * (1.0 + 1e-12)) && "kernel weight exceeds declared bound");
    return w;
}

std::vector<double> Kernel::time_breakpoints(double t0, double t1) const {
    if (const auto* fce = std::get_if<families::FiniteConsensusEmbed>(&family_)) {
        return fce->schedule.breakpoints(t0, t1);
    }
    return {};
}

// --- probing ------------------------------------------------------------------

namespace {

double radical_inverse(std::uint64_t index, std::uint64_t base) {
    double result = 0.0;
    double f = 1.0 / static_cast<double>(base);
    while (index > 0) {
        result += f * static_cast<double>(index % base);
        index /= base;
        f /= static_cast<double>(base);
    }
    return result;
}

}  // namespace

KernelProbeReport probe_kernel(const Kernel& kernel, std::size_t sample_count, std::uint64_t rng_seed,
                               GammaQuery gamma, double t_max) {
    if (sample_count == 0) throw std::invalid_argument("probe needs at least one sample");
    constexpr std::array<std::uint64_t, 6> primes{2, 3, 5, 7, 11, 13};
    std::mt19937_64 rng(rng_seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::array<double, 6> shift{};
    for (double& s : shift) s = unit(rng);

    KernelProbeReport report;
    report.gamma_r = gamma.r;
    report.gamma_delta = gamma.delta;
    const double bound = kernel.weight_bound();

    for (std::size_t k = 0; k < sample_count; ++k) {
        std::array<double, 6> u{};
        for (std::size_t d = 0; d < u.size(); ++d) {
            u[d] = radical_inverse(k + 1, primes[d]) + shift[d];
            if (u[d] >= 1.0) u[d] -= 1.0;
        }
        const double t = u[0] * t_max;
        const double a = u[1];
        const double b = u[2];
        const double xa = u[3];
        double xb = u[4];
        if (gamma.r > 0.0 && (k % 2 == 1)) {
            xb = std::clamp(xa + (2.0 * u[4] - 1.0) * gamma.r, 0.0, 1.0);
        }

        const double w = kernel(t, a, b, xa, xb);
        const double w_swapped = kernel(t, b, a, xb, xa);
        report.max_symmetry_violation = std::max(report.max_symmetry_violation, std::abs(w - w_swapped));
        report.max_weight_seen = std::max(report.max_weight_seen, w);
        if (!(w >= 0.0 && w <= bound)) report.bound_respected = false;

        if (gamma.r > 0.0 && std::abs(xa - xb) <= gamma.r && w < gamma.delta) report.gamma_holds = false;

        // finite-difference ratio in each opinion argument, step in [1e-4, 1e-2]
        const double h = 1e-4 * std::pow(100.0, u[5]);
        const double xb_step = xb + h <= 1.0 ? xb + h : xb - h;
        const double xa_step = xa + h <= 1.0 ? xa + h : xa - h;
        const double ratio_b = std::abs(kernel(t, a, b, xa, xb_step) - w) / h;
        const double ratio_a = std::abs(kernel(t, a, b, xa_step, xb) - w) / h;
        report.lipschitz_estimate = std::max({report.lipschitz_estimate, ratio_a, ratio_b});
        ++report.samples_tested;
    }
    return report;
}

}  // namespace opinion_lab
