#include "opinion_lab/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "opinion_lab/expression.hpp"
#include "opinion_lab/io.hpp"

namespace opinion_lab {

namespace {

using K = CheckKind;
using B = CheckBound;

const std::vector<CheckInfo> kChecks = {
    {"moment_monotone_k1", K::Simulation, B::AtMost, 1e-6, "moments-nonincreasing", "largest increase of m_t(1)"},
    {"moment_monotone_k2", K::Simulation, B::AtMost, 1e-6, "moments-nonincreasing", "largest increase of m_t(2)"},
    {"moment_monotone_k3", K::Simulation, B::AtMost, 1e-6, "moments-nonincreasing", "largest increase of m_t(3)"},
    {"moment_monotone_k4", K::Simulation, B::AtMost, 1e-6, "moments-nonincreasing", "largest increase of m_t(4)"},
    {"moment_monotone_k5", K::Simulation, B::AtMost, 1e-6, "moments-nonincreasing", "largest increase of m_t(5)"},
    {"moment_monotone_k6", K::Simulation, B::AtMost, 1e-6, "moments-nonincreasing", "largest increase of m_t(6)"},
    {"mean_conserved", K::Simulation, B::AtMost, 1e-8, "mean-conserved", "largest |m_t(1) - m_0(1)|"},
    {"lyapunov_dictionary", K::Simulation, B::AtMost, 1e-6, "convex-functional-nonincreasing",
     "largest increase of any dictionary or random convex functional"},
    {"box_invariant", K::Simulation, B::AtMost, 1e-9, "opinions-stay-in-unit-interval",
     "largest excursion outside [0, 1] before clamping"},
    {"time_lipschitz", K::Simulation, B::AtMost, 1e-9, "time-lipschitz",
     "largest max|dx| / (W dt) minus 1"},
    {"dissipation_identity", K::Simulation, B::AtMost, 1e-4, "second-moment-dissipation",
     "largest |dm2/dt + D| over non-switching steps"},
    {"dissipation_telescoped", K::Simulation, B::AtMost, 1e-5, "dissipation-integral-finite",
     "|integral of D - (m2(0) - m2(t_end))|"},
    {"variance_identity", K::Simulation, B::AtMost, 1e-10, "pair-variance-identity",
     "pair-sum / variance identity error at first and last snapshot"},
    {"order_preserved", K::Simulation, B::AtMost, 0.0, "order-preservation", "number of pairs that changed order"},
    {"order_rate_bound", K::Simulation, B::AtMost, 0.05, "order-gap-rate",
     "largest relative shortfall below gap_0 exp(-(L + W) t)"},
    {"cluster_separation", K::Simulation, B::AtMost, 0.0, "cluster-separation",
     "shortfall of the closest cluster pair below r; tolerance is the gap threshold g, pass iff shortfall <= 2 g "
     "(0 selects g = r / 4)"},
    {"w1_converged", K::Simulation, B::AtMost, 1e-3, "distribution-converges",
     "largest W1 to the final snapshot over the last quarter of the horizon"},
    {"steady_state", K::Simulation, B::AtMost, 1e-8, "distribution-converges", "largest |v| at the final snapshot"},
    {"kernel_probe", K::Simulation, B::AtMost, 1e-12, "kernel-declared-traits",
     "symmetry defect of kernels declared symmetric; infinite when a weight leaves [0, W]"},

    {"picard_contraction", K::Picard, B::AtMost, 0.95, "picard-contraction", "largest residual ratio"},
    {"picard_ratio_bound", K::Picard, B::AtMost, 0.05, "picard-contraction",
     "largest residual ratio after the first minus 2 b (W + 4 L)"},
    {"picard_fixed_point", K::Picard, B::AtMost, 5e-9, "picard-fixed-point", "largest sup |P y* - y*|"},
    {"picard_uniqueness", K::Picard, B::AtMost, 2e-9, "picard-uniqueness",
     "largest distance between fixed points reached from x0 and x0 + 0.5"},
    {"picard_agreement", K::Picard, B::AtMost, 1e-6, "picard-existence",
     "sup distance to an RK4 reference over the horizon"},
    {"picard_stability", K::Picard, B::AtMost, 1e-9, "picard-iterate-space",
     "largest of (iterate sup-norm - 2) and (time-Lipschitz constant / 4W - 1)"},

    {"counterexample_rhs", K::Counterexample, B::AtMost, 0.02, "cycling-solves-equation",
     "largest |quadrature rhs - closed-form velocity| at n_interval"},
    {"counterexample_rhs_order", K::Counterexample, B::AtMost, 0.2, "cycling-solves-equation",
     "largest |ratio / 2 - 1| of errors at n_interval and 2 n_interval"},
    {"counterexample_uniform", K::Counterexample, B::AtMost, 10.0, "cycling-distribution-stationary",
     "n_interval times the largest W1 to the uniform measure on [-1/2, 1/2]"},
    {"counterexample_folds", K::Counterexample, B::AtLeast, 4.0, "cycling-agents-never-settle",
     "fewest observed fold crossings over tracked agents; also requires observed = closed form"},
    {"counterexample_cluster_gap", K::Counterexample, B::AtLeast, 0.007, "cycling-clusters-stay-away",
     "smallest distance from the right cluster to 1/2; also requires it to respect the drift bound"},
    {"counterexample_mirror", K::Counterexample, B::AtMost, 0.0, "cycling-clusters-stay-away",
     "largest |left cluster + right cluster|"},
    {"counterexample_order_flips", K::Counterexample, B::AtLeast, 1.0, "order-preservation",
     "number of sampled pairs that changed order"},
};

struct Reader {
    std::string origin;
    std::vector<std::string> errors;

    std::string where(const YAML::Node& n) const {
        const auto m = n.Mark();
        std::ostringstream s;
        s << origin << ":" << m.line + 1 << ":" << m.column + 1 << ": ";
        return s.str();
    }

    void error(const YAML::Node& n, const std::string& message) { errors.push_back(where(n) + message); }

    void reject_unknown(const YAML::Node& map, std::initializer_list<std::string_view> allowed,
                        const std::string& section) {
        if (!map.IsMap()) return;
        for (const auto& kv : map) {
            const auto key = kv.first.as<std::string>();
            if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
                error(kv.first, "unknown key '" + key + "' in " + section);
            }
        }
    }

    template <class T>
    std::optional<T> get(const YAML::Node& map, const char* key, const char* what) {
        const auto node = map[key];
        if (!node) return std::nullopt;
        try {
            return node.as<T>();
        } catch (const YAML::Exception&) {
            error(node, std::string("'") + key + "' must be " + what);
            return std::nullopt;
        }
    }

    double number(const YAML::Node& map, const char* key, double fallback) {
        return get<double>(map, key, "a number").value_or(fallback);
    }

    std::optional<double> required_number(const YAML::Node& map, const char* key, const std::string& section) {
        if (!map[key]) {
            error(map, section + " needs '" + key + "'");
            return std::nullopt;
        }
        return get<double>(map, key, "a number");
    }

    std::optional<PiecewiseConstant> step_profile(const YAML::Node& map, const char* key,
                                                  const std::string& section) {
        const auto node = map[key];
        if (!node) {
            error(map, section + " needs '" + key + "'");
            return std::nullopt;
        }
        try {
            if (node.IsScalar()) return PiecewiseConstant(node.as<double>());
            reject_unknown(node, {"breaks", "values"}, std::string(key));
            return PiecewiseConstant(node["breaks"].as<std::vector<double>>(std::vector<double>{}),
                                     node["values"].as<std::vector<double>>());
        } catch (const YAML::Exception&) {
            error(node, std::string("'") + key + "' must be a number or {breaks: [...], values: [...]}");
        } catch (const std::invalid_argument& e) {
            error(node, std::string("'") + key + "': " + e.what());
        }
        return std::nullopt;
    }
};

std::string canonical_family(std::string family) {
    if (family == "hk") return "hegselmann_krause";
    if (family == "gaussian") return "gaussian_decay";
    if (family == "ring") return "ring_sensing";
    if (family == "typed") return "typed_confidence";
    return family;
}

WeightSchedule parse_schedule(Reader& r, const YAML::Node& node) {
    if (node["preset"]) {
        const auto preset = node["preset"].as<std::string>();
        if (preset != "alternating_three_block") {
            r.error(node["preset"], "unknown schedule preset '" + preset + "'; known: alternating_three_block");
        }
        return alternating_three_block_schedule();
    }
    WeightSchedule s;
    s.blocks = r.get<std::size_t>(node, "blocks", "a positive integer").value_or(0);
    s.period = r.number(node, "period", 0.0);
    const auto segments = node["segments"];
    if (!segments || !segments.IsSequence()) {
        r.error(node, "finite_consensus needs 'preset' or a 'segments' list");
        return s;
    }
    for (const auto& seg : segments) {
        WeightSchedule::Segment out;
        out.start = r.number(seg, "start", 0.0);
        try {
            for (const auto& row : seg["matrix"].as<std::vector<std::vector<double>>>()) {
                if (row.size() != s.blocks) r.error(seg["matrix"], "matrix rows must have 'blocks' entries");
                out.matrix.insert(out.matrix.end(), row.begin(), row.end());
            }
        } catch (const YAML::Exception&) {
            r.error(seg, "segment 'matrix' must be a list of rows of numbers");
        }
        s.segments.push_back(std::move(out));
    }
    return s;
}

void parse_kernel(Reader& r, const YAML::Node& node, ScenarioConfig& cfg) {
    if (!node || !node.IsMap()) {
        r.errors.push_back(r.origin + ": missing 'kernel' section");
        return;
    }
    const auto family_opt = r.get<std::string>(node, "family", "a string");
    if (!family_opt) {
        r.error(node, "kernel needs 'family'");
        return;
    }
    const std::string family = canonical_family(*family_opt);
    cfg.kernel_family = family;
    const std::string section = "kernel '" + family + "'";
    try {
        if (family == "hegselmann_krause") {
            r.reject_unknown(node, {"family", "radius"}, section);
            if (const auto radius = r.required_number(node, "radius", section)) {
                cfg.kernel = Kernel::hegselmann_krause(*radius);
                cfg.confidence_radius = *radius;
            }
        } else if (family == "bounded_confidence" || family == "bounded_influence") {
            r.reject_unknown(node, {"family", "radius"}, section);
            if (auto radius = r.step_profile(node, "radius", section)) {
                cfg.confidence_radius = radius->min();
                cfg.kernel = family == "bounded_confidence" ? Kernel::bounded_confidence(*radius)
                                                            : Kernel::bounded_influence(*radius);
            }
        } else if (family == "gaussian_decay") {
            r.reject_unknown(node, {"family", "sigma"}, section);
            if (auto sigma = r.step_profile(node, "sigma", section)) cfg.kernel = Kernel::gaussian_decay(*sigma);
        } else if (family == "ring_sensing") {
            r.reject_unknown(node, {"family", "r_min", "r_max"}, section);
            const auto lo = r.required_number(node, "r_min", section);
            const auto hi = r.required_number(node, "r_max", section);
            if (lo && hi) cfg.kernel = Kernel::ring_sensing(*lo, *hi);
        } else if (family == "typed_confidence") {
            r.reject_unknown(node, {"family", "radius", "similarity"}, section);
            const auto radius = r.required_number(node, "radius", section);
            const auto sim = r.required_number(node, "similarity", section);
            if (radius && sim) cfg.kernel = Kernel::typed_confidence(*radius, *sim);
        } else if (family == "finite_consensus") {
            r.reject_unknown(node, {"family", "preset", "blocks", "period", "segments"}, section);
            cfg.kernel = finite_consensus_embed(parse_schedule(r, node));
        } else if (family == "cycle_weights") {
            r.reject_unknown(node, {"family", "v_exponent", "c0"}, section);
            cycling::Params p;
            p.v_exponent = r.number(node, "v_exponent", p.v_exponent);
            p.c0 = r.number(node, "c0", p.c0);
            cfg.kernel = Kernel::cycle_weights(p);
        } else if (family == "constant") {
            r.reject_unknown(node, {"family", "value"}, section);
            if (const auto v = r.required_number(node, "value", section)) cfg.kernel = Kernel::constant(*v);
        } else if (family == "zero") {
            r.reject_unknown(node, {"family"}, section);
            cfg.kernel = Kernel::zero();
        } else if (family == "expression") {
            r.reject_unknown(node, {"family", "rule", "weight_bound", "lipschitz", "symmetric", "position_only"},
                             section);
            const auto rule = r.get<std::string>(node, "rule", "a string");
            const auto bound = r.required_number(node, "weight_bound", section);
            if (!rule) r.error(node, section + " needs 'rule'");
            if (rule && bound) {
                KernelTraits traits;
                traits.weight_bound = *bound;
                traits.lipschitz = r.get<double>(node, "lipschitz", "a number");
                traits.symmetric = r.get<bool>(node, "symmetric", "true or false").value_or(false);
                traits.position_only = r.get<bool>(node, "position_only", "true or false").value_or(false);
                try {
                    auto expr = std::make_shared<Expression>(*rule,
                                                             std::vector<std::string>{"t", "a", "b", "xa", "xb"});
                    cfg.kernel = Kernel::custom(
                        [expr](double t, double a, double b, double xa, double xb) {
                            const double args[5] = {t, a, b, xa, xb};
                            return expr->evaluate(args);
                        },
                        traits, "expression");
                } catch (const ExpressionError& e) {
                    r.error(node["rule"], std::string("rule: ") + e.what());
                }
            }
        } else {
            r.error(node["family"], "unknown kernel family '" + family +
                                        "'; known: hegselmann_krause (hk), bounded_confidence, bounded_influence, "
                                        "gaussian_decay (gaussian), ring_sensing (ring), typed_confidence (typed), "
                                        "finite_consensus, cycle_weights, constant, zero, expression");
        }
    } catch (const std::invalid_argument& e) {
        r.error(node, section + ": " + e.what());
    } catch (const YAML::Exception& e) {
        r.error(node, section + ": " + e.what());
    }
}

void parse_profile(Reader& r, const YAML::Node& node, ScenarioConfig& cfg) {
    if (!node) return;  // defaults to the identity profile
    if (node.IsScalar()) {
        const auto kind = node.as<std::string>();
        if (kind == "uniform") return;
        r.error(node, "initial_profile '" + kind + "' needs parameters; use a mapping with 'kind'");
        return;
    }
    const auto kind = r.get<std::string>(node, "kind", "a string").value_or("");
    const std::string section = "initial_profile '" + kind + "'";
    try {
        if (kind == "uniform") {
            r.reject_unknown(node, {"kind"}, section);
        } else if (kind == "constant") {
            r.reject_unknown(node, {"kind", "value"}, section);
            if (const auto v = r.required_number(node, "value", section)) cfg.profile = OpinionProfile::constant(*v);
        } else if (kind == "piecewise") {
            r.reject_unknown(node, {"kind", "breaks", "values"}, section);
            cfg.profile = OpinionProfile::piecewise(
                PiecewiseConstant(node["breaks"].as<std::vector<double>>(std::vector<double>{}),
                                  node["values"].as<std::vector<double>>()));
        } else if (kind == "random_piecewise") {
            r.reject_unknown(node, {"kind", "pieces"}, section);
            const auto pieces = r.get<std::size_t>(node, "pieces", "a positive integer").value_or(5);
            if (pieces == 0) {
                r.error(node, "random_piecewise needs at least one piece");
                return;
            }
            std::mt19937_64 rng(cfg.rng_seed);
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            std::vector<double> breaks(pieces - 1), values(pieces);
            for (double& b : breaks) b = unit(rng);
            std::sort(breaks.begin(), breaks.end());
            for (double& v : values) v = unit(rng);
            cfg.profile = OpinionProfile::piecewise(PiecewiseConstant(breaks, values));
            cfg.profile.description = "random_piecewise(seed " + std::to_string(cfg.rng_seed) + ")";
        } else if (kind == "expression") {
            r.reject_unknown(node, {"kind", "expression"}, section);
            const auto src = r.get<std::string>(node, "expression", "a string");
            if (!src) {
                r.error(node, "initial_profile expression needs 'expression'");
                return;
            }
            try {
                cfg.profile = OpinionProfile::expression(*src);
            } catch (const ExpressionError& e) {
                r.error(node["expression"], std::string("expression: ") + e.what());
            }
        } else {
            r.error(node, "unknown initial_profile kind '" + kind +
                              "'; known: uniform, constant, piecewise, random_piecewise, expression");
        }
    } catch (const std::invalid_argument& e) {
        r.error(node, section + ": " + e.what());
    } catch (const YAML::Exception&) {
        r.error(node, section + ": 'breaks' and 'values' must be lists of numbers");
    }
}

void parse_integrator(Reader& r, const YAML::Node& node, ScenarioConfig& cfg) {
    auto& ic = cfg.integrator;
    ic.t_end = 0.0;
    if (!node) {
        r.errors.push_back(r.origin + ": missing 'integrator' section (t_end is required)");
        return;
    }
    r.reject_unknown(node, {"method", "dt", "t_end", "clamp_to_box", "record_every", "stop_velocity"}, "integrator");
    const auto method = r.get<std::string>(node, "method", "a string").value_or("rk4");
    if (method == "rk4") {
        ic.method = Method::Rk4;
    } else if (method == "euler" || method == "explicit_euler") {
        ic.method = Method::ExplicitEuler;
    } else {
        r.error(node["method"], "unknown integrator method '" + method + "'; known: rk4, explicit_euler");
    }
    ic.dt = r.number(node, "dt", ic.dt);
    if (const auto t = r.required_number(node, "t_end", "integrator")) ic.t_end = *t;
    ic.clamp_to_box = r.get<bool>(node, "clamp_to_box", "true or false").value_or(true);
    ic.record_every = r.get<std::size_t>(node, "record_every", "a positive integer").value_or(1);
    ic.stop_velocity = r.get<double>(node, "stop_velocity", "a number");
    if (ic.stop_velocity && !(*ic.stop_velocity > 0.0)) r.error(node["stop_velocity"], "stop_velocity must be > 0");
}

void parse_picard(Reader& r, const YAML::Node& node, ScenarioConfig& cfg) {
    if (!node) return;
    r.reject_unknown(node, {"t_end", "tol", "max_iters", "intervals", "window_fraction", "reference_dt"}, "picard");
    PicardSection p;
    p.t_end = r.number(node, "t_end", p.t_end);
    p.reference_dt = r.number(node, "reference_dt", p.reference_dt);
    p.options.tol = r.number(node, "tol", p.options.tol);
    p.options.max_iters = r.get<std::size_t>(node, "max_iters", "a positive integer").value_or(p.options.max_iters);
    p.options.intervals = r.get<std::size_t>(node, "intervals", "a positive integer").value_or(p.options.intervals);
    p.options.window_fraction = r.number(node, "window_fraction", p.options.window_fraction);
    if (!(p.t_end > 0.0)) r.error(node, "picard t_end must be positive");
    if (!(p.options.tol > 0.0)) r.error(node, "picard tol must be positive");
    if (p.options.intervals == 0) r.error(node, "picard intervals must be positive");
    if (!(p.options.window_fraction > 0.0 && p.options.window_fraction < 1.0)) {
        r.error(node, "picard window_fraction must lie in (0, 1)");
    }
    cfg.picard = p;
}

void parse_counterexample(Reader& r, const YAML::Node& node, ScenarioConfig& cfg) {
    if (!node) return;
    r.reject_unknown(node,
                     {"v_exponent", "c0", "t_end", "n_interval", "n_cluster", "sample_dt", "trajectory_dt",
                      "tracked_agents", "exclusion_radius", "rhs_times"},
                     "counterexample");
    CounterexampleSection c;
    c.params.v_exponent = r.number(node, "v_exponent", c.params.v_exponent);
    c.params.c0 = r.number(node, "c0", c.params.c0);
    auto& o = c.options;
    o.t_end = r.number(node, "t_end", o.t_end);
    o.n_interval = r.get<std::size_t>(node, "n_interval", "a positive integer").value_or(o.n_interval);
    o.n_cluster = r.get<std::size_t>(node, "n_cluster", "a positive integer").value_or(o.n_cluster);
    o.sample_dt = r.number(node, "sample_dt", o.sample_dt);
    o.trajectory_dt = r.number(node, "trajectory_dt", o.trajectory_dt);
    o.tracked_agents = r.get<std::size_t>(node, "tracked_agents", "a positive integer").value_or(o.tracked_agents);
    o.exclusion_radius = r.number(node, "exclusion_radius", o.exclusion_radius);
    o.rhs_times = r.get<std::vector<double>>(node, "rhs_times", "a list of numbers").value_or(o.rhs_times);
    try {
        c.params.validate();
    } catch (const std::invalid_argument& e) {
        r.error(node, std::string("counterexample: ") + e.what());
    }
    if (o.n_interval < 2) r.error(node, "counterexample n_interval must be at least 2");
    if (!(o.exclusion_radius > 0.0)) r.error(node, "counterexample exclusion_radius must be positive");
    cfg.counterexample = c;
}

void add_check(std::vector<CheckSpec>& checks, const CheckSpec& spec) {
    for (auto& c : checks) {
        if (c.name == spec.name) {
            c.tolerance = spec.tolerance;
            return;
        }
    }
    checks.push_back(spec);
}

void parse_checks(Reader& r, const YAML::Node& node, ScenarioConfig& cfg) {
    if (!node) return;
    if (!node.IsMap()) {
        r.error(node, "'diagnostics' must map check names to tolerances (null for the default)");
        return;
    }
    for (const auto& kv : node) {
        const auto name = kv.first.as<std::string>();
        const auto* info = find_check(name);
        if (info == nullptr) {
            r.error(kv.first, "unknown check '" + name + "'; known checks: " + known_check_names());
            continue;
        }
        double tol = info->default_tolerance;
        if (kv.second && !kv.second.IsNull()) {
            try {
                tol = kv.second.as<double>();
            } catch (const YAML::Exception&) {
                r.error(kv.second, "tolerance of '" + name + "' must be a number");
                continue;
            }
        }
        if (!(tol >= 0.0)) {
            r.error(kv.second, "tolerance of '" + name + "' must be >= 0");
            continue;
        }
        add_check(cfg.checks, {name, tol});
    }
}

void validate_semantics(Reader& r, const YAML::Node& root, ScenarioConfig& cfg) {
    for (const auto& c : cfg.checks) {
        if (c.name == "cluster_separation" && !cfg.confidence_radius) {
            r.error(root, "check 'cluster_separation' needs a kernel with a confidence radius "
                          "(hegselmann_krause, bounded_confidence, bounded_influence)");
        }
        if (c.name == "order_rate_bound" &&
            !(cfg.kernel.symmetric() && cfg.kernel.position_only() && cfg.kernel.lipschitz())) {
            r.error(root, "check 'order_rate_bound' needs a symmetric, position-only kernel with a Lipschitz constant");
        }
    }
    if (cfg.picard) {
        if (!cfg.kernel.lipschitz()) {
            r.error(root["picard"], "picard section needs a kernel with a Lipschitz constant; '" + cfg.kernel_family +
                                        "' declares none");
        }
    }
    if (cfg.n >= 2) {
        try {
            (void)uniform_ensemble(cfg.n, cfg.profile);
        } catch (const std::invalid_argument& e) {
            r.error(root["initial_profile"] ? root["initial_profile"] : root, e.what());
        }
    }
    if (cfg.integrator.t_end > 0.0) {
        try {
            cfg.integrator.validate(cfg.kernel);
        } catch (const IntegrationError& e) {
            r.error(root["integrator"], e.what());
        }
    }
}

}  // namespace

const std::vector<CheckInfo>& known_checks() { return kChecks; }

const CheckInfo* find_check(std::string_view name) {
    for (const auto& c : kChecks) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

std::string known_check_names() {
    std::string out;
    for (const auto& c : kChecks) {
        if (!out.empty()) out += ", ";
        out += c.name;
    }
    return out;
}

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::runtime_error([&] {
          std::string msg = "invalid configuration:";
          for (const auto& e : errors) msg += "\n  " + e;
          return msg;
      }()),
      errors_(std::move(errors)) {}

CheckSpec parse_check_override(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError({"--check expects name=tolerance, got '" + text + "'"});
    }
    CheckSpec spec;
    spec.name = text.substr(0, eq);
    if (find_check(spec.name) == nullptr) {
        throw ConfigError({"unknown check '" + spec.name + "'; known checks: " + known_check_names()});
    }
    try {
        std::size_t used = 0;
        const std::string value = text.substr(eq + 1);
        spec.tolerance = std::stod(value, &used);
        if (used != value.size() || !(spec.tolerance >= 0.0)) throw std::invalid_argument("bad");
    } catch (const std::exception&) {
        throw ConfigError({"--check " + spec.name + ": tolerance must be a number >= 0"});
    }
    return spec;
}

ScenarioConfig parse_config(const std::string& text, const std::string& origin, const ConfigOverrides& overrides,
                            bool check_output_dir) {
    Reader r{origin, {}};
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        std::ostringstream msg;
        msg << origin << ":" << e.mark.line + 1 << ":" << e.mark.column + 1 << ": parse error: " << e.msg;
        throw ConfigError({msg.str()});
    }
    if (!root.IsMap()) throw ConfigError({origin + ": a scenario must be a mapping"});

    ScenarioConfig cfg;
    cfg.source_text = text;
    cfg.source_path = origin;
    r.reject_unknown(root,
                     {"name", "n", "rng_seed", "output_dir", "kernel", "initial_profile", "integrator", "diagnostics",
                      "picard", "counterexample"},
                     "scenario");

    cfg.name = r.get<std::string>(root, "name", "a string").value_or("");
    if (cfg.name.empty()) r.error(root, "scenario needs a non-empty 'name'");
    cfg.rng_seed = overrides.rng_seed.value_or(r.get<std::uint64_t>(root, "rng_seed", "an integer").value_or(1));

    const bool analytic_only = root["counterexample"] && !root["kernel"];
    if (!analytic_only) {
        const auto n = r.get<long long>(root, "n", "an integer");
        if (!n) {
            if (!root["n"]) r.error(root, "scenario needs 'n'");
        } else if (*n < 2) {
            r.error(root["n"], "n must be at least 2, got " + std::to_string(*n));
        } else {
            cfg.n = static_cast<std::size_t>(*n);
        }
        parse_kernel(r, root["kernel"], cfg);
        parse_profile(r, root["initial_profile"], cfg);
        parse_integrator(r, root["integrator"], cfg);
    }
    parse_picard(r, root["picard"], cfg);
    parse_counterexample(r, root["counterexample"], cfg);
    parse_checks(r, root["diagnostics"], cfg);
    for (const auto& c : overrides.checks) add_check(cfg.checks, c);
    if (!analytic_only) validate_semantics(r, root, cfg);

    if (overrides.output_dir) {
        cfg.output_dir = *overrides.output_dir;
    } else if (const auto dir = r.get<std::string>(root, "output_dir", "a path")) {
        cfg.output_dir = *dir;
    } else {
        cfg.output_dir = std::filesystem::path("runs") / (cfg.name.empty() ? "scenario" : cfg.name);
    }
    if (check_output_dir && r.errors.empty()) {
        try {
            require_writable_dir(cfg.output_dir);
        } catch (const std::runtime_error& e) {
            r.errors.push_back(origin + ": output_dir: " + e.what());
        }
    }

    if (!r.errors.empty()) throw ConfigError(std::move(r.errors));
    return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path, const ConfigOverrides& overrides,
                           bool check_output_dir) {
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const std::runtime_error& e) {
        throw ConfigError({e.what()});
    }
    return parse_config(text, path.string(), overrides, check_output_dir);
}

}  // namespace opinion_lab
