#include "opinion_lab/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include "opinion_lab/counterexample.hpp"
#include "opinion_lab/diagnostics.hpp"
#include "opinion_lab/io.hpp"
#include "opinion_lab/picard.hpp"

#ifndef OPINION_LAB_VERSION
#define OPINION_LAB_VERSION "unknown"
#endif

namespace opinion_lab {

using nlohmann::json;

const char* library_version() { return OPINION_LAB_VERSION; }

bool RunReport::pass() const {
    return error.empty() && std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

int RunReport::exit_code() const {
    if (!error.empty()) return kExitRuntimeError;
    return pass() ? kExitPass : kExitCheckFailed;
}

namespace {

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

json RunReport::to_json() const {
    json j;
    j["scenario"] = scenario;
    j["command"] = command;
    j["wall_time_seconds"] = wall_time;
    j["pass"] = pass();
    j["exit_code"] = exit_code();
    if (!error.empty()) j["error"] = error;
    j["checks"] = json::array();
    for (const auto& c : checks) {
        j["checks"].push_back({{"name", c.name},
                               {"pass", c.pass},
                               {"worst_violation", number_or_null(c.worst_violation)},
                               {"tolerance", c.tolerance},
                               {"bound", c.bound},
                               {"reference", c.reference},
                               {"detail", c.detail}});
    }
    j["skipped_checks"] = skipped;
    j["artifacts"] = artifacts;
    j["details"] = details;
    return j;
}

namespace {

using Clock = std::chrono::steady_clock;

struct CheckPlan {
    std::vector<CheckSpec> active;
    std::vector<std::string> skipped;
};

CheckPlan plan_checks(const ScenarioConfig& cfg, CheckKind kind, const std::vector<std::string>& defaults) {
    CheckPlan plan;
    for (const auto& c : cfg.checks) {
        if (find_check(c.name)->kind == kind) {
            plan.active.push_back(c);
        } else {
            plan.skipped.push_back(c.name);
        }
    }
    if (plan.active.empty()) {
        for (const auto& name : defaults) plan.active.push_back({name, find_check(name)->default_tolerance});
    }
    return plan;
}

std::vector<std::string> all_of_kind(CheckKind kind) {
    std::vector<std::string> out;
    for (const auto& c : known_checks()) {
        if (c.kind == kind) out.emplace_back(c.name);
    }
    return out;
}

CheckResult judge(const CheckSpec& spec, double measured, std::string detail = {}, bool also = true) {
    const auto* info = find_check(spec.name);
    CheckResult r;
    r.name = spec.name;
    r.tolerance = spec.tolerance;
    r.worst_violation = measured;
    r.reference = std::string(info->reference);
    r.detail = std::move(detail);
    if (info->bound == CheckBound::AtMost) {
        r.bound = "at_most";
        r.pass = measured <= spec.tolerance;
    } else {
        r.bound = "at_least";
        r.pass = measured >= spec.tolerance;
    }
    r.pass = r.pass && also && !std::isnan(measured);
    return r;
}

std::string fmt(double v) {
    std::ostringstream s;
    s << std::setprecision(6) << v;
    return s.str();
}

json meta_json(const ScenarioConfig& cfg, const RunOptions& options, const std::string& command) {
    return {{"scenario", cfg.name},
            {"command", command},
            {"version", library_version()},
            {"rng_seed", cfg.rng_seed},
            {"threads", options.threads},
            {"config_path", cfg.source_path},
            {"config", cfg.source_text}};
}

template <class Body>
RunReport execute(const ScenarioConfig& cfg, const RunOptions& options, const std::string& command, Body&& body) {
    RunReport report;
    report.scenario = cfg.name;
    report.command = command;
    const auto start = Clock::now();
    std::unique_ptr<ArtifactWriter> writer;
    const auto write_meta = [&] {
        report.wall_time = std::chrono::duration<double>(Clock::now() - start).count();
        auto meta = meta_json(cfg, options, command);
        meta["wall_time_seconds"] = report.wall_time;
        writer->write("run_meta.json", meta.dump(2) + "\n");
    };
    try {
        writer = std::make_unique<ArtifactWriter>(cfg.output_dir);
        body(report, *writer);
        report.artifacts = writer->artifacts();
        report.artifacts.push_back((writer->dir() / "report.json").string());
        report.artifacts.push_back((writer->dir() / "run_meta.json").string());
        write_meta();
        writer->write("report.json", report.to_json().dump(2) + "\n");
        writer->commit();
    } catch (const std::exception& e) {
        report.error = e.what();
        if (writer) {
            try {
                report.artifacts.clear();
                for (const auto& a : writer->artifacts()) report.artifacts.push_back(a + ".partial");
                write_meta();
                writer->write("report.json", report.to_json().dump(2) + "\n");
            } catch (const std::exception&) {
                // the error already recorded is the one worth reporting
            }
        }
    }
    return report;
}

// --- simulate -------------------------------------------------------------------

struct SimulationContext {
    const ScenarioConfig& cfg;
    const Trajectory& traj;
    WorkerPool* pool;
    std::vector<SummaryRow> rows;
    std::optional<MomentSeries> moments;
    std::optional<DissipationAudit> dissipation;
    std::optional<OrderAuditReport> order;

    const MomentSeries& moment_data() {
        if (!moments) moments = moment_series(traj, 6);
        return *moments;
    }
    const DissipationAudit& dissipation_data() {
        if (!dissipation) dissipation = dissipation_audit(traj, cfg.kernel, pool);
        return *dissipation;
    }
    const OrderAuditReport& order_data() {
        if (!order) {
            auto o = order_audit_options_for(cfg.kernel);
            o.rng_seed = cfg.rng_seed;
            order = order_audit(traj, o);
        }
        return *order;
    }
};

CheckResult evaluate_simulation_check(const CheckSpec& spec, SimulationContext& ctx) {
    const auto& name = spec.name;
    const auto& traj = ctx.traj;
    if (name.rfind("moment_monotone_k", 0) == 0) {
        const int k = name.back() - '0';
        const auto r = monotonicity_report(ctx.moment_data().values.at(k), spec.tolerance);
        return judge(spec, r.worst_uptick,
                     "worst increase at snapshot " + std::to_string(r.worst_index));
    }
    if (name == "mean_conserved") return judge(spec, max_drift(ctx.moment_data().values.at(1)));
    if (name == "lyapunov_dictionary") {
        auto functions = convex_dictionary();
        for (std::uint64_t k = 0; k < 4; ++k) functions.push_back(random_piecewise_linear_convex(ctx.cfg.rng_seed + k));
        double worst = 0.0;
        std::string worst_name;
        for (const auto& f : functions) {
            std::vector<double> series;
            for (const auto& snap : traj.snapshots) series.push_back(lyapunov(snap, f.f));
            const auto r = monotonicity_report(series, spec.tolerance);
            if (r.worst_uptick >= worst) {
                worst = r.worst_uptick;
                worst_name = f.name;
            }
        }
        return judge(spec, worst, "worst functional " + worst_name);
    }
    if (name == "box_invariant") {
        double worst = 0.0;
        for (const auto& s : traj.steps) worst = std::max(worst, s.excursion);
        return judge(spec, worst);
    }
    if (name == "time_lipschitz") {
        double worst = 0.0;
        for (const auto& s : traj.steps) worst = std::max(worst, s.lipschitz_ratio);
        return judge(spec, std::max(0.0, worst - 1.0), "largest max|dx| / (W dt) = " + fmt(worst));
    }
    if (name == "dissipation_identity") {
        const auto& d = ctx.dissipation_data();
        const auto switching = std::count_if(d.steps.begin(), d.steps.end(), [](const auto& s) { return s.switching; });
        return judge(spec, d.worst_residual, std::to_string(switching) + " switching steps excluded");
    }
    if (name == "dissipation_telescoped") {
        const auto& d = ctx.dissipation_data();
        return judge(spec, std::abs(d.cumulative - d.m2_drop),
                     "integral of D = " + fmt(d.cumulative) + ", m2 drop = " + fmt(d.m2_drop));
    }
    if (name == "variance_identity") {
        double worst = 0.0;
        for (const auto* snap : {&traj.initial(), &traj.final()}) {
            worst = std::max(worst, variance_identity_check(snap->opinion(), snap->mass()).abs_error);
        }
        return judge(spec, worst);
    }
    if (name == "order_preserved") {
        const auto& o = ctx.order_data();
        return judge(spec, static_cast<double>(o.violations.size()),
                     std::to_string(o.pairs_checked) + (o.full_audit ? " pairs (full audit)" : " sampled pairs"));
    }
    if (name == "order_rate_bound") {
        const auto& o = ctx.order_data();
        return judge(spec, o.worst_rate_shortfall, "rate bound " + fmt(o.rate_bound) +
                                                       ", slowest observed log-gap rate " + fmt(o.min_gap_ratio_log));
    }
    if (name == "cluster_separation") {
        const double r = *ctx.cfg.confidence_radius;
        const double gap = spec.tolerance > 0.0 ? spec.tolerance : r / 4.0;
        const auto clusters = detect_clusters(traj.final(), gap);
        const double sep = clusters.min_separation();
        const double shortfall = std::isfinite(sep) ? std::max(0.0, r - sep) : 0.0;
        auto res = judge(spec, shortfall,
                         std::to_string(clusters.centers.size()) + " clusters, closest pair " + fmt(sep) +
                             " apart, gap threshold " + fmt(gap));
        res.tolerance = gap;
        res.pass = shortfall <= 2.0 * gap;
        return res;
    }
    if (name == "w1_converged") {
        const double from = traj.initial().time() + 0.75 * (traj.final().time() - traj.initial().time());
        return judge(spec, tail_wasserstein(traj, from), "over t >= " + fmt(from));
    }
    if (name == "steady_state") return judge(spec, ctx.rows.back().max_velocity);
    if (name == "kernel_probe") {
        const auto p = probe_kernel(ctx.cfg.kernel, 4096, ctx.cfg.rng_seed, {}, traj.final().time());
        double worst = ctx.cfg.kernel.symmetric() ? p.max_symmetry_violation : 0.0;
        if (!p.bound_respected) worst = std::numeric_limits<double>::infinity();
        return judge(spec, worst, "largest weight seen " + fmt(p.max_weight_seen) + ", finite-difference L >= " +
                                      fmt(p.lipschitz_estimate));
    }
    throw std::logic_error("no evaluator for check " + name);
}

}  // namespace

RunReport run_scenario(const ScenarioConfig& cfg, const RunOptions& options) {
    return execute(cfg, options, "simulate", [&](RunReport& report, ArtifactWriter& out) {
        const auto plan = plan_checks(cfg, CheckKind::Simulation, {"box_invariant", "time_lipschitz"});
        report.skipped = plan.skipped;

        std::unique_ptr<WorkerPool> pool;
        if (options.threads > 1) pool = std::make_unique<WorkerPool>(options.threads);
        IntegratorConfig ic = cfg.integrator;
        ic.threads = options.threads;
        const auto initial = uniform_ensemble(cfg.n, cfg.profile);
        const auto traj = integrate(initial, cfg.kernel, ic);
        out.write("trajectory.csv", trajectory_csv(traj));

        SimulationContext ctx{cfg, traj, pool.get(), {}, {}, {}, {}};
        const auto& series = ctx.moment_data();
        const auto w1 = wasserstein_to_final(traj);
        for (std::size_t s = 0; s < traj.snapshots.size(); ++s) {
            const auto& snap = traj.snapshots[s];
            SummaryRow row;
            row.t = snap.time();
            for (int k = 1; k <= 6; ++k) row.moments[k - 1] = series.values.at(k)[s];
            row.dissipation = dissipation(snap, cfg.kernel, pool.get());
            row.w1_to_final = w1[s];
            for (double v : rhs(snap, cfg.kernel, pool.get())) row.max_velocity = std::max(row.max_velocity, std::abs(v));
            ctx.rows.push_back(row);
        }
        out.write("summary.csv", summary_csv(ctx.rows));

        for (const auto& spec : plan.active) report.checks.push_back(evaluate_simulation_check(spec, ctx));

        double min_w1_tail = std::numeric_limits<double>::infinity();
        for (double v : w1) min_w1_tail = std::min(min_w1_tail, v);
        report.details = {{"kernel", cfg.kernel.name()},
                          {"weight_bound", cfg.kernel.weight_bound()},
                          {"n", cfg.n},
                          {"initial_profile", cfg.profile.description},
                          {"snapshots", traj.snapshots.size()},
                          {"steps", traj.steps.size()},
                          {"final_time", traj.final().time()},
                          {"reached_steady_state", traj.reached_steady}};
    });
}

// --- picard-check ---------------------------------------------------------------

RunReport run_picard_check(const ScenarioConfig& cfg, const RunOptions& options) {
    return execute(cfg, options, "picard-check", [&](RunReport& report, ArtifactWriter& out) {
        if (!cfg.picard) throw std::invalid_argument("scenario '" + cfg.name + "' has no 'picard' section");
        const auto plan = plan_checks(cfg, CheckKind::Picard, all_of_kind(CheckKind::Picard));
        report.skipped = plan.skipped;

        std::unique_ptr<WorkerPool> pool;
        if (options.threads > 1) pool = std::make_unique<WorkerPool>(options.threads);
        const auto x0 = uniform_ensemble(cfg.n, cfg.profile);
        const auto& section = *cfg.picard;
        const auto sol = picard_solve(cfg.kernel, x0, section.t_end, section.options, pool.get());
        out.write("trajectory.csv", trajectory_csv(sol.trajectory));
        const auto cv = cross_validate(cfg.kernel, x0, sol, section.reference_dt, options.threads);

        const double W = cfg.kernel.weight_bound();
        double max_ratio = 0.0, bound_excess = -std::numeric_limits<double>::infinity(), fixed = 0.0, gap = 0.0;
        double stability = -std::numeric_limits<double>::infinity();
        json windows = json::array();
        for (const auto& w : sol.windows) {
            max_ratio = std::max(max_ratio, w.max_ratio());
            for (std::size_t k = 1; k < w.ratios.size(); ++k) bound_excess = std::max(bound_excess, w.ratios[k] - w.ratio_bound);
            fixed = std::max(fixed, w.fixed_point_residual);
            gap = std::max(gap, w.uniqueness_gap);
            for (double s : w.iterate_sup_norms) stability = std::max(stability, s - 2.0);
            if (W > 0.0) {
                for (double l : w.iterate_lipschitz) stability = std::max(stability, l / (4.0 * W) - 1.0);
            }
            windows.push_back({{"t_start", w.t_start},
                               {"b", w.b},
                               {"iterations", w.iterations()},
                               {"converged", w.converged},
                               {"residuals", w.residuals},
                               {"ratios", w.ratios},
                               {"ratio_bound", w.ratio_bound},
                               {"fixed_point_residual", w.fixed_point_residual},
                               {"uniqueness_gap", w.uniqueness_gap}});
        }
        if (!std::isfinite(bound_excess)) bound_excess = 0.0;

        for (const auto& spec : plan.active) {
            const auto& name = spec.name;
            if (name == "picard_contraction") {
                report.checks.push_back(judge(spec, max_ratio, std::to_string(sol.windows.size()) + " windows"));
            } else if (name == "picard_ratio_bound") {
                report.checks.push_back(judge(spec, bound_excess));
            } else if (name == "picard_fixed_point") {
                report.checks.push_back(judge(spec, fixed));
            } else if (name == "picard_uniqueness") {
                report.checks.push_back(judge(spec, gap));
            } else if (name == "picard_agreement") {
                report.checks.push_back(judge(spec, cv.sup_distance, "worst at t = " + fmt(cv.worst_time) +
                                                                         ", reference dt " + fmt(cv.reference_dt)));
            } else if (name == "picard_stability") {
                report.checks.push_back(judge(spec, stability));
            }
        }
        report.details = {{"kernel", cfg.kernel.name()},
                          {"weight_bound", W},
                          {"lipschitz", *cfg.kernel.lipschitz()},
                          {"b_max", number_or_null(sol.b_max)},
                          {"window_fraction", section.options.window_fraction},
                          {"windows", windows},
                          {"box_excursion", sol.box_excursion},
                          {"max_time_lipschitz", sol.max_time_lipschitz},
                          {"cross_validation", {{"sup_distance", cv.sup_distance},
                                                {"worst_time", cv.worst_time},
                                                {"reference_dt", cv.reference_dt}}}};
    });
}

// --- counterexample -------------------------------------------------------------

RunReport run_counterexample(const ScenarioConfig& cfg, const RunOptions& options) {
    return execute(cfg, options, "counterexample", [&](RunReport& report, ArtifactWriter& out) {
        const CounterexampleSection section = cfg.counterexample.value_or(CounterexampleSection{});
        const auto plan = plan_checks(cfg, CheckKind::Counterexample, all_of_kind(CheckKind::Counterexample));
        report.skipped = plan.skipped;

        std::unique_ptr<WorkerPool> pool;
        if (options.threads > 1) pool = std::make_unique<WorkerPool>(options.threads);
        const auto rep = run_counterexample_report(section.params, section.options, pool.get());
        out.write("trajectory.csv", trajectory_csv(rep.trajectory));

        double rhs_error = 0.0, order_defect = 0.0;
        json rhs = json::array();
        for (const auto& c : rep.rhs) {
            rhs_error = std::max(rhs_error, c.coarse.max_abs_error);
            order_defect = std::max(order_defect, std::abs(c.ratio / 2.0 - 1.0));
            const auto check_json = [](const RhsCheck& r) {
                return json{{"n_interval", r.n_interval},    {"max_abs_error", r.max_abs_error},
                            {"interior_error", r.interior_error}, {"edge_error", r.edge_error},
                            {"cluster_error", r.cluster_error}, {"evaluated", r.evaluated},
                            {"excluded", r.excluded}};
            };
            rhs.push_back({{"t", c.coarse.t}, {"coarse", check_json(c.coarse)}, {"fine", check_json(c.fine)},
                           {"ratio", c.ratio}});
        }
        double min_folds = std::numeric_limits<double>::infinity();
        bool folds_match = true;
        json tracked = json::array();
        for (const auto& a : rep.tracked) {
            min_folds = std::min(min_folds, static_cast<double>(a.observed_reversals));
            folds_match = folds_match && a.observed_reversals == a.expected_folds;
            tracked.push_back({{"index", a.index},
                               {"observed_reversals", a.observed_reversals},
                               {"expected_folds", a.expected_folds},
                               {"total_variation", a.total_variation}});
        }
        const double n = static_cast<double>(section.options.n_interval);

        for (const auto& spec : plan.active) {
            const auto& name = spec.name;
            if (name == "counterexample_rhs") {
                report.checks.push_back(judge(spec, rhs_error, "at n_interval = " + fmt(n)));
            } else if (name == "counterexample_rhs_order") {
                report.checks.push_back(judge(spec, order_defect));
            } else if (name == "counterexample_uniform") {
                report.checks.push_back(judge(spec, n * rep.max_w1_to_uniform,
                                              "largest W1 = " + fmt(rep.max_w1_to_uniform)));
            } else if (name == "counterexample_folds") {
                report.checks.push_back(judge(spec, min_folds,
                                              folds_match ? "observed = closed form for every tracked agent"
                                                          : "observed crossings differ from the closed form",
                                              folds_match));
            } else if (name == "counterexample_cluster_gap") {
                const bool bound_ok = rep.min_cluster_gap >= rep.gap_bound - 1e-12 && rep.gap_bound > 0.0 &&
                                      rep.cluster_monotone;
                report.checks.push_back(judge(spec, rep.min_cluster_gap,
                                              "drift bound " + fmt(rep.gap_bound) +
                                                  (rep.cluster_monotone ? "" : "; cluster not strictly decreasing"),
                                              bound_ok));
            } else if (name == "counterexample_mirror") {
                report.checks.push_back(judge(spec, rep.max_mirror_defect));
            } else if (name == "counterexample_order_flips") {
                report.checks.push_back(judge(spec, static_cast<double>(rep.order_flips),
                                              "of " + std::to_string(rep.order_pairs) + " sampled pairs"));
            }
        }
        report.details = {{"v_exponent", section.params.v_exponent},
                          {"c0", section.params.c0},
                          {"t_end", section.options.t_end},
                          {"n_interval", section.options.n_interval},
                          {"exclusion_radius", section.options.exclusion_radius},
                          {"final_phase", rep.final_phase},
                          {"max_w1_to_uniform", rep.max_w1_to_uniform},
                          {"max_w1_between_times", rep.max_w1_between_times},
                          {"min_cluster_gap", rep.min_cluster_gap},
                          {"gap_bound", rep.gap_bound},
                          {"rhs", rhs},
                          {"tracked_agents", tracked}};
    });
}

// --- report -----------------------------------------------------------------------

int print_run_report(const std::filesystem::path& run_dir, std::ostream& out) {
    auto path = run_dir / "report.json";
    bool partial = false;
    if (!std::filesystem::exists(path)) {
        path = run_dir / "report.json.partial";
        partial = true;
    }
    if (!std::filesystem::exists(path)) {
        out << "no report.json in " << run_dir.string() << "\n";
        return kExitRuntimeError;
    }
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const std::exception& e) {
        out << "cannot read " << path.string() << ": " << e.what() << "\n";
        return kExitRuntimeError;
    }
    out << "scenario: " << j.value("scenario", "?") << "  (" << j.value("command", "?") << ")"
        << (partial ? "  [partial]" : "") << "\n";
    if (j.contains("error")) out << "error: " << j["error"].get<std::string>() << "\n";

    std::size_t width = 5;
    for (const auto& c : j["checks"]) width = std::max(width, c["name"].get<std::string>().size());
    out << std::left << std::setw(static_cast<int>(width)) << "check" << "  result  " << std::setw(14) << "measured"
        << std::setw(10) << "bound" << std::setw(12) << "tolerance" << "reference\n";
    for (const auto& c : j["checks"]) {
        const auto worst = c["worst_violation"];
        out << std::left << std::setw(static_cast<int>(width)) << c["name"].get<std::string>() << "  "
            << (c["pass"].get<bool>() ? "PASS    " : "FAIL    ") << std::setw(14)
            << (worst.is_null() ? std::string("inf") : fmt(worst.get<double>())) << std::setw(10)
            << (c["bound"].get<std::string>() == "at_most" ? "<=" : ">=") << std::setw(12)
            << fmt(c["tolerance"].get<double>()) << c["reference"].get<std::string>() << "\n";
    }
    for (const auto& s : j.value("skipped_checks", std::vector<std::string>{})) out << "skipped: " << s << "\n";
    out << "overall: " << (j.value("pass", false) ? "PASS" : "FAIL") << "  (wall time "
        << fmt(j.value("wall_time_seconds", 0.0)) << " s)\n";
    return j.value("exit_code", static_cast<int>(kExitRuntimeError));
}

}  // namespace opinion_lab
