#include "mbloch/cli.hpp"

#include "mbloch/acceptance.hpp"
#include "mbloch/digest.hpp"
#include "mbloch/parallel.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

namespace mbloch {

namespace {

std::ostream& stream(const CommandContext& ctx) {
    static std::ostream discard(nullptr);
    return ctx.out != nullptr ? *ctx.out : discard;
}

std::string sci(double v) {
    std::ostringstream os;
    os << std::setprecision(3) << std::scientific << v;
    return os.str();
}

void print_checks(std::ostream& os, const VerificationReport& report) {
    for (const auto& c : report.checks) {
        os << (c.pass ? "PASS  " : "FAIL  ") << std::left << std::setw(28) << c.name << std::right << ' '
           << sci(c.measured) << ' ' << to_string(c.relation) << ' ' << sci(c.bound);
        if (!c.note.empty()) os << "  (" << c.note << ')';
        os << '\n';
    }
    if (report.renormalized) os << "note: renormalization was on; conservation checks are trivially satisfied\n";
}

Json search_document(const PeriodicSearch& search, const FieldSpec& spec) {
    Json result = to_json(search);
    result["field"] = std::string(to_string(spec.kind));
    result["period"] = spec.pump.period();
    return result;
}

SeedGrid seed_grid(const RunConfig& cfg, const FieldSpec& spec) {
    SeedGrid grid;
    grid.radius = cfg.grid.radius.value_or(spec.modified.R);
    grid.maxwell_count = cfg.grid.maxwell_count;
    grid.sphere_count = cfg.grid.sphere_count;
    grid.molecules = cfg.system.N;
    validate_grid(grid);
    return grid;
}

void print_points(std::ostream& os, const PeriodicSearch& search) {
    os << search.points.size() << " fixed point(s) from " << search.converged_seeds << '/' << search.seeds
       << " converged seeds, index sum " << search.index_sum << '\n';
    for (std::size_t i = 0; i < search.points.size(); ++i) {
        const auto& p = search.points[i];
        os << "  #" << i << " A=" << sci(p.Y_sharp.A) << " B=" << sci(p.Y_sharp.B) << " residual=" << sci(p.residual)
           << " index=" << std::showpos << p.index << std::noshowpos << (p.stable ? " stable" : " unstable")
           << (p.marginal ? " marginal" : "") << '\n';
    }
    if (search.empty_warning) os << "warning: no seed converged\n";
}

}  // namespace

// ---------------------------------------------------------------------------
// JSON renderings

Json to_json(const Check& check) {
    Json j;
    j["name"] = check.name;
    j["measured"] = check.measured;
    j["relation"] = std::string(to_string(check.relation));
    j["bound"] = check.bound;
    j["pass"] = check.pass;
    if (!check.note.empty()) j["note"] = check.note;
    return j;
}

Json to_json(const VerificationReport& report) {
    Json j;
    j["pass"] = report.all_pass();
    j["renormalized"] = report.renormalized;
    j["checks"] = Json::array();
    for (const auto& c : report.checks) j["checks"].push_back(to_json(c));
    return j;
}

Json to_json(const ReducedState& y) {
    Json j;
    j["A"] = y.A;
    j["B"] = y.B;
    j["bloch"] = Json::array();
    for (const auto& s : y.s) j["bloch"].push_back({s[0], s[1], s[2]});
    return j;
}

Json to_json(const FixedPointResult& r) {
    Json j;
    j["Y"] = to_json(r.Y_sharp);
    j["residual"] = r.residual;
    j["converged"] = r.converged;
    j["newton_iterations"] = r.newton_iterations;
    j["floquet"] = Json::array();
    for (const auto& mu : r.floquet) j["floquet"].push_back({mu.real(), mu.imag()});
    j["det_I_minus_DU"] = r.det_I_minus_DU;
    j["index"] = r.index;
    j["stable"] = r.stable;
    j["marginal"] = r.marginal;
    if (!r.message.empty()) j["message"] = r.message;
    return j;
}

Json to_json(const PeriodicSearch& search) {
    Json j;
    j["points"] = Json::array();
    for (const auto& p : search.points) j["points"].push_back(to_json(p));
    j["index_sum"] = search.index_sum;
    j["seeds"] = search.seeds;
    j["converged_seeds"] = search.converged_seeds;
    j["empty_warning"] = search.empty_warning;
    return j;
}

Json to_json(const Branch& branch) {
    Json j;
    j["points"] = Json::array();
    for (const auto& bp : branch.points) {
        Json p;
        p["amplitude"] = bp.amplitude;
        p["stability_changed"] = bp.stability_changed;
        p["point"] = to_json(bp.point);
        j["points"].push_back(std::move(p));
    }
    j["terminated"] = branch.terminated;
    if (!branch.message.empty()) j["message"] = branch.message;
    return j;
}

Json make_document(const std::string& command, const Json& config, const Json& result) {
    Json doc;
    doc["command"] = command;
    doc["config"] = config;
    doc["result"] = result;
    doc["digest"] = sha256_hex(doc.dump());
    return doc;
}

void write_document(const std::filesystem::path& path, const Json& doc) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot write '" + path.string() + "'");
    os << doc.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// commands

int cmd_simulate(const CommandContext& ctx) {
    const RunConfig& cfg = ctx.config;
    const SimulateSection& s = cfg.simulate;
    const FieldSpec spec = make_field_spec(cfg, s.field);
    const double t1 = s.t1.value_or(s.t0 + s.periods * cfg.pump.period());
    const Eigen::VectorXd y0 = s.field == FieldKind::Full ? initial_full(s.initial, cfg.system.N).to_vector()
                                                          : initial_reduced(s.initial, cfg.system.N).to_vector();

    const Trajectory traj = integrate(spec, cfg.integrator, y0, s.t0, t1);

    VerificationReport report;
    report.source = traj.meta;
    for (const auto& name : s.checks) {
        if (name == "norm") {
            report.append(s.field == FieldKind::Full ? check_charge(traj, s.norm_tol) : check_bloch_norm(traj, s.norm_tol));
        } else if (name == "lyapunov") {
            report.append(check_lyapunov(traj, spec));
        } else if (name == "apriori") {
            report.append(check_apriori(traj, cfg.system, spec.modified));
        }
    }
    report.renormalized = cfg.integrator.renormalize;

    std::filesystem::create_directories(ctx.out_dir);
    {
        std::ofstream csv(ctx.out_dir / "trajectory.csv");
        if (!csv) throw ConfigError("cannot write '" + (ctx.out_dir / "trajectory.csv").string() + "'");
        write_csv(csv, traj);
    }
    Json result;
    result["trajectory"] = {{"file", "trajectory.csv"},
                            {"field", std::string(to_string(traj.meta.kind))},
                            {"molecules", traj.meta.molecules},
                            {"samples", traj.size()},
                            {"t0", traj.t.front()},
                            {"t1", traj.t.back()},
                            {"params_digest", traj.meta.params_digest},
                            {"accepted_steps", traj.meta.accepted_steps},
                            {"rejected_steps", traj.meta.rejected_steps},
                            {"max_norm_drift", traj.meta.max_norm_drift}};
    result["report"] = to_json(report);
    write_document(ctx.out_dir / "simulate.json", make_document("simulate", resolved_config(cfg), result));

    auto& os = stream(ctx);
    os << "simulate: " << traj.size() << " samples on [" << traj.t.front() << ", " << traj.t.back() << "], "
       << traj.meta.accepted_steps << " steps\n";
    print_checks(os, report);
    return report.all_pass() ? kExitOk : kExitCheckFailed;
}

int cmd_find_periodic(const CommandContext& ctx) {
    const RunConfig& cfg = ctx.config;
    const FieldSpec spec = make_field_spec(cfg, cfg.periodic.field);
    const PeriodicSearch search =
        find_all_periodic(spec, cfg.integrator, grid_seeds(seed_grid(cfg, spec)), cfg.newton, ctx.workers);

    write_document(ctx.out_dir / "periodic.json",
                   make_document("find-periodic", resolved_config(cfg), search_document(search, spec)));
    print_points(stream(ctx), search);
    return search.points.empty() ? kExitCheckFailed : kExitOk;
}

int cmd_sweep(const CommandContext& ctx) {
    const RunConfig& cfg = ctx.config;
    const FieldSpec spec = make_field_spec(cfg, cfg.sweep.field);
    const auto& amplitudes = cfg.sweep.amplitudes;
    auto& os = stream(ctx);

    std::vector<ReducedState> starts;
    Json result;
    if (cfg.sweep.start) {
        starts.push_back(initial_reduced(*cfg.sweep.start, cfg.system.N));
    } else {
        FieldSpec first = spec;
        first.pump = spec.pump.scaled(amplitudes.front());
        const PeriodicSearch search =
            find_all_periodic(first, cfg.integrator, grid_seeds(seed_grid(cfg, first)), cfg.newton, ctx.workers);
        for (const auto& p : search.points) starts.push_back(p.Y_sharp);
        result["start_search"] = search_document(search, first);
    }

    std::vector<Branch> branches(starts.size());
    parallel_for(starts.size(), ctx.workers, [&](std::size_t i) {
        branches[i] = continuation(spec, cfg.integrator, starts[i], amplitudes, cfg.newton);
    });

    result["amplitudes"] = amplitudes;
    result["branches"] = Json::array();
    bool complete = !branches.empty();
    for (std::size_t i = 0; i < branches.size(); ++i) {
        const Branch& b = branches[i];
        result["branches"].push_back(to_json(b));
        complete = complete && !b.terminated;
        os << "branch " << i << ": " << b.points.size() << " point(s)";
        for (const auto& bp : b.points) {
            if (bp.stability_changed) os << ", stability change at amplitude " << bp.amplitude;
        }
        os << (b.terminated ? ", terminated: " + b.message : std::string(", complete")) << '\n';
    }
    if (branches.empty()) os << "no branch start converged\n";
    write_document(ctx.out_dir / "sweep.json", make_document("sweep", resolved_config(cfg), result));
    return complete ? kExitOk : kExitCheckFailed;
}

int cmd_verify(const CommandContext& ctx) {
    const RunConfig& cfg = ctx.config;
    AcceptanceOptions options;
    options.integrator = cfg.integrator;
    options.seed = cfg.verify.seed;
    options.workers = ctx.workers;
    options.criteria = cfg.verify.criteria;

    auto& os = stream(ctx);
    std::vector<int> ids = options.criteria;
    if (ids.empty()) {
        for (int id = 1; id <= kCriterionCount; ++id) ids.push_back(id);
    }
    Json result;
    result["criteria"] = Json::array();
    std::vector<std::string> failed;
    for (int id : ids) {
        const CriterionResult r = run_criterion(id, options);
        os << r.line() << '\n' << std::flush;
        Json j = to_json(r.report);
        j["id"] = r.id;
        j["name"] = r.name;
        result["criteria"].push_back(std::move(j));
        if (!r.pass) failed.push_back(std::to_string(id) + " " + r.name);
    }
    result["pass"] = failed.empty();
    write_document(ctx.out_dir / "verify.json", make_document("verify", resolved_config(cfg), result));
    if (!failed.empty()) {
        os << "failed:";
        for (const auto& f : failed) os << ' ' << f << ';';
        os << '\n';
    }
    return failed.empty() ? kExitOk : kExitCheckFailed;
}

int cmd_rabi(const CommandContext& ctx) {
    const RunConfig& cfg = ctx.config;
    const RabiSection& r = cfg.rabi;

    // a single molecule with zero current weight leaves (A, B) = 0, so the pump
    // offset alone sets the constant coupling a = (q/c) * offset
    SystemParams p = cfg.system;
    p.N = 1;
    p.q = p.q != 0.0 ? p.q : 1.0;
    p.kappa = {0.0};
    PumpConfig drive;
    drive.Omega_p = cfg.pump.Omega_p;
    drive.offset = r.a * p.c / p.q;

    const Spinor C0{Complex{r.C0[0], r.C0[1]}, Complex{r.C0[2], r.C0[3]}};
    const Trajectory traj = integrate(p, drive, cfg.integrator, FullState{0.0, 0.0, {C0}}, 0.0, r.t);
    const Spinor got = traj.full_state(traj.size() - 1).C[0];
    const Spinor ref = rabi_reference(p, r.a, C0, r.t);
    const double error = std::max(std::abs(got[0] - ref[0]), std::abs(got[1] - ref[1]));

    VerificationReport report;
    report.source = traj.meta;
    report.renormalized = cfg.integrator.renormalize;
    report.checks.push_back(make_check("rabi_final_error", error, r.tol));
    report.checks.push_back(make_check("charge_drift", traj.meta.max_norm_drift, 1e-9));

    Json result;
    result["t"] = r.t;
    result["a"] = r.a;
    result["reference"] = {ref[0].real(), ref[0].imag(), ref[1].real(), ref[1].imag()};
    result["integrated"] = {got[0].real(), got[0].imag(), got[1].real(), got[1].imag()};
    result["report"] = to_json(report);
    write_document(ctx.out_dir / "rabi.json", make_document("rabi", resolved_config(cfg), result));
    print_checks(stream(ctx), report);
    return report.all_pass() ? kExitOk : kExitCheckFailed;
}

// ---------------------------------------------------------------------------
// entry point

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Periodic orbits and invariants of pumped Maxwell-Bloch systems", "mbloch"};
    app.fallthrough();
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::size_t workers = 0;
    std::vector<std::string> overrides;
    app.add_option("--config", config_path, "JSON configuration file (defaults apply when omitted)");
    app.add_option("--out", out_dir, "output directory (overrides output.dir)");
    app.add_option("--workers", workers, "worker threads (overrides output.workers)")->check(CLI::PositiveNumber);
    app.add_option("--set", overrides, "override a setting, e.g. --set system.q=0.2 (repeatable)")
        ->allow_extra_args(false);

    app.add_subcommand("simulate", "integrate one trajectory and check invariants");
    app.add_subcommand("find-periodic", "Newton shooting from a seed grid for T-periodic solutions");
    app.add_subcommand("sweep", "continue periodic solutions in the pump amplitude");
    app.add_subcommand("verify", "run the acceptance suite");
    app.add_subcommand("rabi", "compare the integrator with the closed-form Rabi solution");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfigError;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        Json doc = config_path.empty() ? Json::object() : read_config_file(config_path);
        for (const auto& o : overrides) apply_override(doc, o);
        CommandContext ctx;
        ctx.config = parse_config(doc);
        if (!out_dir.empty()) ctx.config.output.dir = out_dir;
        if (workers > 0) ctx.config.output.workers = workers;
        validate_config(ctx.config);
        ctx.out_dir = ctx.config.output.dir;
        ctx.workers = ctx.config.output.workers;
        ctx.out = &out;

        if (command == "simulate") return cmd_simulate(ctx);
        if (command == "find-periodic") return cmd_find_periodic(ctx);
        if (command == "sweep") return cmd_sweep(ctx);
        if (command == "verify") return cmd_verify(ctx);
        return cmd_rabi(ctx);
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "configuration error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kExitNumericalError;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kExitNumericalError;
    }
}

}  // namespace mbloch
