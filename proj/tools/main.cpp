// Command-line front end: run lifted simulations, dump lifted operators,
// compare trajectories, sweep truncation orders, export model files.
//
// Exit codes: 0 success, 2 invalid spec/arguments, 3 the run diverged
// (trajectory still written), 4 I/O failure, 5 compare exceeded --tol.

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "carlin/linearize.hpp"
#include "carlin/models.hpp"
#include "carlin/presets.hpp"
#include "carlin/simulate.hpp"
#include "carlin/trajectory_io.hpp"

namespace {

using namespace carlin;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17e", v);
    return buf;
}

std::vector<double> parse_vector(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string field;
    while (std::getline(ss, field, ',')) {
        try {
            std::size_t pos = 0;
            const double v = std::stod(field, &pos);
            while (pos < field.size() && std::isspace(static_cast<unsigned char>(field[pos])))
                ++pos;
            if (pos != field.size()) throw std::invalid_argument(field);
            out.push_back(v);
        } catch (const std::exception&) {
            throw InputError("bad numeric list entry '" + field + "'");
        }
    }
    if (out.empty())
        throw InputError("empty numeric list");
    return out;
}

LiftMethod parse_method(const std::string& name) {
    if (name == "carleman") return LiftMethod::Carleman;
    if (name == "ps") return LiftMethod::PS;
    if (name == "psc") return LiftMethod::PSC;
    throw InputError("unknown method '" + name + "' (expected carleman, ps, or psc)");
}

LiftBasis parse_basis(const std::string& name) {
    if (name == "monomial") return LiftBasis::Monomial;
    if (name == "centered") return LiftBasis::PivotCentered;
    throw InputError("unknown basis '" + name + "' (expected monomial or centered)");
}

// "never" | "at:t1,t2,..." | "every:T" | "drift:E"
SwitchPolicy parse_switch(const std::string& text) {
    if (text == "never") return SwitchPolicy::never();
    const std::size_t colon = text.find(':');
    if (colon != std::string::npos) {
        const std::string kind = text.substr(0, colon);
        const std::string arg = text.substr(colon + 1);
        if (kind == "at") return SwitchPolicy::at_times(parse_vector(arg));
        if (kind == "every") return SwitchPolicy::every(parse_vector(arg).at(0));
        if (kind == "drift") return SwitchPolicy::drift(parse_vector(arg).at(0));
    }
    throw InputError("bad switch policy '" + text +
                     "' (expected never, at:<times>, every:<T>, or drift:<E>)");
}

// "t1=v1,v2,...;t2=..." — scalar targets broadcast once the model
// dimension is known.
PivotSchedule parse_schedule(const std::string& text) {
    PivotSchedule sched;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ';')) {
        if (part.empty()) continue;
        const std::size_t eq = part.find('=');
        if (eq == std::string::npos)
            throw InputError("bad schedule entry '" + part + "' (expected t=v1,v2,...)");
        PivotSchedule::Entry e;
        e.time = parse_vector(part.substr(0, eq)).at(0);
        e.target = parse_vector(part.substr(eq + 1));
        sched.entries.push_back(std::move(e));
    }
    if (sched.empty())
        throw InputError("empty pivot schedule");
    return sched;
}

void broadcast_to_dim(std::vector<double>& v, int n, const char* what) {
    if (v.empty() || static_cast<int>(v.size()) == n) return;
    if (v.size() == 1) {
        v.assign(static_cast<std::size_t>(n), v[0]);
        return;
    }
    throw InputError(std::string(what) + " has " + std::to_string(v.size()) +
                     " entries but the model dimension is " + std::to_string(n));
}

// One bag of option values per invocation; CLI11 Option pointers provide
// presence information so explicit flags override preset values.
struct Opts {
    std::string preset, model, model_file, method, basis = "native";
    std::string x0, pivot, schedule, switch_policy, reference, out, orders;
    int order = 0;
    int n = 0;
    double beta = -0.2;
    double dt = 0.01, t_end = 10.0, eta = 0.0, tol = -1.0, threshold = 1e6;
    std::uint64_t seed = 20240817;
    int stride = 1;
    bool keep_blocks = false;

    CLI::Option* o_preset = nullptr;
    CLI::Option* o_model = nullptr;
    CLI::Option* o_model_file = nullptr;
    CLI::Option* o_method = nullptr;
    CLI::Option* o_order = nullptr;
    CLI::Option* o_n = nullptr;
    CLI::Option* o_beta = nullptr;
    CLI::Option* o_x0 = nullptr;
    CLI::Option* o_pivot = nullptr;
    CLI::Option* o_schedule = nullptr;
    CLI::Option* o_switch = nullptr;
    CLI::Option* o_dt = nullptr;
    CLI::Option* o_t_end = nullptr;
    CLI::Option* o_eta = nullptr;
    CLI::Option* o_seed = nullptr;
    CLI::Option* o_stride = nullptr;
    CLI::Option* o_threshold = nullptr;
    CLI::Option* o_keep_blocks = nullptr;
};

void add_model_options(CLI::App* cmd, Opts& o) {
    o.o_preset = cmd->add_option("--preset", o.preset, "start from a named figure preset");
    o.o_model = cmd->add_option("--model", o.model, "built-in model: logistic, kpp, phase-field");
    o.o_model_file = cmd->add_option("--model-file", o.model_file, "JSON model file");
    o.o_n = cmd->add_option("--n", o.n, "lattice size for built-in lattice models");
    o.o_beta = cmd->add_option("--beta", o.beta, "phase-field tilt parameter");
}

void add_lift_options(CLI::App* cmd, Opts& o) {
    o.o_method = cmd->add_option("--method", o.method, "carleman, ps, or psc");
    o.o_order = cmd->add_option("--order", o.order, "truncation order (carleman/psc)");
    o.o_pivot = cmd->add_option("--pivot", o.pivot,
                                "initial pivot, comma list (default: x0)");
}

void add_run_options(CLI::App* cmd, Opts& o) {
    o.o_x0 = cmd->add_option("--x0", o.x0, "initial state, comma list (default: model's)");
    o.o_schedule = cmd->add_option("--pivot-schedule", o.schedule,
                                   "scripted pivot targets 't1=v,...;t2=...'");
    o.o_switch = cmd->add_option("--switch", o.switch_policy,
                                 "switch policy: never, at:<times>, every:<T>, drift:<E>");
    o.o_dt = cmd->add_option("--dt", o.dt, "time step");
    o.o_t_end = cmd->add_option("--t-end", o.t_end, "end time");
    o.o_eta = cmd->add_option("--eta", o.eta, "pivot readout noise amplitude");
    o.o_seed = cmd->add_option("--seed", o.seed, "readout noise RNG seed");
    o.o_stride = cmd->add_option("--stride", o.stride, "record every k-th step");
    o.o_threshold = cmd->add_option("--threshold", o.threshold, "divergence threshold");
    o.o_keep_blocks = cmd->add_flag("--keep-blocks", o.keep_blocks,
                                    "carry evolved higher blocks across switches");
}

// Build the effective RunSpec: preset first (if any), then every
// explicitly given flag on top.
RunSpec assemble_spec(const Opts& o) {
    RunSpec spec;
    if (o.o_preset && o.o_preset->count() > 0) {
        const auto& table = figure_presets();
        const auto it = table.find(o.preset);
        if (it == table.end())
            throw InputError("unknown preset '" + o.preset + "' (see --list-presets)");
        spec = it->second;
    } else {
        spec.model = "logistic"; // a default model keeps quick experiments short
    }

    if (o.o_model && o.o_model->count() > 0) {
        spec.model = o.model;
        spec.model_file.clear();
    }
    if (o.o_model_file && o.o_model_file->count() > 0) {
        spec.model_file = o.model_file;
        spec.model.clear();
    }
    if (o.o_n && o.o_n->count() > 0) spec.model_dim = o.n;
    if (o.o_beta && o.o_beta->count() > 0) spec.beta = o.beta;
    if (o.o_method && o.o_method->count() > 0) spec.method = parse_method(o.method);
    if (o.o_order && o.o_order->count() > 0) spec.order = o.order;
    if (o.o_x0 && o.o_x0->count() > 0) spec.x0 = parse_vector(o.x0);
    if (o.o_pivot && o.o_pivot->count() > 0) spec.pivot = parse_vector(o.pivot);
    if (o.o_schedule && o.o_schedule->count() > 0) spec.schedule = parse_schedule(o.schedule);
    if (o.o_switch && o.o_switch->count() > 0) spec.policy = parse_switch(o.switch_policy);
    if (o.o_dt && o.o_dt->count() > 0) spec.cfg.dt = o.dt;
    if (o.o_t_end && o.o_t_end->count() > 0) spec.cfg.t_end = o.t_end;
    if (o.o_eta && o.o_eta->count() > 0) spec.cfg.readout_noise = o.eta;
    if (o.o_seed && o.o_seed->count() > 0) spec.cfg.rng_seed = o.seed;
    if (o.o_stride && o.o_stride->count() > 0) spec.cfg.output_stride = o.stride;
    if (o.o_threshold && o.o_threshold->count() > 0)
        spec.cfg.divergence_threshold = o.threshold;
    if (o.o_keep_blocks && o.o_keep_blocks->count() > 0)
        spec.cfg.carry_higher_blocks = o.keep_blocks;

    // Scalar x0/pivot/targets broadcast to the model dimension.
    const NamedModel model = resolve_model(spec);
    const int n = model.ode.dim();
    broadcast_to_dim(spec.x0, n, "--x0");
    broadcast_to_dim(spec.pivot, n, "--pivot");
    for (auto& e : spec.schedule.entries)
        broadcast_to_dim(e.target, n, "schedule target");
    return spec;
}

void write_text(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(out_path);
    if (!f)
        throw IoError("cannot open '" + out_path + "' for writing");
    f << text;
    f.flush();
    if (!f)
        throw IoError("failed writing '" + out_path + "'");
}

int cmd_run(const Opts& o) {
    const RunSpec spec = assemble_spec(o);
    const Trajectory traj = run_spec(spec);
    std::ostringstream csv;
    write_trajectory_csv(traj, csv);
    write_text(csv.str(), o.out);
    if (traj.divergence_time) {
        std::cerr << "run: diverged at t=" << fmt17(*traj.divergence_time) << "\n";
        return 3;
    }
    return 0;
}

int cmd_matrix(const Opts& o) {
    RunSpec spec = assemble_spec(o);
    spec.validate();
    const NamedModel model = resolve_model(spec);
    const std::vector<double>& x0 = spec.x0.empty() ? model.default_x0 : spec.x0;
    std::vector<double> pivot = spec.pivot.empty() ? x0 : spec.pivot;

    LiftedSystem sys;
    switch (spec.method) {
    case LiftMethod::Carleman:
        sys = build_carleman(model.ode, spec.order);
        break;
    case LiftMethod::PS:
        sys = build_ps(model.ode, pivot);
        break;
    case LiftMethod::PSC:
        sys = build_psc(model.ode, pivot, spec.order);
        break;
    }

    const LiftBasis basis = (o.basis == "native") ? sys.basis : parse_basis(o.basis);
    const Matrix m = to_dense_in_basis(sys, basis);

    std::ostringstream csv;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) csv << ',';
            csv << fmt17(m(i, j));
        }
        csv << '\n';
    }
    write_text(csv.str(), o.out);
    return 0;
}

int cmd_compare(const Opts& o, const std::string& file_a, const std::string& file_b) {
    const Trajectory a = load_trajectory_csv(file_a);

    Trajectory b;
    if (!file_b.empty() && !o.reference.empty())
        throw InputError("compare: give either a second file or --reference, not both");
    if (!file_b.empty()) {
        b = load_trajectory_csv(file_b);
    } else if (!o.reference.empty()) {
        RunSpec spec = assemble_spec(o);
        const NamedModel model = resolve_model(spec);
        const std::vector<double>& x0 = spec.x0.empty() ? model.default_x0 : spec.x0;
        SimConfig cfg = spec.cfg;
        if (!(o.o_t_end && o.o_t_end->count() > 0) && !a.times.empty())
            cfg.t_end = a.times.back();
        if (o.reference == "euler" || o.reference == "rk4") {
            b = reference_solve(model.ode, x0, cfg,
                                o.reference == "euler" ? RefMethod::Euler
                                                       : RefMethod::RungeKutta4);
        } else if (o.reference == "analytic") {
            if (model.ode.dim() != 1 || spec.model != "logistic")
                throw InputError("compare: analytic reference exists only for logistic");
            b.dim = 1;
            for (double t : a.times) {
                b.times.push_back(t);
                b.states.push_back({logistic_analytic(x0[0], t)});
                b.row_pivots.push_back({0.0});
                b.row_switched.push_back(0);
            }
        } else {
            throw InputError("compare: unknown reference '" + o.reference +
                             "' (expected euler, rk4, or analytic)");
        }
    } else {
        throw InputError("compare: need a second trajectory file or --reference");
    }

    const CompareReport rep = compare(a, b);
    std::cout << "max_abs=" << fmt17(rep.max_abs) << " rms=" << fmt17(rep.rms)
              << " t_at_max=" << fmt17(rep.t_at_max) << "\n";
    if (o.tol >= 0.0 && rep.max_abs > o.tol) return 5;
    return 0;
}

int cmd_sweep(const Opts& o) {
    if (o.orders.empty())
        throw InputError("sweep: --orders is required (e.g. --orders 2,3,4,5)");
    const std::vector<double> order_vals = parse_vector(o.orders);
    std::vector<int> orders;
    for (double v : order_vals) {
        const int k = static_cast<int>(v);
        if (static_cast<double>(k) != v || k < 1)
            throw InputError("sweep: orders must be positive integers");
        orders.push_back(k);
    }

    RunSpec base = assemble_spec(o);
    const NamedModel model = resolve_model(base);
    const std::vector<double>& x0 = base.x0.empty() ? model.default_x0 : base.x0;

    const std::string out_dir = o.out.empty() ? "sweep_out" : o.out;
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec)
        throw IoError("cannot create sweep output directory '" + out_dir + "'");

    const Trajectory ref = reference_solve(model.ode, x0, base.cfg, RefMethod::Euler);
    save_trajectory_csv(ref, out_dir + "/reference.csv");

    std::ostringstream summary;
    summary << "parameter,diverged,t_div,max_abs_vs_reference\n";
    for (int k : orders) {
        RunSpec spec = base;
        spec.order = k;
        const Trajectory traj = run_spec(spec);
        save_trajectory_csv(traj, out_dir + "/order-" + std::to_string(k) + ".csv");
        const CompareReport rep = compare(traj, ref);
        summary << k << ',' << (traj.divergence_time ? 1 : 0) << ','
                << (traj.divergence_time ? fmt17(*traj.divergence_time) : "nan") << ','
                << fmt17(rep.max_abs) << '\n';
    }
    write_text(summary.str(), out_dir + "/summary.csv");
    std::cerr << "sweep: wrote " << orders.size() << " runs to " << out_dir << "\n";
    return 0;
}

int cmd_model(const Opts& o) {
    RunSpec spec = assemble_spec(o);
    const NamedModel model = resolve_model(spec);
    write_text(serialize_model(model.ode), o.out);
    return 0;
}

int list_presets() {
    for (const auto& [name, spec] : figure_presets()) {
        const char* method = spec.method == LiftMethod::Carleman ? "carleman"
                             : spec.method == LiftMethod::PS     ? "ps"
                                                                 : "psc";
        std::cout << name << ": " << spec.model << ", " << method;
        if (spec.method != LiftMethod::PS) std::cout << " order " << spec.order;
        if (!spec.schedule.empty()) std::cout << ", scheduled pivot switch";
        else if (spec.policy.kind == SwitchPolicy::Kind::Every)
            std::cout << ", switch every " << spec.policy.interval;
        std::cout << "\n";
    }
    return 0;
}

template <typename F>
int guarded(F&& body) {
    try {
        return body();
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ResourceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"pivot-switching Carleman linearization simulator"};
    app.require_subcommand(0, 1);

    bool want_presets = false;
    app.add_flag("--list-presets", want_presets, "list the built-in figure presets");

    Opts run_o, matrix_o, compare_o, sweep_o, model_o;

    CLI::App* run_cmd = app.add_subcommand("run", "integrate a lifted system, write trajectory CSV");
    add_model_options(run_cmd, run_o);
    add_lift_options(run_cmd, run_o);
    add_run_options(run_cmd, run_o);
    run_cmd->add_option("--out", run_o.out, "output CSV path (default: stdout)");

    CLI::App* matrix_cmd = app.add_subcommand("matrix", "dump the dense lifted operator as CSV");
    add_model_options(matrix_cmd, matrix_o);
    add_lift_options(matrix_cmd, matrix_o);
    matrix_o.o_x0 = matrix_cmd->add_option("--x0", matrix_o.x0, "state the default pivot is taken from");
    matrix_cmd->add_option("--basis", matrix_o.basis, "monomial or centered (default: the system's own)");
    matrix_cmd->add_option("--out", matrix_o.out, "output CSV path (default: stdout)");

    CLI::App* compare_cmd = app.add_subcommand("compare", "compare two trajectories or one against a reference");
    std::string cmp_a, cmp_b;
    compare_cmd->add_option("file_a", cmp_a, "trajectory CSV")->required();
    compare_cmd->add_option("file_b", cmp_b, "second trajectory CSV");
    add_model_options(compare_cmd, compare_o);
    compare_o.o_x0 = compare_cmd->add_option("--x0", compare_o.x0, "reference initial state");
    compare_o.o_dt = compare_cmd->add_option("--dt", compare_o.dt, "reference time step");
    compare_o.o_t_end = compare_cmd->add_option("--t-end", compare_o.t_end, "reference end time");
    compare_cmd->add_option("--reference", compare_o.reference, "euler, rk4, or analytic");
    compare_cmd->add_option("--tol", compare_o.tol, "fail (exit 5) if max |diff| exceeds this");

    CLI::App* sweep_cmd = app.add_subcommand("sweep", "run a truncation-order sweep, write runs + summary");
    add_model_options(sweep_cmd, sweep_o);
    add_lift_options(sweep_cmd, sweep_o);
    add_run_options(sweep_cmd, sweep_o);
    sweep_cmd->add_option("--orders", sweep_o.orders, "comma list of truncation orders")->required();
    sweep_cmd->add_option("--out", sweep_o.out, "output directory (default: sweep_out)");

    CLI::App* model_cmd = app.add_subcommand("model", "export a model as a JSON model file");
    add_model_options(model_cmd, model_o);
    model_cmd->add_option("--out", model_o.out, "output path (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (want_presets) return list_presets();

    if (*run_cmd) return guarded([&] { return cmd_run(run_o); });
    if (*matrix_cmd) return guarded([&] { return cmd_matrix(matrix_o); });
    if (*compare_cmd) return guarded([&] { return cmd_compare(compare_o, cmp_a, cmp_b); });
    if (*sweep_cmd) return guarded([&] { return cmd_sweep(sweep_o); });
    if (*model_cmd) return guarded([&] { return cmd_model(model_o); });

    std::cout << app.help();
    return 0;
}
