#include "carlin/presets.hpp"

#include <fstream>
#include <sstream>

namespace carlin {

void RunSpec::validate() const {
    if (model.empty() == model_file.empty())
        throw InputError("run spec: exactly one of model name or model file is required");
    if (!model.empty() && model != "logistic" && model != "kpp" && model != "phase-field")
        throw InputError("run spec: unknown model '" + model +
                         "' (expected logistic, kpp, or phase-field)");
    if (method == LiftMethod::Carleman || method == LiftMethod::PSC) {
        if (order < 1)
            throw InputError("run spec: truncation order must be >= 1");
    }
    if (method == LiftMethod::Carleman) {
        if (!pivot.empty())
            throw InputError("run spec: Carleman takes no pivot");
        if (policy.kind != SwitchPolicy::Kind::Never || !schedule.empty())
            throw InputError("run spec: Carleman does not switch pivots");
    }
    policy.validate();
}

NamedModel resolve_model(const RunSpec& spec) {
    if (!spec.model_file.empty()) {
        std::ifstream f(spec.model_file);
        if (!f)
            throw IoError("cannot open model file '" + spec.model_file + "'");
        std::ostringstream ss;
        ss << f.rdbuf();
        PolyODE ode = parse_model(ss.str());
        // A file-defined model has no canonical initial state; require an
        // explicit x0 in the spec.
        if (spec.x0.empty())
            throw InputError("run spec: model files require an explicit x0");
        return {std::move(ode), spec.x0, spec.model_file};
    }
    if (spec.model == "logistic") {
        if (spec.model_dim && *spec.model_dim != 1)
            throw InputError("run spec: the logistic model is one-dimensional");
        return build_logistic();
    }
    if (spec.model == "kpp")
        return build_kpp(spec.model_dim.value_or(8));
    if (spec.model == "phase-field")
        return build_phase_field(spec.model_dim.value_or(8), spec.beta.value_or(-0.2));
    throw InputError("run spec: unknown model '" + spec.model + "'");
}

Trajectory run_spec(const RunSpec& spec) {
    spec.validate();
    const NamedModel model = resolve_model(spec);
    const std::vector<double>& x0 = spec.x0.empty() ? model.default_x0 : spec.x0;
    if (x0.size() != static_cast<std::size_t>(model.ode.dim()))
        throw InputError("run spec: x0 dimension does not match the model");
    return run_lifted(model.ode, spec.method, spec.order, x0, spec.pivot,
                      spec.policy, spec.cfg, spec.schedule);
}

namespace {

RunSpec base_spec(std::string model, LiftMethod method, int order, double t_end) {
    RunSpec s;
    s.model = std::move(model);
    s.method = method;
    s.order = order;
    s.cfg.dt = 0.01;
    s.cfg.t_end = t_end;
    return s;
}

std::map<std::string, RunSpec> make_presets() {
    std::map<std::string, RunSpec> p;

    // Logistic, conventional Carleman at increasing truncation order.
    // The divergence threshold sits just above the solution range [0, 1]
    // so the blow-up time of the truncated system is resolved within the
    // short window; the default 1e6 threshold would only be crossed long
    // after the trajectories have left the meaningful range.
    for (int k = 2; k <= 5; ++k) {
        RunSpec s = base_spec("logistic", LiftMethod::Carleman, k, 4.0);
        s.cfg.divergence_threshold = 2.0;
        p["fig1a-K" + std::to_string(k)] = std::move(s);
    }

    // Logistic, tangent-plane pivot lift under periodic switching.
    {
        RunSpec s = base_spec("logistic", LiftMethod::PS, 1, 10.0);
        s.policy = SwitchPolicy::every(0.01);
        p["fig2a"] = std::move(s);
    }
    {
        RunSpec s = base_spec("logistic", LiftMethod::PS, 1, 10.0);
        s.policy = SwitchPolicy::every(1.0);
        p["fig2b"] = std::move(s);
    }
    {
        RunSpec s = base_spec("logistic", LiftMethod::PS, 1, 10.0);
        s.policy = SwitchPolicy::every(2.0);
        p["fig2c"] = std::move(s);
    }

    // Logistic, re-centred Carleman: pivot fixed at the stable equilibrium,
    // and the scheduled variant that starts at pivot 0 and hops to 1 at t=1.
    {
        RunSpec s = base_spec("logistic", LiftMethod::PSC, 3, 10.0);
        s.pivot = {1.0};
        p["fig2d"] = std::move(s);
    }
    {
        RunSpec s = base_spec("logistic", LiftMethod::PSC, 5, 10.0);
        s.pivot = {1.0};
        p["fig2e"] = std::move(s);
    }
    {
        RunSpec s = base_spec("logistic", LiftMethod::PSC, 3, 10.0);
        s.pivot = {0.0};
        s.schedule.entries.push_back({1.0, {1.0}});
        p["fig2d-switch"] = std::move(s);
    }
    {
        RunSpec s = base_spec("logistic", LiftMethod::PSC, 5, 10.0);
        s.pivot = {0.0};
        s.schedule.entries.push_back({1.0, {1.0}});
        p["fig2e-switch"] = std::move(s);
    }

    const std::vector<double> ones(8, 1.0);
    const std::vector<double> neg_ones(8, -1.0);
    const std::vector<double> kpp_x0 = build_kpp(8).default_x0;
    const std::vector<double> pf_x0 = build_phase_field(8).default_x0;

    // KPP-Fisher lattice.
    p["fig3b"] = base_spec("kpp", LiftMethod::Carleman, 3, 10.0);
    {
        RunSpec s = base_spec("kpp", LiftMethod::PSC, 3, 10.0);
        s.pivot = ones;
        p["fig3c"] = std::move(s);
    }
    {
        RunSpec s = base_spec("kpp", LiftMethod::PSC, 5, 10.0);
        s.pivot = ones;
        p["fig3d"] = std::move(s);
    }
    {
        RunSpec s = base_spec("kpp", LiftMethod::PSC, 3, 10.0);
        s.pivot = kpp_x0;
        s.schedule.entries.push_back({1.0, ones});
        p["fig3e"] = std::move(s);
    }
    {
        RunSpec s = base_spec("kpp", LiftMethod::PSC, 5, 10.0);
        s.pivot = kpp_x0;
        s.schedule.entries.push_back({1.0, ones});
        p["fig3f"] = std::move(s);
    }

    // Phase-field lattice.
    p["fig4b"] = base_spec("phase-field", LiftMethod::Carleman, 3, 10.0);
    {
        RunSpec s = base_spec("phase-field", LiftMethod::PSC, 3, 10.0);
        s.pivot = neg_ones;
        p["fig4c"] = std::move(s);
    }
    {
        RunSpec s = base_spec("phase-field", LiftMethod::PSC, 5, 10.0);
        s.pivot = neg_ones;
        p["fig4d"] = std::move(s);
    }
    {
        RunSpec s = base_spec("phase-field", LiftMethod::PSC, 3, 10.0);
        s.pivot = pf_x0;
        s.schedule.entries.push_back({2.9, neg_ones});
        p["fig4e"] = std::move(s);
    }
    {
        RunSpec s = base_spec("phase-field", LiftMethod::PSC, 5, 10.0);
        s.pivot = pf_x0;
        s.schedule.entries.push_back({2.9, neg_ones});
        p["fig4f"] = std::move(s);
    }

    return p;
}

} // namespace

const std::map<std::string, RunSpec>& figure_presets() {
    static const std::map<std::string, RunSpec> presets = make_presets();
    return presets;
}

} // namespace carlin
