#include "carlin/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace carlin {

SwitchPolicy SwitchPolicy::at_times(std::vector<double> ts) {
    SwitchPolicy p;
    p.kind = Kind::AtTimes;
    p.times = std::move(ts);
    return p;
}

SwitchPolicy SwitchPolicy::every(double interval) {
    SwitchPolicy p;
    p.kind = Kind::Every;
    p.interval = interval;
    return p;
}

SwitchPolicy SwitchPolicy::drift(double max_drift) {
    SwitchPolicy p;
    p.kind = Kind::Drift;
    p.max_drift = max_drift;
    return p;
}

void SwitchPolicy::validate() const {
    switch (kind) {
    case Kind::Never:
        break;
    case Kind::AtTimes:
        if (times.empty())
            throw InputError("switch policy: at-times needs at least one time");
        for (std::size_t i = 0; i < times.size(); ++i) {
            if (!std::isfinite(times[i]) || times[i] < 0.0)
                throw InputError("switch policy: switch times must be finite and >= 0");
            if (i > 0 && times[i] <= times[i - 1])
                throw InputError("switch policy: switch times must be strictly increasing");
        }
        break;
    case Kind::Every:
        if (!(interval > 0.0) || !std::isfinite(interval))
            throw InputError("switch policy: interval must be > 0");
        break;
    case Kind::Drift:
        if (!(max_drift > 0.0) || !std::isfinite(max_drift))
            throw InputError("switch policy: drift threshold must be > 0");
        break;
    }
}

std::vector<double> readout_pivot(std::span<const double> x_est, double eta, Rng& rng) {
    if (!(eta >= 0.0) || !std::isfinite(eta))
        throw InputError("readout_pivot: eta must be finite and >= 0");
    std::vector<double> s(x_est.begin(), x_est.end());
    if (eta == 0.0) return s;
    for (double& v : s) v += eta * rng.uniform_pm1();
    return s;
}

void euler_step(const LiftedSystem& sys, BlockVec& y, double dt,
                BlockVec& deriv, ApplyWorkspace& ws) {
    sys.op.apply(y, deriv, ws);
    std::vector<double>& yd = y.raw();
    const std::vector<double>& dd = deriv.raw();
    for (std::size_t i = 0; i < yd.size(); ++i) yd[i] += dt * dd[i];
}

namespace {

void validate_cfg(const SimConfig& cfg) {
    if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt))
        throw InputError("sim config: dt must be > 0");
    if (!(cfg.t_end > 0.0) || !std::isfinite(cfg.t_end))
        throw InputError("sim config: t_end must be > 0");
    if (!(cfg.divergence_threshold > 0.0))
        throw InputError("sim config: divergence threshold must be > 0");
    if (!(cfg.readout_noise >= 0.0) || !std::isfinite(cfg.readout_noise))
        throw InputError("sim config: readout noise must be finite and >= 0");
    if (cfg.output_stride < 1)
        throw InputError("sim config: output stride must be >= 1");
}

void check_state(std::span<const double> x, int dim, const char* who) {
    if (static_cast<int>(x.size()) != dim)
        throw InputError(std::string(who) + ": state dimension mismatch");
    for (double v : x)
        if (!std::isfinite(v))
            throw InputError(std::string(who) + ": state must be finite");
}

bool exceeds_threshold(std::span<const double> x, double threshold) {
    for (double v : x)
        if (!std::isfinite(v) || std::abs(v) > threshold) return true;
    return false;
}

LiftedSystem build_system(const PolyODE& ode, LiftMethod method, int order,
                          std::span<const double> pivot) {
    switch (method) {
    case LiftMethod::Carleman:
        return build_carleman(ode, order);
    case LiftMethod::PS:
        return build_ps(ode, pivot);
    case LiftMethod::PSC:
        return build_psc(ode, pivot, order);
    }
    throw InputError("build_system: unknown method");
}

} // namespace

Trajectory run_lifted(const PolyODE& ode, LiftMethod method, int order,
                      std::span<const double> x0, std::span<const double> s0,
                      const SwitchPolicy& policy, const SimConfig& cfg,
                      const PivotSchedule& schedule) {
    const int n = ode.dim();
    validate_cfg(cfg);
    check_state(x0, n, "run_lifted x0");
    policy.validate();

    if (method == LiftMethod::Carleman) {
        if (policy.kind != SwitchPolicy::Kind::Never || !schedule.empty())
            throw InputError("run_lifted: Carleman has no pivot to switch; "
                             "use policy never and no schedule");
    }

    // Pivot defaults to the initial state for the pivot methods.
    std::vector<double> pivot;
    if (method == LiftMethod::Carleman) {
        if (!s0.empty())
            throw InputError("run_lifted: Carleman takes no initial pivot");
        pivot.assign(static_cast<std::size_t>(n), 0.0);
    } else if (s0.empty()) {
        pivot.assign(x0.begin(), x0.end());
    } else {
        check_state(s0, n, "run_lifted s0");
        pivot.assign(s0.begin(), s0.end());
    }

    double prev_time = -1.0;
    for (const auto& e : schedule.entries) {
        check_state(e.target, n, "run_lifted schedule target");
        if (!std::isfinite(e.time) || e.time < 0.0)
            throw InputError("run_lifted: schedule times must be finite and >= 0");
        if (e.time <= prev_time)
            throw InputError("run_lifted: schedule times must be strictly increasing");
        prev_time = e.time;
    }

    LiftedSystem sys = build_system(ode, method, order, pivot);
    BlockVec y = lift_state(x0, sys);
    BlockVec deriv(y.dims());
    ApplyWorkspace ws;
    Rng rng(cfg.rng_seed);

    Trajectory traj;
    traj.dim = n;
    traj.times.push_back(0.0);
    traj.states.emplace_back(x0.begin(), x0.end());
    traj.row_pivots.push_back(sys.pivot);
    traj.row_switched.push_back(0);
    traj.pivots.emplace_back(0.0, sys.pivot);

    const long long nsteps = std::llround(cfg.t_end / cfg.dt);
    const double half_dt = 0.5 * cfg.dt;
    std::size_t sched_idx = 0;
    std::size_t at_idx = 0;
    double next_every = policy.interval;
    bool pending_switch = false;

    for (long long i = 1; i <= nsteps; ++i) {
        euler_step(sys, y, cfg.dt, deriv, ws);
        const double t = static_cast<double>(i) * cfg.dt;
        std::vector<double> xe = read_x(y, sys);

        if (exceeds_threshold(xe, cfg.divergence_threshold)) {
            traj.divergence_time = t;
            break;
        }

        // Decide whether to switch pivots at this step boundary.  A
        // scripted target wins over the policy; the policy branches are
        // mutually exclusive by construction.
        bool do_switch = false;
        std::vector<double> s_new;
        if (sched_idx < schedule.entries.size() &&
            t >= schedule.entries[sched_idx].time - half_dt) {
            s_new = schedule.entries[sched_idx].target;
            ++sched_idx;
            do_switch = true;
        } else if (policy.kind == SwitchPolicy::Kind::Every &&
                   t >= next_every - half_dt) {
            s_new = readout_pivot(xe, cfg.readout_noise, rng);
            next_every += policy.interval;
            do_switch = true;
        } else if (policy.kind == SwitchPolicy::Kind::AtTimes &&
                   at_idx < policy.times.size() &&
                   t >= policy.times[at_idx] - half_dt) {
            s_new = readout_pivot(xe, cfg.readout_noise, rng);
            ++at_idx;
            do_switch = true;
        } else if (policy.kind == SwitchPolicy::Kind::Drift) {
            double drift = 0.0;
            for (std::size_t j = 0; j < xe.size(); ++j)
                drift = std::max(drift, std::abs(xe[j] - sys.pivot[j]));
            if (drift > policy.max_drift) {
                s_new = readout_pivot(xe, cfg.readout_noise, rng);
                do_switch = true;
            }
        }

        if (do_switch) {
            LiftedSystem next = build_system(ode, method, order, s_new);
            if (cfg.carry_higher_blocks && sys.basis == LiftBasis::PivotCentered) {
                // Re-express the evolved tower around the new pivot instead
                // of rebuilding it from the estimate.
                std::vector<double> delta(s_new.size());
                for (std::size_t j = 0; j < delta.size(); ++j)
                    delta[j] = s_new[j] - sys.pivot[j];
                y = binomial_lift_transform(delta, sys.order).apply(y);
            } else if (!cfg.carry_higher_blocks) {
                y = lift_state(xe, next);
            }
            // carry_higher_blocks in the monomial basis (PS): the tower is
            // pivot-independent, nothing to do.
            sys = std::move(next);
            deriv = BlockVec(y.dims());
            traj.pivots.emplace_back(t, sys.pivot);
            traj.switch_events.push_back(t);
            pending_switch = true;
        }

        if (i % cfg.output_stride == 0) {
            traj.times.push_back(t);
            traj.states.push_back(std::move(xe));
            traj.row_pivots.push_back(sys.pivot);
            traj.row_switched.push_back(pending_switch ? 1 : 0);
            pending_switch = false;
        }
    }
    return traj;
}

Trajectory reference_solve(const PolyODE& ode, std::span<const double> x0,
                           const SimConfig& cfg, RefMethod method) {
    const int n = ode.dim();
    validate_cfg(cfg);
    check_state(x0, n, "reference_solve x0");

    std::vector<double> x(x0.begin(), x0.end());
    const std::vector<double> zeros(static_cast<std::size_t>(n), 0.0);

    Trajectory traj;
    traj.dim = n;
    traj.times.push_back(0.0);
    traj.states.push_back(x);
    traj.row_pivots.push_back(zeros);
    traj.row_switched.push_back(0);

    const long long nsteps = std::llround(cfg.t_end / cfg.dt);
    for (long long i = 1; i <= nsteps; ++i) {
        if (method == RefMethod::Euler) {
            const std::vector<double> k = ode.eval_rhs(x);
            for (int j = 0; j < n; ++j)
                x[static_cast<std::size_t>(j)] += cfg.dt * k[static_cast<std::size_t>(j)];
        } else {
            const double h = cfg.dt;
            std::vector<double> k1 = ode.eval_rhs(x);
            std::vector<double> tmp(x.size());
            for (std::size_t j = 0; j < x.size(); ++j) tmp[j] = x[j] + 0.5 * h * k1[j];
            std::vector<double> k2 = ode.eval_rhs(tmp);
            for (std::size_t j = 0; j < x.size(); ++j) tmp[j] = x[j] + 0.5 * h * k2[j];
            std::vector<double> k3 = ode.eval_rhs(tmp);
            for (std::size_t j = 0; j < x.size(); ++j) tmp[j] = x[j] + h * k3[j];
            std::vector<double> k4 = ode.eval_rhs(tmp);
            for (std::size_t j = 0; j < x.size(); ++j)
                x[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        const double t = static_cast<double>(i) * cfg.dt;
        if (exceeds_threshold(x, cfg.divergence_threshold)) {
            traj.divergence_time = t;
            break;
        }
        if (i % cfg.output_stride == 0) {
            traj.times.push_back(t);
            traj.states.push_back(x);
            traj.row_pivots.push_back(zeros);
            traj.row_switched.push_back(0);
        }
    }
    return traj;
}

CompareReport compare(const Trajectory& a, const Trajectory& b) {
    if (a.dim != b.dim)
        throw InputError("compare: trajectories have different state dimensions");
    if (a.times.empty() || b.times.empty())
        throw InputError("compare: empty trajectory");

    const double lo = std::max(a.times.front(), b.times.front());
    const double hi = std::min(a.times.back(), b.times.back());
    const double eps = 1e-9;
    if (lo > hi + eps)
        throw InputError("compare: time ranges do not overlap");

    CompareReport rep;
    double sum_sq = 0.0;
    std::size_t count = 0;
    for (std::size_t ia = 0; ia < a.times.size(); ++ia) {
        const double t = a.times[ia];
        if (t < lo - eps || t > hi + eps) continue;
        // Nearest sample of b in time.
        auto it = std::lower_bound(b.times.begin(), b.times.end(), t);
        std::size_t ib;
        if (it == b.times.begin()) {
            ib = 0;
        } else if (it == b.times.end()) {
            ib = b.times.size() - 1;
        } else {
            const std::size_t hi_idx = static_cast<std::size_t>(it - b.times.begin());
            ib = (t - b.times[hi_idx - 1] <= b.times[hi_idx] - t) ? hi_idx - 1 : hi_idx;
        }
        for (int j = 0; j < a.dim; ++j) {
            const double d = std::abs(a.states[ia][static_cast<std::size_t>(j)] -
                                      b.states[ib][static_cast<std::size_t>(j)]);
            if (d > rep.max_abs) {
                rep.max_abs = d;
                rep.t_at_max = t;
            }
            sum_sq += d * d;
        }
        ++count;
    }
    if (count == 0)
        throw InputError("compare: no overlapping samples");
    rep.samples = count;
    rep.rms = std::sqrt(sum_sq / (static_cast<double>(count) * a.dim));
    return rep;
}

} // namespace carlin
