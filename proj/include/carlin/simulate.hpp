#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "carlin/linearize.hpp"
#include "carlin/poly_ode.hpp"

namespace carlin {

// When to abandon the current pivot and switch to a fresh one.
struct SwitchPolicy {
    enum class Kind { Never, AtTimes, Every, Drift };

    Kind kind = Kind::Never;
    std::vector<double> times; // AtTimes: strictly increasing
    double interval = 0.0;     // Every: > 0
    double max_drift = 0.0;    // Drift: > 0, threshold on ||x_est − s||_inf

    static SwitchPolicy never() { return {}; }
    static SwitchPolicy at_times(std::vector<double> ts);
    static SwitchPolicy every(double interval);
    static SwitchPolicy drift(double max_drift);

    void validate() const; // throws InputError
};

// Scripted pivot targets: at each listed time the run switches to the
// given pivot (instead of reading one out of the state).  Times are
// strictly increasing; targets are full state vectors.
struct PivotSchedule {
    struct Entry {
        double time = 0.0;
        std::vector<double> target;
    };
    std::vector<Entry> entries;

    bool empty() const { return entries.empty(); }
};

struct SimConfig {
    double dt = 0.01;
    double t_end = 10.0;
    double divergence_threshold = 1e6; // on ||x_est||_inf
    double readout_noise = 0.0;        // eta: pivot = x_est + eta * u, u ~ U[-1,1]^n
    std::uint64_t rng_seed = 20240817;
    int output_stride = 1;             // record every stride-th step
    // On a switch, re-express the evolved higher blocks in the new basis
    // instead of rebuilding them from the state estimate.  Off by default;
    // useful only for ablation.
    bool carry_higher_blocks = false;
};

// A recorded run.  Row j holds the state estimate at times[j], the pivot
// in effect, and whether a switch happened since the previous recorded
// row.  `pivots` additionally logs every pivot event (including the
// initial pivot at t = 0) regardless of the output stride.
struct Trajectory {
    int dim = 0;
    std::vector<double> times;
    std::vector<std::vector<double>> states;
    std::vector<std::vector<double>> row_pivots;
    std::vector<std::uint8_t> row_switched;
    std::vector<std::pair<double, std::vector<double>>> pivots;
    std::vector<double> switch_events;
    std::optional<double> divergence_time;
};

// Deterministic RNG with an explicit 53-bit mapping to doubles, so
// trajectories are bit-identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}
    // Uniform on [-1, 1).
    double uniform_pm1() {
        const std::uint64_t bits = eng_() >> 11; // 53 random bits
        return static_cast<double>(bits) * (2.0 / 9007199254740992.0) - 1.0;
    }

private:
    std::mt19937_64 eng_;
};

// pivot = x_est + eta * u with u uniform on [-1,1]^n; eta = 0 returns
// x_est unchanged (bitwise).
std::vector<double> readout_pivot(std::span<const double> x_est, double eta, Rng& rng);

// One forward-Euler step y += dt * A y of the lifted system.
void euler_step(const LiftedSystem& sys, BlockVec& y, double dt,
                BlockVec& deriv, ApplyWorkspace& ws);

// Integrate the lifted system with pivot switching.
//
//  - method Carleman requires policy Never and no schedule (there is no
//    pivot to switch);
//  - scheduled switches take precedence over the policy at the same step,
//    and a schedule may be combined with policy Never to get purely
//    scripted runs;
//  - on a switch the operator is rebuilt at the new pivot and the state
//    re-lifted from the current estimate (or the higher blocks carried
//    over when cfg.carry_higher_blocks is set);
//  - the run stops early when ||x_est||_inf exceeds the divergence
//    threshold or goes non-finite; the crossing sample itself is not
//    recorded, only divergence_time.
Trajectory run_lifted(const PolyODE& ode, LiftMethod method, int order,
                      std::span<const double> x0, std::span<const double> s0,
                      const SwitchPolicy& policy, const SimConfig& cfg,
                      const PivotSchedule& schedule = {});

enum class RefMethod { Euler, RungeKutta4 };

// Integrate the nonlinear ODE directly on the same grid (no lifting).
// The trajectory's pivot columns are zeros.  Divergence handling matches
// run_lifted.
Trajectory reference_solve(const PolyODE& ode, std::span<const double> x0,
                           const SimConfig& cfg, RefMethod method = RefMethod::Euler);

struct CompareReport {
    double max_abs = 0.0;
    double rms = 0.0;
    double t_at_max = 0.0;
    std::size_t samples = 0;
};

// Compare two trajectories over the overlap of their time ranges,
// matching each sample of `a` to the nearest-in-time sample of `b`.
// Throws InputError when dimensions differ or the ranges are disjoint.
CompareReport compare(const Trajectory& a, const Trajectory& b);

} // namespace carlin
