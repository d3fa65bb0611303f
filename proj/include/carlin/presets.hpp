#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "carlin/models.hpp"
#include "carlin/simulate.hpp"

namespace carlin {

// A fully described run: which model, which lift, and how to integrate
// it.  This is what the CLI assembles from flags and what the preset
// table stores; validate() enforces mutual consistency (e.g. Carleman
// admits no pivot, no schedule, no switching).
struct RunSpec {
    // Model selection: a built-in name ("logistic" | "kpp" | "phase-field")
    // or a JSON model file path; exactly one of the two.
    std::string model;
    std::string model_file;
    std::optional<int> model_dim;   // built-in lattice size override
    std::optional<double> beta;     // phase-field tilt override

    LiftMethod method = LiftMethod::Carleman;
    int order = 0;                  // required for Carleman/PSC; ignored by PS

    std::vector<double> x0;         // empty -> model default
    std::vector<double> pivot;      // empty -> x0 (PS/PSC); must stay empty for Carleman
    SwitchPolicy policy;
    PivotSchedule schedule;
    SimConfig cfg;

    void validate() const; // throws InputError
};

// Materialise the model a spec names (reads model_file if set).
NamedModel resolve_model(const RunSpec& spec);

// Execute the run described by the spec.
Trajectory run_spec(const RunSpec& spec);

// The named experiment presets behind the benchmark figures, keyed by
// names like "fig1a-K3", "fig2b", "fig4f".  Panels that contain both a
// fixed-pivot run and a scheduled-switch run get a second entry with a
// "-switch" suffix.
const std::map<std::string, RunSpec>& figure_presets();

} // namespace carlin
