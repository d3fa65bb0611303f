#pragma once

#include <iosfwd>
#include <string>

#include "carlin/simulate.hpp"

namespace carlin {

// Trajectory CSV schema, one row per recorded sample:
//
//     t,x0,...,x{n-1},s0,...,s{n-1},switched
//
// All numeric fields are written as %.17e so a read-back reproduces the
// doubles bit for bit.  A run that stopped on divergence carries a final
// comment line `# diverged at t=<time>`.
void write_trajectory_csv(const Trajectory& traj, std::ostream& out);
Trajectory read_trajectory_csv(std::istream& in);

// File wrappers; throw IoError on filesystem trouble.
void save_trajectory_csv(const Trajectory& traj, const std::string& path);
Trajectory load_trajectory_csv(const std::string& path);

} // namespace carlin
