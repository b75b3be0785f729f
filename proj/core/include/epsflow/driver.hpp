#pragma once

// Command-line driver logic: argv in, exit code and human summary out.
// Kept in the library so the dispatch behavior is testable without spawning
// processes; the installed binary is a thin wrapper around dispatch().

#include <string>
#include <vector>

#include "epsflow/harnack.hpp"
#include "epsflow/pathopt.hpp"
#include "epsflow/scenario.hpp"

namespace epsflow {

// exit_code 0: every gated margin clears the tolerance.
// exit_code 1: a margin violation (including an order violation mid-run,
//              which is the inequality the margins guard failing outright).
// exit_code 2: usage, configuration, or runtime error.
struct CommandOutcome {
  int exit_code = 0;
  std::string summary;
};

// One full simulation pass for a validated configuration: initial data,
// march to t_end with the snapshot times as exact stops, margin collection.
struct RunArtifacts {
  Trajectory trajectory;
  MarginSeries margins;
};
RunArtifacts run_scenario(const ScenarioConfig& config);

// Exit-code classification for a completed run: 0 when margins_pass holds at
// `tol` and every path-query margin is positive, 1 otherwise.
int classify_margins(const MarginMinima& minima,
                     const std::vector<PathResult>& results, double tol);

// Subcommands:
//   run <config> [--tol]                 evolve, report margins, write outputs
//   verify <config> [--tol]              run, then re-run at twice the
//                                        resolution; negative excursions of
//                                        the differential margins must shrink
//                                        by at least 2x
//   gamma <config> --from theta,t --to theta,t [--window] [--layers] [--tol]
//                                        minimize the path action and check
//                                        the integrated inequality
//   sweep <config> --epsilons a,b,...    one run and one report per epsilon,
//                                        interpolating between the two
//                                        endpoint inequalities
// `args` excludes the program name.
CommandOutcome dispatch(const std::vector<std::string>& args);

} // namespace epsflow
