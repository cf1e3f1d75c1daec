#pragma once
// Preset drivers behind the command-line harness.  run() executes one
// configuration and writes its artifacts into an output directory:
//
//   manifest.json   config echo, derived geometry constants, code version,
//                   wall time, seed (the only file carrying timing data)
//   report.json     preset result: certificate, sweep records, or
//                   experiment summary plus verdict; byte-reproducible
//   profile.csv     stationary profiles (ground / excited presets)
//   records.csv     per-mass records (collapse preset)
//   monitors.csv    time series t,E,Q1,Q2,grad_sq,P,virial,dt,tail_mass
//                   (stability / instability / scattering presets)
//   constants.txt   reference constants (constants preset)
//
// Identical config and seed reproduce report.json and the CSV files byte for
// byte; wall time lives only in the manifest.  sweep() runs independent
// configurations concurrently under a worker bound; outcomes are ordered by
// input index and do not depend on the worker count, and a failure in one
// run does not disturb the others.

#include <string>
#include <vector>

#include "threewave/config.hpp"

namespace threewave {

struct RunOutcome {
    int exit_code = 1;        // 0 verdict pass, 2 verdict fail, 1 error
    bool verdict = false;
    std::string error;        // nonempty exactly when exit_code == 1
    std::string out_dir;      // directory holding the artifacts
    std::string report_json;  // bytes written to report.json ("" on error)
};

// Executes one preset run; never throws (errors are folded into the outcome).
RunOutcome run(const RunConfig& cfg);

// Runs each configuration on a pool of at most `workers` threads.
std::vector<RunOutcome> sweep(const std::vector<RunConfig>& cfgs, int workers);

std::string version_string();

}  // namespace threewave
