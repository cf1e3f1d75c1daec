#pragma once
// Run configuration for the command-line harness: a flat-section key-value
// text format, a strict parser (unknown keys and malformed values are
// rejected with messages naming the offender), and a canonical serializer
// such that serialize(parse(text)) is a fixed point.
//
// Sections mirror the library modules:
//   [run]        preset, out_path, seed
//   [phys]       alpha, and either absolute masses a1/a2 or a_frac (both
//                masses as a fraction of the subcritical threshold D(alpha))
//   [grid]       n, R   (for the collapse preset, R is the rescaled box)
//   [solver]     tol, pohozaev_tol, max_iter, step
//   [dynamics]   T, dt0, dt_min, output_stride
//   [experiment] delta (stability), s (instability), eps_list (collapse;
//                fractions of D(alpha), strictly descending)
//
// Defaults: alpha = 1, a1 = a2 = 0.3 D(alpha), n = 2048, R = 40, tol = 1e-8.
// Masses are validated against the subcritical threshold: max(a1, a2) must
// stay below D(alpha) or parsing fails with "subcriticality violated".

#include <string>
#include <vector>

#include "threewave/functionals.hpp"
#include "threewave/grid.hpp"

namespace threewave {

// The seven run presets understood by the harness.
extern const std::vector<std::string> kPresetNames;
bool is_preset_name(const std::string& name);

struct RunConfig {
    std::string preset = "ground";

    // [phys] -- masses are stored resolved (absolute), never as fractions.
    PhysParams phys;

    // [grid]
    int n = 2048;
    double R = 40.0;

    // [solver]
    double tol = 1e-8;
    double pohozaev_tol = 1e-6;
    int max_iter = 20000;
    double step = 1.0;

    // [dynamics]
    double T = 1.0;
    double dt0 = 1e-3;
    double dt_min = 1e-9;
    int output_stride = 10;

    // [experiment]
    double delta = 1e-2;            // stability perturbation size
    double s = 1.1;                 // instability dilation
    std::vector<double> eps_list;   // collapse masses as fractions of D(alpha)

    // [run]
    std::string out_path;           // empty: chosen by the caller
    unsigned long long seed = 0;    // recorded in the manifest

    bool operator==(const RunConfig&) const = default;
};

// Parses and fully validates a configuration.  Computes the reference
// geometry to resolve fractional masses and enforce the subcritical gate.
// Throws Error with a message naming the offending section/key/line.
RunConfig parse_config(const std::string& text);

// Canonical text form: fixed section and key order, shortest round-trip
// number formatting, resolved absolute masses.  parse_config(serialize_config(c))
// reproduces c exactly, and serialize_config is idempotent over that loop.
std::string serialize_config(const RunConfig& cfg);

}  // namespace threewave
