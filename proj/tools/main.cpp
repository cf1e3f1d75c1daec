// Command-line harness: runs one preset from a config file.
//
//   threewave <preset> --config <path> [--out <dir>] [--seed <u64>]
//
// Exit codes: 0 verdict pass, 2 verdict fail, 1 error (bad arguments,
// malformed config, or a runtime failure).  The preset argument selects the
// driver and overrides any preset named in the config file.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "threewave/config.hpp"
#include "threewave/run.hpp"

int main(int argc, char** argv) {
    CLI::App app{"radial laboratory for the energy-critical three-wave system"};
    std::string preset, config_path, out_dir;
    unsigned long long seed = 0;
    app.add_option("preset", preset, "one of: constants, ground, excited, collapse, stability, instability, scattering")
        ->required()
        ->check(CLI::IsMember(threewave::kPresetNames));
    app.add_option("--config", config_path, "configuration file")
        ->required()
        ->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "output directory (default: ./out-<preset>)");
    auto* seed_opt = app.add_option("--seed", seed, "seed recorded in the manifest");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        std::ifstream is(config_path, std::ios::binary);
        std::ostringstream buf;
        buf << is.rdbuf();
        if (!is) throw threewave::Error("cannot read config file '" + config_path + "'");

        threewave::RunConfig cfg = threewave::parse_config(buf.str());
        cfg.preset = preset;
        if (!out_dir.empty()) cfg.out_path = out_dir;
        if (seed_opt->count() > 0) cfg.seed = seed;
        if (cfg.preset == "collapse" && cfg.eps_list.empty())
            throw threewave::Error(
                "config: missing required key 'eps_list' in [experiment] for preset 'collapse'");

        const threewave::RunOutcome o = threewave::run(cfg);
        if (o.exit_code == 1) {
            std::fprintf(stderr, "error: %s\n", o.error.c_str());
        } else {
            std::printf("%s: verdict %s (%s/report.json)\n", cfg.preset.c_str(),
                        o.verdict ? "PASS" : "FAIL", o.out_dir.c_str());
        }
        return o.exit_code;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
