#include "threewave/run.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include "json.hpp"
#include "threewave/dynamics.hpp"
#include "threewave/reference.hpp"
#include "threewave/solvers.hpp"

namespace threewave {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

void write_file(const fs::path& path, const std::string& bytes) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("run: cannot open '" + path.string() + "' for writing");
    os << bytes;
    if (!os) throw Error("run: failed writing '" + path.string() + "'");
}

std::string csv_row(const std::vector<double>& xs) {
    std::string row;
    char buf[64];
    for (size_t i = 0; i < xs.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", xs[i]);
        row += (i ? "," : "") + std::string(buf);
    }
    return row + "\n";
}

std::string monitors_csv(const std::vector<EvolutionRecord>& series) {
    std::string out = "t,E,Q1,Q2,grad_sq,P,virial,dt,tail_mass\n";
    for (const auto& r : series)
        out += csv_row({r.t, r.energy, r.q1, r.q2, r.grad_sq, r.pohozaev_, r.virial_, r.dt,
                        r.tail_mass});
    return out;
}

std::string profile_csv(const RadialGrid& g, const FieldTriple& u) {
    std::string out = "r,u1,u2,u3\n";
    for (int i = 0; i < g.n; ++i) out += csv_row({g.r[i], u.u1[i], u.u2[i], u.u3[i]});
    return out;
}

json certificate_json(const StationaryState& st, const RadialGrid& g) {
    const Masses m = masses(g, st.u);
    return json{{"converged", st.converged},
                {"iterations", st.iterations},
                {"energy", st.energy},
                {"lambda1", st.lambda1},
                {"lambda2", st.lambda2},
                {"grad_sq", st.grad_sq},
                {"pohozaev_residual", st.pohozaev_residual},
                {"pg_norm", st.pg_norm},
                {"residual_sup", st.residual_sup},
                {"symmetry_defect", st.symmetry_defect},
                {"sigma", st.sigma},
                {"classification", st.classification == PohozaevClass::plus ? "plus" : "minus"},
                {"energy_window_ok", st.energy_window_ok},
                {"q1", m.q1},
                {"q2", m.q2}};
}

json summary_json(const ExperimentReport& rep) {
    json s;
    for (const auto& [k, v] : rep.summary) s[k] = v;
    return s;
}

SolverOptions solver_options(const RunConfig& cfg) {
    SolverOptions so;
    so.tol = cfg.tol;
    so.pohozaev_tol = cfg.pohozaev_tol;
    so.max_iter = cfg.max_iter;
    so.step0 = cfg.step;
    return so;
}

EvolutionControls evolution_controls(const RunConfig& cfg) {
    EvolutionControls c;
    c.dt0 = cfg.dt0;
    c.dt_min = cfg.dt_min;
    c.output_stride = cfg.output_stride;
    return c;
}

struct Artifacts {
    json report;
    bool verdict = false;
    std::vector<std::pair<std::string, std::string>> files;  // name -> bytes
};

Artifacts run_constants([[maybe_unused]] const RunConfig& cfg, const SolitonW& w,
                        [[maybe_unused]] const RadialGrid& g, const Constants& geo) {
    const double level = std::pow(geo.c_sob, 1.5) / 3.0;
    Artifacts a;
    a.report = json{{"w_mass", w.mass},
                    {"w_grad_sq", w.grad_sq},
                    {"w_cubic", w.cubic},
                    {"w_l2", w.l2},
                    {"w_b0", w.b0},
                    {"c_sob", geo.c_sob},
                    {"c_gn", geo.c_gn},
                    {"D", geo.D},
                    {"D0", geo.D0},
                    {"sobolev_level", level},
                    {"grad_level", 3.0 * level}};
    a.verdict = true;
    std::string txt;
    for (const auto& [key, value] : a.report.items()) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g", value.get<double>());
        txt += key + " = " + std::string(buf) + "\n";
    }
    a.files.emplace_back("constants.txt", txt);
    return a;
}

Artifacts run_ground(const RunConfig& cfg, const SolitonW& w, const RadialGrid& g,
                     const Constants& geo) {
    const StationaryState gs = ground_state(g, w, geo, solver_options(cfg));
    Artifacts a;
    a.report = json{{"ground", certificate_json(gs, g)}};
    a.verdict = gs.converged;
    a.files.emplace_back("profile.csv", profile_csv(g, gs.u));
    return a;
}

Artifacts run_excited(const RunConfig& cfg, const SolitonW& w, const RadialGrid& g,
                      const Constants& geo) {
    const SolverOptions so = solver_options(cfg);
    const StationaryState gs = ground_state(g, w, geo, so);
    const StationaryState ex = excited_state(g, w, geo, gs, so);
    Artifacts a;
    a.report = json{{"ground", certificate_json(gs, g)}, {"excited", certificate_json(ex, g)}};
    a.verdict = ex.classification == PohozaevClass::minus && ex.energy_window_ok;
    a.files.emplace_back("profile.csv", profile_csv(g, ex.u));
    return a;
}

Artifacts run_collapse(const RunConfig& cfg, const SolitonW& w,
                       [[maybe_unused]] const RadialGrid& g, const Constants& geo) {
    std::vector<double> eps;
    for (double f : cfg.eps_list) eps.push_back(f * geo.D);
    const CollapseSweep sw = mass_collapse_sweep(w, geo.alpha, eps, cfg.n, cfg.R,
                                                 solver_options(cfg));

    const double alpha4 = std::pow(geo.alpha, 4);
    const double W4 = w.mass * w.mass;
    bool brackets_ok = true, distances_ok = true, slopes_ok = true;
    json records = json::array();
    for (size_t i = 0; i < sw.records.size(); ++i) {
        const CollapseRecord& r = sw.records[i];
        const double e4 = std::pow(r.epsilon, 4), e6 = std::pow(r.epsilon, 6);
        const double lam_lo = alpha4 * e4 / (8 * W4);
        brackets_ok = brackets_ok && r.lambda_sum > lam_lo && r.lambda_sum < 81.0 * lam_lo &&
                      r.grad_sq > 3 * alpha4 * e6 / (8 * W4) &&
                      r.grad_sq < 243.0 * alpha4 * e6 / (16 * W4) && r.energy < 0;
        if (i > 0) {
            const CollapseRecord& p = sw.records[i - 1];
            distances_ok = distances_ok &&
                           r.rescaled_distance <= p.rescaled_distance * 1.05 + 1e-8;
        }
        records.push_back(json{{"epsilon", r.epsilon},
                               {"energy", r.energy},
                               {"grad_sq", r.grad_sq},
                               {"lambda_sum", r.lambda_sum},
                               {"rescaled_distance", r.rescaled_distance}});
    }
    json slopes_e = json::array(), slopes_g = json::array();
    for (size_t i = 0; i + 1 < sw.records.size(); ++i) {
        const auto &r0 = sw.records[i], &r1 = sw.records[i + 1];
        const double dl = std::log(r1.epsilon / r0.epsilon);
        const double sE = std::log(std::abs(r1.energy) / std::abs(r0.energy)) / dl;
        const double sG = std::log(r1.grad_sq / r0.grad_sq) / dl;
        slopes_ok = slopes_ok && sE > 5.7 && sE < 6.3 && sG > 5.7 && sG < 6.3;
        slopes_e.push_back(sE);
        slopes_g.push_back(sG);
    }

    Artifacts a;
    a.report = json{{"records", records},
                    {"energy_slopes", slopes_e},
                    {"grad_slopes", slopes_g},
                    {"brackets_ok", brackets_ok},
                    {"distances_ok", distances_ok},
                    {"slopes_ok", slopes_ok},
                    {"limit", certificate_json(sw.limit, sw.vgrid)}};
    a.verdict = brackets_ok && distances_ok && slopes_ok && sw.limit.converged;

    std::string csv = "epsilon,energy,grad_sq,lambda_sum,rescaled_distance\n";
    for (const auto& r : sw.records)
        csv += csv_row({r.epsilon, r.energy, r.grad_sq, r.lambda_sum, r.rescaled_distance});
    a.files.emplace_back("records.csv", csv);
    return a;
}

Artifacts run_experiment(const RunConfig& cfg, const SolitonW& w, const RadialGrid& g,
                         const Constants& geo) {
    const SolverOptions so = solver_options(cfg);
    const EvolutionControls c = evolution_controls(cfg);
    ExperimentReport rep;
    if (cfg.preset == "stability")
        rep = stability_experiment(g, w, geo, cfg.delta, cfg.T, so, c);
    else if (cfg.preset == "instability")
        rep = instability_experiment(g, w, geo, cfg.s, cfg.T, so, c);
    else
        rep = scattering_diagnostic(g, w, geo, cfg.T, so, c);

    Artifacts a;
    a.report = json{{"kind", cfg.preset},
                    {"verdict", rep.verdict},
                    {"summary", summary_json(rep)},
                    {"n_records", rep.series.size()}};
    a.verdict = rep.verdict;
    a.files.emplace_back("monitors.csv", monitors_csv(rep.series));
    return a;
}

}  // namespace

std::string version_string() { return "threewave 1.0.0"; }

RunOutcome run(const RunConfig& cfg) {
    RunOutcome out;
    out.out_dir = cfg.out_path.empty() ? ("out-" + cfg.preset) : cfg.out_path;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        fs::create_directories(out.out_dir);

        const SolitonW w = solve_W();
        const RadialGrid g(cfg.n, cfg.R);
        const double c_sob = sobolev_constant(g);
        const Constants geo = geometry_constants(cfg.phys, w.l2, c_sob);

        Artifacts a;
        if (cfg.preset == "constants")
            a = run_constants(cfg, w, g, geo);
        else if (cfg.preset == "ground")
            a = run_ground(cfg, w, g, geo);
        else if (cfg.preset == "excited")
            a = run_excited(cfg, w, g, geo);
        else if (cfg.preset == "collapse")
            a = run_collapse(cfg, w, g, geo);
        else if (cfg.preset == "stability" || cfg.preset == "instability" ||
                 cfg.preset == "scattering")
            a = run_experiment(cfg, w, g, geo);
        else
            throw Error("run: unknown preset '" + cfg.preset + "'");

        json report = json{{"preset", cfg.preset}, {"verdict", a.verdict}};
        for (auto& [key, value] : a.report.items()) report[key] = value;
        out.report_json = report.dump(2) + "\n";
        write_file(fs::path(out.out_dir) / "report.json", out.report_json);
        for (const auto& [name, bytes] : a.files)
            write_file(fs::path(out.out_dir) / name, bytes);

        const double wall_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                .count();
        const json manifest = {{"preset", cfg.preset},
                               {"version", version_string()},
                               {"seed", cfg.seed},
                               {"wall_ms", wall_ms},
                               {"config", serialize_config(cfg)},
                               {"constants",
                                {{"alpha", geo.alpha},
                                 {"a1", geo.a1},
                                 {"a2", geo.a2},
                                 {"w_l2", geo.w_l2},
                                 {"c_sob", geo.c_sob},
                                 {"c_gn", geo.c_gn},
                                 {"D", geo.D},
                                 {"D0", geo.D0},
                                 {"A1", geo.A1},
                                 {"A2", geo.A2},
                                 {"rho0", geo.rho0},
                                 {"rho_bar", geo.rho_bar},
                                 {"h_at_rho0", geo.h_at_rho0},
                                 {"R0", geo.R0},
                                 {"R1", geo.R1}}}};
        write_file(fs::path(out.out_dir) / "manifest.json", manifest.dump(2) + "\n");

        out.verdict = a.verdict;
        out.exit_code = a.verdict ? 0 : 2;
    } catch (const std::exception& e) {
        out.exit_code = 1;
        out.verdict = false;
        out.error = e.what();
        out.report_json.clear();
        try {
            fs::create_directories(out.out_dir);
            write_file(fs::path(out.out_dir) / "error.json",
                       json{{"error", out.error}}.dump(2) + "\n");
        } catch (...) {
            // the outcome already carries the original error
        }
    }
    return out;
}

std::vector<RunOutcome> sweep(const std::vector<RunConfig>& cfgs, int workers) {
    std::vector<RunOutcome> out(cfgs.size());
    if (cfgs.empty()) return out;
    workers = std::max(1, std::min<int>(workers, static_cast<int>(cfgs.size())));

    std::atomic<size_t> next{0};
    auto work = [&] {
        for (size_t i = next.fetch_add(1); i < cfgs.size(); i = next.fetch_add(1)) {
            RunConfig c = cfgs[i];
            if (c.out_path.empty()) c.out_path = "out-" + c.preset + "-" + std::to_string(i);
            out[i] = run(c);
        }
    };
    std::vector<std::thread> pool;
    for (int k = 0; k < workers; ++k) pool.emplace_back(work);
    for (auto& th : pool) th.join();
    return out;
}

}  // namespace threewave
