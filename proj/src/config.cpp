#include "threewave/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "threewave/reference.hpp"

namespace threewave {

const std::vector<std::string> kPresetNames = {
    "constants", "ground", "excited", "collapse",
    "stability", "instability", "scattering"};

bool is_preset_name(const std::string& name) {
    return std::find(kPresetNames.begin(), kPresetNames.end(), name) != kPresetNames.end();
}

namespace {

// Shortest decimal form that parses back to the same double.
std::string fmt_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct RawEntry {
    std::string value;
    int line = 0;
};

using Section = std::map<std::string, RawEntry>;

const std::map<std::string, std::vector<std::string>> kSchema = {
    {"run", {"preset", "out_path", "seed"}},
    {"phys", {"alpha", "a1", "a2", "a_frac"}},
    {"grid", {"n", "R"}},
    {"solver", {"tol", "pohozaev_tol", "max_iter", "step"}},
    {"dynamics", {"T", "dt0", "dt_min", "output_stride"}},
    {"experiment", {"delta", "s", "eps_list"}},
};

[[noreturn]] void fail(const std::string& msg) { throw Error("config: " + msg); }

double to_double(const std::string& sec, const std::string& key, const std::string& v) {
    const char* p = v.c_str();
    char* end = nullptr;
    const double x = std::strtod(p, &end);
    if (end == p || *end != '\0')
        fail("type mismatch for key '" + key + "' in [" + sec + "]: expected a number, got '" + v + "'");
    return x;
}

long long to_int(const std::string& sec, const std::string& key, const std::string& v) {
    const char* p = v.c_str();
    char* end = nullptr;
    const long long x = std::strtoll(p, &end, 10);
    if (end == p || *end != '\0')
        fail("type mismatch for key '" + key + "' in [" + sec + "]: expected an integer, got '" + v + "'");
    return x;
}

unsigned long long to_u64(const std::string& sec, const std::string& key, const std::string& v) {
    const char* p = v.c_str();
    char* end = nullptr;
    const unsigned long long x = std::strtoull(p, &end, 10);
    if (end == p || *end != '\0' || v.find('-') != std::string::npos)
        fail("type mismatch for key '" + key + "' in [" + sec + "]: expected an unsigned integer, got '" + v + "'");
    return x;
}

std::vector<double> to_list(const std::string& sec, const std::string& key, std::string v) {
    std::replace(v.begin(), v.end(), ',', ' ');
    std::vector<double> out;
    std::istringstream is(v);
    std::string tok;
    while (is >> tok) out.push_back(to_double(sec, key, tok));
    if (out.empty())
        fail("type mismatch for key '" + key + "' in [" + sec + "]: expected a list of numbers");
    return out;
}

void require_positive(const std::string& sec, const std::string& key, double x) {
    if (!(x > 0))
        fail("key '" + key + "' in [" + sec + "] must be positive, got " + fmt_double(x));
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    std::map<std::string, Section> raw;
    std::string current;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const size_t hash = line.find_first_of("#;");
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                fail("line " + std::to_string(lineno) + ": unterminated section header '" + line + "'");
            const std::string sec = trim(line.substr(1, line.size() - 2));
            if (!kSchema.count(sec))
                fail("unknown section '[" + sec + "]' at line " + std::to_string(lineno));
            current = sec;
            raw[sec];  // a section may legitimately be empty
            continue;
        }
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            fail("line " + std::to_string(lineno) + ": expected 'key = value', got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            fail("line " + std::to_string(lineno) + ": expected 'key = value', got '" + line + "'");
        if (current.empty())
            fail("line " + std::to_string(lineno) + ": key '" + key + "' appears before any [section]");
        const auto& allowed = kSchema.at(current);
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            fail("unknown key '" + key + "' in [" + current + "] at line " + std::to_string(lineno));
        if (raw[current].count(key))
            fail("duplicate key '" + key + "' in [" + current + "] at line " + std::to_string(lineno));
        raw[current][key] = {value, lineno};
    }

    RunConfig cfg;
    const auto has = [&raw](const std::string& sec, const std::string& key) {
        auto it = raw.find(sec);
        return it != raw.end() && it->second.count(key) > 0;
    };
    const auto val = [&raw](const std::string& sec, const std::string& key) -> const std::string& {
        return raw.at(sec).at(key).value;
    };

    if (has("run", "preset")) {
        cfg.preset = val("run", "preset");
        if (!is_preset_name(cfg.preset)) {
            std::string all;
            for (const auto& p : kPresetNames) all += (all.empty() ? "" : ", ") + p;
            fail("unknown preset '" + cfg.preset + "' (expected one of: " + all + ")");
        }
    }
    if (has("run", "out_path")) cfg.out_path = val("run", "out_path");
    if (has("run", "seed")) cfg.seed = to_u64("run", "seed", val("run", "seed"));

    if (has("grid", "n")) cfg.n = static_cast<int>(to_int("grid", "n", val("grid", "n")));
    if (has("grid", "R")) cfg.R = to_double("grid", "R", val("grid", "R"));
    if (cfg.n < 16) fail("key 'n' in [grid] must be at least 16, got " + std::to_string(cfg.n));
    require_positive("grid", "R", cfg.R);

    if (has("solver", "tol")) cfg.tol = to_double("solver", "tol", val("solver", "tol"));
    if (has("solver", "pohozaev_tol"))
        cfg.pohozaev_tol = to_double("solver", "pohozaev_tol", val("solver", "pohozaev_tol"));
    if (has("solver", "max_iter"))
        cfg.max_iter = static_cast<int>(to_int("solver", "max_iter", val("solver", "max_iter")));
    if (has("solver", "step")) cfg.step = to_double("solver", "step", val("solver", "step"));
    require_positive("solver", "tol", cfg.tol);
    require_positive("solver", "pohozaev_tol", cfg.pohozaev_tol);
    if (cfg.max_iter < 1) fail("key 'max_iter' in [solver] must be at least 1");
    require_positive("solver", "step", cfg.step);

    if (has("dynamics", "T")) cfg.T = to_double("dynamics", "T", val("dynamics", "T"));
    if (has("dynamics", "dt0")) cfg.dt0 = to_double("dynamics", "dt0", val("dynamics", "dt0"));
    if (has("dynamics", "dt_min"))
        cfg.dt_min = to_double("dynamics", "dt_min", val("dynamics", "dt_min"));
    if (has("dynamics", "output_stride"))
        cfg.output_stride =
            static_cast<int>(to_int("dynamics", "output_stride", val("dynamics", "output_stride")));
    require_positive("dynamics", "T", cfg.T);
    require_positive("dynamics", "dt0", cfg.dt0);
    require_positive("dynamics", "dt_min", cfg.dt_min);
    if (cfg.dt_min > cfg.dt0)
        fail("key 'dt_min' in [dynamics] must not exceed dt0 (" + fmt_double(cfg.dt_min) + " > " +
             fmt_double(cfg.dt0) + ")");
    if (cfg.output_stride < 1) fail("key 'output_stride' in [dynamics] must be at least 1");

    if (has("experiment", "delta")) cfg.delta = to_double("experiment", "delta", val("experiment", "delta"));
    if (has("experiment", "s")) cfg.s = to_double("experiment", "s", val("experiment", "s"));
    if (has("experiment", "eps_list"))
        cfg.eps_list = to_list("experiment", "eps_list", val("experiment", "eps_list"));
    if (cfg.delta < 0) fail("key 'delta' in [experiment] must be nonnegative");
    require_positive("experiment", "s", cfg.s);
    if (cfg.preset == "collapse" && cfg.eps_list.empty())
        fail("missing required key 'eps_list' in [experiment] for preset 'collapse'");
    for (size_t i = 0; i < cfg.eps_list.size(); ++i) {
        if (!(cfg.eps_list[i] > 0))
            fail("key 'eps_list' in [experiment]: entries must be positive");
        if (!(cfg.eps_list[i] < 1))
            fail("subcriticality violated: eps_list entry " + fmt_double(cfg.eps_list[i]) +
                 " is not below 1 (entries are mass fractions of D(alpha))");
        if (i > 0 && !(cfg.eps_list[i] < cfg.eps_list[i - 1]))
            fail("key 'eps_list' in [experiment] must be strictly descending");
    }

    // Masses: absolute a1/a2, or a_frac scaling the subcritical threshold.
    const bool has_abs = has("phys", "a1") || has("phys", "a2");
    if (has("phys", "a_frac") && has_abs)
        fail("keys 'a_frac' and 'a1'/'a2' in [phys] are mutually exclusive");
    if (has("phys", "alpha")) cfg.phys.alpha = to_double("phys", "alpha", val("phys", "alpha"));
    require_positive("phys", "alpha", cfg.phys.alpha);

    static const double w_l2 = solve_W().l2;  // reference soliton, computed once
    const RadialGrid grid(cfg.n, cfg.R);
    const double c_sob = sobolev_constant(grid);
    PhysParams probe = cfg.phys;
    probe.a1 = probe.a2 = 0;
    const double d_alpha = geometry_constants(probe, w_l2, c_sob).D;

    if (has_abs) {
        if (has("phys", "a1")) cfg.phys.a1 = to_double("phys", "a1", val("phys", "a1"));
        if (has("phys", "a2")) cfg.phys.a2 = to_double("phys", "a2", val("phys", "a2"));
        if (!has("phys", "a2")) cfg.phys.a2 = cfg.phys.a1;
        if (!has("phys", "a1")) cfg.phys.a1 = cfg.phys.a2;
        require_positive("phys", "a1", cfg.phys.a1);
        require_positive("phys", "a2", cfg.phys.a2);
    } else {
        double frac = 0.3;
        if (has("phys", "a_frac")) frac = to_double("phys", "a_frac", val("phys", "a_frac"));
        require_positive("phys", "a_frac", frac);
        cfg.phys.a1 = cfg.phys.a2 = frac * d_alpha;
    }
    const double a_max = std::max(cfg.phys.a1, cfg.phys.a2);
    if (!(a_max < d_alpha))
        fail("subcriticality violated: max(a1, a2) = " + fmt_double(a_max) +
             " is not below D(alpha) = " + fmt_double(d_alpha));

    return cfg;
}

std::string serialize_config(const RunConfig& cfg) {
    std::ostringstream os;
    os << "[run]\n";
    os << "preset = " << cfg.preset << "\n";
    if (!cfg.out_path.empty()) os << "out_path = " << cfg.out_path << "\n";
    os << "seed = " << cfg.seed << "\n";
    os << "[phys]\n";
    os << "alpha = " << fmt_double(cfg.phys.alpha) << "\n";
    os << "a1 = " << fmt_double(cfg.phys.a1) << "\n";
    os << "a2 = " << fmt_double(cfg.phys.a2) << "\n";
    os << "[grid]\n";
    os << "n = " << cfg.n << "\n";
    os << "R = " << fmt_double(cfg.R) << "\n";
    os << "[solver]\n";
    os << "tol = " << fmt_double(cfg.tol) << "\n";
    os << "pohozaev_tol = " << fmt_double(cfg.pohozaev_tol) << "\n";
    os << "max_iter = " << cfg.max_iter << "\n";
    os << "step = " << fmt_double(cfg.step) << "\n";
    os << "[dynamics]\n";
    os << "T = " << fmt_double(cfg.T) << "\n";
    os << "dt0 = " << fmt_double(cfg.dt0) << "\n";
    os << "dt_min = " << fmt_double(cfg.dt_min) << "\n";
    os << "output_stride = " << cfg.output_stride << "\n";
    os << "[experiment]\n";
    os << "delta = " << fmt_double(cfg.delta) << "\n";
    os << "s = " << fmt_double(cfg.s) << "\n";
    if (!cfg.eps_list.empty()) {
        os << "eps_list = ";
        for (size_t i = 0; i < cfg.eps_list.size(); ++i)
            os << (i ? ", " : "") << fmt_double(cfg.eps_list[i]);
        os << "\n";
    }
    return os.str();
}

}  // namespace threewave
