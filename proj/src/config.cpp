#include "fingering/config.hpp"

#include "fingering/error.hpp"
#include "fingering/output.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace fingering {

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <class T>
bool parse_number(std::string_view s, T& out) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc{} && ptr == end && !s.empty();
}

using Setter = std::function<std::string(RunConfig&, std::string_view)>;

template <class Get>
Setter real_field(Get get) {
    return [get](RunConfig& c, std::string_view v) -> std::string {
        double x;
        if (!parse_number(v, x)) return "expected a number, got '" + std::string(v) + "'";
        get(c) = x;
        return {};
    };
}

template <class Get>
Setter int_field(Get get) {
    return [get](RunConfig& c, std::string_view v) -> std::string {
        long long x;
        if (!parse_number(v, x)) return "expected an integer, got '" + std::string(v) + "'";
        get(c) = static_cast<std::remove_reference_t<decltype(get(c))>>(x);
        return {};
    };
}

template <class Get>
Setter string_field(Get get) {
    return [get](RunConfig& c, std::string_view v) -> std::string {
        get(c) = std::string(v);
        return {};
    };
}

template <class Get>
Setter bool_field(Get get) {
    return [get](RunConfig& c, std::string_view v) -> std::string {
        if (v == "true" || v == "1" || v == "yes") get(c) = true;
        else if (v == "false" || v == "0" || v == "no") get(c) = false;
        else return "expected true or false, got '" + std::string(v) + "'";
        return {};
    };
}

struct Key {
    std::string name;
    Setter set;
    std::function<std::string(const RunConfig&)> get;
};

const std::vector<Key>& keys() {
    static const std::vector<Key> table = [] {
        std::vector<Key> t;
        auto num = [&](const char* name, auto ref) {
            t.push_back({name, real_field(ref), [ref](const RunConfig& c) {
                             return format_double(ref(const_cast<RunConfig&>(c)));
                         }});
        };
        auto integer = [&](const char* name, auto ref) {
            t.push_back({name, int_field(ref), [ref](const RunConfig& c) {
                             return std::to_string(ref(const_cast<RunConfig&>(c)));
                         }});
        };
        num("Lx", [](RunConfig& c) -> double& { return c.grid.Lx; });
        num("Ly", [](RunConfig& c) -> double& { return c.grid.Ly; });
        integer("nx", [](RunConfig& c) -> int& { return c.grid.nx; });
        integer("ny", [](RunConfig& c) -> int& { return c.grid.ny; });
        num("K", [](RunConfig& c) -> double& { return c.params.K; });
        num("R", [](RunConfig& c) -> double& { return c.params.R; });
        num("alpha", [](RunConfig& c) -> double& { return c.params.alpha; });
        num("k", [](RunConfig& c) -> double& { return c.params.k; });
        num("kappa", [](RunConfig& c) -> double& { return c.params.kappa; });
        num("D", [](RunConfig& c) -> double& { return c.params.D; });
        num("gx", [](RunConfig& c) -> double& { return c.params.g[0]; });
        num("gy", [](RunConfig& c) -> double& { return c.params.g[1]; });
        num("c_lower", [](RunConfig& c) -> double& { return c.ic.c_lower; });
        num("c_upper", [](RunConfig& c) -> double& { return c.ic.c_upper; });
        num("interface_y", [](RunConfig& c) -> double& { return c.ic.interface_y; });
        num("perturbation_amplitude", [](RunConfig& c) -> double& { return c.ic.perturbation_amplitude; });
        num("perturbation_spacing", [](RunConfig& c) -> double& { return c.ic.perturbation_spacing; });
        integer("seed", [](RunConfig& c) -> std::uint64_t& { return c.ic.seed; });
        num("T_end", [](RunConfig& c) -> double& { return c.T_end; });
        num("sample_interval", [](RunConfig& c) -> double& { return c.sample_interval; });
        num("dt_max", [](RunConfig& c) -> double& { return c.dt_max; });
        num("safety", [](RunConfig& c) -> double& { return c.safety; });
        num("pressure_tol", [](RunConfig& c) -> double& { return c.pressure_tol; });
        num("transport_tol", [](RunConfig& c) -> double& { return c.transport_tol; });
        t.push_back({"preconditioner",
                     [](RunConfig& c, std::string_view v) -> std::string {
                         if (v == "multigrid") c.preconditioner = PreconditionerKind::Multigrid;
                         else if (v == "jacobi") c.preconditioner = PreconditionerKind::Jacobi;
                         else return "expected 'multigrid' or 'jacobi', got '" + std::string(v) + "'";
                         return {};
                     },
                     [](const RunConfig& c) -> std::string {
                         return c.preconditioner == PreconditionerKind::Multigrid ? "multigrid" : "jacobi";
                     }});
        integer("pressure_every", [](RunConfig& c) -> int& { return c.pressure_every; });
        auto str = [&](const char* name, auto ref) {
            t.push_back({name, string_field(ref), [ref](const RunConfig& c) { return ref(const_cast<RunConfig&>(c)); }});
        };
        str("timeseries", [](RunConfig& c) -> std::string& { return c.output.timeseries; });
        str("snapshot_dir", [](RunConfig& c) -> std::string& { return c.output.snapshot_dir; });
        integer("snapshot_every", [](RunConfig& c) -> int& { return c.output.snapshot_every; });
        t.push_back({"snapshot_gzip", bool_field([](RunConfig& c) -> bool& { return c.output.snapshot_gzip; }),
                     [](const RunConfig& c) -> std::string { return c.output.snapshot_gzip ? "true" : "false"; }});
        return t;
    }();
    return table;
}

const Key* find_key(std::string_view name) {
    for (const auto& k : keys())
        if (k.name == name) return &k;
    return nullptr;
}

}  // namespace

std::string apply_setting(RunConfig& cfg, std::string_view key, std::string_view value) {
    const Key* k = find_key(key);
    if (!k) return "unknown key '" + std::string(key) + "'";
    return k->set(cfg, trim(value));
}

std::vector<std::string> config_keys() {
    std::vector<std::string> out;
    for (const auto& k : keys()) out.push_back(k.name);
    return out;
}

RunConfig parse_config(std::string_view text) {
    RunConfig cfg;
    std::vector<std::string> problems;
    std::map<std::string, int, std::less<>> seen;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = "line " + std::to_string(line_no) + ": ";
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            problems.push_back(where + "expected 'key = value', got '" + std::string(line) + "'");
            continue;
        }
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (key.empty()) {
            problems.push_back(where + "missing key");
            continue;
        }
        if (auto it = seen.find(key); it != seen.end()) {
            problems.push_back(where + "duplicate key '" + std::string(key) + "' (first set on line " +
                               std::to_string(it->second) + ")");
            continue;
        }
        seen.emplace(std::string(key), line_no);
        if (auto err = apply_setting(cfg, key, value); !err.empty()) problems.push_back(where + err);
    }
    for (auto& v : cfg.violations()) problems.push_back(std::move(v));
    if (!problems.empty()) throw ConfigError(std::move(problems));
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string format_config(const RunConfig& cfg) {
    std::string out;
    for (const auto& k : keys()) {
        const std::string v = k.get(cfg);
        if (v.empty()) continue;
        out += k.name + " = " + v + "\n";
    }
    return out;
}

}  // namespace fingering
