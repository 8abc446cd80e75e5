#include "sulphsim/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

namespace sulphsim {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
    return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) {
        std::string t = trim(cur);
        if (!t.empty()) parts.push_back(t);
    }
    return parts;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
    throw ConfigError({"invalid value '" + value + "' for key '" + key + "': expected " + expected});
}

double to_double(const std::string& key, const std::string& value) {
    double v = 0.0;
    const char* first = value.data();
    const char* last = value.data() + value.size();
    if (!value.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
        bad_value(key, value, "a number");
    }
    return v;
}

template <class Int>
Int to_int(const std::string& key, const std::string& value) {
    Int v = 0;
    const char* first = value.data();
    const char* last = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) bad_value(key, value, "an integer");
    return v;
}

bool to_bool(const std::string& key, const std::string& value) {
    const std::string v = lower(value);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    bad_value(key, value, "true or false");
}

std::string profile_lines_text(const std::vector<ProfileLine>& lines) {
    std::string out;
    for (const ProfileLine& line : lines) {
        if (!out.empty()) out += ',';
        if (const auto* v = std::get_if<VerticalLine>(&line)) {
            out += "x1=" + format_double(v->x1);
        } else {
            out += "x2=" + format_double(std::get<HorizontalLine>(line).x2);
        }
    }
    return out;
}

std::vector<ProfileLine> parse_profile_lines(const std::string& key, const std::string& value) {
    std::vector<ProfileLine> lines;
    for (const std::string& item : split(value, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) bad_value(key, value, "entries like x1=0 or x2=0.25");
        const std::string axis = trim(item.substr(0, eq));
        const double coord = to_double(key, trim(item.substr(eq + 1)));
        if (axis == "x1") {
            lines.emplace_back(VerticalLine{coord});
        } else if (axis == "x2") {
            lines.emplace_back(HorizontalLine{coord});
        } else {
            bad_value(key, value, "entries like x1=0 or x2=0.25");
        }
    }
    return lines;
}

const char* edge_name(Edge e) {
    switch (e) {
    case Edge::Left: return "left";
    case Edge::Right: return "right";
    case Edge::Bottom: return "bottom";
    case Edge::Top: return "top";
    }
    return "left";
}

constexpr Edge kEdges[] = {Edge::Left, Edge::Right, Edge::Bottom, Edge::Top};

struct KeySpec {
    std::string key;
    std::function<void(RunConfig&, const std::string&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

template <class Member>
KeySpec number_key(const char* key, Member member) {
    return {key,
            [member](RunConfig& c, const std::string& k, const std::string& v) { member(c) = to_double(k, v); },
            [member](const RunConfig& c) { return format_double(member(c)); }};
}

template <class Int, class Member>
KeySpec int_key(const char* key, Member member) {
    return {key,
            [member](RunConfig& c, const std::string& k, const std::string& v) { member(c) = to_int<Int>(k, v); },
            [member](const RunConfig& c) { return std::to_string(member(c)); }};
}

template <class Member>
KeySpec bool_key(const char* key, Member member) {
    return {key,
            [member](RunConfig& c, const std::string& k, const std::string& v) { member(c) = to_bool(k, v); },
            [member](const RunConfig& c) { return std::string(member(c) ? "true" : "false"); }};
}

const std::vector<KeySpec>& key_specs() {
    static const std::vector<KeySpec> specs = [] {
        std::vector<KeySpec> s;
        s.push_back(number_key("A", [](auto& c) -> auto& { return c.phys.A; }));
        s.push_back(number_key("B", [](auto& c) -> auto& { return c.phys.B; }));
        s.push_back(number_key("lambda", [](auto& c) -> auto& { return c.phys.lambda; }));
        s.push_back(number_key("C0", [](auto& c) -> auto& { return c.phys.C0; }));
        s.push_back(number_key("S0", [](auto& c) -> auto& { return c.phys.S0; }));
        s.push_back(number_key("sbar", [](auto& c) -> auto& { return c.phys.sbar; }));
        s.push_back(number_key("g", [](auto& c) -> auto& { return c.phys.g; }));
        s.push_back(number_key("R0", [](auto& c) -> auto& { return c.phys.R0; }));
        s.push_back({"nu_law",
                     [](RunConfig& c, const std::string& k, const std::string& v) {
                         const std::string l = lower(v);
                         if (l == "linear") c.phys.nu_law = NuLaw::Linear;
                         else if (l == "parabolic") c.phys.nu_law = NuLaw::Parabolic;
                         else bad_value(k, v, "linear or parabolic");
                     },
                     [](const RunConfig& c) { return std::string(to_string(c.phys.nu_law)); }});
        s.push_back(number_key("nu0", [](auto& c) -> auto& { return c.phys.nu0; }));
        s.push_back(number_key("nul", [](auto& c) -> auto& { return c.phys.nul; }));
        s.push_back(number_key("rl", [](auto& c) -> auto& { return c.phys.rl; }));
        s.push_back(number_key("weibull_m", [](auto& c) -> auto& { return c.phys.weibull_m; }));
        s.push_back(number_key("weibull_r0", [](auto& c) -> auto& { return c.phys.weibull_r0; }));
        s.push_back({"constraint_mode",
                     [](RunConfig& c, const std::string& k, const std::string& v) {
                         const std::string l = lower(v);
                         if (l == "free") c.phys.constraint_mode = ConstraintMode::Free;
                         else if (l == "box") c.phys.constraint_mode = ConstraintMode::Box;
                         else bad_value(k, v, "free or box");
                     },
                     [](const RunConfig& c) { return std::string(to_string(c.phys.constraint_mode)); }});
        s.push_back({"psi_coeffs",
                     [](RunConfig& c, const std::string& k, const std::string& v) {
                         const auto parts = split(v, ',');
                         if (parts.empty() || parts.size() > 4) bad_value(k, v, "1 to 4 comma-separated numbers");
                         c.phys.psi = {0.0, 0.0, 0.0, 0.0};
                         for (std::size_t i = 0; i < parts.size(); ++i) c.phys.psi[i] = to_double(k, parts[i]);
                     },
                     [](const RunConfig& c) {
                         std::string out;
                         for (double x : c.phys.psi) out += (out.empty() ? "" : ",") + format_double(x);
                         return out;
                     }});
        s.push_back(number_key("forcing", [](auto& c) -> auto& { return c.phys.forcing; }));
        s.push_back(int_key<int>("nx", [](auto& c) -> auto& { return c.nx; }));
        s.push_back(int_key<int>("ny", [](auto& c) -> auto& { return c.ny; }));
        s.push_back({"exposed_edges",
                     [](RunConfig& c, const std::string& k, const std::string& v) {
                         EdgeTags tags = EdgeTags::all_isolated();
                         const std::string l = lower(v);
                         if (l != "none") {
                             for (const std::string& name : split(l, ',')) {
                                 bool found = false;
                                 for (Edge e : kEdges) {
                                     if (name == edge_name(e)) {
                                         tags[e] = EdgeTag::Exposed;
                                         found = true;
                                     }
                                 }
                                 if (!found) bad_value(k, v, "a list of left,right,bottom,top or none");
                             }
                         }
                         c.edges = tags;
                     },
                     [](const RunConfig& c) {
                         std::string out;
                         for (Edge e : kEdges) {
                             if (c.edges[e] == EdgeTag::Exposed) out += (out.empty() ? "" : ",") + std::string(edge_name(e));
                         }
                         return out.empty() ? std::string("none") : out;
                     }});
        s.push_back(number_key("dt", [](auto& c) -> auto& { return c.dt; }));
        s.push_back(int_key<int>("n_steps", [](auto& c) -> auto& { return c.n_steps; }));
        s.push_back(int_key<int>("picard_iters", [](auto& c) -> auto& { return c.picard_iters; }));
        s.push_back(int_key<std::uint64_t>("seed", [](auto& c) -> auto& { return c.seed; }));
        s.push_back({"r_init",
                     [](RunConfig& c, const std::string& k, const std::string& v) {
                         const std::string l = lower(v);
                         if (l == "constant") c.r_init.mode = RugosityInit::Mode::Constant;
                         else if (l == "piecewise") c.r_init.mode = RugosityInit::Mode::Piecewise;
                         else if (l == "weibull") c.r_init.mode = RugosityInit::Mode::WeibullRandom;
                         else bad_value(k, v, "constant, piecewise or weibull");
                     },
                     [](const RunConfig& c) { return std::string(to_string(c.r_init.mode)); }});
        s.push_back(number_key("r_init_value", [](auto& c) -> auto& { return c.r_init.value; }));
        s.push_back(number_key("r_init_lo_factor", [](auto& c) -> auto& { return c.r_init.lo_factor; }));
        s.push_back(number_key("r_init_hi_factor", [](auto& c) -> auto& { return c.r_init.hi_factor; }));
        s.push_back(number_key("r_init_split_x2", [](auto& c) -> auto& { return c.r_init.split_x2; }));
        s.push_back(number_key("c_init", [](auto& c) -> auto& { return c.c_init; }));
        s.push_back(number_key("s_init", [](auto& c) -> auto& { return c.s_init; }));
        s.push_back({"profile_lines",
                     [](RunConfig& c, const std::string& k, const std::string& v) {
                         c.output.profile_lines = parse_profile_lines(k, v);
                     },
                     [](const RunConfig& c) { return profile_lines_text(c.output.profile_lines); }});
        s.push_back({"snapshot_steps",
                     [](RunConfig& c, const std::string& k, const std::string& v) {
                         std::vector<int> steps;
                         for (const std::string& item : split(v, ',')) steps.push_back(to_int<int>(k, item));
                         std::sort(steps.begin(), steps.end());
                         steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
                         c.output.snapshot_steps = steps;
                     },
                     [](const RunConfig& c) {
                         std::string out;
                         for (int x : c.output.snapshot_steps) out += (out.empty() ? "" : ",") + std::to_string(x);
                         return out;
                     }});
        s.push_back({"formats",
                     [](RunConfig& c, const std::string& k, const std::string& v) {
                         c.output.csv = false;
                         c.output.vtk = false;
                         for (const std::string& f : split(lower(v), ',')) {
                             if (f == "csv") c.output.csv = true;
                             else if (f == "vtk") c.output.vtk = true;
                             else if (f != "none") bad_value(k, v, "a list of csv,vtk or none");
                         }
                     },
                     [](const RunConfig& c) {
                         if (c.output.csv && c.output.vtk) return std::string("csv,vtk");
                         if (c.output.csv) return std::string("csv");
                         if (c.output.vtk) return std::string("vtk");
                         return std::string("none");
                     }});
        s.push_back({"out_dir",
                     [](RunConfig& c, const std::string&, const std::string& v) { c.output.out_dir = v; },
                     [](const RunConfig& c) { return c.output.out_dir; }});
        s.push_back({"mode",
                     [](RunConfig& c, const std::string& k, const std::string& v) {
                         const std::string l = lower(v);
                         if (l == "simulate") c.mode = RunMode::Simulate;
                         else if (l == "mms_spatial") c.mode = RunMode::MmsSpatial;
                         else if (l == "mms_temporal") c.mode = RunMode::MmsTemporal;
                         else if (l == "audit_only") c.mode = RunMode::AuditOnly;
                         else bad_value(k, v, "simulate, mms_spatial, mms_temporal or audit_only");
                     },
                     [](const RunConfig& c) { return std::string(to_string(c.mode)); }});
        s.push_back(bool_key("validate_global_bound", [](auto& c) -> auto& { return c.validate_global_bound; }));
        s.push_back(bool_key("strict", [](auto& c) -> auto& { return c.strict; }));
        s.push_back(number_key("cg_rel_tol", [](auto& c) -> auto& { return c.cg_rel_tol; }));
        s.push_back(int_key<int>("mms_levels", [](auto& c) -> auto& { return c.mms_levels; }));
        return s;
    }();
    return specs;
}

const KeySpec* find_key(const std::string& key) {
    for (const KeySpec& spec : key_specs()) {
        if (spec.key == key) return &spec;
    }
    return nullptr;
}

}  // namespace

const char* to_string(RunMode mode) {
    switch (mode) {
    case RunMode::Simulate: return "simulate";
    case RunMode::MmsSpatial: return "mms_spatial";
    case RunMode::MmsTemporal: return "mms_temporal";
    case RunMode::AuditOnly: return "audit_only";
    }
    return "simulate";
}

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error([&] {
          std::string msg = "configuration error";
          for (const std::string& p : problems) msg += "\n  " + p;
          return msg;
      }()),
      problems_(std::move(problems)) {}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

IniDocument parse_ini(const std::string& text) {
    IniDocument doc;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    std::vector<std::string> problems;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) {
                problems.push_back("line " + std::to_string(line_no) + ": malformed section header");
                continue;
            }
            doc.sections.push_back({trim(line.substr(1, line.size() - 2)), {}});
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos || trim(line.substr(0, eq)).empty()) {
            problems.push_back("line " + std::to_string(line_no) + ": expected 'key = value'");
            continue;
        }
        auto entry = std::make_pair(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        if (doc.sections.empty()) {
            doc.global.push_back(std::move(entry));
        } else {
            doc.sections.back().entries.push_back(std::move(entry));
        }
    }
    if (!problems.empty()) throw ConfigError(problems);
    return doc;
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const KeySpec& spec : key_specs()) k.push_back(spec.key);
        return k;
    }();
    return keys;
}

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
    const KeySpec* spec = find_key(key);
    if (spec == nullptr) throw ConfigError({"unknown key '" + key + "'"});
    spec->set(cfg, key, value);
    cfg.r_init.base_r0 = cfg.phys.weibull_r0;
}

std::string format_setting(const RunConfig& cfg, const std::string& key) {
    const KeySpec* spec = find_key(key);
    if (spec == nullptr) throw ConfigError({"unknown key '" + key + "'"});
    return spec->get(cfg);
}

std::vector<std::string> validate(const RunConfig& cfg) {
    std::vector<std::string> errors = validate(cfg.phys, cfg.validate_global_bound);
    auto require = [&errors](bool ok, std::string what) {
        if (!ok) errors.push_back(std::move(what));
    };
    require(cfg.nx >= 3, "(grid): nx>=3");
    require(cfg.ny >= 3, "(grid): ny>=3");
    require(cfg.dt > 0.0 && std::isfinite(cfg.dt), "(time): dt>0");
    require(cfg.n_steps >= 1, "(time): n_steps>=1");
    require(cfg.picard_iters >= 1, "(coupling): picard_iters>=1");
    require(cfg.c_init >= 0.0 && cfg.c_init <= cfg.phys.C0, "(A4): 0<=c_init<=C0");
    require(cfg.s_init >= 0.0, "(A6): s_init>=0");
    if (cfg.validate_global_bound) require(cfg.s_init <= cfg.phys.S0, "(A9): s_init<=S0");
    require(cfg.r_init.value >= 0.0, "(A5): r_init_value>=0");
    require(cfg.r_init.lo_factor >= 0.0 && cfg.r_init.hi_factor >= 0.0, "(A5): r_init factors>=0");
    require(cfg.r_init.split_x2 > 0.0 && cfg.r_init.split_x2 < 1.0, "(rugosity): 0<r_init_split_x2<1");
    require(cfg.cg_rel_tol > 0.0 && cfg.cg_rel_tol < 1.0, "(solver): 0<cg_rel_tol<1");
    require(cfg.mms_levels >= 3, "(mms): mms_levels>=3");
    if (cfg.nx >= 3 && cfg.ny >= 3) {
        const Grid2D grid(cfg.nx, cfg.ny, cfg.edges);
        for (const ProfileLine& line : cfg.output.profile_lines) {
            require(line_index(grid, line) >= 0,
                    "(output): profile line " + profile_lines_text({line}) + " is not grid-aligned");
        }
    }
    for (int s : cfg.output.snapshot_steps) {
        require(s >= 0 && s <= cfg.n_steps,
                "(output): snapshot step " + std::to_string(s) + " outside [0, n_steps]");
    }
    return errors;
}

RunConfig parse_config(const std::string& text, const KeyValues& overrides) {
    const IniDocument doc = parse_ini(text);
    if (!doc.sections.empty()) {
        throw ConfigError({"section '[" + doc.sections.front().name + "]' not allowed in a run config"});
    }
    RunConfig cfg;
    std::vector<std::string> problems;
    auto apply_all = [&](const KeyValues& kvs) {
        for (const auto& [key, value] : kvs) {
            try {
                apply_setting(cfg, key, value);
            } catch (const ConfigError& e) {
                problems.insert(problems.end(), e.problems().begin(), e.problems().end());
            }
        }
    };
    apply_all(doc.global);
    apply_all(overrides);
    if (!problems.empty()) throw ConfigError(problems);
    const auto violations = validate(cfg);
    if (!violations.empty()) throw ConfigError(violations);
    return cfg;
}

std::string to_ini(const RunConfig& cfg) {
    std::string out;
    for (const KeySpec& spec : key_specs()) out += spec.key + " = " + spec.get(cfg) + "\n";
    return out;
}

bool RunConfig::operator==(const RunConfig& other) const {
    return to_ini(*this) == to_ini(other);
}

}  // namespace sulphsim
