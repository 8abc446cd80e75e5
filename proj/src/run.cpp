#include "sulphsim/run.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "sulphsim/rng.hpp"
#include "sulphsim/surface.hpp"

#ifndef SULPHSIM_VERSION
#define SULPHSIM_VERSION "0.0.0"
#endif

namespace sulphsim {

namespace fs = std::filesystem;

const char* code_version() {
    return SULPHSIM_VERSION;
}

namespace {

RunConfig checked(RunConfig cfg) {
    cfg.r_init.base_r0 = cfg.phys.weibull_r0;
    const auto problems = validate(cfg);
    if (!problems.empty()) throw ConfigError(problems);
    return cfg;
}

FieldState initial_state(const RunConfig& cfg, const Grid2D& grid, const BoundaryTrace& trace) {
    FieldState st;
    st.s.assign(grid.size(), cfg.s_init);
    st.c.assign(grid.size(), cfg.c_init);
    Rng rng(cfg.seed);
    st.r = init_rugosity(trace, cfg.r_init, cfg.phys, rng);
    st.xi.assign(trace.size(), 0.0);
    return st;
}

void write_text(const fs::path& path, const std::string& text, std::vector<fs::path>& artifacts) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    artifacts.push_back(path);
}

std::string invariants_csv(const InvariantReport& report) {
    std::ostringstream os;
    os << "step,t,s_min,s_max,c_min,c_max,r_min,r_max,balance_residual,balance_relative\n";
    for (const StepSummary& s : report.steps()) {
        os << s.step << ',' << format_double(s.t) << ',' << format_double(s.s_min) << ','
           << format_double(s.s_max) << ',' << format_double(s.c_min) << ',' << format_double(s.c_max)
           << ',' << format_double(s.r_min) << ',' << format_double(s.r_max) << ','
           << format_double(s.balance_residual) << ',' << format_double(s.balance_relative) << '\n';
    }
    return os.str();
}

std::string manifest_text(const RunConfig& cfg, const RunResult& res) {
    std::ostringstream os;
    os << "# sulphsim run manifest\n";
    os << "# code_version: " << code_version() << '\n';
    os << "# seed: " << cfg.seed << '\n';
    os << "# steps_done: " << res.steps_done << '\n';
    os << "# invariants: " << (res.invariants_passed ? "passed" : "failed") << ", violations "
       << res.violation_count << '\n';
    os << "# exit_code: " << res.exit_code << '\n';
    os << to_ini(cfg);
    return os.str();
}

std::string step_tag(int step) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%06d", step);
    return buf;
}

}  // namespace

Simulation::Simulation(RunConfig cfg)
    : cfg_(checked(std::move(cfg))),
      grid_(cfg_.nx, cfg_.ny, cfg_.edges),
      trace_(exposed_trace(grid_)),
      state_(initial_state(cfg_, grid_, trace_)) {
    audit_.check_ceiling = cfg_.validate_global_bound;
    audit_.strict = cfg_.strict;
    audit_step(report_, 0, state_, cfg_.phys, nullptr, audit_);
}

void Simulation::advance() {
    const FieldState previous = state_;
    StepOptions opts{cfg_.picard_iters, cfg_.cg_rel_tol};
    state_ = step(state_, cfg_.dt, grid_, trace_, cfg_.phys, opts, &last_);
    // keep t an exact multiple of dt
    ++step_;
    state_.t = step_ * cfg_.dt;
    audit_step(report_, step_, state_, cfg_.phys, &last_.balance, audit_, &previous);
}

std::vector<double> Simulation::trace_values(std::span<const double> nodal) const {
    std::vector<double> out(trace_.size());
    for (std::size_t e = 0; e < trace_.size(); ++e) out[e] = nodal[trace_.nodes[e]];
    return out;
}

std::vector<ProfileRow> Simulation::profile_rows() const {
    std::vector<ProfileRow> rows;
    for (const ProfileLine& line : cfg_.output.profile_lines) {
        const bool vertical = std::holds_alternative<VerticalLine>(line);
        const double fixed = vertical ? std::get<VerticalLine>(line).x1 : std::get<HorizontalLine>(line).x2;
        for (const auto& [name, field] : {std::pair{"s", &state_.s}, std::pair{"c", &state_.c}}) {
            for (const auto& [coord, value] : extract_profile(*field, grid_, line)) {
                rows.push_back({state_.t, vertical ? fixed : coord, vertical ? coord : fixed, name, value});
            }
        }
    }
    for (std::size_t e = 0; e < trace_.size(); ++e) {
        rows.push_back({state_.t, trace_.x1[e], trace_.x2[e], "r", state_.r[e]});
    }
    return rows;
}

double Simulation::max_edge_gradient() const {
    double worst = 0.0;
    for (std::size_t e = 1; e < trace_.size(); ++e) {
        if (trace_.edge[e] != trace_.edge[e - 1]) continue;
        const double dist = std::hypot(trace_.x1[e] - trace_.x1[e - 1], trace_.x2[e] - trace_.x2[e - 1]);
        const double dc = state_.c[trace_.nodes[e]] - state_.c[trace_.nodes[e - 1]];
        worst = std::max(worst, std::abs(dc) / dist);
    }
    return worst;
}

RunResult run(const RunConfig& input) {
    RunResult res;
    RunConfig cfg;
    try {
        cfg = checked(input);
    } catch (const ConfigError& e) {
        res.exit_code = 2;
        res.message = e.what();
        return res;
    }
    const fs::path out_dir = cfg.output.out_dir;
    try {
        fs::create_directories(out_dir);
    } catch (const fs::filesystem_error& e) {
        res.exit_code = 2;
        res.message = e.what();
        return res;
    }

    try {
        if (cfg.mode == RunMode::MmsSpatial || cfg.mode == RunMode::MmsTemporal) {
            MmsOptions opts;
            opts.params = cfg.phys;
            opts.cg_rel_tol = cfg.cg_rel_tol;
            const MmsStudy study = cfg.mode == RunMode::MmsSpatial ? MmsStudy::Spatial : MmsStudy::Temporal;
            const ConvergenceTable table = mms_convergence(study, cfg.mms_levels, opts);
            std::ostringstream csv;
            table.write_csv(csv);
            write_text(out_dir / (std::string(to_string(cfg.mode)) + ".csv"), csv.str(), res.artifacts);
            write_text(out_dir / "manifest.ini", manifest_text(cfg, res), res.artifacts);
            return res;
        }

        Simulation sim(cfg);
        const std::set<int> snapshots(cfg.output.snapshot_steps.begin(), cfg.output.snapshot_steps.end());
        const bool emit = cfg.mode == RunMode::Simulate;
        std::vector<ProfileRow> rows;
        auto take_snapshot = [&] {
            const int n = sim.step_index();
            if (n > 0 && res.early_step < 0) {
                res.early_step = n;
                res.early_edge_gradient = sim.max_edge_gradient();
            }
            if (!emit) return;
            if (cfg.output.csv) {
                auto now = sim.profile_rows();
                rows.insert(rows.end(), now.begin(), now.end());
            }
            if (cfg.output.vtk) {
                std::ostringstream vtk;
                write_vtk(vtk, sim.grid(), sim.state().s, sim.state().c,
                          "sulphsim step " + std::to_string(n) + " t " + format_double(sim.state().t));
                write_text(out_dir / ("fields_" + step_tag(n) + ".vtk"), vtk.str(), res.artifacts);
            }
        };
        auto check_threshold = [&] {
            if (res.threshold_step >= 0 || sim.trace().empty()) return;
            const auto edge_c = sim.trace_values(sim.state().c);
            if (*std::min_element(edge_c.begin(), edge_c.end()) < 0.5 * cfg.c_init) {
                res.threshold_step = sim.step_index();
            }
        };

        if (snapshots.count(0)) take_snapshot();
        check_threshold();
        try {
            for (int n = 1; n <= cfg.n_steps; ++n) {
                sim.advance();
                res.steps_done = n;
                check_threshold();
                if (snapshots.count(n)) take_snapshot();
            }
        } catch (const SolverError& e) {
            res.exit_code = 1;
            res.message = "step " + std::to_string(sim.step_index() + 1) + ": " + e.what();
        } catch (const InvariantViolation& e) {
            res.exit_code = 1;
            res.message = std::string("strict mode: ") + e.what();
        }
        res.invariants_passed = sim.report().passed();
        res.violation_count = sim.report().violations().size();

        if (emit && cfg.output.csv) {
            std::ostringstream csv;
            write_profile_csv(csv, std::move(rows));
            write_text(out_dir / "profiles.csv", csv.str(), res.artifacts);
        }
        write_text(out_dir / "invariants.csv", invariants_csv(sim.report()), res.artifacts);
        write_text(out_dir / "manifest.ini", manifest_text(cfg, res), res.artifacts);
    } catch (const std::exception& e) {
        res.exit_code = 1;
        res.message = e.what();
    }
    return res;
}

std::vector<SweepEntry> parse_sweep_manifest(const std::string& text, const fs::path& out_root) {
    const IniDocument doc = parse_ini(text);
    std::vector<SweepEntry> entries;
    std::vector<std::string> problems;
    for (const IniSection& section : doc.sections) {
        KeyValues kvs = doc.global;
        kvs.insert(kvs.end(), section.entries.begin(), section.entries.end());
        const bool has_out = std::any_of(kvs.begin(), kvs.end(), [](const auto& kv) { return kv.first == "out_dir"; });
        if (!has_out) kvs.emplace_back("out_dir", (out_root / section.name).string());
        try {
            entries.push_back({section.name, parse_config("", kvs)});
        } catch (const ConfigError& e) {
            for (const std::string& p : e.problems()) problems.push_back("[" + section.name + "] " + p);
        }
    }
    if (!problems.empty()) throw ConfigError(problems);
    return entries;
}

std::vector<SweepStatus> sweep(const std::vector<SweepEntry>& entries, int workers) {
    std::set<std::string> dirs;
    for (const SweepEntry& e : entries) {
        const std::string dir = fs::path(e.config.output.out_dir).lexically_normal().string();
        if (!dirs.insert(dir).second) throw ConfigError({"sweep: out_dir '" + dir + "' used by more than one run"});
    }
    std::vector<SweepStatus> statuses(entries.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < entries.size(); k = next++) {
            statuses[k].name = entries[k].name;
            statuses[k].result = run(entries[k].config);
        }
    };
    const int count = std::max(1, std::min<int>(workers, static_cast<int>(entries.size())));
    std::vector<std::thread> pool;
    for (int w = 1; w < count; ++w) pool.emplace_back(worker);
    worker();
    for (std::thread& t : pool) t.join();
    return statuses;
}

void write_sweep_summary(std::ostream& os, const std::vector<SweepStatus>& statuses,
                         const std::vector<SweepEntry>& entries) {
    os << "run,status,exit_code,nu_law,threshold_step,threshold_time,early_step,early_max_edge_dc_dx2,message\n";
    for (std::size_t k = 0; k < statuses.size(); ++k) {
        const RunResult& r = statuses[k].result;
        const RunConfig& cfg = entries[k].config;
        std::string msg = r.message;
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        std::replace(msg.begin(), msg.end(), ',', ';');
        os << statuses[k].name << ',' << (r.exit_code == 0 ? "ok" : "failed") << ',' << r.exit_code << ','
           << to_string(cfg.phys.nu_law) << ',' << r.threshold_step << ','
           << (r.threshold_step >= 0 ? format_double(r.threshold_step * cfg.dt) : std::string("nan")) << ','
           << r.early_step << ',' << format_double(r.early_edge_gradient) << ',' << msg << '\n';
    }
}

int sweep_workers_from_env() {
    const char* env = std::getenv("SULPHSIM_THREADS");
    if (env == nullptr) return 1;
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) return 1;
    return static_cast<int>(std::min(v, 256L));
}

}  // namespace sulphsim
