#pragma once

/// @file run.hpp
/// @brief Simulation driver, artifact emission and parameter sweeps.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "sulphsim/bulk.hpp"
#include "sulphsim/config.hpp"
#include "sulphsim/diagnostics.hpp"
#include "sulphsim/io.hpp"

namespace sulphsim {

/// One simulation instance: s = s_init, c = c_init, r from r_init.
/// Every advance() steps once and audits the new state.
class Simulation {
public:
    explicit Simulation(RunConfig cfg);

    void advance();

    int step_index() const { return step_; }
    const RunConfig& config() const { return cfg_; }
    const Grid2D& grid() const { return grid_; }
    const BoundaryTrace& trace() const { return trace_; }
    const FieldState& state() const { return state_; }
    const StepReport& last_step() const { return last_; }
    const InvariantReport& report() const { return report_; }

    /// Exposed-trace values of a nodal field.
    std::vector<double> trace_values(std::span<const double> nodal) const;

    /// Profile rows of the current state: s and c along every configured line,
    /// r along the exposed trace.
    std::vector<ProfileRow> profile_rows() const;

    /// Largest |difference quotient| of c between neighbouring entries of the
    /// same exposed edge.
    double max_edge_gradient() const;

private:
    RunConfig cfg_;
    Grid2D grid_;
    BoundaryTrace trace_;
    FieldState state_;
    StepReport last_{};
    InvariantReport report_;
    AuditOptions audit_;
    int step_ = 0;
};

struct RunResult {
    int exit_code = 0;
    std::string message;
    int steps_done = 0;
    bool invariants_passed = true;
    std::size_t violation_count = 0;
    int threshold_step = -1;            ///< first step with min edge c < 0.5 c_init
    int early_step = -1;                ///< first positive snapshot step
    double early_edge_gradient = 0.0;   ///< max_edge_gradient at early_step
    std::vector<std::filesystem::path> artifacts;
};

/// Runs the configured mode and writes artifacts under cfg.output.out_dir.
/// Never throws for solver or strict-invariant failures; those set exit_code.
RunResult run(const RunConfig& cfg);

struct SweepEntry {
    std::string name;
    RunConfig config;
};

struct SweepStatus {
    std::string name;
    RunResult result;
};

/// Sweep manifest: global `key = value` entries form the base config, each
/// `[name]` section overrides it for one run; out_dir defaults to
/// <out_root>/<name>.
std::vector<SweepEntry> parse_sweep_manifest(const std::string& text,
                                             const std::filesystem::path& out_root);

/// Runs every entry with up to `workers` concurrent runs; results keep input
/// order. Throws ConfigError if two entries share an out_dir.
std::vector<SweepStatus> sweep(const std::vector<SweepEntry>& entries, int workers);

void write_sweep_summary(std::ostream& os, const std::vector<SweepStatus>& statuses,
                         const std::vector<SweepEntry>& entries);

/// SULPHSIM_THREADS, or 1 when unset or invalid.
int sweep_workers_from_env();

const char* code_version();

}  // namespace sulphsim
