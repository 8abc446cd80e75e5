#pragma once

/// @file config.hpp
/// @brief Run configuration, INI parsing and manifest emission.
///
/// Config files are INI-style: `key = value` per line, `#` starts a comment,
/// `[name]` opens a section (sections are only meaningful in sweep manifests).
/// Keys are the RunConfig field names; see `config_keys()`.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sulphsim/grid.hpp"
#include "sulphsim/model.hpp"
#include "sulphsim/surface.hpp"

namespace sulphsim {

enum class RunMode { Simulate, MmsSpatial, MmsTemporal, AuditOnly };

const char* to_string(RunMode mode);

struct OutputOptions {
    std::vector<ProfileLine> profile_lines{VerticalLine{0.0}, HorizontalLine{0.25}, HorizontalLine{0.75}};
    std::vector<int> snapshot_steps{5, 15, 50, 100};
    bool csv = true;
    bool vtk = false;
    std::string out_dir = "sulphsim_out";
};

struct RunConfig {
    PhysParams phys{};
    int nx = 65;
    int ny = 65;
    EdgeTags edges = EdgeTags::left_exposed();
    double dt = 1.0 / 5000.0;
    int n_steps = 500;
    int picard_iters = 2;
    std::uint64_t seed = 1;
    RugosityInit r_init{};  ///< base_r0 mirrors phys.weibull_r0
    double c_init = 1.0;    ///< uniform initial calcite density
    double s_init = 0.0;    ///< uniform initial SO2 concentration
    OutputOptions output{};
    RunMode mode = RunMode::Simulate;
    bool validate_global_bound = true;
    bool strict = false;
    double cg_rel_tol = 1e-10;
    int mms_levels = 4;

    bool operator==(const RunConfig&) const;
};

/// Key/value problems found while parsing or validating. `what()` joins them.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const { return problems_; }

private:
    std::vector<std::string> problems_;
};

using KeyValues = std::vector<std::pair<std::string, std::string>>;

struct IniSection {
    std::string name;
    KeyValues entries;
};

/// Entries before the first section header land in `global`.
struct IniDocument {
    KeyValues global;
    std::vector<IniSection> sections;
};

/// Throws ConfigError on malformed lines.
IniDocument parse_ini(const std::string& text);

/// Every recognized key, in manifest order.
const std::vector<std::string>& config_keys();

/// Applies one key; throws ConfigError naming unknown keys or bad values.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

/// Lists every violated constraint; empty when the config is valid.
std::vector<std::string> validate(const RunConfig& cfg);

/// Defaults, overlaid by the document, overlaid by `overrides`; validated.
RunConfig parse_config(const std::string& text, const KeyValues& overrides = {});

/// Resolved config in the INI dialect; parse_config(to_ini(c)) == c.
std::string to_ini(const RunConfig& cfg);

/// Value of one key as written by to_ini.
std::string format_setting(const RunConfig& cfg, const std::string& key);

/// Shortest text that parses back to the same double (17 significant digits).
std::string format_double(double v);

}  // namespace sulphsim
