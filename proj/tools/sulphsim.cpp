// sulphsim command line front end.
//
//   sulphsim run --config <path> [--set key=value ...] [--out <dir>] [--strict]
//   sulphsim mms --study spatial|temporal --levels N
//   sulphsim sweep --manifest <path>
//
// Any `--some-key=value` not listed above is treated as `--set some_key=value`.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "sulphsim/config.hpp"
#include "sulphsim/diagnostics.hpp"
#include "sulphsim/run.hpp"

namespace fs = std::filesystem;
using namespace sulphsim;

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

KeyValues collect_overrides(const std::vector<std::string>& sets, const std::vector<std::string>& extras) {
    KeyValues kv;
    auto add = [&kv](const std::string& item) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw ConfigError({"override '" + item + "' is not key=value"});
        kv.emplace_back(item.substr(0, eq), item.substr(eq + 1));
    };
    for (const std::string& s : sets) add(s);
    for (std::size_t k = 0; k < extras.size(); ++k) {
        std::string item = extras[k];
        if (item.rfind("--", 0) != 0) throw ConfigError({"unexpected argument '" + item + "'"});
        item = item.substr(2);
        if (item.find('=') == std::string::npos) {
            if (k + 1 >= extras.size()) throw ConfigError({"flag '--" + item + "' needs a value"});
            item += "=" + extras[++k];
        }
        const auto eq = item.find('=');
        std::string key = item.substr(0, eq);
        std::replace(key.begin(), key.end(), '-', '_');
        kv.emplace_back(key, item.substr(eq + 1));
    }
    return kv;
}

int report(const RunResult& res) {
    for (const fs::path& p : res.artifacts) std::cout << "wrote " << p.string() << '\n';
    if (res.threshold_step >= 0) std::cout << "edge threshold (c < 0.5 c_init) at step " << res.threshold_step << '\n';
    std::cout << "invariants: " << (res.invariants_passed ? "passed" : "FAILED") << " ("
              << res.violation_count << " violations)\n";
    if (!res.message.empty()) std::cerr << res.message << '\n';
    return res.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sulphsim: marble sulphation with surface rugosity"};
    app.require_subcommand(1);

    auto* run_cmd = app.add_subcommand("run", "run one simulation");
    std::string config_path;
    std::vector<std::string> sets;
    std::string out_dir;
    bool strict = false;
    run_cmd->add_option("--config", config_path, "INI config file");
    run_cmd->add_option("--set", sets, "override key=value (repeatable)");
    run_cmd->add_option("--out", out_dir, "output directory");
    run_cmd->add_flag("--strict", strict, "abort on the first invariant violation");
    run_cmd->allow_extras();

    auto* mms_cmd = app.add_subcommand("mms", "manufactured-solution convergence study");
    std::string study = "spatial";
    int levels = 4;
    std::string mms_out;
    std::string mms_config;
    mms_cmd->add_option("--study", study, "spatial or temporal")->check(CLI::IsMember({"spatial", "temporal"}));
    mms_cmd->add_option("--levels", levels, "number of refinement levels (>= 3)");
    mms_cmd->add_option("--out", mms_out, "also write the table to this CSV file");
    mms_cmd->add_option("--config", mms_config, "INI config supplying physical parameters");

    auto* sweep_cmd = app.add_subcommand("sweep", "run several configurations");
    std::string manifest_path;
    std::string sweep_out;
    sweep_cmd->add_option("--manifest", manifest_path, "sweep manifest (INI with one section per run)")->required();
    sweep_cmd->add_option("--out", sweep_out, "root for run directories and the summary (default: manifest directory)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            const std::string text = config_path.empty() ? std::string() : read_file(config_path);
            KeyValues overrides = collect_overrides(sets, run_cmd->remaining());
            if (!out_dir.empty()) overrides.emplace_back("out_dir", out_dir);
            if (strict) overrides.emplace_back("strict", "true");
            const RunConfig cfg = parse_config(text, overrides);
            return report(run(cfg));
        }
        if (mms_cmd->parsed()) {
            const RunConfig cfg = parse_config(mms_config.empty() ? std::string() : read_file(mms_config));
            MmsOptions opts;
            opts.params = cfg.phys;
            opts.cg_rel_tol = cfg.cg_rel_tol;
            const ConvergenceTable table =
                mms_convergence(study == "spatial" ? MmsStudy::Spatial : MmsStudy::Temporal, levels, opts);
            table.write_csv(std::cout);
            if (!mms_out.empty()) {
                std::ofstream out(mms_out, std::ios::binary);
                table.write_csv(out);
            }
            return 0;
        }
        if (sweep_cmd->parsed()) {
            const fs::path manifest(manifest_path);
            const fs::path root = sweep_out.empty() ? manifest.parent_path() : fs::path(sweep_out);
            const auto entries = parse_sweep_manifest(read_file(manifest), root);
            const auto statuses = sweep(entries, sweep_workers_from_env());
            fs::create_directories(root.empty() ? fs::path(".") : root);
            const fs::path summary = (root.empty() ? fs::path(".") : root) / "sweep_summary.csv";
            std::ofstream out(summary, std::ios::binary);
            write_sweep_summary(out, statuses, entries);
            int failed = 0;
            for (const SweepStatus& s : statuses) {
                std::cout << s.name << ": " << (s.result.exit_code == 0 ? "ok" : "failed") << '\n';
                if (s.result.exit_code != 0) {
                    ++failed;
                    std::cerr << s.name << ": " << s.result.message << '\n';
                }
            }
            std::cout << "wrote " << summary.string() << '\n';
            return failed == 0 ? 0 : 1;
        }
    } catch (const ConfigError& e) {
        std::cerr << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
