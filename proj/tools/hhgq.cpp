#include "hhgq/app/commands.hpp"
#include "hhgq/errors.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <optional>

using namespace hhgq;
using namespace hhgq::app;

namespace {

struct Common {
    std::string config;
    std::vector<std::string> overrides;
    std::string cache_dir;
    std::string output_dir;
    int jobs = 0;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("-c,--config", c.config, "INI configuration file")->check(CLI::ExistingFile);
    cmd->add_option("--set", c.overrides, "override, section.key=value (repeatable)");
    cmd->add_option("--cache-dir", c.cache_dir, "cache directory (overrides HHG_CACHE_DIR and the config)");
    cmd->add_option("-o,--output-dir", c.output_dir, "output directory");
    cmd->add_option("-j,--jobs", c.jobs, "concurrent CEP points");
}

RunConfig load(const Common& c, bool check = true) {
    std::optional<std::filesystem::path> file;
    if (!c.config.empty()) file = c.config;
    RunConfig cfg = load_config(file, c.overrides, check);
    if (const char* env = std::getenv("HHG_CACHE_DIR"); env && *env) cfg.cache_dir = env;
    if (!c.cache_dir.empty()) cfg.cache_dir = c.cache_dir;
    if (!c.output_dir.empty()) cfg.output_dir = c.output_dir;
    if (c.jobs > 0) cfg.jobs = c.jobs;
    if (check) cfg.validate();
    return cfg;
}

void warn(const std::string& msg) { std::cerr << "warning: " << msg << "\n"; }

int fail(ExitCode code, const std::string& what) {
    std::cerr << "error: " << what << "\n";
    return static_cast<int>(code);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Squeezing and entanglement of the optical field modes in high harmonic generation"};
    app.require_subcommand(1);

    Common scan_opts, wigner_opts, validate_opts, cache_opts;

    auto* scan = app.add_subcommand("scan", "CEP scan of the fundamental-mode squeezing (CSV + SVG)");
    add_common(scan, scan_opts);

    auto* wigner = app.add_subcommand("wigner", "Wigner-function panels of the fundamental mode");
    add_common(wigner, wigner_opts);
    std::vector<std::string> wigner_ceps;
    bool lab_frame = false;
    wigner->add_option("--cep", wigner_ceps, "CEP in rad, pi allowed (repeatable; default wigner.ceps)");
    wigner->add_flag("--lab-frame", lab_frame, "plot around the origin instead of alpha + chi_1");

    auto* validate = app.add_subcommand("validate", "dry-run grid checks");
    add_common(validate, validate_opts);
    bool strict = false;
    validate->add_flag("--strict", strict, "exit nonzero when any check fails");

    auto* cache = app.add_subcommand("cache", "inspect or clear the correlation-table cache");
    add_common(cache, cache_opts);
    cache->require_subcommand(1);
    auto* cache_ls = cache->add_subcommand("ls", "list cache entries");
    auto* cache_rm = cache->add_subcommand("rm", "remove cache entries");
    std::vector<std::string> rm_keys;
    bool rm_all = false;
    cache_rm->add_option("keys", rm_keys, "entry keys");
    cache_rm->add_flag("--all", rm_all, "remove every entry");
    cache_ls->fallthrough();
    cache_rm->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        if (scan->parsed()) {
            const RunConfig cfg = load(scan_opts);
            const ScanReport rep = run_scan(cfg, warn);
            std::cout << "g = " << std::setprecision(12) << rep.g << "\n";
            for (const auto& r : rep.records)
                std::cout << "cep " << std::setprecision(6) << r.cep << "  B " << r.b << "  psi " << r.psi << "  dB "
                          << r.db << (r.cache_hit ? "  (cached)" : "") << "\n";
            std::cout << "wrote " << rep.csv_path.string() << " and " << rep.svg_path.string() << "\n";
        } else if (wigner->parsed()) {
            RunConfig cfg = load(wigner_opts);
            if (lab_frame) cfg.wigner.lab_frame = true;
            std::vector<double> ceps = cfg.wigner.ceps;
            if (!wigner_ceps.empty()) {
                ceps.clear();
                for (const auto& s : wigner_ceps)
                    for (double v : parse_angle_list(s)) ceps.push_back(v);
            }
            for (const auto& f : run_wigner(cfg, ceps, warn)) std::cout << "wrote " << f.svg.string() << "\n";
        } else if (validate->parsed()) {
            const RunConfig cfg = load(validate_opts, false);
            const auto rows = validate_config(cfg);
            print_checks(std::cout, rows);
            const bool failed = std::any_of(rows.begin(), rows.end(),
                                            [](const CheckRow& r) { return r.status == CheckStatus::Fail; });
            if (failed && strict) return static_cast<int>(ExitCode::Config);
        } else if (cache->parsed()) {
            const RunConfig cfg = load(cache_opts, false);
            if (cache_ls->parsed()) {
                const auto entries = cache_list(cfg.cache_dir);
                bool bad = false;
                for (const auto& e : entries) {
                    std::cout << e.key.substr(0, 16) << "  " << std::setw(10) << e.backend << "  cep "
                              << std::setw(10) << std::setprecision(6) << e.cep << "  " << e.rows << "x" << e.cols
                              << "  " << e.bytes << " B  " << (e.ok ? "ok" : "CORRUPT: " + e.problem) << "\n";
                    bad |= !e.ok;
                }
                std::cout << entries.size() << " entries in " << cfg.cache_dir.string() << "\n";
                if (bad) return static_cast<int>(ExitCode::Cache);
            } else {
                if (rm_keys.empty() && !rm_all) return fail(ExitCode::Config, "cache rm needs keys or --all");
                std::cout << "removed " << cache_remove(cfg.cache_dir, rm_keys) << " entries\n";
            }
        }
    } catch (const ConfigError& e) {
        return fail(ExitCode::Config, e.what());
    } catch (const CacheError& e) {
        return fail(ExitCode::Cache, e.what());
    } catch (const NumericError& e) {
        return fail(ExitCode::Numeric, e.what());
    } catch (const std::invalid_argument& e) {
        return fail(ExitCode::Config, e.what());
    } catch (const std::domain_error& e) {
        return fail(ExitCode::Config, e.what());
    } catch (const std::exception& e) {
        return fail(ExitCode::Numeric, e.what());
    }
    return 0;
}
