#include "hhgq/scan.hpp"

#include "hhgq/errors.hpp"
#include "hhgq/hash.hpp"

#include <atomic>
#include <chrono>
#include <exception>
#include <stdexcept>
#include <thread>

namespace hhgq {

namespace {

constexpr int kCacheFormat = 1;

nlohmann::json ground_json(const GroundStateOptions& g) {
    return {{"tolerance", g.tolerance},
            {"max_iterations", g.max_iterations},
            {"tau_schedule", g.tau_schedule},
            {"filter_width", g.filter_width}};
}

}  // namespace

std::string to_string(Backend b) {
    switch (b) {
        case Backend::Tdse: return "tdse";
        case Backend::Sfa: return "sfa";
        case Backend::Oscillator: return "oscillator";
    }
    return "?";
}

Backend backend_from_string(const std::string& s) {
    if (s == "tdse") return Backend::Tdse;
    if (s == "sfa") return Backend::Sfa;
    if (s == "oscillator") return Backend::Oscillator;
    throw std::invalid_argument("unknown backend '" + s + "' (expected tdse, sfa or oscillator)");
}

void BackendConfig::validate() const {
    pulse.validate();
    if (anchor_stride < 1) throw std::invalid_argument("anchor stride must be >= 1");
    if (tail_cycles < 0.0) throw std::invalid_argument("tail_cycles must be non-negative");
    if (workers < 1) throw std::invalid_argument("workers must be >= 1");
    switch (backend) {
        case Backend::Tdse:
            grid.validate();
            PotentialSpec::soft_core(soft_core_a).validate();
            break;
        case Backend::Oscillator:
            oscillator.grid.validate();
            PotentialSpec::harmonic(oscillator.omega0).validate();
            break;
        case Backend::Sfa: sfa.validate(); break;
    }
}

PotentialSpec BackendConfig::potential() const {
    return backend == Backend::Oscillator ? PotentialSpec::harmonic(oscillator.omega0)
                                          : PotentialSpec::soft_core(soft_core_a);
}

nlohmann::json BackendConfig::physics_json(double cep) const {
    PulseParams p = pulse;
    p.cep = cep;
    nlohmann::json j = {{"format", kCacheFormat},
                        {"backend", to_string(backend)},
                        {"pulse", to_json(p)},
                        {"anchor_stride", anchor_stride},
                        {"interpolation", to_string(interpolation)}};
    switch (backend) {
        case Backend::Tdse:
        case Backend::Oscillator:
            j["potential"] = potential().to_json();
            j["grid"] = (backend == Backend::Tdse ? grid : oscillator.grid).to_json();
            j["tail_cycles"] = tail_cycles;
            j["ground"] = ground_json(ground);
            break;
        case Backend::Sfa: j["sfa"] = sfa.to_json(); break;
    }
    return j;
}

std::string BackendConfig::cache_key(double cep) const { return sha256_hex(physics_json(cep).dump()); }

BackendResult compute_backend(const BackendConfig& cfg, double cep,
                              const std::optional<std::filesystem::path>& cache_dir) {
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();
    BackendResult out;
    const std::string key = cfg.cache_key(cep);
    std::filesystem::path base;
    if (cache_dir) {
        base = *cache_dir / key;
        if (std::filesystem::exists(base.string() + ".meta.json")) {
            try {
                LoadedTable lt = read_table(base);
                if (lt.table.meta.value("cache_key", std::string{}) != key)
                    throw CacheError("cache entry " + key + " belongs to a different input");
                out.table = std::move(lt.table);
                out.dipole = std::move(lt.dipole);
                out.cache_hit = true;
            } catch (const CacheError& e) {
                out.warnings.push_back(std::string("cache entry unusable, recomputing: ") + e.what());
            }
        }
    }

    if (!out.cache_hit) {
        PulseParams p = cfg.pulse;
        p.cep = cep;
        switch (cfg.backend) {
            case Backend::Tdse:
            case Backend::Oscillator: {
                TdseOptions o;
                o.tail_cycles = cfg.tail_cycles;
                o.workers = cfg.workers;
                o.interpolation = cfg.interpolation;
                o.ground = cfg.ground;
                const GridSpec& g = cfg.backend == Backend::Tdse ? cfg.grid : cfg.oscillator.grid;
                TdseRun run = two_time_correlation(cfg.potential(), p, g, cfg.anchor_stride, o);
                if (run.absorbed_norm > 0.1)
                    out.warnings.push_back("absorbed norm " + std::to_string(run.absorbed_norm) +
                                           " exceeds 0.1; the box may be too small");
                out.table = std::move(run.table);
                out.dipole = std::move(run.dipole);
                if (cfg.backend == Backend::Oscillator) out.table.meta["backend"] = "oscillator";
                break;
            }
            case Backend::Sfa:
                out.table = sfa_connected_correlation(cfg.sfa, p, cfg.anchor_stride, cfg.interpolation);
                out.dipole = sfa_dipole_mean(cfg.sfa, p);
                break;
        }
        out.table.meta["cache_key"] = key;
        out.table.meta["physics"] = cfg.physics_json(cep);
        if (cache_dir) {
            try {
                std::filesystem::create_directories(*cache_dir);
                write_table(base, out.table, out.dipole);
            } catch (const std::filesystem::filesystem_error& e) {
                throw CacheError(std::string("cannot write cache entry: ") + e.what());
            }
        }
    }
    out.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

std::vector<ScanPoint> cep_scan(const BackendConfig& cfg, const std::vector<double>& ceps, const ScanOptions& opts) {
    if (ceps.empty()) throw std::invalid_argument("cep list is empty");
    if (opts.n_modes < 1) throw std::invalid_argument("n_modes must be >= 1");
    cfg.validate();
    std::vector<ScanPoint> out(ceps.size());
    std::vector<std::vector<std::string>> warnings(ceps.size());
    std::vector<std::exception_ptr> errors(ceps.size());
    const Eigen::VectorXd omegas = harmonic_frequencies(cfg.pulse.omega, opts.n_modes);

    auto job = [&](size_t i) {
        BackendResult res = compute_backend(cfg, ceps[i], opts.cache_dir);
        warnings[i] = std::move(res.warnings);
        ScanPoint& pt = out[i];
        pt.moments = d_correlation_matrix(res.table, omegas);
        if (pt.moments.coarse_anchor_warning)
            warnings[i].push_back("fewer than 8 anchors per period of the fastest probe frequency");
        pt.moments.chi = chi_displacements(res.dipole, omegas, opts.g);
        pt.record = squeeze_record(pt.moments.m_matrix(0, 0), opts.g, opts.n_at, ceps[i]);
        pt.record.chi1 = pt.moments.chi[0];
        pt.record.backend = to_string(cfg.backend);
        pt.record.runtime_s = res.runtime_s;
        pt.record.cache_hit = res.cache_hit;
    };

    const size_t n_jobs = std::min<size_t>(static_cast<size_t>(std::max(1, opts.jobs)), ceps.size());
    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (size_t i = next++; i < ceps.size(); i = next++) {
            try {
                job(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (n_jobs == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (size_t w = 0; w < n_jobs; ++w) pool.emplace_back(worker);
    }
    for (size_t i = 0; i < ceps.size(); ++i) {
        if (opts.warn)
            for (const auto& w : warnings[i]) opts.warn("cep " + std::to_string(ceps[i]) + ": " + w);
        if (errors[i]) std::rethrow_exception(errors[i]);
    }
    return out;
}

double normalized_coupling(const BackendConfig& cfg, double n_at, const std::optional<std::filesystem::path>& cache_dir) {
    if (!(n_at > 0.0)) throw std::invalid_argument("normalized coupling needs n_at > 0");
    BackendConfig ref = cfg;
    ref.backend = Backend::Sfa;
    const BackendResult res = compute_backend(ref, 0.0, cache_dir);
    const Eigen::VectorXd omegas = harmonic_frequencies(cfg.pulse.omega, 1);
    const double b = std::abs(d_correlation_matrix(res.table, omegas).m_matrix(0, 0));
    if (!(b > 0.0)) throw NumericError("reference B vanishes; cannot normalize the coupling");
    return 1.0 / std::sqrt(b * n_at);
}

}  // namespace hhgq
