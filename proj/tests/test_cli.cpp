#include "doctest.h"

#include "hhgq/app/commands.hpp"
#include "hhgq/app/config.hpp"
#include "hhgq/errors.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <sys/wait.h>

using namespace hhgq;
using namespace hhgq::app;
using std::numbers::pi;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("hhgq_cli_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

// Small oscillator scan: cheap, and the backend has a closed-form answer.
RunConfig oscillator_config(const fs::path& root) {
    RunConfig c = load_config(std::nullopt, {"backend.kind=oscillator", "oscillator.n_x=512", "oscillator.dt=0.05",
                                             "coupling.mode=absolute", "coupling.g=1e-4",
                                             "scan.cep_count=8"});
    c.output_dir = root / "out";
    c.cache_dir = root / "cache";
    return c;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(HHGQ_EXE) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("configuration file and overrides") {
    TempDir tmp("cfg");
    const fs::path ini = tmp.path / "run.ini";
    spit(ini,
         "[pulse]\nintensity_wcm2 = 2e14\nwavelength_nm = 1000\nn_cycles = 3\n"
         "[backend]\nkind = sfa   ; tdse | sfa | oscillator\nanchor_stride = 10  # coarse\n"
         "[scan]\ncep_values = 0, pi/2, pi\n");
    const RunConfig c = load_config(ini);
    CHECK(c.backend.pulse.intensity_wcm2 == 2e14);
    CHECK(c.backend.pulse.omega == doctest::Approx(wavelength_to_omega(1000.0)));
    CHECK(c.backend.pulse.n_cycles == 3);
    CHECK(c.backend.backend == Backend::Sfa);
    CHECK(c.backend.anchor_stride == 10);
    REQUIRE(c.cep_values.size() == 3);
    CHECK(c.cep_values[2] == doctest::Approx(pi));

    // later layers win
    const RunConfig o = load_config(ini, {"pulse.n_cycles=4", "backend.kind=tdse"});
    CHECK(o.backend.pulse.n_cycles == 4);
    CHECK(o.backend.backend == Backend::Tdse);
    CHECK(o.backend.pulse.intensity_wcm2 == 2e14);

    // single CEP and the explicit frequency
    const RunConfig single = load_config(std::nullopt, {"pulse.cep_rad=pi/3", "pulse.omega_au=0.06"});
    REQUIRE(single.cep_values.size() == 1);
    CHECK(single.cep_values[0] == doctest::Approx(pi / 3));
    CHECK(single.backend.pulse.omega == 0.06);

    // defaults
    const RunConfig d = default_config();
    CHECK(d.backend.pulse.intensity_wcm2 == 4e14);
    CHECK(d.backend.pulse.n_cycles == 2);
    CHECK(d.cep_values.size() == 16);
}

TEST_CASE("configuration errors") {
    CHECK_THROWS_AS(load_config(std::nullopt, {"pulse.colour=red"}), ConfigError);
    CHECK_THROWS_AS(load_config(std::nullopt, {"laser.intensity_wcm2=1e14"}), ConfigError);
    CHECK_THROWS_AS(load_config(std::nullopt, {"pulse.n_cycles"}), ConfigError);
    CHECK_THROWS_AS(load_config(std::nullopt, {"pulse.n_cycles=two"}), ConfigError);
    CHECK_THROWS_AS(load_config(std::nullopt, {"scan.cep_values="}), ConfigError);
    CHECK_THROWS_AS(load_config(std::nullopt, {"pulse.wavelength_nm=800", "pulse.omega=0.05"}), ConfigError);
    CHECK_THROWS_AS(load_config(std::nullopt, {"pulse.omega_au=0.06", "pulse.omega=0.05"}), ConfigError);
    CHECK_THROWS_AS(load_config(std::nullopt, {"pulse.cep_rad=0", "scan.cep_count=4"}), ConfigError);
    CHECK_THROWS_AS(load_config(std::nullopt, {"pulse.cep_rad=quarter"}), ConfigError);
    CHECK_THROWS_AS(load_config(std::nullopt, {"backend.kind=magic"}), ConfigError);
    CHECK_THROWS_AS(load_config(std::nullopt, {"coupling.mode=absolute", "coupling.g=-1"}), ConfigError);
    CHECK_THROWS_AS(load_config(std::nullopt, {"grid.n_x=1000"}), ConfigError);
    // the report path defers validation
    CHECK_NOTHROW(load_config(std::nullopt, {"grid.n_x=1000"}, false));

    TempDir tmp("cfgerr");
    const fs::path ini = tmp.path / "bad.ini";
    spit(ini, "[pulse]\nintensity_wcm2 = 1e14\n[mystery]\nx = 1\n");
    CHECK_THROWS_AS(load_config(ini), ConfigError);
}

TEST_CASE("angle lists") {
    const auto v = parse_angle_list("0, pi/2, 3*pi/4, -pi, 1.25, 2pi");
    REQUIRE(v.size() == 6);
    CHECK(v[0] == 0.0);
    CHECK(v[1] == doctest::Approx(pi / 2));
    CHECK(v[2] == doctest::Approx(3 * pi / 4));
    CHECK(v[3] == doctest::Approx(-pi));
    CHECK(v[4] == 1.25);
    CHECK(v[5] == doctest::Approx(2 * pi));
    CHECK(parse_angle_list(" , ").empty());
    CHECK_THROWS_AS(parse_angle_list("0, banana"), ConfigError);
}

TEST_CASE("cache key covers every physics input") {
    using Mut = std::function<void(BackendConfig&)>;
    const std::vector<std::pair<std::string, Mut>> muts{
        {"backend", [](BackendConfig& b) { b.backend = Backend::Sfa; }},
        {"intensity", [](BackendConfig& b) { b.pulse.intensity_wcm2 *= 1.001; }},
        {"omega", [](BackendConfig& b) { b.pulse.omega *= 1.001; }},
        {"n_cycles", [](BackendConfig& b) { b.pulse.n_cycles = 3; }},
        {"t_start", [](BackendConfig& b) { b.pulse.t_start = 1.0; }},
        {"x_min", [](BackendConfig& b) { b.grid.x_min -= 1; }},
        {"x_max", [](BackendConfig& b) { b.grid.x_max += 1; }},
        {"n_x", [](BackendConfig& b) { b.grid.n_x *= 2; }},
        {"dt", [](BackendConfig& b) { b.grid.dt *= 0.5; }},
        {"absorber_width", [](BackendConfig& b) { b.grid.absorber_width += 1; }},
        {"absorber_strength", [](BackendConfig& b) { b.grid.absorber_strength *= 2; }},
        {"soft_core_a", [](BackendConfig& b) { b.soft_core_a = 1.0; }},
        {"anchor_stride", [](BackendConfig& b) { b.anchor_stride = 10; }},
        {"interpolation", [](BackendConfig& b) { b.interpolation = AnchorInterpolation::Linear; }},
        {"tail_cycles", [](BackendConfig& b) { b.tail_cycles = 1.0; }},
        {"ground.tolerance", [](BackendConfig& b) { b.ground.tolerance *= 0.1; }},
        {"ground.max_iterations", [](BackendConfig& b) { b.ground.max_iterations += 1; }},
        {"ground.filter_width", [](BackendConfig& b) { b.ground.filter_width += 1; }},
    };
    BackendConfig base = default_config().backend;
    std::set<std::string> keys{base.cache_key(0.0), base.cache_key(0.1)};
    CHECK(keys.size() == 2);
    for (const auto& [name, f] : muts) {
        BackendConfig b = base;
        f(b);
        CAPTURE(name);
        CHECK(keys.insert(b.cache_key(0.0)).second);
    }

    // sfa inputs, on the sfa backend
    BackendConfig s = base;
    s.backend = Backend::Sfa;
    const std::vector<std::pair<std::string, Mut>> sfa_muts{
        {"ip", [](BackendConfig& b) { b.sfa.ip = 0.6; }},
        {"matrix_element", [](BackendConfig& b) { b.sfa.matrix_element = MatrixElementKind::Gaussian; }},
        {"v_min", [](BackendConfig& b) { b.sfa.v_min = -5.0; }},
        {"v_max", [](BackendConfig& b) { b.sfa.v_max = 5.0; }},
        {"n_v", [](BackendConfig& b) { b.sfa.n_v = 8192; }},
        {"sfa.dt", [](BackendConfig& b) { b.sfa.dt = 0.05; }},
        {"sfa.tail", [](BackendConfig& b) { b.sfa.tail_cycles = 1.0; }},
    };
    std::set<std::string> skeys{s.cache_key(0.0)};
    for (const auto& [name, f] : sfa_muts) {
        BackendConfig b = s;
        f(b);
        CAPTURE(name);
        CHECK(skeys.insert(b.cache_key(0.0)).second);
    }

    BackendConfig o = base;
    o.backend = Backend::Oscillator;
    BackendConfig o2 = o;
    o2.oscillator.omega0 = 0.6;
    CHECK(o.cache_key(0.0) != o2.cache_key(0.0));

    // worker count is not physics
    BackendConfig w = base;
    w.workers = 8;
    CHECK(w.cache_key(0.0) == base.cache_key(0.0));
}

TEST_CASE("validate reports") {
    auto status_of = [](const std::vector<CheckRow>& rows, const std::string& name) {
        for (const auto& r : rows)
            if (r.name == name) return r;
        FAIL("missing check " << name);
        return CheckRow{};
    };
    const auto ok = validate_config(default_config());
    for (const auto& r : ok) {
        CAPTURE(r.name);
        CAPTURE(r.detail);
        CHECK(r.status != CheckStatus::Fail);
    }

    const auto coarse = validate_config(load_config(std::nullopt, {"grid.dt=1.0"}, false));
    const CheckRow ny = status_of(coarse, "nyquist");
    CHECK(ny.status == CheckStatus::Fail);
    CHECK(ny.detail.find("harmonics >= 31") != std::string::npos);

    const auto wide = validate_config(load_config(std::nullopt, {"grid.absorber_width=150"}, false));
    CHECK(std::any_of(wide.begin(), wide.end(), [](const CheckRow& r) { return r.status == CheckStatus::Fail; }));

    const auto sparse = validate_config(load_config(std::nullopt, {"backend.anchor_stride=100", "spectral.n_modes=5"}, false));
    CHECK(status_of(sparse, "anchor density").status == CheckStatus::Warn);

    CHECK(nyquist_harmonic(default_config().backend.pulse, 0.5, 0.05) > 400);
}

TEST_CASE("oscillator scan is flat and reproducible") {
    TempDir a("osc_a"), b("osc_b");
    RunConfig ca = oscillator_config(a.path);
    RunConfig cb = oscillator_config(b.path);
    cb.jobs = 4;
    const ScanReport ra = run_scan(ca);
    const ScanReport rb = run_scan(cb);
    REQUIRE(ra.records.size() == 8);
    for (const auto& r : ra.records) {
        CHECK(std::abs(r.b - ra.records[0].b) <= 1e-3 * std::abs(ra.records[0].b));
        CHECK(std::abs(r.db - ra.records[0].db) <= 1e-3 * ra.records[0].db);
    }
    // byte-identical regardless of job count and cache location
    const std::string csv_a = slurp(ra.csv_path);
    CHECK(csv_a == slurp(rb.csv_path));
    CHECK(slurp(ra.svg_path) == slurp(rb.svg_path));

    // a warm rerun reads the cache and writes the same bytes
    const ScanReport again = run_scan(ca);
    for (const auto& r : again.records) CHECK(r.cache_hit);
    CHECK(slurp(again.csv_path) == csv_a);

    // no temporary files left behind
    for (const auto& e : fs::directory_iterator(ca.output_dir))
        CHECK(e.path().filename().string().find(".tmp") == std::string::npos);

    const auto parsed = parse_scan_csv(csv_a);
    REQUIRE(parsed.size() == ra.records.size());
    for (size_t i = 0; i < parsed.size(); ++i) {
        CHECK(parsed[i].cep == doctest::Approx(ra.records[i].cep).epsilon(1e-10));
        CHECK(parsed[i].b == doctest::Approx(ra.records[i].b).epsilon(1e-10));
        CHECK(parsed[i].psi == doctest::Approx(ra.records[i].psi).epsilon(1e-10));
        CHECK(parsed[i].db == doctest::Approx(ra.records[i].db).epsilon(1e-10));
    }
    CHECK(scan_csv(parsed) == csv_a);
    CHECK(scan_svg(parsed).find("<svg") == 0);
}

TEST_CASE("empty CEP list fails before any computation") {
    TempDir tmp("empty");
    RunConfig c = oscillator_config(tmp.path);
    c.cep_values.clear();
    CHECK_THROWS_AS(run_scan(c), ConfigError);
    CHECK(!fs::exists(c.cache_dir));
    CHECK(!fs::exists(c.output_dir / "scan.csv"));
}

TEST_CASE("corrupt cache entries are recomputed") {
    TempDir tmp("corrupt");
    const RunConfig c = oscillator_config(tmp.path);
    const BackendResult first = compute_backend(c.backend, 0.3, c.cache_dir);
    CHECK(!first.cache_hit);
    const BackendResult hit = compute_backend(c.backend, 0.3, c.cache_dir);
    CHECK(hit.cache_hit);
    CHECK(hit.table.c_connected == first.table.c_connected);

    const std::string key = c.backend.cache_key(0.3);
    const fs::path bin = c.cache_dir / (key + ".bin");
    REQUIRE(fs::exists(bin));
    {
        std::fstream f(bin, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(static_cast<std::streamoff>(fs::file_size(bin) / 2));
        const char junk[4] = {'\x5a', '\x5a', '\x5a', '\x5a'};
        f.write(junk, 4);
    }
    auto entries = cache_list(c.cache_dir);
    REQUIRE(entries.size() == 1);
    CHECK(!entries[0].ok);

    const BackendResult redo = compute_backend(c.backend, 0.3, c.cache_dir);
    CHECK(!redo.cache_hit);
    REQUIRE(!redo.warnings.empty());
    CHECK(redo.warnings[0].find("recomputing") != std::string::npos);
    CHECK(redo.table.c_connected == first.table.c_connected);
    entries = cache_list(c.cache_dir);
    CHECK(entries[0].ok);
    CHECK(compute_backend(c.backend, 0.3, c.cache_dir).cache_hit);

    // truncated payload
    fs::resize_file(bin, 16);
    CHECK(!compute_backend(c.backend, 0.3, c.cache_dir).cache_hit);
}

TEST_CASE("cache listing and removal") {
    TempDir tmp("cachels");
    const RunConfig c = oscillator_config(tmp.path);
    for (double cep : {0.0, 1.0, 2.0}) compute_backend(c.backend, cep, c.cache_dir);
    auto entries = cache_list(c.cache_dir);
    REQUIRE(entries.size() == 3);
    for (const auto& e : entries) {
        CHECK(e.ok);
        CHECK(e.backend == "oscillator");
        CHECK(e.bytes > 0);
    }
    CHECK(cache_remove(c.cache_dir, {c.backend.cache_key(1.0)}) == 1);
    CHECK(cache_list(c.cache_dir).size() == 2);
    CHECK(cache_remove(c.cache_dir, {}) == 2);
    CHECK(cache_list(c.cache_dir).empty());
    CHECK(cache_list(tmp.path / "absent").empty());
}

TEST_CASE("zero coupling gives a round coherent state") {
    RunConfig c = default_config();
    SqueezeRecord rec;
    rec.cep = 0.7;
    rec.b = 0.0;
    rec.psi = 0.0;
    rec.g = 0.0;
    rec.n_at = c.coupling.n_at;
    const WignerPanel p = make_wigner_panel(c, rec);
    CHECK(std::abs(p.ellipse.major_var - p.ellipse.minor_var) <= 1e-9);
    CHECK((p.state.cov - 0.5 * Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() <= 1e-15);
    // the grid is rotationally symmetric about its center
    const auto& w = p.grid.w;
    const Index n = w.rows();
    CHECK((w - w.transpose()).cwiseAbs().maxCoeff() <= 1e-9 * w.maxCoeff());
    CHECK((w - w.colwise().reverse()).cwiseAbs().maxCoeff() <= 1e-9 * w.maxCoeff());
    CHECK(w(n / 2, n / 2) == doctest::Approx(1 / pi).epsilon(1e-12));
}

TEST_CASE("squeezed state carries the displacements") {
    SqueezeRecord rec;
    rec.cep = 0.0;
    rec.b = 0.8;
    rec.psi = 0.6;
    rec.g = 1.0;
    rec.n_at = 1.0;
    rec.chi1 = cdouble(0.3, -0.4);
    const cdouble alpha(1.5, 2.0);
    const cv::GaussianState<double> st = fundamental_mode_state(rec, alpha);
    const cdouble beta = alpha + rec.chi1;
    CHECK(st.mean[0] == doctest::Approx(std::sqrt(2.0) * beta.real()).epsilon(1e-14));
    CHECK(st.mean[1] == doctest::Approx(std::sqrt(2.0) * beta.imag()).epsilon(1e-14));
    const auto e = cv::ellipse(st);
    CHECK(std::abs(std::remainder(e.angle - rec.psi, pi)) <= 1e-9);
    CHECK(e.axis_ratio() == doctest::Approx(1.0 + 2.0 * 0.8).epsilon(1e-9));

    // alpha reproduces the carrier: i g (alpha e^{-i w t} - c.c.) = E0 cos(w t + cep)
    const PulseParams pulse;
    for (double cep : {0.0, 1.3}) {
        const cdouble a = laser_amplitude(pulse, cep, 0.02);
        for (double wt : {0.0, 0.9, 2.4}) {
            const double field = (cdouble(0, 0.02) * (a * std::exp(cdouble(0, -wt)) - std::conj(a) * std::exp(cdouble(0, wt)))).real();
            CHECK(field == doctest::Approx(pulse.amplitude() * std::cos(wt + cep)).epsilon(1e-12));
        }
    }
}

TEST_CASE("wigner command writes panels") {
    TempDir tmp("wig");
    RunConfig c = oscillator_config(tmp.path);
    c.wigner.n_points = 41;
    const auto files = run_wigner(c, {0.0, pi / 2});
    REQUIRE(files.size() == 2);
    for (const auto& f : files) {
        CHECK(fs::exists(f.svg));
        const std::string csv = slurp(f.csv);
        CHECK(csv.rfind("re_beta,im_beta,w\n", 0) == 0);
        CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 41 * 41);
        const auto j = nlohmann::json::parse(slurp(f.json));
        CHECK(j.contains("convention"));
        CHECK(j.at("cov").size() == 2);
        CHECK(j.at("frame") == "displaced");
    }
    CHECK_THROWS_AS(run_wigner(c, {}), ConfigError);
}

TEST_CASE("command line exit codes") {
    TempDir tmp("exe");
    const std::string base = " --cache-dir " + (tmp.path / "cache").string() + " -o " + (tmp.path / "out").string();
    const std::string osc = " --set backend.kind=oscillator --set oscillator.n_x=512 --set oscillator.dt=0.05"
                            " --set coupling.mode=absolute --set coupling.g=1e-4";
    CHECK(run_cli("validate") == 0);
    CHECK(run_cli("validate --set grid.dt=1.0") == 0);
    CHECK(run_cli("validate --strict --set grid.dt=1.0") == 2);
    CHECK(run_cli("scan --set scan.cep_values=" + base) == 2);
    CHECK(run_cli("scan --set pulse.colour=red" + base) == 2);
    CHECK(run_cli("scan --set grid.n_x=1000" + base) == 2);
    CHECK(run_cli("frobnicate") != 0);
    CHECK(run_cli("scan" + base + osc + " --set scan.cep_values=0,1") == 0);
    CHECK(fs::exists(tmp.path / "out" / "scan.csv"));
    CHECK(run_cli("cache ls" + base) == 0);
    CHECK(run_cli("cache rm" + base) == 2);

    // a ground state that cannot converge is a numerical failure
    CHECK(run_cli("scan" + base +
                  " --set coupling.mode=absolute --set coupling.g=1e-4 --set ground.max_iterations=1"
                  " --set scan.cep_values=0") == 3);

    // corrupt entry: listing reports it
    for (const auto& e : fs::directory_iterator(tmp.path / "cache"))
        if (e.path().extension() == ".bin") fs::resize_file(e.path(), 8);
    CHECK(run_cli("cache ls" + base) == 4);
    CHECK(run_cli("cache rm --all" + base) == 0);
    CHECK(cache_list(tmp.path / "cache").empty());
}

TEST_CASE("HHG_CACHE_DIR selects the cache") {
    TempDir tmp("env");
    const fs::path env_dir = tmp.path / "from_env", flag_dir = tmp.path / "from_flag";
    const std::string args = " -o " + (tmp.path / "out").string() +
                             " --set backend.kind=oscillator --set oscillator.n_x=512 --set oscillator.dt=0.05"
                             " --set coupling.mode=absolute --set coupling.g=1e-4 --set scan.cep_values=0";
    CHECK(run_cli("scan" + args + " --set output.cache_dir=" + (tmp.path / "from_cfg").string()) == 0);
    ::setenv("HHG_CACHE_DIR", env_dir.c_str(), 1);
    CHECK(run_cli("scan" + args + " --set output.cache_dir=" + (tmp.path / "from_cfg2").string()) == 0);
    CHECK(run_cli("scan" + args + " --cache-dir " + flag_dir.string()) == 0);
    ::unsetenv("HHG_CACHE_DIR");
    CHECK(cache_list(tmp.path / "from_cfg").size() == 1);
    CHECK(!fs::exists(tmp.path / "from_cfg2"));
    CHECK(cache_list(env_dir).size() == 1);
    CHECK(cache_list(flag_dir).size() == 1);
}

}
