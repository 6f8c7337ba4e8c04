#include "hhgq/app/commands.hpp"

#include "hhgq/errors.hpp"
#include "hhgq/hash.hpp"

#include <boost/algorithm/string.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

namespace hhgq::app {

namespace fs = std::filesystem;
using cv::GaussianState;

namespace {

constexpr double kPi = std::numbers::pi;

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::string num12(double v) { return fmt("%.12g", v); }

// cyclic hue for psi in [0, pi)
std::string psi_color(double psi) {
    const double h = std::fmod(std::max(psi, 0.0) / kPi, 1.0) * 6.0;
    const double x = 1.0 - std::abs(std::fmod(h, 2.0) - 1.0);
    double r = 0, g = 0, b = 0;
    switch (static_cast<int>(h)) {
        case 0: r = 1, g = x; break;
        case 1: r = x, g = 1; break;
        case 2: g = 1, b = x; break;
        case 3: g = x, b = 1; break;
        case 4: r = x, b = 1; break;
        default: r = 1, b = x; break;
    }
    char buf[16];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(40 + 200 * r), static_cast<int>(40 + 200 * g),
                  static_cast<int>(40 + 200 * b));
    return buf;
}

// dark blue -> teal -> yellow
std::string heat_color(double t) {
    t = std::clamp(t, 0.0, 1.0);
    static const double stops[3][3] = {{0.12, 0.05, 0.30}, {0.13, 0.57, 0.55}, {0.99, 0.91, 0.14}};
    const double u = t * 2.0;
    const int i = std::min(static_cast<int>(u), 1);
    const double f = u - i;
    char buf[16];
    int c[3];
    for (int k = 0; k < 3; ++k) c[k] = static_cast<int>(255.0 * (stops[i][k] * (1 - f) + stops[i + 1][k] * f));
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c[0], c[1], c[2]);
    return buf;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else if (c == '&') out += "&amp;";
        else out += c;
    }
    return out;
}

std::vector<double> nice_ticks(double lo, double hi, int target) {
    std::vector<double> t;
    if (!(hi > lo)) return {lo};
    const double raw = (hi - lo) / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (raw <= m * mag) {
            step = m * mag;
            break;
        }
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) t.push_back(v);
    return t;
}

std::string panel_stem(double cep) { return "wigner_cep" + fmt("%.4f", cep); }

}  // namespace

void write_text_atomic(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << text;
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

double resolve_coupling(const RunConfig& cfg, const Warn& warn) {
    if (cfg.coupling.mode == CouplingMode::Absolute) return cfg.coupling.g;
    const double g = normalized_coupling(cfg.backend, cfg.coupling.n_at, cfg.cache_dir);
    if (warn && cfg.backend.backend != Backend::Sfa)
        warn("coupling normalized on the sfa backend at cep = 0 (g = " + num12(g) + ")");
    return g;
}

// ---------------------------------------------------------------------------
// scan

std::string scan_csv(const std::vector<SqueezeRecord>& records) {
    std::string out = "cep_rad,B_au,psi_rad,r,squeezing_db,backend,g,n_at\n";
    for (const auto& r : records)
        out += num12(r.cep) + "," + num12(r.b) + "," + num12(r.psi) + "," + num12(r.r) + "," + num12(r.db) + "," +
               r.backend + "," + num12(r.g) + "," + num12(r.n_at) + "\n";
    return out;
}

std::vector<SqueezeRecord> parse_scan_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "cep_rad,B_au,psi_rad,r,squeezing_db,backend,g,n_at")
        throw std::invalid_argument("not a scan CSV");
    std::vector<SqueezeRecord> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        boost::algorithm::split(f, line, boost::is_any_of(","));
        if (f.size() != 8) throw std::invalid_argument("scan CSV row has " + std::to_string(f.size()) + " fields");
        SqueezeRecord r;
        r.cep = std::stod(f[0]);
        r.b = std::stod(f[1]);
        r.psi = std::stod(f[2]);
        r.r = std::stod(f[3]);
        r.db = std::stod(f[4]);
        r.backend = f[5];
        r.g = std::stod(f[6]);
        r.n_at = std::stod(f[7]);
        out.push_back(r);
    }
    return out;
}

std::string scan_svg(const std::vector<SqueezeRecord>& records) {
    const double w = 760, h = 440, left = 70, right = 130, top = 40, bottom = 60;
    const double pw = w - left - right, ph = h - top - bottom;
    double x0 = 0.0, x1 = 2.0 * kPi, ymax = 0.0;
    for (const auto& r : records) {
        x0 = std::min(x0, r.cep);
        x1 = std::max(x1, r.cep);
        ymax = std::max(ymax, r.db);
    }
    if (!(ymax > 0.0)) ymax = 1.0;
    ymax *= 1.1;
    auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
    auto py = [&](double y) { return top + ph - y / ymax * ph; };

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s << "<text x=\"" << left << "\" y=\"24\" font-size=\"14\">Fundamental-mode squeezing vs CEP";
    if (!records.empty()) s << " (" << xml_escape(records.front().backend) << ")";
    s << "</text>\n";
    s << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double t : nice_ticks(x0, x1, 8)) {
        s << "<line x1=\"" << px(t) << "\" y1=\"" << top + ph << "\" x2=\"" << px(t) << "\" y2=\"" << top + ph + 5
          << "\" stroke=\"black\"/>";
        s << "<text x=\"" << px(t) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">" << fmt("%g", t)
          << "</text>\n";
    }
    for (double t : nice_ticks(0.0, ymax, 6)) {
        s << "<line x1=\"" << left - 5 << "\" y1=\"" << py(t) << "\" x2=\"" << left << "\" y2=\"" << py(t)
          << "\" stroke=\"black\"/>";
        s << "<text x=\"" << left - 8 << "\" y=\"" << py(t) + 4 << "\" text-anchor=\"end\">" << fmt("%g", t)
          << "</text>\n";
    }
    s << "<text x=\"" << left + pw / 2 << "\" y=\"" << h - 15 << "\" text-anchor=\"middle\">CEP (rad)</text>\n";
    s << "<text transform=\"translate(18," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">squeezing (dB)</text>\n";
    if (!records.empty()) {
        s << "<polyline fill=\"none\" stroke=\"#888888\" stroke-width=\"1.5\" points=\"";
        for (const auto& r : records) s << px(r.cep) << "," << py(r.db) << " ";
        s << "\"/>\n";
        for (const auto& r : records)
            s << "<circle cx=\"" << px(r.cep) << "\" cy=\"" << py(r.db) << "\" r=\"5\" fill=\"" << psi_color(r.psi)
              << "\" stroke=\"black\" stroke-width=\"0.5\"><title>cep " << num12(r.cep) << ", dB " << num12(r.db)
              << ", psi " << num12(r.psi) << "</title></circle>\n";
    }
    // psi color bar
    const double bx = w - right + 40, by = top, bh = ph;
    for (int i = 0; i < 64; ++i) {
        const double psi = kPi * (i + 0.5) / 64.0;
        s << "<rect x=\"" << bx << "\" y=\"" << by + bh * (63 - i) / 64.0 << "\" width=\"18\" height=\""
          << bh / 64.0 + 0.5 << "\" fill=\"" << psi_color(psi) << "\"/>";
    }
    s << "\n<text x=\"" << bx + 24 << "\" y=\"" << by + bh << "\">0</text>";
    s << "<text x=\"" << bx + 24 << "\" y=\"" << by + bh / 2 + 4 << "\">pi/2</text>";
    s << "<text x=\"" << bx + 24 << "\" y=\"" << by + 10 << "\">pi</text>";
    s << "<text x=\"" << bx - 4 << "\" y=\"" << by - 8 << "\">psi (rad)</text>\n";
    s << "</svg>\n";
    return s.str();
}

ScanReport run_scan(const RunConfig& cfg, const Warn& warn) {
    cfg.validate();
    ScanReport rep;
    rep.g = resolve_coupling(cfg, warn);
    ScanOptions o;
    o.g = rep.g;
    o.n_at = cfg.coupling.n_at;
    o.n_modes = cfg.n_modes;
    o.jobs = cfg.jobs;
    o.cache_dir = cfg.cache_dir;
    o.warn = warn;
    const std::vector<ScanPoint> pts = cep_scan(cfg.backend, cfg.cep_values, o);

    nlohmann::json detail = nlohmann::json::array();
    for (const auto& p : pts) {
        rep.records.push_back(p.record);
        nlohmann::json d = {{"cep", p.record.cep},
                            {"b", p.record.b},
                            {"psi", p.record.psi},
                            {"r", p.record.r},
                            {"r_eff", p.record.effective_r()},
                            {"m11", {p.record.m11.real(), p.record.m11.imag()}},
                            {"chi1", {p.record.chi1.real(), p.record.chi1.imag()}},
                            {"coarse_anchor_warning", p.moments.coarse_anchor_warning},
                            {"n_min_eigenvalue", min_eigenvalue_hermitian(p.moments.n_matrix)}};
        if (cfg.n_modes > 1) {
            auto mat = [](const Eigen::MatrixXcd& m) {
                nlohmann::json rows = nlohmann::json::array();
                for (Index i = 0; i < m.rows(); ++i) {
                    nlohmann::json row = nlohmann::json::array();
                    for (Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
                    rows.push_back(row);
                }
                return rows;
            };
            d["m_matrix"] = mat(p.moments.m_matrix);
            d["n_matrix"] = mat(p.moments.n_matrix);
        }
        detail.push_back(d);
    }

    const std::string csv = scan_csv(rep.records);
    rep.csv_path = cfg.output_dir / "scan.csv";
    rep.svg_path = cfg.output_dir / "scan.svg";
    write_text_atomic(rep.csv_path, csv);
    write_text_atomic(rep.svg_path, scan_svg(parse_scan_csv(csv)));
    nlohmann::json meta = {{"g", rep.g}, {"config", cfg.to_json()}, {"points", detail}};
    write_text_atomic(cfg.output_dir / "scan.json", meta.dump(1) + "\n");
    return rep;
}

// ---------------------------------------------------------------------------
// wigner

cdouble laser_amplitude(const PulseParams& pulse, double cep, double g) {
    if (!(g > 0.0)) return 0.0;
    return cdouble(0.0, -1.0) * (pulse.amplitude() / (2.0 * g)) * std::exp(cdouble(0.0, -cep));
}

GaussianState<double> fundamental_mode_state(const SqueezeRecord& rec, cdouble alpha) {
    GaussianState<double> st = GaussianState<double>::vacuum(1);
    const cv::BilinearForm<double> form = cv::single_mode_form<double>(rec.b, rec.psi, rec.g);
    st = cv::apply_gaussian_filter(st, form, 0.5 * rec.n_at);
    st = cv::displace(st, 0, rec.chi1);
    st = cv::displace(st, 0, alpha);
    return st;
}

WignerPanel make_wigner_panel(const RunConfig& cfg, const SqueezeRecord& rec) {
    WignerPanel p;
    p.record = rec;
    p.alpha = laser_amplitude(cfg.backend.pulse, rec.cep, rec.g);
    p.state = fundamental_mode_state(rec, p.alpha);
    p.lambda = std::abs(rec.r);
    p.center = cfg.wigner.lab_frame ? cdouble(0.0) : p.alpha + rec.chi1;
    p.grid = cv::wigner_grid(p.state, p.center, cfg.wigner.half_width, cfg.wigner.n_points);
    p.ellipse = cv::ellipse(p.state);
    return p;
}

std::string wigner_csv(const cv::WignerGrid<double>& grid) {
    std::string out = "re_beta,im_beta,w\n";
    for (Index i = 0; i < grid.im_beta.size(); ++i)
        for (Index j = 0; j < grid.re_beta.size(); ++j)
            out += num12(grid.re_beta[j]) + "," + num12(grid.im_beta[i]) + "," + num12(grid.w(i, j)) + "\n";
    return out;
}

std::string wigner_svg(const cv::WignerGrid<double>& grid, const GaussianState<double>& state,
                       const std::string& caption) {
    const double size = 480, left = 60, top = 60;
    const Index n = grid.re_beta.size();
    const Index step = std::max<Index>(1, (n + 100) / 101);
    const double re0 = grid.re_beta[0], re1 = grid.re_beta[n - 1];
    const double im0 = grid.im_beta[0], im1 = grid.im_beta[grid.im_beta.size() - 1];
    auto px = [&](double re) { return left + (re - re0) / (re1 - re0) * size; };
    auto py = [&](double im) { return top + size - (im - im0) / (im1 - im0) * size; };
    const double wmax = std::max(grid.w.maxCoeff(), 1e-300);

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size + left + 40 << "\" height=\"" << size + top + 60
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    std::vector<std::string> lines;
    boost::algorithm::split(lines, caption, boost::is_any_of("\n"));
    for (size_t i = 0; i < lines.size(); ++i)
        s << "<text x=\"" << left << "\" y=\"" << 18 + 16 * i << "\">" << xml_escape(lines[i]) << "</text>\n";
    s << "<g shape-rendering=\"crispEdges\">\n";
    const double cw = size * static_cast<double>(step) / static_cast<double>(n - 1);
    for (Index i = 0; i < grid.im_beta.size(); i += step)
        for (Index j = 0; j < n; j += step)
            s << "<rect x=\"" << px(grid.re_beta[j]) - cw / 2 << "\" y=\"" << py(grid.im_beta[i]) - cw / 2
              << "\" width=\"" << cw + 0.3 << "\" height=\"" << cw + 0.3 << "\" fill=\""
              << heat_color(grid.w(i, j) / wmax) << "\"/>\n";
    s << "</g>\n";
    // 1 sigma contour: beta covariance is cov / 2
    const cv::Ellipse<double> e = cv::ellipse(state);
    const double cre = state.mean[0] / std::numbers::sqrt2, cim = state.mean[1] / std::numbers::sqrt2;
    const double sx = size / (re1 - re0), sy = size / (im1 - im0);
    s << "<clipPath id=\"plot\"><rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << size << "\" height=\"" << size
      << "\"/></clipPath>\n";
    s << "<ellipse clip-path=\"url(#plot)\" cx=\"" << px(cre) << "\" cy=\"" << py(cim) << "\" rx=\""
      << std::sqrt(e.major_var / 2.0) * sx << "\" ry=\"" << std::sqrt(e.minor_var / 2.0) * sy
      << "\" transform=\"rotate(" << -e.angle * 180.0 / kPi << " " << px(cre) << " " << py(cim)
      << ")\" fill=\"none\" stroke=\"white\" stroke-width=\"1.5\"/>\n";
    s << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << size << "\" height=\"" << size
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double t : nice_ticks(re0, re1, 6))
        s << "<text x=\"" << px(t) << "\" y=\"" << top + size + 16 << "\" text-anchor=\"middle\">" << fmt("%g", t)
          << "</text>";
    for (double t : nice_ticks(im0, im1, 6))
        s << "<text x=\"" << left - 6 << "\" y=\"" << py(t) + 4 << "\" text-anchor=\"end\">" << fmt("%g", t)
          << "</text>";
    s << "\n<text x=\"" << left + size / 2 << "\" y=\"" << top + size + 40 << "\" text-anchor=\"middle\">Re beta</text>\n";
    s << "<text transform=\"translate(14," << top + size / 2 << ") rotate(-90)\" text-anchor=\"middle\">Im beta</text>\n";
    s << "</svg>\n";
    return s.str();
}

nlohmann::json state_json(const GaussianState<double>& st) {
    nlohmann::json cov = nlohmann::json::array();
    for (Index i = 0; i < st.cov.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Index j = 0; j < st.cov.cols(); ++j) row.push_back(st.cov(i, j));
        cov.push_back(row);
    }
    return {{"convention", "x=(a+a^dagger)/sqrt(2), p=i(a^dagger-a)/sqrt(2), vacuum covariance I/2, order x1,p1,..."},
            {"n_modes", st.n_modes()},
            {"mean", std::vector<double>(st.mean.data(), st.mean.data() + st.mean.size())},
            {"cov", cov}};
}

std::vector<WignerFiles> run_wigner(const RunConfig& cfg, const std::vector<double>& ceps, const Warn& warn) {
    cfg.validate();
    if (ceps.empty()) throw ConfigError("no CEP values for the Wigner panels (use --cep or wigner.ceps)");
    ScanOptions o;
    o.g = resolve_coupling(cfg, warn);
    o.n_at = cfg.coupling.n_at;
    o.jobs = cfg.jobs;
    o.cache_dir = cfg.cache_dir;
    o.warn = warn;
    const std::vector<ScanPoint> pts = cep_scan(cfg.backend, ceps, o);

    std::vector<WignerFiles> files;
    for (const auto& pt : pts) {
        const WignerPanel panel = make_wigner_panel(cfg, pt.record);
        const SqueezeRecord& r = panel.record;
        const fs::path base = cfg.output_dir / panel_stem(r.cep);
        WignerFiles f{base.string() + ".csv", base.string() + ".svg", base.string() + ".json"};
        std::ostringstream cap;
        cap << "phi = " << fmt("%.4f", r.cep) << " rad, psi = " << fmt("%.4f", r.psi)
            << " rad, r_eff = " << fmt("%.4f", r.effective_r()) << " (r = " << fmt("%.4g", r.r) << ", "
            << fmt("%.3g", r.db) << " dB)\n"
            << (cfg.wigner.lab_frame ? "laboratory frame" : "displaced frame centred on alpha + chi_1")
            << ", backend " << r.backend;
        write_text_atomic(f.csv, wigner_csv(panel.grid));
        write_text_atomic(f.svg, wigner_svg(panel.grid, panel.state, cap.str()));
        nlohmann::json j = state_json(panel.state);
        j["cep"] = r.cep;
        j["psi"] = r.psi;
        j["b"] = r.b;
        j["r"] = r.r;
        j["r_eff"] = r.effective_r();
        j["squeezing_db"] = r.db;
        j["g"] = r.g;
        j["n_at"] = r.n_at;
        j["alpha"] = {panel.alpha.real(), panel.alpha.imag()};
        j["chi1"] = {r.chi1.real(), r.chi1.imag()};
        j["frame"] = cfg.wigner.lab_frame ? "lab" : "displaced";
        j["center"] = {panel.center.real(), panel.center.imag()};
        j["ellipse"] = {{"angle", panel.ellipse.angle},
                        {"major_variance", panel.ellipse.major_var},
                        {"minor_variance", panel.ellipse.minor_var}};
        j["backend"] = r.backend;
        write_text_atomic(f.json, j.dump(1) + "\n");
        files.push_back(f);
    }
    return files;
}

// ---------------------------------------------------------------------------
// validate

std::string to_string(CheckStatus s) {
    switch (s) {
        case CheckStatus::Pass: return "pass";
        case CheckStatus::Warn: return "warn";
        case CheckStatus::Fail: return "fail";
    }
    return "?";
}

int nyquist_harmonic(const PulseParams& pulse, double ip, double dt) {
    const double room = kPi / dt - ip - ponderomotive_energy(pulse);
    return room <= 0.0 ? 0 : static_cast<int>(std::floor(room / pulse.omega));
}

double cutoff_harmonic(const PulseParams& pulse, double ip) {
    return (ip + 3.17 * ponderomotive_energy(pulse)) / pulse.omega;
}

std::vector<CheckRow> validate_config(const RunConfig& cfg) {
    std::vector<CheckRow> rows;
    auto add = [&](std::string name, CheckStatus st, std::string detail) {
        rows.push_back({std::move(name), st, std::move(detail)});
    };
    auto guard = [&](const std::string& name, auto&& f) {
        try {
            f();
        } catch (const std::exception& e) {
            add(name, CheckStatus::Fail, e.what());
        }
    };

    const BackendConfig& b = cfg.backend;
    const PulseParams& pulse = b.pulse;
    bool pulse_ok = true;
    guard("pulse", [&] {
        pulse.validate();
        add("pulse", CheckStatus::Pass,
            fmt("E0 = %.4g a.u., ", pulse.amplitude()) + fmt("T = %.4g a.u. ", pulse.duration()) +
                fmt("(%.3g fs), ", pulse_duration(pulse).fs) + fmt("Up = %.4g a.u.", ponderomotive_energy(pulse)));
    });
    if (!rows.empty() && rows.back().status == CheckStatus::Fail) pulse_ok = false;

    guard("scan", [&] {
        if (cfg.cep_values.empty()) throw std::invalid_argument("scan.cep_values is empty");
        add("scan", CheckStatus::Pass, std::to_string(cfg.cep_values.size()) + " CEP points");
    });
    guard("coupling", [&] {
        if (!(cfg.coupling.n_at >= 0.0)) throw std::invalid_argument("n_at must be non-negative");
        if (cfg.coupling.mode == CouplingMode::Absolute && !(cfg.coupling.g >= 0.0))
            throw std::invalid_argument("g must be non-negative");
        add("coupling", CheckStatus::Pass,
            cfg.coupling.mode == CouplingMode::Absolute ? "absolute g = " + num12(cfg.coupling.g)
                                                        : "normalized on sfa at cep 0, n_at = " + num12(cfg.coupling.n_at));
    });
    if (!pulse_ok) return rows;

    const double ip = b.sfa.ip;
    const double dt = b.backend == Backend::Sfa ? b.sfa.dt
                      : b.backend == Backend::Tdse ? b.grid.dt
                                                   : b.oscillator.grid.dt;
    const double tail = b.backend == Backend::Sfa ? b.sfa.tail_cycles : b.tail_cycles;
    const TimeGrid tg = make_time_grid(pulse.t_start, pulse.t_end() + tail * 2.0 * kPi / pulse.omega, dt);

    {
        const int q_nyq = nyquist_harmonic(pulse, ip, dt);
        const int q_cut = static_cast<int>(std::ceil(cutoff_harmonic(pulse, ip)));
        const int q_need = static_cast<int>(std::max<Index>(q_cut, cfg.n_modes));
        std::string detail = "dt = " + fmt("%.4g", dt) + ", resolved up to harmonic " + std::to_string(q_nyq) +
                             ", cutoff harmonic " + std::to_string(q_cut);
        if (q_nyq < q_need)
            add("nyquist", CheckStatus::Fail,
                detail + "; harmonics >= " + std::to_string(q_nyq + 1) + " exceed the Nyquist limit");
        else
            add("nyquist", CheckStatus::Pass, detail);
    }

    {
        const double fastest = static_cast<double>(cfg.n_modes) * pulse.omega;
        const double per_cycle = 2.0 * kPi / fastest / (b.anchor_stride * tg.dt);
        add("anchor density", per_cycle >= 8.0 ? CheckStatus::Pass : CheckStatus::Warn,
            fmt("%.1f anchors per period of the fastest probe", per_cycle) + " (stride " +
                std::to_string(b.anchor_stride) + ")");
    }

    const double a0 = pulse.amplitude() / pulse.omega;
    const double p_max = a0 + std::sqrt(2.0 * 3.17 * ponderomotive_energy(pulse));
    if (b.backend == Backend::Sfa) {
        guard("sfa parameters", [&] {
            b.sfa.validate();
            add("sfa parameters", CheckStatus::Pass,
                std::to_string(b.sfa.n_v) + " momenta on [" + num12(b.sfa.v_min) + ", " + num12(b.sfa.v_max) + "]");
            const bool covers = b.sfa.v_max >= p_max && b.sfa.v_min <= -p_max;
            add("momentum range", covers ? CheckStatus::Pass : CheckStatus::Warn,
                "needs |v| up to A0 + sqrt(6.34 Up) = " + fmt("%.3g", p_max));
            guard("momentum sampling", [&] {
                check_momentum_sampling(b.sfa, pulse_history(pulse, tg));
                add("momentum sampling", CheckStatus::Pass, "adjacent momenta stay within pi of action phase");
            });
        });
    } else {
        const GridSpec& g = b.backend == Backend::Tdse ? b.grid : b.oscillator.grid;
        bool grid_ok = true;
        guard("grid", [&] {
            if (g.absorber_width > 0.5 * g.length())
                throw std::invalid_argument("absorber width " + num12(g.absorber_width) + " exceeds half the box");
            g.validate();
            add("grid", CheckStatus::Pass,
                std::to_string(g.n_x) + " points on [" + num12(g.x_min) + ", " + num12(g.x_max) + "], dx = " +
                    fmt("%.4g", g.dx()));
        });
        if (rows.back().status == CheckStatus::Fail) grid_ok = false;
        if (grid_ok) {
            const double k_max = kPi / g.dx();
            add("spatial resolution", k_max >= 1.5 * p_max ? CheckStatus::Pass : CheckStatus::Warn,
                fmt("k_max = %.3g", k_max) + fmt(" vs peak momentum %.3g", p_max));
            if (b.backend == Backend::Tdse) {
                const double interior = 0.5 * g.length() - g.absorber_width;
                add("absorber margin", interior >= 2.0 * pulse.amplitude() / (pulse.omega * pulse.omega)
                                           ? CheckStatus::Pass
                                           : CheckStatus::Warn,
                    fmt("interior half-width %.4g", interior) +
                        fmt(" vs quiver amplitude %.4g", pulse.amplitude() / (pulse.omega * pulse.omega)));
            }
        }
    }
    return rows;
}

void print_checks(std::ostream& os, const std::vector<CheckRow>& rows) {
    size_t w = 5;
    for (const auto& r : rows) w = std::max(w, r.name.size());
    os << std::left << std::setw(static_cast<int>(w)) << "check" << "  status  detail\n";
    os << std::string(w, '-') << "  ------  ------\n";
    for (const auto& r : rows)
        os << std::left << std::setw(static_cast<int>(w)) << r.name << "  " << std::setw(6) << to_string(r.status)
           << "  " << r.detail << "\n";
}

// ---------------------------------------------------------------------------
// cache

std::vector<CacheEntry> cache_list(const fs::path& dir) {
    std::vector<CacheEntry> out;
    if (!fs::exists(dir)) return out;
    for (const auto& de : fs::directory_iterator(dir)) {
        const std::string name = de.path().filename().string();
        if (!name.ends_with(".meta.json")) continue;
        CacheEntry e;
        e.key = name.substr(0, name.size() - std::string(".meta.json").size());
        const fs::path base = dir / e.key;
        try {
            std::ifstream in(de.path());
            const nlohmann::json meta = nlohmann::json::parse(in);
            e.backend = meta.value("backend", std::string{"?"});
            e.rows = meta.value("rows", Index{0});
            e.cols = meta.value("cols", Index{0});
            if (meta.contains("physics")) e.cep = meta["physics"]["pulse"].value("cep", 0.0);
        } catch (const std::exception& ex) {
            e.problem = ex.what();
        }
        std::error_code ec;
        const fs::path bin = fs::path(base.string() + ".bin");
        e.bytes = fs::file_size(bin, ec);
        if (ec) e.bytes = 0;
        e.bytes += fs::file_size(de.path(), ec);
        if (e.problem.empty()) e.ok = verify_table(base, &e.problem);
        out.push_back(e);
    }
    std::sort(out.begin(), out.end(), [](const CacheEntry& a, const CacheEntry& b) { return a.key < b.key; });
    return out;
}

std::size_t cache_remove(const fs::path& dir, const std::vector<std::string>& keys) {
    std::size_t removed = 0;
    std::vector<std::string> targets = keys;
    if (targets.empty())
        for (const auto& e : cache_list(dir)) targets.push_back(e.key);
    for (const auto& k : targets) {
        if (k.find('/') != std::string::npos || k.find("..") != std::string::npos)
            throw CacheError("invalid cache key '" + k + "'");
        bool any = false;
        for (const char* suffix : {".bin", ".meta.json"}) any |= fs::remove(dir / (k + suffix));
        if (any) ++removed;
    }
    return removed;
}

}  // namespace hhgq::app
