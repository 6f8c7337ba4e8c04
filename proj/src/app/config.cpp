#include "hhgq/app/config.hpp"

#include "hhgq/errors.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <map>
#include <numbers>
#include <regex>
#include <set>

namespace hhgq::app {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> keys = {
        {"pulse", {"intensity_wcm2", "wavelength_nm", "omega_au", "omega", "cep_rad", "n_cycles", "envelope", "t_start"}},
        {"backend", {"kind", "anchor_stride", "interpolation", "tail_cycles", "workers"}},
        {"grid", {"x_min", "x_max", "n_x", "dt", "absorber_width", "absorber_strength", "soft_core_a"}},
        {"ground", {"tolerance", "max_iterations", "filter_width"}},
        {"oscillator", {"omega0", "x_max", "n_x", "dt"}},
        {"sfa", {"ip", "matrix_element", "gaussian_width", "v_min", "v_max", "n_v", "dt", "tail_cycles"}},
        {"coupling", {"mode", "g", "n_at"}},
        {"spectral", {"n_modes"}},
        {"scan", {"cep_values", "cep_count", "jobs"}},
        {"output", {"dir", "cache_dir", "deterministic"}},
        {"wigner", {"half_width", "n_points", "lab_frame", "ceps"}},
    };
    return keys;
}

void check_keys(const pt::ptree& tree) {
    for (const auto& [section, body] : tree) {
        auto it = known_keys().find(section);
        if (it == known_keys().end()) throw ConfigError("unknown config section [" + section + "]");
        if (!body.data().empty() && body.empty()) throw ConfigError("key '" + section + "' outside any section");
        for (const auto& [key, value] : body)
            if (!it->second.contains(key)) throw ConfigError("unknown config key " + section + "." + key);
    }
}

template <typename T>
void read(const pt::ptree& tree, const std::string& path, T& out) {
    const auto node = tree.get_child_optional(pt::ptree::path_type(path, '.'));
    if (!node) return;
    const std::string text = boost::algorithm::trim_copy(node->data());
    try {
        if constexpr (std::is_same_v<T, bool>) {
            const std::string v = boost::algorithm::to_lower_copy(text);
            if (v == "true" || v == "1" || v == "yes" || v == "on") out = true;
            else if (v == "false" || v == "0" || v == "no" || v == "off") out = false;
            else throw std::invalid_argument(text);
        } else if constexpr (std::is_same_v<T, std::string>) {
            out = text;
        } else if constexpr (std::is_integral_v<T>) {
            size_t used = 0;
            const long long v = std::stoll(text, &used);
            if (used != text.size()) throw std::invalid_argument(text);
            out = static_cast<T>(v);
        } else {
            size_t used = 0;
            const double v = std::stod(text, &used);
            if (used != text.size()) throw std::invalid_argument(text);
            out = v;
        }
    } catch (const std::exception&) {
        throw ConfigError("cannot parse " + path + " = '" + text + "'");
    }
}

template <typename F>
void wrap(const std::string& what, F&& f) {
    try {
        f();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(what + ": " + e.what());
    }
}

double parse_angle(const std::string& raw) {
    const std::string s = boost::algorithm::erase_all_copy(raw, " ");
    static const std::regex with_pi(R"(^([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)?(\*)?(-)?pi(?:/((?:\d+\.?\d*|\.\d+)))?$)");
    std::smatch m;
    if (std::regex_match(s, m, with_pi)) {
        double v = std::numbers::pi;
        if (m[1].matched) v *= std::stod(m[1].str());
        if (m[3].matched) v = -v;
        if (m[4].matched) v /= std::stod(m[4].str());
        return v;
    }
    if (s.starts_with("-pi") || s.starts_with("+pi")) return parse_angle(s.substr(1)) * (s[0] == '-' ? -1.0 : 1.0);
    size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("bad angle '" + raw + "'");
    return v;
}

std::vector<double> uniform_ceps(Index count) {
    std::vector<double> out;
    for (Index i = 0; i < count; ++i)
        out.push_back(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(count));
    return out;
}

}  // namespace

std::vector<double> parse_angle_list(const std::string& text) {
    std::vector<std::string> parts;
    boost::algorithm::split(parts, text, boost::is_any_of(","));
    std::vector<double> out;
    for (auto& p : parts) {
        boost::algorithm::trim(p);
        if (p.empty()) continue;
        try {
            out.push_back(parse_angle(p));
        } catch (const std::exception&) {
            throw ConfigError("cannot parse angle '" + p + "'");
        }
    }
    return out;
}

RunConfig default_config() {
    RunConfig c;
    c.backend.backend = Backend::Tdse;
    c.backend.pulse.intensity_wcm2 = 4e14;
    c.backend.pulse.omega = wavelength_to_omega(800.0);
    c.backend.pulse.n_cycles = 2;
    c.cep_values = uniform_ceps(16);
    return c;
}

void RunConfig::validate() const {
    wrap("invalid configuration", [&] { backend.validate(); });
    if (cep_values.empty()) throw ConfigError("scan.cep_values is empty");
    for (double c : cep_values)
        if (!std::isfinite(c)) throw ConfigError("non-finite CEP value");
    if (n_modes < 1) throw ConfigError("spectral.n_modes must be >= 1");
    if (jobs < 1) throw ConfigError("scan.jobs must be >= 1");
    if (!(coupling.n_at >= 0.0)) throw ConfigError("coupling.n_at must be non-negative");
    if (coupling.mode == CouplingMode::Absolute && !(coupling.g >= 0.0))
        throw ConfigError("coupling.g must be non-negative");
    if (coupling.mode == CouplingMode::Normalized && !(coupling.n_at > 0.0))
        throw ConfigError("normalized coupling needs coupling.n_at > 0");
    if (!(wigner.half_width > 0.0)) throw ConfigError("wigner.half_width must be positive");
    if (wigner.n_points < 2) throw ConfigError("wigner.n_points must be >= 2");
    if (output_dir.empty()) throw ConfigError("output.dir is empty");
}

nlohmann::json RunConfig::to_json() const {
    nlohmann::json j = backend.physics_json(0.0);
    j.erase("format");
    j["pulse"].erase("cep");
    j["coupling"] = {{"mode", coupling.mode == CouplingMode::Normalized ? "normalized" : "absolute"},
                     {"g", coupling.g},
                     {"n_at", coupling.n_at}};
    j["n_modes"] = n_modes;
    j["cep_values"] = cep_values;
    j["jobs"] = jobs;
    j["output_dir"] = output_dir.string();
    j["cache_dir"] = cache_dir.string();
    j["deterministic"] = deterministic;
    j["wigner"] = {{"half_width", wigner.half_width},
                   {"n_points", wigner.n_points},
                   {"lab_frame", wigner.lab_frame},
                   {"ceps", wigner.ceps}};
    return j;
}

RunConfig load_config(const std::optional<std::filesystem::path>& file, const std::vector<std::string>& overrides,
                      bool check) {
    pt::ptree tree;
    if (file) {
        try {
            pt::ini_parser::read_ini(file->string(), tree);
        } catch (const pt::ini_parser_error& e) {
            throw ConfigError(std::string("cannot read config: ") + e.what());
        }
        // trailing ; or # comments
        for (auto& [section, body] : tree)
            for (auto& [key, value] : body) {
                std::string v = value.data();
                v = v.substr(0, v.find_first_of(";#"));
                value.data() = boost::algorithm::trim_copy(v);
            }
    }
    for (const std::string& o : overrides) {
        const auto eq = o.find('=');
        const auto dot = o.find('.');
        if (eq == std::string::npos || dot == std::string::npos || dot > eq)
            throw ConfigError("override must look like section.key=value, got '" + o + "'");
        const std::string section = boost::algorithm::trim_copy(o.substr(0, dot));
        const std::string key = boost::algorithm::trim_copy(o.substr(dot + 1, eq - dot - 1));
        tree.put(pt::ptree::path_type(section + "." + key, '.'), boost::algorithm::trim_copy(o.substr(eq + 1)));
    }
    check_keys(tree);

    RunConfig c = default_config();
    PulseParams& p = c.backend.pulse;
    read(tree, "pulse.intensity_wcm2", p.intensity_wcm2);
    const bool has_wl = tree.get_child_optional("pulse.wavelength_nm").has_value();
    const int n_omega = tree.get_child_optional("pulse.omega_au").has_value() +
                        tree.get_child_optional("pulse.omega").has_value();
    if (has_wl + n_omega > 1) throw ConfigError("give one of pulse.wavelength_nm, pulse.omega_au (alias omega)");
    if (has_wl) {
        double wl = 800.0;
        read(tree, "pulse.wavelength_nm", wl);
        if (!(wl > 0.0)) throw ConfigError("pulse.wavelength_nm must be positive");
        p.omega = wavelength_to_omega(wl);
    }
    read(tree, "pulse.omega_au", p.omega);
    read(tree, "pulse.omega", p.omega);
    read(tree, "pulse.n_cycles", p.n_cycles);
    std::string env = to_string(p.envelope);
    read(tree, "pulse.envelope", env);
    wrap("pulse.envelope", [&] { p.envelope = envelope_from_string(env); });
    read(tree, "pulse.t_start", p.t_start);

    std::string kind = to_string(c.backend.backend);
    read(tree, "backend.kind", kind);
    wrap("backend.kind", [&] { c.backend.backend = backend_from_string(kind); });
    read(tree, "backend.anchor_stride", c.backend.anchor_stride);
    std::string interp = to_string(c.backend.interpolation);
    read(tree, "backend.interpolation", interp);
    wrap("backend.interpolation", [&] { c.backend.interpolation = anchor_interpolation_from_string(interp); });
    read(tree, "backend.tail_cycles", c.backend.tail_cycles);
    read(tree, "backend.workers", c.backend.workers);

    GridSpec& g = c.backend.grid;
    read(tree, "grid.x_min", g.x_min);
    read(tree, "grid.x_max", g.x_max);
    read(tree, "grid.n_x", g.n_x);
    read(tree, "grid.dt", g.dt);
    read(tree, "grid.absorber_width", g.absorber_width);
    read(tree, "grid.absorber_strength", g.absorber_strength);
    read(tree, "grid.soft_core_a", c.backend.soft_core_a);

    read(tree, "ground.tolerance", c.backend.ground.tolerance);
    read(tree, "ground.max_iterations", c.backend.ground.max_iterations);
    read(tree, "ground.filter_width", c.backend.ground.filter_width);

    OscillatorSpec& o = c.backend.oscillator;
    read(tree, "oscillator.omega0", o.omega0);
    double ox = o.grid.x_max;
    read(tree, "oscillator.x_max", ox);
    o.grid.x_min = -ox;
    o.grid.x_max = ox;
    read(tree, "oscillator.n_x", o.grid.n_x);
    read(tree, "oscillator.dt", o.grid.dt);

    SfaParams& s = c.backend.sfa;
    read(tree, "sfa.ip", s.ip);
    std::string me = to_string(s.matrix_element);
    read(tree, "sfa.matrix_element", me);
    wrap("sfa.matrix_element", [&] { s.matrix_element = matrix_element_from_string(me); });
    read(tree, "sfa.gaussian_width", s.gaussian_width);
    read(tree, "sfa.v_min", s.v_min);
    read(tree, "sfa.v_max", s.v_max);
    read(tree, "sfa.n_v", s.n_v);
    read(tree, "sfa.dt", s.dt);
    read(tree, "sfa.tail_cycles", s.tail_cycles);

    std::string mode = "normalized";
    read(tree, "coupling.mode", mode);
    if (mode == "normalized") c.coupling.mode = CouplingMode::Normalized;
    else if (mode == "absolute") c.coupling.mode = CouplingMode::Absolute;
    else throw ConfigError("coupling.mode must be normalized or absolute, got '" + mode + "'");
    read(tree, "coupling.g", c.coupling.g);
    read(tree, "coupling.n_at", c.coupling.n_at);

    read(tree, "spectral.n_modes", c.n_modes);

    const bool has_values = tree.get_child_optional("scan.cep_values").has_value();
    const bool has_count = tree.get_child_optional("scan.cep_count").has_value();
    const bool has_single = tree.get_child_optional("pulse.cep_rad").has_value();
    if (has_values + has_count + has_single > 1)
        throw ConfigError("give one of scan.cep_values, scan.cep_count, pulse.cep_rad");
    if (has_single) {
        const std::string text = tree.get<std::string>("pulse.cep_rad");
        wrap("pulse.cep_rad", [&] { c.cep_values = {parse_angle(text)}; });
    }
    if (has_values) c.cep_values = parse_angle_list(tree.get<std::string>("scan.cep_values"));
    if (has_count) {
        Index n = 0;
        read(tree, "scan.cep_count", n);
        if (n < 1) throw ConfigError("scan.cep_count must be >= 1");
        c.cep_values = uniform_ceps(n);
    }
    read(tree, "scan.jobs", c.jobs);

    std::string out_dir = c.output_dir.string(), cache = c.cache_dir.string();
    read(tree, "output.dir", out_dir);
    read(tree, "output.cache_dir", cache);
    c.output_dir = out_dir;
    c.cache_dir = cache;
    read(tree, "output.deterministic", c.deterministic);
    if (!c.deterministic) throw ConfigError("output.deterministic = false is not supported; every path is seedless");

    read(tree, "wigner.half_width", c.wigner.half_width);
    read(tree, "wigner.n_points", c.wigner.n_points);
    read(tree, "wigner.lab_frame", c.wigner.lab_frame);
    if (tree.get_child_optional("wigner.ceps")) c.wigner.ceps = parse_angle_list(tree.get<std::string>("wigner.ceps"));

    if (check) c.validate();
    return c;
}

}  // namespace hhgq::app
