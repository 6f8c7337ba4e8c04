#include "hhgq/correlation.hpp"

#include "hhgq/errors.hpp"
#include "hhgq/hash.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <limits>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace hhgq {

namespace fs = std::filesystem;

Eigen::VectorXd TimeGrid::times() const {
    Eigen::VectorXd t(size());
    for (Index k = 0; k < size(); ++k) t[k] = time(k);
    return t;
}

TimeGrid make_time_grid(double t0, double t1, double dt_max) {
    if (!(t1 > t0)) throw std::invalid_argument("time grid needs t1 > t0");
    if (!(dt_max > 0.0)) throw std::invalid_argument("time step must be positive");
    const double span = t1 - t0;
    const auto n = static_cast<Index>(std::ceil(span / dt_max - 1e-9));
    return {t0, span / static_cast<double>(std::max<Index>(n, 1)), std::max<Index>(n, 1)};
}

std::string to_string(AnchorInterpolation a) {
    return a == AnchorInterpolation::Linear ? "linear" : "cubic";
}

AnchorInterpolation anchor_interpolation_from_string(const std::string& s) {
    if (s == "linear") return AnchorInterpolation::Linear;
    if (s == "cubic") return AnchorInterpolation::Cubic;
    throw std::invalid_argument("unknown anchor interpolation '" + s + "'");
}

Stencil anchor_stencil(const Eigen::VectorXd& a, double t, AnchorInterpolation kind) {
    const Index m = a.size();
    Stencil s;
    if (m == 1) {
        s.count = 1;
        s.w[0] = 1.0;
        return s;
    }
    // interval [a[j], a[j+1]] containing t (clamped to the ends)
    const auto* begin = a.data();
    const auto* it = std::upper_bound(begin, begin + m, t);
    Index j = std::clamp<Index>(static_cast<Index>(it - begin) - 1, 0, m - 2);

    int order = kind == AnchorInterpolation::Linear ? 2 : 4;
    order = static_cast<int>(std::min<Index>(order, m));
    Index first = order == 2 ? j : j - 1;
    first = std::clamp<Index>(first, 0, m - order);
    s.first = first;
    s.count = order;
    for (int i = 0; i < order; ++i) {
        double w = 1.0;
        const double xi = a[first + i];
        for (int k = 0; k < order; ++k) {
            if (k == i) continue;
            const double xk = a[first + k];
            w *= (t - xk) / (xi - xk);
        }
        s.w[static_cast<size_t>(i)] = w;
    }
    return s;
}

std::vector<Index> make_anchor_indices(Index n_points, int stride) {
    if (stride < 1) throw std::invalid_argument("anchor stride must be >= 1");
    if (n_points < 1) throw std::invalid_argument("empty time grid");
    std::vector<Index> out;
    for (Index k = 0; k < n_points; k += stride) out.push_back(k);
    if (out.back() != n_points - 1) out.push_back(n_points - 1);
    return out;
}

Eigen::VectorXd CorrelationTable::anchor_times() const {
    Eigen::VectorXd t(n_anchors());
    for (Index j = 0; j < n_anchors(); ++j) t[j] = grid.time(anchors[static_cast<size_t>(j)]);
    return t;
}

cdouble CorrelationTable::anchor_pair(Index i, Index j) const {
    const Index ri = anchors[static_cast<size_t>(i)];
    const Index rj = anchors[static_cast<size_t>(j)];
    if (ri >= rj) return c_connected(ri, j);
    return std::conj(c_connected(rj, i));
}

void fill_by_conjugate_symmetry(CorrelationTable& table) {
    const Eigen::VectorXd at = table.anchor_times();
    for (Index j = 0; j < table.n_anchors(); ++j) {
        const Index row_j = table.anchors[static_cast<size_t>(j)];
        for (Index k = 0; k < row_j; ++k) {
            const Stencil s = anchor_stencil(at, table.grid.time(k), table.interpolation);
            cdouble acc = 0.0;
            for (int i = 0; i < s.count; ++i) acc += s.w[static_cast<size_t>(i)] * table.anchor_pair(j, s.first + i);
            table.c_connected(k, j) = std::conj(acc);
        }
    }
}

TableDiagnostics diagnose(const CorrelationTable& table) {
    TableDiagnostics d;
    d.min_diagonal = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < table.n_anchors(); ++i) {
        const Index ri = table.anchors[static_cast<size_t>(i)];
        for (Index j = 0; j < table.n_anchors(); ++j) {
            const Index rj = table.anchors[static_cast<size_t>(j)];
            const double defect = std::abs(table.c_connected(ri, j) - std::conj(table.c_connected(rj, i)));
            d.hermiticity_defect = std::max(d.hermiticity_defect, defect);
        }
        const cdouble diag = table.c_connected(ri, i);
        d.min_diagonal = std::min(d.min_diagonal, diag.real());
        d.max_diagonal_imag = std::max(d.max_diagonal_imag, std::abs(diag.imag()));
    }
    return d;
}

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

std::vector<std::byte> encode_payload(const Eigen::MatrixXcd& m) {
    std::vector<std::byte> out(static_cast<size_t>(m.size()) * 2 * sizeof(double));
    size_t pos = 0;
    auto put = [&](double v) {
        auto bits = std::bit_cast<std::uint64_t>(v);
        if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
        std::memcpy(out.data() + pos, &bits, sizeof bits);
        pos += sizeof bits;
    };
    for (Index r = 0; r < m.rows(); ++r)
        for (Index c = 0; c < m.cols(); ++c) {
            put(m(r, c).real());
            put(m(r, c).imag());
        }
    return out;
}

Eigen::MatrixXcd decode_payload(const std::vector<std::byte>& bytes, Index rows, Index cols) {
    Eigen::MatrixXcd m(rows, cols);
    size_t pos = 0;
    auto get = [&]() {
        std::uint64_t bits;
        std::memcpy(&bits, bytes.data() + pos, sizeof bits);
        pos += sizeof bits;
        if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
        return std::bit_cast<double>(bits);
    };
    for (Index r = 0; r < rows; ++r)
        for (Index c = 0; c < cols; ++c) {
            const double re = get();
            const double im = get();
            m(r, c) = {re, im};
        }
    return m;
}

std::vector<std::byte> read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw CacheError("cannot open " + p.string());
    in.seekg(0, std::ios::end);
    const auto size = static_cast<size_t>(in.tellg());
    in.seekg(0);
    std::vector<std::byte> data(size);
    in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(size));
    if (!in) throw CacheError("short read on " + p.string());
    return data;
}

void write_atomic(const fs::path& target, const void* data, size_t size) {
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw CacheError("cannot write " + tmp.string());
        out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
        if (!out) throw CacheError("write failed on " + tmp.string());
    }
    fs::rename(tmp, target);
}

fs::path with_suffix(const fs::path& base, const char* suffix) {
    fs::path p = base;
    p += suffix;
    return p;
}

nlohmann::json read_meta(const fs::path& base) {
    const fs::path meta_path = with_suffix(base, ".meta.json");
    std::ifstream in(meta_path);
    if (!in) throw CacheError("missing sidecar " + meta_path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw CacheError("corrupt sidecar " + meta_path.string() + ": " + e.what());
    }
}

}  // namespace

void write_table(const fs::path& base, const CorrelationTable& table, const DipoleRecord& dipole) {
    if (base.has_parent_path()) fs::create_directories(base.parent_path());
    const auto payload = encode_payload(table.c_connected);

    nlohmann::json meta = table.meta;
    meta["format"] = "hhgq-correlation/1";
    meta["rows"] = table.c_connected.rows();
    meta["cols"] = table.c_connected.cols();
    meta["anchors"] = table.anchors;
    meta["interpolation"] = to_string(table.interpolation);
    meta["time_grid"] = {{"t0", table.grid.t0}, {"dt", table.grid.dt}, {"n_steps", table.grid.n_steps}};
    meta["dipole_sign"] = dipole.dipole_sign;
    meta["d_mean"] = std::vector<double>(dipole.d_mean.data(), dipole.d_mean.data() + dipole.d_mean.size());
    meta["payload_sha256"] = sha256_hex(payload);

    write_atomic(with_suffix(base, ".bin"), payload.data(), payload.size());
    const std::string text = meta.dump(1);
    write_atomic(with_suffix(base, ".meta.json"), text.data(), text.size());
}

LoadedTable read_table(const fs::path& base) {
    const nlohmann::json meta = read_meta(base);
    LoadedTable out;
    try {
        if (meta.at("format") != "hhgq-correlation/1") throw CacheError("unknown cache format");
        const Index rows = meta.at("rows").get<Index>();
        const Index cols = meta.at("cols").get<Index>();
        const auto bytes = read_bytes(with_suffix(base, ".bin"));
        if (bytes.size() != static_cast<size_t>(rows * cols) * 2 * sizeof(double))
            throw CacheError("payload size mismatch for " + base.string());
        if (sha256_hex(bytes) != meta.at("payload_sha256").get<std::string>())
            throw CacheError("payload hash mismatch for " + base.string());

        auto& t = out.table;
        t.grid = {meta.at("time_grid").at("t0").get<double>(), meta.at("time_grid").at("dt").get<double>(),
                  meta.at("time_grid").at("n_steps").get<Index>()};
        t.anchors = meta.at("anchors").get<std::vector<Index>>();
        t.interpolation = anchor_interpolation_from_string(meta.at("interpolation").get<std::string>());
        t.c_connected = decode_payload(bytes, rows, cols);
        t.meta = meta;
        t.meta.erase("d_mean");
        if (t.grid.size() != rows || t.n_anchors() != cols) throw CacheError("table shape disagrees with grid");

        out.dipole.grid = t.grid;
        out.dipole.dipole_sign = meta.at("dipole_sign").get<int>();
        const auto d = meta.at("d_mean").get<std::vector<double>>();
        if (static_cast<Index>(d.size()) != rows) throw CacheError("dipole record length mismatch");
        out.dipole.d_mean = Eigen::Map<const Eigen::VectorXd>(d.data(), static_cast<Index>(d.size()));
    } catch (const nlohmann::json::exception& e) {
        throw CacheError("malformed sidecar for " + base.string() + ": " + e.what());
    }
    return out;
}

bool verify_table(const fs::path& base, std::string* reason) {
    try {
        const nlohmann::json meta = read_meta(base);
        const auto bytes = read_bytes(with_suffix(base, ".bin"));
        if (sha256_hex(bytes) != meta.at("payload_sha256").get<std::string>()) {
            if (reason) *reason = "payload hash mismatch";
            return false;
        }
        return true;
    } catch (const std::exception& e) {
        if (reason) *reason = e.what();
        return false;
    }
}

}  // namespace hhgq
