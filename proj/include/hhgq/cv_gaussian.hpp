#pragma once

// Gaussian continuous-variable states in the convention
//     x = (a + a^dagger)/sqrt(2),  p = i (a^dagger - a)/sqrt(2),  vacuum cov = I/2,
// with quadratures interleaved as (x_1, p_1, x_2, p_2, ...).
//
// Everything is templated on the real scalar type; the complex type used
// internally is std::complex<Scalar>.

#include "hhgq/errors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace hhgq::cv {

using Eigen::Index;

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using CMat = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using CVec = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;

template <typename Scalar>
struct GaussianState {
    Vec<Scalar> mean;
    Mat<Scalar> cov;

    Index n_modes() const { return mean.size() / 2; }

    static GaussianState vacuum(Index n_modes) {
        return {Vec<Scalar>::Zero(2 * n_modes), Mat<Scalar>::Identity(2 * n_modes, 2 * n_modes) / Scalar(2)};
    }
};

/// Coefficients of (1/2) Q^T A Q.
template <typename Scalar>
struct BilinearForm {
    Mat<Scalar> a_matrix;
    Index n_modes() const { return a_matrix.rows() / 2; }
};

/// Block diagonal [[0, 1], [-1, 0]] per mode.
template <typename Scalar>
Mat<Scalar> symplectic_form(Index n_modes) {
    Mat<Scalar> om = Mat<Scalar>::Zero(2 * n_modes, 2 * n_modes);
    for (Index k = 0; k < n_modes; ++k) {
        om(2 * k, 2 * k + 1) = Scalar(1);
        om(2 * k + 1, 2 * k) = Scalar(-1);
    }
    return om;
}

/// Permutation taking interleaved (x1, p1, x2, p2, ...) to blocks (x..., p...).
template <typename Scalar>
Mat<Scalar> block_permutation(Index n_modes) {
    Mat<Scalar> p = Mat<Scalar>::Zero(2 * n_modes, 2 * n_modes);
    for (Index k = 0; k < n_modes; ++k) {
        p(k, 2 * k) = Scalar(1);
        p(n_modes + k, 2 * k + 1) = Scalar(1);
    }
    return p;
}

namespace detail {

template <typename Scalar>
Mat<Scalar> symmetrize(const Mat<Scalar>& m) {
    return (m + m.transpose()) / Scalar(2);
}

template <typename Scalar>
void require_square_even(const Mat<Scalar>& m, const char* what) {
    if (m.rows() != m.cols() || m.rows() % 2 != 0 || m.rows() == 0) {
        std::ostringstream os;
        os << what << ": expected a non-empty 2n x 2n matrix, got " << m.rows() << "x" << m.cols();
        throw std::invalid_argument(os.str());
    }
}

template <typename Scalar>
Mat<Scalar> spd_sqrt(const Mat<Scalar>& m, bool inverse) {
    Eigen::SelfAdjointEigenSolver<Mat<Scalar>> es(m);
    if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= Scalar(0))
        throw NumericError("covariance matrix is not positive definite");
    Vec<Scalar> d = es.eigenvalues().array().sqrt();
    if (inverse) d = d.cwiseInverse();
    return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace detail

/// Symplectic eigenvalues in ascending order (each >= 1/2 for physical states).
template <typename Scalar>
Vec<Scalar> symplectic_eigenvalues(const Mat<Scalar>& cov) {
    detail::require_square_even(cov, "symplectic_eigenvalues");
    const Index n = cov.rows() / 2;
    // eigenvalues of i Omega cov come in pairs +-nu; the spectrum of the real
    // antisymmetric matrix sqrt(cov) Omega sqrt(cov) has the same moduli
    const Mat<Scalar> root = detail::spd_sqrt(detail::symmetrize(cov), false);
    const Mat<Scalar> k = root * symplectic_form<Scalar>(n) * root;
    const CMat<Scalar> h = std::complex<Scalar>(0, 1) * k.template cast<std::complex<Scalar>>();
    Eigen::SelfAdjointEigenSolver<CMat<Scalar>> es(h, Eigen::EigenvaluesOnly);
    Vec<Scalar> ev = es.eigenvalues().cwiseAbs();
    std::sort(ev.data(), ev.data() + ev.size());
    Vec<Scalar> nu(n);
    for (Index j = 0; j < n; ++j) nu[j] = Scalar(0.5) * (ev[2 * j] + ev[2 * j + 1]);
    return nu;
}

/// cov = S diag(nu_1, nu_1, nu_2, nu_2, ...) S^T with S symplectic.
template <typename Scalar>
struct Williamson {
    Vec<Scalar> nu;
    Mat<Scalar> s;
};

template <typename Scalar>
Williamson<Scalar> williamson(const Mat<Scalar>& cov) {
    detail::require_square_even(cov, "williamson");
    const Index n = cov.rows() / 2;
    const Mat<Scalar> sym = detail::symmetrize(cov);
    const Mat<Scalar> root = detail::spd_sqrt(sym, false);
    const Mat<Scalar> inv_root = detail::spd_sqrt(sym, true);
    // K = cov^{-1/2} Omega cov^{-1/2} is real antisymmetric; its eigenvalues are
    // +- i / nu_k. The eigenvector u = q + i p of +i/nu gives K q = -p/nu, K p = q/nu.
    const Mat<Scalar> k = inv_root * symplectic_form<Scalar>(n) * inv_root;
    const CMat<Scalar> h = std::complex<Scalar>(0, -1) * k.template cast<std::complex<Scalar>>();
    Eigen::SelfAdjointEigenSolver<CMat<Scalar>> es(h);
    if (es.info() != Eigen::Success) throw NumericError("williamson decomposition failed");

    Williamson<Scalar> w;
    w.nu.resize(n);
    Mat<Scalar> o(2 * n, 2 * n);
    // eigenvalues ascending: the n positive ones (= 1/nu) are the last n
    for (Index j = 0; j < n; ++j) {
        const Index col = 2 * n - 1 - j;
        const Scalar lam = es.eigenvalues()[col];
        if (lam <= Scalar(0)) throw NumericError("williamson decomposition: degenerate spectrum");
        const CVec<Scalar> u = es.eigenvectors().col(col);
        const Scalar scale = std::sqrt(Scalar(2));
        o.col(2 * j) = scale * u.real();
        o.col(2 * j + 1) = scale * u.imag();
        w.nu[j] = Scalar(1) / lam;
    }
    Vec<Scalar> d(2 * n);
    for (Index j = 0; j < n; ++j) d[2 * j] = d[2 * j + 1] = std::sqrt(w.nu[j]);
    w.s = root * o * d.cwiseInverse().asDiagonal();
    return w;
}

/// Throws NumericError when cov + i Omega / 2 is not positive semidefinite.
template <typename Scalar>
void check_physical(const GaussianState<Scalar>& st, Scalar tol = Scalar(1e-9)) {
    if (st.mean.size() != st.cov.rows()) throw std::invalid_argument("mean and covariance sizes differ");
    detail::require_square_even(st.cov, "check_physical");
    if ((st.cov - st.cov.transpose()).cwiseAbs().maxCoeff() > tol * (Scalar(1) + st.cov.cwiseAbs().maxCoeff()))
        throw NumericError("covariance matrix is not symmetric");
    const Vec<Scalar> nu = symplectic_eigenvalues<Scalar>(st.cov);
    if (nu.minCoeff() < Scalar(0.5) - tol) {
        std::ostringstream os;
        os << "state violates the uncertainty principle: smallest symplectic eigenvalue " << nu.minCoeff();
        throw NumericError(os.str());
    }
}

template <typename Scalar>
bool is_pure(const GaussianState<Scalar>& st, Scalar tol = Scalar(1e-9)) {
    return (symplectic_eigenvalues<Scalar>(st.cov).array() - Scalar(0.5)).abs().maxCoeff() <= tol;
}

/// det(2 cov); one for pure states.
template <typename Scalar>
Scalar purity_determinant(const GaussianState<Scalar>& st) {
    return (Scalar(2) * st.cov).determinant();
}

template <typename Scalar>
GaussianState<Scalar> displace(GaussianState<Scalar> st, Index mode, std::complex<Scalar> alpha) {
    if (mode < 0 || mode >= st.n_modes()) throw std::out_of_range("mode index out of range");
    const Scalar r2 = std::sqrt(Scalar(2));
    st.mean[2 * mode] += r2 * alpha.real();
    st.mean[2 * mode + 1] += r2 * alpha.imag();
    return st;
}

/// Rotates the (x, p) plane of one mode counterclockwise by theta.
template <typename Scalar>
Mat<Scalar> rotation_matrix(Index n_modes, Index mode, Scalar theta) {
    Mat<Scalar> r = Mat<Scalar>::Identity(2 * n_modes, 2 * n_modes);
    const Scalar c = std::cos(theta), s = std::sin(theta);
    r(2 * mode, 2 * mode) = c;
    r(2 * mode, 2 * mode + 1) = -s;
    r(2 * mode + 1, 2 * mode) = s;
    r(2 * mode + 1, 2 * mode + 1) = c;
    return r;
}

template <typename Scalar>
GaussianState<Scalar> transform(const GaussianState<Scalar>& st, const Mat<Scalar>& s) {
    return {s * st.mean, detail::symmetrize<Scalar>(s * st.cov * s.transpose())};
}

template <typename Scalar>
GaussianState<Scalar> rotate(const GaussianState<Scalar>& st, Index mode, Scalar theta) {
    if (mode < 0 || mode >= st.n_modes()) throw std::out_of_range("mode index out of range");
    return transform(st, rotation_matrix<Scalar>(st.n_modes(), mode, theta));
}

/// Reduced state of the listed modes, in the given order.
template <typename Scalar>
GaussianState<Scalar> marginal(const GaussianState<Scalar>& st, const std::vector<Index>& modes) {
    const Index m = static_cast<Index>(modes.size());
    GaussianState<Scalar> out{Vec<Scalar>(2 * m), Mat<Scalar>(2 * m, 2 * m)};
    for (Index i = 0; i < m; ++i) {
        if (modes[i] < 0 || modes[i] >= st.n_modes()) throw std::out_of_range("mode index out of range");
        for (int a = 0; a < 2; ++a) {
            out.mean[2 * i + a] = st.mean[2 * modes[i] + a];
            for (Index j = 0; j < m; ++j)
                for (int b = 0; b < 2; ++b) out.cov(2 * i + a, 2 * j + b) = st.cov(2 * modes[i] + a, 2 * modes[j] + b);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Bilinear forms from moment matrices

// <Q^2> = -g^2 sum_qp sqrt(qp) [ a_q^+ a_p^+ M_qp + a_q a_p M_qp^* - a_q^+ a_p N_pq - a_q a_p^+ N_qp ]
// written as xi^T H xi with xi = (a_1..a_n, a_1^+..a_n^+) and mapped to the
// quadrature basis through xi = T Q. Mode q is the harmonic of order q + 1.
template <typename Scalar>
BilinearForm<Scalar> assemble_quadratic_form(const CMat<Scalar>& m, const CMat<Scalar>& n, Scalar g) {
    using C = std::complex<Scalar>;
    const Index nm = m.rows();
    if (m.cols() != nm || n.rows() != nm || n.cols() != nm || nm == 0)
        throw std::invalid_argument("moment matrices must be square and of equal size");
    const Scalar g2 = g * g;
    CMat<Scalar> h = CMat<Scalar>::Zero(2 * nm, 2 * nm);
    for (Index q = 0; q < nm; ++q)
        for (Index p = 0; p < nm; ++p) {
            const Scalar w = g2 * std::sqrt(Scalar((q + 1) * (p + 1)));
            h(nm + q, nm + p) = -w * m(q, p);          // a_q^+ a_p^+
            h(q, p) = -w * std::conj(m(q, p));         // a_q a_p
            h(nm + q, p) = w * n(p, q);                // a_q^+ a_p
            h(q, nm + p) = w * n(q, p);                // a_q a_p^+
        }
    CMat<Scalar> t = CMat<Scalar>::Zero(2 * nm, 2 * nm);
    const Scalar s = Scalar(1) / std::sqrt(Scalar(2));
    for (Index q = 0; q < nm; ++q) {
        t(q, 2 * q) = s;
        t(q, 2 * q + 1) = C(0, s);
        t(nm + q, 2 * q) = s;
        t(nm + q, 2 * q + 1) = C(0, -s);
    }
    const CMat<Scalar> quad = t.transpose() * h * t;
    return {detail::symmetrize<Scalar>(Scalar(2) * quad.real())};
}

template <typename Scalar>
Scalar min_eigenvalue(const BilinearForm<Scalar>& f) {
    Eigen::SelfAdjointEigenSolver<Mat<Scalar>> es(f.a_matrix, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

/// Throws NumericError when A has an eigenvalue below -tol * max|eigenvalue|.
template <typename Scalar>
void check_positive_semidefinite(const BilinearForm<Scalar>& f, Scalar tol = Scalar(1e-9)) {
    Eigen::SelfAdjointEigenSolver<Mat<Scalar>> es(f.a_matrix, Eigen::EigenvaluesOnly);
    const Vec<Scalar>& ev = es.eigenvalues();
    const Scalar scale = std::max(ev.cwiseAbs().maxCoeff(), std::numeric_limits<Scalar>::min());
    if (ev.minCoeff() < -tol * scale) {
        std::ostringstream os;
        os << "bilinear form is indefinite: eigenvalue " << ev.minCoeff() << " (largest magnitude " << scale << ")";
        throw NumericError(os.str());
    }
}

template <typename Scalar>
BilinearForm<Scalar> bilinear_from_moments(const CMat<Scalar>& m, const CMat<Scalar>& n, Scalar g,
                                           Scalar tol = Scalar(1e-9)) {
    BilinearForm<Scalar> f = assemble_quadratic_form<Scalar>(m, n, g);
    check_positive_semidefinite(f, tol);
    return f;
}

/// A for <Q^2> = 2 g^2 B P_psi^2, P_psi = -x sin psi + p cos psi.
template <typename Scalar>
BilinearForm<Scalar> single_mode_form(Scalar b, Scalar psi, Scalar g) {
    Vec<Scalar> u(2);
    u << -std::sin(psi), std::cos(psi);
    return {Scalar(4) * g * g * b * u * u.transpose()};
}

// ---------------------------------------------------------------------------
// Gaussian filter exp(-K), K = strength (1/2) Q^T A Q

namespace detail {

// Purification: pure state on 2n modes whose first n modes carry st.
template <typename Scalar>
GaussianState<Scalar> purify(const GaussianState<Scalar>& st) {
    const Index n = st.n_modes();
    const Williamson<Scalar> w = williamson<Scalar>(st.cov);
    Mat<Scalar> core = Mat<Scalar>::Zero(4 * n, 4 * n);
    for (Index k = 0; k < n; ++k) {
        const Scalar nu = std::max(w.nu[k], Scalar(0.5));
        const Scalar c = std::sqrt(std::max(nu * nu - Scalar(0.25), Scalar(0)));
        const Index s = 2 * k, a = 2 * (n + k);
        core(s, s) = core(s + 1, s + 1) = nu;
        core(a, a) = core(a + 1, a + 1) = nu;
        core(s, a) = core(a, s) = c;
        core(s + 1, a + 1) = core(a + 1, s + 1) = -c;
    }
    Mat<Scalar> big = Mat<Scalar>::Identity(4 * n, 4 * n);
    big.topLeftCorner(2 * n, 2 * n) = w.s;
    GaussianState<Scalar> out{Vec<Scalar>::Zero(4 * n), symmetrize<Scalar>(big * core * big.transpose())};
    out.mean.head(2 * n) = st.mean;
    return out;
}

// Pure-state update through the complex matrix Z of the wave function
// psi(x) ~ exp(-x^T Z x / 2 + ...). In block ordering the annihilators of the
// state are L^T (Q - mu) with L^T = [Z, i I]; the filter maps them to
// L^T exp(i Omega A) (Q - mu').
template <typename Scalar>
GaussianState<Scalar> filter_pure(const GaussianState<Scalar>& st, const Mat<Scalar>& a_interleaved) {
    using C = std::complex<Scalar>;
    const Index n = st.n_modes();
    const Mat<Scalar> perm = block_permutation<Scalar>(n);
    const Mat<Scalar> cov = perm * st.cov * perm.transpose();
    const Vec<Scalar> mu = perm * st.mean;
    const Mat<Scalar> a = perm * a_interleaved * perm.transpose();

    const Mat<Scalar> sxx = cov.topLeftCorner(n, n);
    const Mat<Scalar> spx = cov.bottomLeftCorner(n, n);
    const Mat<Scalar> sxx_inv = sxx.llt().solve(Mat<Scalar>::Identity(n, n));
    const Mat<Scalar> u = symmetrize<Scalar>(Scalar(0.5) * sxx_inv);
    const Mat<Scalar> v = symmetrize<Scalar>(Mat<Scalar>(-spx * sxx_inv));

    CMat<Scalar> lt(n, 2 * n);
    lt.leftCols(n) = u.template cast<C>() + C(0, 1) * v.template cast<C>();
    lt.rightCols(n) = C(0, 1) * CMat<Scalar>::Identity(n, n);

    Mat<Scalar> om = Mat<Scalar>::Zero(2 * n, 2 * n);
    om.topRightCorner(n, n) = Mat<Scalar>::Identity(n, n);
    om.bottomLeftCorner(n, n) = -Mat<Scalar>::Identity(n, n);
    const CMat<Scalar> gen = C(0, 1) * (om * a).template cast<C>();
    const CMat<Scalar> heis = gen.exp();
    const CMat<Scalar> lt2 = lt * heis;

    const CMat<Scalar> p2 = lt2.leftCols(n);
    const CMat<Scalar> r2 = lt2.rightCols(n);
    CMat<Scalar> z = C(0, 1) * r2.fullPivLu().solve(p2);
    z = (z + z.transpose()).eval() / C(2);
    const Mat<Scalar> u2 = symmetrize<Scalar>(z.real());
    const Mat<Scalar> v2 = symmetrize<Scalar>(z.imag());
    Eigen::LLT<Mat<Scalar>> llt(u2);
    if (llt.info() != Eigen::Success) throw NumericError("gaussian filter lost positivity (invalid form or strength)");

    const Mat<Scalar> sxx2 = Scalar(0.5) * llt.solve(Mat<Scalar>::Identity(n, n));
    Mat<Scalar> cov2(2 * n, 2 * n);
    cov2.topLeftCorner(n, n) = sxx2;
    cov2.bottomLeftCorner(n, n) = -v2 * sxx2;
    cov2.topRightCorner(n, n) = cov2.bottomLeftCorner(n, n).transpose();
    cov2.bottomRightCorner(n, n) = Scalar(0.5) * u2 + v2 * sxx2 * v2;

    const CVec<Scalar> rhs = lt * mu.template cast<C>();
    // L'^T mu' = L^T mu: n complex equations for 2n real unknowns
    Mat<Scalar> sys_n(2 * n, 2 * n);
    Vec<Scalar> b_n(2 * n);
    sys_n.topRows(n) = lt2.real();
    sys_n.bottomRows(n) = lt2.imag();
    b_n.head(n) = rhs.real();
    b_n.tail(n) = rhs.imag();
    const Vec<Scalar> mu2 = sys_n.fullPivLu().solve(b_n);

    return {perm.transpose() * mu2, symmetrize<Scalar>(perm.transpose() * cov2 * perm)};
}

}  // namespace detail

/// Normalized exp(-strength (1/2) Q^T A Q) rho exp(-strength (1/2) Q^T A Q).
///
/// Mixed inputs are purified (Williamson plus two-mode squeezed partners),
/// filtered on the system modes and traced back down.
template <typename Scalar>
GaussianState<Scalar> apply_gaussian_filter(const GaussianState<Scalar>& st, const BilinearForm<Scalar>& form,
                                            Scalar strength, Scalar purity_tol = Scalar(1e-10)) {
    const Index n = st.n_modes();
    if (form.a_matrix.rows() != 2 * n || form.a_matrix.cols() != 2 * n)
        throw std::invalid_argument("bilinear form and state have different mode counts");
    if (!(strength >= Scalar(0))) throw std::invalid_argument("filter strength must be non-negative");
    check_physical(st);
    if (strength == Scalar(0) || form.a_matrix.isZero(Scalar(0))) return st;
    const Mat<Scalar> a = detail::symmetrize<Scalar>(strength * form.a_matrix);

    GaussianState<Scalar> out;
    if (is_pure(st, purity_tol)) {
        out = detail::filter_pure(st, a);
    } else {
        const GaussianState<Scalar> big = detail::purify(st);
        Mat<Scalar> a_big = Mat<Scalar>::Zero(4 * n, 4 * n);
        a_big.topLeftCorner(2 * n, 2 * n) = a;
        const GaussianState<Scalar> f = detail::filter_pure(big, a_big);
        out = {f.mean.head(2 * n), f.cov.topLeftCorner(2 * n, 2 * n)};
    }
    check_physical(out);
    return out;
}

// ---------------------------------------------------------------------------
// Wigner functions (single mode)

/// Phase-space density in (x, p) at beta = (x + i p) / sqrt(2):
/// W = exp(-(z - mu)^T cov^{-1} (z - mu) / 2) / (2 pi sqrt(det cov)); the
/// vacuum peak is 1/pi and the integral over dx dp = 2 d^2 beta is one.
template <typename Scalar>
Scalar wigner(const GaussianState<Scalar>& st, std::complex<Scalar> beta) {
    if (st.n_modes() != 1) throw std::invalid_argument("wigner: single-mode state required (take a marginal first)");
    const Scalar det = st.cov.determinant();
    if (!(det > Scalar(0))) throw NumericError("wigner: singular covariance");
    Eigen::Matrix<Scalar, 2, 1> d;
    d << std::sqrt(Scalar(2)) * beta.real() - st.mean[0], std::sqrt(Scalar(2)) * beta.imag() - st.mean[1];
    const Eigen::Matrix<Scalar, 2, 2> cov = st.cov;
    const Scalar quad = d.dot(cov.inverse() * d);
    return std::exp(Scalar(-0.5) * quad) / (Scalar(2) * std::numbers::pi_v<Scalar> * std::sqrt(det));
}

template <typename Scalar>
struct WignerGrid {
    Vec<Scalar> re_beta;  ///< column coordinates
    Vec<Scalar> im_beta;  ///< row coordinates
    Mat<Scalar> w;        ///< w(i, j) at (re_beta[j], im_beta[i])

    /// Riemann sum over dx dp.
    Scalar integral() const {
        const Scalar dre = re_beta.size() > 1 ? re_beta[1] - re_beta[0] : Scalar(0);
        const Scalar dim = im_beta.size() > 1 ? im_beta[1] - im_beta[0] : Scalar(0);
        return Scalar(2) * w.sum() * dre * dim;
    }
};

template <typename Scalar>
WignerGrid<Scalar> wigner_grid(const GaussianState<Scalar>& st, std::complex<Scalar> center, Scalar half_width,
                               Index n_points) {
    if (n_points < 2) throw std::invalid_argument("wigner grid needs at least two points per axis");
    WignerGrid<Scalar> g;
    g.re_beta = Vec<Scalar>::LinSpaced(n_points, center.real() - half_width, center.real() + half_width);
    g.im_beta = Vec<Scalar>::LinSpaced(n_points, center.imag() - half_width, center.imag() + half_width);
    g.w.resize(n_points, n_points);
    for (Index i = 0; i < n_points; ++i)
        for (Index j = 0; j < n_points; ++j) g.w(i, j) = wigner(st, std::complex<Scalar>(g.re_beta[j], g.im_beta[i]));
    return g;
}

/// Principal axes of a single-mode covariance.
template <typename Scalar>
struct Ellipse {
    Scalar major_var = 0;  ///< variance along the major axis (x, p units)
    Scalar minor_var = 0;
    Scalar angle = 0;  ///< major-axis angle from the x axis, in [0, pi)
    Scalar axis_ratio() const { return std::sqrt(major_var / minor_var); }
    Scalar variance_ratio() const { return major_var / minor_var; }
};

template <typename Scalar>
Ellipse<Scalar> ellipse(const GaussianState<Scalar>& st) {
    if (st.n_modes() != 1) throw std::invalid_argument("ellipse: single-mode state required");
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<Scalar, 2, 2>> es(Eigen::Matrix<Scalar, 2, 2>(st.cov));
    Ellipse<Scalar> e;
    e.minor_var = es.eigenvalues()[0];
    e.major_var = es.eigenvalues()[1];
    const auto v = es.eigenvectors().col(1);
    Scalar ang = std::atan2(v[1], v[0]);
    if (ang < Scalar(0)) ang += std::numbers::pi_v<Scalar>;
    if (ang >= std::numbers::pi_v<Scalar>) ang -= std::numbers::pi_v<Scalar>;
    e.angle = ang;
    return e;
}

/// Variance of u . Q for a unit vector u.
template <typename Scalar>
Scalar quadrature_variance(const GaussianState<Scalar>& st, const Vec<Scalar>& u) {
    return u.dot(st.cov * u);
}

// ---------------------------------------------------------------------------
// Two-mode entanglement

template <typename Scalar>
Mat<Scalar> partial_transpose(const Mat<Scalar>& cov, const std::vector<Index>& modes_b) {
    Mat<Scalar> out = cov;
    for (Index m : modes_b) {
        if (m < 0 || 2 * m + 1 >= cov.rows()) throw std::out_of_range("mode index out of range");
        out.row(2 * m + 1) *= Scalar(-1);
        out.col(2 * m + 1) *= Scalar(-1);
    }
    return out;
}

namespace detail {
template <typename Scalar>
void require_two_mode_partition(const GaussianState<Scalar>& st, Index mode_a, Index mode_b) {
    if (st.n_modes() != 2) throw std::invalid_argument("two-mode state required");
    if (mode_a == mode_b || mode_a < 0 || mode_b < 0 || mode_a > 1 || mode_b > 1)
        throw std::invalid_argument("partition must name modes 0 and 1");
}
}  // namespace detail

/// E_N = max(0, -log2(2 nu_min)) of the partial transpose, in ebits.
template <typename Scalar>
Scalar log_negativity(const GaussianState<Scalar>& st, Index mode_a = 0, Index mode_b = 1) {
    detail::require_two_mode_partition(st, mode_a, mode_b);
    check_physical(st);
    const Vec<Scalar> nu = symplectic_eigenvalues<Scalar>(partial_transpose<Scalar>(st.cov, {mode_b}));
    return std::max(Scalar(0), -std::log2(Scalar(2) * nu.minCoeff()));
}

template <typename Scalar>
struct DuanResult {
    Scalar value = 0;
    bool entangled = false;
};

/// Var(x_A - x_B) + Var(p_A + p_B); below 2 only for entangled states.
template <typename Scalar>
DuanResult<Scalar> duan_criterion(const GaussianState<Scalar>& st, Index mode_a = 0, Index mode_b = 1,
                                  Scalar tol = Scalar(1e-12)) {
    detail::require_two_mode_partition(st, mode_a, mode_b);
    const auto& c = st.cov;
    const Index xa = 2 * mode_a, pa = xa + 1, xb = 2 * mode_b, pb = xb + 1;
    DuanResult<Scalar> r;
    r.value = c(xa, xa) + c(xb, xb) - Scalar(2) * c(xa, xb) + c(pa, pa) + c(pb, pb) + Scalar(2) * c(pa, pb);
    r.entangled = r.value < Scalar(2) - tol;
    return r;
}

}  // namespace hhgq::cv
