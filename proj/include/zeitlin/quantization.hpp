#pragma once

// Quantization machinery: spin generators, the quantized Laplacian and
// its inverse on traceless matrices, matrix harmonics (fast per-offset
// eigensolve route and the Wigner-3j formula as an independent oracle),
// and conversion between spherical-harmonic coefficient tables and
// quantized fields.

#include <zeitlin/matrix_core.hpp>
#include <zeitlin/wigner.hpp>

#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace zeitlin {

// Generators X_a = hbar * J_a of the spin-(N-1)/2 irreducible
// representation, rescaled so that X1^2 + X2^2 + X3^2 = I and
// [X_a, X_b]/hbar = i eps_abc X_c. The diagonal of X3 and the ladder
// coefficients are kept separately for the banded Laplacian kernel.
struct SpinGenerators {
    int n;
    Hbar hbar;
    Matrix x1, x2, x3;
    Eigen::VectorXd diag_x3; // d(k) = (j - k) hbar, k = 0..n-1
    Eigen::VectorXd ladder;  // alpha(k) = sqrt(k (n-k)) hbar, k = 0..n
};

inline SpinGenerators build_generators(int n) {
    if (n < 2) throw usage_error("build_generators: need n >= 2");
    const Hbar hb(n);
    const double j = 0.5 * (n - 1);

    Matrix jplus = Matrix::Zero(n, n);
    for (int k = 0; k + 1 < n; ++k)
        jplus(k, k + 1) = std::sqrt(double(k + 1) * (n - 1 - k));
    const Matrix jminus = jplus.adjoint();

    SpinGenerators g{n, hb, Matrix(), Matrix(), Matrix(),
                     Eigen::VectorXd(n), Eigen::VectorXd(n + 1)};
    g.x1 = 0.5 * hb.value * (jplus + jminus);
    g.x2 = Complex(0, -0.5) * hb.value * (jplus - jminus);
    g.x3 = Matrix::Zero(n, n);
    for (int k = 0; k < n; ++k) g.x3(k, k) = (j - k) * hb.value;

    for (int k = 0; k < n; ++k) g.diag_x3(k) = (j - k) * hb.value;
    for (int k = 0; k <= n; ++k)
        g.ladder(k) = std::sqrt(double(k) * (n - k)) * hb.value;

    // structure relations are construction postconditions
    const Complex i(0, 1);
    const double tol = 1e-13;
    if (detail::max_abs((g.x1 * g.x2 - g.x2 * g.x1) / hb.value - i * g.x3) > tol ||
        detail::max_abs(g.x1 * g.x1 + g.x2 * g.x2 + g.x3 * g.x3 -
                        Matrix::Identity(n, n)) > tol)
        throw numerical_error("build_generators: structure relations violated");
    return g;
}

namespace detail {

// The quantized Laplacian via the exact operator rearrangement
//   sum_a [X_a, [X_a, M]] = 2M - 2 X3 M X3 - X+ M X- - X- M X+
// (valid because sum_a X_a^2 = I), evaluated with the banded structure
// of X3 and the ladder operators: O(N^2) per application. The sign
// convention makes the spectrum -l(l+1).
inline Matrix laplacian_kernel(const Eigen::VectorXd& diag_x3,
                               const Eigen::VectorXd& ladder, double hbar,
                               const Matrix& m) {
    const int n = static_cast<int>(diag_x3.size());
    if (m.rows() != n || m.cols() != n)
        throw usage_error("laplacian_kernel: dimension mismatch");
    const double inv_h2 = 1.0 / (hbar * hbar);
    Matrix out(n, n);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            Complex v = (2.0 - 2.0 * diag_x3(r) * diag_x3(c)) * m(r, c);
            if (r + 1 < n && c + 1 < n)
                v -= ladder(r + 1) * ladder(c + 1) * m(r + 1, c + 1);
            if (r > 0 && c > 0)
                v -= ladder(r) * ladder(c) * m(r - 1, c - 1);
            out(r, c) = -inv_h2 * v;
        }
    }
    return out;
}

inline Matrix laplacian_kernel(const SpinGenerators& g, const Matrix& m) {
    return laplacian_kernel(g.diag_x3, g.ladder, g.hbar.value, m);
}

} // namespace detail

inline QuantizedField apply_laplacian(const SpinGenerators& g, const QuantizedField& a) {
    require_same_dim(g.n, a.n(), "apply_laplacian");
    return QuantizedField::from_skew(detail::laplacian_kernel(g, a.matrix()));
}

// Eigen decomposition of the Laplacian restricted to each diagonal
// offset m >= 0 (the offsets -m carry the same restriction matrix).
// Column il of vectors[m] is the eigenvector for l = m + il, with
// eigenvalue -l(l+1); columns are sign-fixed so their first component
// above 1e-8 in magnitude is positive, making the basis deterministic.
struct LaplacianSpectralData {
    int n;
    Hbar hbar;
    Eigen::VectorXd diag_x3;
    Eigen::VectorXd ladder;
    std::vector<Eigen::MatrixXd> vectors;
    std::vector<Eigen::VectorXd> eigenvalues;
};

inline LaplacianSpectralData build_spectral_data(const SpinGenerators& g) {
    const int n = g.n;
    LaplacianSpectralData data{n, g.hbar, g.diag_x3, g.ladder, {}, {}};
    data.vectors.reserve(static_cast<std::size_t>(n));
    data.eigenvalues.reserve(static_cast<std::size_t>(n));

    for (int m = 0; m < n; ++m) {
        const int len = n - m;
        // restriction of the Laplacian to offset m, assembled by
        // applying the kernel to the canonical offset basis
        Eigen::MatrixXd restriction(len, len);
        Matrix basis = Matrix::Zero(n, n);
        for (int k = 0; k < len; ++k) {
            basis(k, k + m) = 1.0;
            const Matrix image = detail::laplacian_kernel(g, basis);
            for (int r = 0; r < len; ++r) restriction(r, k) = image(r, r + m).real();
            basis(k, k + m) = 0.0;
        }

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(restriction);
        if (solver.info() != Eigen::Success)
            throw numerical_error("build_spectral_data: eigensolve failed at offset " +
                                  std::to_string(m));

        // ascending eigenvalue order from the solver means descending l;
        // store ascending in l instead
        Eigen::MatrixXd v(len, len);
        Eigen::VectorXd ev(len);
        for (int il = 0; il < len; ++il) {
            v.col(il) = solver.eigenvectors().col(len - 1 - il);
            ev(il) = solver.eigenvalues()(len - 1 - il);
        }
        for (int il = 0; il < len; ++il) {
            for (int k = 0; k < len; ++k) {
                if (std::abs(v(k, il)) > 1e-8) {
                    if (v(k, il) < 0) v.col(il) = -v.col(il);
                    break;
                }
            }
        }
        data.vectors.push_back(std::move(v));
        data.eigenvalues.push_back(std::move(ev));
    }
    return data;
}

namespace detail {

inline Matrix laplacian_kernel(const LaplacianSpectralData& data, const Matrix& m) {
    return laplacian_kernel(data.diag_x3, data.ladder, data.hbar.value, m);
}

} // namespace detail

inline QuantizedField apply_laplacian(const LaplacianSpectralData& data,
                                      const QuantizedField& a) {
    require_same_dim(data.n, a.n(), "apply_laplacian");
    return QuantizedField::from_skew(detail::laplacian_kernel(data, a.matrix()));
}

namespace detail {

inline Matrix detrace(Matrix m) {
    const Complex mean = m.trace() / static_cast<double>(m.rows());
    m.diagonal().array() -= mean;
    return m;
}

// Unique traceless solution of Laplacian(psi) = w, on a raw matrix.
// The l = 0 direction is the kernel, so w must be traceless.
inline Matrix invert_kernel(const LaplacianSpectralData& data, const Matrix& w) {
    const int n = data.n;
    if (w.rows() != n || w.cols() != n)
        throw usage_error("invert_laplacian: dimension mismatch");
    if (std::abs(w.trace()) > 1e-12 * std::max(w.norm(), 1e-300))
        throw usage_error("invert_laplacian: input has a kernel component "
                          "(nonzero trace)");

    Matrix out = Matrix::Zero(n, n);
    for (int m = -(n - 1); m <= n - 1; ++m) {
        const int am = std::abs(m);
        const int len = n - am;
        const auto& v = data.vectors[static_cast<std::size_t>(am)];
        const auto& ev = data.eigenvalues[static_cast<std::size_t>(am)];

        Eigen::VectorXcd comp(len);
        for (int k = 0; k < len; ++k)
            comp(k) = (m >= 0) ? w(k, k + m) : w(k + am, k);

        Eigen::VectorXcd coeff = v.transpose().cast<Complex>() * comp;
        for (int k = 0; k < len; ++k) {
            const int l = am + k;
            coeff(k) = (l == 0) ? Complex(0, 0) : coeff(k) / ev(k);
        }
        const Eigen::VectorXcd back = v.cast<Complex>() * coeff;
        for (int k = 0; k < len; ++k) {
            if (m >= 0) out(k, k + m) = back(k);
            else out(k + am, k) = back(k);
        }
    }
    return out;
}

} // namespace detail

inline QuantizedField invert_laplacian(const LaplacianSpectralData& data,
                                       const QuantizedField& w) {
    return QuantizedField::from_skew(detail::invert_kernel(data, w.matrix()));
}

// Matrix harmonic T_{lm} from the explicit Wigner-3j formula:
//   (T_lm)_{r,c} = (-1)^r sqrt(2l+1) * 3j(j, l, j; -(j-r), m, j-c)
// with j = (N-1)/2 and support on the offset c - r = m. The 3j route
// is numerically adequate for N <= 32.
inline Matrix matrix_harmonic_wigner(int n, int l, int m) {
    if (n < 2) throw usage_error("matrix_harmonic_wigner: need n >= 2");
    if (n > 32)
        throw usage_error("matrix_harmonic_wigner: the 3j route supports n <= 32");
    if (l < 0 || l > n - 1 || std::abs(m) > l)
        throw usage_error("matrix_harmonic_wigner: need 0 <= l <= n-1, |m| <= l");

    const int two_j = n - 1;
    const double scale = std::sqrt(2.0 * l + 1.0);
    Matrix t = Matrix::Zero(n, n);
    for (int r = 0; r < n; ++r) {
        const int c = r + m;
        if (c < 0 || c >= n) continue;
        const int two_m1 = two_j - 2 * r;
        const int two_m2 = two_j - 2 * c;
        const double v =
            wigner_3j(two_j, 2 * l, two_j, -two_m1, 2 * m, two_m2);
        t(r, c) = ((r % 2) ? -1.0 : 1.0) * scale * v;
    }
    return t;
}

// Matrix harmonic from the per-offset eigenbasis, phase-aligned to the
// Wigner-3j convention: the sign-fixed eigenvector needs the factor
// (-1)^m for m >= 0, and T_{l,-m} = (-1)^m adjoint(T_{l,m}).
inline Matrix matrix_harmonic(const LaplacianSpectralData& data, int l, int m) {
    const int n = data.n;
    if (l < 0 || l > n - 1 || std::abs(m) > l)
        throw usage_error("matrix_harmonic: need 0 <= l <= n-1, |m| <= l");
    const int am = std::abs(m);
    const double sign = (am % 2) ? -1.0 : 1.0;

    const auto& v = data.vectors[static_cast<std::size_t>(am)];
    Matrix u = Matrix::Zero(n, n);
    for (int k = 0; k + am < n; ++k) u(k, k + am) = v(k, l - am);

    if (m >= 0) return sign * u;
    return u.adjoint();
}

// Real spherical-harmonic coefficient table for a band-limited field.
// A real-valued mean-zero field has real coefficients and zero (0,0)
// entry. Index layout: l(l+1)+m.
struct BandLimitedField {
    int lmax;
    std::vector<Complex> coeff;

    explicit BandLimitedField(int lmax_)
        : lmax(lmax_), coeff(static_cast<std::size_t>(lmax_ + 1) * (lmax_ + 1)) {
        if (lmax_ < 0) throw usage_error("BandLimitedField: need lmax >= 0");
    }

    Complex& at(int l, int m) { return coeff[index(l, m)]; }
    const Complex& at(int l, int m) const { return coeff[index(l, m)]; }

  private:
    std::size_t index(int l, int m) const {
        if (l < 0 || l > lmax || std::abs(m) > l)
            throw usage_error("BandLimitedField: index (l=" + std::to_string(l) +
                              ", m=" + std::to_string(m) + ") out of range");
        return static_cast<std::size_t>(l * (l + 1) + m);
    }
};

namespace detail {

// Real harmonics on offset am combine T_{l,+m} and T_{l,-m} so that the
// Wigner phases cancel; everything reduces to the raw sign-fixed
// eigenvector columns. These helpers hold the shared layout constants.
inline void require_real_coefficients(const BandLimitedField& f) {
    for (const Complex& c : f.coeff)
        if (std::abs(c.imag()) > 1e-12 * std::max(1.0, std::abs(c.real())))
            throw usage_error("project_field: coefficients must be real in the "
                              "real-harmonic convention");
    if (std::abs(f.at(0, 0)) > 1e-14)
        throw usage_error("project_field: mean-zero fields require f(0,0) = 0");
}

} // namespace detail

// p_N(f) = sqrt(N/4pi) sum_{l,m} i f^{lm} That_{lm}: anti-Hermitian,
// traceless, and satisfying <p_N Y_lm, p_N Y_l'm'>_F = delta thanks to
// the sqrt(N/4pi) normalization bridge.
inline QuantizedField project_field(const BandLimitedField& f,
                                    const LaplacianSpectralData& data) {
    const int n = data.n;
    if (f.lmax > n - 1)
        throw usage_error("project_field: lmax exceeds n-1");
    detail::require_real_coefficients(f);

    const double scale = std::sqrt(n / (4.0 * PI));
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    Matrix a = Matrix::Zero(n, n);

    // m = 0: diagonal contributions i f^{l0} v^(l)
    {
        const auto& v = data.vectors[0];
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
        for (int l = 1; l <= f.lmax; ++l) acc += f.at(l, 0).real() * v.col(l);
        for (int k = 0; k < n; ++k) a(k, k) += scale * Complex(0, acc(k));
    }

    for (int m = 1; m <= f.lmax; ++m) {
        const auto& v = data.vectors[static_cast<std::size_t>(m)];
        const int len = n - m;
        Eigen::VectorXd u = Eigen::VectorXd::Zero(len); // cos-type (+m)
        Eigen::VectorXd w = Eigen::VectorXd::Zero(len); // sin-type (-m)
        for (int l = m; l <= f.lmax; ++l) {
            u += f.at(l, m).real() * v.col(l - m);
            w += f.at(l, -m).real() * v.col(l - m);
        }
        for (int k = 0; k < len; ++k) {
            a(k, k + m) += scale * inv_sqrt2 * Complex(w(k), u(k));
            a(k + m, k) += scale * inv_sqrt2 * Complex(-w(k), u(k));
        }
    }
    return QuantizedField::from_skew(a);
}

// Inverse of project_field on its image; complete on su(N), so the
// coefficient table always has lmax = N-1.
inline BandLimitedField reconstruct_coeffs(const QuantizedField& a,
                                           const LaplacianSpectralData& data) {
    const int n = data.n;
    require_same_dim(a.n(), n, "reconstruct_coeffs");
    const double scale = std::sqrt(4.0 * PI / n);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    BandLimitedField f(n - 1);

    {
        const auto& v = data.vectors[0];
        Eigen::VectorXd diag_im(n);
        for (int k = 0; k < n; ++k) diag_im(k) = a.matrix()(k, k).imag();
        for (int l = 1; l <= n - 1; ++l)
            f.at(l, 0) = scale * v.col(l).dot(diag_im);
    }

    for (int m = 1; m <= n - 1; ++m) {
        const auto& v = data.vectors[static_cast<std::size_t>(m)];
        const int len = n - m;
        Eigen::VectorXd sum_im(len), diff_re(len);
        for (int k = 0; k < len; ++k) {
            const Complex upper = a.matrix()(k, k + m);
            const Complex lower = a.matrix()(k + m, k);
            sum_im(k) = (upper + lower).imag();
            diff_re(k) = (upper - lower).real();
        }
        for (int l = m; l <= n - 1; ++l) {
            f.at(l, m) = scale * inv_sqrt2 * v.col(l - m).dot(sum_im);
            f.at(l, -m) = scale * inv_sqrt2 * v.col(l - m).dot(diff_re);
        }
    }
    return f;
}

} // namespace zeitlin
