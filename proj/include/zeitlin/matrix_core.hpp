#pragma once

// Dense complex-matrix primitives for anti-Hermitian traceless fields:
// the scaled commutator [.,.]_N = (1/hbar)[.,.], the scaled Frobenius
// pairing (4pi/N) Re tr(a^dag b), and deterministic random fields.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace zeitlin {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

inline constexpr double PI = 3.14159265358979323846;

// Error taxonomy. The CLI maps these onto exit codes: usage 2,
// numerical 3, I/O 4.
struct usage_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Truncation scale hbar = 2/sqrt(N^2 - 1).
struct Hbar {
    int n;
    double value;

    explicit Hbar(int n_) : n(n_) {
        if (n_ < 2) throw usage_error("Hbar: need n >= 2, got " + std::to_string(n_));
        value = 2.0 / std::sqrt(static_cast<double>(n_) * n_ - 1.0);
    }
};

namespace detail {

// Skew part (m - m^dag)/2 with the trace removed: the orthogonal
// projection onto su(N) inside the complex matrices.
inline Matrix skew_detrace(const Matrix& m) {
    Matrix s = 0.5 * (m - m.adjoint());
    const Complex mean = s.trace() / static_cast<double>(m.rows());
    s.diagonal().array() -= mean;
    return s;
}

// Skew part only; used by the integrator's intermediate iterates,
// whose traces are genuinely nonzero at O(h^2) and must be kept.
inline Matrix skew_part(const Matrix& m) { return 0.5 * (m - m.adjoint()); }

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

} // namespace detail

// A traceless anti-Hermitian N x N complex matrix: the quantized
// counterpart of a real mean-zero function on the sphere. Factory
// constructors either project onto the constraint set exactly or
// validate an allegedly conforming matrix.
class QuantizedField {
  public:
    static QuantizedField zero(int n) {
        require_dim(n);
        return QuantizedField(Matrix::Zero(n, n));
    }

    // Projects: skew part taken, trace removed. Always valid.
    static QuantizedField from_skew(const Matrix& m) {
        require_square(m);
        return QuantizedField(detail::skew_detrace(m));
    }

    // Validates that m already satisfies the invariants, then projects
    // the residual rounding away so the stored matrix is exact.
    static QuantizedField checked(const Matrix& m) {
        require_square(m);
        const double scale = std::max(1.0, m.norm());
        if (detail::max_abs(m + m.adjoint()) > 1e-10 * scale)
            throw usage_error("QuantizedField: matrix is not anti-Hermitian");
        if (std::abs(m.trace()) > 1e-12 * std::max(m.norm(), 1e-300))
            throw usage_error("QuantizedField: matrix is not traceless");
        return QuantizedField(detail::skew_detrace(m));
    }

    // Validates like checked but stores the matrix bit-for-bit. For
    // reloading states that were saved as exact projections: the
    // projection is not bitwise idempotent (it subtracts the rounding
    // residue of the trace), so re-projecting on load would break
    // byte-identical save / load / re-save round trips.
    static QuantizedField restored(const Matrix& m) {
        require_square(m);
        const double scale = std::max(1.0, m.norm());
        if (detail::max_abs(m + m.adjoint()) > 1e-10 * scale)
            throw usage_error("QuantizedField: matrix is not anti-Hermitian");
        if (std::abs(m.trace()) > 1e-12 * std::max(m.norm(), 1e-300))
            throw usage_error("QuantizedField: matrix is not traceless");
        return QuantizedField(m);
    }

    const Matrix& matrix() const { return m_; }
    int n() const { return static_cast<int>(m_.rows()); }

  private:
    explicit QuantizedField(Matrix m) : m_(std::move(m)) {}

    static void require_dim(int n) {
        if (n < 2) throw usage_error("QuantizedField: need n >= 2");
    }
    static void require_square(const Matrix& m) {
        if (m.rows() != m.cols() || m.rows() < 2)
            throw usage_error("QuantizedField: need a square matrix, n >= 2");
    }

    Matrix m_;
};

inline void require_same_dim(int a, int b, const char* where) {
    if (a != b)
        throw usage_error(std::string(where) + ": dimension mismatch (" +
                          std::to_string(a) + " vs " + std::to_string(b) + ")");
}

// [a, b]_N = (1/hbar)(ab - ba), re-antihermitized to suppress rounding
// drift over long trajectories.
inline QuantizedField scaled_commutator(const QuantizedField& a,
                                        const QuantizedField& b,
                                        const Hbar& hbar) {
    require_same_dim(a.n(), b.n(), "scaled_commutator");
    require_same_dim(a.n(), hbar.n, "scaled_commutator");
    Matrix c = (a.matrix() * b.matrix() - b.matrix() * a.matrix()) / hbar.value;
    return QuantizedField::from_skew(c);
}

// <a, b>_F = (4pi/N) Re tr(a^dag b).
inline double frobenius_pairing(const QuantizedField& a, const QuantizedField& b) {
    require_same_dim(a.n(), b.n(), "frobenius_pairing");
    const double t = (a.matrix().adjoint() * b.matrix()).trace().real();
    return 4.0 * PI / a.n() * t;
}

namespace detail {

// Deterministic standard normals: 64-bit Mersenne Twister driving a
// Box-Muller transform on 53-bit uniforms. std::normal_distribution is
// implementation-defined, so it cannot be used where bit-identical
// output across platforms is required.
class NormalSource {
  public:
    explicit NormalSource(std::uint64_t seed) : rng_(seed) {}

    // returns a pair of independent N(0,1) samples
    void pair(double& z0, double& z1) {
        const double u1 = uniform_open();
        const double u2 = uniform_open();
        const double r = std::sqrt(-2.0 * std::log(u1));
        z0 = r * std::cos(2.0 * PI * u2);
        z1 = r * std::sin(2.0 * PI * u2);
    }

  private:
    // uniform on (0, 1]: never zero, so log() above is safe
    double uniform_open() {
        const std::uint64_t bits = rng_() >> 11;
        return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
    }

    std::mt19937_64 rng_;
};

} // namespace detail

// Random su(N) matrix: independent standard-normal real and imaginary
// parts, skew-projected and de-traced. Deterministic given (n, seed).
inline QuantizedField random_field(int n, std::uint64_t seed) {
    if (n < 2) throw usage_error("random_field: need n >= 2");
    detail::NormalSource src(seed);
    Matrix g(n, n);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            double re, im;
            src.pair(re, im);
            g(r, c) = Complex(re, im);
        }
    }
    return QuantizedField::from_skew(g);
}

} // namespace zeitlin
