#pragma once

#include <zeitlin/dynamics.hpp>

#include <cmath>
#include <string>
#include <vector>

namespace zeitlin {

// One sampled point of a trajectory: the sorted spectrum of Xi and all
// monitored conserved scalars. Monomial Casimirs run m = 1..m_max.
struct DiagnosticsRecord {
    double t;
    Eigen::VectorXd xi_eigenvalues;
    std::vector<double> c_m;
    std::vector<double> j_m;
    std::vector<double> k_m;
    double cross_helicity;
    double hamiltonian;
};

// Monomial Casimirs of the axisymmetric system. Traces of anti-Hermitian
// products alternate between purely real and purely imaginary with the
// power; the value is reported from the nonvanishing part and the other
// part is checked as a residue. part_* records which part that is.
struct AxisymCasimirs {
    std::vector<double> c_m;
    std::vector<double> j_m;
    std::vector<double> k_m;
    double cross_helicity;
};

struct Casimirs2d {
    std::vector<double> c_m;
    std::vector<double> i_m;
};

// Parity convention for the monitored series: "im" when the monomial
// trace is purely imaginary, "re" when purely real.
inline const char* casimir_part(int m) { return (m % 2) ? "im" : "re"; }
inline const char* helicity_part(int m) { return (m % 2) ? "re" : "im"; }

namespace detail {

// Keeps the expected complex part of a trace and validates that the
// other part is rounding residue.
inline double keep_part(Complex z, bool imaginary_part, double tol,
                        const char* what) {
    const double kept = imaginary_part ? z.imag() : z.real();
    const double residue = imaginary_part ? z.real() : z.imag();
    if (std::abs(residue) > tol * std::max(1.0, std::abs(kept)))
        throw numerical_error(std::string(what) +
                              ": unexpected complex residue " +
                              std::to_string(residue));
    return kept;
}

} // namespace detail

// Sorted imaginary parts of the spectrum of an anti-Hermitian field,
// computed as the (real, ascending) eigenvalues of -i Xi. Sorting is a
// valid matching across time because the flow is isospectral; a
// near-degenerate numerical crossing permutes equal values and leaves
// drift-of-sorted-values unaffected.
inline Eigen::VectorXd xi_spectrum(const QuantizedField& xi) {
    const Matrix hermitian = Complex(0, -1) * xi.matrix();
    Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian);
    if (solver.info() != Eigen::Success)
        throw numerical_error("xi_spectrum: eigensolve failed");
    return solver.eigenvalues();
}

// H = -(2 pi / N) [ tr(Psi W - Q^2) + tr(Xi Laplacian(Xi) - P^2) ]
// with Psi = Laplacian^{-1} W.
inline double hamiltonian_axisym(const MhdState& s,
                                 const LaplacianSpectralData& data) {
    require_same_dim(data.n, s.n(), "hamiltonian_axisym");
    const Matrix psi = invert_laplacian(data, s.w).matrix();
    const Matrix lap_xi = apply_laplacian(data, s.xi).matrix();
    const Complex raw = (psi * s.w.matrix()).trace() -
                        (s.q.matrix() * s.q.matrix()).trace() +
                        (s.xi.matrix() * lap_xi).trace() -
                        (s.p.matrix() * s.p.matrix()).trace();
    const double kept =
        detail::keep_part(raw, false, 1e-13, "hamiltonian_axisym");
    return -(2.0 * PI / data.n) * kept;
}

// C_m = (4 pi / N) tr(Xi^m), J_m = (4 pi / N) tr(P Xi^m),
// K_m = (4 pi / N) tr(Q Xi^m) for m = 1..m_max, and the cross helicity
// I = (4 pi / N) tr(Xi W - P Q).
inline AxisymCasimirs casimirs_axisym(const MhdState& s,
                                      const LaplacianSpectralData& data,
                                      int m_max) {
    require_same_dim(data.n, s.n(), "casimirs_axisym");
    if (m_max < 1 || m_max > data.n)
        throw usage_error("casimirs_axisym: need 1 <= m_max <= N, got " +
                          std::to_string(m_max));
    const double scale = 4.0 * PI / data.n;

    AxisymCasimirs out;
    Matrix power = s.xi.matrix();
    for (int m = 1; m <= m_max; ++m) {
        const bool odd = (m % 2) != 0;
        out.c_m.push_back(scale * detail::keep_part(power.trace(), odd, 1e-12,
                                                    "casimirs_axisym: C"));
        out.j_m.push_back(scale *
                          detail::keep_part((s.p.matrix() * power).trace(),
                                            !odd, 1e-12, "casimirs_axisym: J"));
        out.k_m.push_back(scale *
                          detail::keep_part((s.q.matrix() * power).trace(),
                                            !odd, 1e-12, "casimirs_axisym: K"));
        if (m < m_max) power = power * s.xi.matrix();
    }

    const Complex cross = (s.xi.matrix() * s.w.matrix()).trace() -
                          (s.p.matrix() * s.q.matrix()).trace();
    out.cross_helicity =
        scale * detail::keep_part(cross, false, 1e-12, "casimirs_axisym: I");
    return out;
}

// C_m = (4 pi / N) tr(Theta^m) and I_m = (4 pi / N) tr(W Theta^m) of the
// two-dimensional system.
inline Casimirs2d casimirs_2d(const QuantizedField& w,
                              const QuantizedField& theta, int m_max) {
    require_same_dim(w.n(), theta.n(), "casimirs_2d");
    const int n = w.n();
    if (m_max < 1 || m_max > n)
        throw usage_error("casimirs_2d: need 1 <= m_max <= N, got " +
                          std::to_string(m_max));
    const double scale = 4.0 * PI / n;

    Casimirs2d out;
    Matrix power = theta.matrix();
    for (int m = 1; m <= m_max; ++m) {
        const bool odd = (m % 2) != 0;
        out.c_m.push_back(
            scale * detail::keep_part(power.trace(), odd, 1e-12, "casimirs_2d: C"));
        out.i_m.push_back(scale *
                          detail::keep_part((w.matrix() * power).trace(), !odd,
                                            1e-12, "casimirs_2d: I"));
        if (m < m_max) power = power * theta.matrix();
    }
    return out;
}

inline DiagnosticsRecord build_record(double t, const MhdState& s,
                                      const LaplacianSpectralData& data,
                                      int m_max) {
    DiagnosticsRecord rec;
    rec.t = t;
    rec.xi_eigenvalues = xi_spectrum(s.xi);
    auto cas = casimirs_axisym(s, data, m_max);
    rec.c_m = std::move(cas.c_m);
    rec.j_m = std::move(cas.j_m);
    rec.k_m = std::move(cas.k_m);
    rec.cross_helicity = cas.cross_helicity;
    rec.hamiltonian = hamiltonian_axisym(s, data);

    for (int i = 0; i < rec.xi_eigenvalues.size(); ++i)
        if (!std::isfinite(rec.xi_eigenvalues(i)))
            throw numerical_error("build_record: nonfinite eigenvalue");
    for (const auto* series : {&rec.c_m, &rec.j_m, &rec.k_m})
        for (double v : *series)
            if (!std::isfinite(v))
                throw numerical_error("build_record: nonfinite Casimir");
    if (!std::isfinite(rec.cross_helicity) || !std::isfinite(rec.hamiltonian) ||
        !std::isfinite(rec.t))
        throw numerical_error("build_record: nonfinite entry");
    return rec;
}

// One row of a drift summary: the monitored series' name, which complex
// part it was read from, and max_t |value(t) - value(0)|.
struct DriftRow {
    std::string name;
    std::string part;
    double drift;
};

struct DriftSummary {
    std::vector<DriftRow> rows;
    double hamiltonian_relative;
};

inline DriftSummary drift_report(const std::vector<DiagnosticsRecord>& records) {
    if (records.size() < 2)
        throw usage_error("drift_report: need at least 2 records, got " +
                          std::to_string(records.size()));
    const auto& first = records.front();
    const int n_lambda = static_cast<int>(first.xi_eigenvalues.size());
    const int m_max = static_cast<int>(first.c_m.size());

    DriftSummary out;
    out.rows.reserve(static_cast<std::size_t>(n_lambda + 3 * m_max + 2));
    for (int i = 0; i < n_lambda; ++i)
        out.rows.push_back({"lambda_" + std::to_string(i + 1), "im", 0.0});
    for (int m = 1; m <= m_max; ++m)
        out.rows.push_back({"C_" + std::to_string(m), casimir_part(m), 0.0});
    for (int m = 1; m <= m_max; ++m)
        out.rows.push_back({"J_" + std::to_string(m), helicity_part(m), 0.0});
    for (int m = 1; m <= m_max; ++m)
        out.rows.push_back({"K_" + std::to_string(m), helicity_part(m), 0.0});
    out.rows.push_back({"crosshel", "re", 0.0});
    out.rows.push_back({"H", "re", 0.0});

    out.hamiltonian_relative = 0.0;
    const double h0 = first.hamiltonian;
    for (const auto& rec : records) {
        if (rec.xi_eigenvalues.size() != n_lambda ||
            rec.c_m.size() != first.c_m.size() ||
            rec.j_m.size() != first.j_m.size() ||
            rec.k_m.size() != first.k_m.size())
            throw usage_error("drift_report: inconsistent record layout");
        std::size_t r = 0;
        for (int i = 0; i < n_lambda; ++i, ++r)
            out.rows[r].drift =
                std::max(out.rows[r].drift,
                         std::abs(rec.xi_eigenvalues(i) - first.xi_eigenvalues(i)));
        for (int m = 0; m < m_max; ++m, ++r)
            out.rows[r].drift = std::max(out.rows[r].drift,
                                         std::abs(rec.c_m[m] - first.c_m[m]));
        for (int m = 0; m < m_max; ++m, ++r)
            out.rows[r].drift = std::max(out.rows[r].drift,
                                         std::abs(rec.j_m[m] - first.j_m[m]));
        for (int m = 0; m < m_max; ++m, ++r)
            out.rows[r].drift = std::max(out.rows[r].drift,
                                         std::abs(rec.k_m[m] - first.k_m[m]));
        out.rows[r].drift =
            std::max(out.rows[r].drift,
                     std::abs(rec.cross_helicity - first.cross_helicity));
        ++r;
        out.rows[r].drift = std::max(
            out.rows[r].drift, std::abs(rec.hamiltonian - first.hamiltonian));
        if (h0 != 0.0)
            out.hamiltonian_relative =
                std::max(out.hamiltonian_relative,
                         std::abs(rec.hamiltonian - h0) / std::abs(h0));
    }
    return out;
}

} // namespace zeitlin
