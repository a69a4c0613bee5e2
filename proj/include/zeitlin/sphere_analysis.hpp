#pragma once

// Continuous-side counterpart of the quantized diagnostics: a
// Gauss-Legendre product quadrature on the sphere, real
// spherical-harmonic synthesis and analysis, continuous Casimirs and
// Hamiltonian of band-limited fields, and the quantized-versus-
// continuous convergence study.

#include <zeitlin/diagnostics.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace zeitlin {

namespace detail {

// Gauss-Legendre nodes and weights on [-1, 1], nodes ascending, by
// Newton iteration on the three-term Legendre recurrence.
inline void gauss_legendre(int n, Eigen::VectorXd& x, Eigen::VectorXd& w) {
    x.resize(n);
    w.resize(n);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double z = std::cos(PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = 0.0;
            for (int k = 0; k < n; ++k) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k + 1.0) * z * p1 - k * p2) / (k + 1.0);
            }
            pp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        x(i) = -z;
        x(n - 1 - i) = z;
        w(i) = 2.0 / ((1.0 - z * z) * pp * pp);
        w(n - 1 - i) = w(i);
    }
}

}  // namespace detail

// Product quadrature: Gauss-Legendre in cos(theta), uniform in phi.
// Exact (up to roundoff) for integrands whose harmonic degrees sum to
// max_product_degree() or less.
struct QuadratureGrid {
    int n_theta = 0;
    int n_phi = 0;
    Eigen::VectorXd x;       // cos(theta) at the colatitude nodes, ascending
    Eigen::VectorXd weight;  // Gauss-Legendre weights, sum 2
    Eigen::VectorXd phi;     // longitudes 2 pi j / n_phi

    // The colatitude rule is exact for polynomials in cos(theta) of
    // degree 2 n_theta - 1; the longitude rule resolves Fourier modes
    // up to n_phi - 1.
    int max_product_degree() const {
        return std::min(2 * n_theta - 1, n_phi - 1);
    }
};

inline QuadratureGrid build_grid(int n_theta, int n_phi) {
    if (n_theta < 1 || n_phi < 1)
        throw usage_error("build_grid: need n_theta >= 1 and n_phi >= 1");
    QuadratureGrid g;
    g.n_theta = n_theta;
    g.n_phi = n_phi;
    detail::gauss_legendre(n_theta, g.x, g.weight);
    g.phi.resize(n_phi);
    for (int j = 0; j < n_phi; ++j) g.phi(j) = 2.0 * PI * j / n_phi;
    return g;
}

// Smallest grid exact for harmonic products of the given total degree.
inline QuadratureGrid grid_for_degree(int degree) {
    if (degree < 0) throw usage_error("grid_for_degree: need degree >= 0");
    return build_grid(degree / 2 + 1, degree + 1);
}

namespace detail {

inline void require_grid_degree(const QuadratureGrid& grid, int degree,
                                const std::string& where) {
    if (degree > grid.max_product_degree())
        throw usage_error(where + ": integrand degree " +
                          std::to_string(degree) +
                          " exceeds the grid's exact degree " +
                          std::to_string(grid.max_product_degree()));
}

inline void require_grid_shape(const QuadratureGrid& grid,
                               const Eigen::MatrixXd& values,
                               const std::string& where) {
    if (values.rows() != grid.n_theta || values.cols() != grid.n_phi)
        throw usage_error(where + ": values shape does not match the grid");
}

}  // namespace detail

// Integral over the sphere of a function sampled at the grid nodes,
// values(i, j) at colatitude node i and longitude node j.
inline double integrate(const QuadratureGrid& grid,
                        const Eigen::MatrixXd& values) {
    detail::require_grid_shape(grid, values, "integrate");
    return (grid.weight.transpose() * values).sum() * (2.0 * PI / grid.n_phi);
}

namespace detail {

// Fully normalized associated Legendre functions Pbar_l^m without the
// Condon-Shortley phase, tabulated at a fixed set of cos(theta) nodes.
// Normalized so that the real harmonics built from them are
// orthonormal for the area measure of total mass 4 pi.
struct LegendreTable {
    int lmax;
    std::vector<Eigen::VectorXd> values;  // indexed l (l + 1) / 2 + m

    const Eigen::VectorXd& operator()(int l, int m) const {
        if (l < 0 || l > lmax || m < 0 || m > l)
            throw usage_error("LegendreTable: index out of range");
        return values[static_cast<std::size_t>(l) * (l + 1) / 2 + m];
    }

    int nodes() const { return static_cast<int>(values.front().size()); }
};

inline LegendreTable normalized_legendre(int lmax, const Eigen::VectorXd& x) {
    if (lmax < 0) throw usage_error("normalized_legendre: need lmax >= 0");
    LegendreTable tab;
    tab.lmax = lmax;
    tab.values.resize(static_cast<std::size_t>(lmax + 1) * (lmax + 2) / 2);
    const auto slot = [&tab](int l, int m) -> Eigen::VectorXd& {
        return tab.values[static_cast<std::size_t>(l) * (l + 1) / 2 + m];
    };
    const Eigen::ArrayXd xs = x.array();
    const Eigen::ArrayXd sx = (1.0 - xs.square()).sqrt();

    slot(0, 0) = Eigen::VectorXd::Constant(x.size(), 1.0 / std::sqrt(4.0 * PI));
    for (int m = 1; m <= lmax; ++m)
        slot(m, m) = (std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * sx *
                      slot(m - 1, m - 1).array())
                         .matrix();
    for (int m = 0; m < lmax; ++m)
        slot(m + 1, m) =
            (std::sqrt(2.0 * m + 3.0) * xs * slot(m, m).array()).matrix();
    for (int m = 0; m <= lmax; ++m) {
        for (int l = m + 2; l <= lmax; ++l) {
            const double den = static_cast<double>(l) * l - static_cast<double>(m) * m;
            const double a = std::sqrt((4.0 * l * l - 1.0) / den);
            const double b = std::sqrt((2.0 * l + 1.0) * (l - 1.0 + m) *
                                       (l - 1.0 - m) / ((2.0 * l - 3.0) * den));
            slot(l, m) = (a * xs * slot(l - 1, m).array() -
                          b * slot(l - 2, m).array())
                             .matrix();
        }
    }
    return tab;
}

// d Pbar_l^m / d theta from the angular-momentum ladder,
//   2 dP = sqrt((l+m)(l-m+1)) Pbar_l^{m-1} - sqrt((l-m)(l+m+1)) Pbar_l^{m+1},
// where Pbar_l^{-1} enters as -Pbar_l^{1} and out-of-range orders as 0.
inline Eigen::VectorXd legendre_dtheta(const LegendreTable& tab, int l, int m) {
    if (l < 0 || l > tab.lmax || m < 0 || m > l)
        throw usage_error("legendre_dtheta: index out of range");
    const auto term = [&](int mm) -> Eigen::VectorXd {
        if (std::abs(mm) > l) return Eigen::VectorXd::Zero(tab.nodes());
        if (mm == -1) return -tab(l, 1);
        return tab(l, mm);
    };
    const double lo = std::sqrt(static_cast<double>(l + m) * (l - m + 1));
    const double hi = std::sqrt(static_cast<double>(l - m) * (l + m + 1));
    return 0.5 * (lo * term(m - 1) - hi * term(m + 1));
}

}  // namespace detail

// Values of the band-limited field at the grid nodes. The grid must
// state a degree of at least f.lmax so that later products of two
// synthesized fields still integrate exactly.
inline Eigen::MatrixXd synthesize(const BandLimitedField& f,
                                  const QuadratureGrid& grid) {
    detail::require_grid_degree(grid, f.lmax, "synthesize");
    const detail::LegendreTable tab = detail::normalized_legendre(f.lmax, grid.x);
    const double sqrt2 = std::sqrt(2.0);

    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(grid.n_theta, grid.n_phi);
    Eigen::VectorXd prof = Eigen::VectorXd::Zero(grid.n_theta);
    for (int l = 0; l <= f.lmax; ++l) prof += f.at(l, 0).real() * tab(l, 0);
    out += prof * Eigen::RowVectorXd::Ones(grid.n_phi);
    for (int m = 1; m <= f.lmax; ++m) {
        Eigen::VectorXd pc = Eigen::VectorXd::Zero(grid.n_theta);
        Eigen::VectorXd ps = Eigen::VectorXd::Zero(grid.n_theta);
        for (int l = m; l <= f.lmax; ++l) {
            pc += f.at(l, m).real() * tab(l, m);
            ps += f.at(l, -m).real() * tab(l, m);
        }
        Eigen::RowVectorXd cosm(grid.n_phi);
        Eigen::RowVectorXd sinm(grid.n_phi);
        for (int j = 0; j < grid.n_phi; ++j) {
            cosm(j) = std::cos(m * grid.phi(j));
            sinm(j) = std::sin(m * grid.phi(j));
        }
        out += sqrt2 * (pc * cosm + ps * sinm);
    }
    return out;
}

// Angular derivatives of the synthesized field: d_theta is the
// colatitude derivative, d_phi the plain longitude derivative (no
// 1/sin(theta) factor).
struct SurfaceGradient {
    Eigen::MatrixXd d_theta;
    Eigen::MatrixXd d_phi;
};

inline SurfaceGradient synthesize_gradient(const BandLimitedField& f,
                                           const QuadratureGrid& grid) {
    detail::require_grid_degree(grid, f.lmax, "synthesize_gradient");
    const detail::LegendreTable tab = detail::normalized_legendre(f.lmax, grid.x);
    const double sqrt2 = std::sqrt(2.0);

    SurfaceGradient out;
    out.d_theta = Eigen::MatrixXd::Zero(grid.n_theta, grid.n_phi);
    out.d_phi = Eigen::MatrixXd::Zero(grid.n_theta, grid.n_phi);

    Eigen::VectorXd prof = Eigen::VectorXd::Zero(grid.n_theta);
    for (int l = 0; l <= f.lmax; ++l)
        prof += f.at(l, 0).real() * detail::legendre_dtheta(tab, l, 0);
    out.d_theta += prof * Eigen::RowVectorXd::Ones(grid.n_phi);
    for (int m = 1; m <= f.lmax; ++m) {
        Eigen::VectorXd pc = Eigen::VectorXd::Zero(grid.n_theta);
        Eigen::VectorXd ps = Eigen::VectorXd::Zero(grid.n_theta);
        Eigen::VectorXd dc = Eigen::VectorXd::Zero(grid.n_theta);
        Eigen::VectorXd ds = Eigen::VectorXd::Zero(grid.n_theta);
        for (int l = m; l <= f.lmax; ++l) {
            const Eigen::VectorXd dt = detail::legendre_dtheta(tab, l, m);
            pc += f.at(l, m).real() * tab(l, m);
            ps += f.at(l, -m).real() * tab(l, m);
            dc += f.at(l, m).real() * dt;
            ds += f.at(l, -m).real() * dt;
        }
        Eigen::RowVectorXd cosm(grid.n_phi);
        Eigen::RowVectorXd sinm(grid.n_phi);
        for (int j = 0; j < grid.n_phi; ++j) {
            cosm(j) = std::cos(m * grid.phi(j));
            sinm(j) = std::sin(m * grid.phi(j));
        }
        out.d_theta += sqrt2 * (dc * cosm + ds * sinm);
        out.d_phi += sqrt2 * m * (ps * cosm - pc * sinm);
    }
    return out;
}

// Coefficients of the sampled field up to lmax by quadrature against
// the real harmonics. Exact when the samples come from synthesizing a
// field whose degree plus lmax fits within the grid's exact degree.
inline BandLimitedField analyze(const Eigen::MatrixXd& values,
                                const QuadratureGrid& grid, int lmax) {
    detail::require_grid_shape(grid, values, "analyze");
    if (lmax < 0) throw usage_error("analyze: need lmax >= 0");
    detail::require_grid_degree(grid, 2 * lmax, "analyze");
    const detail::LegendreTable tab = detail::normalized_legendre(lmax, grid.x);
    const double cell = 2.0 * PI / grid.n_phi;
    const double sqrt2 = std::sqrt(2.0);

    BandLimitedField f(lmax);
    for (int m = 0; m <= lmax; ++m) {
        Eigen::VectorXd cosm(grid.n_phi);
        Eigen::VectorXd sinm(grid.n_phi);
        for (int j = 0; j < grid.n_phi; ++j) {
            cosm(j) = std::cos(m * grid.phi(j));
            sinm(j) = std::sin(m * grid.phi(j));
        }
        const Eigen::VectorXd mom_c = values * cosm;
        const Eigen::VectorXd mom_s = values * sinm;
        for (int l = std::max(m, 0); l <= lmax; ++l) {
            const Eigen::VectorXd wp = tab(l, m).cwiseProduct(grid.weight);
            if (m == 0) {
                f.at(l, 0) = cell * wp.dot(mom_c);
            } else {
                f.at(l, m) = sqrt2 * cell * wp.dot(mom_c);
                f.at(l, -m) = sqrt2 * cell * wp.dot(mom_s);
            }
        }
    }
    return f;
}

// Spherical Poisson bracket {f, g} = (d_theta f d_phi g - d_phi f
// d_theta g) / sin(theta), sampled at the grid nodes.
inline Eigen::MatrixXd poisson_bracket(const BandLimitedField& f,
                                       const BandLimitedField& g,
                                       const QuadratureGrid& grid) {
    const SurfaceGradient gf = synthesize_gradient(f, grid);
    const SurfaceGradient gg = synthesize_gradient(g, grid);
    Eigen::MatrixXd out = gf.d_theta.cwiseProduct(gg.d_phi) -
                          gf.d_phi.cwiseProduct(gg.d_theta);
    for (int i = 0; i < grid.n_theta; ++i)
        out.row(i) /= std::sqrt(1.0 - grid.x(i) * grid.x(i));
    return out;
}

// Laplace-Beltrami operator on coefficients: Y_lm -> -l(l+1) Y_lm.
inline BandLimitedField apply_laplacian(const BandLimitedField& f) {
    BandLimitedField out(f.lmax);
    for (int l = 0; l <= f.lmax; ++l) {
        const double ev = -static_cast<double>(l) * (l + 1);
        for (int m = -l; m <= l; ++m) out.at(l, m) = ev * f.at(l, m);
    }
    return out;
}

namespace detail {

inline int casimir_degree(const BandLimitedField& xi,
                          const BandLimitedField& rho,
                          const BandLimitedField& q,
                          const BandLimitedField& psi, int m_max) {
    return std::max({m_max * xi.lmax, rho.lmax + m_max * xi.lmax,
                     q.lmax + m_max * xi.lmax, xi.lmax + psi.lmax,
                     rho.lmax + q.lmax});
}

}  // namespace detail

// Continuous Casimirs of the axisymmetric fields: C_m = integral of
// xi^m, J_m of rho xi^m, K_m of q xi^m, and the cross helicity
// integral of (xi Delta psi - rho q), all for the area measure of
// total mass 4 pi.
inline AxisymCasimirs continuous_casimirs(const BandLimitedField& xi,
                                          const BandLimitedField& rho,
                                          const BandLimitedField& q,
                                          const BandLimitedField& psi,
                                          const QuadratureGrid& grid,
                                          int m_max) {
    if (m_max < 1) throw usage_error("continuous_casimirs: need m_max >= 1");
    detail::require_grid_degree(
        grid, detail::casimir_degree(xi, rho, q, psi, m_max),
        "continuous_casimirs");

    const Eigen::MatrixXd g_xi = synthesize(xi, grid);
    const Eigen::MatrixXd g_rho = synthesize(rho, grid);
    const Eigen::MatrixXd g_q = synthesize(q, grid);
    const Eigen::MatrixXd g_dpsi = synthesize(apply_laplacian(psi), grid);

    AxisymCasimirs out;
    Eigen::MatrixXd power = Eigen::MatrixXd::Ones(grid.n_theta, grid.n_phi);
    for (int m = 1; m <= m_max; ++m) {
        power = power.cwiseProduct(g_xi).eval();
        out.c_m.push_back(integrate(grid, power));
        out.j_m.push_back(integrate(grid, g_rho.cwiseProduct(power)));
        out.k_m.push_back(integrate(grid, g_q.cwiseProduct(power)));
    }
    out.cross_helicity =
        integrate(grid, g_xi.cwiseProduct(g_dpsi) - g_rho.cwiseProduct(g_q));
    return out;
}

// Continuous Hamiltonian
//   H = -1/2 integral (psi Delta psi - q^2) - 1/2 integral (xi Delta xi - rho^2).
inline double continuous_hamiltonian(const BandLimitedField& xi,
                                     const BandLimitedField& rho,
                                     const BandLimitedField& q,
                                     const BandLimitedField& psi,
                                     const QuadratureGrid& grid) {
    const int degree =
        2 * std::max({xi.lmax, rho.lmax, q.lmax, psi.lmax});
    detail::require_grid_degree(grid, degree, "continuous_hamiltonian");

    const Eigen::MatrixXd g_xi = synthesize(xi, grid);
    const Eigen::MatrixXd g_rho = synthesize(rho, grid);
    const Eigen::MatrixXd g_q = synthesize(q, grid);
    const Eigen::MatrixXd g_psi = synthesize(psi, grid);
    const Eigen::MatrixXd g_dxi = synthesize(apply_laplacian(xi), grid);
    const Eigen::MatrixXd g_dpsi = synthesize(apply_laplacian(psi), grid);

    return -0.5 * integrate(grid, g_psi.cwiseProduct(g_dpsi) -
                                      g_q.cwiseProduct(g_q)) -
           0.5 * integrate(grid, g_xi.cwiseProduct(g_dxi) -
                                     g_rho.cwiseProduct(g_rho));
}

// One quantity at one matrix size: the quantized value, the continuous
// reference, and their absolute difference.
struct ConvergenceRow {
    int n;
    std::string quantity;
    double quantized;
    double continuous;
    double abs_error;
};

// Least-squares slope of log(abs_error) against log(n). Not defined
// when some error vanishes exactly.
struct SlopeFit {
    std::string quantity;
    double slope;
    bool defined;
};

struct ConvergenceStudy {
    std::vector<ConvergenceRow> rows;
    std::vector<SlopeFit> slopes;
};

// Projects the four fields at each matrix size in n_list, evaluates
// the quantized Casimirs, Hamiltonian, and the bracket pairing
// <[Xi, Psi], [Xi, Psi]> against their continuous counterparts, and
// fits convergence slopes. The skew projections are i times the
// Hermitian field symbols, so the diagnostics traces pick up a sign
// (-1)^floor(m/2) for C_m, (-1)^floor((m+1)/2) for J_m and K_m, and -1
// for the cross helicity and Hamiltonian; the rows report the values
// mapped back to the continuous orientation.
inline ConvergenceStudy convergence_study(const BandLimitedField& xi,
                                          const BandLimitedField& rho,
                                          const BandLimitedField& q,
                                          const BandLimitedField& psi,
                                          const std::vector<int>& n_list,
                                          int m_max) {
    if (n_list.empty()) throw usage_error("convergence_study: n_list is empty");
    if (m_max < 1) throw usage_error("convergence_study: need m_max >= 1");
    const int lmax = std::max({xi.lmax, rho.lmax, q.lmax, psi.lmax});
    for (std::size_t i = 0; i < n_list.size(); ++i) {
        if (n_list[i] <= lmax)
            throw usage_error(
                "convergence_study: every n must exceed the band limit " +
                std::to_string(lmax));
        if (i > 0 && n_list[i] <= n_list[i - 1])
            throw usage_error("convergence_study: n_list must be strictly ascending");
    }

    const int degree =
        std::max({detail::casimir_degree(xi, rho, q, psi, m_max), 2 * lmax,
                  2 * (xi.lmax + psi.lmax - 1)});
    const QuadratureGrid grid = grid_for_degree(degree);
    const AxisymCasimirs cont = continuous_casimirs(xi, rho, q, psi, grid, m_max);
    const double cont_h = continuous_hamiltonian(xi, rho, q, psi, grid);
    const Eigen::MatrixXd pb = poisson_bracket(xi, psi, grid);
    const double cont_pairing = integrate(grid, pb.cwiseProduct(pb));

    const auto sigma_c = [](int m) { return (m / 2) % 2 ? -1.0 : 1.0; };
    const auto sigma_jk = [](int m) { return ((m + 1) / 2) % 2 ? -1.0 : 1.0; };
    const auto push = [](ConvergenceStudy& study, int n,
                         const std::string& quantity, double quantized,
                         double continuous) {
        study.rows.push_back({n, quantity, quantized, continuous,
                              std::abs(quantized - continuous)});
    };

    ConvergenceStudy study;
    for (const int n : n_list) {
        const SpinGenerators g = build_generators(n);
        const LaplacianSpectralData data = build_spectral_data(g);
        const QuantizedField xi_q = project_field(xi, data);
        const QuantizedField rho_q = project_field(rho, data);
        const QuantizedField q_q = project_field(q, data);
        const QuantizedField psi_q = project_field(psi, data);
        const MhdState state =
            MhdState::of(apply_laplacian(data, psi_q), rho_q, q_q, xi_q);

        const AxisymCasimirs cas = casimirs_axisym(state, data, m_max);
        const double ham = hamiltonian_axisym(state, data);
        const QuantizedField brk = scaled_commutator(xi_q, psi_q, data.hbar);

        for (int m = 1; m <= m_max; ++m)
            push(study, n, "C_" + std::to_string(m),
                 sigma_c(m) * cas.c_m[m - 1], cont.c_m[m - 1]);
        for (int m = 1; m <= m_max; ++m)
            push(study, n, "J_" + std::to_string(m),
                 sigma_jk(m) * cas.j_m[m - 1], cont.j_m[m - 1]);
        for (int m = 1; m <= m_max; ++m)
            push(study, n, "K_" + std::to_string(m),
                 sigma_jk(m) * cas.k_m[m - 1], cont.k_m[m - 1]);
        push(study, n, "crosshel", -cas.cross_helicity, cont.cross_helicity);
        push(study, n, "H", -ham, cont_h);
        push(study, n, "pairing", frobenius_pairing(brk, brk), cont_pairing);
    }

    if (n_list.size() >= 2) {
        const std::size_t per_n = study.rows.size() / n_list.size();
        for (std::size_t k = 0; k < per_n; ++k) {
            SlopeFit fit{study.rows[k].quantity, 0.0, true};
            double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
            for (std::size_t b = 0; b < n_list.size(); ++b) {
                const ConvergenceRow& row = study.rows[b * per_n + k];
                if (row.abs_error <= 0.0) {
                    fit.defined = false;
                    break;
                }
                const double lx = std::log(static_cast<double>(row.n));
                const double ly = std::log(row.abs_error);
                sx += lx;
                sy += ly;
                sxx += lx * lx;
                sxy += lx * ly;
            }
            if (fit.defined) {
                const double count = static_cast<double>(n_list.size());
                fit.slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
            }
            study.slopes.push_back(fit);
        }
    }
    return study;
}

}  // namespace zeitlin
