// Acceptance checks for the library and the command-line driver. Each
// check prints one PASS/FAIL line with the measured value next to its
// tolerance; the exit status is nonzero if any check fails. The long
// run (checks 1-3) integrates 5e4 steps and dominates the runtime.
#include <zeitlin/integrator.hpp>
#include <zeitlin/io.hpp>
#include <zeitlin/sphere_analysis.hpp>

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace zeitlin;

namespace {

int failures = 0;

void report(int index, const std::string& label, bool ok,
            const std::string& measured) {
    if (!ok) ++failures;
    std::cout << (ok ? "PASS" : "FAIL") << " " << std::setw(2) << index << " "
              << label << ": " << measured << "\n";
    std::cout.flush();
}

std::string num(double v) { return format_double(v); }

double state_distance(const MhdState& a, const MhdState& b) {
    return std::max({detail::max_abs(a.w.matrix() - b.w.matrix()),
                     detail::max_abs(a.p.matrix() - b.p.matrix()),
                     detail::max_abs(a.q.matrix() - b.q.matrix()),
                     detail::max_abs(a.xi.matrix() - b.xi.matrix())});
}

// Duality pairing on the Abelian extension:
//   <(P1,B1),(P2,B2)> = tr(P1 P2) - tr((Laplacian B1) B2)
double extension_pairing(const AlgebraPair& x, const AlgebraPair& y,
                         const LaplacianSpectralData& data) {
    const Complex t1 = (x.first.matrix() * y.first.matrix()).trace();
    const Matrix lap = apply_laplacian(data, x.second).matrix();
    const Complex t2 = (lap * y.second.matrix()).trace();
    return t1.real() - t2.real();
}

// Band-limited field with coefficient (l, m) drawn as N(0,1)/(1+l^2).
BandLimitedField random_band_field(int lmax, detail::NormalSource& src) {
    BandLimitedField f(lmax);
    for (int l = 1; l <= lmax; ++l) {
        for (int m = -l; m <= l; ++m) {
            double z0 = 0.0, z1 = 0.0;
            src.pair(z0, z1);
            f.at(l, m) = z0 / (1.0 + static_cast<double>(l) * l);
        }
    }
    return f;
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const auto k = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

// Checks 1-3 share one long trajectory: N = 5, h = 0.01, T = 500,
// unit-norm random fields.
void check_long_run() {
    const auto g = build_generators(5);
    const auto data = build_spectral_data(g);
    const MhdState s0 = random_unit_state(5, 42);
    const StepConfig cfg{0.01, 1e-14, 100};

    std::vector<DiagnosticsRecord> records;
    records.reserve(50001);
    run_trajectory(s0, data, cfg, 500.0, 1,
                   [&](const DiagnosticsRecord& rec) { records.push_back(rec); },
                   3);
    const DriftSummary summary = drift_report(records);

    double eigen_drift = 0.0;
    double casimir_drift = 0.0;
    for (const DriftRow& row : summary.rows) {
        if (row.name.rfind("lambda_", 0) == 0)
            eigen_drift = std::max(eigen_drift, row.drift);
        else if (row.name[0] == 'C' || row.name[0] == 'J' ||
                 row.name[0] == 'K' || row.name == "crosshel")
            casimir_drift = std::max(casimir_drift, row.drift);
    }
    report(1, "eigenvalues of Xi hold over 5e4 steps", eigen_drift <= 1e-12,
           "max drift " + num(eigen_drift) + " (tolerance 1e-12)");
    report(2, "Casimirs and cross-helicity hold over 5e4 steps",
           casimir_drift <= 1e-12,
           "max drift " + num(casimir_drift) + " (tolerance 1e-12)");

    const double h0 = records.front().hamiltonian;
    const std::size_t mid = records.size() / 2;
    double first_half = 0.0, second_half = 0.0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const double err = std::abs(records[i].hamiltonian - h0) / std::abs(h0);
        (i < mid ? first_half : second_half) =
            std::max(i < mid ? first_half : second_half, err);
    }
    const double rel = std::max(first_half, second_half);
    const bool bounded = rel <= 1e-4;
    const bool no_trend = second_half <= 2.0 * first_half;
    report(3, "Hamiltonian error stays bounded", bounded && no_trend,
           "max relative error " + num(rel) + " (tolerance 1e-4), halves " +
               num(first_half) + " / " + num(second_half));
}

void check_scheme_equivalence() {
    double worst = 0.0;
    const StepConfig cfg{0.01, 1e-14, 100};
    for (int n : {3, 5, 8}) {
        const auto g = build_generators(n);
        const auto data = build_spectral_data(g);
        for (int k = 0; k < 34; ++k) {
            const MhdState s =
                random_unit_state(n, 1000u * static_cast<std::uint64_t>(n) + k);
            const MhdState direct = axisym_step(s, data, cfg);
            const BlockPair bp = block_embed(s, data);
            const Matrix a1 = generic_isospectral_step(
                bp.a, [&](const Matrix& at) { return block_bmap(data, at); },
                cfg);
            worst = std::max(worst, state_distance(direct, block_unpack(a1)));
        }
    }
    report(4, "field-wise and block-embedded steps agree on 102 states",
           worst <= 1e-12, "max entrywise gap " + num(worst) +
               " (tolerance 1e-12)");
}

void check_laplacian_spectrum() {
    double worst_multiset = 0.0;
    for (int n = 2; n <= 12; ++n) {
        const auto data = build_spectral_data(build_generators(n));
        std::vector<double> actual, expected;
        for (int m = 0; m < n; ++m)
            for (int i = 0; i < data.eigenvalues[m].size(); ++i)
                for (int copy = 0; copy < (m == 0 ? 1 : 2); ++copy)
                    actual.push_back(data.eigenvalues[m](i));
        for (int l = 0; l < n; ++l)
            for (int copy = 0; copy < 2 * l + 1; ++copy)
                expected.push_back(-static_cast<double>(l) * (l + 1));
        std::sort(actual.begin(), actual.end());
        std::sort(expected.begin(), expected.end());
        for (std::size_t i = 0; i < actual.size(); ++i)
            worst_multiset =
                std::max(worst_multiset, std::abs(actual[i] - expected[i]));
    }

    double worst_wigner = 0.0;
    for (int n = 2; n <= 8; ++n) {
        const auto data = build_spectral_data(build_generators(n));
        for (int l = 0; l < n; ++l) {
            for (int m = -l; m <= l; ++m) {
                const Matrix fast = matrix_harmonic(data, l, m);
                const Matrix slow = matrix_harmonic_wigner(n, l, m);
                const Complex overlap = (slow.adjoint() * fast).trace();
                const Complex phase = std::abs(overlap) == 0.0
                                          ? Complex(1.0, 0.0)
                                          : overlap / std::abs(overlap);
                worst_wigner =
                    std::max(worst_wigner, detail::max_abs(fast - phase * slow));
            }
        }
    }
    report(5, "Laplacian spectrum is -l(l+1) with multiplicity 2l+1",
           worst_multiset <= 1e-10 && worst_wigner <= 1e-10,
           "multiset gap " + num(worst_multiset) + ", Wigner-3j gap " +
               num(worst_wigner) + " (tolerance 1e-10)");
}

void check_coadjoint_duality() {
    const auto data = build_spectral_data(build_generators(6));
    double worst = 0.0;
    std::uint64_t seed = 5000;
    for (int k = 0; k < 100; ++k) {
        const AlgebraPair x{random_field(6, seed++), random_field(6, seed++)};
        const AlgebraPair mu{random_field(6, seed++), random_field(6, seed++)};
        const AlgebraPair y{random_field(6, seed++), random_field(6, seed++)};
        const double lhs =
            extension_pairing(abelian_coadjoint(x, mu, data), y, data);
        const double rhs =
            extension_pairing(mu, abelian_bracket(x, y, data.hbar), data);
        worst = std::max(worst, std::abs(lhs - rhs) /
                                    std::max({std::abs(lhs), std::abs(rhs),
                                              1e-12}));
    }
    report(6, "coadjoint action is dual to the bracket on 100 triples",
           worst <= 1e-11, "max relative gap " + num(worst) +
               " (tolerance 1e-11)");
}

void check_convergence_rates() {
    detail::NormalSource src(777);
    const BandLimitedField xi = random_band_field(4, src);
    const BandLimitedField rho = random_band_field(4, src);
    const BandLimitedField q = random_band_field(4, src);
    const BandLimitedField psi = random_band_field(4, src);
    const ConvergenceStudy study =
        convergence_study(xi, rho, q, psi, {8, 16, 32, 64}, 3);

    const auto slope_of = [&](const std::string& quantity) {
        for (const SlopeFit& fit : study.slopes)
            if (fit.quantity == quantity && fit.defined) return fit.slope;
        return std::numeric_limits<double>::quiet_NaN();
    };
    const double c3 = slope_of("C_3");
    const double j2 = slope_of("J_2");
    const double k2 = slope_of("K_2");
    const double pairing = slope_of("pairing");
    const bool ok = c3 <= -0.8 && j2 <= -0.8 && k2 <= -0.8 && pairing <= -1.5;
    report(7, "Casimir errors shrink with N at the documented rates", ok,
           "slopes C_3 " + num(c3) + ", J_2 " + num(j2) + ", K_2 " + num(k2) +
               " (tolerance -0.8), pairing " + num(pairing) +
               " (tolerance -1.5)");
}

void check_euler_reduction() {
    const int n = 5;
    const auto data = build_spectral_data(build_generators(n));
    const StepConfig cfg{0.01, 1e-14, 100};
    const auto zero = QuantizedField::zero(n);
    const MhdState full0 =
        MhdState::of(random_unit_state(n, 601).w, zero,
                     random_unit_state(n, 602).q, zero);

    // magnetism-free fields must stay zero for the whole run
    double magnetic = 0.0;
    MhdState s = full0;
    for (int i = 0; i < 1000; ++i) {
        s = axisym_step(s, data, cfg);
        magnetic = std::max({magnetic, detail::max_abs(s.p.matrix()),
                             detail::max_abs(s.xi.matrix())});
    }

    // reduced run: with P = Xi = 0 the system closes to
    //   dW = [W, Psi] + 2[Q, Psi],  dQ = [Q, Psi]
    // which embeds as the 2N x 2N isospectral flow
    //   A = | -Q     |   B(A) = | Psi        |
    //       |  W  -Q |          | Q-2Psi  Psi|
    auto reduced_bmap = [&](const Matrix& a) {
        const Matrix q = -a.block(0, 0, n, n);
        const Matrix w = a.block(n, 0, n, n);
        const Matrix psi = detail::invert_kernel(data, detail::detrace(w));
        Matrix out = Matrix::Zero(2 * n, 2 * n);
        out.block(0, 0, n, n) = psi;
        out.block(n, n, n, n) = psi;
        out.block(n, 0, n, n) = q - 2.0 * psi;
        return out;
    };
    Matrix a = Matrix::Zero(2 * n, 2 * n);
    a.block(0, 0, n, n) = -full0.q.matrix();
    a.block(n, n, n, n) = -full0.q.matrix();
    a.block(n, 0, n, n) = full0.w.matrix();

    double gap = 0.0;
    MhdState full = full0;
    for (int i = 0; i < 100; ++i) {
        full = axisym_step(full, data, cfg);
        a = generic_isospectral_step(a, reduced_bmap, cfg);
        const Matrix w_red =
            detail::skew_detrace(detail::skew_part(a.block(n, 0, n, n)));
        const Matrix q_red =
            detail::skew_detrace(detail::skew_part(-a.block(0, 0, n, n)));
        gap = std::max({gap, detail::max_abs(full.w.matrix() - w_red),
                        detail::max_abs(full.q.matrix() - q_red)});
    }
    report(8, "zero magnetic fields reduce the flow to the Euler system",
           magnetic <= 1e-12 && gap <= 1e-12,
           "max |P|,|Xi| " + num(magnetic) + ", gap to the reduced run " +
               num(gap) + " (tolerance 1e-12)");
}

void check_order_of_accuracy() {
    const auto data = build_spectral_data(build_generators(5));
    const MhdState s0 = random_unit_state(5, 909);
    std::vector<double> log_h, log_err;
    for (double h : {0.04, 0.02, 0.01, 0.005}) {
        const MhdState coarse = axisym_step(s0, data, {h, 1e-14, 200});
        MhdState fine = s0;
        for (int k = 0; k < 32; ++k)
            fine = axisym_step(fine, data, {h / 32, 1e-14, 200});
        log_h.push_back(std::log(h));
        log_err.push_back(std::log(state_distance(coarse, fine)));
    }
    const double slope = fit_slope(log_h, log_err);
    report(9, "one-step error scales as h^3", std::abs(slope - 3.0) <= 0.3,
           "step-halving slope " + num(slope) + " (tolerance 3.0 +- 0.3)");
}

void check_determinism() {
    namespace fs = std::filesystem;
    const fs::path base = fs::temp_directory_path() / "zeitlin_acceptance";
    fs::remove_all(base);
    fs::create_directories(base);

    const auto run_into = [&](const std::string& name) {
        const fs::path dir = base / name;
        const std::string cmd = std::string(ZEITLIN_MHD_BIN) +
                                " run --n 4 --dt 0.01 --t-final 0.1 --seed 99"
                                " --output-dir " +
                                dir.string() + " >/dev/null";
        const int status = std::system(cmd.c_str());
        if (status == -1 || !WIFEXITED(status) || WEXITSTATUS(status) != 0)
            return std::string();
        std::ifstream in(dir / "diagnostics.csv", std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    };
    const std::string first = run_into("first");
    const std::string second = run_into("second");
    const bool ok = !first.empty() && first == second;
    report(10, "repeated identical runs write identical diagnostics", ok,
           ok ? "byte-identical diagnostics.csv"
              : "runs differ or failed to produce diagnostics.csv");
}

}  // namespace

int main() {
    try {
        check_long_run();
        check_scheme_equivalence();
        check_laplacian_spectrum();
        check_coadjoint_duality();
        check_convergence_rates();
        check_euler_reduction();
        check_order_of_accuracy();
        check_determinism();
    } catch (const std::exception& e) {
        std::cout << "FAIL -- aborted: " << e.what() << "\n";
        return 1;
    }
    return failures == 0 ? 0 : 1;
}
