#pragma once

#include <zeitlin/diagnostics.hpp>
#include <zeitlin/dynamics.hpp>

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>

namespace zeitlin {

// Step-size and fixed-point controls for the implicit midpoint solve.
// h is the scheme step in whichever time scaling the caller has chosen;
// it may be negative, which runs the adjoint (time-reversed) update.
struct StepConfig {
    double h;
    double fp_tol = 1e-14;
    int fp_max_iter = 100;

    void validate() const {
        if (!std::isfinite(h) || h == 0.0)
            throw usage_error("StepConfig: need a finite nonzero step size");
        if (!(fp_tol > 0.0))
            throw usage_error("StepConfig: need fp_tol > 0");
        if (fp_max_iter < 1)
            throw usage_error("StepConfig: need fp_max_iter >= 1");
    }
};

// Fixed-point divergence of the implicit stage.
struct step_failure : numerical_error {
    int iterations;
    double residual;

    step_failure(const std::string& msg, int iterations_, double residual_)
        : numerical_error(msg), iterations(iterations_), residual(residual_) {}
};

// Isospectral midpoint step for dA/dt = [A, B(A)] (plain commutator;
// any 1/hbar scaling is absorbed into cfg.h). Solves
//   A_n = (I + (h/2) B(At)) At (I - (h/2) B(At))
// for the stage At by fixed-point iteration, then returns
//   A_{n+1} = (I - (h/2) B(At)) At (I + (h/2) B(At)).
template <class BMap>
Matrix generic_isospectral_step(const Matrix& a_n, BMap&& b_map,
                                const StepConfig& cfg) {
    cfg.validate();
    if (a_n.rows() != a_n.cols())
        throw usage_error("generic_isospectral_step: need a square matrix");
    const double half = cfg.h / 2;
    const double quarter = cfg.h * cfg.h / 4;

    Matrix at = a_n;
    double residual = 0.0;
    for (int it = 1; it <= cfg.fp_max_iter; ++it) {
        const Matrix b = b_map(at);
        const Matrix next =
            a_n + half * (at * b - b * at) + quarter * (b * at * b);
        residual = detail::max_abs(next - at);
        at = next;
        if (!std::isfinite(residual))
            throw step_failure(
                "generic_isospectral_step: fixed point diverged", it, residual);
        if (residual < cfg.fp_tol) {
            const Matrix bf = b_map(at);
            return at + half * (at * bf - bf * at) - quarter * (bf * at * bf);
        }
    }
    throw step_failure("generic_isospectral_step: no fixed-point convergence in " +
                           std::to_string(cfg.fp_max_iter) + " iterations",
                       cfg.fp_max_iter, residual);
}

// Specialized isospectral midpoint step for the axisymmetric four-field
// system; algebraically identical to generic_isospectral_step on the
// 4N x 4N block embedding, but runs on the N x N fields directly.
//
// Each sweep recomputes the block-map fields
//   a = Laplacian^{-1}(detrace W~), b = -2 Xi~ - P~,
//   c = -2 a + Q~,                  d = Laplacian(Xi~)
// and updates all four stage fields simultaneously. The stage fields
// are re-skewed after every sweep but not de-traced: the embedded
// iterate genuinely carries O(h^2) traces, and removing them would
// break the equivalence with the generic step. Only the argument of
// the Laplacian inverse is de-traced. The returned state is projected
// back to traceless anti-Hermitian form.
inline MhdState axisym_step(const MhdState& s_n,
                            const LaplacianSpectralData& data,
                            const StepConfig& cfg) {
    cfg.validate();
    require_same_dim(data.n, s_n.n(), "axisym_step");
    const double half = cfg.h / 2;
    const double quarter = cfg.h * cfg.h / 4;
    const Matrix& wn = s_n.w.matrix();
    const Matrix& pn = s_n.p.matrix();
    const Matrix& qn = s_n.q.matrix();
    const Matrix& xn = s_n.xi.matrix();
    auto comm = [](const Matrix& x, const Matrix& y) -> Matrix {
        return x * y - y * x;
    };

    Matrix wt = wn, pt = pn, qt = qn, xt = xn;
    Matrix a, b, c, d;
    double residual = 0.0;
    for (int it = 1; it <= cfg.fp_max_iter; ++it) {
        a = detail::invert_kernel(data, detail::detrace(wt));
        b = -2.0 * xt - pt;
        c = -2.0 * a + qt;
        d = detail::laplacian_kernel(data, xt);

        const Matrix w_next = detail::skew_part(
            wn + half * (comm(wt, a) + comm(pt, b) + comm(c, qt) + comm(xt, d)) +
            quarter * (d * xt * a - c * qt * a + c * xt * b + b * pt * a +
                       a * wt * a + a * pt * b + b * xt * c - a * qt * c +
                       a * xt * d));
        const Matrix p_next = detail::skew_part(
            pn + half * (comm(pt, a) + comm(xt, c)) +
            quarter * (a * pt * a + c * xt * a + a * xt * c));
        const Matrix q_next = detail::skew_part(
            qn + half * (comm(qt, a) + comm(b, xt)) +
            quarter * (a * qt * a - b * xt * a - a * xt * b));
        const Matrix x_next =
            detail::skew_part(xn + half * comm(xt, a) + quarter * (a * xt * a));

        residual = std::max(
            std::max(detail::max_abs(w_next - wt), detail::max_abs(p_next - pt)),
            std::max(detail::max_abs(q_next - qt), detail::max_abs(x_next - xt)));
        wt = w_next;
        pt = p_next;
        qt = q_next;
        xt = x_next;
        if (!std::isfinite(residual))
            throw step_failure("axisym_step: fixed point diverged; reduce h", it,
                               residual);
        if (residual < cfg.fp_tol) {
            a = detail::invert_kernel(data, detail::detrace(wt));
            b = -2.0 * xt - pt;
            c = -2.0 * a + qt;
            d = detail::laplacian_kernel(data, xt);
            return MhdState::of(
                QuantizedField::from_skew(wn + cfg.h * (comm(wt, a) + comm(pt, b) +
                                                        comm(c, qt) + comm(xt, d))),
                QuantizedField::from_skew(pn +
                                          cfg.h * (comm(pt, a) + comm(xt, c))),
                QuantizedField::from_skew(qn +
                                          cfg.h * (comm(qt, a) + comm(b, xt))),
                QuantizedField::from_skew(xn + cfg.h * comm(xt, a)));
        }
    }
    throw step_failure("axisym_step: no fixed-point convergence in " +
                           std::to_string(cfg.fp_max_iter) +
                           " iterations; reduce h",
                       cfg.fp_max_iter, residual);
}

// Advances s0 by repeated axisym_step until t_final = n_steps * h,
// emitting a DiagnosticsRecord at t = 0, every sample_every steps, and
// at the final step. Returns the final state. t_final must be an
// integer multiple of cfg.h (to round-off); t_final = 0 emits the
// initial record and returns s0 unchanged.
template <class Sink>
MhdState run_trajectory(const MhdState& s0, const LaplacianSpectralData& data,
                        const StepConfig& cfg, double t_final, int sample_every,
                        Sink&& sink, int m_max) {
    cfg.validate();
    if (!(cfg.h > 0.0))
        throw usage_error("run_trajectory: need h > 0");
    if (!std::isfinite(t_final) || t_final < 0.0)
        throw usage_error("run_trajectory: need t_final >= 0");
    if (sample_every < 1)
        throw usage_error("run_trajectory: need sample_every >= 1");

    const auto n_steps = static_cast<std::int64_t>(std::llround(t_final / cfg.h));
    if (std::abs(n_steps * cfg.h - t_final) > 1e-9 * std::max(1.0, t_final))
        throw usage_error("run_trajectory: t_final is not a multiple of h");

    MhdState s = s0;
    sink(build_record(0.0, s, data, m_max));
    for (std::int64_t i = 1; i <= n_steps; ++i) {
        try {
            s = axisym_step(s, data, cfg);
        } catch (const step_failure& e) {
            throw step_failure("step " + std::to_string(i) + ": " + e.what(),
                               e.iterations, e.residual);
        }
        if (i % sample_every == 0 || i == n_steps)
            sink(build_record(static_cast<double>(i) * cfg.h, s, data, m_max));
    }
    return s;
}

} // namespace zeitlin
