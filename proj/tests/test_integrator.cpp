#include <catch2/catch_amalgamated.hpp>

#include <zeitlin/integrator.hpp>

#include <cmath>
#include <vector>

using namespace zeitlin;

namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

MhdState random_state(int n, std::uint64_t seed) {
    return MhdState::of(random_field(n, seed), random_field(n, seed + 1),
                        random_field(n, seed + 2), random_field(n, seed + 3));
}

QuantizedField unit_field(int n, std::uint64_t seed) {
    const auto f = random_field(n, seed);
    return QuantizedField::from_skew(f.matrix() / f.matrix().norm());
}

MhdState unit_state(int n, std::uint64_t seed) {
    return MhdState::of(unit_field(n, seed), unit_field(n, seed + 1),
                        unit_field(n, seed + 2), unit_field(n, seed + 3));
}

QuantizedField diagonal_field(int n, std::uint64_t seed) {
    detail::NormalSource src(seed);
    Matrix m = Matrix::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        double a, b;
        src.pair(a, b);
        m(k, k) = Complex(0, a);
    }
    return QuantizedField::from_skew(m);
}

double state_distance(const MhdState& a, const MhdState& b) {
    return std::max(
        std::max(max_abs(a.w.matrix() - b.w.matrix()),
                 max_abs(a.p.matrix() - b.p.matrix())),
        std::max(max_abs(a.q.matrix() - b.q.matrix()),
                 max_abs(a.xi.matrix() - b.xi.matrix())));
}

} // namespace

TEST_CASE("StepConfig validation") {
    CHECK_NOTHROW(StepConfig{0.01}.validate());
    CHECK_NOTHROW(StepConfig{-0.01}.validate());
    CHECK_THROWS_AS(StepConfig{0.0}.validate(), usage_error);
    CHECK_THROWS_AS((StepConfig{0.01, -1.0}).validate(), usage_error);
    CHECK_THROWS_AS((StepConfig{0.01, 1e-14, 0}).validate(), usage_error);
}

TEST_CASE("generic_isospectral_step") {
    const int n = 8;
    const auto g = build_generators(n);
    const auto data = build_spectral_data(g);
    const Matrix a0 = random_field(n, 200).matrix();
    auto bmap = [&](const Matrix& at) {
        return detail::invert_kernel(data, detail::detrace(at));
    };

    SECTION("zero B-map fixes the state") {
        const Matrix a1 = generic_isospectral_step(
            a0, [&](const Matrix&) { return Matrix(Matrix::Zero(n, n)); },
            StepConfig{0.02});
        CHECK(max_abs(a1 - a0) == 0.0);
    }

    SECTION("trace powers are preserved") {
        const Matrix a1 = generic_isospectral_step(a0, bmap, StepConfig{0.02});
        Matrix p0 = Matrix::Identity(n, n);
        Matrix p1 = p0;
        for (int m = 1; m <= n; ++m) {
            p0 = p0 * a0;
            p1 = p1 * a1;
            const Complex t0 = p0.trace();
            const Complex t1 = p1.trace();
            INFO("m=" << m);
            CHECK(std::abs(t1 - t0) / std::max(1.0, std::abs(t0)) < 1e-12);
        }
    }

    SECTION("a negated step reverses the update") {
        const Matrix a1 = generic_isospectral_step(a0, bmap, StepConfig{0.02});
        const Matrix back = generic_isospectral_step(a1, bmap, StepConfig{-0.02});
        CHECK(max_abs(back - a0) < 1e-12);
    }

    SECTION("iteration cap raises step_failure") {
        try {
            generic_isospectral_step(a0, bmap, StepConfig{0.02, 1e-14, 2});
            FAIL("expected step_failure");
        } catch (const step_failure& e) {
            CHECK(e.iterations == 2);
            CHECK(e.residual > 0.0);
        }
    }

    SECTION("divergent iteration raises step_failure") {
        CHECK_THROWS_AS(generic_isospectral_step(a0, bmap, StepConfig{1e8}),
                        step_failure);
    }
}

TEST_CASE("axisym_step on distinguished states") {
    const int n = 5;
    const auto g = build_generators(n);
    const auto data = build_spectral_data(g);
    const StepConfig cfg{0.01};

    SECTION("zero state is a fixed point") {
        const auto z = QuantizedField::zero(n);
        const auto s1 = axisym_step(MhdState::of(z, z, z, z), data, cfg);
        CHECK(max_abs(s1.w.matrix()) == 0.0);
        CHECK(max_abs(s1.p.matrix()) == 0.0);
        CHECK(max_abs(s1.q.matrix()) == 0.0);
        CHECK(max_abs(s1.xi.matrix()) == 0.0);
    }

    SECTION("commuting diagonal state is unchanged") {
        const auto s = MhdState::of(diagonal_field(n, 210), diagonal_field(n, 211),
                                    diagonal_field(n, 212), diagonal_field(n, 213));
        const auto s1 = axisym_step(s, data, cfg);
        CHECK(state_distance(s1, s) < 1e-14);
    }
}

TEST_CASE("axisym_step equals the generic step on the block embedding") {
    for (int n : {3, 5, 8}) {
        const auto g = build_generators(n);
        const auto data = build_spectral_data(g);
        const StepConfig cfg{0.01};
        for (std::uint64_t seed : {220, 230, 240}) {
            const auto s = random_state(n, seed + static_cast<std::uint64_t>(n));
            const auto direct = axisym_step(s, data, cfg);

            const auto bp = block_embed(s, data);
            const Matrix a1 = generic_isospectral_step(
                bp.a, [&](const Matrix& at) { return block_bmap(data, at); },
                cfg);
            const auto unpacked = block_unpack(a1);
            INFO("n=" << n << " seed=" << seed);
            CHECK(state_distance(direct, unpacked) < 1e-12);
        }
    }
}

TEST_CASE("axisym_step preserves the Casimirs per step") {
    const int n = 5;
    const auto g = build_generators(n);
    const auto data = build_spectral_data(g);
    const auto s = unit_state(n, 250);
    const auto s1 = axisym_step(s, data, StepConfig{0.01});

    const auto before = casimirs_axisym(s, data, n);
    const auto after = casimirs_axisym(s1, data, n);
    for (int m = 0; m < n; ++m) {
        INFO("m=" << m + 1);
        CHECK(std::abs(after.c_m[m] - before.c_m[m]) < 1e-12);
        CHECK(std::abs(after.j_m[m] - before.j_m[m]) < 1e-12);
        CHECK(std::abs(after.k_m[m] - before.k_m[m]) < 1e-12);
    }
    CHECK(std::abs(after.cross_helicity - before.cross_helicity) < 1e-12);

    const auto ev0 = xi_spectrum(s.xi);
    const auto ev1 = xi_spectrum(s1.xi);
    CHECK((ev1 - ev0).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("axisym_step is reversible through a negated step") {
    const int n = 5;
    const auto g = build_generators(n);
    const auto data = build_spectral_data(g);
    const auto s = unit_state(n, 260);
    const auto s1 = axisym_step(s, data, StepConfig{0.01});
    const auto back = axisym_step(s1, data, StepConfig{-0.01});
    CHECK(state_distance(back, s) < 1e-12);
}

TEST_CASE("axisym_step failure reporting") {
    const int n = 5;
    const auto g = build_generators(n);
    const auto data = build_spectral_data(g);
    const auto s = random_state(n, 270);
    try {
        axisym_step(s, data, StepConfig{0.01, 1e-14, 2});
        FAIL("expected step_failure");
    } catch (const step_failure& e) {
        CHECK(e.iterations == 2);
        CHECK(e.residual > 0.0);
        CHECK(std::string(e.what()).find("reduce h") != std::string::npos);
    }
}

TEST_CASE("run_trajectory") {
    const int n = 4;
    const auto g = build_generators(n);
    const auto data = build_spectral_data(g);
    const auto s0 = unit_state(n, 280);
    const StepConfig cfg{0.01};

    auto collect = [&](double t_final, int sample_every, int m_max) {
        std::vector<DiagnosticsRecord> records;
        const auto fin = run_trajectory(
            s0, data, cfg, t_final, sample_every,
            [&](const DiagnosticsRecord& r) { records.push_back(r); }, m_max);
        return std::make_pair(records, fin);
    };

    SECTION("one step emits exactly the initial and final records") {
        const auto [records, fin] = collect(cfg.h, 1, n);
        REQUIRE(records.size() == 2);
        CHECK(records[0].t == 0.0);
        CHECK(records[1].t == cfg.h);
    }

    SECTION("sampling stride plus the forced final record") {
        const auto [records, fin] = collect(10 * cfg.h, 3, n);
        REQUIRE(records.size() == 5);
        CHECK(records[0].t == 0.0);
        CHECK(records[1].t == 3 * cfg.h);
        CHECK(records[2].t == 6 * cfg.h);
        CHECK(records[3].t == 9 * cfg.h);
        CHECK(records[4].t == 10 * cfg.h);
    }

    SECTION("zero horizon emits one record and returns the state unchanged") {
        const auto [records, fin] = collect(0.0, 1, n);
        REQUIRE(records.size() == 1);
        CHECK(records[0].t == 0.0);
        CHECK(state_distance(fin, s0) == 0.0);
    }

    SECTION("final record matches diagnostics of the returned state") {
        const auto [records, fin] = collect(5 * cfg.h, 2, 3);
        const auto rec = build_record(5 * cfg.h, fin, data, 3);
        const auto& last = records.back();
        CHECK(last.t == rec.t);
        CHECK((last.xi_eigenvalues - rec.xi_eigenvalues).cwiseAbs().maxCoeff() ==
              0.0);
        REQUIRE(last.c_m.size() == 3);
        for (int m = 0; m < 3; ++m) {
            CHECK(last.c_m[m] == rec.c_m[m]);
            CHECK(last.j_m[m] == rec.j_m[m]);
            CHECK(last.k_m[m] == rec.k_m[m]);
        }
        CHECK(last.cross_helicity == rec.cross_helicity);
        CHECK(last.hamiltonian == rec.hamiltonian);
    }

    SECTION("repeated runs are bit-identical") {
        const auto [r1, f1] = collect(8 * cfg.h, 2, n);
        const auto [r2, f2] = collect(8 * cfg.h, 2, n);
        REQUIRE(r1.size() == r2.size());
        for (std::size_t i = 0; i < r1.size(); ++i) {
            CHECK(r1[i].t == r2[i].t);
            CHECK((r1[i].xi_eigenvalues - r2[i].xi_eigenvalues)
                      .cwiseAbs()
                      .maxCoeff() == 0.0);
            for (std::size_t m = 0; m < r1[i].c_m.size(); ++m) {
                CHECK(r1[i].c_m[m] == r2[i].c_m[m]);
                CHECK(r1[i].j_m[m] == r2[i].j_m[m]);
                CHECK(r1[i].k_m[m] == r2[i].k_m[m]);
            }
            CHECK(r1[i].hamiltonian == r2[i].hamiltonian);
        }
        CHECK(state_distance(f1, f2) == 0.0);
    }

    SECTION("argument validation") {
        auto sink = [](const DiagnosticsRecord&) {};
        CHECK_THROWS_AS(
            run_trajectory(s0, data, StepConfig{-0.01}, 0.1, 1, sink, n),
            usage_error);
        CHECK_THROWS_AS(run_trajectory(s0, data, cfg, 0.015, 1, sink, n),
                        usage_error);
        CHECK_THROWS_AS(run_trajectory(s0, data, cfg, 0.1, 0, sink, n),
                        usage_error);
        CHECK_THROWS_AS(run_trajectory(s0, data, cfg, -1.0, 1, sink, n),
                        usage_error);
    }

    SECTION("step failure carries the step index") {
        auto sink = [](const DiagnosticsRecord&) {};
        try {
            run_trajectory(s0, data, StepConfig{0.01, 1e-14, 1}, 0.1, 1, sink, n);
            FAIL("expected step_failure");
        } catch (const step_failure& e) {
            CHECK(std::string(e.what()).find("step 1") != std::string::npos);
            CHECK(e.iterations == 1);
        }
    }
}
