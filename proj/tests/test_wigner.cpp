#include <catch2/catch_amalgamated.hpp>

#include <zeitlin/wigner.hpp>

#include <cmath>

using zeitlin::wigner_3j;

namespace {

struct Case3j {
    // all angular momenta doubled so half-integers are exact
    int two_j1, two_l, two_j2, two_m1, two_m, two_m2;
    double value;
};

// Reference values computed independently with exact rational/radical
// arithmetic (sympy.physics.wigner), 21 significant digits.
const Case3j REFERENCE[] = {
    {2, 2, 2, 0, 0, 0, 0.0},
    {2, 2, 2, 2, -2, 0, 0.408248290463863016366},
    {2, 4, 2, 0, 0, 0, 0.365148371670110742305},
    {2, 4, 2, 2, 0, -2, 0.182574185835055371152},
    {4, 4, 4, 2, 2, -4, -0.292770021884559953806},
    {4, 2, 4, -4, 2, 2, -0.258198889747161125679},
    {3, 2, 3, 1, 0, -1, -0.129099444873580562839},
    {3, 4, 3, 3, -2, -1, 0.316227766016837933200},
    {5, 6, 5, -5, 4, 1, 0.243975018237133294839},
    {5, 4, 5, 1, 2, -3, -0.169030850945703315502},
    {7, 8, 7, 3, 2, -5, 0.104031297322059876881},
    {6, 10, 6, 4, -2, -2, 0.170940864689456923255},
    {6, 12, 6, 0, 0, 0, 0.182482967150452976279},
    {8, 6, 8, -2, 4, -2, 0.0},
    {7, 14, 7, 7, -14, 7, -0.258198889747161125679},
    {4, 10, 4, 0, 0, 0, 0.0},   // triangle violated: l > j1 + j2
    {2, 2, 2, 2, 0, 0, 0.0},    // m1 + m + m2 != 0
    {9, 2, 9, 9, 0, -9, 0.286038776773677694634},
};

} // namespace

TEST_CASE("3j symbols match exact-arithmetic reference values") {
    for (const auto& c : REFERENCE) {
        const double got =
            wigner_3j(c.two_j1, c.two_l, c.two_j2, c.two_m1, c.two_m, c.two_m2);
        INFO("3j(" << c.two_j1 / 2.0 << " " << c.two_l / 2.0 << " "
                   << c.two_j2 / 2.0 << "; " << c.two_m1 / 2.0 << " "
                   << c.two_m / 2.0 << " " << c.two_m2 / 2.0 << ")");
        CHECK(std::abs(got - c.value) < 1e-14);
    }
}

TEST_CASE("3j orthogonality sums") {
    // sum over m1, m2 of (2 j3 + 1) * 3j(j1 j2 j3; m1 m2 m3)^2 = 1
    // whenever (j1, j2, j3) satisfies the triangle condition.
    const int two_j1 = 5, two_j2 = 4; // j1 = 5/2, j2 = 2
    for (int two_j3 = 1; two_j3 <= 9; two_j3 += 2) {
        for (int two_m3 = -two_j3; two_m3 <= two_j3; two_m3 += 2) {
            double sum = 0.0;
            for (int two_m1 = -two_j1; two_m1 <= two_j1; two_m1 += 2) {
                const int two_m2 = -two_m3 - two_m1;
                if (std::abs(two_m2) > two_j2) continue;
                const double v =
                    wigner_3j(two_j1, two_j2, two_j3, two_m1, two_m2, two_m3);
                sum += (two_j3 + 1) * v * v;
            }
            INFO("two_j3=" << two_j3 << " two_m3=" << two_m3);
            CHECK(std::abs(sum - 1.0) < 1e-13);
        }
    }
}

TEST_CASE("3j symmetry under sign reversal of all projections") {
    // 3j(j1 j2 j3; -m1 -m2 -m3) = (-1)^(j1+j2+j3) 3j(j1 j2 j3; m1 m2 m3)
    const int cases[][6] = {
        {4, 4, 4, 2, 2, -4},
        {5, 6, 5, -5, 4, 1},
        {3, 4, 3, 3, -2, -1},
        {6, 10, 6, 4, -2, -2},
    };
    for (const auto& c : cases) {
        const double plus = wigner_3j(c[0], c[1], c[2], c[3], c[4], c[5]);
        const double minus = wigner_3j(c[0], c[1], c[2], -c[3], -c[4], -c[5]);
        const int phase = ((c[0] + c[1] + c[2]) / 2) % 2 ? -1 : 1;
        CHECK(std::abs(minus - phase * plus) < 1e-14);
    }
}

TEST_CASE("3j rejects unphysical arguments") {
    // parity mismatch between j and m (j - m not an integer)
    CHECK(wigner_3j(2, 2, 2, 1, -1, 0) == 0.0);
    // |m| > j
    CHECK(wigner_3j(2, 2, 2, 4, -4, 0) == 0.0);
    CHECK_THROWS_AS(wigner_3j(-2, 2, 2, 0, 0, 0), zeitlin::usage_error);
}
