#include <cmath>
#include <doctest.h>

#include "oracles.hpp"
#include "polyscan/log_value.hpp"
#include "polyscan/rng.hpp"
#include "polyscan/small_matrix.hpp"
#include "polyscan/special_functions.hpp"

using namespace polyscan;

namespace {

Mat3 random_spd3(CounterRng& rng) {
    Mat3 a;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) a(r, c) = 2.0 * rng.next_unit() - 1.0;
    return (a.transposed() * a + Mat3::identity()).symmetrized();
}

} // namespace

TEST_CASE("log_gamma known values") {
    CHECK(log_gamma(1.0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(log_gamma(0.5) == doctest::Approx(0.5 * std::log(M_PI)).epsilon(1e-14));
    CHECK(log_gamma(5.0) == doctest::Approx(std::log(24.0)).epsilon(1e-14));
    CHECK(log_gamma(2.0) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("log_gamma matches std::lgamma over the contract range") {
    // Relative error <= 1e-12 away from the zeros of ln Gamma (absolute there).
    for (const double x : {1e-3, 1e-2, 0.1, 0.25, 0.75, 1.5, 3.0, 12.5, 100.0, 2048.0, 1e5,
                           3.7e6, 1e7}) {
        const double ref = std::lgamma(x);
        const double got = log_gamma(x);
        const double scale = std::max(1.0, std::fabs(ref));
        CHECK(std::fabs(got - ref) <= 1e-12 * scale);
    }
    // dense log-uniform sweep of [1e-3, 1e7]
    CounterRng rng(3);
    for (int i = 0; i < 4000; ++i) {
        const double x = std::exp(std::log(1e-3) + rng.next_unit() * std::log(1e10));
        const double ref = std::lgamma(x);
        const double scale = std::max(1.0, std::fabs(ref));
        CHECK(std::fabs(log_gamma(x) - ref) <= 1e-12 * scale);
    }
}

TEST_CASE("log_gamma recurrence identity") {
    // ln G(x+1) - ln G(x) = ln x
    CounterRng rng(7);
    for (int i = 0; i < 2000; ++i) {
        const double x = std::exp(std::log(0.5) + rng.next_unit() * std::log(2e4));
        const double lhs = log_gamma(x + 1.0) - log_gamma(x);
        const double scale = std::max(1.0, std::fabs(std::log(x)));
        CHECK(std::fabs(lhs - std::log(x)) <= 1e-11 * scale);
    }
}

TEST_CASE("log_gamma domain errors") {
    CHECK_THROWS_AS(log_gamma(0.0), std::domain_error);
    CHECK_THROWS_AS(log_gamma(-1.5), std::domain_error);
    CHECK_THROWS_AS(log_gamma(std::numeric_limits<double>::quiet_NaN()), std::domain_error);
    CHECK_THROWS_AS(log_gamma(std::numeric_limits<double>::infinity()), std::domain_error);
}

TEST_CASE("reg_inc_beta endpoints and symmetry point") {
    CHECK(reg_inc_beta(2.0, 3.0, 0.0) == 0.0);
    CHECK(reg_inc_beta(2.0, 3.0, 1.0) == 1.0);
    CHECK(reg_inc_beta(4.0, 4.0, 0.5) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("reg_inc_beta closed forms") {
    // I_x(1, b) = 1 - (1-x)^b ; I_x(a, 1) = x^a
    CounterRng rng(11);
    for (int i = 0; i < 200; ++i) {
        const double x = rng.next_unit();
        const double b = 0.5 + 10.0 * rng.next_unit();
        CHECK(reg_inc_beta(1.0, b, x) ==
              doctest::Approx(1.0 - std::pow(1.0 - x, b)).epsilon(1e-10));
        CHECK(reg_inc_beta(b, 1.0, x) == doctest::Approx(std::pow(x, b)).epsilon(1e-10));
    }
}

TEST_CASE("reg_inc_beta complement identity") {
    // I_x(a,b) + I_{1-x}(b,a) = 1
    CounterRng rng(13);
    for (int i = 0; i < 1000; ++i) {
        const double a = 0.2 + 20.0 * rng.next_unit();
        const double b = 0.2 + 20.0 * rng.next_unit();
        const double x = rng.next_unit();
        const double s = reg_inc_beta(a, b, x) + reg_inc_beta(b, a, 1.0 - x);
        CHECK(std::fabs(s - 1.0) <= 1e-10);
    }
}

TEST_CASE("reg_inc_beta domain errors") {
    CHECK_THROWS_AS(reg_inc_beta(0.0, 1.0, 0.5), std::domain_error);
    CHECK_THROWS_AS(reg_inc_beta(1.0, -2.0, 0.5), std::domain_error);
    CHECK_THROWS_AS(reg_inc_beta(1.0, 1.0, -0.1), std::domain_error);
    CHECK_THROWS_AS(reg_inc_beta(1.0, 1.0, 1.1), std::domain_error);
}

TEST_CASE("spd_solve identity and diagonal") {
    const Vec3 v{1.0, 2.0, 3.0};
    const Vec3 x = spd_solve(Mat3::identity(), v);
    CHECK(x[0] == doctest::Approx(1.0));
    CHECK(x[1] == doctest::Approx(2.0));
    CHECK(x[2] == doctest::Approx(3.0));

    const Vec3 d = spd_solve(Mat3::diagonal({2.0, 4.0, 8.0}), {2.0, 4.0, 8.0});
    CHECK(d[0] == doctest::Approx(1.0));
    CHECK(d[1] == doctest::Approx(1.0));
    CHECK(d[2] == doctest::Approx(1.0));
}

TEST_CASE("spd_solve matches the adjugate oracle and round-trips") {
    CounterRng rng(17);
    for (int i = 0; i < 1000; ++i) {
        const Mat3 m = random_spd3(rng);
        Vec3 v;
        for (auto& e : v) e = 4.0 * rng.next_unit() - 2.0;

        const Vec3 x = spd_solve(m, v);
        const Vec3 x_oracle = oracles::solve3_adjugate(m, v);
        double v_norm = 0.0;
        for (const double e : v) v_norm = std::max(v_norm, std::fabs(e));
        for (int j = 0; j < 3; ++j) {
            CHECK(std::fabs(x[j] - x_oracle[j]) <= 1e-10 * std::max(1.0, v_norm));
        }

        // multiply-back residual
        const Vec3 back = m * x;
        for (int j = 0; j < 3; ++j) {
            CHECK(std::fabs(back[j] - v[j]) <= 1e-9 * std::max(1.0, v_norm));
        }
    }
}

TEST_CASE("spd_solve rejects indefinite matrices with the pivot index") {
    Mat3 bad = Mat3::identity();
    bad(2, 2) = -1.0;
    try {
        spd_solve(bad, {1.0, 1.0, 1.0});
        FAIL("expected SingularMatrixError");
    } catch (const SingularMatrixError& e) {
        CHECK(e.pivot() == 2);
    }
}

TEST_CASE("log_det_spd trivial and oracle-checked values") {
    CHECK(log_det_spd(Mat3::identity()) == doctest::Approx(0.0));
    CHECK(log_det_spd(Mat3::diagonal({2.0, 2.0, 2.0})) ==
          doctest::Approx(3.0 * std::log(2.0)).epsilon(1e-14));

    CounterRng rng(19);
    for (int i = 0; i < 1000; ++i) {
        const Mat3 m = random_spd3(rng);
        const double lhs = std::exp(log_det_spd(m));
        const double rhs = oracles::det3_cofactor(m);
        CHECK(std::fabs(lhs - rhs) <= 1e-9 * std::fabs(rhs));
    }
}

TEST_CASE("SPD routines hold up at condition numbers near 1e6") {
    CounterRng rng(29);
    for (int i = 0; i < 1000; ++i) {
        // A^T A + 1e-6 I: smallest eigenvalue 1e-6-ish, largest O(1)
        Mat3 a;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) a(r, c) = 2.0 * rng.next_unit() - 1.0;
        const Mat3 m = (a.transposed() * a + Mat3::scaled_identity(1e-6)).symmetrized();

        const double lhs = std::exp(log_det_spd(m));
        const double rhs = oracles::det3_cofactor(m);
        CHECK(std::fabs(lhs - rhs) <= 1e-9 * std::fabs(rhs));

        Vec3 v;
        for (auto& e : v) e = 2.0 * rng.next_unit() - 1.0;
        const Vec3 x = spd_solve(m, v);
        const Vec3 back = m * x;
        double v_norm = 0.0;
        for (const double e : v) v_norm = std::max(v_norm, std::fabs(e));
        for (int j = 0; j < 3; ++j) {
            CHECK(std::fabs(back[j] - v[j]) <= 1e-9 * std::max(1.0, v_norm));
        }
    }
}

TEST_CASE("2x2 factorization round trip") {
    CounterRng rng(23);
    for (int i = 0; i < 200; ++i) {
        Mat2 a;
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) a(r, c) = 2.0 * rng.next_unit() - 1.0;
        const Mat2 m = (a.transposed() * a + Mat2::identity()).symmetrized();
        const Mat2 inv = spd_inverse(m);
        const Mat2 prod = m * inv;
        CHECK(prod(0, 0) == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(prod(1, 1) == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(std::fabs(prod(0, 1)) <= 1e-10);
        CHECK(std::fabs(prod(1, 0)) <= 1e-10);
    }
}

TEST_CASE("LogValue keeps arithmetic in log space") {
    const LogValue big = LogValue::from_log(800.0); // exp overflows double
    const LogValue ratio = big / LogValue::from_log(799.0);
    CHECK(ratio.log() == doctest::Approx(1.0));
    CHECK(ratio.linear() == doctest::Approx(std::exp(1.0)));
    CHECK(LogValue::from_linear(1500.0).log() == doctest::Approx(std::log(1500.0)));
    CHECK(big > LogValue::from_log(1.0));
}
