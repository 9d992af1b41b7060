#include <cmath>
#include <doctest.h>

#include "oracles.hpp"
#include "polyscan/genetics.hpp"
#include "polyscan/rng.hpp"

using namespace polyscan;

TEST_CASE("encode_genotype codings") {
    CHECK(encode_genotype("AA").value() == 0);
    CHECK(encode_genotype("AB").value() == 1);
    CHECK(encode_genotype("BA").value() == 1);
    CHECK(encode_genotype("BB").value() == 2);
    CHECK(encode_genotype("NA").is_missing());
    CHECK_THROWS_AS(encode_genotype("AC"), ParseError);
    CHECK_THROWS_AS(encode_genotype(""), ParseError);
}

TEST_CASE("polynomial_design_row") {
    const Vec3 r0 = polynomial_design_row(Dosage(0));
    const Vec3 r1 = polynomial_design_row(Dosage(1));
    const Vec3 r2 = polynomial_design_row(Dosage(2));
    CHECK(r0 == Vec3{1.0, 0.0, 0.0});
    CHECK(r1 == Vec3{1.0, 1.0, 1.0});
    CHECK(r2 == Vec3{1.0, 2.0, 4.0});
    CHECK_THROWS_AS(polynomial_design_row(Dosage::missing()), std::invalid_argument);
}

TEST_CASE("omega matrices") {
    const auto rows = [](GeneticModel m) {
        return omega(m).m.a;
    };
    CHECK(rows(GeneticModel::Genotypic) ==
          std::array<double, 9>{1, 0, 0, 0, 1, 1, 0, 2, 4});
    CHECK(rows(GeneticModel::Dominant) == std::array<double, 9>{1, 0, 0, 0, 1, 1, 0, 1, 3});
    CHECK(rows(GeneticModel::Recessive) == std::array<double, 9>{1, 0, 0, 0, 2, 4, 0, 1, 1});
    CHECK(rows(GeneticModel::Codominant) == std::array<double, 9>{1, 0, 0, 0, 1, 1, 0, 1, 2});
    CHECK(rows(GeneticModel::Additive) == std::array<double, 9>{1, 0, 0, 0, 1, 1, 0, 0, 1});
    CHECK_THROWS_AS(omega(GeneticModel::Null), std::invalid_argument);

    for (const GeneticModel m : kAlternativeModels) {
        CHECK(std::fabs(oracles::det3_cofactor(omega(m).m)) > 0.0); // invertible
    }
}

TEST_CASE("constraint contrasts") {
    CHECK(constraint_contrast(GeneticModel::Additive).c == Vec3{0, 0, 1});
    CHECK(constraint_contrast(GeneticModel::Dominant).c == Vec3{0, 1, 3});
    CHECK(constraint_contrast(GeneticModel::Recessive).c == Vec3{0, 1, 1});
    CHECK(constraint_contrast(GeneticModel::Codominant).c == Vec3{0, 1, 2});
    CHECK_THROWS_AS(constraint_contrast(GeneticModel::Genotypic), std::invalid_argument);
    CHECK_THROWS_AS(constraint_contrast(GeneticModel::Null), std::invalid_argument);
}

TEST_CASE("constraint is row 3 of omega acting on beta") {
    CounterRng rng(29);
    for (const GeneticModel m : kConstrainedModels) {
        const ConstraintContrast contrast = constraint_contrast(m);
        const Mat3& w = omega(m).m;
        for (int i = 0; i < 250; ++i) {
            // Random beta on the constraint surface: solve c . beta = 0 for beta2
            // (or beta1 for the additive contrast (0,0,1)).
            Vec3 beta{2.0 * rng.next_unit() - 1.0, 2.0 * rng.next_unit() - 1.0, 0.0};
            if (contrast.c[2] != 0.0) {
                beta[2] = -(contrast.c[0] * beta[0] + contrast.c[1] * beta[1]) / contrast.c[2];
            }
            CHECK(std::fabs(dot(contrast.c, beta)) <= 1e-12);
            const Vec3 theta = w * beta;
            CHECK(std::fabs(theta[2]) <= 1e-12);
        }
    }
}

TEST_CASE("trait triplets per model") {
    const double poly_params[] = {1.0, 1.0, 1.0};
    const auto poly = polynomial_trait_triplet({1.0, 1.0, 1.0});
    CHECK(poly == std::array<double, 3>{1.0, 3.0, 7.0});
    (void)poly_params;

    const double rec[] = {0.0, 1.0};
    CHECK(expected_trait_triplet(GeneticModel::Recessive, rec) ==
          std::array<double, 3>{0.0, 0.0, 1.0});
    const double cod[] = {0.0, 1.0};
    CHECK(expected_trait_triplet(GeneticModel::Codominant, cod) ==
          std::array<double, 3>{0.0, 1.0, 0.0});
    const double add[] = {0.5, 2.0};
    CHECK(expected_trait_triplet(GeneticModel::Additive, add) ==
          std::array<double, 3>{0.5, 2.5, 4.5});
    const double gen[] = {1.0, 2.0, 6.0};
    CHECK(expected_trait_triplet(GeneticModel::Genotypic, gen) ==
          std::array<double, 3>{1.0, 3.0, 7.0});

    const double wrong[] = {1.0, 2.0, 3.0};
    CHECK_THROWS_AS(expected_trait_triplet(GeneticModel::Additive, wrong),
                    std::invalid_argument);
}

TEST_CASE("constrained triplets agree with the polynomial through omega") {
    // For beta satisfying the constraint, the polynomial triplet equals the
    // 2-parameter model triplet at alpha = first two components of omega beta.
    CounterRng rng(31);
    for (const GeneticModel m : kConstrainedModels) {
        const ConstraintContrast contrast = constraint_contrast(m);
        const Mat3& w = omega(m).m;
        for (int i = 0; i < 250; ++i) {
            Vec3 beta{4.0 * rng.next_unit() - 2.0, 4.0 * rng.next_unit() - 2.0, 0.0};
            if (contrast.c[2] != 0.0) {
                beta[2] = -(contrast.c[0] * beta[0] + contrast.c[1] * beta[1]) / contrast.c[2];
            }
            const Vec3 theta = w * beta;
            const double alpha[] = {theta[0], theta[1]};
            const auto lhs = polynomial_trait_triplet(beta);
            const auto rhs = expected_trait_triplet(m, alpha);
            for (int j = 0; j < 3; ++j) CHECK(std::fabs(lhs[j] - rhs[j]) <= 1e-12);
        }
    }
}

TEST_CASE("genotypic map is one to one") {
    CounterRng rng(37);
    const Mat3& w = omega(GeneticModel::Genotypic).m;
    const Mat3 w_inv = oracles::inverse3_adjugate(w);
    for (int i = 0; i < 1000; ++i) {
        Vec3 beta;
        for (auto& b : beta) b = 10.0 * rng.next_unit() - 5.0;
        const Vec3 gamma = w * beta;
        const Vec3 back = w_inv * gamma;
        for (int j = 0; j < 3; ++j) CHECK(std::fabs(back[j] - beta[j]) <= 1e-12);
    }

    // beta_n = (1,1,1) maps to gamma_n = (1,2,6)
    const Vec3 gamma = w * Vec3{1.0, 1.0, 1.0};
    CHECK(gamma == Vec3{1.0, 2.0, 6.0});
}

TEST_CASE("allele-flip duality of dominant and recessive codings") {
    // Under g -> 2-g, the dominant column for B is one minus the recessive
    // column for B.
    for (const int g : {0, 1, 2}) {
        const double dom_flipped = model_design_value(GeneticModel::Dominant, 2 - g);
        const double rec = model_design_value(GeneticModel::Recessive, g);
        CHECK(dom_flipped == 1.0 - rec);
        const double cod_flipped = model_design_value(GeneticModel::Codominant, 2 - g);
        CHECK(cod_flipped == model_design_value(GeneticModel::Codominant, g));
    }
}

TEST_CASE("model names round trip") {
    for (const GeneticModel m :
         {GeneticModel::Genotypic, GeneticModel::Additive, GeneticModel::Dominant,
          GeneticModel::Recessive, GeneticModel::Codominant, GeneticModel::Null}) {
        CHECK(model_from_name(model_name(m)) == m);
    }
    CHECK(!model_from_name("cauchy"));
}
