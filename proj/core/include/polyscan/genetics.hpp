#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

#include "polyscan/small_matrix.hpp"

namespace polyscan {

// The six hypotheses compared per SNP. The 3-parameter polynomial model is
// identified with Genotypic: the two parameterizations are related by an
// invertible linear map and share one marginal likelihood.
enum class GeneticModel : std::uint8_t {
    Genotypic,
    Additive,
    Dominant,
    Recessive,
    Codominant,
    Null,
};

// Fixed tie-break order for model selection: first entry wins ties.
inline constexpr std::array<GeneticModel, 5> kAlternativeModels = {
    GeneticModel::Additive,  GeneticModel::Dominant, GeneticModel::Recessive,
    GeneticModel::Codominant, GeneticModel::Genotypic,
};

inline constexpr std::array<GeneticModel, 4> kConstrainedModels = {
    GeneticModel::Additive, GeneticModel::Dominant, GeneticModel::Recessive,
    GeneticModel::Codominant,
};

std::string_view model_name(GeneticModel model);
std::optional<GeneticModel> model_from_name(std::string_view name);

// Count of the coded (B) allele: 0 = AA, 1 = AB, 2 = BB. Missing calls are
// excluded from every sufficient statistic downstream.
class Dosage {
public:
    Dosage() = default;
    explicit constexpr Dosage(int value) : v_(static_cast<std::int8_t>(value)) {}

    static constexpr Dosage missing() { return Dosage(kMissing); }

    constexpr bool is_missing() const { return v_ == kMissing; }
    constexpr int value() const { return v_; }

    friend constexpr bool operator==(Dosage a, Dosage b) { return a.v_ == b.v_; }

private:
    static constexpr std::int8_t kMissing = -1;
    std::int8_t v_ = kMissing;
};

// Allele-pair call -> dosage. Accepts AA, AB, BA, BB, and NA (missing).
// Anything else raises ParseError naming the offending token.
Dosage encode_genotype(std::string_view call);

// Row of the polynomial design matrix for a non-missing dosage g: (1, g, g^2).
Vec3 polynomial_design_row(Dosage g);

// Invertible map from polynomial coefficients beta to a model's theta
// parameters; the constrained models impose theta_2 = 0.
struct OmegaMatrix {
    GeneticModel model;
    Mat3 m;
};

// Throws std::invalid_argument for Null (no omega is defined for it).
const OmegaMatrix& omega(GeneticModel model);

// The linear constraint c . beta = 0 that carves a 2-parameter model out of
// the polynomial model; c is the third row of that model's omega.
struct ConstraintContrast {
    GeneticModel model;
    Vec3 c;
};

ConstraintContrast constraint_contrast(GeneticModel model);

// Expected trait value for genotypes (AA, AB, BB) under each model's own
// parameterization: 3 parameters for Genotypic (gamma), 2 for the constrained
// models (alpha0, alpha), 1 for Null. Throws std::invalid_argument on arity
// mismatch.
std::array<double, 3> expected_trait_triplet(GeneticModel model, std::span<const double> params);

// Same triplet for the polynomial parameterization: (b0, b0+b1+b2, b0+2b1+4b2).
std::array<double, 3> polynomial_trait_triplet(const Vec3& beta);

// The single-column genotype coding of each 2-parameter model (and dosage
// itself for Additive): the regressor value for dosage g. Genotypic and Null
// have no single column.
double model_design_value(GeneticModel model, int g);

} // namespace polyscan
