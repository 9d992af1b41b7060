#include "polyscan/genetics.hpp"

#include <stdexcept>
#include <string>

namespace polyscan {

namespace {

OmegaMatrix make_omega(GeneticModel model, std::array<double, 9> rows) {
    OmegaMatrix w;
    w.model = model;
    w.m.a = rows;
    return w;
}

const OmegaMatrix kOmegaGenotypic = make_omega(GeneticModel::Genotypic,
                                               {1, 0, 0,
                                                0, 1, 1,
                                                0, 2, 4});
const OmegaMatrix kOmegaAdditive = make_omega(GeneticModel::Additive,
                                              {1, 0, 0,
                                               0, 1, 1,
                                               0, 0, 1});
const OmegaMatrix kOmegaDominant = make_omega(GeneticModel::Dominant,
                                              {1, 0, 0,
                                               0, 1, 1,
                                               0, 1, 3});
const OmegaMatrix kOmegaRecessive = make_omega(GeneticModel::Recessive,
                                               {1, 0, 0,
                                                0, 2, 4,
                                                0, 1, 1});
const OmegaMatrix kOmegaCodominant = make_omega(GeneticModel::Codominant,
                                                {1, 0, 0,
                                                 0, 1, 1,
                                                 0, 1, 2});

} // namespace

std::string_view model_name(GeneticModel model) {
    switch (model) {
    case GeneticModel::Genotypic: return "genotypic";
    case GeneticModel::Additive: return "additive";
    case GeneticModel::Dominant: return "dominant";
    case GeneticModel::Recessive: return "recessive";
    case GeneticModel::Codominant: return "codominant";
    case GeneticModel::Null: return "null";
    }
    return "unknown";
}

std::optional<GeneticModel> model_from_name(std::string_view name) {
    if (name == "genotypic") return GeneticModel::Genotypic;
    if (name == "additive") return GeneticModel::Additive;
    if (name == "dominant") return GeneticModel::Dominant;
    if (name == "recessive") return GeneticModel::Recessive;
    if (name == "codominant") return GeneticModel::Codominant;
    if (name == "null") return GeneticModel::Null;
    return std::nullopt;
}

Dosage encode_genotype(std::string_view call) {
    if (call == "AA") return Dosage(0);
    if (call == "AB" || call == "BA") return Dosage(1);
    if (call == "BB") return Dosage(2);
    if (call == "NA") return Dosage::missing();
    throw ParseError("invalid genotype call '" + std::string(call) + "'");
}

Vec3 polynomial_design_row(Dosage g) {
    if (g.is_missing()) {
        throw std::invalid_argument("polynomial_design_row: missing dosage");
    }
    const double x = static_cast<double>(g.value());
    return {1.0, x, x * x};
}

const OmegaMatrix& omega(GeneticModel model) {
    switch (model) {
    case GeneticModel::Genotypic: return kOmegaGenotypic;
    case GeneticModel::Additive: return kOmegaAdditive;
    case GeneticModel::Dominant: return kOmegaDominant;
    case GeneticModel::Recessive: return kOmegaRecessive;
    case GeneticModel::Codominant: return kOmegaCodominant;
    case GeneticModel::Null: break;
    }
    throw std::invalid_argument("omega: no omega matrix for the null model");
}

ConstraintContrast constraint_contrast(GeneticModel model) {
    switch (model) {
    case GeneticModel::Additive:
    case GeneticModel::Dominant:
    case GeneticModel::Recessive:
    case GeneticModel::Codominant: {
        const Mat3& w = omega(model).m;
        return {model, {w(2, 0), w(2, 1), w(2, 2)}};
    }
    default:
        throw std::invalid_argument("constraint_contrast: model '" +
                                    std::string(model_name(model)) + "' is unconstrained");
    }
}

std::array<double, 3> expected_trait_triplet(GeneticModel model, std::span<const double> params) {
    const auto require_arity = [&](std::size_t k) {
        if (params.size() != k) {
            throw std::invalid_argument("expected_trait_triplet: model '" +
                                        std::string(model_name(model)) + "' takes " +
                                        std::to_string(k) + " parameters, got " +
                                        std::to_string(params.size()));
        }
    };
    switch (model) {
    case GeneticModel::Genotypic:
        require_arity(3);
        return {params[0], params[0] + params[1], params[0] + params[2]};
    case GeneticModel::Additive:
        require_arity(2);
        return {params[0], params[0] + params[1], params[0] + 2.0 * params[1]};
    case GeneticModel::Dominant:
        require_arity(2);
        return {params[0], params[0] + params[1], params[0] + params[1]};
    case GeneticModel::Recessive:
        require_arity(2);
        return {params[0], params[0], params[0] + params[1]};
    case GeneticModel::Codominant:
        require_arity(2);
        return {params[0], params[0] + params[1], params[0]};
    case GeneticModel::Null:
        require_arity(1);
        return {params[0], params[0], params[0]};
    }
    throw std::invalid_argument("expected_trait_triplet: unknown model");
}

std::array<double, 3> polynomial_trait_triplet(const Vec3& beta) {
    return {beta[0],
            beta[0] + beta[1] + beta[2],
            beta[0] + 2.0 * beta[1] + 4.0 * beta[2]};
}

double model_design_value(GeneticModel model, int g) {
    switch (model) {
    case GeneticModel::Additive: return static_cast<double>(g);
    case GeneticModel::Dominant: return g >= 1 ? 1.0 : 0.0;
    case GeneticModel::Recessive: return g == 2 ? 1.0 : 0.0;
    case GeneticModel::Codominant: return g == 1 ? 1.0 : 0.0;
    default:
        throw std::invalid_argument("model_design_value: model '" +
                                    std::string(model_name(model)) +
                                    "' has no single design column");
    }
}

} // namespace polyscan
