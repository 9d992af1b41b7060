#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace oracles {

using polyscan::Dosage;
using polyscan::GeneticModel;
using polyscan::Mat2;
using polyscan::Mat3;
using polyscan::NormalGammaPrior;
using polyscan::Vec2;
using polyscan::Vec3;

bool dense_inverse(std::vector<double>& m, int n) {
    std::vector<double> inv(n * n, 0.0);
    for (int i = 0; i < n; ++i) inv[i * n + i] = 1.0;
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r) {
            if (std::fabs(m[r * n + col]) > std::fabs(m[pivot * n + col])) pivot = r;
        }
        if (m[pivot * n + col] == 0.0) return false;
        if (pivot != col) {
            for (int c = 0; c < n; ++c) {
                std::swap(m[pivot * n + c], m[col * n + c]);
                std::swap(inv[pivot * n + c], inv[col * n + c]);
            }
        }
        const double d = 1.0 / m[col * n + col];
        for (int c = 0; c < n; ++c) {
            m[col * n + c] *= d;
            inv[col * n + c] *= d;
        }
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = m[r * n + col];
            if (f == 0.0) continue;
            for (int c = 0; c < n; ++c) {
                m[r * n + c] -= f * m[col * n + c];
                inv[r * n + c] -= f * inv[col * n + c];
            }
        }
    }
    m = std::move(inv);
    return true;
}

double dense_log_det(std::vector<double> m, int n) {
    double log_abs = 0.0;
    double sign = 1.0;
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r) {
            if (std::fabs(m[r * n + col]) > std::fabs(m[pivot * n + col])) pivot = r;
        }
        const double p = m[pivot * n + col];
        if (p == 0.0) throw std::runtime_error("dense_log_det: singular matrix");
        if (pivot != col) {
            sign = -sign;
            for (int c = 0; c < n; ++c) std::swap(m[pivot * n + c], m[col * n + c]);
        }
        log_abs += std::log(std::fabs(p));
        if (p < 0.0) sign = -sign;
        for (int r = col + 1; r < n; ++r) {
            const double f = m[r * n + col] / p;
            for (int c = col; c < n; ++c) m[r * n + c] -= f * m[col * n + c];
        }
    }
    if (sign < 0.0) throw std::runtime_error("dense_log_det: negative determinant");
    return log_abs;
}

std::vector<double> dense_solve(std::vector<double> m, std::vector<double> b, int n) {
    if (!dense_inverse(m, n)) throw std::runtime_error("dense_solve: singular matrix");
    std::vector<double> x(n, 0.0);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) x[r] += m[r * n + c] * b[c];
    }
    return x;
}

double det3_cofactor(const Mat3& m) {
    return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
           m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
           m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
}

Mat3 inverse3_adjugate(const Mat3& m) {
    const double det = det3_cofactor(m);
    Mat3 inv;
    inv(0, 0) = (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) / det;
    inv(0, 1) = (m(0, 2) * m(2, 1) - m(0, 1) * m(2, 2)) / det;
    inv(0, 2) = (m(0, 1) * m(1, 2) - m(0, 2) * m(1, 1)) / det;
    inv(1, 0) = (m(1, 2) * m(2, 0) - m(1, 0) * m(2, 2)) / det;
    inv(1, 1) = (m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0)) / det;
    inv(1, 2) = (m(0, 2) * m(1, 0) - m(0, 0) * m(1, 2)) / det;
    inv(2, 0) = (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0)) / det;
    inv(2, 1) = (m(0, 1) * m(2, 0) - m(0, 0) * m(2, 1)) / det;
    inv(2, 2) = (m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0)) / det;
    return inv;
}

Vec3 solve3_adjugate(const Mat3& m, const Vec3& v) {
    return inverse3_adjugate(m) * v;
}

namespace {

double simpson_rule(const std::function<double(double)>& f, double a, double fa, double b,
                    double fb, double m, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double fa,
                            double b, double fb, double m, double fm, double whole,
                            double tolerance, int depth) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson_rule(f, a, fa, m, fm, lm, flm);
    const double right = simpson_rule(f, m, fm, b, fb, rm, frm);
    const double delta = left + right - whole;
    if (depth <= 0 || std::fabs(delta) <= 15.0 * tolerance) {
        return left + right + delta / 15.0;
    }
    return adaptive_simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tolerance, depth - 1) +
           adaptive_simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tolerance, depth - 1);
}

} // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tolerance) {
    const double m = 0.5 * (a + b);
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(m);
    const double whole = simpson_rule(f, a, fa, b, fb, m, fm);
    return adaptive_simpson_rec(f, a, fa, b, fb, m, fm, whole, tolerance, 48);
}

double quadrature_log_ml(std::span<const double> design, int n, int k,
                         std::span<const double> y, std::span<const double> prior_mean,
                         std::span<const double> prior_precision, double a1, double a2) {
    // P^-1
    std::vector<double> p_inv(prior_precision.begin(), prior_precision.end());
    if (!dense_inverse(p_inv, k)) throw std::runtime_error("quadrature: singular prior");

    // V = I + Z P^-1 Z^T
    std::vector<double> zp(n * k, 0.0); // Z P^-1
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < k; ++c)
            for (int j = 0; j < k; ++j) zp[i * k + c] += design[i * k + j] * p_inv[j * k + c];
    std::vector<double> v(n * n, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double s = i == j ? 1.0 : 0.0;
            for (int c = 0; c < k; ++c) s += zp[i * k + c] * design[j * k + c];
            v[i * n + j] = s;
        }
    }

    // r = y - Z m,   q = r^T V^-1 r,   and log|V|
    std::vector<double> r(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double s = y[i];
        for (int c = 0; c < k; ++c) s -= design[i * k + c] * prior_mean[c];
        r[i] = s;
    }
    const double log_det_v = dense_log_det(v, n);
    const std::vector<double> u = dense_solve(v, r, n);
    double q = 0.0;
    for (int i = 0; i < n; ++i) q += r[i] * u[i];

    // log integrand over tau, up to the tau-independent constant.
    const double shape = a1 + 0.5 * n;
    const double rate = 0.5 * q + 1.0 / a2;
    const double constant = -0.5 * n * std::log(2.0 * M_PI) - 0.5 * log_det_v -
                            std::lgamma(a1) - a1 * std::log(a2);

    const auto log_f = [&](double tau) { return (shape - 1.0) * std::log(tau) - rate * tau; };
    const double mode = shape > 1.0 ? (shape - 1.0) / rate : 1e-8 / rate;
    const double log_f_max = log_f(mode);
    const auto f = [&](double tau) {
        if (tau <= 0.0) return 0.0;
        return std::exp(log_f(tau) - log_f_max);
    };
    const double hi = (shape + 20.0 * std::sqrt(shape) + 50.0) / rate;
    const double integral = adaptive_simpson(f, 0.0, hi, 1e-12);
    return constant + log_f_max + std::log(integral);
}

double conjugate_log_ml(std::span<const double> design, int n, int k,
                        std::span<const double> y, std::span<const double> prior_mean,
                        std::span<const double> prior_precision, double a1, double a2,
                        std::vector<double>* posterior_mean) {
    std::vector<double> pn(prior_precision.begin(), prior_precision.end());
    for (int i = 0; i < n; ++i)
        for (int r = 0; r < k; ++r)
            for (int c = 0; c < k; ++c) pn[r * k + c] += design[i * k + r] * design[i * k + c];

    std::vector<double> rhs(k, 0.0);
    for (int r = 0; r < k; ++r) {
        for (int c = 0; c < k; ++c) rhs[r] += prior_precision[r * k + c] * prior_mean[c];
        for (int i = 0; i < n; ++i) rhs[r] += design[i * k + r] * y[i];
    }
    const std::vector<double> mn = dense_solve(pn, rhs, k);
    if (posterior_mean) *posterior_mean = mn;

    double yty = 0.0;
    for (int i = 0; i < n; ++i) yty += y[i] * y[i];
    double prior_quad = 0.0;
    for (int r = 0; r < k; ++r)
        for (int c = 0; c < k; ++c) prior_quad += prior_mean[r] * prior_precision[r * k + c] * prior_mean[c];
    double post_quad = 0.0;
    for (int r = 0; r < k; ++r) post_quad += mn[r] * rhs[r];

    const double a1n = a1 + 0.5 * n;
    const double a2n = 1.0 / (0.5 * (yty + prior_quad - post_quad) + 1.0 / a2);
    return -0.5 * n * std::log(2.0 * M_PI) +
           0.5 * (dense_log_det({prior_precision.begin(), prior_precision.end()}, k) -
                  dense_log_det(pn, k)) +
           a1n * std::log(a2n) + std::lgamma(a1n) - a1 * std::log(a2) - std::lgamma(a1);
}

void derive_constrained_prior(GeneticModel model, const NormalGammaPrior& prior,
                              std::vector<double>& mu0, std::vector<double>& precision0) {
    const Mat3& w = polyscan::omega(model).m;

    std::vector<double> r0_inv(9);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) r0_inv[r * 3 + c] = prior.r0(r, c);
    if (!dense_inverse(r0_inv, 3)) throw std::runtime_error("singular prior precision");

    // S = w R0^-1 w^T and theta = w beta0
    double s[9] = {0};
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
            double acc = 0.0;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) acc += w(r, i) * r0_inv[i * 3 + j] * w(c, j);
            s[r * 3 + c] = acc;
        }
    double theta[3] = {0, 0, 0};
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) theta[r] += w(r, c) * prior.beta0[c];

    // Conditioning on theta2 = 0.
    mu0.assign(2, 0.0);
    mu0[0] = theta[0] - s[2] / s[8] * theta[2];
    mu0[1] = theta[1] - s[5] / s[8] * theta[2];
    std::vector<double> cov(4);
    cov[0] = s[0] - s[2] * s[6] / s[8];
    cov[1] = s[1] - s[2] * s[7] / s[8];
    cov[2] = s[3] - s[5] * s[6] / s[8];
    cov[3] = s[4] - s[5] * s[7] / s[8];
    precision0 = cov;
    if (!dense_inverse(precision0, 2)) throw std::runtime_error("singular conditional covariance");
}

std::vector<double> build_polynomial_design(std::span<const Dosage> dosages) {
    std::vector<double> design;
    design.reserve(dosages.size() * 3);
    for (const Dosage g : dosages) {
        const double x = static_cast<double>(g.value());
        design.push_back(1.0);
        design.push_back(x);
        design.push_back(x * x);
    }
    return design;
}

std::vector<double> build_model_design(GeneticModel model, std::span<const Dosage> dosages) {
    // Codings written out directly from the model definitions.
    std::vector<double> design;
    design.reserve(dosages.size() * 2);
    for (const Dosage d : dosages) {
        const int g = d.value();
        double x = 0.0;
        switch (model) {
        case GeneticModel::Additive: x = g; break;
        case GeneticModel::Dominant: x = (g == 1 || g == 2) ? 1.0 : 0.0; break;
        case GeneticModel::Recessive: x = g == 2 ? 1.0 : 0.0; break;
        case GeneticModel::Codominant: x = g == 1 ? 1.0 : 0.0; break;
        default: throw std::invalid_argument("build_model_design: unsupported model");
        }
        design.push_back(1.0);
        design.push_back(x);
    }
    return design;
}

std::vector<double> build_null_design(int n) {
    return std::vector<double>(static_cast<std::size_t>(n), 1.0);
}

void grid_conditional_moments(const Vec3& theta, const Mat3& s, Vec2& mean_out,
                              Mat2& cov_out) {
    std::vector<double> s_inv(9);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) s_inv[r * 3 + c] = s(r, c);
    if (!dense_inverse(s_inv, 3)) throw std::runtime_error("singular covariance");

    const auto log_density = [&](double t0, double t1) {
        const double d[3] = {t0 - theta[0], t1 - theta[1], 0.0 - theta[2]};
        double quad = 0.0;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) quad += d[r] * s_inv[r * 3 + c] * d[c];
        return -0.5 * quad;
    };

    // Generous slice bounds: marginal sd plus the largest shift conditioning
    // on theta2 could induce.
    const double shift = std::fabs(theta[2]) * (std::fabs(s(0, 2)) + std::fabs(s(1, 2))) /
                             s(2, 2) +
                         1.0;
    const double half0 = 8.0 * std::sqrt(s(0, 0)) + shift;
    const double half1 = 8.0 * std::sqrt(s(1, 1)) + shift;
    constexpr int kGrid = 400;

    double mass = 0.0, m0 = 0.0, m1 = 0.0, v00 = 0.0, v01 = 0.0, v11 = 0.0;
    for (int i = 0; i < kGrid; ++i) {
        const double t0 = theta[0] - half0 + (2.0 * half0) * (i + 0.5) / kGrid;
        for (int j = 0; j < kGrid; ++j) {
            const double t1 = theta[1] - half1 + (2.0 * half1) * (j + 0.5) / kGrid;
            const double w = std::exp(log_density(t0, t1));
            mass += w;
            m0 += w * t0;
            m1 += w * t1;
        }
    }
    m0 /= mass;
    m1 /= mass;
    for (int i = 0; i < kGrid; ++i) {
        const double t0 = theta[0] - half0 + (2.0 * half0) * (i + 0.5) / kGrid;
        for (int j = 0; j < kGrid; ++j) {
            const double t1 = theta[1] - half1 + (2.0 * half1) * (j + 0.5) / kGrid;
            const double w = std::exp(log_density(t0, t1));
            v00 += w * (t0 - m0) * (t0 - m0);
            v01 += w * (t0 - m0) * (t1 - m1);
            v11 += w * (t1 - m1) * (t1 - m1);
        }
    }
    mean_out = {m0, m1};
    cov_out(0, 0) = v00 / mass;
    cov_out(0, 1) = v01 / mass;
    cov_out(1, 0) = v01 / mass;
    cov_out(1, 1) = v11 / mass;
}

double ks_uniform_statistic(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const double n = static_cast<double>(values.size());
    double d = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double x = values[i];
        const double lo = static_cast<double>(i) / n;
        const double hi = static_cast<double>(i + 1) / n;
        d = std::max(d, std::max(std::fabs(x - lo), std::fabs(hi - x)));
    }
    return d;
}

} // namespace oracles
