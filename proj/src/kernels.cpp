#include "mixot/kernels.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/owens_t.hpp>
#include <boost/math/special_functions/trigamma.hpp>

namespace mixot {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;

Eigen::MatrixXd to_eigen(const std::vector<Vec>& m) {
    const int n = static_cast<int>(m.size());
    Eigen::MatrixXd out(n, n);
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(m[i].size()) != n)
            throw InvalidArgument("kernel: covariance must be square");
        for (int j = 0; j < n; ++j) out(i, j) = m[i][j];
    }
    return out;
}

std::vector<Vec> from_eigen(const Eigen::MatrixXd& m) {
    std::vector<Vec> out(m.rows(), Vec(m.cols()));
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
    return out;
}

void check_theta(const KernelModel& k, const Vec& theta) {
    if (static_cast<int>(theta.size()) != k.param_dim())
        throw InvalidArgument("kernel: parameter dimension mismatch");
    if (!k.theta.contains(theta))
        throw InvalidArgument("kernel: parameter outside the parameter box");
}

void check_interior(const KernelModel& k, const Vec& theta) {
    check_theta(k, theta);
    for (size_t d = 0; d < theta.size(); ++d)
        if (!(k.theta.lo[d] < theta[d] && theta[d] < k.theta.hi[d]))
            throw InvalidArgument("kernel: derivative needs interior parameter");
}

}  // namespace

std::string family_name(Family f) {
    switch (f) {
        case Family::GaussianLocation: return "gaussian-location";
        case Family::GaussianLocationScale: return "gaussian-location-scale";
        case Family::Gamma: return "gamma";
        case Family::Bernoulli: return "bernoulli";
        case Family::SkewNormal: return "skew-normal";
    }
    throw InvalidArgument("unknown family tag");
}

Family family_from_name(const std::string& name) {
    if (name == "gaussian-location") return Family::GaussianLocation;
    if (name == "gaussian-location-scale") return Family::GaussianLocationScale;
    if (name == "gamma") return Family::Gamma;
    if (name == "bernoulli") return Family::Bernoulli;
    if (name == "skew-normal") return Family::SkewNormal;
    throw InvalidArgument("unknown kernel family: " + name);
}

int KernelModel::obs_dim() const {
    return family == Family::GaussianLocation ? param_dim() : 1;
}

bool KernelModel::diagonal_sigma() const {
    for (size_t i = 0; i < sigma.size(); ++i)
        for (size_t j = 0; j < sigma[i].size(); ++j)
            if (i != j && sigma[i][j] != 0.0) return false;
    return true;
}

void KernelModel::validate() const {
    theta.validate();
    switch (family) {
        case Family::GaussianLocation:
            if (static_cast<int>(sigma.size()) != param_dim())
                throw InvalidArgument("gaussian-location: covariance size mismatch");
            break;
        case Family::GaussianLocationScale:
            if (param_dim() != 2 || !(theta.lo[1] > 0.0))
                throw InvalidArgument("location-scale: need (mu, v) with v > 0");
            break;
        case Family::Gamma:
            if (param_dim() != 2 || !(theta.lo[0] > 0.0) || !(theta.lo[1] > 0.0))
                throw InvalidArgument("gamma: need positive (alpha, beta) box");
            break;
        case Family::Bernoulli:
            if (param_dim() != 1 || theta.lo[0] < 0.0 || theta.hi[0] > 1.0)
                throw InvalidArgument("bernoulli: box must lie in [0,1]");
            break;
        case Family::SkewNormal:
            if (param_dim() != 3 || !(theta.lo[1] > 0.0))
                throw InvalidArgument("skew-normal: need (mu, v, m) with v > 0");
            break;
    }
}

KernelModel gaussian_location(Box theta, std::vector<Vec> sigma) {
    KernelModel k;
    k.family = Family::GaussianLocation;
    k.theta = std::move(theta);
    const int q = k.param_dim();
    if (sigma.empty()) {
        sigma.assign(q, Vec(q, 0.0));
        for (int d = 0; d < q; ++d) sigma[d][d] = 1.0;
    }
    k.sigma = std::move(sigma);
    const Eigen::MatrixXd S = to_eigen(k.sigma);
    Eigen::LLT<Eigen::MatrixXd> llt(S);
    if (llt.info() != Eigen::Success)
        throw InvalidArgument("gaussian-location: covariance not positive definite");
    const Eigen::MatrixXd L = llt.matrixL();
    k.sigma_chol = from_eigen(L);
    k.sigma_inv = from_eigen(S.inverse());
    k.sigma_logdet = 2.0 * L.diagonal().array().log().sum();
    k.validate();
    return k;
}

KernelModel gaussian_location_scale(Box theta) {
    KernelModel k;
    k.family = Family::GaussianLocationScale;
    k.theta = std::move(theta);
    k.validate();
    return k;
}

KernelModel gamma_kernel(Box theta) {
    KernelModel k;
    k.family = Family::Gamma;
    k.theta = std::move(theta);
    k.validate();
    return k;
}

KernelModel bernoulli_kernel() {
    KernelModel k;
    k.family = Family::Bernoulli;
    k.theta = Box{{0.0}, {1.0}};
    k.validate();
    return k;
}

KernelModel skew_normal_kernel(Box theta) {
    KernelModel k;
    k.family = Family::SkewNormal;
    k.theta = std::move(theta);
    k.validate();
    return k;
}

double norm_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }

double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double log_density(const KernelModel& k, const Vec& x, const Vec& theta) {
    check_theta(k, theta);
    if (static_cast<int>(x.size()) != k.obs_dim())
        throw InvalidArgument("kernel: observation dimension mismatch");
    switch (k.family) {
        case Family::GaussianLocation: {
            const int q = k.param_dim();
            double quad = 0.0;
            for (int i = 0; i < q; ++i)
                for (int j = 0; j < q; ++j)
                    quad += (x[i] - theta[i]) * k.sigma_inv[i][j] * (x[j] - theta[j]);
            return -0.5 * (q * kLog2Pi + k.sigma_logdet + quad);
        }
        case Family::GaussianLocationScale: {
            const double u = x[0] - theta[0], v = theta[1];
            return -0.5 * (kLog2Pi + std::log(v) + u * u / v);
        }
        case Family::Gamma: {
            if (x[0] <= 0.0) return -std::numeric_limits<double>::infinity();
            const double a = theta[0], b = theta[1];
            return a * std::log(b) + (a - 1.0) * std::log(x[0]) - b * x[0] -
                   boost::math::lgamma(a);
        }
        case Family::Bernoulli: {
            if (x[0] != 0.0 && x[0] != 1.0)
                throw InvalidArgument("bernoulli: observation must be 0 or 1");
            const double p = x[0] == 1.0 ? theta[0] : 1.0 - theta[0];
            return p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
        }
        case Family::SkewNormal: {
            const double s = std::sqrt(theta[1]);
            const double z = (x[0] - theta[0]) / s;
            const double big_psi = norm_cdf(theta[2] * z);
            if (big_psi <= 0.0) return -std::numeric_limits<double>::infinity();
            return std::log(2.0 / s) - 0.5 * (kLog2Pi + z * z) + std::log(big_psi);
        }
    }
    throw InvalidArgument("unknown family");
}

double density(const KernelModel& k, const Vec& x, const Vec& theta) {
    const double ld = log_density(k, x, theta);
    return std::isfinite(ld) ? std::exp(ld) : 0.0;
}

double cdf(const KernelModel& k, double x, const Vec& theta) {
    check_theta(k, theta);
    switch (k.family) {
        case Family::GaussianLocation: {
            if (k.param_dim() != 1)
                throw InvalidArgument("cdf: multivariate gaussian needs rect_cdf");
            return norm_cdf((x - theta[0]) / std::sqrt(k.sigma[0][0]));
        }
        case Family::GaussianLocationScale:
            return norm_cdf((x - theta[0]) / std::sqrt(theta[1]));
        case Family::Gamma:
            if (x <= 0.0) return 0.0;
            return boost::math::gamma_p(theta[0], theta[1] * x);
        case Family::Bernoulli:
            if (x < 0.0) return 0.0;
            if (x < 1.0) return 1.0 - theta[0];
            return 1.0;
        case Family::SkewNormal: {
            const double z = (x - theta[0]) / std::sqrt(theta[1]);
            return norm_cdf(z) - 2.0 * boost::math::owens_t(z, theta[2]);
        }
    }
    throw InvalidArgument("unknown family");
}

double rect_cdf(const KernelModel& k, const Vec& x, const Vec& theta) {
    check_theta(k, theta);
    if (k.family != Family::GaussianLocation)
        throw InvalidArgument("rect_cdf: gaussian-location only");
    if (!k.diagonal_sigma())
        throw InvalidArgument("rect_cdf: non-diagonal covariance unsupported");
    if (x.size() != theta.size())
        throw InvalidArgument("rect_cdf: dimension mismatch");
    double p = 1.0;
    for (size_t d = 0; d < x.size(); ++d)
        p *= norm_cdf((x[d] - theta[d]) / std::sqrt(k.sigma[d][d]));
    return p;
}

std::vector<Vec> sample(const KernelModel& k, const Vec& theta, Rng& rng, int count) {
    check_theta(k, theta);
    if (count < 0) throw InvalidArgument("sample: negative count");
    std::vector<Vec> out;
    out.reserve(count);
    switch (k.family) {
        case Family::GaussianLocation: {
            const int q = k.param_dim();
            Vec z(q);
            for (int s = 0; s < count; ++s) {
                for (int d = 0; d < q; ++d) z[d] = rng.normal();
                Vec x(theta);
                for (int i = 0; i < q; ++i)
                    for (int j = 0; j <= i; ++j) x[i] += k.sigma_chol[i][j] * z[j];
                out.push_back(x);
            }
            break;
        }
        case Family::GaussianLocationScale: {
            const double s0 = std::sqrt(theta[1]);
            for (int s = 0; s < count; ++s)
                out.push_back({theta[0] + s0 * rng.normal()});
            break;
        }
        case Family::Gamma:
            for (int s = 0; s < count; ++s)
                out.push_back({rng.gamma(theta[0], 1.0 / theta[1])});
            break;
        case Family::Bernoulli:
            for (int s = 0; s < count; ++s)
                out.push_back({rng.uniform() < theta[0] ? 1.0 : 0.0});
            break;
        case Family::SkewNormal: {
            const double m = theta[2];
            const double delta = m / std::sqrt(1.0 + m * m);
            const double s0 = std::sqrt(theta[1]);
            for (int s = 0; s < count; ++s) {
                const double u = rng.normal(), w = rng.normal();
                out.push_back({theta[0] + s0 * (delta * std::abs(u) +
                                                std::sqrt(1.0 - delta * delta) * w)});
            }
            break;
        }
    }
    return out;
}

namespace {

// Central finite differences in theta; handles |alpha| in {1, 2}.
double finite_difference(const KernelModel& k, const Vec& x, const Vec& theta,
                         const std::vector<int>& alpha) {
    std::vector<int> coords;
    for (size_t d = 0; d < alpha.size(); ++d)
        for (int rep = 0; rep < alpha[d]; ++rep) coords.push_back(static_cast<int>(d));
    auto f = [&](const Vec& th) { return density(k, x, th); };
    if (coords.size() == 1) {
        const int d = coords[0];
        const double h = 1e-5 * (1.0 + std::abs(theta[d]));
        Vec tp = theta, tm = theta;
        tp[d] += h;
        tm[d] -= h;
        return (f(tp) - f(tm)) / (2.0 * h);
    }
    const int d1 = coords[0], d2 = coords[1];
    const double h1 = 1e-5 * (1.0 + std::abs(theta[d1]));
    if (d1 == d2) {
        Vec tp = theta, tm = theta;
        tp[d1] += h1;
        tm[d1] -= h1;
        return (f(tp) - 2.0 * f(theta) + f(tm)) / (h1 * h1);
    }
    const double h2 = 1e-5 * (1.0 + std::abs(theta[d2]));
    Vec tpp = theta, tpm = theta, tmp = theta, tmm = theta;
    tpp[d1] += h1; tpp[d2] += h2;
    tpm[d1] += h1; tpm[d2] -= h2;
    tmp[d1] -= h1; tmp[d2] += h2;
    tmm[d1] -= h1; tmm[d2] -= h2;
    return (f(tpp) - f(tpm) - f(tmp) + f(tmm)) / (4.0 * h1 * h2);
}

}  // namespace

double param_derivative(const KernelModel& k, const Vec& x, const Vec& theta,
                        const std::vector<int>& alpha) {
    check_interior(k, theta);
    if (alpha.size() != theta.size())
        throw InvalidArgument("param_derivative: multi-index length mismatch");
    int order = 0;
    for (int a : alpha) {
        if (a < 0) throw InvalidArgument("param_derivative: negative multi-index");
        order += a;
    }
    if (order == 0) return density(k, x, theta);
    if (order > 2) throw InvalidArgument("param_derivative: order above 2");

    std::vector<int> coords;
    for (size_t d = 0; d < alpha.size(); ++d)
        for (int rep = 0; rep < alpha[d]; ++rep) coords.push_back(static_cast<int>(d));

    switch (k.family) {
        case Family::GaussianLocation: {
            const double f = density(k, x, theta);
            const int q = k.param_dim();
            Vec g(q, 0.0);  // Sigma^{-1} (x - theta)
            for (int i = 0; i < q; ++i)
                for (int j = 0; j < q; ++j)
                    g[i] += k.sigma_inv[i][j] * (x[j] - theta[j]);
            if (order == 1) return f * g[coords[0]];
            const int i = coords[0], j = coords[1];
            return f * (g[i] * g[j] - k.sigma_inv[i][j]);
        }
        case Family::GaussianLocationScale: {
            const double f = density(k, x, theta);
            const double u = x[0] - theta[0], v = theta[1];
            if (order == 1)
                return coords[0] == 0 ? f * u / v
                                      : f * (u * u - v) / (2.0 * v * v);
            const int i = coords[0], j = coords[1];
            if (i == 0 && j == 0) return f * (u * u - v) / (v * v);
            if (i == 1 && j == 1)
                return f * (u * u * u * u - 6.0 * u * u * v + 3.0 * v * v) /
                       (4.0 * v * v * v * v);
            return f * u * (u * u - 3.0 * v) / (2.0 * v * v * v);
        }
        case Family::Gamma: {
            if (x[0] <= 0.0) return 0.0;
            const double f = density(k, x, theta);
            const double a = theta[0], b = theta[1];
            const double A = std::log(b) + std::log(x[0]) - boost::math::digamma(a);
            const double B = a / b - x[0];
            if (order == 1) return coords[0] == 0 ? f * A : f * B;
            const int i = coords[0], j = coords[1];
            if (i == 0 && j == 0) return f * (A * A - boost::math::trigamma(a));
            if (i == 1 && j == 1) return f * (B * B - a / (b * b));
            return f * (A * B + 1.0 / b);
        }
        case Family::Bernoulli: {
            if (order == 2) return 0.0;
            return x[0] == 1.0 ? 1.0 : -1.0;
        }
        case Family::SkewNormal: {
            if (order == 2) return finite_difference(k, x, theta, alpha);
            const double v = theta[1], m = theta[2];
            const double s = std::sqrt(v);
            const double z = (x[0] - theta[0]) / s;
            const double psi = norm_pdf(z), big = norm_cdf(m * z);
            const double psim = norm_pdf(m * z);
            if (coords[0] == 0)  // d/dmu
                return (2.0 / v) * psi * (z * big - m * psim);
            if (coords[0] == 1)  // d/dv
                return std::pow(v, -1.5) * psi * ((z * z - 1.0) * big - m * z * psim);
            return (2.0 * z / s) * psi * psim;  // d/dm
        }
    }
    throw InvalidArgument("unknown family");
}

std::pair<double, double> support_interval(const KernelModel& k, const Vec& theta) {
    check_theta(k, theta);
    switch (k.family) {
        case Family::GaussianLocation: {
            if (k.param_dim() != 1)
                throw InvalidArgument("support_interval: scalar observations only");
            const double s = std::sqrt(k.sigma[0][0]);
            return {theta[0] - 10.0 * s, theta[0] + 10.0 * s};
        }
        case Family::GaussianLocationScale: {
            const double s = std::sqrt(theta[1]);
            return {theta[0] - 10.0 * s, theta[0] + 10.0 * s};
        }
        case Family::Gamma: {
            const double lo = boost::math::gamma_p_inv(theta[0], 1e-14) / theta[1];
            const double hi = boost::math::gamma_q_inv(theta[0], 1e-13) / theta[1];
            return {lo, hi};
        }
        case Family::Bernoulli:
            return {-0.5, 1.5};
        case Family::SkewNormal: {
            const double s = std::sqrt(theta[1]);
            return {theta[0] - 12.0 * s, theta[0] + 12.0 * s};
        }
    }
    throw InvalidArgument("unknown family");
}

}  // namespace mixot
