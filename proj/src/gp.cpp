#include "acfs/gp.hpp"

#include <cmath>
#include <stdexcept>

#include "acfs/lbfgsb.hpp"
#include "acfs/rng.hpp"
#include "acfs/special.hpp"

namespace acfs {

namespace {

constexpr double kNoiseFloor = 1e-8;

struct Standardised {
    Eigen::MatrixXd xs;
    Eigen::VectorXd ys;
    double y_mean = 0.0;
    double y_sd = 1.0;
};

Standardised standardise_data(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                              const BoxBounds& box) {
    Standardised s;
    s.xs.resize(inputs.rows(), inputs.cols());
    const Eigen::VectorXd span = (box.hi - box.lo).cwiseMax(1e-12);
    for (Eigen::Index i = 0; i < inputs.rows(); ++i)
        s.xs.row(i) = (inputs.row(i).transpose() - box.lo).cwiseQuotient(span).transpose();
    s.y_mean = targets.mean();
    const double var = (targets.array() - s.y_mean).square().sum() /
                       std::max<Eigen::Index>(1, targets.size() - 1);
    s.y_sd = std::sqrt(std::max(var, 0.0));
    if (s.y_sd < 1e-12) s.y_sd = 1.0; // constant targets
    s.ys = (targets.array() - s.y_mean).matrix() / s.y_sd;
    return s;
}

// SE-ARD part of the kernel (no noise on the diagonal).
Eigen::MatrixXd kernel_se(const Eigen::MatrixXd& xs, const GpHyperParams& h) {
    const Eigen::Index n = xs.rows();
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        k(i, i) = h.signal_var;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const Eigen::VectorXd d =
                (xs.row(i) - xs.row(j)).transpose().cwiseQuotient(h.lengthscales);
            const double v = h.signal_var * std::exp(-0.5 * d.squaredNorm());
            k(i, j) = v;
            k(j, i) = v;
        }
    }
    return k;
}

// -log marginal likelihood and its gradient in theta = log(s2, ls..., noise),
// computed on already-standardised data.
double neg_mll_and_grad(const Standardised& s, const Eigen::VectorXd& theta,
                        Eigen::VectorXd* grad_out) {
    const int dim = static_cast<int>(s.xs.cols());
    GpHyperParams h;
    h.signal_var = std::exp(theta(0));
    h.lengthscales = theta.segment(1, dim).array().exp();
    h.noise_var = std::max(std::exp(theta(dim + 1)), kNoiseFloor);
    const Eigen::Index n = s.xs.rows();
    const Eigen::MatrixXd kse = kernel_se(s.xs, h);
    Eigen::MatrixXd k = kse;
    k.diagonal().array() += h.noise_var;
    Eigen::LLT<Eigen::MatrixXd> llt(k);
    double jitter = 1e-10;
    while (llt.info() != Eigen::Success && jitter <= 1e-2) {
        llt.compute(k + jitter * Eigen::MatrixXd::Identity(n, n));
        jitter *= 100.0;
    }
    if (llt.info() != Eigen::Success) return 1e100;
    const Eigen::VectorXd alpha = llt.solve(s.ys);
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) log_det += std::log(llt.matrixLLT()(i, i));
    const double mll =
        -0.5 * s.ys.dot(alpha) - log_det - 0.5 * static_cast<double>(n) * std::log(2.0 * M_PI);
    if (grad_out) {
        // d mll / d theta_j = 0.5 tr((alpha alpha^T - K^-1) dK/dtheta_j)
        const Eigen::MatrixXd kinv = llt.solve(Eigen::MatrixXd::Identity(n, n));
        const Eigen::MatrixXd a = alpha * alpha.transpose() - kinv;
        Eigen::VectorXd g(dim + 2);
        g(0) = 0.5 * a.cwiseProduct(kse).sum();
        for (int d = 0; d < dim; ++d) {
            double acc = 0.0;
            const double ls2 = h.lengthscales(d) * h.lengthscales(d);
            for (Eigen::Index i = 0; i < n; ++i)
                for (Eigen::Index j = 0; j < n; ++j) {
                    const double diff = s.xs(i, d) - s.xs(j, d);
                    acc += a(i, j) * kse(i, j) * diff * diff / ls2;
                }
            g(d + 1) = 0.5 * acc;
        }
        g(dim + 1) = 0.5 * h.noise_var * a.trace();
        *grad_out = -g; // minimising the negative
    }
    return -mll;
}

} // namespace

GpModel GpModel::build(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                       const BoxBounds& box, const GpHyperParams& hyper) {
    if (inputs.rows() < 2) throw std::domain_error("GpModel: need at least 2 points");
    if (inputs.rows() != targets.size()) throw std::domain_error("GpModel: size mismatch");
    GpModel m;
    m.box_ = box;
    m.hyper_ = hyper;
    m.hyper_.noise_var = std::max(hyper.noise_var, kNoiseFloor);
    const Standardised s = standardise_data(inputs, targets, box);
    m.xs_ = s.xs;
    m.ys_ = s.ys;
    m.y_mean_ = s.y_mean;
    m.y_sd_ = s.y_sd;

    Eigen::MatrixXd k = kernel_se(m.xs_, m.hyper_);
    k.diagonal().array() += m.hyper_.noise_var;
    double jitter = 0.0;
    while (true) {
        m.llt_.compute(jitter == 0.0
                           ? k
                           : (k + jitter * Eigen::MatrixXd::Identity(k.rows(), k.cols())).eval());
        if (m.llt_.info() == Eigen::Success) break;
        jitter = jitter == 0.0 ? 1e-10 : jitter * 100.0;
        if (jitter > 1e-2) throw std::runtime_error("GpModel: covariance factorisation failed");
    }
    m.alpha_ = m.llt_.solve(m.ys_);
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < m.llt_.matrixLLT().rows(); ++i)
        log_det += std::log(m.llt_.matrixLLT()(i, i));
    const double n = static_cast<double>(m.ys_.size());
    m.mll_ = -0.5 * m.ys_.dot(m.alpha_) - log_det - 0.5 * n * std::log(2.0 * M_PI);
    return m;
}

Eigen::VectorXd GpModel::standardise(const Eigen::VectorXd& x) const {
    return (x - box_.lo).cwiseQuotient((box_.hi - box_.lo).cwiseMax(1e-12));
}

GpModel::Prediction GpModel::predict(const Eigen::VectorXd& x) const {
    const Eigen::VectorXd q = standardise(x);
    const Eigen::Index n = xs_.rows();
    Eigen::VectorXd k(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::VectorXd d = (xs_.row(i).transpose() - q).cwiseQuotient(hyper_.lengthscales);
        k(i) = hyper_.signal_var * std::exp(-0.5 * d.squaredNorm());
    }
    Prediction p;
    const double mean_std = k.dot(alpha_);
    const Eigen::VectorXd v = llt_.solve(k);
    const double var_std = std::max(0.0, hyper_.signal_var - k.dot(v));
    p.mean = mean_std * y_sd_ + y_mean_;
    p.sd = std::sqrt(var_std) * y_sd_;
    return p;
}

GpModel gp_fit(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
               const BoxBounds& box, std::uint64_t seed, int n_restarts) {
    const int dim = static_cast<int>(inputs.cols());
    const Standardised s = standardise_data(inputs, targets, box);

    BoxBounds tb;
    tb.lo.resize(dim + 2);
    tb.hi.resize(dim + 2);
    tb.lo(0) = std::log(1e-4);
    tb.hi(0) = std::log(1e4);
    for (int d = 0; d < dim; ++d) {
        tb.lo(1 + d) = std::log(0.03);
        tb.hi(1 + d) = std::log(10.0);
    }
    tb.lo(dim + 1) = std::log(kNoiseFloor);
    tb.hi(dim + 1) = std::log(1.0);

    const Objective objective = [&](const Eigen::VectorXd& theta) {
        return neg_mll_and_grad(s, theta, nullptr);
    };
    const GradientFn gradient = [&](const Eigen::VectorXd& theta) {
        Eigen::VectorXd g;
        neg_mll_and_grad(s, theta, &g);
        return g;
    };

    Eigen::VectorXd best_theta;
    double best_val = std::numeric_limits<double>::infinity();
    RngStream rng(seed);
    QuasiNewtonOptions qn;
    qn.max_iter = 60;
    qn.pg_tol = 1e-5;
    for (int r = 0; r < std::max(1, n_restarts); ++r) {
        Eigen::VectorXd theta0(dim + 2);
        if (r == 0) {
            theta0(0) = 0.0; // unit signal variance
            for (int d = 0; d < dim; ++d) theta0(1 + d) = std::log(0.5);
            theta0(dim + 1) = std::log(1e-3);
        } else {
            for (int i = 0; i < dim + 2; ++i) theta0(i) = rng.uniform(tb.lo(i), tb.hi(i));
        }
        const QuasiNewtonResult res = bounded_quasi_newton(objective, gradient, theta0, tb, qn);
        if (res.f < best_val) {
            best_val = res.f;
            best_theta = res.x;
        }
    }
    if (best_theta.size() == 0) throw std::runtime_error("gp_fit: all restarts failed");
    GpHyperParams h;
    h.signal_var = std::exp(best_theta(0));
    h.lengthscales = best_theta.segment(1, dim).array().exp();
    h.noise_var = std::exp(best_theta(dim + 1));
    return GpModel::build(inputs, targets, box, h);
}

double gp_expected_improvement(const GpModel& model, const Eigen::VectorXd& x,
                               double best_observed) {
    const GpModel::Prediction p = model.predict(x);
    if (p.sd <= 1e-12) return 0.0;
    const double z = (best_observed - p.mean) / p.sd;
    return (best_observed - p.mean) * norm_cdf(z) + p.sd * norm_pdf(z);
}

std::vector<double> gp_expected_improvement(const GpModel& model,
                                            const std::vector<Eigen::VectorXd>& candidates,
                                            double best_observed) {
    std::vector<double> out;
    out.reserve(candidates.size());
    for (const auto& c : candidates)
        out.push_back(gp_expected_improvement(model, c, best_observed));
    return out;
}

} // namespace acfs
