#ifndef ACFS_GP_HPP
#define ACFS_GP_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "acfs/decision.hpp"

namespace acfs {

struct GpHyperParams {
    double signal_var = 1.0;
    Eigen::VectorXd lengthscales; // one ARD lengthscale per input dimension
    double noise_var = 1e-4;
};

// Gaussian process regression with a squared-exponential ARD kernel. Inputs
// are standardised to the unit box and targets centred/scaled internally;
// predictions are reported on the original scale.
class GpModel {
public:
    struct Prediction {
        double mean = 0.0;
        double sd = 0.0;
    };

    static GpModel build(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                         const BoxBounds& box, const GpHyperParams& hyper);

    Prediction predict(const Eigen::VectorXd& x) const;
    double log_marginal_likelihood() const { return mll_; }
    const GpHyperParams& hyper() const { return hyper_; }
    int size() const { return static_cast<int>(xs_.rows()); }

private:
    Eigen::MatrixXd xs_; // standardised inputs
    Eigen::VectorXd ys_; // standardised targets
    GpHyperParams hyper_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    Eigen::VectorXd alpha_;
    double mll_ = 0.0;
    BoxBounds box_;
    double y_mean_ = 0.0;
    double y_sd_ = 1.0;

    Eigen::VectorXd standardise(const Eigen::VectorXd& x) const;
};

// Hyperparameters by maximising the log marginal likelihood over
// log-parameters with multi-start bounded quasi-Newton.
GpModel gp_fit(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
               const BoxBounds& box, std::uint64_t seed, int n_restarts = 5);

// Expected improvement for minimisation; zero when the posterior collapses.
double gp_expected_improvement(const GpModel& model, const Eigen::VectorXd& x,
                               double best_observed);
std::vector<double> gp_expected_improvement(const GpModel& model,
                                            const std::vector<Eigen::VectorXd>& candidates,
                                            double best_observed);

} // namespace acfs

#endif
