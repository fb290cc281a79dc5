#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace pbt {

struct MaxEig {
    double value = 0.0;
    Eigen::VectorXd vector;
};

/// Largest eigenvalue and unit eigenvector of a symmetric matrix.
/// Dense eigendecomposition up to side 200, power iteration beyond.
/// Residual ||Av - lv|| <= 1e-10 ||A|| is enforced.
inline MaxEig max_eig_psd(const Eigen::MatrixXd& a) {
    const auto n = a.rows();
    if (n != a.cols())
        throw std::invalid_argument("max_eig_psd: matrix not square");
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, a.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("max_eig_psd: matrix not symmetric");

    const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
    MaxEig result;
    if (n <= 200) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
        if (es.info() != Eigen::Success)
            throw std::runtime_error("max_eig_psd: eigensolver failed");
        result.value = es.eigenvalues()(n - 1);
        result.vector = es.eigenvectors().col(n - 1);
    } else {
        Eigen::VectorXd v = Eigen::VectorXd::Ones(n).normalized();
        double lambda = 0.0;
        bool converged = false;
        for (long it = 0; it < 2000000; ++it) {
            Eigen::VectorXd av = a * v;
            lambda = v.dot(av);
            if ((av - lambda * v).norm() <= 1e-11 * std::max(norm, 1.0)) {
                converged = true;
                break;
            }
            double vnorm = av.norm();
            if (vnorm == 0.0) {
                lambda = 0.0;
                converged = true;
                break;
            }
            v = av / vnorm;
        }
        if (!converged)
            throw std::runtime_error("max_eig_psd: power iteration did not converge, residual " +
                                     std::to_string((a * v - lambda * v).norm()));
        result.value = lambda;
        result.vector = v;
    }
    const double residual = (a * result.vector - result.value * result.vector).norm();
    if (residual > 1e-10 * std::max(norm, 1.0))
        throw std::runtime_error("max_eig_psd: residual " + std::to_string(residual) +
                                 " exceeds tolerance");
    return result;
}

} // namespace pbt
