#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <complex>
#include <limits>
#include <stdexcept>

namespace mvsc {

class KernelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SingularSystemError : public KernelError {
public:
    using KernelError::KernelError;
};

/// Column-orthonormal map, W^T W = I.
struct OrthonormalMap {
    Eigen::MatrixXd w;  // d x m
};

/// Maximizes Tr(W^T M^T) over column-orthonormal W via the SVD M = U S V^T,
/// returning W with W^T = U V^T.
inline OrthonormalMap procrustes(const Eigen::MatrixXd& m_mat) {
    if (m_mat.rows() > m_mat.cols())
        throw KernelError("procrustes: need m <= d (rows <= cols)");
    if (!m_mat.allFinite()) throw KernelError("procrustes: non-finite input");
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m_mat, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return {svd.matrixV() * svd.matrixU().transpose()};
}

/// Solves A X + X B = C by Bartels-Stewart on the complex Schur forms of A
/// and B. Requires the spectra of A and -B to be disjoint.
inline Eigen::MatrixXd solve_sylvester(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                       const Eigen::MatrixXd& c) {
    const Eigen::Index p = a.rows();
    const Eigen::Index q = b.rows();
    if (a.cols() != p || b.cols() != q || c.rows() != p || c.cols() != q)
        throw KernelError("solve_sylvester: inconsistent shapes");
    if (!a.allFinite() || !b.allFinite() || !c.allFinite())
        throw KernelError("solve_sylvester: non-finite input");

    using CMat = Eigen::MatrixXcd;
    Eigen::ComplexSchur<Eigen::MatrixXd> sa(a);
    Eigen::ComplexSchur<Eigen::MatrixXd> sb(b);
    const CMat& ta = sa.matrixT();
    const CMat& tb = sb.matrixT();
    const CMat& ua = sa.matrixU();
    const CMat& ub = sb.matrixU();

    double min_gap = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = 0; j < q; ++j)
            min_gap = std::min(min_gap, std::abs(ta(i, i) + tb(j, j)));
    if (min_gap <= 1e-12)
        throw SingularSystemError("solve_sylvester: spectra of A and -B nearly intersect");

    CMat f = ua.adjoint() * c.cast<std::complex<double>>() * ub;
    CMat x(p, q);
    // Column sweep: (Ta + tb_kk I) x_k = f_k - X[:, <k] Tb[<k, k], back substitution.
    for (Eigen::Index k = 0; k < q; ++k) {
        Eigen::VectorXcd rhs = f.col(k);
        if (k > 0) rhs -= x.leftCols(k) * tb.block(0, k, k, 1);
        const std::complex<double> shift = tb(k, k);
        for (Eigen::Index i = p - 1; i >= 0; --i) {
            std::complex<double> s = rhs(i);
            for (Eigen::Index j = i + 1; j < p; ++j) s -= ta(i, j) * x(j, k);
            x(i, k) = s / (ta(i, i) + shift);
        }
    }
    return (ua * x * ub.adjoint()).real();
}

/// Proximal operator of tau * ||.||_{2,1}: shrinks each column toward zero by
/// tau in Euclidean norm, zeroing columns with norm <= tau.
inline Eigen::MatrixXd prox_l21(const Eigen::MatrixXd& g, double tau) {
    if (tau < 0) throw KernelError("prox_l21: tau must be >= 0");
    Eigen::MatrixXd e = Eigen::MatrixXd::Zero(g.rows(), g.cols());
    for (Eigen::Index j = 0; j < g.cols(); ++j) {
        const double norm = g.col(j).norm();
        if (norm > tau) e.col(j) = ((norm - tau) / norm) * g.col(j);
    }
    return e;
}

/// Singular value thresholding: proximal operator of tau * ||.||_*.
inline Eigen::MatrixXd svt(const Eigen::MatrixXd& m_mat, double tau) {
    if (tau < 0) throw KernelError("svt: tau must be >= 0");
    if (tau == 0) return m_mat;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m_mat, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Eigen::VectorXd sv = (svd.singularValues().array() - tau).max(0.0);
    return svd.matrixU() * sv.asDiagonal() * svd.matrixV().transpose();
}

}  // namespace mvsc
