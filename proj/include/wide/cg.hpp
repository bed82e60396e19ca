#pragma once

#include <Eigen/Dense>

#include <functional>

namespace wide {

struct CgResult {
    int iterations = 0;
    double residual = 0.0;       // final |r| / |b|
    bool converged = false;
    bool spd_violation = false;  // saw <p, Ap> <= 0 on a probe vector
};

/// Matrix-free preconditioned conjugate gradients for SPD operators.
/// apply:   y = A x
/// precond: y = M^{-1} x (pass identity for plain CG)
/// Solves A x = b to relative tolerance tol on the unpreconditioned residual.
template <class Apply, class Precond>
CgResult pcg(const Apply& apply, const Precond& precond, const Eigen::VectorXd& b,
             Eigen::VectorXd& x, double tol, int max_iter) {
    CgResult res;
    const double bnorm = b.norm();
    if (bnorm == 0.0) {
        x.setZero();
        res.converged = true;
        return res;
    }
    if (x.size() != b.size()) x = Eigen::VectorXd::Zero(b.size());

    Eigen::VectorXd r = b - apply(x);
    Eigen::VectorXd z = precond(r);
    Eigen::VectorXd p = z;
    double rz = r.dot(z);
    for (int it = 0; it < max_iter; ++it) {
        res.iterations = it;
        if (r.norm() <= tol * bnorm) {
            res.converged = true;
            break;
        }
        Eigen::VectorXd ap = apply(p);
        double pap = p.dot(ap);
        if (!(pap > 0.0)) {
            res.spd_violation = true;
            break;
        }
        double alpha = rz / pap;
        x += alpha * p;
        r -= alpha * ap;
        z = precond(r);
        double rz_new = r.dot(z);
        p = z + (rz_new / rz) * p;
        rz = rz_new;
    }
    res.residual = r.norm() / bnorm;
    if (r.norm() <= tol * bnorm) res.converged = true;
    return res;
}

}  // namespace wide
