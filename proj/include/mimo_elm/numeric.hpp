// SPDX-License-Identifier: Apache-2.0
//
// mimo-elm: massive MIMO uplink receivers built as extreme learning machines
// Copyright (C) 2026 The mimo-elm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

// Dense real/complex linear algebra shared by every receiver: regularized
// least squares, the real-composite embedding of complex systems, and the
// exponentially weighted recursive least-squares engine.

#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

namespace mimo_elm {

using cplx = std::complex<double>;

using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
  public:
    using Error::Error;
};

class SingularSystemError : public Error {
  public:
    using Error::Error;
};

class NumericalBlowupError : public Error {
  public:
    using Error::Error;
};

namespace detail {

inline void require_dims(bool ok, const char* what) {
    if (!ok) throw DimensionError(what);
}

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, const char* what) {
    if (!m.allFinite()) throw Error(std::string(what) + ": non-finite entry");
}

} // namespace detail

// Cholesky factorization of (Z^T Z + gamma I). Built once and reused for
// every right-hand side (the real and imaginary weight columns of all users
// share it).
class RidgeFactorization {
  public:
    RidgeFactorization(const RealMatrix& Z, double gamma) : gamma_(gamma) {
        detail::require_dims(Z.rows() >= 1 && Z.cols() >= 1, "ridge: Z must be non-empty");
        if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw Error("ridge: gamma must be finite and >= 0");
        detail::require_finite(Z, "ridge: Z");
        RealMatrix gram = RealMatrix::Zero(Z.cols(), Z.cols());
        gram.selfadjointView<Eigen::Lower>().rankUpdate(Z.transpose());
        gram = gram.selfadjointView<Eigen::Lower>();
        gram.diagonal().array() += gamma;
        factor(gram);
    }

    // From a precomputed symmetric Gram matrix (gamma already added).
    static RidgeFactorization from_gram(const RealMatrix& regularized_gram) {
        RidgeFactorization f;
        detail::require_dims(regularized_gram.rows() == regularized_gram.cols() && regularized_gram.rows() >= 1,
                             "ridge: Gram matrix must be square and non-empty");
        f.factor(regularized_gram);
        return f;
    }

    Eigen::Index dim() const { return llt_.matrixLLT().rows(); }
    double gamma() const { return gamma_; }

    // Solves (Z^T Z + gamma I) X = rhs.
    RealMatrix solve(const RealMatrix& rhs) const {
        detail::require_dims(rhs.rows() == dim(), "ridge: right-hand side row count mismatch");
        return llt_.solve(rhs);
    }

    // (Z^T Z + gamma I)^{-1}, symmetrized.
    RealMatrix inverse() const {
        RealMatrix inv = llt_.solve(RealMatrix::Identity(dim(), dim()));
        return 0.5 * (inv + inv.transpose());
    }

  private:
    RidgeFactorization() = default;

    void factor(const RealMatrix& gram) {
        llt_.compute(gram);
        if (llt_.info() != Eigen::Success) throw SingularSystemError("singular normal equations");
        const auto diag = llt_.matrixLLT().diagonal().array();
        const double lo = diag.minCoeff();
        const double hi = diag.maxCoeff();
        // pivot ratio squared approximates the reciprocal condition number
        const double tol = static_cast<double>(gram.rows()) * std::numeric_limits<double>::epsilon();
        if (!(lo > 0.0) || (lo * lo) / (hi * hi) < tol) throw SingularSystemError("singular normal equations");
    }

    Eigen::LLT<RealMatrix> llt_;
    double gamma_ = 0.0;
};

// argmin_B ||Z B - T||^2 + gamma ||B||^2, i.e. (Z^T Z + gamma I)^{-1} Z^T T.
inline RealMatrix ridge_solve(const RealMatrix& Z, const RealMatrix& T, double gamma) {
    detail::require_dims(T.rows() == Z.rows(), "ridge: Z and T row counts differ");
    detail::require_finite(T, "ridge: T");
    const RidgeFactorization f(Z, gamma);
    return f.solve(Z.transpose() * T);
}

// [[Re H, -Im H], [Im H, Re H]]
inline RealMatrix real_composite(const ComplexMatrix& H) {
    const auto n = H.rows();
    const auto k = H.cols();
    RealMatrix out(2 * n, 2 * k);
    out.topLeftCorner(n, k) = H.real();
    out.topRightCorner(n, k) = -H.imag();
    out.bottomLeftCorner(n, k) = H.imag();
    out.bottomRightCorner(n, k) = H.real();
    return out;
}

// [Re v; Im v]
inline RealVector real_stack(const ComplexVector& v) {
    RealVector out(2 * v.size());
    out.head(v.size()) = v.real();
    out.tail(v.size()) = v.imag();
    return out;
}

// Inverse of real_stack.
inline ComplexVector complex_unstack(const RealVector& v) {
    detail::require_dims(v.size() % 2 == 0, "complex_unstack: odd length");
    const auto n = v.size() / 2;
    ComplexVector out(n);
    for (Eigen::Index i = 0; i < n; ++i) out[i] = cplx(v[i], v[n + i]);
    return out;
}

// Exponentially weighted RLS over an L-dimensional regressor with V outputs.
struct RlsState {
    RealMatrix P;    // L x L inverse-correlation estimate
    RealMatrix beta; // L x V output weights
    double lambda = 1.0;

    Eigen::Index regressor_dim() const { return P.rows(); }
    Eigen::Index output_dim() const { return beta.cols(); }
};

inline RlsState rls_init(const RealMatrix& R0, const RealMatrix& T0, double gamma, double lambda) {
    if (!(lambda > 0.0 && lambda <= 1.0)) throw Error("rls: forgetting factor must lie in (0, 1]");
    detail::require_dims(T0.rows() == R0.rows(), "rls: R0 and T0 row counts differ");
    detail::require_finite(T0, "rls: T0");
    const RidgeFactorization f(R0, gamma);
    return RlsState{f.inverse(), f.solve(R0.transpose() * T0), lambda};
}

// In-place single-sample update.
//   q = P r / (lambda + r^T P r),  e = t - beta^T r,  beta += q e^T,
//   P = (P - q r^T P) / lambda, then re-symmetrized.
inline void rls_update(RlsState& s, const Eigen::Ref<const RealVector>& r, const Eigen::Ref<const RealVector>& t) {
    detail::require_dims(r.size() == s.regressor_dim(), "rls: regressor length mismatch");
    detail::require_dims(t.size() == s.output_dim(), "rls: target length mismatch");
    const RealVector Pr = s.P * r;
    const double denom = s.lambda + r.dot(Pr);
    if (!std::isfinite(denom) || denom <= 0.0)
        throw NumericalBlowupError("rls: gain denominator not finite/positive (lambda too small or regressor "
                                   "dimension too large for the data)");
    const RealVector q = Pr / denom;
    const RealVector e = t - s.beta.transpose() * r;
    s.beta.noalias() += q * e.transpose();
    s.P.noalias() -= q * Pr.transpose();
    s.P /= s.lambda;
    s.P = 0.5 * (s.P + s.P.transpose()).eval();
    if (!s.P.allFinite() || !s.beta.allFinite())
        throw NumericalBlowupError("rls: numerical blow-up in P or beta (lambda too small or regressor dimension "
                                   "too large for the data)");
}

inline RlsState rls_step(RlsState state, const RealVector& r, const RealVector& t) {
    rls_update(state, r, t);
    return state;
}

} // namespace mimo_elm
