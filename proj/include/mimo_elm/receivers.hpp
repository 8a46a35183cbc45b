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

// Uplink detectors.
//
// The natural ELM treats the 2N biased ADC outputs r' as the hidden layer of
// an extreme learning machine whose input weights are the channel itself;
// only the per-user output weights beta_k^Re, beta_k^Im are learned, by
// ridge regression onto the training symbols:
//
//     x~_k = (beta_k^Re)^T r' + j (beta_k^Im)^T r'
//
// Trained ZF is the same regression on unbiased quantized samples. ZF and
// MMSE use the true channel. The borrowed ELM puts an explicit random
// sigmoid layer of L nodes after the ADCs. The adaptive receiver tracks the
// natural-ELM weights with exponentially weighted RLS.

#pragma once

#include "mimo_elm/frontend.hpp"
#include "mimo_elm/numeric.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace mimo_elm {

// [Re X | Im X], one column per (branch, user).
inline RealMatrix symbol_targets(const ComplexMatrix& X) {
    RealMatrix T(X.rows(), 2 * X.cols());
    T.leftCols(X.cols()) = X.real();
    T.rightCols(X.cols()) = X.imag();
    return T;
}

inline std::vector<int> demap_all(const ComplexVector& x_soft, const QamConstellation& q) {
    std::vector<int> out(static_cast<std::size_t>(x_soft.size()));
    for (Eigen::Index k = 0; k < x_soft.size(); ++k) out[static_cast<std::size_t>(k)] = q.demap(x_soft[k]);
    return out;
}

// Real-valued per-user combiner acting on stacked [Re; Im] observations.
// This is both the natural-ELM output layer (biased observations) and the
// real-composite form of the trained ZF combiner (unbiased observations).
struct ElmReceiverWeights {
    RealMatrix beta_re; // 2N x K
    RealMatrix beta_im; // 2N x K
    double gamma = 0.0;

    Eigen::Index n_users() const { return beta_re.cols(); }
    Eigen::Index hidden_dim() const { return beta_re.rows(); }

    static ElmReceiverWeights from_stacked(const RealMatrix& B, double gamma) {
        detail::require_dims(B.cols() % 2 == 0, "weights: output count must be even");
        const auto k = B.cols() / 2;
        return {B.leftCols(k), B.rightCols(k), gamma};
    }

    RealMatrix stacked() const {
        RealMatrix B(hidden_dim(), 2 * n_users());
        B << beta_re, beta_im;
        return B;
    }

    // Two length-2N dot products per user.
    ComplexVector equalize(const Eigen::Ref<const RealVector>& r_prime) const {
        detail::require_dims(r_prime.size() == hidden_dim(), "detect: observation length mismatch");
        ComplexVector x(n_users());
        for (Eigen::Index k = 0; k < n_users(); ++k)
            x[k] = cplx(beta_re.col(k).dot(r_prime), beta_im.col(k).dot(r_prime));
        return x;
    }

    // Rows of R are observations; returns M x K soft symbols.
    ComplexMatrix equalize_batch(const RealMatrix& R) const {
        detail::require_dims(R.cols() == hidden_dim(), "detect: observation length mismatch");
        const RealMatrix re = R * beta_re;
        const RealMatrix im = R * beta_im;
        ComplexMatrix out(R.rows(), n_users());
        out.real() = re;
        out.imag() = im;
        return out;
    }
};

// Two regularized LS problems per user sharing one factorization of
// (R'^T R' + gamma I).
inline ElmReceiverWeights train_natural_elm(const RealMatrix& R_prime, const ComplexMatrix& X_train, double gamma) {
    detail::require_dims(R_prime.rows() == X_train.rows(), "train: observation and symbol counts differ");
    return ElmReceiverWeights::from_stacked(ridge_solve(R_prime, symbol_targets(X_train), gamma), gamma);
}

inline std::vector<int> detect_natural_elm(const ElmReceiverWeights& w, const Eigen::Ref<const RealVector>& r_prime,
                                           const QamConstellation& q) {
    return demap_all(w.equalize(r_prime), q);
}

// Regularized LS from unbiased quantized observations (rows of R, stacked
// [Re; Im]) to the training symbols, real and imaginary parts separated.
inline ElmReceiverWeights train_zf_direct(const RealMatrix& R, const ComplexMatrix& X_train, double gamma) {
    return train_natural_elm(R, X_train, gamma);
}

// Complex combiner with rows w_k^T, applied to complex observations.
struct LinearCombinerWeights {
    ComplexMatrix W; // K x N

    ComplexVector equalize(const ComplexVector& r) const {
        detail::require_dims(r.size() == W.cols(), "combiner: observation length mismatch");
        return W * r;
    }

    // Rows of R are stacked real observations [Re; Im].
    ComplexMatrix equalize_batch(const RealMatrix& R) const {
        const auto n = W.cols();
        detail::require_dims(R.cols() == 2 * n, "combiner: observation length mismatch");
        ComplexMatrix Rc(R.rows(), n);
        Rc.real() = R.leftCols(n);
        Rc.imag() = R.rightCols(n);
        return Rc * W.transpose();
    }
};

namespace detail {

inline LinearCombinerWeights regularized_pinv(const ComplexMatrix& H, double diag_load, const char* what) {
    ComplexMatrix gram = H.adjoint() * H;
    gram.diagonal().array() += diag_load;
    Eigen::LLT<ComplexMatrix> llt(gram);
    if (llt.info() != Eigen::Success) throw SingularSystemError(what);
    const auto d = llt.matrixLLT().diagonal().real().array();
    const double tol = static_cast<double>(gram.rows()) * std::numeric_limits<double>::epsilon();
    if (!(d.minCoeff() > 0.0) || (d.minCoeff() * d.minCoeff()) / (d.maxCoeff() * d.maxCoeff()) < tol)
        throw SingularSystemError(what);
    return {llt.solve(H.adjoint())};
}

} // namespace detail

// (H^H H)^{-1} H^H
inline LinearCombinerWeights zf_weights(const ComplexMatrix& H) {
    return detail::regularized_pinv(H, 0.0, "zf: channel matrix is rank deficient");
}

// (H^H H + I / snr)^{-1} H^H, snr linear.
inline LinearCombinerWeights mmse_weights(const ComplexMatrix& H, double snr) {
    if (!(snr > 0.0)) throw Error("mmse: snr must be > 0");
    return detail::regularized_pinv(H, 1.0 / snr, "mmse: singular system");
}

inline double sigmoid(double u) { return 1.0 / (1.0 + std::exp(-u)); }

struct BorrowedElmModel {
    RealMatrix input_weights;  // L x 2N
    RealVector biases;         // L
    RealMatrix output_weights; // L x 2K
    double gamma = 0.0;

    static constexpr int kDefaultHidden = 512;
    static constexpr double kDefaultWeightRange = 0.1;

    Eigen::Index hidden_size() const { return input_weights.rows(); }
    Eigen::Index n_users() const { return output_weights.cols() / 2; }

    RealVector hidden(const Eigen::Ref<const RealVector>& r) const {
        detail::require_dims(r.size() == input_weights.cols(), "borrowed elm: observation length mismatch");
        RealVector z = input_weights * r + biases;
        return z.unaryExpr([](double u) { return sigmoid(u); });
    }

    RealMatrix hidden_batch(const RealMatrix& R) const {
        detail::require_dims(R.cols() == input_weights.cols(), "borrowed elm: observation length mismatch");
        RealMatrix Z = R * input_weights.transpose();
        Z.rowwise() += biases.transpose();
        return Z.unaryExpr([](double u) { return sigmoid(u); });
    }

    ComplexVector equalize(const Eigen::Ref<const RealVector>& r) const {
        const RealVector out = output_weights.transpose() * hidden(r);
        const auto k = n_users();
        ComplexVector x(k);
        for (Eigen::Index i = 0; i < k; ++i) x[i] = cplx(out[i], out[k + i]);
        return x;
    }

    ComplexMatrix equalize_batch(const RealMatrix& R) const {
        const RealMatrix out = hidden_batch(R) * output_weights;
        const auto k = n_users();
        ComplexMatrix x(R.rows(), k);
        x.real() = out.leftCols(k);
        x.imag() = out.rightCols(k);
        return x;
    }
};

// Output weights for a given frozen hidden layer.
inline BorrowedElmModel train_borrowed_elm(const RealMatrix& R, const ComplexMatrix& X_train, double gamma,
                                           RealMatrix input_weights, RealVector biases) {
    detail::require_dims(R.rows() == X_train.rows(), "train: observation and symbol counts differ");
    detail::require_dims(input_weights.rows() >= 1 && biases.size() == input_weights.rows(),
                         "borrowed elm: hidden layer shape mismatch");
    BorrowedElmModel m{std::move(input_weights), std::move(biases), {}, gamma};
    m.output_weights = ridge_solve(m.hidden_batch(R), symbol_targets(X_train), gamma);
    return m;
}

// Input weights and biases i.i.d. uniform on [-weight_range, weight_range].
template <typename Rng>
BorrowedElmModel train_borrowed_elm(const RealMatrix& R, const ComplexMatrix& X_train, double gamma, int hidden,
                                    Rng& rng, double weight_range = BorrowedElmModel::kDefaultWeightRange) {
    if (hidden < 1) throw Error("borrowed elm: hidden size must be >= 1");
    std::uniform_real_distribution<double> u(-weight_range, weight_range);
    RealMatrix W(hidden, R.cols());
    for (Eigen::Index c = 0; c < W.cols(); ++c)
        for (Eigen::Index l = 0; l < W.rows(); ++l) W(l, c) = u(rng);
    RealVector b(hidden);
    for (Eigen::Index l = 0; l < b.size(); ++l) b[l] = u(rng);
    return train_borrowed_elm(R, X_train, gamma, std::move(W), std::move(b));
}

inline std::vector<int> detect_borrowed_elm(const BorrowedElmModel& m, const Eigen::Ref<const RealVector>& r,
                                            const QamConstellation& q) {
    return demap_all(m.equalize(r), q);
}

// Natural ELM whose output weights follow the channel through RLS.
struct AdaptiveElmReceiver {
    RlsState rls;

    double lambda() const { return rls.lambda; }
    ElmReceiverWeights weights() const { return ElmReceiverWeights::from_stacked(rls.beta, 0.0); }
};

inline AdaptiveElmReceiver oselm_init(const RealMatrix& R0, const ComplexMatrix& X0, double gamma, double lambda) {
    detail::require_dims(R0.rows() >= 1, "oselm: initialization needs at least one sample");
    detail::require_dims(R0.rows() == X0.rows(), "oselm: observation and symbol counts differ");
    return {rls_init(R0, symbol_targets(X0), gamma, lambda)};
}

// Per-sample RLS over the chunk in arrival order.
inline void oselm_update_in_place(AdaptiveElmReceiver& recv, const RealMatrix& R_chunk,
                                  const ComplexMatrix& X_chunk) {
    detail::require_dims(R_chunk.rows() == X_chunk.rows(), "oselm: observation and symbol counts differ");
    if (R_chunk.rows() == 0) return;
    const RealMatrix T = symbol_targets(X_chunk);
    for (Eigen::Index m = 0; m < R_chunk.rows(); ++m)
        rls_update(recv.rls, R_chunk.row(m).transpose(), T.row(m).transpose());
}

inline AdaptiveElmReceiver oselm_update(AdaptiveElmReceiver recv, const RealMatrix& R_chunk,
                                        const ComplexMatrix& X_chunk) {
    oselm_update_in_place(recv, R_chunk, X_chunk);
    return recv;
}

} // namespace mimo_elm
