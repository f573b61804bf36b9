// SPDX-License-Identifier: Apache-2.0
#include "ankf/neural/adam.hpp"

#include <cmath>

#include "ankf/errors.hpp"

namespace ankf::neural {

void Adam::step(const ParamSet& params, const std::vector<Mat>& grads) {
    if (params.size() != grads.size()) throw NumericalError("adam: grad count mismatch");
    if (m_.empty()) {
        m_.resize(params.size());
        v_.resize(params.size());
        for (size_t i = 0; i < params.size(); ++i) {
            m_[i] = Mat::Zero(params[i].value->rows(), params[i].value->cols());
            v_[i] = m_[i];
        }
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    for (size_t i = 0; i < params.size(); ++i) {
        const Mat& g = grads[i];
        if (g.size() == 0) continue;  // parameter untouched by this loss
        m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
        v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g.cwiseProduct(g);
        const double step_size = lr_ * params[i].lr_scale / bc1;
        params[i].value->array() -=
            step_size * m_[i].array() / ((v_[i].array() / bc2).sqrt() + eps_);
    }
}

}  // namespace ankf::neural
