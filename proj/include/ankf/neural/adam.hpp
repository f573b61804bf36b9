// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ankf/neural/layers.hpp"

namespace ankf::neural {

// Bias-corrected adaptive-moment optimizer. Moment buffers are allocated on
// first use and indexed by parameter position, so one instance must always
// step the same ParamSet.
class Adam {
public:
    explicit Adam(double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999,
                  double eps = 1e-8)
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void step(const ParamSet& params, const std::vector<Mat>& grads);

    int steps() const { return t_; }
    double lr() const { return lr_; }

private:
    double lr_, beta1_, beta2_, eps_;
    int t_ = 0;
    std::vector<Mat> m_, v_;
};

}  // namespace ankf::neural
