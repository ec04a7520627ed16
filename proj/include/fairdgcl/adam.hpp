#pragma once

#include "fairdgcl/common.hpp"

#include <vector>

namespace fairdgcl {

/// Adam over a fixed list of parameter matrices. One instance per parameter
/// set (encoder, generators, discriminator) so the min and max phases of the
/// adversarial loop keep independent moment estimates.
class Adam {
public:
    Adam() = default;
    explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    /// Clips the combined gradient to `clip_norm` (<=0 disables), then applies
    /// one Adam update. Parameter and gradient lists must be parallel.
    void step(const std::vector<Mat*>& params, const std::vector<Mat*>& grads,
              double clip_norm);

    long step_count() const { return t_; }
    double learning_rate() const { return lr_; }

    // Checkpoint access: first and second moments plus the step counter.
    std::vector<Mat>& moments_m() { return m_; }
    std::vector<Mat>& moments_v() { return v_; }
    const std::vector<Mat>& moments_m() const { return m_; }
    const std::vector<Mat>& moments_v() const { return v_; }
    void set_step_count(long t) { t_ = t; }

private:
    double lr_ = 1e-3;
    double beta1_ = 0.9;
    double beta2_ = 0.999;
    double eps_ = 1e-8;
    long t_ = 0;
    std::vector<Mat> m_;
    std::vector<Mat> v_;
};

/// Global L2 norm over a gradient list.
double global_grad_norm(const std::vector<Mat*>& grads);

}  // namespace fairdgcl
