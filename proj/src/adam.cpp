#include "fairdgcl/adam.hpp"

namespace fairdgcl {

double global_grad_norm(const std::vector<Mat*>& grads) {
    double sq = 0.0;
    for (const Mat* g : grads) sq += g->squaredNorm();
    return std::sqrt(sq);
}

void Adam::step(const std::vector<Mat*>& params, const std::vector<Mat*>& grads,
                double clip_norm) {
    if (m_.empty()) {
        for (const Mat* p : params) {
            m_.push_back(Mat::Zero(p->rows(), p->cols()));
            v_.push_back(Mat::Zero(p->rows(), p->cols()));
        }
    }
    double scale = 1.0;
    if (clip_norm > 0.0) {
        const double norm = global_grad_norm(grads);
        if (norm > clip_norm) scale = clip_norm / norm;
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const Mat g = *grads[i] * scale;
        m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
        v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g.cwiseProduct(g);
        const Mat m_hat = m_[i] / bc1;
        const Mat v_hat = v_[i] / bc2;
        params[i]->array() -= lr_ * m_hat.array() / (v_hat.array().sqrt() + eps_);
    }
}

}  // namespace fairdgcl
