#include "fairdgcl/mlp.hpp"

namespace fairdgcl {

namespace {
Mat apply_act(Act act, const Mat& x) {
    switch (act) {
        case Act::identity: return x;
        case Act::relu: return x.cwiseMax(0.0);
        case Act::tanh_: return x.array().tanh().matrix();
    }
    return x;
}

Mat act_grad(Act act, const Mat& pre, const Mat& post, const Mat& dy) {
    switch (act) {
        case Act::identity: return dy;
        case Act::relu: return (pre.array() > 0.0).cast<double>().matrix().cwiseProduct(dy);
        case Act::tanh_: return (1.0 - post.array().square()).matrix().cwiseProduct(dy);
    }
    return dy;
}
}  // namespace

Mlp make_mlp(const std::vector<int>& dims, const std::vector<Act>& acts, Rng& rng) {
    Mlp mlp;
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
        Mlp::Layer layer;
        const int in = dims[i], out = dims[i + 1];
        const double bound = std::sqrt(6.0 / (in + out));
        layer.w.resize(in, out);
        for (int r = 0; r < in; ++r)
            for (int c = 0; c < out; ++c) layer.w(r, c) = rng.uniform_open(-bound, bound);
        layer.b = Mat::Zero(1, out);
        layer.act = acts[i];
        mlp.layers.push_back(std::move(layer));
    }
    return mlp;
}

MlpGrads make_zero_grads(const Mlp& mlp) {
    MlpGrads g;
    for (const auto& layer : mlp.layers) {
        g.w.push_back(Mat::Zero(layer.w.rows(), layer.w.cols()));
        g.b.push_back(Mat::Zero(1, layer.b.cols()));
    }
    return g;
}

Mat mlp_forward(const Mlp& mlp, const Mat& x, MlpCache* cache) {
    if (x.cols() != mlp.in_dim()) {
        throw NumericError("mlp input dimension mismatch: got " + std::to_string(x.cols()) +
                           ", want " + std::to_string(mlp.in_dim()));
    }
    Mat cur = x;
    if (cache) {
        cache->input = x;
        cache->pre.clear();
        cache->post.clear();
    }
    for (const auto& layer : mlp.layers) {
        Mat pre = cur * layer.w;
        pre.rowwise() += layer.b.row(0);
        Mat post = apply_act(layer.act, pre);
        if (cache) {
            cache->pre.push_back(pre);
            cache->post.push_back(post);
        }
        cur = std::move(post);
    }
    return cur;
}

Mat mlp_backward(const Mlp& mlp, const MlpCache& cache, const Mat& dy, MlpGrads& grads) {
    Mat delta = dy;
    for (int i = static_cast<int>(mlp.layers.size()) - 1; i >= 0; --i) {
        const auto& layer = mlp.layers[i];
        delta = act_grad(layer.act, cache.pre[i], cache.post[i], delta);
        const Mat& in = i == 0 ? cache.input : cache.post[i - 1];
        grads.w[i].noalias() += in.transpose() * delta;
        grads.b[i].row(0) += delta.colwise().sum();
        if (i > 0) {
            delta = delta * layer.w.transpose();
        } else {
            return delta * layer.w.transpose();
        }
    }
    return Mat();
}

std::vector<Mat*> mlp_params(Mlp& mlp) {
    std::vector<Mat*> out;
    for (auto& layer : mlp.layers) {
        out.push_back(&layer.w);
        out.push_back(&layer.b);
    }
    return out;
}

std::vector<const Mat*> mlp_params(const Mlp& mlp) {
    std::vector<const Mat*> out;
    for (const auto& layer : mlp.layers) {
        out.push_back(&layer.w);
        out.push_back(&layer.b);
    }
    return out;
}

std::vector<Mat*> mlp_grad_views(MlpGrads& grads) {
    std::vector<Mat*> out;
    for (std::size_t i = 0; i < grads.w.size(); ++i) {
        out.push_back(&grads.w[i]);
        out.push_back(&grads.b[i]);
    }
    return out;
}

}  // namespace fairdgcl
