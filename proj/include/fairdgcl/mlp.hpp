#pragma once

#include "fairdgcl/common.hpp"
#include "fairdgcl/rng.hpp"

#include <string>
#include <vector>

namespace fairdgcl {

enum class Act { identity, relu, tanh_ };

/// Dense feed-forward network on row batches. Biases are stored as 1 x n
/// matrices so every parameter is a Mat (uniform handling in the optimizer
/// and the checkpoint writer).
struct Mlp {
    struct Layer {
        Mat w;  // in x out
        Mat b;  // 1 x out
        Act act = Act::identity;
    };
    std::vector<Layer> layers;

    int in_dim() const { return static_cast<int>(layers.front().w.rows()); }
    int out_dim() const { return static_cast<int>(layers.back().w.cols()); }
};

/// Xavier-uniform weights, zero biases. `acts` has one entry per layer.
Mlp make_mlp(const std::vector<int>& dims, const std::vector<Act>& acts, Rng& rng);

/// Forward activations kept for the backward pass.
struct MlpCache {
    Mat input;
    std::vector<Mat> pre;   // pre-activation per layer
    std::vector<Mat> post;  // post-activation per layer
};

struct MlpGrads {
    std::vector<Mat> w;
    std::vector<Mat> b;
};

MlpGrads make_zero_grads(const Mlp& mlp);

Mat mlp_forward(const Mlp& mlp, const Mat& x, MlpCache* cache = nullptr);

/// Accumulates parameter gradients into `grads` and returns d(loss)/d(input).
Mat mlp_backward(const Mlp& mlp, const MlpCache& cache, const Mat& dy, MlpGrads& grads);

/// Named views over the parameters, e.g. for Adam and serialization.
std::vector<Mat*> mlp_params(Mlp& mlp);
std::vector<const Mat*> mlp_params(const Mlp& mlp);
std::vector<Mat*> mlp_grad_views(MlpGrads& grads);

}  // namespace fairdgcl
