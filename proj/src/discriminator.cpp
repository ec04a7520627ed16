#include "fairdgcl/discriminator.hpp"

#include <algorithm>
#include <numeric>

namespace fairdgcl {

namespace {
constexpr double kClampLo = 1e-7;
constexpr double kClampHi = 1.0 - 1e-7;

void check_lengths(const Vec& s_tilde, const std::vector<int>& s) {
    if (s_tilde.size() != static_cast<Eigen::Index>(s.size())) {
        throw NumericError("vd_loss: " + std::to_string(s_tilde.size()) + " predictions vs " +
                           std::to_string(s.size()) + " labels");
    }
}
}  // namespace

DiscriminatorParams init_discriminator(int dim, int hidden, Rng& rng) {
    return DiscriminatorParams{
        make_mlp({dim, hidden, hidden, 1}, {Act::relu, Act::relu, Act::identity}, rng)};
}

Mat fuse_user_embeddings(const Mat& h1, const Mat& h2, int n_users) {
    if (h1.rows() != h2.rows() || h1.cols() != h2.cols()) {
        throw NumericError("fuse_user_embeddings: shape mismatch");
    }
    return 0.5 * (h1.topRows(n_users) + h2.topRows(n_users));
}

Vec predict_attribute(const Mat& fused, const DiscriminatorParams& params, MlpCache* cache) {
    const Mat logits = mlp_forward(params.mlp, fused, cache);
    Vec out(fused.rows());
    for (int i = 0; i < fused.rows(); ++i) out(i) = sigmoid(logits(i, 0));
    return out;
}

double vd_loss(const Vec& s_tilde, const std::vector<int>& s) {
    check_lengths(s_tilde, s);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < s_tilde.size(); ++i) {
        const double p = std::clamp(s_tilde(i), kClampLo, kClampHi);
        sum -= s[i] == 1 ? std::log(p) : std::log(1.0 - p);
    }
    return sum / static_cast<double>(s.size());
}

Vec vd_loss_grad(const Vec& s_tilde, const std::vector<int>& s) {
    check_lengths(s_tilde, s);
    Vec g(s_tilde.size());
    const double inv = 1.0 / static_cast<double>(s.size());
    for (Eigen::Index i = 0; i < s_tilde.size(); ++i) {
        const double p = std::clamp(s_tilde(i), kClampLo, kClampHi);
        g(i) = (p - s[i]) / (p * (1.0 - p)) * inv;
    }
    return g;
}

Vec vd_loss_grad_logits(const Vec& s_tilde, const std::vector<int>& s) {
    check_lengths(s_tilde, s);
    Vec g(s_tilde.size());
    const double inv = 1.0 / static_cast<double>(s.size());
    for (Eigen::Index i = 0; i < s_tilde.size(); ++i) g(i) = (s_tilde(i) - s[i]) * inv;
    return g;
}

double attribute_accuracy(const Vec& s_tilde, const std::vector<int>& s) {
    check_lengths(s_tilde, s);
    int correct = 0;
    for (Eigen::Index i = 0; i < s_tilde.size(); ++i) {
        correct += (s_tilde(i) >= 0.5 ? 1 : 0) == s[i];
    }
    return static_cast<double>(correct) / static_cast<double>(s.size());
}

double attribute_auc(const Vec& s_tilde, const std::vector<int>& s) {
    check_lengths(s_tilde, s);
    const int n = static_cast<int>(s.size());
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](int a, int b) { return s_tilde(a) < s_tilde(b); });
    // Average ranks over tied scores.
    std::vector<double> rank(n);
    int i = 0;
    while (i < n) {
        int j = i;
        while (j + 1 < n && s_tilde(idx[j + 1]) == s_tilde(idx[i])) ++j;
        const double avg = 0.5 * (i + j) + 1.0;
        for (int k = i; k <= j; ++k) rank[idx[k]] = avg;
        i = j + 1;
    }
    double pos_rank_sum = 0.0;
    long n_pos = 0;
    for (int u = 0; u < n; ++u) {
        if (s[u] == 1) {
            pos_rank_sum += rank[u];
            ++n_pos;
        }
    }
    const long n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) return 0.5;
    return (pos_rank_sum - 0.5 * n_pos * (n_pos + 1)) / (static_cast<double>(n_pos) * n_neg);
}

}  // namespace fairdgcl
