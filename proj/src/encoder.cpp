#include "fairdgcl/encoder.hpp"

#include "fairdgcl/kernels.hpp"

namespace fairdgcl {

EncoderParams init_encoder(int n_nodes, int dim, int n_layers, Rng& rng) {
    EncoderParams p;
    p.n_layers = n_layers;
    p.e0.resize(n_nodes, dim);
    for (int i = 0; i < n_nodes; ++i)
        for (int j = 0; j < dim; ++j) p.e0(i, j) = 0.1 * rng.normal();
    return p;
}

namespace {
// Per-layer keep column, handling the single-column broadcast.
const double* keep_col(const AugmentedView* view, std::vector<double>& buf, int layer) {
    if (!view) return nullptr;
    const Mat& k = view->keep_weights;
    const int col = k.cols() == 1 ? 0 : layer;
    buf.resize(k.rows());
    for (int e = 0; e < k.rows(); ++e) buf[e] = k(e, col);
    return buf.data();
}
}  // namespace

LayerStack propagate_layers(const InteractionGraph& g, const AugmentedView* view,
                            const EncoderParams& params) {
    if (params.e0.rows() != g.n_nodes()) {
        throw NumericError("propagate: embedding table has " + std::to_string(params.e0.rows()) +
                           " rows but the graph has " + std::to_string(g.n_nodes()) + " nodes");
    }
    if (view && view->keep_weights.rows() != g.n_edges()) {
        throw NumericError("propagate: view keep-weight count does not match the edge set");
    }
    LayerStack stack;
    stack.layers.reserve(params.n_layers + 1);
    stack.layers.push_back(params.e0);
    std::vector<double> buf;
    for (int l = 0; l < params.n_layers; ++l) {
        Mat next;
        kernels::spmm(g, keep_col(view, buf, l), stack.layers.back(), next);
        stack.layers.push_back(std::move(next));
    }
    stack.mean = Mat::Zero(params.e0.rows(), params.e0.cols());
    for (const Mat& layer : stack.layers) stack.mean += layer;
    stack.mean /= static_cast<double>(stack.layers.size());
    return stack;
}

Mat propagate(const InteractionGraph& g, const EncoderParams& params) {
    return propagate_layers(g, nullptr, params).mean;
}

Mat propagate(const AugmentedView& view, const EncoderParams& params) {
    return propagate_layers(*view.graph, &view, params).mean;
}

Mat propagate_backward(const InteractionGraph& g, const AugmentedView* view,
                       const LayerStack& stack, const Mat& d_mean,
                       const std::vector<Mat>* extra_ds, Mat* d_keep) {
    const int n_layers = stack.n_layers();
    const double inv = 1.0 / (n_layers + 1);
    // grad holds d(loss)/d(h^(l)) while walking levels L..0.
    Mat grad = d_mean * inv;
    if (extra_ds && (*extra_ds)[n_layers].size() != 0) grad += (*extra_ds)[n_layers];
    std::vector<double> buf;
    std::vector<double> edge_grads;
    for (int l = n_layers - 1; l >= 0; --l) {
        if (d_keep && view) {
            edge_grads.assign(g.n_edges(), 0.0);
            kernels::edge_keep_grad(g, grad, stack.layers[l], edge_grads.data());
            const int col = view->keep_weights.cols() == 1 ? 0 : l;
            for (int e = 0; e < g.n_edges(); ++e) (*d_keep)(e, col) += edge_grads[e];
        }
        Mat lower;
        kernels::spmm(g, keep_col(view, buf, l), grad, lower);  // A_hat is symmetric
        grad = std::move(lower);
        grad += d_mean * inv;
        if (extra_ds && (*extra_ds)[l].size() != 0) grad += (*extra_ds)[l];
    }
    return grad;
}

double score(const Mat& h, int n_users, int user, int item) {
    return h.row(user).dot(h.row(n_users + item));
}

double bpr_loss(double y_pos, double y_neg) {
    return softplus(y_neg - y_pos);
}

double bpr_grad_pos(double y_pos, double y_neg) {
    // d/dy_pos of softplus(y_neg - y_pos) = -sigmoid(y_neg - y_pos)
    return -sigmoid(y_neg - y_pos);
}

double bpr_batch(const Mat& h, int n_users, const std::vector<Triple>& triples,
                 Mat* dh, double loss_scale) {
    if (triples.empty()) return 0.0;
    const int n = static_cast<int>(triples.size());
    std::vector<double> coef(n);
    std::vector<double> term(n);
    // Per-triple terms are independent; the summation and the scatter below
    // stay serial so accumulation order does not depend on thread count.
#pragma omp parallel for schedule(static) if (kernels::parallel_enabled())
    for (int i = 0; i < n; ++i) {
        const auto& t = triples[i];
        const double y_pos = h.row(t.user).dot(h.row(n_users + t.pos_item));
        const double y_neg = h.row(t.user).dot(h.row(n_users + t.neg_item));
        term[i] = bpr_loss(y_pos, y_neg);
        coef[i] = bpr_grad_pos(y_pos, y_neg);
    }
    double loss = 0.0;
    for (int i = 0; i < n; ++i) loss += term[i];
    loss /= n;
    if (dh) {
        const double s = loss_scale / n;
        for (int i = 0; i < n; ++i) {
            const auto& t = triples[i];
            const double c = s * coef[i];
            dh->row(t.user) += c * (h.row(n_users + t.pos_item) - h.row(n_users + t.neg_item));
            dh->row(n_users + t.pos_item) += c * h.row(t.user);
            dh->row(n_users + t.neg_item) -= c * h.row(t.user);
        }
    }
    return loss;
}

}  // namespace fairdgcl
