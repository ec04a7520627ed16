#include "fairdgcl/view_generative.hpp"

#include "fairdgcl/kernels.hpp"

namespace fairdgcl {

VgaeParams init_vgae(int dim, int hidden, int latent_dim, Rng& rng) {
    VgaeParams p;
    auto xavier = [&rng](int in, int out) {
        Mat w(in, out);
        const double bound = std::sqrt(6.0 / (in + out));
        for (int r = 0; r < in; ++r)
            for (int c = 0; c < out; ++c) w(r, c) = rng.uniform_open(-bound, bound);
        return w;
    };
    p.w_in = xavier(dim, hidden);
    p.w_mu = xavier(hidden, latent_dim);
    p.w_logvar = xavier(hidden, latent_dim);
    p.decoder = make_mlp({latent_dim, latent_dim}, {Act::tanh_}, rng);
    return p;
}

std::pair<Mat, Mat> vgae_encode(const Mat& x, const InteractionGraph& graph,
                                const VgaeParams& params, VgaeEncodeCache* cache) {
    if (x.rows() != graph.n_nodes()) {
        throw NumericError("vgae_encode: feature row count does not match the node count");
    }
    VgaeEncodeCache local;
    VgaeEncodeCache& c = cache ? *cache : local;
    kernels::spmm(graph, nullptr, x, c.t0);
    c.hidden = (c.t0 * params.w_in).cwiseMax(0.0);
    kernels::spmm(graph, nullptr, c.hidden, c.t1);
    return {c.t1 * params.w_mu, c.t1 * params.w_logvar};
}

Mat reparameterize(const Mat& mu, const Mat& logvar, const Mat& noise) {
    if (mu.rows() != logvar.rows() || mu.rows() != noise.rows() || mu.cols() != logvar.cols() ||
        mu.cols() != noise.cols()) {
        throw NumericError("reparameterize: shape mismatch");
    }
    return mu + ((logvar * 0.5).array().exp() * noise.array()).matrix();
}

std::vector<double> vgae_decode(const Mat& z, const std::vector<std::pair<int, int>>& pairs,
                                const VgaeParams& params) {
    const Mat q = mlp_forward(params.decoder, z);
    std::vector<double> probs(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        probs[i] = sigmoid(q.row(pairs[i].first).dot(q.row(pairs[i].second)));
    }
    return probs;
}

double kl_term(const Mat& mu, const Mat& logvar) {
    const double total =
        -0.5 * (1.0 + logvar.array() - mu.array().square() - logvar.array().exp()).sum();
    return total / static_cast<double>(mu.rows());
}

namespace {
constexpr double kProbFloor = 1e-12;

double bce_term(const std::vector<double>& pos, const std::vector<double>& neg) {
    double sum = 0.0;
    for (double p : pos) sum -= std::log(std::max(p, kProbFloor));
    for (double p : neg) sum -= std::log(std::max(1.0 - p, kProbFloor));
    return sum / static_cast<double>(pos.size() + neg.size());
}
}  // namespace

double elbo_loss(const InteractionGraph& graph, const Mat& mu, const Mat& logvar, const Mat& z,
                 const VgaeParams& params, const std::vector<std::pair<int, int>>& neg_pairs) {
    std::vector<std::pair<int, int>> pos;
    pos.reserve(graph.n_edges());
    for (const Edge& e : graph.edges()) pos.emplace_back(e.user, graph.item_node(e.item));
    const auto pos_probs = vgae_decode(z, pos, params);
    const auto neg_probs = vgae_decode(z, neg_pairs, params);
    return bce_term(pos_probs, neg_probs) + kl_term(mu, logvar);
}

GenerativeForward generate_view_g2(const InteractionGraph& graph, const Mat& x,
                                   const VgaeParams& params, Rng& rng, int neg_per_pos) {
    GenerativeForward fwd;
    auto [mu, logvar] = vgae_encode(x, graph, params, &fwd.enc);
    fwd.mu = std::move(mu);
    fwd.logvar = std::move(logvar);
    fwd.noise.resize(fwd.mu.rows(), fwd.mu.cols());
    for (int i = 0; i < fwd.noise.rows(); ++i)
        for (int j = 0; j < fwd.noise.cols(); ++j) fwd.noise(i, j) = rng.normal();
    fwd.z = reparameterize(fwd.mu, fwd.logvar, fwd.noise);
    fwd.q = mlp_forward(params.decoder, fwd.z, &fwd.dec_cache);

    const int n_edges = graph.n_edges();
    const int n_items = graph.n_items();
    fwd.pos_probs.resize(n_edges);
    for (int e = 0; e < n_edges; ++e) {
        const Edge& edge = graph.edges()[e];
        fwd.pos_probs[e] =
            sigmoid(fwd.q.row(edge.user).dot(fwd.q.row(graph.item_node(edge.item))));
    }

    // One (or k) uniformly sampled non-edges per observed edge, sharing the
    // edge's user. A user connected to every item cannot avoid positives.
    fwd.neg_pairs.reserve(static_cast<std::size_t>(n_edges) * neg_per_pos);
    for (int e = 0; e < n_edges; ++e) {
        const int u = graph.edges()[e].user;
        for (int k = 0; k < neg_per_pos; ++k) {
            int item = static_cast<int>(rng.below(n_items));
            if (graph.degree(u) < n_items) {
                while (graph.has_edge(u, item)) item = static_cast<int>(rng.below(n_items));
            }
            fwd.neg_pairs.emplace_back(u, graph.item_node(item));
        }
    }
    fwd.neg_probs.resize(fwd.neg_pairs.size());
    for (std::size_t i = 0; i < fwd.neg_pairs.size(); ++i) {
        fwd.neg_probs[i] =
            sigmoid(fwd.q.row(fwd.neg_pairs[i].first).dot(fwd.q.row(fwd.neg_pairs[i].second)));
    }

    fwd.loss_vgae = bce_term(fwd.pos_probs, fwd.neg_probs) + kl_term(fwd.mu, fwd.logvar);

    fwd.view.graph = &graph;
    fwd.view.source = AugmentedView::Source::generative;
    fwd.view.keep_weights.resize(n_edges, 1);
    for (int e = 0; e < n_edges; ++e) fwd.view.keep_weights(e, 0) = fwd.pos_probs[e];
    return fwd;
}

VgaeGrads make_zero_vgae_grads(const VgaeParams& params) {
    VgaeGrads g;
    g.w_in = Mat::Zero(params.w_in.rows(), params.w_in.cols());
    g.w_mu = Mat::Zero(params.w_mu.rows(), params.w_mu.cols());
    g.w_logvar = Mat::Zero(params.w_logvar.rows(), params.w_logvar.cols());
    g.decoder = make_zero_grads(params.decoder);
    return g;
}

Mat g2_backward(const InteractionGraph& graph, const GenerativeForward& fwd,
                const VgaeParams& params, const Mat& d_keep_total, double elbo_scale,
                VgaeGrads& grads) {
    const int n_edges = graph.n_edges();
    const double m = static_cast<double>(fwd.pos_probs.size() + fwd.neg_probs.size());
    Mat dq = Mat::Zero(fwd.q.rows(), fwd.q.cols());

    // Inner-product score gradients from the keep-weight path and the BCE.
    for (int e = 0; e < n_edges; ++e) {
        const Edge& edge = graph.edges()[e];
        const int a = edge.user;
        const int b = graph.item_node(edge.item);
        const double p = fwd.pos_probs[e];
        double ds = 0.0;
        if (d_keep_total.size() != 0) ds += d_keep_total(e, 0) * p * (1.0 - p);
        if (elbo_scale != 0.0) ds -= elbo_scale * (1.0 - p) / m;
        if (ds != 0.0) {
            dq.row(a) += ds * fwd.q.row(b);
            dq.row(b) += ds * fwd.q.row(a);
        }
    }
    if (elbo_scale != 0.0) {
        for (std::size_t i = 0; i < fwd.neg_pairs.size(); ++i) {
            const auto [a, b] = fwd.neg_pairs[i];
            const double ds = elbo_scale * fwd.neg_probs[i] / m;
            dq.row(a) += ds * fwd.q.row(b);
            dq.row(b) += ds * fwd.q.row(a);
        }
    }

    Mat dz = mlp_backward(params.decoder, fwd.dec_cache, dq, grads.decoder);

    Mat dmu = dz;
    Mat dlogvar =
        (dz.array() * fwd.noise.array() * (fwd.logvar * 0.5).array().exp() * 0.5).matrix();
    if (elbo_scale != 0.0) {
        const double inv_n = elbo_scale / static_cast<double>(fwd.mu.rows());
        dmu += inv_n * fwd.mu;
        dlogvar.array() += inv_n * 0.5 * (fwd.logvar.array().exp() - 1.0);
    }

    grads.w_mu.noalias() += fwd.enc.t1.transpose() * dmu;
    grads.w_logvar.noalias() += fwd.enc.t1.transpose() * dlogvar;
    Mat dt1 = dmu * params.w_mu.transpose() + dlogvar * params.w_logvar.transpose();

    Mat dhidden;
    kernels::spmm(graph, nullptr, dt1, dhidden);  // A_hat is symmetric
    const Mat dpre =
        (fwd.enc.hidden.array() > 0.0).cast<double>().matrix().cwiseProduct(dhidden);
    grads.w_in.noalias() += fwd.enc.t0.transpose() * dpre;
    const Mat dt0 = dpre * params.w_in.transpose();
    Mat dx;
    kernels::spmm(graph, nullptr, dt0, dx);
    return dx;
}

}  // namespace fairdgcl
