#include "fairdgcl/view_recognition.hpp"

#include "fairdgcl/kernels.hpp"

namespace fairdgcl {

EdgeScorerParams init_edge_scorer(int dim, int hidden, Rng& rng) {
    return EdgeScorerParams{make_mlp({2 * dim, hidden, 1}, {Act::tanh_, Act::identity}, rng)};
}

double edge_weight(const Vec& h_u, const Vec& h_v, const EdgeScorerParams& params) {
    Mat x(1, h_u.size() + h_v.size());
    x.row(0).segment(0, h_u.size()) = h_u.transpose();
    x.row(0).segment(h_u.size(), h_v.size()) = h_v.transpose();
    return mlp_forward(params.mlp, x)(0, 0);
}

double gumbel_keep_prob(double w, double eta, double tau_r) {
    if (!(eta > 0.0 && eta < 1.0)) {
        throw NumericError("gumbel_keep_prob: eta must lie strictly inside (0,1), got " +
                           std::to_string(eta));
    }
    if (!(tau_r > 0.0)) {
        throw NumericError("gumbel_keep_prob: tau_r must be positive");
    }
    return sigmoid((logit(eta) + w) / tau_r);
}

RecognitionForward generate_view_g1(const InteractionGraph& graph, const LayerStack& stack,
                                    const EdgeScorerParams& params, double tau_r, Rng& rng,
                                    std::optional<double> fixed_eta) {
    const int n_edges = graph.n_edges();
    const int n_layers = stack.n_layers();
    RecognitionForward fwd;
    fwd.tau_r = tau_r;
    fwd.w.resize(n_edges, n_layers);
    fwd.eta.resize(n_edges, n_layers);
    fwd.caches.resize(n_layers);
    fwd.view.graph = &graph;
    fwd.view.source = AugmentedView::Source::recognition;
    fwd.view.keep_weights.resize(n_edges, n_layers);

    // Eta draws happen in a fixed (layer-major, edge-minor) order so a seeded
    // rng reproduces the view exactly.
    for (int l = 0; l < n_layers; ++l) {
        for (int e = 0; e < n_edges; ++e) {
            fwd.eta(e, l) = fixed_eta ? *fixed_eta : rng.uniform_open(0.0, 1.0);
        }
    }
    Mat inputs;
    for (int l = 0; l < n_layers; ++l) {
        kernels::gather_pair_inputs(graph, stack.layers[l], inputs);
        const Mat out = mlp_forward(params.mlp, inputs, &fwd.caches[l]);
        for (int e = 0; e < n_edges; ++e) {
            fwd.w(e, l) = out(e, 0);
            fwd.view.keep_weights(e, l) = gumbel_keep_prob(fwd.w(e, l), fwd.eta(e, l), tau_r);
        }
    }
    return fwd;
}

void g1_backward(const InteractionGraph& graph, const RecognitionForward& fwd,
                 const EdgeScorerParams& params, const Mat& d_keep, MlpGrads& grads,
                 std::vector<Mat>& extra_ds) {
    const int n_edges = graph.n_edges();
    const int n_layers = static_cast<int>(fwd.caches.size());
    for (int l = 0; l < n_layers; ++l) {
        Mat dw(n_edges, 1);
        for (int e = 0; e < n_edges; ++e) {
            const double p = fwd.view.keep_weights(e, l);
            dw(e, 0) = d_keep(e, l) * p * (1.0 - p) / fwd.tau_r;
        }
        const Mat dx = mlp_backward(params.mlp, fwd.caches[l], dw, grads);
        if (extra_ds[l].size() == 0) {
            extra_ds[l] = Mat::Zero(graph.n_nodes(), dx.cols() / 2);
        }
        kernels::scatter_pair_input_grad(graph, dx, extra_ds[l]);
    }
}

}  // namespace fairdgcl
