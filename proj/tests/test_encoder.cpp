#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fairdgcl/encoder.hpp"
#include "fairdgcl/kernels.hpp"
#include "testutil.hpp"

using namespace fairdgcl;
using namespace fairdgcl::test;

TEST_CASE("L=0 propagation is the identity on E0") {
    Rng rng(1);
    const InteractionGraph g = toy_graph();
    EncoderParams p;
    p.n_layers = 0;
    p.e0 = random_mat(g.n_nodes(), 4, rng);
    const Mat h = propagate(g, p);
    CHECK(h == p.e0);
}

TEST_CASE("single deg-1 edge, L=1: h_u = (e_u + e_v) / 2") {
    const InteractionGraph g = build_graph({{0, 0}}, 1, 1);
    EncoderParams p;
    p.n_layers = 1;
    p.e0.resize(2, 3);
    p.e0 << 1.0, 2.0, 3.0, -4.0, 0.5, 7.0;
    const Mat h = propagate(g, p);
    // A_hat entries are 1 (deg 1 on both sides), so layer 1 swaps the rows.
    CHECK((h.row(0) - 0.5 * (p.e0.row(0) + p.e0.row(1))).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((h.row(1) - 0.5 * (p.e0.row(0) + p.e0.row(1))).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("all keep weights zero, L=1: output is E0/2") {
    Rng rng(2);
    const InteractionGraph g = toy_graph();
    EncoderParams p;
    p.n_layers = 1;
    p.e0 = random_mat(g.n_nodes(), 4, rng);
    AugmentedView view;
    view.graph = &g;
    view.keep_weights = Mat::Zero(g.n_edges(), 1);
    const Mat h = propagate(view, p);
    CHECK((h - 0.5 * p.e0).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("propagate is linear in E0") {
    Rng rng(3);
    const InteractionGraph g = toy_graph();
    EncoderParams p;
    p.n_layers = 3;
    p.e0 = random_mat(g.n_nodes(), 4, rng);
    const Mat h1 = propagate(g, p);
    EncoderParams p2 = p;
    p2.e0 *= -2.5;
    const Mat h2 = propagate(g, p2);
    CHECK((h2 + 2.5 * h1).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("plain graph equals an all-ones view") {
    Rng rng(4);
    const InteractionGraph g = toy_graph();
    EncoderParams p;
    p.n_layers = 2;
    p.e0 = random_mat(g.n_nodes(), 4, rng);
    AugmentedView view;
    view.graph = &g;
    view.keep_weights = Mat::Ones(g.n_edges(), 2);
    const Mat h_plain = propagate(g, p);
    const Mat h_view = propagate(view, p);
    CHECK((h_plain - h_view).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("score examples") {
    Mat h(2, 2);
    h << 1.0, 0.0, 1.0, 0.0;
    CHECK(score(h, 1, 0, 0) == doctest::Approx(1.0));
    h << 1.0, 0.0, 0.0, 1.0;
    CHECK(score(h, 1, 0, 0) == doctest::Approx(0.0));
    h << 1.0, 2.0, 3.0, -1.0;
    CHECK(score(h, 1, 0, 0) == doctest::Approx(1.0));  // (1,2).(3,-1)
}

TEST_CASE("bpr_loss values and limits") {
    CHECK(bpr_loss(0.3, 0.3) == doctest::Approx(std::log(2.0)).epsilon(1e-9));
    // -ln sigmoid(2)
    CHECK(bpr_loss(2.0, 0.0) == doctest::Approx(0.126928011).epsilon(1e-6));
    CHECK(bpr_loss(1e6, 0.0) == doctest::Approx(0.0));
    CHECK(std::isfinite(bpr_loss(-1e6, 0.0)));  // clamped, no -inf
}

TEST_CASE("bpr_loss is monotone and matches finite differences") {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const double a = rng.normal() * 3, b = rng.normal() * 3;
        CHECK(bpr_loss(a + 0.1, b) < bpr_loss(a, b));
        const double fd_pos = central_diff([&](double x) { return bpr_loss(x, b); }, a);
        const double fd_neg = central_diff([&](double x) { return bpr_loss(a, x); }, b);
        CHECK(rel_err(bpr_grad_pos(a, b), fd_pos) < 1e-5);
        CHECK(rel_err(-bpr_grad_pos(a, b), fd_neg) < 1e-5);
    }
}

TEST_CASE("propagate_backward matches finite differences, including keep weights") {
    Rng rng(6);
    const InteractionGraph g = toy_graph();
    EncoderParams p;
    p.n_layers = 2;
    p.e0 = random_mat(g.n_nodes(), 3, rng);
    AugmentedView view;
    view.graph = &g;
    view.keep_weights.resize(g.n_edges(), 2);
    for (int e = 0; e < g.n_edges(); ++e)
        for (int l = 0; l < 2; ++l) view.keep_weights(e, l) = 0.2 + 0.6 * rng.uniform();
    const Mat target = random_mat(g.n_nodes(), 3, rng);

    // Loss = sum(target .* propagate(view))
    auto loss = [&]() {
        const LayerStack s = propagate_layers(g, &view, p);
        return target.cwiseProduct(s.mean).sum();
    };
    const LayerStack stack = propagate_layers(g, &view, p);
    Mat d_keep = Mat::Zero(g.n_edges(), 2);
    const Mat de0 = propagate_backward(g, &view, stack, target, nullptr, &d_keep);

    for (int i = 0; i < p.e0.rows(); ++i) {
        for (int j = 0; j < p.e0.cols(); ++j) {
            const double fd = central_diff(
                [&](double v) {
                    const double save = p.e0(i, j);
                    p.e0(i, j) = v;
                    const double out = loss();
                    p.e0(i, j) = save;
                    return out;
                },
                p.e0(i, j));
            CHECK(rel_err(de0(i, j), fd) < 1e-6);
        }
    }
    for (int e = 0; e < g.n_edges(); ++e) {
        for (int l = 0; l < 2; ++l) {
            const double fd = central_diff(
                [&](double v) {
                    const double save = view.keep_weights(e, l);
                    view.keep_weights(e, l) = v;
                    const double out = loss();
                    view.keep_weights(e, l) = save;
                    return out;
                },
                view.keep_weights(e, l));
            CHECK(rel_err(d_keep(e, l), fd) < 1e-6);
        }
    }
}

TEST_CASE("dimension mismatch is an error") {
    Rng rng(7);
    const InteractionGraph g = toy_graph();
    EncoderParams p;
    p.n_layers = 1;
    p.e0 = random_mat(g.n_nodes() + 1, 3, rng);
    CHECK_THROWS_AS(propagate(g, p), NumericError);
}
