#include "fairdgcl/objectives.hpp"

#include <iostream>

namespace fairdgcl {

double generator_loss(double l_vgae, double l_bpr_rec, double l_bpr_gen, double l_nce,
                      double alpha) {
    return l_vgae + l_bpr_rec + l_bpr_gen + alpha * l_nce;
}

double total_objective(double l_bpr_main, double l_vg, double l_vd, double beta) {
    return l_bpr_main + l_vg - beta * l_vd;
}

double info_nce(const Mat& h1, const Mat& h2, double tau, const std::vector<int>& node_batch,
                bool include_self, Mat* d_h1, Mat* d_h2, double grad_scale) {
    if (!(tau > 0.0)) throw NumericError("info_nce: tau must be positive");

    std::vector<int> ids;
    ids.reserve(node_batch.size());
    int dropped = 0;
    for (int id : node_batch) {
        if (h1.row(id).norm() < 1e-15 || h2.row(id).norm() < 1e-15) {
            ++dropped;
            continue;
        }
        ids.push_back(id);
    }
    if (dropped > 0) {
        std::cerr << "[warn] info_nce: dropped " << dropped << " zero-norm rows from the batch\n";
    }
    const int b = static_cast<int>(ids.size());
    if (b < 2) throw NumericError("info_nce: batch must contain at least 2 usable nodes");

    Mat x(b, h1.cols()), y(b, h2.cols());
    Vec nx(b), ny(b);
    for (int i = 0; i < b; ++i) {
        nx(i) = h1.row(ids[i]).norm();
        ny(i) = h2.row(ids[i]).norm();
        x.row(i) = h1.row(ids[i]) / nx(i);
        y.row(i) = h2.row(ids[i]) / ny(i);
    }

    const Mat s = (x * y.transpose()) / tau;
    Vec lse(b);
    Mat p = Mat::Zero(b, b);
    double loss = 0.0;
    for (int i = 0; i < b; ++i) {
        double mx = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < b; ++j) {
            if (!include_self && j == i) continue;
            mx = std::max(mx, s(i, j));
        }
        double denom = 0.0;
        for (int j = 0; j < b; ++j) {
            if (!include_self && j == i) continue;
            denom += std::exp(s(i, j) - mx);
        }
        lse(i) = mx + std::log(denom);
        for (int j = 0; j < b; ++j) {
            if (!include_self && j == i) continue;
            p(i, j) = std::exp(s(i, j) - lse(i));
        }
        loss += lse(i) - s(i, i);
    }
    loss /= b;

    if (d_h1 || d_h2) {
        Mat ds = p;
        for (int i = 0; i < b; ++i) ds(i, i) -= 1.0;
        ds /= static_cast<double>(b) * tau;
        const Mat dx_hat = ds * y;
        const Mat dy_hat = ds.transpose() * x;
        for (int i = 0; i < b; ++i) {
            if (d_h1) {
                const double proj = dx_hat.row(i).dot(x.row(i));
                d_h1->row(ids[i]) += grad_scale * (dx_hat.row(i) - proj * x.row(i)) / nx(i);
            }
            if (d_h2) {
                const double proj = dy_hat.row(i).dot(y.row(i));
                d_h2->row(ids[i]) += grad_scale * (dy_hat.row(i) - proj * y.row(i)) / ny(i);
            }
        }
    }
    return loss;
}

double task_bpr_for_view(const AugmentedView& view, const EncoderParams& params,
                         const std::vector<Triple>& triples) {
    const Mat h = propagate(view, params);
    return bpr_batch(h, view.graph->n_users(), triples);
}

}  // namespace fairdgcl
