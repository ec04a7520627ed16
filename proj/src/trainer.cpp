#include "fairdgcl/trainer.hpp"

#include "fairdgcl/kernels.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cstring>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

namespace fairdgcl {

void TrainConfig::validate() const {
    auto require = [](bool ok, const std::string& what) {
        if (!ok) throw UsageError("invalid config: " + what);
    };
    require(model == "fairdgcl" || model == "lightgcn" || model == "randomdrop",
            "model must be fairdgcl, lightgcn, or randomdrop");
    require(learning_rate > 0.0, "learning_rate must be positive");
    require(dim > 0, "dim must be positive");
    require(n_layers >= 0, "layers must be >= 0");
    require(epochs >= 0, "epochs must be >= 0");
    require(batch_size > 0, "batch must be positive");
    require(alpha >= 0.0 && beta >= 0.0, "alpha and beta must be nonnegative");
    require(tau > 0.0 && tau_r > 0.0, "tau and tau_r must be positive");
    require(!eval_ks.empty(), "ks must be nonempty");
    for (std::size_t i = 0; i < eval_ks.size(); ++i) {
        require(eval_ks[i] > 0, "ks must be positive");
        if (i > 0) require(eval_ks[i - 1] < eval_ks[i], "ks must be sorted ascending");
    }
    require(scorer_hidden > 0 && disc_hidden > 0 && vgae_hidden > 0 && latent_dim > 0,
            "hidden sizes must be positive");
    require(nce_batch >= 2, "nce_batch must be >= 2");
    if (fixed_eta) require(*fixed_eta > 0.0 && *fixed_eta < 1.0, "fixed_eta must be in (0,1)");
    require(drop_rate >= 0.0 && drop_rate < 1.0, "drop_rate must be in [0,1)");
    require(patience >= 0, "patience must be >= 0");
    require(elbo_neg_per_pos >= 1, "elbo_neg_per_pos must be >= 1");
    require(min_max_ratio >= 1, "min_max_ratio must be >= 1");
    require(weight_decay >= 0.0, "weight_decay must be >= 0");
}

std::string TrainConfig::canonical() const {
    std::ostringstream os;
    os.precision(17);
    os << "model=" << model << ";lr=" << learning_rate << ";dim=" << dim
       << ";layers=" << n_layers << ";epochs=" << epochs << ";batch=" << batch_size
       << ";alpha=" << alpha << ";beta=" << beta << ";tau=" << tau << ";tau_r=" << tau_r
       << ";seed=" << seed << ";ks=";
    for (int k : eval_ks) os << k << ",";
    os << ";scorer_hidden=" << scorer_hidden << ";disc_hidden=" << disc_hidden
       << ";vgae_hidden=" << vgae_hidden << ";latent_dim=" << latent_dim
       << ";nce_batch=" << nce_batch << ";nce_include_self=" << nce_include_self
       << ";fixed_eta=" << (fixed_eta ? std::to_string(*fixed_eta) : "none")
       << ";drop_rate=" << drop_rate << ";patience=" << patience
       << ";elbo_neg_per_pos=" << elbo_neg_per_pos << ";grad_clip=" << grad_clip
       << ";weight_decay=" << weight_decay << ";min_max_ratio=" << min_max_ratio;
    return os.str();
}

std::uint64_t data_signature(const DataSplit& split, int n_users, int n_items) {
    std::string buf;
    auto push = [&buf](std::int64_t v) {
        char raw[8];
        std::memcpy(raw, &v, 8);
        buf.append(raw, 8);
    };
    push(n_users);
    push(n_items);
    push(static_cast<std::int64_t>(split.seed));
    for (const auto* edges : {&split.train, &split.valid, &split.test}) {
        push(static_cast<std::int64_t>(edges->size()));
        for (const Edge& e : *edges) {
            push(e.user);
            push(e.item);
        }
    }
    return fnv1a64(buf);
}

std::vector<Mat*> ModelState::f_params() { return {&encoder.e0}; }

std::vector<Mat*> ModelState::g_params() {
    std::vector<Mat*> out = mlp_params(scorer.mlp);
    out.push_back(&vgae.w_in);
    out.push_back(&vgae.w_mu);
    out.push_back(&vgae.w_logvar);
    for (Mat* m : mlp_params(vgae.decoder)) out.push_back(m);
    return out;
}

std::vector<Mat*> ModelState::d_params() { return mlp_params(disc.mlp); }

std::vector<const Mat*> ModelState::f_params() const { return {&encoder.e0}; }

std::vector<const Mat*> ModelState::g_params() const {
    std::vector<const Mat*> out = mlp_params(scorer.mlp);
    out.push_back(&vgae.w_in);
    out.push_back(&vgae.w_mu);
    out.push_back(&vgae.w_logvar);
    for (const Mat* m : mlp_params(vgae.decoder)) out.push_back(m);
    return out;
}

std::vector<const Mat*> ModelState::d_params() const { return mlp_params(disc.mlp); }

std::string EpochLog::to_json() const {
    nlohmann::json j;
    j["epoch"] = epoch;
    j["l_bpr_main"] = losses.l_bpr_main;
    j["l_bpr_rec"] = losses.l_bpr_rec;
    j["l_bpr_gen"] = losses.l_bpr_gen;
    j["l_vgae"] = losses.l_vgae;
    j["l_nce"] = losses.l_nce;
    j["l_vd"] = losses.l_vd;
    j["l_total"] = losses.total;
    j["val_recall@10"] = val_recall10;
    j["val_ndcg@10"] = val_ndcg10;
    j["val_phi_r@10"] = val_phi_r10;
    j["val_phi_n@10"] = val_phi_n10;
    j["disc_acc"] = disc_acc ? nlohmann::json(*disc_acc) : nlohmann::json();
    j["disc_auc"] = disc_auc ? nlohmann::json(*disc_auc) : nlohmann::json();
    j["wall_s"] = wall_s;
    return j.dump();
}

Trainer::Trainer(TrainConfig config, const DataSplit& split, const SensitivePartition& partition,
                 int n_items)
    : config_(std::move(config)), split_(split), partition_(partition) {
    config_.validate();
    if (split_.train.empty()) throw DataError("empty training set");
    const int n_users = static_cast<int>(partition_.labels.size());
    graph_ = build_graph(split_.train, n_users, n_items);
    const int lost = count_users_without_train_edges(split_, n_users);
    if (lost > 0) {
        std::cerr << "[warn] " << lost
                  << " users have no training interactions; they keep zero-degree rows and are "
                     "excluded from ranking metrics\n";
    }
    use_epoch_graph_ = config_.model == "randomdrop";
}

ModelState Trainer::init_state() const {
    ModelState s;
    Rng rng_f = derive_rng(config_.seed, "init_f");
    Rng rng_g1 = derive_rng(config_.seed, "init_g1");
    Rng rng_g2 = derive_rng(config_.seed, "init_g2");
    Rng rng_d = derive_rng(config_.seed, "init_d");
    s.encoder = init_encoder(graph_.n_nodes(), config_.dim, config_.n_layers, rng_f);
    s.scorer = init_edge_scorer(config_.dim, config_.scorer_hidden, rng_g1);
    s.vgae = init_vgae(config_.dim, config_.vgae_hidden, config_.latent_dim, rng_g2);
    s.disc = init_discriminator(config_.dim, config_.disc_hidden, rng_d);
    s.opt_f = Adam(config_.learning_rate);
    s.opt_g = Adam(config_.learning_rate);
    s.opt_d = Adam(config_.learning_rate);
    return s;
}

void Trainer::prepare_epoch_graph(int epoch) {
    Rng rng = derive_rng(config_.seed, "drop", epoch);
    const auto& edges = graph_.edges();
    epoch_mask_.assign(edges.size(), 1);
    std::vector<Edge> kept;
    kept.reserve(edges.size());
    for (std::size_t e = 0; e < edges.size(); ++e) {
        if (rng.uniform() < config_.drop_rate) {
            epoch_mask_[e] = 0;
        } else {
            kept.push_back(edges[e]);
        }
    }
    if (kept.empty()) kept.push_back(edges[0]);  // degenerate drop rate on tiny graphs
    epoch_graph_ = InteractionGraph(std::move(kept), graph_.n_users(), graph_.n_items());
}

std::vector<Triple> Trainer::assemble_epoch_triples(int epoch) const {
    const auto& edges = graph_.edges();
    std::vector<int> order(edges.size());
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng = derive_rng(config_.seed, "shuffle", epoch);
    for (std::size_t i = order.size() - 1; i > 0; --i) {
        std::swap(order[i], order[shuffle_rng.below(i + 1)]);
    }
    Rng neg_rng = derive_rng(config_.seed, "neg", epoch);
    const int n_items = graph_.n_items();
    std::vector<Triple> triples(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        const Edge& e = edges[order[i]];
        int neg = static_cast<int>(neg_rng.below(n_items));
        if (graph_.degree(e.user) < n_items) {
            while (graph_.has_edge(e.user, neg)) neg = static_cast<int>(neg_rng.below(n_items));
        }
        triples[i] = Triple{e.user, e.item, neg};
    }
    return triples;
}

namespace {
std::vector<int> sample_nce_batch(int n_nodes, int batch, Rng& rng) {
    std::vector<int> ids(n_nodes);
    std::iota(ids.begin(), ids.end(), 0);
    const int b = std::min(batch, n_nodes);
    for (int i = 0; i < b; ++i) {
        const int j = i + static_cast<int>(rng.below(n_nodes - i));
        std::swap(ids[i], ids[j]);
    }
    ids.resize(b);
    return ids;
}

void check_finite(const LossBreakdown& lb) {
    const bool ok = std::isfinite(lb.total) && std::isfinite(lb.l_bpr_main) &&
                    std::isfinite(lb.l_bpr_rec) && std::isfinite(lb.l_bpr_gen) &&
                    std::isfinite(lb.l_vgae) && std::isfinite(lb.l_nce) && std::isfinite(lb.l_vd);
    if (!ok) {
        nlohmann::json j;
        j["l_bpr_main"] = lb.l_bpr_main;
        j["l_bpr_rec"] = lb.l_bpr_rec;
        j["l_bpr_gen"] = lb.l_bpr_gen;
        j["l_vgae"] = lb.l_vgae;
        j["l_nce"] = lb.l_nce;
        j["l_vd"] = lb.l_vd;
        j["total"] = lb.total;
        throw NumericError("non-finite loss; breakdown: " + j.dump());
    }
}
}  // namespace

LossBreakdown Trainer::lightgcn_step(const std::vector<Triple>& batch, ModelState& state,
                                     const InteractionGraph& g) {
    LossBreakdown lb;
    lb.alpha = config_.alpha;
    lb.beta = config_.beta;
    const LayerStack stack = propagate_layers(g, nullptr, state.encoder);
    Mat dh = Mat::Zero(stack.mean.rows(), stack.mean.cols());
    lb.l_bpr_main = bpr_batch(stack.mean, g.n_users(), batch, &dh);
    lb.total = total_objective(lb.l_bpr_main, generator_loss(0, 0, 0, 0, lb.alpha), 0, lb.beta);
    check_finite(lb);
    Mat de0 = propagate_backward(g, nullptr, stack, dh);
    state.opt_f.step({&state.encoder.e0}, {&de0}, config_.grad_clip);
    if (config_.weight_decay > 0.0) {
        state.encoder.e0 *= 1.0 - config_.learning_rate * config_.weight_decay;
    }
    return lb;
}

LossBreakdown Trainer::compute_min_phase(const std::vector<Triple>& batch,
                                         const ModelState& state, Rng& view_rng,
                                         const std::vector<int>& nce_ids,
                                         StepGrads* grads) const {
    const int n_users = graph_.n_users();
    const int n_layers = config_.n_layers;
    LossBreakdown lb;
    lb.alpha = config_.alpha;
    lb.beta = config_.beta;

    const LayerStack stack = propagate_layers(graph_, nullptr, state.encoder);
    RecognitionForward g1 = generate_view_g1(graph_, stack, state.scorer, config_.tau_r, view_rng,
                                             config_.fixed_eta);
    GenerativeForward g2 = generate_view_g2(graph_, state.encoder.e0, state.vgae, view_rng,
                                            config_.elbo_neg_per_pos);
    const LayerStack s1 = propagate_layers(graph_, &g1.view, state.encoder);
    const LayerStack s2 = propagate_layers(graph_, &g2.view, state.encoder);

    Mat dh_main = Mat::Zero(stack.mean.rows(), stack.mean.cols());
    Mat dh1 = Mat::Zero(stack.mean.rows(), stack.mean.cols());
    Mat dh2 = Mat::Zero(stack.mean.rows(), stack.mean.cols());

    lb.l_bpr_main = bpr_batch(stack.mean, n_users, batch, grads ? &dh_main : nullptr);
    lb.l_bpr_rec = bpr_batch(s1.mean, n_users, batch, grads ? &dh1 : nullptr);
    lb.l_bpr_gen = bpr_batch(s2.mean, n_users, batch, grads ? &dh2 : nullptr);
    lb.l_vgae = g2.loss_vgae;

    lb.l_nce = info_nce(s1.mean, s2.mean, config_.tau, nce_ids, config_.nce_include_self,
                        grads ? &dh1 : nullptr, grads ? &dh2 : nullptr, config_.alpha);

    // Adversarial term: the generators see -beta * L_VD with theta_d frozen.
    const Mat fused = fuse_user_embeddings(s1.mean, s2.mean, n_users);
    MlpCache disc_cache;
    const Vec s_tilde = predict_attribute(fused, state.disc, &disc_cache);
    lb.l_vd = vd_loss(s_tilde, partition_.labels);
    if (grads) {
        const Vec dlogits = vd_loss_grad_logits(s_tilde, partition_.labels);
        MlpGrads scratch = make_zero_grads(state.disc.mlp);  // theta_d stays frozen
        Mat dy(dlogits.size(), 1);
        dy.col(0) = dlogits * (-config_.beta);
        const Mat dfused = mlp_backward(state.disc.mlp, disc_cache, dy, scratch);
        dh1.topRows(n_users) += 0.5 * dfused;
        dh2.topRows(n_users) += 0.5 * dfused;
    }

    lb.total = total_objective(
        lb.l_bpr_main, generator_loss(lb.l_vgae, lb.l_bpr_rec, lb.l_bpr_gen, lb.l_nce, lb.alpha),
        lb.l_vd, lb.beta);
    check_finite(lb);
    if (!grads) return lb;

    // Backward through both augmented propagations.
    Mat d_keep1 = Mat::Zero(graph_.n_edges(), n_layers);
    Mat d_keep2 = Mat::Zero(graph_.n_edges(), 1);
    grads->de0 = propagate_backward(graph_, &g1.view, s1, dh1, nullptr, &d_keep1);
    grads->de0 += propagate_backward(graph_, &g2.view, s2, dh2, nullptr, &d_keep2);

    // Scorer path: keep-weight grads -> MLP -> plain-stack layer grads.
    grads->scorer = make_zero_grads(state.scorer.mlp);
    std::vector<Mat> extra_ds(n_layers + 1);
    g1_backward(graph_, g1, state.scorer, d_keep1, grads->scorer, extra_ds);
    grads->de0 += propagate_backward(graph_, nullptr, stack, dh_main, &extra_ds, nullptr);

    // VGAE path: keep-weight grads plus the ELBO term; X = E0.
    grads->vgae = make_zero_vgae_grads(state.vgae);
    grads->de0 += g2_backward(graph_, g2, state.vgae, d_keep2, 1.0, grads->vgae);
    return lb;
}

LossBreakdown Trainer::adversarial_step(const std::vector<Triple>& batch, ModelState& state,
                                        Rng& view_rng, Rng& nce_rng, bool run_max_phase,
                                        double* phase2_disc_acc, double* phase2_disc_auc) {
    if (config_.model != "fairdgcl") {
        return lightgcn_step(batch, state, use_epoch_graph_ ? epoch_graph_ : graph_);
    }

    const std::vector<int> nce_ids = sample_nce_batch(graph_.n_nodes(), config_.nce_batch, nce_rng);
    StepGrads grads;
    const LossBreakdown lb = compute_min_phase(batch, state, view_rng, nce_ids, &grads);

    state.opt_f.step({&state.encoder.e0}, {&grads.de0}, config_.grad_clip);

    std::vector<Mat*> g_params = state.g_params();
    std::vector<Mat*> g_grads;
    for (Mat* m : mlp_grad_views(grads.scorer)) g_grads.push_back(m);
    g_grads.push_back(&grads.vgae.w_in);
    g_grads.push_back(&grads.vgae.w_mu);
    g_grads.push_back(&grads.vgae.w_logvar);
    for (Mat* m : mlp_grad_views(grads.vgae.decoder)) g_grads.push_back(m);
    state.opt_g.step(g_params, g_grads, config_.grad_clip);

    if (config_.weight_decay > 0.0) {
        const double shrink = 1.0 - config_.learning_rate * config_.weight_decay;
        state.encoder.e0 *= shrink;
        for (Mat* p : g_params) *p *= shrink;
    }

    // ---- Phase 2: regenerate views under the updated parameters, ascend on
    // theta_d (realized as descending L_VD; beta scales only the
    // generator-facing gradient, so the discriminator keeps learning at beta=0).
    if (run_max_phase) {
        const LayerStack stack2 = propagate_layers(graph_, nullptr, state.encoder);
        const RecognitionForward g1b = generate_view_g1(graph_, stack2, state.scorer,
                                                        config_.tau_r, view_rng, config_.fixed_eta);
        const GenerativeForward g2b = generate_view_g2(graph_, state.encoder.e0, state.vgae,
                                                       view_rng, config_.elbo_neg_per_pos);
        const LayerStack s1b = propagate_layers(graph_, &g1b.view, state.encoder);
        const LayerStack s2b = propagate_layers(graph_, &g2b.view, state.encoder);
        const Mat fused2 = fuse_user_embeddings(s1b.mean, s2b.mean, graph_.n_users());
        MlpCache cache2;
        const Vec pred2 = predict_attribute(fused2, state.disc, &cache2);
        const double l_vd2 = vd_loss(pred2, partition_.labels);
        if (!std::isfinite(l_vd2)) throw NumericError("non-finite discriminator loss");
        const Vec dlogits2 = vd_loss_grad_logits(pred2, partition_.labels);
        MlpGrads disc_grads = make_zero_grads(state.disc.mlp);
        Mat dy2(dlogits2.size(), 1);
        dy2.col(0) = dlogits2;
        mlp_backward(state.disc.mlp, cache2, dy2, disc_grads);
        std::vector<Mat*> d_grads = mlp_grad_views(disc_grads);
        std::vector<Mat*> d_params = state.d_params();
        state.opt_d.step(d_params, d_grads, config_.grad_clip);
        if (phase2_disc_acc) *phase2_disc_acc = attribute_accuracy(pred2, partition_.labels);
        if (phase2_disc_auc) *phase2_disc_auc = attribute_auc(pred2, partition_.labels);
    }
    return lb;
}

Mat Trainer::inference_embeddings(const ModelState& state) const {
    return propagate(graph_, state.encoder);
}

TrainResult Trainer::train(const TrainHooks& hooks, const TrainCheckpoint* resume) {
    TrainResult result;
    TrainCheckpoint cur;
    if (resume) {
        cur = *resume;
    } else {
        cur.state = init_state();
        cur.best_state = cur.state;
    }
    ModelState& state = cur.state;
    result.best = cur.best_state;
    result.best_epoch = cur.best_epoch;

    const bool fair = config_.model == "fairdgcl";

    for (int epoch = state.epoch; epoch < config_.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        if (use_epoch_graph_) prepare_epoch_graph(epoch);
        const std::vector<Triple> triples = assemble_epoch_triples(epoch);
        Rng view_rng = derive_rng(config_.seed, "views", epoch);
        Rng nce_rng = derive_rng(config_.seed, "nce", epoch);

        LossBreakdown sum;
        double acc_sum = 0.0, auc_sum = 0.0;
        int n_steps = 0, n_max_steps = 0;
        for (std::size_t start = 0; start < triples.size(); start += config_.batch_size) {
            const std::size_t end = std::min(triples.size(), start + config_.batch_size);
            const std::vector<Triple> batch(triples.begin() + start, triples.begin() + end);
            const bool run_max = ((n_steps + 1) % config_.min_max_ratio) == 0;
            double acc = 0.0, auc = 0.0;
            const LossBreakdown lb =
                adversarial_step(batch, state, view_rng, nce_rng, run_max, &acc, &auc);
            sum.l_bpr_main += lb.l_bpr_main;
            sum.l_bpr_rec += lb.l_bpr_rec;
            sum.l_bpr_gen += lb.l_bpr_gen;
            sum.l_vgae += lb.l_vgae;
            sum.l_nce += lb.l_nce;
            sum.l_vd += lb.l_vd;
            sum.total += lb.total;
            if (fair && run_max) {
                acc_sum += acc;
                auc_sum += auc;
                ++n_max_steps;
            }
            ++n_steps;
        }

        EpochLog log;
        log.epoch = epoch + 1;
        log.losses = sum;
        if (n_steps > 0) {
            log.losses.l_bpr_main /= n_steps;
            log.losses.l_bpr_rec /= n_steps;
            log.losses.l_bpr_gen /= n_steps;
            log.losses.l_vgae /= n_steps;
            log.losses.l_nce /= n_steps;
            log.losses.l_vd /= n_steps;
            log.losses.total /= n_steps;
        }
        log.losses.alpha = config_.alpha;
        log.losses.beta = config_.beta;
        if (fair && n_max_steps > 0) {
            log.disc_acc = acc_sum / n_max_steps;
            log.disc_auc = auc_sum / n_max_steps;
        }

        const Mat h = inference_embeddings(state);
        const MetricsReport val = evaluate(h, split_, partition_, {10}, /*use_valid_as_test=*/true);
        const KMetrics& v10 = val.at_k.at(10);
        log.val_recall10 = v10.recall;
        log.val_ndcg10 = v10.ndcg;
        log.val_phi_r10 = v10.phi_r;
        log.val_phi_n10 = v10.phi_n;
        log.wall_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        state.epoch = epoch + 1;
        result.history.push_back(log);

        if (log.val_ndcg10 > cur.best_metric) {
            cur.best_metric = log.val_ndcg10;
            cur.best_state = state;
            cur.best_epoch = epoch + 1;
            cur.epochs_since_best = 0;
        } else {
            ++cur.epochs_since_best;
        }
        result.best = cur.best_state;
        result.best_epoch = cur.best_epoch;

        if (hooks.on_epoch) hooks.on_epoch(log);
        if (hooks.on_checkpoint) hooks.on_checkpoint(cur, epoch + 1);
        if (config_.patience > 0 && cur.epochs_since_best >= config_.patience) break;
    }

    if (state.epoch > 0) {
        const Mat h_best = inference_embeddings(result.best);
        result.test_report = evaluate(h_best, split_, partition_, config_.eval_ks, false);
    }
    return result;
}

namespace {
constexpr char kMagic[8] = {'F', 'D', 'G', 'C', 'K', 'P', 'T', '1'};

void write_u64(std::ostream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void write_i64(std::ostream& out, std::int64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void write_f64(std::ostream& out, double v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
std::uint64_t read_u64(std::istream& in) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}
std::int64_t read_i64(std::istream& in) {
    std::int64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}
double read_f64(std::istream& in) {
    double v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}

void write_mat(std::ostream& out, const Mat& m) {
    write_u64(out, static_cast<std::uint64_t>(m.rows()));
    write_u64(out, static_cast<std::uint64_t>(m.cols()));
    out.write(reinterpret_cast<const char*>(m.data()),
              static_cast<std::streamsize>(sizeof(double) * m.size()));
}

Mat read_mat(std::istream& in, const std::filesystem::path& path) {
    const auto rows = read_u64(in);
    const auto cols = read_u64(in);
    if (!in || rows > (1u << 26) || cols > (1u << 26)) {
        throw DataError("corrupted checkpoint: " + path.string());
    }
    Mat m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    in.read(reinterpret_cast<char*>(m.data()),
            static_cast<std::streamsize>(sizeof(double) * m.size()));
    if (!in) throw DataError("corrupted checkpoint: " + path.string());
    return m;
}

void write_state(std::ostream& out, const ModelState& state) {
    std::vector<const Mat*> all;
    for (const Mat* m : state.f_params()) all.push_back(m);
    for (const Mat* m : state.g_params()) all.push_back(m);
    for (const Mat* m : state.d_params()) all.push_back(m);
    write_u64(out, all.size());
    for (const Mat* m : all) write_mat(out, *m);
    for (const Adam* opt : {&state.opt_f, &state.opt_g, &state.opt_d}) {
        write_i64(out, opt->step_count());
        write_u64(out, opt->moments_m().size());
        for (const Mat& m : opt->moments_m()) write_mat(out, m);
        for (const Mat& m : opt->moments_v()) write_mat(out, m);
    }
    write_i64(out, state.epoch);
}
}  // namespace

void save_checkpoint(const TrainCheckpoint& ckpt, const TrainConfig& config,
                     std::uint64_t data_hash, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write checkpoint: " + path.string());
    out.write(kMagic, sizeof kMagic);
    write_u64(out, config.hash());
    write_u64(out, data_hash);
    write_u64(out, config.seed);
    write_state(out, ckpt.state);
    write_state(out, ckpt.best_state);
    write_i64(out, ckpt.best_epoch);
    write_f64(out, ckpt.best_metric);
    write_i64(out, ckpt.epochs_since_best);
    if (!out) throw DataError("write failed: " + path.string());
}

TrainCheckpoint load_checkpoint(const std::filesystem::path& path, const TrainConfig& config,
                                std::uint64_t data_hash) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint: " + path.string());
    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
        throw DataError("not a checkpoint file: " + path.string());
    }
    const auto stored_config = read_u64(in);
    const auto stored_data = read_u64(in);
    read_u64(in);  // seed, already part of the config hash
    if (stored_config != config.hash()) {
        throw DataError("checkpoint config hash mismatch (stored " +
                        std::to_string(stored_config) + ", current " +
                        std::to_string(config.hash()) + "); refusing to load");
    }
    if (data_hash != 0 && stored_data != data_hash) {
        throw DataError("checkpoint was trained on a different split; refusing to load");
    }

    TrainCheckpoint ckpt;
    // Structural skeleton with config-derived shapes; e0's row count is
    // data-dependent and validated only against the embedding width.
    Rng dummy(0);
    auto skeleton = [&]() {
        ModelState st;
        st.encoder.n_layers = config.n_layers;
        st.scorer = init_edge_scorer(config.dim, config.scorer_hidden, dummy);
        st.vgae = init_vgae(config.dim, config.vgae_hidden, config.latent_dim, dummy);
        st.disc = init_discriminator(config.dim, config.disc_hidden, dummy);
        st.opt_f = Adam(config.learning_rate);
        st.opt_g = Adam(config.learning_rate);
        st.opt_d = Adam(config.learning_rate);
        return st;
    };
    auto read_state = [&](ModelState& st) {
        std::vector<Mat*> all;
        for (Mat* m : st.f_params()) all.push_back(m);
        for (Mat* m : st.g_params()) all.push_back(m);
        for (Mat* m : st.d_params()) all.push_back(m);
        const auto count = read_u64(in);
        if (count != all.size()) throw DataError("corrupted checkpoint: " + path.string());
        bool is_e0 = true;
        for (Mat* m : all) {
            Mat loaded = read_mat(in, path);
            if (is_e0) {
                if (loaded.cols() != config.dim) {
                    throw DataError("checkpoint embedding width mismatch: " + path.string());
                }
            } else if (loaded.rows() != m->rows() || loaded.cols() != m->cols()) {
                throw DataError("checkpoint tensor shape mismatch: " + path.string());
            }
            *m = std::move(loaded);
            is_e0 = false;
        }
        for (Adam* opt : {&st.opt_f, &st.opt_g, &st.opt_d}) {
            opt->set_step_count(read_i64(in));
            const auto n = read_u64(in);
            opt->moments_m().clear();
            opt->moments_v().clear();
            for (std::uint64_t i = 0; i < n; ++i) opt->moments_m().push_back(read_mat(in, path));
            for (std::uint64_t i = 0; i < n; ++i) opt->moments_v().push_back(read_mat(in, path));
        }
        st.epoch = static_cast<int>(read_i64(in));
    };
    ckpt.state = skeleton();
    ckpt.best_state = skeleton();
    read_state(ckpt.state);
    read_state(ckpt.best_state);
    ckpt.best_epoch = static_cast<int>(read_i64(in));
    ckpt.best_metric = read_f64(in);
    ckpt.epochs_since_best = static_cast<int>(read_i64(in));
    if (!in) throw DataError("corrupted checkpoint: " + path.string());
    return ckpt;
}

std::string serialize_params(const std::vector<const Mat*>& params) {
    std::ostringstream out(std::ios::binary);
    for (const Mat* m : params) write_mat(out, *m);
    return out.str();
}

void Trainer::dump_views(const ModelState& state, const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    if (config_.model == "randomdrop") {
        Trainer self = *this;  // mask generation mutates scratch state
        self.prepare_epoch_graph(0);
        std::ofstream out(dir / "randomdrop_mask.csv");
        out << "user,item,kept\n";
        const auto& edges = graph_.edges();
        for (std::size_t e = 0; e < edges.size(); ++e) {
            out << edges[e].user << ',' << edges[e].item << ','
                << static_cast<int>(self.epoch_mask_[e]) << '\n';
        }
        return;
    }
    if (config_.model != "fairdgcl") return;
    Rng rng = derive_rng(config_.seed, "dump", state.epoch);
    const LayerStack stack = propagate_layers(graph_, nullptr, state.encoder);
    const RecognitionForward g1 =
        generate_view_g1(graph_, stack, state.scorer, config_.tau_r, rng, config_.fixed_eta);
    {
        std::ofstream out(dir / "view_recognition.csv");
        out << "user,item,layer,w,eta,p\n";
        out.precision(17);
        const auto& edges = graph_.edges();
        for (int l = 0; l < config_.n_layers; ++l) {
            for (int e = 0; e < graph_.n_edges(); ++e) {
                out << edges[e].user << ',' << edges[e].item << ',' << l << ',' << g1.w(e, l)
                    << ',' << g1.eta(e, l) << ',' << g1.view.keep_weights(e, l) << '\n';
            }
        }
    }
    {
        const GenerativeForward g2 = generate_view_g2(graph_, state.encoder.e0, state.vgae, rng,
                                                      config_.elbo_neg_per_pos);
        std::ofstream out(dir / "view_generative.csv");
        out << "user,item,recon_prob\n";
        out.precision(17);
        const auto& edges = graph_.edges();
        for (int e = 0; e < graph_.n_edges(); ++e) {
            out << edges[e].user << ',' << edges[e].item << ',' << g2.view.keep_weights(e, 0)
                << '\n';
        }
    }
}

}  // namespace fairdgcl
