#pragma once

#include "fairdgcl/adam.hpp"
#include "fairdgcl/dataset.hpp"
#include "fairdgcl/discriminator.hpp"
#include "fairdgcl/encoder.hpp"
#include "fairdgcl/evaluation.hpp"
#include "fairdgcl/objectives.hpp"
#include "fairdgcl/view_generative.hpp"
#include "fairdgcl/view_recognition.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace fairdgcl {

struct TrainConfig {
    std::string model = "fairdgcl";  // fairdgcl | lightgcn | randomdrop
    double learning_rate = 1e-3;
    int dim = 64;
    int n_layers = 2;
    int epochs = 200;
    int batch_size = 2048;
    double alpha = 0.1;
    double beta = 0.01;
    double tau = 0.2;
    double tau_r = 0.2;
    std::uint64_t seed = 0;
    std::vector<int> eval_ks = {10, 20, 30};

    int scorer_hidden = 64;
    int disc_hidden = 64;
    int vgae_hidden = 64;
    int latent_dim = 64;
    int nce_batch = 1024;
    bool nce_include_self = true;  // false = strict denominator over j != i
    std::optional<double> fixed_eta;
    double drop_rate = 0.1;  // randomdrop baseline
    int patience = 20;
    int elbo_neg_per_pos = 1;
    double grad_clip = 5.0;
    double weight_decay = 0.0;  // decoupled, applied after each Adam step
    int min_max_ratio = 1;      // phase-1 steps per phase-2 step

    void validate() const;
    /// Canonical key=value serialization; the basis of the config hash.
    std::string canonical() const;
    std::uint64_t hash() const { return fnv1a64(canonical()); }
};

/// Identity of the data a model was trained on; checkpoints refuse to load
/// against a different split.
std::uint64_t data_signature(const DataSplit& split, int n_users, int n_items);

struct ModelState {
    EncoderParams encoder;
    EdgeScorerParams scorer;
    VgaeParams vgae;
    DiscriminatorParams disc;
    Adam opt_f, opt_g, opt_d;
    int epoch = 0;  // completed epochs

    std::vector<Mat*> f_params();
    std::vector<Mat*> g_params();
    std::vector<Mat*> d_params();
    std::vector<const Mat*> f_params() const;
    std::vector<const Mat*> g_params() const;
    std::vector<const Mat*> d_params() const;
};

struct EpochLog {
    int epoch = 0;
    LossBreakdown losses;  // epoch means
    double val_recall10 = 0.0;
    double val_ndcg10 = 0.0;
    double val_phi_r10 = 0.0;
    double val_phi_n10 = 0.0;
    std::optional<double> disc_acc;
    std::optional<double> disc_auc;
    double wall_s = 0.0;
    std::string to_json() const;
};

struct TrainResult {
    ModelState best;
    int best_epoch = 0;
    std::vector<EpochLog> history;
    MetricsReport test_report;
};

/// Everything needed to continue a run exactly where it stopped: the live
/// state, the best-so-far snapshot, and the early-stopping counters. The rng
/// position is implied by (seed, epoch) since all streams are derived per
/// epoch.
struct TrainCheckpoint {
    ModelState state;
    ModelState best_state;
    int best_epoch = 0;
    double best_metric = -1.0;
    int epochs_since_best = 0;
};

struct TrainHooks {
    std::function<void(const EpochLog&)> on_epoch;
    /// Called after each epoch (for periodic checkpoint writes).
    std::function<void(const TrainCheckpoint&, int epoch)> on_checkpoint;
};

class Trainer {
public:
    Trainer(TrainConfig config, const DataSplit& split, const SensitivePartition& partition,
            int n_items);

    const InteractionGraph& graph() const { return graph_; }
    const TrainConfig& config() const { return config_; }

    ModelState init_state() const;

    /// Gradients of one min-phase step, parallel to the parameter lists of
    /// ModelState::f_params() / g_params().
    struct StepGrads {
        Mat de0;
        MlpGrads scorer;
        VgaeGrads vgae;
    };

    /// Loss assembly and backward of the min phase as a pure function of
    /// (state, batch, rng draws); theta_d is read but never written. `grads`
    /// may be null to evaluate the losses only.
    LossBreakdown compute_min_phase(const std::vector<Triple>& batch, const ModelState& state,
                                    Rng& view_rng, const std::vector<int>& nce_ids,
                                    StepGrads* grads) const;

    /// One alternating step on a triple batch: phase 1 regenerates the views
    /// and descends the total objective over (theta_g, theta_f) with theta_d
    /// frozen; phase 2 (when `run_max_phase`) regenerates the views under the
    /// updated parameters and takes the discriminator ascent step.
    LossBreakdown adversarial_step(const std::vector<Triple>& batch, ModelState& state,
                                   Rng& view_rng, Rng& nce_rng, bool run_max_phase,
                                   double* phase2_disc_acc = nullptr,
                                   double* phase2_disc_auc = nullptr);

    /// Full run with validation-based early stopping; returns the best state
    /// by validation NDCG@10 and the test report of that state. `resume`
    /// continues a checkpointed run from its recorded epoch.
    TrainResult train(const TrainHooks& hooks = {}, const TrainCheckpoint* resume = nullptr);

    /// Evaluation-time embeddings: plain-graph propagation of the state.
    Mat inference_embeddings(const ModelState& state) const;

    std::vector<Triple> assemble_epoch_triples(int epoch) const;

    /// Per-edge debug rows for the generated views at the current state.
    void dump_views(const ModelState& state, const std::filesystem::path& dir) const;

private:
    TrainConfig config_;
    const DataSplit& split_;
    const SensitivePartition& partition_;
    InteractionGraph graph_;
    // randomdrop: per-epoch subgraph and its edge mask.
    InteractionGraph epoch_graph_;
    std::vector<char> epoch_mask_;
    bool use_epoch_graph_ = false;

    void prepare_epoch_graph(int epoch);
    LossBreakdown lightgcn_step(const std::vector<Triple>& batch, ModelState& state,
                                const InteractionGraph& g);
};

void save_checkpoint(const TrainCheckpoint& ckpt, const TrainConfig& config,
                     std::uint64_t data_hash, const std::filesystem::path& path);

/// Verifies the stored config hash against `config` (and `data_hash` when
/// nonzero) and reconstructs the checkpoint. Throws DataError on any mismatch
/// or corruption. Round trip is bit-exact.
TrainCheckpoint load_checkpoint(const std::filesystem::path& path, const TrainConfig& config,
                                std::uint64_t data_hash);

/// Byte-level parameter serialization of one parameter set, for the
/// freeze-contract assertions and tests.
std::string serialize_params(const std::vector<const Mat*>& params);

}  // namespace fairdgcl
