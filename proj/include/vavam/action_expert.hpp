#pragma once

#include "vavam/common.hpp"
#include "vavam/nn.hpp"
#include "vavam/synthetic_world.hpp"
#include "vavam/video_model.hpp"

#include <cstdint>
#include <vector>

namespace vavam::ae {

using world::Command;

struct ActionExpertConfig {
    int action_width = 16;  // VaViM width / 4
    int horizon = 6;        // H
    int n_commands = 3;
    int denoise_steps = 10;
    double tau_beta_a = 1.5;
    double tau_beta_b = 1.0;
    int ffn_mult = 4;
    double init_std = 0.0086;

    void validate() const {
        if (action_width < 1 || horizon < 1) throw ConfigError("invalid action expert config");
        if (denoise_steps < 1) throw ConfigError("denoise_steps must be >= 1");
    }
};

struct NoisedAction {
    Mat values;  // H x 2, meters in the ego frame
    double tau = 0.0;
};

// A^tau = tau * A + (1 - tau) * eps  (tau=1 returns A, tau=0 returns eps)
NoisedAction noise_actions(const Mat& action, double tau, const Mat& eps);

// Optimal-transport target field u = A - eps, the tau-derivative of the
// linear interpolation path.
Mat target_field(const Mat& action, const Mat& eps);

// Joint attention mask over (visual tokens + action tokens)^2; true = may
// attend. Visual tokens come first (frame-major), then one H-token action
// block per frame position. Rules: visual->visual causal; action->visual all
// past-or-current frames; action->action same block only; visual->action
// never.
MaskMat build_joint_mask(int n_frames, int tokens_per_frame, int horizon);

// One action block used for training: the trajectory seen from frame_pos.
struct BlockTarget {
    int frame_pos = 0;
    Command command = Command::straight;
    Mat action;  // H x 2
};

struct PreparedBlock {
    int frame_pos = 0;
    Command command = Command::straight;
    Mat noised;  // H x 2
    double tau = 0.0;
    Mat target;  // H x 2
};

class ActionExpert {
public:
    ActionExpert(const ActionExpertConfig& cfg, const vm::VaViMConfig& vavim_cfg,
                 std::uint64_t seed);

    const ActionExpertConfig& config() const { return cfg_; }

    // Denoising vector field for the last context frame's action block.
    Mat predict_field(const NoisedAction& noised, const vm::VisualContext& ctx,
                      Command command) const;

    // All blocks of one sample in a single joint pass (training layout).
    std::vector<Mat> predict_fields(const std::vector<PreparedBlock>& blocks,
                                    const vm::VisualContext& ctx) const;

    // Draws tau ~ Beta(a, b) and eps ~ N(0, I) for each block.
    std::vector<PreparedBlock> prepare_blocks(const std::vector<BlockTarget>& blocks,
                                              Rng& rng) const;

    // Mean over blocks of || v_theta - u ||^2 (squared Frobenius norm).
    // Gradients accumulate when accumulate_grads is true.
    double flow_loss_prepared(const vm::VisualContext& ctx,
                              const std::vector<PreparedBlock>& blocks, bool accumulate_grads);

    double flow_loss(const vm::VisualContext& ctx, const std::vector<BlockTarget>& blocks,
                     Rng& rng, bool accumulate_grads = true);

    // Forward Euler over tau in [0,1] with delta = 1/denoise_steps, starting
    // from A^0 ~ N(0, I). Deterministic given the seed.
    Mat sample_trajectory(const vm::VisualContext& ctx, Command command, std::uint64_t seed) const;
    Mat sample_trajectory_steps(const vm::VisualContext& ctx, Command command, std::uint64_t seed,
                                int steps) const;

    std::vector<nn::ParamInfo> params();
    void zero_grad();

private:
    struct Layer {
        Vec ln1_g, ln1_b, ln2_g, ln2_b;
        Mat wq, wk, wv;  // action_width x vavim_width
        Vec bq, bk, bv;  // vavim_width
        Mat wo;          // vavim_width x action_width
        Vec bo;
        Mat w1, w2;
        Vec b1, b2;
        // grads
        Vec d_ln1_g, d_ln1_b, d_ln2_g, d_ln2_b;
        Mat d_wq, d_wk, d_wv, d_wo, d_w1, d_w2;
        Vec d_bq, d_bk, d_bv, d_bo, d_b1, d_b2;
    };

    struct LayerCache {
        Mat x;
        nn::LayerNormCache ln1, ln2;
        Mat qa, ka, va;          // action-token projections, n_a x vavim_width
        std::vector<Mat> probs;  // per head, n_a x (n_visual + n_a)
        Mat att_concat;          // n_a x vavim_width
        Mat x2;
        Mat ffn_pre;
    };

    struct Workspace {
        Mat enc_pre;   // n_a x action_width (before gelu in the encoder MLP)
        Mat enc_hid;   // gelu(enc_pre)
        std::vector<LayerCache> layers;
        nn::LayerNormCache lnf;
        Mat final_norm;
        MaskMat mask_rows;  // n_a x (n_visual + n_a)
    };

    Mat forward_blocks(const std::vector<PreparedBlock>& blocks, const vm::VisualContext& ctx,
                       Workspace* ws) const;
    void backward_blocks(const std::vector<PreparedBlock>& blocks, const vm::VisualContext& ctx,
                         const Workspace& ws, const Mat& d_field);
    Vec tau_features(double tau) const;

    ActionExpertConfig cfg_;
    int vavim_width_ = 0;
    int head_dim_ = 0;
    int tokens_per_frame_ = 0;
    int max_frames_ = 0;
    int n_layers_ = 0;

    Mat enc_w1_, enc_w2_, tau_proj_, waypoint_emb_, frame_emb_, cmd_emb_, dec_w_;
    Vec enc_b1_, enc_b2_, tau_b_, dec_b_, lnf_g_, lnf_b_;
    Mat d_enc_w1_, d_enc_w2_, d_tau_proj_, d_waypoint_emb_, d_frame_emb_, d_cmd_emb_, d_dec_w_;
    Vec d_enc_b1_, d_enc_b2_, d_tau_b_, d_dec_b_, d_lnf_g_, d_lnf_b_;
    std::vector<Layer> layers_;
};

}  // namespace vavam::ae
