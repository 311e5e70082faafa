#pragma once

#include "vavam/common.hpp"
#include "vavam/nn.hpp"
#include "vavam/scaling.hpp"

#include <cstdint>
#include <vector>

namespace vavam::vm {

struct VaViMConfig {
    int width = 64;
    int n_layers = 2;
    int head_dim = 32;
    int vocab = 64;
    int tokens_per_frame = 64;
    int max_frames = 8;
    int ffn_mult = 4;

    int n_heads() const { return width / head_dim; }
    int max_context() const { return max_frames * tokens_per_frame; }
    void validate() const {
        if (width % head_dim != 0) throw ConfigError("width must be divisible by head_dim");
        if (n_layers < 1 || vocab < 1 || tokens_per_frame < 1 || max_frames < 1)
            throw ConfigError("invalid VaViM config");
    }
};

// Per-token spatial slot (shared table across frames) and frame index
// (unique table per frame).
struct SequenceLayout {
    std::vector<int> spatial_pos;
    std::vector<int> temporal_pos;

    static SequenceLayout frames(int n_frames, int tokens_per_frame, int start_frame = 0);
    std::size_t size() const { return spatial_pos.size(); }
};

struct KVCache {
    std::vector<Mat> keys;    // per layer, capacity x width
    std::vector<Mat> values;  // per layer
    int length = 0;
    int capacity = 0;

    void reset(int n_layers, int max_context, int width);
};

struct SamplingConfig {
    double temperature = 1.0;
    int top_k = 0;  // 0 disables
    bool greedy = false;
    std::uint64_t seed = 0;
};

// Per-layer attention inputs captured for the action expert's joint
// attention: the same keys/values the visual self-attention consumed.
struct VisualContext {
    int n_frames = 0;
    int n_tokens = 0;
    std::vector<Mat> keys;    // per layer, n_tokens x width
    std::vector<Mat> values;  // per layer
};

class VideoModel {
public:
    VideoModel(const VaViMConfig& cfg, const scaling::MuPSettings& mup, std::uint64_t seed);

    const VaViMConfig& config() const { return cfg_; }
    double logit_multiplier() const { return logit_mult_; }

    // z[i] = token_emb[q_i] + spatial_emb[s_i] + temporal_emb[t_i]
    Mat embed(const std::vector<int>& tokens, const SequenceLayout& layout) const;

    // Teacher-forcing forward: logits over the vocabulary per position.
    Mat forward(const std::vector<int>& tokens, const SequenceLayout& layout) const;

    // Mean NLL in nats/token; targets[i] is the token at position i+1.
    // d_logits, when non-null, receives the loss gradient.
    static double nll_loss(const Mat& logits, const std::vector<int>& targets, Mat* d_logits);

    // Forward + backward over a batch of equal-length sequences; gradients
    // accumulate into the registry buffers. Returns mean nats/token.
    double loss_and_grad(const std::vector<std::vector<int>>& batch, const SequenceLayout& layout);

    // Sequential sampling of n_new_frames * tokens_per_frame tokens. If
    // `cache` is null every step recomputes the full prefix (the reference
    // path the KV cache is checked against).
    std::vector<int> generate(const std::vector<int>& context, int n_context_frames,
                              int n_new_frames, const SamplingConfig& sampling,
                              KVCache* cache) const;

    // Logits for every position, computed incrementally through the cache.
    Mat forward_cached(const std::vector<int>& tokens, const SequenceLayout& layout,
                       KVCache& cache) const;

    VisualContext encode_context(const std::vector<int>& tokens, const SequenceLayout& layout) const;

    std::vector<nn::ParamInfo> params();
    void zero_grad();

    // non-embedding parameter count (scaling-law N)
    long non_embedding_params() const;

    // Activation sites probed by the µP coordinate check, in forward order.
    std::vector<std::string> activation_sites() const;
    // RMS of each site's activations for one batch (no gradients).
    std::vector<double> activation_rms(const std::vector<std::vector<int>>& batch,
                                       const SequenceLayout& layout) const;

private:
    struct Layer {
        Vec ln1_g, ln1_b, ln2_g, ln2_b;
        Mat wq, wk, wv, wo, w1, w2;
        Vec bq, bk, bv, bo, b1, b2;
        // gradients
        Vec d_ln1_g, d_ln1_b, d_ln2_g, d_ln2_b;
        Mat d_wq, d_wk, d_wv, d_wo, d_w1, d_w2;
        Vec d_bq, d_bk, d_bv, d_bo, d_b1, d_b2;
    };

    struct LayerCache {
        Mat x;  // layer input
        nn::LayerNormCache ln1, ln2;
        Mat q, k, v;               // T x width
        std::vector<Mat> probs;    // per head, T x T
        Mat att_concat;            // T x width
        Mat x2;                    // residual after attention
        Mat ffn_pre;               // T x (ffn_mult*width)
    };

    struct Workspace {
        std::vector<LayerCache> layers;
        nn::LayerNormCache lnf;
        Mat final_norm;  // T x width
    };

    Mat forward_internal(const std::vector<int>& tokens, const SequenceLayout& layout,
                         Workspace* ws, std::vector<double>* site_rms) const;
    void backward_internal(const std::vector<int>& tokens, const SequenceLayout& layout,
                           const Workspace& ws, const Mat& d_logits);
    Vec decode_step(int token, int spatial, int temporal, KVCache& cache) const;
    int sample_from_logits(const Vec& logits, const SamplingConfig& sampling, Rng& rng) const;
    void check_tokens(const std::vector<int>& tokens, const SequenceLayout& layout) const;

    VaViMConfig cfg_;
    double logit_mult_ = 1.0;
    Mat tok_emb_, spa_emb_, tmp_emb_;
    Mat d_tok_emb_, d_spa_emb_, d_tmp_emb_;
    Vec lnf_g_, lnf_b_, d_lnf_g_, d_lnf_b_;
    std::vector<Layer> layers_;

    friend class JointAttentionReader;
};

}  // namespace vavam::vm
