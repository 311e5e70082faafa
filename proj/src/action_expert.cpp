#include "vavam/action_expert.hpp"

#include <cmath>

namespace vavam::ae {

using nn::LayerNormCache;

NoisedAction noise_actions(const Mat& action, double tau, const Mat& eps) {
    if (tau < 0.0 || tau > 1.0) throw DomainError("noise_actions: tau must be in [0,1]");
    if (action.rows() != eps.rows() || action.cols() != eps.cols())
        throw ShapeError("noise_actions: action/eps shape mismatch");
    NoisedAction out;
    out.tau = tau;
    out.values = tau * action + (1.0 - tau) * eps;
    return out;
}

Mat target_field(const Mat& action, const Mat& eps) {
    if (action.rows() != eps.rows() || action.cols() != eps.cols())
        throw ShapeError("target_field: shape mismatch");
    return action - eps;
}

MaskMat build_joint_mask(int n_frames, int tokens_per_frame, int horizon) {
    if (n_frames < 1) throw ConfigError("build_joint_mask: n_frames must be >= 1");
    const int nv = n_frames * tokens_per_frame;
    const int na = n_frames * horizon;
    MaskMat mask = MaskMat::Constant(nv + na, nv + na, false);
    // visual -> visual: causal
    for (int i = 0; i < nv; ++i)
        for (int j = 0; j <= i; ++j) mask(i, j) = true;
    for (int b = 0; b < n_frames; ++b) {
        for (int h = 0; h < horizon; ++h) {
            const int row = nv + b * horizon + h;
            // action -> visual: all frames up to and including the block frame
            for (int j = 0; j < (b + 1) * tokens_per_frame; ++j) mask(row, j) = true;
            // action -> action: same block only
            for (int h2 = 0; h2 < horizon; ++h2) mask(row, nv + b * horizon + h2) = true;
        }
    }
    return mask;
}

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

ActionExpert::ActionExpert(const ActionExpertConfig& cfg, const vm::VaViMConfig& vavim_cfg,
                           std::uint64_t seed)
    : cfg_(cfg),
      vavim_width_(vavim_cfg.width),
      head_dim_(vavim_cfg.head_dim),
      tokens_per_frame_(vavim_cfg.tokens_per_frame),
      max_frames_(vavim_cfg.max_frames),
      n_layers_(vavim_cfg.n_layers) {
    cfg_.validate();
    Rng rng(derive_seed(seed, "action_expert"));
    const int aw = cfg_.action_width;
    const int W = vavim_width_;
    const int f = cfg_.ffn_mult * aw;

    auto gauss_fill = [&rng, this](Mat& m, long rows, long cols) {
        m.resize(rows, cols);
        for (long i = 0; i < m.size(); ++i) m.data()[i] = rng.gauss(0.0, cfg_.init_std);
    };

    gauss_fill(enc_w1_, 2, aw);
    gauss_fill(enc_w2_, aw, aw);
    gauss_fill(tau_proj_, aw, aw);
    gauss_fill(waypoint_emb_, cfg_.horizon, aw);
    gauss_fill(frame_emb_, max_frames_, aw);
    gauss_fill(cmd_emb_, cfg_.n_commands, aw);
    gauss_fill(dec_w_, aw, 2);
    enc_b1_ = Vec::Zero(aw);
    enc_b2_ = Vec::Zero(aw);
    tau_b_ = Vec::Zero(aw);
    dec_b_ = Vec::Zero(2);
    lnf_g_ = Vec::Ones(aw);
    lnf_b_ = Vec::Zero(aw);

    d_enc_w1_ = Mat::Zero(2, aw);
    d_enc_w2_ = Mat::Zero(aw, aw);
    d_tau_proj_ = Mat::Zero(aw, aw);
    d_waypoint_emb_ = Mat::Zero(cfg_.horizon, aw);
    d_frame_emb_ = Mat::Zero(max_frames_, aw);
    d_cmd_emb_ = Mat::Zero(cfg_.n_commands, aw);
    d_dec_w_ = Mat::Zero(aw, 2);
    d_enc_b1_ = Vec::Zero(aw);
    d_enc_b2_ = Vec::Zero(aw);
    d_tau_b_ = Vec::Zero(aw);
    d_dec_b_ = Vec::Zero(2);
    d_lnf_g_ = Vec::Zero(aw);
    d_lnf_b_ = Vec::Zero(aw);

    layers_.resize(n_layers_);
    for (auto& L : layers_) {
        L.ln1_g = Vec::Ones(aw);
        L.ln1_b = Vec::Zero(aw);
        L.ln2_g = Vec::Ones(aw);
        L.ln2_b = Vec::Zero(aw);
        gauss_fill(L.wq, aw, W);
        gauss_fill(L.wk, aw, W);
        gauss_fill(L.wv, aw, W);
        gauss_fill(L.wo, W, aw);
        gauss_fill(L.w1, aw, f);
        gauss_fill(L.w2, f, aw);
        L.bq = Vec::Zero(W);
        L.bk = Vec::Zero(W);
        L.bv = Vec::Zero(W);
        L.bo = Vec::Zero(aw);
        L.b1 = Vec::Zero(f);
        L.b2 = Vec::Zero(aw);
        L.d_ln1_g = Vec::Zero(aw);
        L.d_ln1_b = Vec::Zero(aw);
        L.d_ln2_g = Vec::Zero(aw);
        L.d_ln2_b = Vec::Zero(aw);
        L.d_wq = Mat::Zero(aw, W);
        L.d_wk = Mat::Zero(aw, W);
        L.d_wv = Mat::Zero(aw, W);
        L.d_wo = Mat::Zero(W, aw);
        L.d_w1 = Mat::Zero(aw, f);
        L.d_w2 = Mat::Zero(f, aw);
        L.d_bq = Vec::Zero(W);
        L.d_bk = Vec::Zero(W);
        L.d_bv = Vec::Zero(W);
        L.d_bo = Vec::Zero(aw);
        L.d_b1 = Vec::Zero(f);
        L.d_b2 = Vec::Zero(aw);
    }
}

Vec ActionExpert::tau_features(double tau) const {
    const int aw = cfg_.action_width;
    const int half = aw / 2;
    Vec phi = Vec::Zero(aw);
    for (int i = 0; i < half; ++i) {
        const double freq = 2.0 * M_PI * std::pow(1000.0, half > 1 ? static_cast<double>(i) / (half - 1) : 0.0);
        phi(i) = std::sin(tau * freq);
        phi(half + i) = std::cos(tau * freq);
    }
    if (aw % 2 == 1) phi(aw - 1) = tau;
    return phi;
}

// ---------------------------------------------------------------------------
// Forward
// ---------------------------------------------------------------------------

Mat ActionExpert::forward_blocks(const std::vector<PreparedBlock>& blocks,
                                 const vm::VisualContext& ctx, Workspace* ws) const {
    if (blocks.empty()) throw TrainingError("action expert: no blocks");
    if (ctx.n_frames < 1 || ctx.n_frames > max_frames_)
        throw ContextError("action expert: context length must be in [1, max_frames]");
    const int H = cfg_.horizon;
    const int aw = cfg_.action_width;
    const int W = vavim_width_;
    const int nh = W / head_dim_;
    const int nv = ctx.n_tokens;
    const long na = static_cast<long>(blocks.size()) * H;
    const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim_));

    for (const auto& b : blocks) {
        if (b.frame_pos < 0 || b.frame_pos >= ctx.n_frames)
            throw RangeError("action expert: block frame position outside context");
        const int cmd = static_cast<int>(b.command);
        if (cmd < 0 || cmd >= cfg_.n_commands) throw DomainError("action expert: unknown command");
        if (b.noised.rows() != H || b.noised.cols() != 2)
            throw ShapeError("action expert: noised action must be H x 2");
    }

    // encode action tokens
    Mat values(na, 2);
    Mat pre(na, aw);
    for (std::size_t b = 0; b < blocks.size(); ++b)
        for (int h = 0; h < H; ++h) values.row(static_cast<long>(b) * H + h) = blocks[b].noised.row(h);
    pre = (values * enc_w1_).rowwise() + enc_b1_.transpose();
    Mat hid = nn::gelu(pre);
    Mat x = (hid * enc_w2_).rowwise() + enc_b2_.transpose();
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const Vec tau_emb = (tau_features(blocks[b].tau).transpose() * tau_proj_).transpose() + tau_b_;
        for (int h = 0; h < H; ++h) {
            const long r = static_cast<long>(b) * H + h;
            x.row(r) += tau_emb.transpose() + waypoint_emb_.row(h) +
                        frame_emb_.row(blocks[b].frame_pos) +
                        cmd_emb_.row(static_cast<int>(blocks[b].command));
        }
    }

    // per-row attention mask over [visual tokens | action tokens]
    MaskMat mask = MaskMat::Constant(na, nv + na, false);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const int allowed_visual = (blocks[b].frame_pos + 1) * tokens_per_frame_;
        for (int h = 0; h < H; ++h) {
            const long r = static_cast<long>(b) * H + h;
            for (int j = 0; j < std::min(allowed_visual, nv); ++j) mask(r, j) = true;
            for (int h2 = 0; h2 < H; ++h2) mask(r, nv + static_cast<long>(b) * H + h2) = true;
        }
    }

    if (ws) {
        ws->enc_pre = pre;
        ws->enc_hid = hid;
        ws->mask_rows = mask;
        ws->layers.resize(n_layers_);
    }

    for (int li = 0; li < n_layers_; ++li) {
        const Layer& L = layers_[li];
        LayerCache local;
        LayerCache& C = ws ? ws->layers[li] : local;
        C.x = x;

        Mat h1 = nn::layer_norm(x, L.ln1_g, L.ln1_b, &C.ln1);
        C.qa = (h1 * L.wq).rowwise() + L.bq.transpose();
        C.ka = (h1 * L.wk).rowwise() + L.bk.transpose();
        C.va = (h1 * L.wv).rowwise() + L.bv.transpose();

        Mat keys(nv + na, W), vals(nv + na, W);
        keys.topRows(nv) = ctx.keys[li];
        keys.bottomRows(na) = C.ka;
        vals.topRows(nv) = ctx.values[li];
        vals.bottomRows(na) = C.va;

        C.att_concat.resize(na, W);
        C.probs.assign(nh, Mat());
        for (int h = 0; h < nh; ++h) {
            const auto Q = C.qa.middleCols(h * head_dim_, head_dim_);
            const auto K = keys.middleCols(h * head_dim_, head_dim_);
            const auto V = vals.middleCols(h * head_dim_, head_dim_);
            Mat s = Q * K.transpose() * scale;
            for (long r = 0; r < na; ++r)
                for (long c = 0; c < nv + na; ++c)
                    if (!mask(r, c)) s(r, c) = -std::numeric_limits<double>::infinity();
            C.probs[h] = nn::softmax_rows(s);
            C.att_concat.middleCols(h * head_dim_, head_dim_) = C.probs[h] * V;
        }
        Mat att = (C.att_concat * L.wo).rowwise() + L.bo.transpose();
        C.x2 = x + att;

        Mat h2 = nn::layer_norm(C.x2, L.ln2_g, L.ln2_b, &C.ln2);
        C.ffn_pre = (h2 * L.w1).rowwise() + L.b1.transpose();
        Mat a = nn::gelu(C.ffn_pre);
        x = C.x2 + ((a * L.w2).rowwise() + L.b2.transpose());
    }

    LayerNormCache lnf_local;
    LayerNormCache& lnf = ws ? ws->lnf : lnf_local;
    Mat hf = nn::layer_norm(x, lnf_g_, lnf_b_, &lnf);
    if (ws) ws->final_norm = hf;
    return (hf * dec_w_).rowwise() + dec_b_.transpose();  // na x 2
}

// ---------------------------------------------------------------------------
// Backward
// ---------------------------------------------------------------------------

void ActionExpert::backward_blocks(const std::vector<PreparedBlock>& blocks,
                                   const vm::VisualContext& ctx, const Workspace& ws,
                                   const Mat& d_field) {
    const int H = cfg_.horizon;
    const int W = vavim_width_;
    const int nh = W / head_dim_;
    const int nv = ctx.n_tokens;
    const long na = d_field.rows();
    const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim_));

    d_dec_w_ += ws.final_norm.transpose() * d_field;
    d_dec_b_ += d_field.colwise().sum().transpose();
    Mat d_hf = d_field * dec_w_.transpose();
    Mat dx = nn::layer_norm_backward(d_hf, ws.lnf, lnf_g_, d_lnf_g_, d_lnf_b_);

    for (int li = n_layers_ - 1; li >= 0; --li) {
        Layer& L = layers_[li];
        const LayerCache& C = ws.layers[li];

        Mat a = nn::gelu(C.ffn_pre);
        Mat d_a = dx * L.w2.transpose();
        L.d_w2 += a.transpose() * dx;
        L.d_b2 += dx.colwise().sum().transpose();
        Mat d_pre = d_a.cwiseProduct(nn::gelu_grad(C.ffn_pre));
        Mat h2_full = (C.ln2.xhat.array().rowwise() * L.ln2_g.transpose().array()).matrix();
        h2_full.rowwise() += L.ln2_b.transpose();
        L.d_w1 += h2_full.transpose() * d_pre;
        L.d_b1 += d_pre.colwise().sum().transpose();
        Mat d_h2 = d_pre * L.w1.transpose();
        Mat d_x2 = dx + nn::layer_norm_backward(d_h2, C.ln2, L.ln2_g, L.d_ln2_g, L.d_ln2_b);

        Mat d_att = d_x2 * L.wo.transpose();
        L.d_wo += C.att_concat.transpose() * d_x2;
        L.d_bo += d_x2.colwise().sum().transpose();

        Mat d_qa = Mat::Zero(na, W);
        Mat d_ka = Mat::Zero(na, W);
        Mat d_va = Mat::Zero(na, W);
        for (int h = 0; h < nh; ++h) {
            Mat keys(nv + na, head_dim_), vals(nv + na, head_dim_);
            keys.topRows(nv) = ctx.keys[li].middleCols(h * head_dim_, head_dim_);
            keys.bottomRows(na) = C.ka.middleCols(h * head_dim_, head_dim_);
            vals.topRows(nv) = ctx.values[li].middleCols(h * head_dim_, head_dim_);
            vals.bottomRows(na) = C.va.middleCols(h * head_dim_, head_dim_);

            const Mat& P = C.probs[h];
            const auto d_o = d_att.middleCols(h * head_dim_, head_dim_);
            Mat d_p = d_o * vals.transpose();
            Mat d_vals = P.transpose() * d_o;
            Mat d_s(na, nv + na);
            for (long r = 0; r < na; ++r) {
                const double dot = d_p.row(r).cwiseProduct(P.row(r)).sum();
                d_s.row(r) = P.row(r).cwiseProduct((d_p.row(r).array() - dot).matrix());
            }
            d_qa.middleCols(h * head_dim_, head_dim_) = d_s * keys * scale;
            // only the action rows of keys/values belong to the expert;
            // the visual rows are frozen VaViM activations
            d_ka.middleCols(h * head_dim_, head_dim_) =
                (d_s.transpose() * C.qa.middleCols(h * head_dim_, head_dim_) * scale).bottomRows(na);
            d_va.middleCols(h * head_dim_, head_dim_) = d_vals.bottomRows(na);
        }

        Mat h1_full = (C.ln1.xhat.array().rowwise() * L.ln1_g.transpose().array()).matrix();
        h1_full.rowwise() += L.ln1_b.transpose();
        L.d_wq += h1_full.transpose() * d_qa;
        L.d_wk += h1_full.transpose() * d_ka;
        L.d_wv += h1_full.transpose() * d_va;
        L.d_bq += d_qa.colwise().sum().transpose();
        L.d_bk += d_ka.colwise().sum().transpose();
        L.d_bv += d_va.colwise().sum().transpose();
        Mat d_h1 = d_qa * L.wq.transpose() + d_ka * L.wk.transpose() + d_va * L.wv.transpose();
        dx = d_x2 + nn::layer_norm_backward(d_h1, C.ln1, L.ln1_g, L.d_ln1_g, L.d_ln1_b);
    }

    // encoder and embedding backward
    Mat d_hid = dx * enc_w2_.transpose();
    d_enc_w2_ += ws.enc_hid.transpose() * dx;
    d_enc_b2_ += dx.colwise().sum().transpose();
    Mat d_pre = d_hid.cwiseProduct(nn::gelu_grad(ws.enc_pre));
    Mat values(na, 2);
    for (std::size_t b = 0; b < blocks.size(); ++b)
        for (int h = 0; h < H; ++h) values.row(static_cast<long>(b) * H + h) = blocks[b].noised.row(h);
    d_enc_w1_ += values.transpose() * d_pre;
    d_enc_b1_ += d_pre.colwise().sum().transpose();

    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const Vec phi = tau_features(blocks[b].tau);
        Vec d_tau_emb = Vec::Zero(cfg_.action_width);
        for (int h = 0; h < H; ++h) {
            const long r = static_cast<long>(b) * H + h;
            d_waypoint_emb_.row(h) += dx.row(r);
            d_frame_emb_.row(blocks[b].frame_pos) += dx.row(r);
            d_cmd_emb_.row(static_cast<int>(blocks[b].command)) += dx.row(r);
            d_tau_emb += dx.row(r).transpose();
        }
        d_tau_proj_ += phi * d_tau_emb.transpose();
        d_tau_b_ += d_tau_emb;
    }
}

// ---------------------------------------------------------------------------
// Public surface
// ---------------------------------------------------------------------------

Mat ActionExpert::predict_field(const NoisedAction& noised, const vm::VisualContext& ctx,
                                Command command) const {
    if (noised.tau < 0.0 || noised.tau > 1.0) throw DomainError("predict_field: tau outside [0,1]");
    PreparedBlock block;
    block.frame_pos = ctx.n_frames - 1;
    block.command = command;
    block.noised = noised.values;
    block.tau = noised.tau;
    return forward_blocks({block}, ctx, nullptr);
}

std::vector<Mat> ActionExpert::predict_fields(const std::vector<PreparedBlock>& blocks,
                                              const vm::VisualContext& ctx) const {
    Mat field = forward_blocks(blocks, ctx, nullptr);
    std::vector<Mat> out;
    for (std::size_t b = 0; b < blocks.size(); ++b)
        out.push_back(field.middleRows(static_cast<long>(b) * cfg_.horizon, cfg_.horizon));
    return out;
}

std::vector<PreparedBlock> ActionExpert::prepare_blocks(const std::vector<BlockTarget>& blocks,
                                                        Rng& rng) const {
    std::vector<PreparedBlock> prepared;
    prepared.reserve(blocks.size());
    for (const auto& b : blocks) {
        if (b.action.rows() != cfg_.horizon || b.action.cols() != 2)
            throw ShapeError("prepare_blocks: action must be H x 2");
        PreparedBlock p;
        p.frame_pos = b.frame_pos;
        p.command = b.command;
        p.tau = rng.beta(cfg_.tau_beta_a, cfg_.tau_beta_b);
        Mat eps(cfg_.horizon, 2);
        for (long i = 0; i < eps.size(); ++i) eps.data()[i] = rng.gauss();
        p.noised = noise_actions(b.action, p.tau, eps).values;
        p.target = target_field(b.action, eps);
        prepared.push_back(std::move(p));
    }
    return prepared;
}

double ActionExpert::flow_loss_prepared(const vm::VisualContext& ctx,
                                        const std::vector<PreparedBlock>& blocks,
                                        bool accumulate_grads) {
    Workspace ws;
    Mat field = forward_blocks(blocks, ctx, accumulate_grads ? &ws : nullptr);
    double loss = 0.0;
    Mat d_field(field.rows(), 2);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const auto diff =
            field.middleRows(static_cast<long>(b) * cfg_.horizon, cfg_.horizon) - blocks[b].target;
        loss += diff.squaredNorm();
        d_field.middleRows(static_cast<long>(b) * cfg_.horizon, cfg_.horizon) =
            2.0 * diff / static_cast<double>(blocks.size());
    }
    loss /= static_cast<double>(blocks.size());
    if (!std::isfinite(loss)) throw TrainingError("action expert: non-finite flow loss");
    if (accumulate_grads) backward_blocks(blocks, ctx, ws, d_field);
    return loss;
}

double ActionExpert::flow_loss(const vm::VisualContext& ctx, const std::vector<BlockTarget>& blocks,
                               Rng& rng, bool accumulate_grads) {
    if (blocks.empty()) throw TrainingError("flow_loss: empty batch");
    return flow_loss_prepared(ctx, prepare_blocks(blocks, rng), accumulate_grads);
}

Mat ActionExpert::sample_trajectory_steps(const vm::VisualContext& ctx, Command command,
                                          std::uint64_t seed, int steps) const {
    Rng rng(seed);
    Mat a(cfg_.horizon, 2);
    for (long i = 0; i < a.size(); ++i) a.data()[i] = rng.gauss();
    const double delta = 1.0 / steps;
    for (int s = 0; s < steps; ++s) {
        NoisedAction st{a, s * delta};
        a += delta * predict_field(st, ctx, command);
    }
    return a;
}

Mat ActionExpert::sample_trajectory(const vm::VisualContext& ctx, Command command,
                                    std::uint64_t seed) const {
    return sample_trajectory_steps(ctx, command, seed, cfg_.denoise_steps);
}

std::vector<nn::ParamInfo> ActionExpert::params() {
    using nn::ParamGroup;
    std::vector<nn::ParamInfo> ps;
    ps.push_back(nn::param_of("enc_w1", enc_w1_, d_enc_w1_, ParamGroup::hidden));
    ps.push_back(nn::param_of("enc_b1", enc_b1_, d_enc_b1_, ParamGroup::vector_like));
    ps.push_back(nn::param_of("enc_w2", enc_w2_, d_enc_w2_, ParamGroup::hidden));
    ps.push_back(nn::param_of("enc_b2", enc_b2_, d_enc_b2_, ParamGroup::vector_like));
    ps.push_back(nn::param_of("tau_proj", tau_proj_, d_tau_proj_, ParamGroup::hidden));
    ps.push_back(nn::param_of("tau_b", tau_b_, d_tau_b_, ParamGroup::vector_like));
    ps.push_back(nn::param_of("waypoint_emb", waypoint_emb_, d_waypoint_emb_, ParamGroup::input_embedding));
    ps.push_back(nn::param_of("frame_emb", frame_emb_, d_frame_emb_, ParamGroup::input_embedding));
    ps.push_back(nn::param_of("cmd_emb", cmd_emb_, d_cmd_emb_, ParamGroup::input_embedding));
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        auto& L = layers_[i];
        const std::string p = "joint" + std::to_string(i) + ".";
        ps.push_back(nn::param_of(p + "ln1_g", L.ln1_g, L.d_ln1_g, ParamGroup::vector_like));
        ps.push_back(nn::param_of(p + "ln1_b", L.ln1_b, L.d_ln1_b, ParamGroup::vector_like));
        ps.push_back(nn::param_of(p + "wq", L.wq, L.d_wq, ParamGroup::hidden));
        ps.push_back(nn::param_of(p + "bq", L.bq, L.d_bq, ParamGroup::vector_like));
        ps.push_back(nn::param_of(p + "wk", L.wk, L.d_wk, ParamGroup::hidden));
        ps.push_back(nn::param_of(p + "bk", L.bk, L.d_bk, ParamGroup::vector_like));
        ps.push_back(nn::param_of(p + "wv", L.wv, L.d_wv, ParamGroup::hidden));
        ps.push_back(nn::param_of(p + "bv", L.bv, L.d_bv, ParamGroup::vector_like));
        ps.push_back(nn::param_of(p + "wo", L.wo, L.d_wo, ParamGroup::hidden));
        ps.push_back(nn::param_of(p + "bo", L.bo, L.d_bo, ParamGroup::vector_like));
        ps.push_back(nn::param_of(p + "ln2_g", L.ln2_g, L.d_ln2_g, ParamGroup::vector_like));
        ps.push_back(nn::param_of(p + "ln2_b", L.ln2_b, L.d_ln2_b, ParamGroup::vector_like));
        ps.push_back(nn::param_of(p + "w1", L.w1, L.d_w1, ParamGroup::hidden));
        ps.push_back(nn::param_of(p + "b1", L.b1, L.d_b1, ParamGroup::vector_like));
        ps.push_back(nn::param_of(p + "w2", L.w2, L.d_w2, ParamGroup::hidden));
        ps.push_back(nn::param_of(p + "b2", L.b2, L.d_b2, ParamGroup::vector_like));
    }
    ps.push_back(nn::param_of("lnf_g", lnf_g_, d_lnf_g_, ParamGroup::vector_like));
    ps.push_back(nn::param_of("lnf_b", lnf_b_, d_lnf_b_, ParamGroup::vector_like));
    ps.push_back(nn::param_of("dec_w", dec_w_, d_dec_w_, ParamGroup::hidden));
    ps.push_back(nn::param_of("dec_b", dec_b_, d_dec_b_, ParamGroup::vector_like));
    return ps;
}

void ActionExpert::zero_grad() {
    auto ps = params();
    nn::zero_grads(ps);
}

}  // namespace vavam::ae
