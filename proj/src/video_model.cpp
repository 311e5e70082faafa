#include "vavam/video_model.hpp"

#include <algorithm>
#include <cmath>

namespace vavam::vm {

using nn::LayerNormCache;

SequenceLayout SequenceLayout::frames(int n_frames, int tokens_per_frame, int start_frame) {
    SequenceLayout l;
    l.spatial_pos.reserve(static_cast<std::size_t>(n_frames) * tokens_per_frame);
    l.temporal_pos.reserve(l.spatial_pos.capacity());
    for (int f = 0; f < n_frames; ++f)
        for (int s = 0; s < tokens_per_frame; ++s) {
            l.spatial_pos.push_back(s);
            l.temporal_pos.push_back(start_frame + f);
        }
    return l;
}

void KVCache::reset(int n_layers, int max_context, int width) {
    keys.assign(n_layers, Mat::Zero(max_context, width));
    values.assign(n_layers, Mat::Zero(max_context, width));
    length = 0;
    capacity = max_context;
}

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

VideoModel::VideoModel(const VaViMConfig& cfg, const scaling::MuPSettings& mup, std::uint64_t seed)
    : cfg_(cfg), logit_mult_(mup.logit_mult) {
    cfg_.validate();
    if (mup.width != cfg.width) throw ConfigError("MuP settings computed for a different width");
    Rng rng(derive_seed(seed, "video_model"));
    const int w = cfg_.width;
    const int f = cfg_.ffn_mult * w;

    auto gauss_fill = [&rng](Mat& m, long rows, long cols, double std) {
        m.resize(rows, cols);
        for (long i = 0; i < m.size(); ++i) m.data()[i] = rng.gauss(0.0, std);
    };

    gauss_fill(tok_emb_, cfg_.vocab, w, mup.std_embedding);
    gauss_fill(spa_emb_, cfg_.tokens_per_frame, w, mup.std_embedding);
    gauss_fill(tmp_emb_, cfg_.max_frames, w, mup.std_embedding);
    d_tok_emb_ = Mat::Zero(cfg_.vocab, w);
    d_spa_emb_ = Mat::Zero(cfg_.tokens_per_frame, w);
    d_tmp_emb_ = Mat::Zero(cfg_.max_frames, w);

    layers_.resize(cfg_.n_layers);
    for (auto& l : layers_) {
        l.ln1_g = Vec::Ones(w);
        l.ln1_b = Vec::Zero(w);
        l.ln2_g = Vec::Ones(w);
        l.ln2_b = Vec::Zero(w);
        gauss_fill(l.wq, w, w, mup.std_hidden);
        gauss_fill(l.wk, w, w, mup.std_hidden);
        gauss_fill(l.wv, w, w, mup.std_hidden);
        gauss_fill(l.wo, w, w, mup.std_hidden);
        gauss_fill(l.w1, w, f, mup.std_hidden);
        gauss_fill(l.w2, f, w, mup.std_hidden);
        l.bq = Vec::Zero(w);
        l.bk = Vec::Zero(w);
        l.bv = Vec::Zero(w);
        l.bo = Vec::Zero(w);
        l.b1 = Vec::Zero(f);
        l.b2 = Vec::Zero(w);
        l.d_ln1_g = Vec::Zero(w);
        l.d_ln1_b = Vec::Zero(w);
        l.d_ln2_g = Vec::Zero(w);
        l.d_ln2_b = Vec::Zero(w);
        l.d_wq = Mat::Zero(w, w);
        l.d_wk = Mat::Zero(w, w);
        l.d_wv = Mat::Zero(w, w);
        l.d_wo = Mat::Zero(w, w);
        l.d_w1 = Mat::Zero(w, f);
        l.d_w2 = Mat::Zero(f, w);
        l.d_bq = Vec::Zero(w);
        l.d_bk = Vec::Zero(w);
        l.d_bv = Vec::Zero(w);
        l.d_bo = Vec::Zero(w);
        l.d_b1 = Vec::Zero(f);
        l.d_b2 = Vec::Zero(w);
    }
    lnf_g_ = Vec::Ones(w);
    lnf_b_ = Vec::Zero(w);
    d_lnf_g_ = Vec::Zero(w);
    d_lnf_b_ = Vec::Zero(w);
}

void VideoModel::check_tokens(const std::vector<int>& tokens, const SequenceLayout& layout) const {
    if (tokens.size() != layout.size()) throw ShapeError("layout inconsistent with sequence length");
    if (static_cast<int>(tokens.size()) > cfg_.max_context())
        throw ContextError("sequence exceeds max context");
    for (int t : tokens)
        if (t < 0 || t >= cfg_.vocab) throw RangeError("token out of range");
    for (std::size_t i = 0; i < layout.size(); ++i) {
        if (layout.spatial_pos[i] < 0 || layout.spatial_pos[i] >= cfg_.tokens_per_frame ||
            layout.temporal_pos[i] < 0 || layout.temporal_pos[i] >= cfg_.max_frames)
            throw RangeError("layout position out of range");
    }
}

Mat VideoModel::embed(const std::vector<int>& tokens, const SequenceLayout& layout) const {
    check_tokens(tokens, layout);
    const long n = static_cast<long>(tokens.size());
    Mat z(n, cfg_.width);
    for (long i = 0; i < n; ++i)
        z.row(i) = tok_emb_.row(tokens[i]) + spa_emb_.row(layout.spatial_pos[i]) +
                   tmp_emb_.row(layout.temporal_pos[i]);
    return z;
}

// ---------------------------------------------------------------------------
// Forward
// ---------------------------------------------------------------------------

namespace {

double matrix_rms(const Mat& m) { return std::sqrt(m.squaredNorm() / static_cast<double>(m.size())); }

}  // namespace

Mat VideoModel::forward_internal(const std::vector<int>& tokens, const SequenceLayout& layout,
                                 Workspace* ws, std::vector<double>* site_rms) const {
    const long n = static_cast<long>(tokens.size());
    const int w = cfg_.width;
    const int nh = cfg_.n_heads();
    const int dh = cfg_.head_dim;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

    Mat z = embed(tokens, layout);
    if (site_rms) site_rms->push_back(matrix_rms(z));
    if (ws) ws->layers.resize(layers_.size());

    for (std::size_t li = 0; li < layers_.size(); ++li) {
        const Layer& L = layers_[li];
        LayerCache local;
        LayerCache& C = ws ? ws->layers[li] : local;
        C.x = z;

        Mat h1 = nn::layer_norm(z, L.ln1_g, L.ln1_b, &C.ln1);
        C.q = (h1 * L.wq).rowwise() + L.bq.transpose();
        C.k = (h1 * L.wk).rowwise() + L.bk.transpose();
        C.v = (h1 * L.wv).rowwise() + L.bv.transpose();

        C.att_concat.resize(n, w);
        C.probs.assign(nh, Mat());
        for (int h = 0; h < nh; ++h) {
            const auto Q = C.q.middleCols(h * dh, dh);
            const auto K = C.k.middleCols(h * dh, dh);
            const auto V = C.v.middleCols(h * dh, dh);
            Mat s = Q * K.transpose() * scale;
            for (long r = 0; r < n; ++r)
                for (long c = r + 1; c < n; ++c) s(r, c) = -std::numeric_limits<double>::infinity();
            C.probs[h] = nn::softmax_rows(s);
            C.att_concat.middleCols(h * dh, dh) = C.probs[h] * V;
        }
        Mat att = (C.att_concat * L.wo).rowwise() + L.bo.transpose();
        C.x2 = z + att;

        Mat h2 = nn::layer_norm(C.x2, L.ln2_g, L.ln2_b, &C.ln2);
        C.ffn_pre = (h2 * L.w1).rowwise() + L.b1.transpose();
        Mat a = nn::gelu(C.ffn_pre);
        z = C.x2 + ((a * L.w2).rowwise() + L.b2.transpose());
        if (site_rms) site_rms->push_back(matrix_rms(z));
    }

    LayerNormCache lnf_local;
    LayerNormCache& lnf = ws ? ws->lnf : lnf_local;
    Mat hf = nn::layer_norm(z, lnf_g_, lnf_b_, &lnf);
    if (ws) ws->final_norm = hf;
    Mat logits = hf * tok_emb_.transpose() * logit_mult_;
    if (site_rms) site_rms->push_back(matrix_rms(logits));
    return logits;
}

Mat VideoModel::forward(const std::vector<int>& tokens, const SequenceLayout& layout) const {
    check_tokens(tokens, layout);
    return forward_internal(tokens, layout, nullptr, nullptr);
}

// ---------------------------------------------------------------------------
// Loss and backward
// ---------------------------------------------------------------------------

double VideoModel::nll_loss(const Mat& logits, const std::vector<int>& targets, Mat* d_logits) {
    if (static_cast<long>(targets.size()) != logits.rows())
        throw ShapeError("nll_loss: target count does not match logit rows");
    const long n = logits.rows();
    Mat probs = nn::softmax_rows(logits);
    double loss = 0.0;
    for (long i = 0; i < n; ++i) loss -= std::log(std::max(probs(i, targets[i]), 1e-300));
    loss /= static_cast<double>(n);
    if (d_logits) {
        *d_logits = probs / static_cast<double>(n);
        for (long i = 0; i < n; ++i) (*d_logits)(i, targets[i]) -= 1.0 / static_cast<double>(n);
    }
    return loss;
}

void VideoModel::backward_internal(const std::vector<int>& tokens, const SequenceLayout& layout,
                                   const Workspace& ws, const Mat& d_logits) {
    const long n = static_cast<long>(tokens.size());
    const int w = cfg_.width;
    const int nh = cfg_.n_heads();
    const int dh = cfg_.head_dim;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

    // logits = final_norm * tok_emb^T * logit_mult (tied projection)
    Mat d_hf = d_logits * tok_emb_ * logit_mult_;
    d_tok_emb_ += d_logits.transpose() * ws.final_norm * logit_mult_;

    // final layer norm: recover its input from the last layer cache chain
    Mat dz = nn::layer_norm_backward(d_hf, ws.lnf, lnf_g_, d_lnf_g_, d_lnf_b_);

    for (long li = static_cast<long>(layers_.size()) - 1; li >= 0; --li) {
        Layer& L = layers_[li];
        const LayerCache& C = ws.layers[li];

        // FFN branch: z_out = x2 + gelu(h2*w1 + b1)*w2 + b2
        Mat a = nn::gelu(C.ffn_pre);
        Mat d_a = dz * L.w2.transpose();
        L.d_w2 += a.transpose() * dz;
        L.d_b2 += dz.colwise().sum().transpose();
        Mat d_pre = d_a.cwiseProduct(nn::gelu_grad(C.ffn_pre));
        // h2 = xhat * gamma + beta, reconstructed from the LN cache
        Mat h2_full = (C.ln2.xhat.array().rowwise() * L.ln2_g.transpose().array()).matrix();
        h2_full.rowwise() += L.ln2_b.transpose();
        L.d_w1 += h2_full.transpose() * d_pre;
        L.d_b1 += d_pre.colwise().sum().transpose();
        Mat d_h2 = d_pre * L.w1.transpose();
        Mat d_x2 = dz + nn::layer_norm_backward(d_h2, C.ln2, L.ln2_g, L.d_ln2_g, L.d_ln2_b);

        // attention branch: x2 = x + att_concat*wo + bo
        Mat d_att = d_x2 * L.wo.transpose();
        L.d_wo += C.att_concat.transpose() * d_x2;
        L.d_bo += d_x2.colwise().sum().transpose();

        Mat d_q = Mat::Zero(n, w);
        Mat d_k = Mat::Zero(n, w);
        Mat d_v = Mat::Zero(n, w);
        for (int h = 0; h < nh; ++h) {
            const auto Q = C.q.middleCols(h * dh, dh);
            const auto K = C.k.middleCols(h * dh, dh);
            const auto V = C.v.middleCols(h * dh, dh);
            const Mat& P = C.probs[h];
            const auto d_o = d_att.middleCols(h * dh, dh);
            Mat d_p = d_o * V.transpose();
            d_v.middleCols(h * dh, dh) = P.transpose() * d_o;
            // softmax rows backward; masked entries have P=0 so d_s=0 there
            Mat d_s(n, n);
            for (long r = 0; r < n; ++r) {
                const double dot = d_p.row(r).cwiseProduct(P.row(r)).sum();
                d_s.row(r) = P.row(r).cwiseProduct((d_p.row(r).array() - dot).matrix());
            }
            d_q.middleCols(h * dh, dh) = d_s * K * scale;
            d_k.middleCols(h * dh, dh) = d_s.transpose() * Q * scale;
        }

        Mat h1_full = (C.ln1.xhat.array().rowwise() * L.ln1_g.transpose().array()).matrix();
        h1_full.rowwise() += L.ln1_b.transpose();
        L.d_wq += h1_full.transpose() * d_q;
        L.d_wk += h1_full.transpose() * d_k;
        L.d_wv += h1_full.transpose() * d_v;
        L.d_bq += d_q.colwise().sum().transpose();
        L.d_bk += d_k.colwise().sum().transpose();
        L.d_bv += d_v.colwise().sum().transpose();
        Mat d_h1 = d_q * L.wq.transpose() + d_k * L.wk.transpose() + d_v * L.wv.transpose();
        dz = d_x2 + nn::layer_norm_backward(d_h1, C.ln1, L.ln1_g, L.d_ln1_g, L.d_ln1_b);
    }

    // embedding lookups
    for (long i = 0; i < n; ++i) {
        d_tok_emb_.row(tokens[i]) += dz.row(i);
        d_spa_emb_.row(layout.spatial_pos[i]) += dz.row(i);
        d_tmp_emb_.row(layout.temporal_pos[i]) += dz.row(i);
    }
}

double VideoModel::loss_and_grad(const std::vector<std::vector<int>>& batch,
                                 const SequenceLayout& layout) {
    if (batch.empty()) throw TrainingError("video model: empty batch");
    double total = 0.0;
    for (const auto& seq : batch) {
        check_tokens(seq, layout);
        Workspace ws;
        // inputs are all positions except the last; each position predicts
        // the next token
        std::vector<int> inputs(seq.begin(), seq.end() - 1);
        std::vector<int> targets(seq.begin() + 1, seq.end());
        SequenceLayout in_layout;
        in_layout.spatial_pos.assign(layout.spatial_pos.begin(), layout.spatial_pos.end() - 1);
        in_layout.temporal_pos.assign(layout.temporal_pos.begin(), layout.temporal_pos.end() - 1);

        Mat logits = forward_internal(inputs, in_layout, &ws, nullptr);
        Mat d_logits;
        const double loss = nll_loss(logits, targets, &d_logits);
        d_logits /= static_cast<double>(batch.size());
        backward_internal(inputs, in_layout, ws, d_logits);
        total += loss;
    }
    total /= static_cast<double>(batch.size());
    if (!std::isfinite(total)) throw TrainingError("video model: non-finite loss");
    return total;
}

// ---------------------------------------------------------------------------
// KV-cached decoding
// ---------------------------------------------------------------------------

Vec VideoModel::decode_step(int token, int spatial, int temporal, KVCache& cache) const {
    if (cache.length >= cache.capacity) throw ContextError("KV cache overflow");
    const int w = cfg_.width;
    const int nh = cfg_.n_heads();
    const int dh = cfg_.head_dim;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

    Eigen::RowVectorXd z = tok_emb_.row(token) + spa_emb_.row(spatial) + tmp_emb_.row(temporal);
    const int pos = cache.length;

    for (std::size_t li = 0; li < layers_.size(); ++li) {
        const Layer& L = layers_[li];
        Mat zrow = z;
        Mat h1 = nn::layer_norm(zrow, L.ln1_g, L.ln1_b, nullptr);
        Eigen::RowVectorXd q = h1 * L.wq + L.bq.transpose();
        Eigen::RowVectorXd k = h1 * L.wk + L.bk.transpose();
        Eigen::RowVectorXd v = h1 * L.wv + L.bv.transpose();
        cache.keys[li].row(pos) = k;
        cache.values[li].row(pos) = v;

        Eigen::RowVectorXd att_concat(w);
        for (int h = 0; h < nh; ++h) {
            const auto K = cache.keys[li].block(0, h * dh, pos + 1, dh);
            const auto V = cache.values[li].block(0, h * dh, pos + 1, dh);
            Eigen::RowVectorXd s = q.segment(h * dh, dh) * K.transpose() * scale;
            const double m = s.maxCoeff();
            Eigen::RowVectorXd e = (s.array() - m).exp();
            e /= e.sum();
            att_concat.segment(h * dh, dh) = e * V;
        }
        Eigen::RowVectorXd att = att_concat * L.wo + L.bo.transpose();
        Eigen::RowVectorXd x2 = z + att;
        Mat x2row = x2;
        Mat h2 = nn::layer_norm(x2row, L.ln2_g, L.ln2_b, nullptr);
        Eigen::RowVectorXd pre = h2 * L.w1 + L.b1.transpose();
        Eigen::RowVectorXd a = pre.unaryExpr([](double u) { return nn::gelu(u); });
        z = x2 + (a * L.w2 + L.b2.transpose());
    }
    cache.length += 1;

    Mat zrow = z;
    Mat hf = nn::layer_norm(zrow, lnf_g_, lnf_b_, nullptr);
    return (hf * tok_emb_.transpose() * logit_mult_).row(0).transpose();
}

Mat VideoModel::forward_cached(const std::vector<int>& tokens, const SequenceLayout& layout,
                               KVCache& cache) const {
    check_tokens(tokens, layout);
    Mat logits(static_cast<long>(tokens.size()), cfg_.vocab);
    for (std::size_t i = 0; i < tokens.size(); ++i)
        logits.row(static_cast<long>(i)) =
            decode_step(tokens[i], layout.spatial_pos[i], layout.temporal_pos[i], cache).transpose();
    return logits;
}

int VideoModel::sample_from_logits(const Vec& logits, const SamplingConfig& sampling, Rng& rng) const {
    if (sampling.greedy) {
        int best = 0;
        for (int k = 1; k < logits.size(); ++k)
            if (logits(k) > logits(best)) best = k;
        return best;
    }
    Vec scaled = logits / std::max(sampling.temperature, 1e-12);
    if (sampling.top_k > 0 && sampling.top_k < logits.size()) {
        Vec sorted = scaled;
        std::nth_element(sorted.data(), sorted.data() + (sorted.size() - sampling.top_k),
                         sorted.data() + sorted.size());
        const double cutoff = sorted(sorted.size() - sampling.top_k);
        for (int k = 0; k < scaled.size(); ++k)
            if (scaled(k) < cutoff) scaled(k) = -std::numeric_limits<double>::infinity();
    }
    const double m = scaled.maxCoeff();
    Vec p = (scaled.array() - m).exp();
    p /= p.sum();
    const double u = rng.uniform();
    double acc = 0.0;
    for (int k = 0; k < p.size(); ++k) {
        acc += p(k);
        if (u < acc) return k;
    }
    return static_cast<int>(p.size()) - 1;
}

std::vector<int> VideoModel::generate(const std::vector<int>& context, int n_context_frames,
                                      int n_new_frames, const SamplingConfig& sampling,
                                      KVCache* cache) const {
    if (context.empty()) throw ContextError("generate: context must be nonempty");
    const int tpf = cfg_.tokens_per_frame;
    if (static_cast<int>(context.size()) != n_context_frames * tpf)
        throw ShapeError("generate: context length does not match frame count");
    const int total = static_cast<int>(context.size()) + n_new_frames * tpf;
    if (total > cfg_.max_context()) throw ContextError("generate: context overflow");

    Rng rng(sampling.seed);
    std::vector<int> tokens = context;
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(n_new_frames) * tpf);

    if (cache) {
        cache->reset(cfg_.n_layers, cfg_.max_context(), cfg_.width);
        SequenceLayout ctx_layout = SequenceLayout::frames(n_context_frames, tpf);
        Mat prefill = forward_cached(context, ctx_layout, *cache);
        Vec logits = prefill.row(prefill.rows() - 1).transpose();
        for (int i = 0; i < n_new_frames * tpf; ++i) {
            const int next = sample_from_logits(logits, sampling, rng);
            out.push_back(next);
            tokens.push_back(next);
            if (i + 1 == n_new_frames * tpf) break;
            const int pos = static_cast<int>(tokens.size()) - 1;
            logits = decode_step(next, pos % tpf, pos / tpf, *cache);
        }
    } else {
        for (int i = 0; i < n_new_frames * tpf; ++i) {
            const int n_tok = static_cast<int>(tokens.size());
            SequenceLayout layout = SequenceLayout::frames((n_tok + tpf - 1) / tpf, tpf);
            layout.spatial_pos.resize(n_tok);
            layout.temporal_pos.resize(n_tok);
            Mat logits = forward_internal(tokens, layout, nullptr, nullptr);
            const int next = sample_from_logits(logits.row(logits.rows() - 1).transpose(), sampling, rng);
            out.push_back(next);
            tokens.push_back(next);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Context capture for the action expert
// ---------------------------------------------------------------------------

VisualContext VideoModel::encode_context(const std::vector<int>& tokens,
                                         const SequenceLayout& layout) const {
    check_tokens(tokens, layout);
    Workspace ws;
    forward_internal(tokens, layout, &ws, nullptr);
    VisualContext ctx;
    ctx.n_tokens = static_cast<int>(tokens.size());
    ctx.n_frames = layout.temporal_pos.empty() ? 0 : layout.temporal_pos.back() + 1;
    for (const auto& lc : ws.layers) {
        ctx.keys.push_back(lc.k);
        ctx.values.push_back(lc.v);
    }
    return ctx;
}

// ---------------------------------------------------------------------------
// Registry, diagnostics
// ---------------------------------------------------------------------------

std::vector<nn::ParamInfo> VideoModel::params() {
    using nn::ParamGroup;
    std::vector<nn::ParamInfo> ps;
    ps.push_back(nn::param_of("tok_emb", tok_emb_, d_tok_emb_, ParamGroup::input_embedding));
    ps.push_back(nn::param_of("spa_emb", spa_emb_, d_spa_emb_, ParamGroup::input_embedding));
    ps.push_back(nn::param_of("tmp_emb", tmp_emb_, d_tmp_emb_, ParamGroup::input_embedding));
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        auto& L = layers_[i];
        const std::string p = "layer" + std::to_string(i) + ".";
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
    return ps;
}

void VideoModel::zero_grad() {
    auto ps = params();
    nn::zero_grads(ps);
}

long VideoModel::non_embedding_params() const {
    long n = 0;
    const long w = cfg_.width;
    const long f = cfg_.ffn_mult * w;
    for (std::size_t i = 0; i < layers_.size(); ++i)
        n += 4 * w * w + 2 * w * f + 4 * w + f + w + 4 * w;  // mats + biases + LN params
    n += 2 * w;  // final LN
    return n;
}

std::vector<std::string> VideoModel::activation_sites() const {
    std::vector<std::string> sites{"embed"};
    for (std::size_t i = 0; i < layers_.size(); ++i) sites.push_back("layer" + std::to_string(i));
    sites.push_back("logits");
    return sites;
}

std::vector<double> VideoModel::activation_rms(const std::vector<std::vector<int>>& batch,
                                               const SequenceLayout& layout) const {
    std::vector<double> acc;
    for (const auto& seq : batch) {
        std::vector<double> rms;
        forward_internal(seq, layout, nullptr, &rms);
        if (acc.empty()) acc.assign(rms.size(), 0.0);
        for (std::size_t i = 0; i < rms.size(); ++i) acc[i] += rms[i] / batch.size();
    }
    return acc;
}

}  // namespace vavam::vm
