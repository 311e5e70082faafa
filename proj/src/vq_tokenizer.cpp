#include "vavam/vq_tokenizer.hpp"

#include <cmath>

namespace vavam::vq {

void TokenizerConfig::validate() const {
    if (vocab < 1) throw ConfigError("tokenizer vocab must be >= 1");
    if (dim < 1) throw ConfigError("tokenizer dim must be >= 1");
    if (stride != 8) throw ConfigError("tokenizer stride must be 8 (three stride-2 stages)");
    if (image_height % stride != 0 || image_width % stride != 0)
        throw ConfigError("image size must be divisible by the tokenizer stride");
}

// ---------------------------------------------------------------------------
// Quantization (nearest neighbor, squared Euclidean, lowest-index ties)
// ---------------------------------------------------------------------------

std::pair<TokenGrid, Volume> quantize(const Volume& features, const Mat& codebook) {
    const int d = features.channels;
    if (codebook.cols() != d) throw ShapeError("quantize: feature dim does not match codebook");
    const int h = features.height;
    const int w = features.width;
    TokenGrid grid(h, w);
    Volume e_q(d, h, w);
    Vec cell(d);
    for (int i = 0; i < h; ++i) {
        for (int j = 0; j < w; ++j) {
            for (int c = 0; c < d; ++c) cell(c) = features.at(c, i, j);
            int best = 0;
            double best_d = (codebook.row(0).transpose() - cell).squaredNorm();
            for (int k = 1; k < codebook.rows(); ++k) {
                const double dist = (codebook.row(k).transpose() - cell).squaredNorm();
                if (dist < best_d) {
                    best_d = dist;
                    best = k;
                }
            }
            grid.at(i, j) = best;
            for (int c = 0; c < d; ++c) e_q.at(c, i, j) = codebook(best, c);
        }
    }
    return {grid, e_q};
}

// ---------------------------------------------------------------------------
// Conv2d
// ---------------------------------------------------------------------------

void Conv2d::init(int in_channels, int out_channels, int s, double w_std, Rng& rng) {
    in_ch = in_channels;
    out_ch = out_channels;
    stride = s;
    weight.resize(out_ch, in_ch * 9);
    for (long i = 0; i < weight.size(); ++i) weight.data()[i] = rng.gauss(0.0, w_std);
    bias = Vec::Zero(out_ch);
    weight_grad = Mat::Zero(out_ch, in_ch * 9);
    bias_grad = Vec::Zero(out_ch);
}

Volume Conv2d::forward(const Volume& in) const {
    const int oh = in.height / stride;
    const int ow = in.width / stride;
    Volume out(out_ch, oh, ow);
    for (int oc = 0; oc < out_ch; ++oc) {
        for (int oy = 0; oy < oh; ++oy) {
            for (int ox = 0; ox < ow; ++ox) {
                double acc = bias(oc);
                for (int ic = 0; ic < in_ch; ++ic) {
                    for (int ky = 0; ky < 3; ++ky) {
                        const int iy = oy * stride + ky - 1;
                        if (iy < 0 || iy >= in.height) continue;
                        for (int kx = 0; kx < 3; ++kx) {
                            const int ix = ox * stride + kx - 1;
                            if (ix < 0 || ix >= in.width) continue;
                            acc += weight(oc, ic * 9 + ky * 3 + kx) * in.at(ic, iy, ix);
                        }
                    }
                }
                out.at(oc, oy, ox) = acc;
            }
        }
    }
    return out;
}

Volume Conv2d::backward(const Volume& in, const Volume& d_out) {
    Volume d_in(in_ch, in.height, in.width);
    for (int oc = 0; oc < out_ch; ++oc) {
        for (int oy = 0; oy < d_out.height; ++oy) {
            for (int ox = 0; ox < d_out.width; ++ox) {
                const double g = d_out.at(oc, oy, ox);
                bias_grad(oc) += g;
                for (int ic = 0; ic < in_ch; ++ic) {
                    for (int ky = 0; ky < 3; ++ky) {
                        const int iy = oy * stride + ky - 1;
                        if (iy < 0 || iy >= in.height) continue;
                        for (int kx = 0; kx < 3; ++kx) {
                            const int ix = ox * stride + kx - 1;
                            if (ix < 0 || ix >= in.width) continue;
                            weight_grad(oc, ic * 9 + ky * 3 + kx) += g * in.at(ic, iy, ix);
                            d_in.at(ic, iy, ix) += g * weight(oc, ic * 9 + ky * 3 + kx);
                        }
                    }
                }
            }
        }
    }
    return d_in;
}

Volume upsample2x(const Volume& in) {
    Volume out(in.channels, in.height * 2, in.width * 2);
    for (int c = 0; c < in.channels; ++c)
        for (int y = 0; y < out.height; ++y)
            for (int x = 0; x < out.width; ++x) out.at(c, y, x) = in.at(c, y / 2, x / 2);
    return out;
}

Volume upsample2x_backward(const Volume& d_out) {
    Volume d_in(d_out.channels, d_out.height / 2, d_out.width / 2);
    for (int c = 0; c < d_out.channels; ++c)
        for (int y = 0; y < d_out.height; ++y)
            for (int x = 0; x < d_out.width; ++x) d_in.at(c, y / 2, x / 2) += d_out.at(c, y, x);
    return d_in;
}

namespace {

Volume gelu_volume(const Volume& v) {
    Volume out = v;
    for (auto& x : out.data) x = nn::gelu(x);
    return out;
}

Volume gelu_volume_backward(const Volume& pre, const Volume& d_out) {
    Volume d = d_out;
    for (std::size_t i = 0; i < d.data.size(); ++i) d.data[i] *= nn::gelu_grad(pre.data[i]);
    return d;
}

}  // namespace

// ---------------------------------------------------------------------------
// Tokenizer
// ---------------------------------------------------------------------------

Tokenizer::Tokenizer(const TokenizerConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
    cfg_.validate();
    Rng rng(derive_seed(seed, "vq_tokenizer"));
    const double w_std = 0.05;
    enc1_.init(3, cfg_.c1, 2, w_std, rng);
    enc2_.init(cfg_.c1, cfg_.c2, 2, w_std, rng);
    // small head init keeps initial features inside the codebook's spread, so
    // early nearest-neighbor assignments cover many entries
    enc3_.init(cfg_.c2, cfg_.dim, 2, 0.01, rng);
    dec1_.init(cfg_.dim, cfg_.c2, 1, w_std, rng);
    dec2_.init(cfg_.c2, cfg_.c1, 1, w_std, rng);
    dec3_.init(cfg_.c1, 3, 1, w_std, rng);
    codebook_.resize(cfg_.vocab, cfg_.dim);
    const double r = 1.0 / cfg_.vocab;
    for (long i = 0; i < codebook_.size(); ++i) codebook_.data()[i] = rng.uniform(-r, r);
    codebook_grad_ = Mat::Zero(cfg_.vocab, cfg_.dim);
}

Volume Tokenizer::encode_features(const Image& frame) const {
    if (frame.height != cfg_.image_height || frame.width != cfg_.image_width)
        throw ShapeError("encode: frame dims do not match tokenizer config");
    Volume x = image_to_volume(frame);
    Volume a1 = enc1_.forward(x);
    Volume a2 = enc2_.forward(gelu_volume(a1));
    return enc3_.forward(gelu_volume(a2));
}

TokenGrid Tokenizer::encode_frame(const Image& frame) const {
    return quantize(encode_features(frame), codebook_).first;
}

Volume Tokenizer::decode_forward(const Volume& e_q, std::vector<Volume>* cache) const {
    Volume u1 = upsample2x(e_q);
    Volume c1 = dec1_.forward(u1);
    Volume g1 = gelu_volume(c1);
    Volume u2 = upsample2x(g1);
    Volume c2 = dec2_.forward(u2);
    Volume g2 = gelu_volume(c2);
    Volume u3 = upsample2x(g2);
    Volume out = dec3_.forward(u3);
    if (cache) *cache = {u1, c1, u2, c2, u3};
    return out;
}

Volume Tokenizer::decode_embeddings(const Volume& e_q) const { return decode_forward(e_q, nullptr); }

Image Tokenizer::decode_tokens(const TokenGrid& grid) const {
    if (grid.height != cfg_.grid_height() || grid.width != cfg_.grid_width())
        throw ShapeError("decode_tokens: grid shape mismatch");
    Volume e_q(cfg_.dim, grid.height, grid.width);
    for (int i = 0; i < grid.height; ++i)
        for (int j = 0; j < grid.width; ++j) {
            const int k = grid.at(i, j);
            if (k < 0 || k >= cfg_.vocab) throw RangeError("decode_tokens: token index out of range");
            for (int c = 0; c < cfg_.dim; ++c) e_q.at(c, i, j) = codebook_(k, c);
        }
    return volume_to_image(decode_embeddings(e_q));
}

std::vector<Tokenizer::FrozenQuant> Tokenizer::make_frozen(const std::vector<Image>& batch) const {
    std::vector<FrozenQuant> out;
    out.reserve(batch.size());
    for (const auto& frame : batch) {
        Volume e = encode_features(frame);
        auto [grid, e_q] = quantize(e, codebook_);
        Volume offset = e_q;
        for (std::size_t i = 0; i < offset.data.size(); ++i) offset.data[i] -= e.data[i];
        out.push_back({std::move(grid), std::move(e), std::move(offset)});
    }
    return out;
}

TrainStats Tokenizer::loss_and_grad(const std::vector<Image>& batch,
                                    const std::vector<FrozenQuant>* frozen) {
    if (batch.empty()) throw TrainingError("tokenizer: empty batch");
    TrainStats stats;
    const double inv_b = 1.0 / batch.size();
    const int gh = cfg_.grid_height();
    const int gw = cfg_.grid_width();
    const double n_cells = static_cast<double>(gh) * gw * cfg_.dim;
    const double n_pixels = 3.0 * cfg_.image_height * cfg_.image_width;

    for (std::size_t bi = 0; bi < batch.size(); ++bi) {
        const Image& frame = batch[bi];
        Volume x = image_to_volume(frame);

        // encoder with cached pre-activations
        Volume a1 = enc1_.forward(x);
        Volume g1 = gelu_volume(a1);
        Volume a2 = enc2_.forward(g1);
        Volume g2 = gelu_volume(a2);
        Volume e = enc3_.forward(g2);

        // decoder input is e + (e_q - e); the offset carries no gradient
        TokenGrid grid;
        Volume dec_in = e;
        if (frozen) {
            grid = (*frozen)[bi].grid;
            for (std::size_t i = 0; i < dec_in.data.size(); ++i)
                dec_in.data[i] += (*frozen)[bi].offset.data[i];
        } else {
            auto [g, e_q] = quantize(e, codebook_);
            grid = std::move(g);
            dec_in = e_q;  // numerically equal to e + (e_q - e)
        }

        std::vector<Volume> dcache;
        Volume xhat = decode_forward(dec_in, &dcache);

        // reconstruction: mean squared error over pixels
        Volume d_xhat(3, cfg_.image_height, cfg_.image_width);
        double recon = 0.0;
        for (std::size_t i = 0; i < xhat.data.size(); ++i) {
            const double diff = xhat.data[i] - x.data[i];
            recon += diff * diff;
            d_xhat.data[i] = 2.0 * diff / n_pixels * inv_b;
        }
        stats.reconstruction += recon / n_pixels * inv_b;

        // decoder backward -> gradient at the quantized embeddings
        Volume d_u3 = dec3_.backward(dcache[4], d_xhat);
        Volume d_g2d = upsample2x_backward(d_u3);
        Volume d_c2 = gelu_volume_backward(dcache[3], d_g2d);
        Volume d_u2 = dec2_.backward(dcache[2], d_c2);
        Volume d_g1d = upsample2x_backward(d_u2);
        Volume d_c1 = gelu_volume_backward(dcache[1], d_g1d);
        Volume d_u1 = dec1_.backward(dcache[0], d_c1);
        Volume d_eq = upsample2x_backward(d_u1);

        // straight-through: the reconstruction gradient at e_q is copied to
        // the encoder output unchanged
        Volume d_e = d_eq;

        // codebook term ||sg(e) - e_k||^2 and commitment beta*||e - sg(e_q)||^2
        double cb = 0.0, cm = 0.0;
        for (int i = 0; i < gh; ++i)
            for (int j = 0; j < gw; ++j) {
                const int k = grid.at(i, j);
                for (int c = 0; c < cfg_.dim; ++c) {
                    const double e_sg = frozen ? (*frozen)[bi].features.at(c, i, j) : e.at(c, i, j);
                    const double eq_sg = frozen ? (*frozen)[bi].features.at(c, i, j) +
                                                      (*frozen)[bi].offset.at(c, i, j)
                                                : codebook_(k, c);
                    const double cb_diff = e_sg - codebook_(k, c);
                    const double cm_diff = e.at(c, i, j) - eq_sg;
                    cb += cb_diff * cb_diff;
                    cm += cm_diff * cm_diff;
                    codebook_grad_(k, c) += -2.0 * cb_diff / n_cells * inv_b;
                    d_e.at(c, i, j) += cfg_.beta_commit * 2.0 * cm_diff / n_cells * inv_b;
                }
            }
        stats.codebook += cb / n_cells * inv_b;
        stats.commitment += cfg_.beta_commit * cm / n_cells * inv_b;

        // encoder backward
        Volume d_g2 = enc3_.backward(g2, d_e);
        Volume d_a2 = gelu_volume_backward(a2, d_g2);
        Volume d_g1 = enc2_.backward(g1, d_a2);
        Volume d_a1 = gelu_volume_backward(a1, d_g1);
        enc1_.backward(x, d_a1);
    }

    if (!std::isfinite(stats.total()))
        throw TrainingError("tokenizer: non-finite loss (recon=" + std::to_string(stats.reconstruction) + ")");
    return stats;
}

TrainStats Tokenizer::loss_only(const std::vector<Image>& batch,
                                const std::vector<FrozenQuant>* frozen) const {
    if (batch.empty()) throw TrainingError("tokenizer: empty batch");
    TrainStats stats;
    const double inv_b = 1.0 / batch.size();
    const int gh = cfg_.grid_height();
    const int gw = cfg_.grid_width();
    const double n_cells = static_cast<double>(gh) * gw * cfg_.dim;
    const double n_pixels = 3.0 * cfg_.image_height * cfg_.image_width;

    for (std::size_t bi = 0; bi < batch.size(); ++bi) {
        Volume x = image_to_volume(batch[bi]);
        Volume e = encode_features(batch[bi]);
        TokenGrid grid;
        Volume dec_in = e;
        if (frozen) {
            grid = (*frozen)[bi].grid;
            for (std::size_t i = 0; i < dec_in.data.size(); ++i)
                dec_in.data[i] += (*frozen)[bi].offset.data[i];
        } else {
            auto [g, e_q] = quantize(e, codebook_);
            grid = std::move(g);
            dec_in = e_q;
        }
        Volume xhat = decode_embeddings(dec_in);
        double recon = 0.0;
        for (std::size_t i = 0; i < xhat.data.size(); ++i) {
            const double diff = xhat.data[i] - x.data[i];
            recon += diff * diff;
        }
        stats.reconstruction += recon / n_pixels * inv_b;
        double cb = 0.0, cm = 0.0;
        for (int i = 0; i < gh; ++i)
            for (int j = 0; j < gw; ++j) {
                const int k = grid.at(i, j);
                for (int c = 0; c < cfg_.dim; ++c) {
                    const double e_sg = frozen ? (*frozen)[bi].features.at(c, i, j) : e.at(c, i, j);
                    const double eq_sg = frozen ? (*frozen)[bi].features.at(c, i, j) +
                                                      (*frozen)[bi].offset.at(c, i, j)
                                                : codebook_(k, c);
                    const double cb_diff = e_sg - codebook_(k, c);
                    const double cm_diff = e.at(c, i, j) - eq_sg;
                    cb += cb_diff * cb_diff;
                    cm += cm_diff * cm_diff;
                }
            }
        stats.codebook += cb / n_cells * inv_b;
        stats.commitment += cfg_.beta_commit * cm / n_cells * inv_b;
    }
    return stats;
}

TrainStats Tokenizer::train_step(const std::vector<Image>& batch, nn::AdamW& opt, double lr_mult) {
    auto ps = params();
    nn::zero_grads(ps);
    TrainStats stats = loss_and_grad(batch);
    opt.step(ps, lr_mult);
    return stats;
}

double Tokenizer::mean_reconstruction_error(const std::vector<Image>& batch) const {
    double err = 0.0;
    for (const auto& frame : batch) {
        const Image rec = decode_tokens(encode_frame(frame));
        double e = 0.0;
        for (std::size_t i = 0; i < frame.rgb.size(); ++i)
            e += std::abs(static_cast<double>(rec.rgb[i]) - static_cast<double>(frame.rgb[i])) / 255.0;
        err += e / frame.rgb.size();
    }
    return err / batch.size();
}

double Tokenizer::code_usage(const std::vector<Image>& batch) const {
    std::vector<bool> used(cfg_.vocab, false);
    for (const auto& frame : batch) {
        const TokenGrid grid = encode_frame(frame);
        for (int idx : grid.indices) used[idx] = true;
    }
    int n = 0;
    for (bool u : used) n += u ? 1 : 0;
    return static_cast<double>(n) / cfg_.vocab;
}

std::array<int, 4> Tokenizer::decoder_receptive_field(int cell_y, int cell_x) const {
    // region propagation: upsample doubles the extent, 3x3 conv pads by 1
    int y0 = cell_y, x0 = cell_x, y1 = cell_y + 1, x1 = cell_x + 1;
    for (int stage = 0; stage < 3; ++stage) {
        y0 = y0 * 2 - 1;
        x0 = x0 * 2 - 1;
        y1 = y1 * 2 + 1;
        x1 = x1 * 2 + 1;
    }
    return {std::max(0, y0), std::max(0, x0), std::min(cfg_.image_height, y1),
            std::min(cfg_.image_width, x1)};
}

std::vector<nn::ParamInfo> Tokenizer::params() {
    using nn::ParamGroup;
    std::vector<nn::ParamInfo> ps;
    auto add_conv = [&ps](const std::string& name, Conv2d& c) {
        ps.push_back(nn::param_of(name + ".weight", c.weight, c.weight_grad, ParamGroup::hidden));
        ps.push_back(nn::param_of(name + ".bias", c.bias, c.bias_grad, ParamGroup::vector_like));
    };
    add_conv("enc1", enc1_);
    add_conv("enc2", enc2_);
    add_conv("enc3", enc3_);
    add_conv("dec1", dec1_);
    add_conv("dec2", dec2_);
    add_conv("dec3", dec3_);
    ps.push_back(nn::param_of("codebook", codebook_, codebook_grad_, ParamGroup::hidden));
    return ps;
}

}  // namespace vavam::vq
