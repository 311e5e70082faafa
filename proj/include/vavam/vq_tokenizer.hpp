#pragma once

#include "vavam/common.hpp"
#include "vavam/image.hpp"
#include "vavam/nn.hpp"

#include <array>
#include <vector>

namespace vavam::vq {

struct TokenizerConfig {
    int vocab = 64;    // K
    int dim = 8;       // d, codeword dimension
    int stride = 8;    // total spatial downsampling
    int image_height = 64;
    int image_width = 64;
    int c1 = 16;  // encoder/decoder intermediate channel counts
    int c2 = 32;
    double beta_commit = 0.25;

    int grid_height() const { return image_height / stride; }
    int grid_width() const { return image_width / stride; }
    void validate() const;
};

struct TokenGrid {
    std::vector<int> indices;  // row-major, h*w
    int height = 0;
    int width = 0;

    TokenGrid() = default;
    TokenGrid(int h, int w) : indices(static_cast<std::size_t>(h) * w, 0), height(h), width(w) {}
    int& at(int i, int j) { return indices[static_cast<std::size_t>(i) * width + j]; }
    int at(int i, int j) const { return indices[static_cast<std::size_t>(i) * width + j]; }
    bool operator==(const TokenGrid& o) const {
        return height == o.height && width == o.width && indices == o.indices;
    }
};

// Nearest-neighbor lookup per grid cell; ties broken by the lowest index.
// `features` is (d, h', w'); the returned embedding map shares that shape.
std::pair<TokenGrid, Volume> quantize(const Volume& features, const Mat& codebook);

// ---------------------------------------------------------------------------
// Convolution building block (3x3, zero padding 1)
// ---------------------------------------------------------------------------

struct Conv2d {
    Mat weight;  // out_ch x (in_ch*9)
    Vec bias;    // out_ch
    Mat weight_grad;
    Vec bias_grad;
    int in_ch = 0;
    int out_ch = 0;
    int stride = 1;  // forward stride (assumes exact division)

    void init(int in_channels, int out_channels, int s, double w_std, Rng& rng);
    Volume forward(const Volume& in) const;
    // d_in is resized and filled; weight/bias grads accumulate.
    Volume backward(const Volume& in, const Volume& d_out);
};

Volume upsample2x(const Volume& in);
Volume upsample2x_backward(const Volume& d_out);

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

struct TrainStats {
    double reconstruction = 0.0;
    double codebook = 0.0;
    double commitment = 0.0;
    double total() const { return reconstruction + codebook + commitment; }
};

class Tokenizer {
public:
    explicit Tokenizer(const TokenizerConfig& cfg, std::uint64_t seed = 0);

    const TokenizerConfig& config() const { return cfg_; }
    const Mat& codebook() const { return codebook_; }
    Mat& mutable_codebook() { return codebook_; }

    // f_theta: image -> (d, h', w') features
    Volume encode_features(const Image& frame) const;
    TokenGrid encode_frame(const Image& frame) const;

    // g_theta: embedding map -> image (pixel values clamped to [0,1])
    Image decode_tokens(const TokenGrid& grid) const;
    Volume decode_embeddings(const Volume& e_q) const;

    // One optimizer step on a batch; returns the loss components.
    TrainStats train_step(const std::vector<Image>& batch, nn::AdamW& opt, double lr_mult = 1.0);

    // The training objective has three stop-gradients: the decoder sees
    // e + sg(e_q - e), the codebook term is ||sg(e) - e_k||^2 and the
    // commitment term is beta * ||e - sg(e_q)||^2. Freezing the assignment
    // and the sg() values makes the objective smooth in the parameters,
    // which is what the finite-difference tests probe.
    struct FrozenQuant {
        TokenGrid grid;
        Volume features;  // e at the reference parameters
        Volume offset;    // e_q - e at the reference parameters
    };

    std::vector<FrozenQuant> make_frozen(const std::vector<Image>& batch) const;

    // Computes gradients of the straight-through objective without stepping.
    TrainStats loss_and_grad(const std::vector<Image>& batch,
                             const std::vector<FrozenQuant>* frozen = nullptr);

    // Evaluates the same objective without touching gradients.
    TrainStats loss_only(const std::vector<Image>& batch,
                         const std::vector<FrozenQuant>* frozen = nullptr) const;

    double mean_reconstruction_error(const std::vector<Image>& batch) const;

    // Fraction of codebook entries used at least once over the batch.
    double code_usage(const std::vector<Image>& batch) const;

    // Axis-aligned pixel rectangle {y0, x0, y1, x1} (half-open) that one
    // latent cell can influence through the decoder stack.
    std::array<int, 4> decoder_receptive_field(int cell_y, int cell_x) const;

    std::vector<nn::ParamInfo> params();

private:
    TokenizerConfig cfg_;
    Conv2d enc1_, enc2_, enc3_;
    Conv2d dec1_, dec2_, dec3_;
    Mat codebook_;       // K x d
    Mat codebook_grad_;  // K x d

    Volume decode_forward(const Volume& e_q, std::vector<Volume>* cache) const;
};

}  // namespace vavam::vq
