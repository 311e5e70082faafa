#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "test_util.hpp"
#include "vavam/nn.hpp"
#include "vavam/synthetic_world.hpp"
#include "vavam/vq_tokenizer.hpp"

using namespace vavam;
using namespace vavam::vq;

namespace {

TokenizerConfig small_config() {
    TokenizerConfig cfg;
    cfg.vocab = 8;
    cfg.dim = 4;
    cfg.image_height = 32;
    cfg.image_width = 32;
    cfg.c1 = 6;
    cfg.c2 = 8;
    return cfg;
}

std::vector<Image> world_batch(int n, int image_size, std::uint64_t seed) {
    world::WorldConfig wc;
    wc.image_height = image_size;
    wc.image_width = image_size;
    wc.seed = seed;
    wc.n_agents = 2;
    const auto ep = world::generate_episode(wc, n);
    return ep.frames;
}

// exhaustive argmin over all codebook entries, squared Euclidean
int brute_force_nearest(const Vec& cell, const Mat& codebook) {
    int best = 0;
    double best_d = (codebook.row(0).transpose() - cell).squaredNorm();
    for (int k = 1; k < codebook.rows(); ++k) {
        const double d = (codebook.row(k).transpose() - cell).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = k;
        }
    }
    return best;
}

}  // namespace

TEST_CASE("quantize: trivial cases and exact matches") {
    SUBCASE("K=1 maps every cell to index 0") {
        Mat codebook = Mat::Random(1, 2);
        Volume feats(2, 3, 3);
        for (auto& v : feats.data) v = 0.37;
        const auto [grid, e_q] = quantize(feats, codebook);
        for (int idx : grid.indices) CHECK(idx == 0);
    }
    SUBCASE("a feature equal to entry 5 maps to index 5 with zero residual") {
        Rng rng(1);
        Mat codebook(8, 3);
        for (long i = 0; i < codebook.size(); ++i) codebook.data()[i] = rng.gauss();
        Volume feats(3, 1, 1);
        for (int c = 0; c < 3; ++c) feats.at(c, 0, 0) = codebook(5, c);
        const auto [grid, e_q] = quantize(feats, codebook);
        CHECK(grid.at(0, 0) == 5);
        double residual = 0.0;
        for (int c = 0; c < 3; ++c) residual += std::pow(e_q.at(c, 0, 0) - feats.at(c, 0, 0), 2);
        CHECK(residual == 0.0);
    }
    SUBCASE("ties break to the lowest index") {
        Mat codebook(3, 2);
        codebook << 1.0, 0.0, 1.0, 0.0, -1.0, 0.0;  // entries 0 and 1 identical
        Volume feats(2, 1, 1);
        feats.at(0, 0, 0) = 0.9;
        feats.at(1, 0, 0) = 0.0;
        CHECK(quantize(feats, codebook).first.at(0, 0) == 0);
    }
    SUBCASE("dimension mismatch is a shape error") {
        Mat codebook = Mat::Zero(4, 3);
        Volume feats(2, 2, 2);
        CHECK_THROWS_AS(quantize(feats, codebook), ShapeError);
    }
}

TEST_CASE("quantize matches the exhaustive oracle on random inputs") {
    Rng rng(42);
    for (int trial = 0; trial < 1000; ++trial) {
        const int K = 2 + static_cast<int>(rng.uniform_int(7));
        const int d = 1 + static_cast<int>(rng.uniform_int(4));
        Mat codebook(K, d);
        for (long i = 0; i < codebook.size(); ++i) codebook.data()[i] = rng.gauss();
        Volume feats(d, 4, 4);
        for (auto& v : feats.data) v = rng.gauss();
        const auto [grid, e_q] = quantize(feats, codebook);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                Vec cell(d);
                for (int c = 0; c < d; ++c) cell(c) = feats.at(c, i, j);
                CHECK(grid.at(i, j) == brute_force_nearest(cell, codebook));
                for (int c = 0; c < d; ++c) CHECK(e_q.at(c, i, j) == codebook(grid.at(i, j), c));
            }
    }
}

TEST_CASE("quantization is idempotent") {
    Rng rng(7);
    Mat codebook(16, 5);
    for (long i = 0; i < codebook.size(); ++i) codebook.data()[i] = rng.gauss();
    Volume feats(5, 6, 6);
    for (auto& v : feats.data) v = rng.gauss();
    const auto [grid, e_q] = quantize(feats, codebook);
    const auto [grid2, e_q2] = quantize(e_q, codebook);
    CHECK(grid == grid2);
}

TEST_CASE("encode_frame shape, determinism and error paths") {
    Tokenizer tok(TokenizerConfig{}, 3);  // default 64x64, stride 8
    const auto frames = world_batch(2, 64, 5);
    const TokenGrid a = tok.encode_frame(frames[0]);
    const TokenGrid b = tok.encode_frame(frames[0]);
    CHECK(a == b);
    CHECK(a.height == 8);
    CHECK(a.width == 8);

    Image wrong(32, 32);
    CHECK_THROWS_AS(tok.encode_frame(wrong), ShapeError);
}

TEST_CASE("all-zero frame reduces to the smallest-norm codebook entry") {
    // with zero conv biases the encoder is linear around zero input, so a
    // black frame produces exactly zero features
    Tokenizer tok(small_config(), 9);
    Image black(32, 32);
    const TokenGrid grid = tok.encode_frame(black);
    int expected = 0;
    double best = tok.codebook().row(0).squaredNorm();
    for (int k = 1; k < tok.config().vocab; ++k)
        if (tok.codebook().row(k).squaredNorm() < best) {
            best = tok.codebook().row(k).squaredNorm();
            expected = k;
        }
    for (int idx : grid.indices) CHECK(idx == expected);
}

TEST_CASE("decode_tokens: shape round trip, range error, receptive field") {
    Tokenizer tok(small_config(), 13);
    const auto frames = world_batch(1, 32, 5);
    const TokenGrid grid = tok.encode_frame(frames[0]);
    const Image rec = tok.decode_tokens(grid);
    CHECK(rec.height == frames[0].height);
    CHECK(rec.width == frames[0].width);

    TokenGrid bad = grid;
    bad.at(0, 0) = tok.config().vocab;
    CHECK_THROWS_AS(tok.decode_tokens(bad), RangeError);

    // flipping one latent cell only changes pixels inside its receptive field
    TokenGrid flipped = grid;
    const int cy = 2, cx = 1;
    flipped.at(cy, cx) = (grid.at(cy, cx) + 1) % tok.config().vocab;
    const Image rec2 = tok.decode_tokens(flipped);
    const auto rf = tok.decoder_receptive_field(cy, cx);
    for (int y = 0; y < rec.height; ++y)
        for (int x = 0; x < rec.width; ++x) {
            const bool inside = y >= rf[0] && y < rf[2] && x >= rf[1] && x < rf[3];
            if (!inside)
                for (int c = 0; c < 3; ++c) CHECK(rec.at(y, x, c) == rec2.at(y, x, c));
        }
}

TEST_CASE("straight-through: commitment 0 leaves only the reconstruction gradient") {
    TokenizerConfig cfg = small_config();
    cfg.beta_commit = 0.0;
    Tokenizer tok(cfg, 21);
    const auto batch = world_batch(2, 32, 7);
    const auto frozen = tok.make_frozen(batch);

    auto ps = tok.params();
    nn::zero_grads(ps);
    tok.loss_and_grad(batch, &frozen);

    // finite differences of the reconstruction term alone must match the
    // encoder gradients: the straight-through estimator copies the decoder
    // input gradient to the encoder output unchanged
    Rng rng(3);
    for (int probe = 0; probe < 12; ++probe) {
        std::size_t pi;
        do {
            pi = rng.uniform_int(ps.size());
        } while (ps[pi].name.rfind("enc", 0) != 0);
        const std::size_t ei = rng.uniform_int(ps[pi].size());
        const double fd = test_util::central_diff(&ps[pi].value[ei], 1e-6, [&] {
            return tok.loss_only(batch, &frozen).reconstruction;
        });
        CHECK(test_util::rel_err(fd, ps[pi].grad[ei]) < 1e-3);
    }
}

TEST_CASE("tokenizer gradients match central finite differences") {
    Tokenizer tok(small_config(), 31);
    const auto batch = world_batch(2, 32, 11);
    const auto frozen = tok.make_frozen(batch);
    auto ps = tok.params();
    nn::zero_grads(ps);
    tok.loss_and_grad(batch, &frozen);

    Rng rng(5);
    for (int probe = 0; probe < 12; ++probe) {
        const std::size_t pi = rng.uniform_int(ps.size());
        const std::size_t ei = rng.uniform_int(ps[pi].size());
        const double fd = test_util::central_diff(&ps[pi].value[ei], 1e-6, [&] {
            return tok.loss_only(batch, &frozen).total();
        });
        if (std::abs(fd) < 1e-10 && std::abs(ps[pi].grad[ei]) < 1e-10) continue;
        CHECK(test_util::rel_err(fd, ps[pi].grad[ei]) < 1e-3);
    }
}

TEST_CASE("one small training step decreases the loss on a repeated frame") {
    Tokenizer tok(small_config(), 41);
    const auto frames = world_batch(1, 32, 13);
    const std::vector<Image> batch(4, frames[0]);
    const double before = tok.loss_only(batch).total();
    nn::AdamWConfig ocfg;
    ocfg.lr = 1e-4;
    nn::AdamW opt(ocfg);
    tok.train_step(batch, opt);
    const double after = tok.loss_only(batch).total();
    CHECK(after < before);
}

TEST_CASE("non-finite parameters raise a training error") {
    Tokenizer tok(small_config(), 51);
    auto ps = tok.params();
    ps[0].value[0] = std::numeric_limits<double>::quiet_NaN();
    const auto batch = world_batch(1, 32, 5);
    CHECK_THROWS_AS(tok.loss_and_grad(batch), TrainingError);
}

TEST_CASE("training improves reconstruction and uses enough of the codebook") {
    TokenizerConfig cfg;
    cfg.vocab = 64;
    cfg.dim = 8;
    cfg.image_height = 32;
    cfg.image_width = 32;
    cfg.c1 = 8;
    cfg.c2 = 12;
    Tokenizer tok(cfg, 61);

    std::vector<Image> train;
    for (std::uint64_t s = 0; s < 3; ++s) {
        const auto frames = world_batch(10, 32, 100 + s);
        train.insert(train.end(), frames.begin(), frames.end());
    }
    const auto held_out = world_batch(10, 32, 999);

    const double err_before = tok.mean_reconstruction_error(held_out);

    nn::AdamWConfig ocfg;
    ocfg.lr = 2e-3;
    nn::AdamW opt(ocfg);
    Rng rng(71);
    for (int step = 0; step < 150; ++step) {
        std::vector<Image> batch;
        for (int b = 0; b < 4; ++b) batch.push_back(train[rng.uniform_int(train.size())]);
        tok.train_step(batch, opt);
    }

    const double err_after = tok.mean_reconstruction_error(held_out);
    CHECK(err_after < err_before);
    CHECK(tok.code_usage(held_out) >= 0.25);
}
