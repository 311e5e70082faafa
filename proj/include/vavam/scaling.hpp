#pragma once

#include "vavam/common.hpp"
#include "vavam/nn.hpp"

#include <functional>
#include <string>
#include <vector>

namespace vavam::scaling {

// ---------------------------------------------------------------------------
// µP: per-layer-group scaling of learning rate and init std across widths.
// ---------------------------------------------------------------------------

struct MuPConfig {
    int base_width = 64;
    double base_lr = 0.0041;
    double base_init_std = 0.0289;
    double weight_decay = 1e-7;
    double beta1 = 0.9;
    double beta2 = 0.95;
    double grad_clip = 1.0;

    void validate() const {
        if (base_width <= 0) throw ConfigError("base_width must be positive");
        if (base_lr <= 0.0) throw ConfigError("base_lr must be positive");
    }
};

// Resolved settings for one target width. Rule table:
//   input embeddings : lr = base_lr,                init std = base_std
//   hidden (WxW)     : lr = base_lr * base/width,   init var scaled by base/width
//   biases, LN gains : lr = base_lr,                init 0 / 1
//   tied logits      : activations multiplied by base/width
struct MuPSettings {
    int width = 0;
    double lr_embedding = 0.0;
    double lr_hidden = 0.0;
    double lr_vector = 0.0;
    double std_embedding = 0.0;
    double std_hidden = 0.0;
    double logit_mult = 1.0;

    double lr_mult_for(nn::ParamGroup g) const {
        switch (g) {
            case nn::ParamGroup::input_embedding: return lr_embedding;
            case nn::ParamGroup::hidden: return lr_hidden;
            case nn::ParamGroup::vector_like: return lr_vector;
        }
        return 1.0;
    }
};

MuPSettings mup_scale(const MuPConfig& base, int target_width, int head_dim);

// The unscaled control: base lr and init std applied verbatim at every width.
MuPSettings naive_scale(const MuPConfig& base, int target_width, int head_dim);

// ---------------------------------------------------------------------------
// Warmup-Stable-Decay schedule (fractions of total steps).
// ---------------------------------------------------------------------------

struct WsdSchedule {
    double warmup_frac = 0.02;
    double stable_frac = 0.88;
    double decay_frac = 0.10;

    // lr multiplier for 0-based step index out of total_steps
    double multiplier(long step, long total_steps) const;
};

// ---------------------------------------------------------------------------
// Scaling law L(D, N) = L0 + A * D^-alpha + B * N^-beta
// ---------------------------------------------------------------------------

struct ScalingLawParams {
    double L0 = 0.0, A = 0.0, alpha = 0.0, B = 0.0, beta = 0.0;
};

struct LossPoint {
    double D = 0.0;  // training sample count
    double N = 0.0;  // non-embedding parameter count
    double loss = 0.0;
};

double predict_loss(const ScalingLawParams& p, double D, double N);

// Multi-start bounded quasi-Newton fit (L-BFGS on log-parameters with box
// bounds [1e-6, 1e3]); minimizes the mean squared error of L(D,N).
ScalingLawParams fit_scaling_law(const std::vector<LossPoint>& points, int n_starts = 24,
                                 std::uint64_t seed = 0);

// Compute-optimal frontier D = c * N^p. Derived from the stationarity
// condition dL/dD = dL/dN (equal marginal loss reduction per unit of data
// and per unit of parameters under a shared budget):
//   alpha*A*D^-(1+alpha) = beta*B*N^-(1+beta)
//   => D = (beta*B / (alpha*A))^(1/(1+beta)) * N^((1+alpha)/(1+beta))
struct Frontier {
    double coefficient = 0.0;
    double exponent = 0.0;
};

Frontier optimal_frontier(const ScalingLawParams& p);

// ---------------------------------------------------------------------------
// Coordinate check: activation RMS traces across widths.
// ---------------------------------------------------------------------------

struct CoordinateTrace {
    int width = 0;
    std::vector<std::string> sites;
    // rms[step][site], recorded after each training step
    std::vector<std::vector<double>> rms;
    bool diverged = false;
};

struct CoordinateCheckReport {
    std::vector<CoordinateTrace> traces;
    // max/min RMS ratio across widths per site, at the last recorded step
    std::vector<double> final_ratio;
    std::vector<std::string> sites;
};

CoordinateCheckReport coordinate_check(
    const std::function<CoordinateTrace(int width)>& run_width_fn, const std::vector<int>& widths);

}  // namespace vavam::scaling
