#pragma once

#include "vavam/common.hpp"
#include "vavam/image.hpp"
#include "vavam/synthetic_world.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace vavam::eval {

using world::ActionTrajectory;

// ---------------------------------------------------------------------------
// Open-loop
// ---------------------------------------------------------------------------

// min over samples of the mean pointwise L2 distance to the expert.
double min_ade(const std::vector<ActionTrajectory>& samples, const ActionTrajectory& expert);

// ---------------------------------------------------------------------------
// Frechet feature distance
// ---------------------------------------------------------------------------

struct FeatureSet {
    Mat features;  // n x f
    std::string extractor_id;
};

// ||mu_a - mu_b||^2 + tr(Sa + Sb - 2 (Sa Sb)^(1/2)), Gaussian fit with
// unbiased covariance; the matrix square root is taken by eigendecomposition
// of sqrt(Sa) Sb sqrt(Sa). Eigenvalues in [-1e-8, 0) are zeroed; anything
// more negative is a numeric error.
double frechet_distance(const FeatureSet& a, const FeatureSet& b);

// Pluggable per-image feature extractor.
class FeatureExtractor {
public:
    virtual ~FeatureExtractor() = default;
    virtual Vec extract(const Image& img) const = 0;
    virtual std::string id() const = 0;
};

// Desk default: 8x-average-pooled pixels followed by a fixed seeded random
// projection to out_dim features.
class PooledProjectionExtractor : public FeatureExtractor {
public:
    PooledProjectionExtractor(int image_h, int image_w, int out_dim = 64, std::uint64_t seed = 0);
    Vec extract(const Image& img) const override;
    std::string id() const override { return "pooled_projection"; }

private:
    int pooled_dim_;
    int image_h_, image_w_;
    Mat projection_;  // out_dim x pooled_dim
};

struct FidResult {
    double model_fid = 0.0;
    double oracle_fid = 0.0;
    int t = 0;
};

// FID@t protocol: reference features come from the 4 context frames of every
// clip; the candidate set is the model's generated frame t (1-based). The
// oracle variant scores the tokenizer reconstruction of the true future
// frame. `generate_frame(clip_idx, t)` and `reconstruct_frame(clip_idx, t)`
// supply the two candidate images.
FidResult fid_protocol(const std::vector<std::vector<Image>>& clips, int t,
                       const FeatureExtractor& extractor,
                       const std::function<Image(int clip, int t)>& generate_frame,
                       const std::function<Image(int clip, int t)>& reconstruct_frame,
                       int context_frames = 4);

// ---------------------------------------------------------------------------
// k-NN label transfer and segmentation metrics
// ---------------------------------------------------------------------------

struct LabeledFeatures {
    Mat features;             // n x f
    std::vector<int> labels;  // n
};

// Distance-weighted vote over the k nearest memory patches (Euclidean);
// k is clamped to the memory size with a warning flag.
std::vector<int> knn_label_transfer(const Mat& queries, const LabeledFeatures& memory, int k_nn,
                                    bool* clamped = nullptr);

// Mean IoU over the classes present in the ground truth.
double mean_iou(const std::vector<int>& pred, const std::vector<int>& gt, int n_classes);

// ---------------------------------------------------------------------------
// PCA visualization
// ---------------------------------------------------------------------------

struct PcaRgbResult {
    Image image;
    int rank = 0;
    bool rank_deficient = false;
};

// Top-3 principal components of (h*w) x f features mapped to RGB with
// per-channel min-max normalization. Missing components render as zeros.
PcaRgbResult pca_rgb(const Mat& features, int grid_h, int grid_w);

}  // namespace vavam::eval
