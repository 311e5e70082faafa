#include "vavam/evaluation.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace vavam::eval {

double min_ade(const std::vector<ActionTrajectory>& samples, const ActionTrajectory& expert) {
    if (samples.empty()) throw ShapeError("min_ade: need at least one sample");
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : samples) {
        if (s.size() != expert.size()) throw ShapeError("min_ade: horizon mismatch");
        double ade = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i)
            ade += std::hypot(s[i][0] - expert[i][0], s[i][1] - expert[i][1]);
        ade /= static_cast<double>(s.size());
        best = std::min(best, ade);
    }
    return best;
}

// ---------------------------------------------------------------------------
// Frechet distance
// ---------------------------------------------------------------------------

namespace {

void gaussian_fit(const Mat& x, Vec& mu, Mat& sigma) {
    const long n = x.rows();
    mu = x.colwise().mean().transpose();
    Mat centered = x.rowwise() - mu.transpose();
    sigma = centered.transpose() * centered / static_cast<double>(n - 1);
}

// Symmetric PSD square root via eigendecomposition; slightly negative
// eigenvalues (>= -1e-8) are zeroed.
Mat psd_sqrt(const Mat& m) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.transpose()));
    if (es.info() != Eigen::Success) throw NumericError("psd_sqrt: eigendecomposition failed");
    Vec ev = es.eigenvalues();
    for (long i = 0; i < ev.size(); ++i) {
        if (ev(i) < -1e-8) throw NumericError("psd_sqrt: matrix is not PSD");
        ev(i) = std::max(ev(i), 0.0);
    }
    return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

double frechet_distance(const FeatureSet& a, const FeatureSet& b) {
    if (a.features.cols() != b.features.cols())
        throw ShapeError("frechet_distance: feature dims differ");
    if (a.features.rows() < 2 || b.features.rows() < 2)
        throw StatsError("frechet_distance: need at least 2 samples per set");
    if (!a.features.allFinite() || !b.features.allFinite())
        throw NumericError("frechet_distance: non-finite features");

    Vec mu_a, mu_b;
    Mat sig_a, sig_b;
    gaussian_fit(a.features, mu_a, sig_a);
    gaussian_fit(b.features, mu_b, sig_b);
    if (!sig_a.allFinite() || !sig_b.allFinite())
        throw NumericError("frechet_distance: non-finite covariance");

    const Mat root_a = psd_sqrt(sig_a);
    const Mat cross = psd_sqrt(root_a * sig_b * root_a);
    const double mean_term = (mu_a - mu_b).squaredNorm();
    const double trace_term = sig_a.trace() + sig_b.trace() - 2.0 * cross.trace();
    return mean_term + trace_term;
}

PooledProjectionExtractor::PooledProjectionExtractor(int image_h, int image_w, int out_dim,
                                                     std::uint64_t seed)
    : image_h_(image_h), image_w_(image_w) {
    const int ph = image_h / 8;
    const int pw = image_w / 8;
    pooled_dim_ = ph * pw * 3;
    Rng rng(derive_seed(seed, "feature_extractor"));
    projection_.resize(out_dim, pooled_dim_);
    const double std = 1.0 / std::sqrt(static_cast<double>(pooled_dim_));
    for (long i = 0; i < projection_.size(); ++i) projection_.data()[i] = rng.gauss(0.0, std);
}

Vec PooledProjectionExtractor::extract(const Image& img) const {
    if (img.height != image_h_ || img.width != image_w_)
        throw ShapeError("feature extractor: image size mismatch");
    const int ph = image_h_ / 8;
    const int pw = image_w_ / 8;
    Vec pooled = Vec::Zero(pooled_dim_);
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < image_h_; ++y)
            for (int x = 0; x < image_w_; ++x)
                pooled((c * ph + y / 8) * pw + x / 8) += img.at(y, x, c) / (255.0 * 64.0);
    return projection_ * pooled;
}

FidResult fid_protocol(const std::vector<std::vector<Image>>& clips, int t,
                       const FeatureExtractor& extractor,
                       const std::function<Image(int clip, int t)>& generate_frame,
                       const std::function<Image(int clip, int t)>& reconstruct_frame,
                       int context_frames) {
    if (clips.size() < 2) throw StatsError("fid_protocol: need at least 2 clips");
    if (t < 1) throw DomainError("fid_protocol: t is 1-based");
    for (const auto& clip : clips)
        if (static_cast<int>(clip.size()) < context_frames + t)
            throw ShapeError("fid_protocol: clip too short for requested t");

    const long n_clips = static_cast<long>(clips.size());
    Mat reference(n_clips * context_frames, 0);
    Mat model_set(n_clips, 0), oracle_set(n_clips, 0);
    for (long i = 0; i < n_clips; ++i) {
        for (int f = 0; f < context_frames; ++f) {
            Vec feat = extractor.extract(clips[i][f]);
            if (reference.cols() == 0) reference.resize(n_clips * context_frames, feat.size());
            reference.row(i * context_frames + f) = feat.transpose();
        }
        Vec gen = extractor.extract(generate_frame(static_cast<int>(i), t));
        Vec rec = extractor.extract(reconstruct_frame(static_cast<int>(i), t));
        if (model_set.cols() == 0) {
            model_set.resize(n_clips, gen.size());
            oracle_set.resize(n_clips, rec.size());
        }
        model_set.row(i) = gen.transpose();
        oracle_set.row(i) = rec.transpose();
    }

    FeatureSet ref{reference, extractor.id()};
    FidResult out;
    out.t = t;
    out.model_fid = frechet_distance(ref, FeatureSet{model_set, extractor.id()});
    out.oracle_fid = frechet_distance(ref, FeatureSet{oracle_set, extractor.id()});
    return out;
}

// ---------------------------------------------------------------------------
// k-NN label transfer
// ---------------------------------------------------------------------------

std::vector<int> knn_label_transfer(const Mat& queries, const LabeledFeatures& memory, int k_nn,
                                    bool* clamped) {
    if (memory.features.rows() == 0) throw ConfigError("knn_label_transfer: empty memory");
    if (memory.features.cols() != queries.cols())
        throw ShapeError("knn_label_transfer: feature dims differ");
    if (clamped) *clamped = false;
    int k = k_nn;
    if (k > memory.features.rows()) {
        k = static_cast<int>(memory.features.rows());
        if (clamped) *clamped = true;
    }
    const int n_classes = 1 + *std::max_element(memory.labels.begin(), memory.labels.end());

    std::vector<int> out(queries.rows());
    std::vector<std::pair<double, int>> dist(memory.features.rows());
    for (long qi = 0; qi < queries.rows(); ++qi) {
        for (long mi = 0; mi < memory.features.rows(); ++mi)
            dist[mi] = {(memory.features.row(mi) - queries.row(qi)).squaredNorm(),
                        static_cast<int>(mi)};
        std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
        std::vector<double> votes(n_classes, 0.0);
        for (int i = 0; i < k; ++i) {
            const double w = 1.0 / (std::sqrt(dist[i].first) + 1e-8);
            votes[memory.labels[dist[i].second]] += w;
        }
        out[qi] = static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
    }
    return out;
}

double mean_iou(const std::vector<int>& pred, const std::vector<int>& gt, int n_classes) {
    if (pred.size() != gt.size()) throw ShapeError("mean_iou: shape mismatch");
    std::vector<long> inter(n_classes, 0), uni(n_classes, 0);
    std::vector<bool> in_gt(n_classes, false);
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const int p = pred[i];
        const int g = gt[i];
        if (p < 0 || p >= n_classes || g < 0 || g >= n_classes)
            throw RangeError("mean_iou: label out of range");
        in_gt[g] = true;
        if (p == g) {
            inter[g] += 1;
            uni[g] += 1;
        } else {
            uni[g] += 1;
            uni[p] += 1;
        }
    }
    double sum = 0.0;
    int count = 0;
    for (int c = 0; c < n_classes; ++c) {
        if (!in_gt[c]) continue;  // classes absent from gt are excluded
        sum += static_cast<double>(inter[c]) / static_cast<double>(uni[c]);
        count += 1;
    }
    return count > 0 ? sum / count : 0.0;
}

// ---------------------------------------------------------------------------
// PCA to RGB
// ---------------------------------------------------------------------------

PcaRgbResult pca_rgb(const Mat& features, int grid_h, int grid_w) {
    if (features.cols() < 3) throw ShapeError("pca_rgb: need at least 3 feature dims");
    if (features.rows() != static_cast<long>(grid_h) * grid_w)
        throw ShapeError("pca_rgb: rows must equal grid_h*grid_w");

    Mat centered = features.rowwise() - features.colwise().mean();
    Eigen::SelfAdjointEigenSolver<Mat> es(centered.transpose() * centered);
    if (es.info() != Eigen::Success) throw NumericError("pca_rgb: eigendecomposition failed");

    PcaRgbResult res;
    res.image = Image(grid_h, grid_w);
    const long f = features.cols();
    // eigenvalues ascend; take the top 3
    const double total = std::max(es.eigenvalues().maxCoeff(), 1e-300);
    for (int comp = 0; comp < 3; ++comp) {
        const long idx = f - 1 - comp;
        const double ev = es.eigenvalues()(idx);
        if (ev <= 1e-9 * total) {
            res.rank_deficient = true;
            continue;  // channel stays zero
        }
        res.rank += 1;
        Vec dir = es.eigenvectors().col(idx);
        // deterministic sign: largest-magnitude loading is positive
        long arg_max = 0;
        dir.cwiseAbs().maxCoeff(&arg_max);
        if (dir(arg_max) < 0.0) dir = -dir;
        Vec proj = centered * dir;
        const double lo = proj.minCoeff();
        const double hi = proj.maxCoeff();
        const double span = std::max(hi - lo, 1e-12);
        for (int y = 0; y < grid_h; ++y)
            for (int x = 0; x < grid_w; ++x) {
                const double v = (proj(static_cast<long>(y) * grid_w + x) - lo) / span;
                res.image.at(y, x, comp) = static_cast<std::uint8_t>(std::lround(v * 255.0));
            }
    }
    return res;
}

}  // namespace vavam::eval
