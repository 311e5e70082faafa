#pragma once

#include "vavam/common.hpp"

#include <string>
#include <vector>

namespace vavam::nn {

// µP parameter groups: per-group learning rate and init scaling.
enum class ParamGroup {
    input_embedding,  // token / positional embedding tables (tied logits included)
    hidden,           // width x width style matrices
    vector_like,      // biases, layer-norm gains
};

// Flat view over one named parameter tensor and its gradient buffer.
struct ParamInfo {
    std::string name;
    double* value = nullptr;
    double* grad = nullptr;
    long rows = 0;
    long cols = 0;
    ParamGroup group = ParamGroup::hidden;

    long size() const { return rows * cols; }
};

inline ParamInfo param_of(const std::string& name, Mat& w, Mat& g, ParamGroup group) {
    return {name, w.data(), g.data(), w.rows(), w.cols(), group};
}
inline ParamInfo param_of(const std::string& name, Vec& w, Vec& g, ParamGroup group) {
    return {name, w.data(), g.data(), w.size(), 1, group};
}

// ---------------------------------------------------------------------------
// Activations
// ---------------------------------------------------------------------------

inline double gelu(double u) { return 0.5 * u * (1.0 + std::erf(u * M_SQRT1_2)); }

inline double gelu_grad(double u) {
    const double cdf = 0.5 * (1.0 + std::erf(u * M_SQRT1_2));
    const double pdf = std::exp(-0.5 * u * u) / std::sqrt(2.0 * M_PI);
    return cdf + u * pdf;
}

inline Mat gelu(const Mat& u) { return u.unaryExpr([](double x) { return gelu(x); }); }
inline Mat gelu_grad(const Mat& u) { return u.unaryExpr([](double x) { return gelu_grad(x); }); }

// Row-wise softmax; -inf entries come out as exact zeros.
inline Mat softmax_rows(const Mat& s) {
    Mat p(s.rows(), s.cols());
    for (long r = 0; r < s.rows(); ++r) {
        const double m = s.row(r).maxCoeff();
        Vec e = (s.row(r).array() - m).exp().matrix().transpose();
        p.row(r) = e.transpose() / e.sum();
    }
    return p;
}

// ---------------------------------------------------------------------------
// LayerNorm over rows, with cached normalization statistics.
// ---------------------------------------------------------------------------

constexpr double kLayerNormEps = 1e-5;

struct LayerNormCache {
    Mat xhat;
    Vec inv_std;
};

inline Mat layer_norm(const Mat& x, const Vec& gamma, const Vec& beta, LayerNormCache* cache) {
    const long n = x.cols();
    Mat y(x.rows(), n);
    if (cache) {
        cache->xhat.resize(x.rows(), n);
        cache->inv_std.resize(x.rows());
    }
    for (long r = 0; r < x.rows(); ++r) {
        const double mu = x.row(r).mean();
        const double var = (x.row(r).array() - mu).square().mean();
        const double inv = 1.0 / std::sqrt(var + kLayerNormEps);
        Eigen::RowVectorXd xhat = (x.row(r).array() - mu) * inv;
        y.row(r) = xhat.cwiseProduct(gamma.transpose()) + beta.transpose();
        if (cache) {
            cache->xhat.row(r) = xhat;
            cache->inv_std(r) = inv;
        }
    }
    return y;
}

// Returns dx; accumulates dgamma/dbeta.
inline Mat layer_norm_backward(const Mat& dy, const LayerNormCache& cache, const Vec& gamma,
                               Vec& dgamma, Vec& dbeta) {
    const long n = dy.cols();
    Mat dx(dy.rows(), n);
    for (long r = 0; r < dy.rows(); ++r) {
        Eigen::RowVectorXd g = dy.row(r).cwiseProduct(gamma.transpose());
        const double mean_g = g.mean();
        const double mean_gx = g.cwiseProduct(cache.xhat.row(r)).mean();
        dx.row(r) = (g.array() - mean_g - cache.xhat.row(r).array() * mean_gx) * cache.inv_std(r);
        dgamma += dy.row(r).cwiseProduct(cache.xhat.row(r)).transpose();
        dbeta += dy.row(r).transpose();
    }
    return dx;
}

// ---------------------------------------------------------------------------
// AdamW with decoupled weight decay, global-norm gradient clipping and a
// per-group learning-rate multiplier (how µP reaches the optimizer).
// ---------------------------------------------------------------------------

struct AdamWConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.95;
    double eps = 1e-8;
    double weight_decay = 0.0;
    double grad_clip = 0.0;  // 0 disables
};

class AdamW {
public:
    explicit AdamW(const AdamWConfig& cfg) : cfg_(cfg) {}

    // lr_mult_for_group scales cfg.lr per parameter group; schedule_mult is
    // the (warmup/decay) multiplier for this step.
    template <class GroupLr>
    void step(std::vector<ParamInfo>& params, GroupLr lr_mult_for_group, double schedule_mult = 1.0) {
        ensure_state(params);
        ++t_;

        double clip_scale = 1.0;
        if (cfg_.grad_clip > 0.0) {
            double sq = 0.0;
            for (const auto& p : params)
                for (long i = 0; i < p.size(); ++i) sq += p.grad[i] * p.grad[i];
            const double norm = std::sqrt(sq);
            if (norm > cfg_.grad_clip) clip_scale = cfg_.grad_clip / norm;
        }

        const double bc1 = 1.0 - std::pow(cfg_.beta1, t_);
        const double bc2 = 1.0 - std::pow(cfg_.beta2, t_);
        for (std::size_t k = 0; k < params.size(); ++k) {
            auto& p = params[k];
            const double lr = cfg_.lr * lr_mult_for_group(p.group) * schedule_mult;
            double* m = m_[k].data();
            double* v = v_[k].data();
            for (long i = 0; i < p.size(); ++i) {
                const double g = p.grad[i] * clip_scale;
                m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g;
                v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g * g;
                const double mhat = m[i] / bc1;
                const double vhat = v[i] / bc2;
                p.value[i] -= lr * (mhat / (std::sqrt(vhat) + cfg_.eps) + cfg_.weight_decay * p.value[i]);
            }
        }
    }

    void step(std::vector<ParamInfo>& params, double schedule_mult = 1.0) {
        step(params, [](ParamGroup) { return 1.0; }, schedule_mult);
    }

    long step_count() const { return t_; }

private:
    void ensure_state(const std::vector<ParamInfo>& params) {
        if (!m_.empty()) return;
        for (const auto& p : params) {
            m_.emplace_back(std::vector<double>(p.size(), 0.0));
            v_.emplace_back(std::vector<double>(p.size(), 0.0));
        }
    }

    AdamWConfig cfg_;
    long t_ = 0;
    std::vector<std::vector<double>> m_, v_;
};

inline void zero_grads(std::vector<ParamInfo>& params) {
    for (auto& p : params) std::fill(p.grad, p.grad + p.size(), 0.0);
}

}  // namespace vavam::nn
