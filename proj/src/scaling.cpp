#include "vavam/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace vavam::scaling {

// ---------------------------------------------------------------------------
// µP
// ---------------------------------------------------------------------------

MuPSettings mup_scale(const MuPConfig& base, int target_width, int head_dim) {
    base.validate();
    if (target_width < base.base_width)
        throw ConfigError("mup_scale: target width must be >= base width");
    if (head_dim > 0 && target_width % head_dim != 0)
        throw ConfigError("mup_scale: width not a multiple of head_dim");
    const double ratio = static_cast<double>(base.base_width) / target_width;
    MuPSettings s;
    s.width = target_width;
    s.lr_embedding = 1.0;          // multipliers on base_lr
    s.lr_hidden = ratio;
    s.lr_vector = 1.0;
    s.std_embedding = base.base_init_std;
    s.std_hidden = base.base_init_std * std::sqrt(ratio);
    s.logit_mult = ratio;
    return s;
}

MuPSettings naive_scale(const MuPConfig& base, int target_width, int head_dim) {
    base.validate();
    if (head_dim > 0 && target_width % head_dim != 0)
        throw ConfigError("naive_scale: width not a multiple of head_dim");
    MuPSettings s;
    s.width = target_width;
    s.lr_embedding = 1.0;
    s.lr_hidden = 1.0;
    s.lr_vector = 1.0;
    s.std_embedding = base.base_init_std;
    s.std_hidden = base.base_init_std;
    s.logit_mult = 1.0;
    return s;
}

double WsdSchedule::multiplier(long step, long total_steps) const {
    const long warmup = std::max<long>(1, std::lround(warmup_frac * total_steps));
    const long decay = std::max<long>(1, std::lround(decay_frac * total_steps));
    if (step < warmup) return static_cast<double>(step + 1) / warmup;
    if (step >= total_steps - decay)
        return static_cast<double>(total_steps - step) / decay;
    return 1.0;
}

// ---------------------------------------------------------------------------
// Scaling law
// ---------------------------------------------------------------------------

double predict_loss(const ScalingLawParams& p, double D, double N) {
    if (D < 1.0 || N < 1.0) throw DomainError("predict_loss: D and N must be >= 1");
    return p.L0 + p.A * std::pow(D, -p.alpha) + p.B * std::pow(N, -p.beta);
}

namespace {

constexpr double kLogLo = -13.815510557964274;  // ln 1e-6
constexpr double kLogHi = 6.907755278982137;    // ln 1e3

struct Objective {
    const std::vector<LossPoint>& pts;

    // u = log params, order (L0, A, alpha, B, beta)
    double eval(const Vec& u, Vec* grad) const {
        const double L0 = std::exp(u(0)), A = std::exp(u(1)), al = std::exp(u(2));
        const double B = std::exp(u(3)), be = std::exp(u(4));
        double f = 0.0;
        Vec g = Vec::Zero(5);
        for (const auto& p : pts) {
            const double da = std::pow(p.D, -al);
            const double nb = std::pow(p.N, -be);
            const double r = L0 + A * da + B * nb - p.loss;
            f += r * r;
            if (grad) {
                g(0) += 2.0 * r;                                  // d/dL0
                g(1) += 2.0 * r * da;                             // d/dA
                g(2) += 2.0 * r * (-A * std::log(p.D) * da);      // d/dalpha
                g(3) += 2.0 * r * nb;                             // d/dB
                g(4) += 2.0 * r * (-B * std::log(p.N) * nb);      // d/dbeta
            }
        }
        const double inv_n = 1.0 / pts.size();
        f *= inv_n;
        if (grad) {
            g *= inv_n;
            // chain rule to log-space
            (*grad)(0) = g(0) * L0;
            (*grad)(1) = g(1) * A;
            (*grad)(2) = g(2) * al;
            (*grad)(3) = g(3) * B;
            (*grad)(4) = g(4) * be;
        }
        return f;
    }
};

Vec project_box(Vec u) {
    for (long i = 0; i < u.size(); ++i) u(i) = std::clamp(u(i), kLogLo, kLogHi);
    return u;
}

// L-BFGS with two-loop recursion, Armijo backtracking and box projection.
double lbfgs_minimize(const Objective& obj, Vec& u, int max_iters = 400) {
    const int memory = 10;
    std::deque<Vec> s_hist, y_hist;
    Vec grad(5);
    u = project_box(u);
    double f = obj.eval(u, &grad);

    for (int iter = 0; iter < max_iters; ++iter) {
        // two-loop recursion for the search direction
        Vec q = grad;
        std::vector<double> alpha_hist(s_hist.size());
        for (long i = static_cast<long>(s_hist.size()) - 1; i >= 0; --i) {
            const double rho = 1.0 / y_hist[i].dot(s_hist[i]);
            alpha_hist[i] = rho * s_hist[i].dot(q);
            q -= alpha_hist[i] * y_hist[i];
        }
        if (!s_hist.empty()) {
            const double gamma = s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
            q *= gamma;
        }
        for (std::size_t i = 0; i < s_hist.size(); ++i) {
            const double rho = 1.0 / y_hist[i].dot(s_hist[i]);
            const double beta = rho * y_hist[i].dot(q);
            q += (alpha_hist[i] - beta) * s_hist[i];
        }
        Vec dir = -q;
        if (dir.dot(grad) > 0.0) dir = -grad;  // not a descent direction, reset

        double step = 1.0;
        double f_new = f;
        Vec u_new = u;
        bool improved = false;
        for (int ls = 0; ls < 40; ++ls) {
            u_new = project_box(u + step * dir);
            f_new = obj.eval(u_new, nullptr);
            if (f_new <= f + 1e-4 * grad.dot(u_new - u)) {
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if (!improved || !(f_new < f)) break;

        Vec grad_new(5);
        obj.eval(u_new, &grad_new);
        Vec s = u_new - u;
        Vec y = grad_new - grad;
        if (y.dot(s) > 1e-14) {
            s_hist.push_back(s);
            y_hist.push_back(y);
            if (static_cast<int>(s_hist.size()) > memory) {
                s_hist.pop_front();
                y_hist.pop_front();
            }
        }
        u = u_new;
        grad = grad_new;
        const double df = f - f_new;
        f = f_new;
        if (grad.norm() < 1e-14 || df < 1e-18 * std::max(1.0, f)) break;
    }
    return f;
}

}  // namespace

ScalingLawParams fit_scaling_law(const std::vector<LossPoint>& points, int n_starts,
                                 std::uint64_t seed) {
    if (points.size() < 5) throw FitError("fit_scaling_law: need at least 5 points");
    std::vector<double> ds, ns;
    double min_loss = std::numeric_limits<double>::infinity();
    for (const auto& p : points) {
        if (p.D < 1.0 || p.N < 1.0 || p.loss <= 0.0)
            throw FitError("fit_scaling_law: invalid point (D,N >= 1, loss > 0)");
        ds.push_back(p.D);
        ns.push_back(p.N);
        min_loss = std::min(min_loss, p.loss);
    }
    auto distinct = [](std::vector<double>& v) {
        std::sort(v.begin(), v.end());
        return std::unique(v.begin(), v.end(),
                           [](double a, double b) { return std::abs(a - b) < 1e-12; }) -
               v.begin();
    };
    if (distinct(ds) < 2 || distinct(ns) < 2)
        throw FitError("fit_scaling_law: points must span >= 2 distinct D and >= 2 distinct N");

    const Objective obj{points};
    Rng rng(derive_seed(seed, "fit_scaling_law"));

    Vec best_u(5);
    double best_f = std::numeric_limits<double>::infinity();
    for (int s = 0; s < std::max(1, n_starts); ++s) {
        Vec u(5);
        if (s == 0) {
            u << std::log(std::max(0.9 * min_loss, 1e-6)), 0.0, std::log(0.3), 0.0, std::log(0.3);
        } else {
            u << std::log(std::max(min_loss * rng.uniform(0.2, 1.0), 1e-6)),
                rng.uniform(-3.0, 2.0), std::log(rng.uniform(0.05, 1.0)),
                rng.uniform(-3.0, 2.0), std::log(rng.uniform(0.05, 1.0));
        }
        const double f = lbfgs_minimize(obj, u);
        if (f < best_f) {
            best_f = f;
            best_u = u;
        }
    }
    if (!std::isfinite(best_f)) throw FitError("fit_scaling_law: optimization failed");

    ScalingLawParams out;
    out.L0 = std::exp(best_u(0));
    out.A = std::exp(best_u(1));
    out.alpha = std::exp(best_u(2));
    out.B = std::exp(best_u(3));
    out.beta = std::exp(best_u(4));
    return out;
}

Frontier optimal_frontier(const ScalingLawParams& p) {
    if (p.L0 <= 0.0 || p.A <= 0.0 || p.alpha <= 0.0 || p.B <= 0.0 || p.beta <= 0.0)
        throw DomainError("optimal_frontier: params must be positive");
    Frontier f;
    f.exponent = (1.0 + p.alpha) / (1.0 + p.beta);
    f.coefficient = std::pow(p.beta * p.B / (p.alpha * p.A), 1.0 / (1.0 + p.beta));
    return f;
}

// ---------------------------------------------------------------------------
// Coordinate check aggregation
// ---------------------------------------------------------------------------

CoordinateCheckReport coordinate_check(
    const std::function<CoordinateTrace(int width)>& run_width_fn, const std::vector<int>& widths) {
    if (widths.empty()) throw ConfigError("coordinate_check: need at least one width");
    CoordinateCheckReport report;
    for (int w : widths) report.traces.push_back(run_width_fn(w));
    report.sites = report.traces.front().sites;
    const std::size_t n_sites = report.sites.size();
    report.final_ratio.assign(n_sites, 1.0);
    for (std::size_t s = 0; s < n_sites; ++s) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = 0.0;
        for (const auto& tr : report.traces) {
            if (tr.rms.empty()) continue;
            const double v = tr.rms.back()[s];
            if (!std::isfinite(v)) {
                hi = std::numeric_limits<double>::infinity();
                continue;
            }
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        report.final_ratio[s] = (lo > 0.0) ? hi / lo : std::numeric_limits<double>::infinity();
    }
    return report;
}

}  // namespace vavam::scaling
