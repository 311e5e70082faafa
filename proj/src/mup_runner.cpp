#include "vavam/mup_runner.hpp"

namespace vavam::scaling {

CoordinateTrace run_vavim_coordinate_trace(int width, const MuPConfig& base, bool use_mup,
                                           const vm::VaViMConfig& shape,
                                           const std::vector<std::vector<int>>& batch,
                                           const vm::SequenceLayout& layout, int n_steps,
                                           std::uint64_t seed) {
    vm::VaViMConfig cfg = shape;
    cfg.width = width;
    const MuPSettings settings =
        use_mup ? mup_scale(base, width, cfg.head_dim) : naive_scale(base, width, cfg.head_dim);
    vm::VideoModel model(cfg, settings, seed);

    nn::AdamWConfig opt_cfg;
    opt_cfg.lr = base.base_lr;
    opt_cfg.beta1 = base.beta1;
    opt_cfg.beta2 = base.beta2;
    opt_cfg.weight_decay = base.weight_decay;
    opt_cfg.grad_clip = base.grad_clip;
    nn::AdamW opt(opt_cfg);

    CoordinateTrace trace;
    trace.width = width;
    trace.sites = model.activation_sites();

    // the layout passed in covers full sequences; training drops the last
    // position (next-token targets), so probe with the same truncated layout
    vm::SequenceLayout probe_layout;
    probe_layout.spatial_pos.assign(layout.spatial_pos.begin(), layout.spatial_pos.end() - 1);
    probe_layout.temporal_pos.assign(layout.temporal_pos.begin(), layout.temporal_pos.end() - 1);
    std::vector<std::vector<int>> probe_batch;
    for (const auto& seq : batch) probe_batch.emplace_back(seq.begin(), seq.end() - 1);

    auto ps = model.params();
    for (int step = 0; step < n_steps; ++step) {
        nn::zero_grads(ps);
        try {
            model.loss_and_grad(batch, layout);
        } catch (const TrainingError&) {
            trace.diverged = true;
            break;
        }
        opt.step(ps, [&settings](nn::ParamGroup g) { return settings.lr_mult_for(g); });
        std::vector<double> rms = model.activation_rms(probe_batch, probe_layout);
        bool finite = true;
        for (double v : rms) finite = finite && std::isfinite(v);
        trace.rms.push_back(std::move(rms));
        if (!finite) {
            trace.diverged = true;
            break;
        }
    }
    return trace;
}

}  // namespace vavam::scaling
