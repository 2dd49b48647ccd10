#include "dmr/adam.hpp"

#include <cmath>

namespace dmr {

void AdamConfig::validate() const {
    if (!(learning_rate > 0.0)) throw UsageError("learning rate must be > 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0)) throw UsageError("adam beta1 must be in [0, 1)");
    if (!(beta2 >= 0.0 && beta2 < 1.0)) throw UsageError("adam beta2 must be in [0, 1)");
    if (!(eps > 0.0)) throw UsageError("adam eps must be > 0");
}

AdamState AdamState::zeros_like(const ModelParams& params) {
    AdamState s;
    auto shape = [](const Mat& m) { return Mat(m.rows(), m.cols()); };
    s.m_item_embeddings = shape(params.item_embeddings);
    s.v_item_embeddings = shape(params.item_embeddings);
    s.m_trend_init = shape(params.trend_init);
    s.v_trend_init = shape(params.trend_init);
    s.m_coattention = shape(params.coattention);
    s.v_coattention = shape(params.coattention);
    s.m_fusion_projection = shape(params.fusion_projection);
    s.v_fusion_projection = shape(params.fusion_projection);
    return s;
}

namespace {

void update_tensor(Mat& theta, const Mat& grad, Mat& m, Mat& v, const AdamConfig& cfg,
                   double bias1, double bias2, const char* name) {
    if (theta.size() != grad.size()) throw UsageError("gradient shape mismatch in adam_step");
    double* t = theta.data();
    const double* g = grad.data();
    double* mp = m.data();
    double* vp = v.data();
    for (std::size_t i = 0; i < theta.size(); ++i) {
        mp[i] = cfg.beta1 * mp[i] + (1.0 - cfg.beta1) * g[i];
        vp[i] = cfg.beta2 * vp[i] + (1.0 - cfg.beta2) * g[i] * g[i];
        const double m_hat = mp[i] / bias1;
        const double v_hat = vp[i] / bias2;
        t[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.eps);
        if (!std::isfinite(t[i])) {
            throw NumericError(std::string("non-finite parameter after adam update: ") + name);
        }
    }
}

}  // namespace

void adam_step(ModelParams& params, const ModelGrads& grads, AdamState& state,
               const AdamConfig& config) {
    config.validate();
    state.step += 1;
    const double bias1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
    const double bias2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
    update_tensor(params.item_embeddings, grads.item_embeddings, state.m_item_embeddings,
                  state.v_item_embeddings, config, bias1, bias2, "item_embeddings");
    update_tensor(params.trend_init, grads.trend_init, state.m_trend_init, state.v_trend_init,
                  config, bias1, bias2, "trend_init");
    update_tensor(params.coattention, grads.coattention, state.m_coattention, state.v_coattention,
                  config, bias1, bias2, "coattention");
    update_tensor(params.fusion_projection, grads.fusion_projection, state.m_fusion_projection,
                  state.v_fusion_projection, config, bias1, bias2, "fusion_projection");
}

}  // namespace dmr
