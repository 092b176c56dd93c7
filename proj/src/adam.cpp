#include <cmath>

#include "rgi/tensor.hpp"

namespace rgi {

void adam_step(std::span<Parameter* const> params, const AdamConfig& cfg) {
  cfg.validate();
  for (Parameter* p : params) {
    check_contract(p != nullptr, "adam_step: null parameter");
    check_contract(p->grad_accumulated && p->tensor.has_grad(),
                   "adam_step: parameter has no accumulated gradient");
  }
  for (Parameter* p : params) {
    p->step_count += 1;
    const double t = static_cast<double>(p->step_count);
    const Matrix& g = p->tensor.grad;
    p->adam_m = cfg.beta1 * p->adam_m + (1.0 - cfg.beta1) * g;
    p->adam_v = cfg.beta2 * p->adam_v.array().matrix() + (1.0 - cfg.beta2) * g.array().square().matrix();
    const double bias1 = 1.0 - std::pow(cfg.beta1, t);
    const double bias2 = 1.0 - std::pow(cfg.beta2, t);
    Matrix m_hat = p->adam_m / bias1;
    Matrix v_hat = p->adam_v / bias2;
    p->values().array() -=
        cfg.learning_rate * m_hat.array() / (v_hat.array().sqrt() + cfg.epsilon);
    if (cfg.weight_decay > 0.0) {
      p->values() -= cfg.learning_rate * cfg.weight_decay * p->values();
    }
    p->tensor.zero_grad();
    p->grad_accumulated = false;
  }
}

}  // namespace rgi
