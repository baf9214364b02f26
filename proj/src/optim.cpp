#include "vqc/optim.hpp"

#include <cmath>
#include <string>

#include "vqc/errors.hpp"

namespace vqc {

Optimizer::Optimizer(OptimKind kind, double learning_rate, int n_params, OptimHyper hyper)
    : kind_(kind), lr_(learning_rate), hyper_(hyper) {
    if (kind_ == OptimKind::Adam || kind_ == OptimKind::AMSGrad) {
        m_.assign(n_params, 0.0);
        v_.assign(n_params, 0.0);
    }
    if (kind_ == OptimKind::AMSGrad) {
        vhat_max_.assign(n_params, 0.0);
    }
    if (kind_ == OptimKind::RMSProp) {
        v_.assign(n_params, 0.0);
    }
}

void Optimizer::step(std::span<double> params, std::span<const double> grad) {
    if (params.size() != grad.size()) {
        throw ConfigError("parameter/gradient length mismatch");
    }
    for (std::size_t i = 0; i < grad.size(); ++i) {
        if (!std::isfinite(grad[i])) {
            throw NumericFault("non-finite gradient entry at index " + std::to_string(i));
        }
    }
    ++t_;

    switch (kind_) {
    case OptimKind::SGD:
        for (std::size_t i = 0; i < params.size(); ++i) {
            params[i] -= lr_ * grad[i];
        }
        break;
    case OptimKind::Adam:
    case OptimKind::AMSGrad: {
        const double bc1 = 1.0 - std::pow(hyper_.beta1, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(hyper_.beta2, static_cast<double>(t_));
        for (std::size_t i = 0; i < params.size(); ++i) {
            m_[i] = hyper_.beta1 * m_[i] + (1.0 - hyper_.beta1) * grad[i];
            v_[i] = hyper_.beta2 * v_[i] + (1.0 - hyper_.beta2) * grad[i] * grad[i];
            const double mhat = m_[i] / bc1;
            double vhat = v_[i] / bc2;
            if (kind_ == OptimKind::AMSGrad) {
                vhat_max_[i] = std::max(vhat_max_[i], vhat);
                vhat = vhat_max_[i];
            }
            params[i] -= lr_ * mhat / (std::sqrt(vhat) + hyper_.eps);
        }
        break;
    }
    case OptimKind::RMSProp:
        for (std::size_t i = 0; i < params.size(); ++i) {
            v_[i] = hyper_.rho * v_[i] + (1.0 - hyper_.rho) * grad[i] * grad[i];
            params[i] -= lr_ * grad[i] / (std::sqrt(v_[i]) + hyper_.eps);
        }
        break;
    }
}

} // namespace vqc
