#pragma once

#include <span>
#include <vector>

namespace vqc {

enum class OptimKind { SGD, Adam, AMSGrad, RMSProp };

struct OptimHyper {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double rho = 0.9; // RMSProp decay
};

class Optimizer {
public:
    Optimizer(OptimKind kind, double learning_rate, int n_params, OptimHyper hyper = {});

    /// In-place update theta -= step(grad). Throws NumericFault on NaN/Inf.
    void step(std::span<double> params, std::span<const double> grad);

    long steps() const { return t_; }

private:
    OptimKind kind_;
    double lr_;
    OptimHyper hyper_;
    std::vector<double> m_, v_, vhat_max_;
    long t_ = 0;
};

} // namespace vqc
