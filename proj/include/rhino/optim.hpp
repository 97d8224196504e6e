#pragma once

#include <cmath>
#include <map>
#include <string>
#include <utility>

#include "rhino/params.hpp"

namespace rhino {

/// Adam with bias correction. Entries with identically zero gradients
/// never move, so constant (target-branch) parameters need no special
/// handling.
class AdamOptimizer {
 public:
  explicit AdamOptimizer(double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  double lr() const { return lr_; }
  void set_lr(double lr) { lr_ = lr; }

  void step(ParameterStore& store) {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (const std::string& name : store.names()) {
      DenseArray& value = store.value(name);
      const DenseArray& grad = store.grad(name);
      auto it = state_.find(name);
      if (it == state_.end())
        it = state_.emplace(name, std::make_pair(DenseArray::zeros(value.shape()),
                                                 DenseArray::zeros(value.shape()))).first;
      DenseArray& m = it->second.first;
      DenseArray& v = it->second.second;
      for (int64_t i = 0; i < value.numel(); ++i) {
        m[i] = beta1_ * m[i] + (1.0 - beta1_) * grad[i];
        v[i] = beta2_ * v[i] + (1.0 - beta2_) * grad[i] * grad[i];
        value[i] -= lr_ * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps_);
      }
    }
  }

 private:
  double lr_, beta1_, beta2_, eps_;
  int64_t t_ = 0;
  std::map<std::string, std::pair<DenseArray, DenseArray>> state_;
};

}  // namespace rhino
