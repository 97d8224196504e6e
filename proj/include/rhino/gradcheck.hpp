#pragma once

#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "rhino/ops.hpp"
#include "rhino/tape.hpp"

namespace rhino {

/// abs error for small magnitudes, relative above 1.
inline double grad_rel_err(double a, double b) {
  double denom = std::max({1.0, std::abs(a), std::abs(b)});
  return std::abs(a - b) / denom;
}

struct GradCheckReport {
  struct Item {
    std::string name;
    double max_rel_err;
  };
  std::vector<Item> items;
  double max_rel_err = 0.0;
  double tol = 0.0;

  bool passed() const { return max_rel_err < tol; }

  std::string to_string() const {
    std::ostringstream os;
    for (const Item& it : items)
      os << "  " << it.name << ": max rel err " << it.max_rel_err << "\n";
    os << (passed() ? "PASS" : "FAIL") << " (worst " << max_rel_err << ", tol " << tol << ")";
    return os.str();
  }
};

/// Scalar loss builder; must be deterministic across calls (freeze any
/// noise outside the closure).
using ScalarFn = std::function<Var(Tape&, ParameterStore&)>;

inline double eval_scalar(const ScalarFn& fn, ParameterStore& store) {
  Tape tape(false);
  return fn(tape, store).item();
}

/// Compares reverse-mode gradients of fn against central finite
/// differences, elementwise over every entry in the store.
inline GradCheckReport check_gradients(const ScalarFn& fn, ParameterStore& store, double h = 1e-5,
                                       double tol = 1e-4) {
  store.zero_grads();
  {
    Tape tape;
    Var loss = fn(tape, store);
    tape.backward(loss);
  }
  std::map<std::string, DenseArray> analytic;
  for (const std::string& name : store.names()) analytic.emplace(name, store.grad(name));

  GradCheckReport report;
  report.tol = tol;
  for (const std::string& name : store.names()) {
    DenseArray& v = store.value(name);
    const DenseArray& g = analytic.at(name);
    double worst = 0.0;
    for (int64_t i = 0; i < v.numel(); ++i) {
      const double orig = v[i];
      v[i] = orig + h;
      const double fplus = eval_scalar(fn, store);
      v[i] = orig - h;
      const double fminus = eval_scalar(fn, store);
      v[i] = orig;
      const double fd = (fplus - fminus) / (2.0 * h);
      worst = std::max(worst, grad_rel_err(g[i], fd));
    }
    report.items.push_back({name, worst});
    report.max_rel_err = std::max(report.max_rel_err, worst);
  }
  return report;
}

}  // namespace rhino
