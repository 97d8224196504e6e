#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "rhino/array.hpp"
#include "rhino/error.hpp"
#include "rhino/params.hpp"

namespace rhino {

class Tape;

/// Handle to a value recorded on a Tape.
struct Var {
  Tape* tape = nullptr;
  int32_t id = -1;

  bool valid() const { return tape != nullptr && id >= 0; }
  const DenseArray& val() const;
  const Shape& shape() const { return val().shape(); }
  int64_t numel() const { return val().numel(); }
  double item() const;
};

/// Reverse-mode differentiation tape. Operations append nodes in
/// topological order; backward() walks them in reverse and accumulates
/// gradients into parameter stores bound via param().
class Tape {
 public:
  Tape() = default;
  explicit Tape(bool grad_enabled) : grad_enabled_(grad_enabled) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  using Backprop = std::function<void(Tape&, int32_t)>;

  bool grad_enabled() const { return grad_enabled_; }

  Var make(DenseArray value, bool requires_grad, Backprop backprop = nullptr) {
    Node n;
    n.value = std::move(value);
    n.requires_grad = requires_grad && grad_enabled_;
    if (n.requires_grad) n.backprop = std::move(backprop);
    nodes_.push_back(std::move(n));
    return Var{this, static_cast<int32_t>(nodes_.size() - 1)};
  }

  Var constant(DenseArray value) { return make(std::move(value), false); }

  Var input(DenseArray value, bool requires_grad = false) { return make(std::move(value), requires_grad); }

  /// Leaf bound to a store entry; backward() flushes its gradient into
  /// the store. Binding the same name twice accumulates both paths.
  Var param(ParameterStore& store, const std::string& name) {
    Var v = make(store.value(name), true);
    if (grad_enabled_) bindings_.push_back(Binding{v.id, &store, name});
    return v;
  }

  const DenseArray& val(int32_t id) const { return nodes_[static_cast<size_t>(id)].value; }

  bool needs_grad(int32_t id) const { return nodes_[static_cast<size_t>(id)].requires_grad; }
  bool needs_grad(Var v) const { return needs_grad(v.id); }

  /// Gradient buffer of a node, zero-allocated on first touch.
  DenseArray& grad_buf(int32_t id) {
    Node& n = nodes_[static_cast<size_t>(id)];
    if (!n.grad_alloc) {
      n.grad = DenseArray::zeros(n.value.shape());
      n.grad_alloc = true;
    }
    return n.grad;
  }

  bool grad_present(int32_t id) const { return nodes_[static_cast<size_t>(id)].grad_alloc; }

  const DenseArray& grad(Var v) const {
    const Node& n = nodes_[static_cast<size_t>(v.id)];
    if (!n.grad_alloc) throw ParameterError("gradient was never produced for this node");
    return n.grad;
  }

  void backward(Var loss) {
    if (!grad_enabled_) throw ParameterError("backward() on a grad-disabled tape");
    if (loss.numel() != 1) throw DimensionError("backward() expects a scalar loss");
    grad_buf(loss.id)[0] = 1.0;
    for (int32_t id = loss.id; id >= 0; --id) {
      Node& n = nodes_[static_cast<size_t>(id)];
      if (n.requires_grad && n.grad_alloc && n.backprop) n.backprop(*this, id);
    }
    for (const Binding& b : bindings_) {
      const Node& n = nodes_[static_cast<size_t>(b.node)];
      if (!n.grad_alloc) continue;
      DenseArray& g = b.store->grad(b.name);
      for (int64_t i = 0; i < g.numel(); ++i) g[i] += n.grad[i];
    }
  }

  size_t size() const { return nodes_.size(); }

  void clear() {
    nodes_.clear();
    bindings_.clear();
  }

 private:
  struct Node {
    DenseArray value;
    DenseArray grad;
    bool grad_alloc = false;
    bool requires_grad = false;
    Backprop backprop;
  };

  struct Binding {
    int32_t node;
    ParameterStore* store;
    std::string name;
  };

  bool grad_enabled_ = true;
  std::deque<Node> nodes_;
  std::vector<Binding> bindings_;
};

inline const DenseArray& Var::val() const { return tape->val(id); }

inline double Var::item() const {
  if (numel() != 1) throw DimensionError("item() on non-scalar of shape " + shape_str(shape()));
  return val()[0];
}

namespace detail {

inline Shape bcast_shape(const Shape& a, const Shape& b, const char* opname) {
  size_t nd = std::max(a.size(), b.size());
  Shape out(nd, 1);
  for (size_t k = 0; k < nd; ++k) {
    int64_t da = k < nd - a.size() ? 1 : a[k - (nd - a.size())];
    int64_t db = k < nd - b.size() ? 1 : b[k - (nd - b.size())];
    if (da != db && da != 1 && db != 1)
      throw DimensionError(std::string(opname) + ": cannot broadcast " + shape_str(a) + " with " + shape_str(b));
    out[k] = std::max(da, db);
  }
  return out;
}

/// Per-output-dimension input strides, 0 where the input broadcasts.
inline std::vector<int64_t> bcast_strides(const Shape& in, const Shape& out) {
  size_t nd = out.size();
  std::vector<int64_t> st(nd, 0);
  std::vector<int64_t> real(in.size(), 1);
  for (int d = static_cast<int>(in.size()) - 2; d >= 0; --d)
    real[static_cast<size_t>(d)] = real[static_cast<size_t>(d) + 1] * in[static_cast<size_t>(d) + 1];
  size_t off = nd - in.size();
  for (size_t k = off; k < nd; ++k) {
    if (in[k - off] == 1 && out[k] != 1)
      st[k] = 0;
    else
      st[k] = real[k - off];
  }
  return st;
}

inline std::vector<int64_t> row_major_strides(const Shape& s) {
  std::vector<int64_t> st(s.size(), 1);
  for (int d = static_cast<int>(s.size()) - 2; d >= 0; --d)
    st[static_cast<size_t>(d)] = st[static_cast<size_t>(d) + 1] * s[static_cast<size_t>(d) + 1];
  return st;
}

enum class BinOp { Add, Sub, Mul, Div };

inline double bin_apply(BinOp op, double x, double y) {
  switch (op) {
    case BinOp::Add: return x + y;
    case BinOp::Sub: return x - y;
    case BinOp::Mul: return x * y;
    case BinOp::Div: return x / y;
  }
  return 0.0;
}

inline Var binary(Var a, Var b, BinOp op, const char* opname) {
  if (a.tape != b.tape) throw ParameterError(std::string(opname) + ": operands from different tapes");
  Tape& t = *a.tape;
  const DenseArray& av = a.val();
  const DenseArray& bv = b.val();
  bool rg = t.needs_grad(a) || t.needs_grad(b);

  if (av.same_shape(bv)) {
    DenseArray out(av.shape());
    const int64_t n = out.numel();
    for (int64_t i = 0; i < n; ++i) out[i] = bin_apply(op, av[i], bv[i]);
    return t.make(std::move(out), rg, [ai = a.id, bi = b.id, op](Tape& tp, int32_t oid) {
      const DenseArray& g = tp.grad_buf(oid);
      const DenseArray& x = tp.val(ai);
      const DenseArray& y = tp.val(bi);
      const int64_t n = g.numel();
      if (tp.needs_grad(ai)) {
        DenseArray& ga = tp.grad_buf(ai);
        for (int64_t i = 0; i < n; ++i) {
          switch (op) {
            case BinOp::Add:
            case BinOp::Sub: ga[i] += g[i]; break;
            case BinOp::Mul: ga[i] += g[i] * y[i]; break;
            case BinOp::Div: ga[i] += g[i] / y[i]; break;
          }
        }
      }
      if (tp.needs_grad(bi)) {
        DenseArray& gb = tp.grad_buf(bi);
        for (int64_t i = 0; i < n; ++i) {
          switch (op) {
            case BinOp::Add: gb[i] += g[i]; break;
            case BinOp::Sub: gb[i] -= g[i]; break;
            case BinOp::Mul: gb[i] += g[i] * x[i]; break;
            case BinOp::Div: gb[i] -= g[i] * x[i] / (y[i] * y[i]); break;
          }
        }
      }
    });
  }

  Shape osh = bcast_shape(av.shape(), bv.shape(), opname);
  auto sa = bcast_strides(av.shape(), osh);
  auto sb = bcast_strides(bv.shape(), osh);
  auto so = row_major_strides(osh);
  DenseArray out(osh);
  const int64_t n = out.numel();
  const size_t nd = osh.size();
  for (int64_t o = 0; o < n; ++o) {
    int64_t ia = 0, ib = 0;
    for (size_t d = 0; d < nd; ++d) {
      int64_t idx = (o / so[d]) % osh[d];
      ia += idx * sa[d];
      ib += idx * sb[d];
    }
    out[o] = bin_apply(op, av[ia], bv[ib]);
  }
  return t.make(std::move(out), rg,
                [ai = a.id, bi = b.id, op, sa, sb, so, osh](Tape& tp, int32_t oid) {
                  const DenseArray& g = tp.grad_buf(oid);
                  const DenseArray& x = tp.val(ai);
                  const DenseArray& y = tp.val(bi);
                  const bool need_a = tp.needs_grad(ai);
                  const bool need_b = tp.needs_grad(bi);
                  DenseArray* ga = need_a ? &tp.grad_buf(ai) : nullptr;
                  DenseArray* gb = need_b ? &tp.grad_buf(bi) : nullptr;
                  const int64_t n = g.numel();
                  const size_t nd = osh.size();
                  for (int64_t o = 0; o < n; ++o) {
                    int64_t ia = 0, ib = 0;
                    for (size_t d = 0; d < nd; ++d) {
                      int64_t idx = (o / so[d]) % osh[d];
                      ia += idx * sa[d];
                      ib += idx * sb[d];
                    }
                    switch (op) {
                      case BinOp::Add:
                        if (need_a) (*ga)[ia] += g[o];
                        if (need_b) (*gb)[ib] += g[o];
                        break;
                      case BinOp::Sub:
                        if (need_a) (*ga)[ia] += g[o];
                        if (need_b) (*gb)[ib] -= g[o];
                        break;
                      case BinOp::Mul:
                        if (need_a) (*ga)[ia] += g[o] * y[ib];
                        if (need_b) (*gb)[ib] += g[o] * x[ia];
                        break;
                      case BinOp::Div:
                        if (need_a) (*ga)[ia] += g[o] / y[ib];
                        if (need_b) (*gb)[ib] -= g[o] * x[ia] / (y[ib] * y[ib]);
                        break;
                    }
                  }
                });
}

template <typename Fwd, typename Bwd>
Var unary(Var a, Fwd fwd, Bwd bwd) {
  Tape& t = *a.tape;
  const DenseArray& av = a.val();
  DenseArray out(av.shape());
  for (int64_t i = 0; i < av.numel(); ++i) out[i] = fwd(av[i]);
  return t.make(std::move(out), t.needs_grad(a), [ai = a.id, bwd](Tape& tp, int32_t oid) {
    if (!tp.needs_grad(ai)) return;
    const DenseArray& g = tp.grad_buf(oid);
    const DenseArray& x = tp.val(ai);
    const DenseArray& y = tp.val(oid);
    DenseArray& ga = tp.grad_buf(ai);
    for (int64_t i = 0; i < g.numel(); ++i) ga[i] += g[i] * bwd(x[i], y[i]);
  });
}

/// Decomposes a shape around `axis` into [outer, axis_dim, inner].
inline void axis_split(const Shape& s, int axis, int64_t& outer, int64_t& ad, int64_t& inner) {
  outer = 1;
  inner = 1;
  for (int d = 0; d < axis; ++d) outer *= s[static_cast<size_t>(d)];
  ad = s[static_cast<size_t>(axis)];
  for (size_t d = static_cast<size_t>(axis) + 1; d < s.size(); ++d) inner *= s[d];
}

inline int norm_axis(int axis, int ndim, const char* opname) {
  if (axis < 0) axis += ndim;
  if (axis < 0 || axis >= ndim)
    throw DimensionError(std::string(opname) + ": axis " + std::to_string(axis) + " out of range for rank " +
                         std::to_string(ndim));
  return axis;
}

}  // namespace detail

inline Var add(Var a, Var b) { return detail::binary(a, b, detail::BinOp::Add, "add"); }
inline Var sub(Var a, Var b) { return detail::binary(a, b, detail::BinOp::Sub, "sub"); }
inline Var mul(Var a, Var b) { return detail::binary(a, b, detail::BinOp::Mul, "mul"); }
inline Var div(Var a, Var b) { return detail::binary(a, b, detail::BinOp::Div, "div"); }

/// k * x + c, elementwise.
inline Var affine(Var a, double k, double c) {
  return detail::unary(a, [k, c](double x) { return k * x + c; }, [k](double, double) { return k; });
}

inline Var scale(Var a, double k) { return affine(a, k, 0.0); }
inline Var neg(Var a) { return affine(a, -1.0, 0.0); }

inline Var relu(Var a) {
  return detail::unary(a, [](double x) { return x > 0.0 ? x : 0.0; },
                       [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

inline Var tanh(Var a) {
  return detail::unary(a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

inline Var sigmoid(Var a) {
  return detail::unary(a, [](double x) { return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); },
                       [](double, double y) { return y * (1.0 - y); });
}

inline Var softplus(Var a) {
  return detail::unary(a, [](double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); },
                       [](double x, double) { return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); });
}

inline Var exp(Var a) {
  return detail::unary(a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

inline Var log(Var a) {
  return detail::unary(a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

inline Var square(Var a) {
  return detail::unary(a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

inline Var matmul(Var a, Var b) {
  Tape& t = *a.tape;
  const DenseArray& av = a.val();
  const DenseArray& bv = b.val();
  if (av.ndim() != 2 || bv.ndim() != 2 || av.dim(1) != bv.dim(0))
    throw DimensionError("matmul " + shape_str(av.shape()) + " x " + shape_str(bv.shape()));
  DenseArray out({av.dim(0), bv.dim(1)});
  mat_view(out) = mat_view(av) * mat_view(bv);
  bool rg = t.needs_grad(a) || t.needs_grad(b);
  return t.make(std::move(out), rg, [ai = a.id, bi = b.id](Tape& tp, int32_t oid) {
    DenseArray& gref = tp.grad_buf(oid);
    ConstMatMap g(gref.data(), gref.dim(0), gref.dim(1));
    if (tp.needs_grad(ai)) {
      DenseArray& ga = tp.grad_buf(ai);
      mat_view(ga) += g * mat_view(tp.val(bi)).transpose();
    }
    if (tp.needs_grad(bi)) {
      DenseArray& gb = tp.grad_buf(bi);
      mat_view(gb) += mat_view(tp.val(ai)).transpose() * g;
    }
  });
}

inline Var transpose(Var a) {
  Tape& t = *a.tape;
  DenseArray out = arr_transpose(a.val());
  return t.make(std::move(out), t.needs_grad(a), [ai = a.id](Tape& tp, int32_t oid) {
    if (!tp.needs_grad(ai)) return;
    DenseArray& g = tp.grad_buf(oid);
    DenseArray& ga = tp.grad_buf(ai);
    mat_view(ga) += mat_view(g).transpose();
  });
}

inline Var reshape(Var a, Shape shape) {
  Tape& t = *a.tape;
  DenseArray out = a.val().reshaped(std::move(shape));
  return t.make(std::move(out), t.needs_grad(a), [ai = a.id](Tape& tp, int32_t oid) {
    if (!tp.needs_grad(ai)) return;
    const DenseArray& g = tp.grad_buf(oid);
    DenseArray& ga = tp.grad_buf(ai);
    for (int64_t i = 0; i < g.numel(); ++i) ga[i] += g[i];
  });
}

inline Var sum(Var a) {
  Tape& t = *a.tape;
  double s = 0.0;
  const DenseArray& av = a.val();
  for (int64_t i = 0; i < av.numel(); ++i) s += av[i];
  return t.make(DenseArray::scalar(s), t.needs_grad(a), [ai = a.id](Tape& tp, int32_t oid) {
    if (!tp.needs_grad(ai)) return;
    double g = tp.grad_buf(oid)[0];
    DenseArray& ga = tp.grad_buf(ai);
    for (int64_t i = 0; i < ga.numel(); ++i) ga[i] += g;
  });
}

inline Var mean(Var a) { return scale(sum(a), 1.0 / static_cast<double>(a.numel())); }

inline Var concat(const std::vector<Var>& parts, int axis) {
  if (parts.empty()) throw DimensionError("concat: no parts");
  Tape& t = *parts[0].tape;
  const int nd = parts[0].val().ndim();
  axis = detail::norm_axis(axis, nd, "concat");
  Shape osh = parts[0].shape();
  int64_t total_axis = 0;
  bool rg = false;
  for (const Var& p : parts) {
    const Shape& s = p.shape();
    if (static_cast<int>(s.size()) != nd) throw DimensionError("concat: rank mismatch");
    for (int d = 0; d < nd; ++d)
      if (d != axis && s[static_cast<size_t>(d)] != osh[static_cast<size_t>(d)])
        throw DimensionError("concat: shape mismatch " + shape_str(s) + " vs " + shape_str(osh));
    total_axis += s[static_cast<size_t>(axis)];
    rg = rg || t.needs_grad(p);
  }
  osh[static_cast<size_t>(axis)] = total_axis;

  int64_t outer, ad_out, inner;
  detail::axis_split(osh, axis, outer, ad_out, inner);
  DenseArray out(osh);
  std::vector<int32_t> ids;
  std::vector<int64_t> widths;
  int64_t pos = 0;
  for (const Var& p : parts) {
    const DenseArray& pv = p.val();
    int64_t w = pv.dim(axis) * inner;
    for (int64_t o = 0; o < outer; ++o) {
      const double* src = pv.data() + o * w;
      double* dst = out.data() + o * ad_out * inner + pos;
      std::copy(src, src + w, dst);
    }
    ids.push_back(p.id);
    widths.push_back(w);
    pos += w;
  }
  return t.make(std::move(out), rg, [ids, widths, outer, inner, ad_out](Tape& tp, int32_t oid) {
    const DenseArray& g = tp.grad_buf(oid);
    int64_t pos = 0;
    for (size_t k = 0; k < ids.size(); ++k) {
      if (tp.needs_grad(ids[k])) {
        DenseArray& gp = tp.grad_buf(ids[k]);
        for (int64_t o = 0; o < outer; ++o) {
          const double* src = g.data() + o * ad_out * inner + pos;
          double* dst = gp.data() + o * widths[k];
          for (int64_t i = 0; i < widths[k]; ++i) dst[i] += src[i];
        }
      }
      pos += widths[k];
    }
  });
}

inline Var slice(Var a, int axis, int64_t start, int64_t len) {
  Tape& t = *a.tape;
  const DenseArray& av = a.val();
  axis = detail::norm_axis(axis, av.ndim(), "slice");
  if (start < 0 || len < 0 || start + len > av.dim(axis))
    throw DimensionError("slice: range [" + std::to_string(start) + ", " + std::to_string(start + len) +
                         ") out of bounds for axis size " + std::to_string(av.dim(axis)));
  Shape osh = av.shape();
  osh[static_cast<size_t>(axis)] = len;
  int64_t outer, ad, inner;
  detail::axis_split(av.shape(), axis, outer, ad, inner);
  DenseArray out(osh);
  for (int64_t o = 0; o < outer; ++o) {
    const double* src = av.data() + (o * ad + start) * inner;
    std::copy(src, src + len * inner, out.data() + o * len * inner);
  }
  return t.make(std::move(out), t.needs_grad(a), [ai = a.id, outer, ad, inner, start, len](Tape& tp, int32_t oid) {
    if (!tp.needs_grad(ai)) return;
    const DenseArray& g = tp.grad_buf(oid);
    DenseArray& ga = tp.grad_buf(ai);
    for (int64_t o = 0; o < outer; ++o) {
      const double* src = g.data() + o * len * inner;
      double* dst = ga.data() + (o * ad + start) * inner;
      for (int64_t i = 0; i < len * inner; ++i) dst[i] += src[i];
    }
  });
}

/// Row gather from a 2-D array; duplicate indices are allowed (the
/// backward pass scatter-adds).
inline Var gather_rows(Var a, std::vector<int64_t> rows) {
  Tape& t = *a.tape;
  const DenseArray& av = a.val();
  if (av.ndim() != 2) throw DimensionError("gather_rows expects 2-D, got " + shape_str(av.shape()));
  const int64_t cols = av.dim(1);
  for (int64_t r : rows)
    if (r < 0 || r >= av.dim(0)) throw DimensionError("gather_rows: row " + std::to_string(r) + " out of range");
  DenseArray out({static_cast<int64_t>(rows.size()), cols});
  for (size_t k = 0; k < rows.size(); ++k)
    std::copy(av.data() + rows[k] * cols, av.data() + (rows[k] + 1) * cols, out.data() + static_cast<int64_t>(k) * cols);
  return t.make(std::move(out), t.needs_grad(a), [ai = a.id, rows = std::move(rows), cols](Tape& tp, int32_t oid) {
    if (!tp.needs_grad(ai)) return;
    const DenseArray& g = tp.grad_buf(oid);
    DenseArray& ga = tp.grad_buf(ai);
    for (size_t k = 0; k < rows.size(); ++k) {
      const double* src = g.data() + static_cast<int64_t>(k) * cols;
      double* dst = ga.data() + rows[k] * cols;
      for (int64_t i = 0; i < cols; ++i) dst[i] += src[i];
    }
  });
}

/// Numerically stable softmax along `axis`; the output lanes always sum
/// to one for finite input.
inline Var softmax(Var a, int axis) {
  Tape& t = *a.tape;
  const DenseArray& av = a.val();
  axis = detail::norm_axis(axis, std::max(av.ndim(), 1), "softmax");
  if (av.ndim() == 0) throw DimensionError("softmax on a scalar");
  int64_t outer, ad, inner;
  detail::axis_split(av.shape(), axis, outer, ad, inner);
  DenseArray out(av.shape());
  for (int64_t o = 0; o < outer; ++o)
    for (int64_t i = 0; i < inner; ++i) {
      const int64_t base = o * ad * inner + i;
      double m = -std::numeric_limits<double>::infinity();
      for (int64_t k = 0; k < ad; ++k) m = std::max(m, av[base + k * inner]);
      double z = 0.0;
      for (int64_t k = 0; k < ad; ++k) z += std::exp(av[base + k * inner] - m);
      for (int64_t k = 0; k < ad; ++k) out[base + k * inner] = std::exp(av[base + k * inner] - m) / z;
    }
  return t.make(std::move(out), t.needs_grad(a), [ai = a.id, outer, ad, inner](Tape& tp, int32_t oid) {
    if (!tp.needs_grad(ai)) return;
    const DenseArray& g = tp.grad_buf(oid);
    const DenseArray& y = tp.val(oid);
    DenseArray& ga = tp.grad_buf(ai);
    for (int64_t o = 0; o < outer; ++o)
      for (int64_t i = 0; i < inner; ++i) {
        const int64_t base = o * ad * inner + i;
        double dot = 0.0;
        for (int64_t k = 0; k < ad; ++k) dot += g[base + k * inner] * y[base + k * inner];
        for (int64_t k = 0; k < ad; ++k)
          ga[base + k * inner] += (g[base + k * inner] - dot) * y[base + k * inner];
      }
  });
}

inline Var log_softmax(Var a, int axis) {
  Tape& t = *a.tape;
  const DenseArray& av = a.val();
  axis = detail::norm_axis(axis, std::max(av.ndim(), 1), "log_softmax");
  if (av.ndim() == 0) throw DimensionError("log_softmax on a scalar");
  int64_t outer, ad, inner;
  detail::axis_split(av.shape(), axis, outer, ad, inner);
  DenseArray out(av.shape());
  for (int64_t o = 0; o < outer; ++o)
    for (int64_t i = 0; i < inner; ++i) {
      const int64_t base = o * ad * inner + i;
      double m = -std::numeric_limits<double>::infinity();
      for (int64_t k = 0; k < ad; ++k) m = std::max(m, av[base + k * inner]);
      double z = 0.0;
      for (int64_t k = 0; k < ad; ++k) z += std::exp(av[base + k * inner] - m);
      const double lz = m + std::log(z);
      for (int64_t k = 0; k < ad; ++k) out[base + k * inner] = av[base + k * inner] - lz;
    }
  return t.make(std::move(out), t.needs_grad(a), [ai = a.id, outer, ad, inner](Tape& tp, int32_t oid) {
    if (!tp.needs_grad(ai)) return;
    const DenseArray& g = tp.grad_buf(oid);
    const DenseArray& y = tp.val(oid);
    DenseArray& ga = tp.grad_buf(ai);
    for (int64_t o = 0; o < outer; ++o)
      for (int64_t i = 0; i < inner; ++i) {
        const int64_t base = o * ad * inner + i;
        double gsum = 0.0;
        for (int64_t k = 0; k < ad; ++k) gsum += g[base + k * inner];
        for (int64_t k = 0; k < ad; ++k)
          ga[base + k * inner] += g[base + k * inner] - std::exp(y[base + k * inner]) * gsum;
      }
  });
}

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }
inline Var operator/(Var a, Var b) { return div(a, b); }
inline Var operator*(Var a, double k) { return scale(a, k); }
inline Var operator*(double k, Var a) { return scale(a, k); }
inline Var operator-(Var a) { return neg(a); }

}  // namespace rhino
