#include "dsvit/numcore/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <string>

namespace dsvit::num {
namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using ConstMap = Eigen::Map<const RowMat<T>>;
template <typename T>
using MutMap = Eigen::Map<RowMat<T>>;

template <typename T>
void same_graph(Var<T> a, Var<T> b, const char* op) {
  if (&a.graph() != &b.graph()) throw InvalidInput(std::string(op) + ": inputs from different graphs");
}

template <typename T>
void require_rank2(Var<T> v, const char* op) {
  if (v.shape().size() != 2) {
    throw ShapeError(std::string(op) + " expects a matrix, got " + to_string(v.shape()));
  }
}

template <typename T>
void require_same_shape(Var<T> a, Var<T> b, const char* op) {
  same_graph(a, b, op);
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": " + to_string(a.shape()) + " vs " + to_string(b.shape()));
  }
}

struct AxisSplit {
  std::size_t outer = 1, len = 1, inner = 1;
};

AxisSplit split_axis(const Shape& s, std::size_t axis, const char* op) {
  if (axis >= s.size()) {
    throw ShapeError(std::string(op) + ": axis " + std::to_string(axis) + " out of range for " +
                     to_string(s));
  }
  AxisSplit r;
  for (std::size_t i = 0; i < axis; ++i) r.outer *= s[i];
  r.len = s[axis];
  for (std::size_t i = axis + 1; i < s.size(); ++i) r.inner *= s[i];
  return r;
}

}  // namespace

template <typename T>
Var<T> matmul(Var<T> a, Var<T> b) {
  same_graph(a, b, "matmul");
  require_rank2(a, "matmul");
  require_rank2(b, "matmul");
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  if (b.shape()[0] != k) {
    throw ShapeError("matmul: " + to_string(a.shape()) + " . " + to_string(b.shape()));
  }
  std::vector<T> out(m * n);
  MutMap<T>(out.data(), m, n).noalias() =
      ConstMap<T>(a.value().data(), m, k) * ConstMap<T>(b.value().data(), k, n);
  Graph<T>& g = a.graph();
  const auto ia = a.id(), ib = b.id();
  return g.record("matmul", {m, n}, std::move(out), {a, b},
                  [&g, ia, ib, m, k, n](std::span<const T> dout) {
                    ConstMap<T> dc(dout.data(), m, n);
                    if (g.needs_grad(ia)) {
                      MutMap<T>(g.grad_buffer(ia).data(), m, k).noalias() +=
                          dc * ConstMap<T>(g.value_of(ib).data(), k, n).transpose();
                    }
                    if (g.needs_grad(ib)) {
                      MutMap<T>(g.grad_buffer(ib).data(), k, n).noalias() +=
                          ConstMap<T>(g.value_of(ia).data(), m, k).transpose() * dc;
                    }
                  });
}

template <typename T>
Var<T> matmul_bt(Var<T> a, Var<T> b) {
  same_graph(a, b, "matmul_bt");
  require_rank2(a, "matmul_bt");
  require_rank2(b, "matmul_bt");
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[0];
  if (b.shape()[1] != k) {
    throw ShapeError("matmul_bt: " + to_string(a.shape()) + " . " + to_string(b.shape()) + "^T");
  }
  std::vector<T> out(m * n);
  MutMap<T>(out.data(), m, n).noalias() =
      ConstMap<T>(a.value().data(), m, k) * ConstMap<T>(b.value().data(), n, k).transpose();
  Graph<T>& g = a.graph();
  const auto ia = a.id(), ib = b.id();
  return g.record("matmul_bt", {m, n}, std::move(out), {a, b},
                  [&g, ia, ib, m, k, n](std::span<const T> dout) {
                    ConstMap<T> dc(dout.data(), m, n);
                    if (g.needs_grad(ia)) {
                      MutMap<T>(g.grad_buffer(ia).data(), m, k).noalias() +=
                          dc * ConstMap<T>(g.value_of(ib).data(), n, k);
                    }
                    if (g.needs_grad(ib)) {
                      MutMap<T>(g.grad_buffer(ib).data(), n, k).noalias() +=
                          dc.transpose() * ConstMap<T>(g.value_of(ia).data(), m, k);
                    }
                  });
}

template <typename T>
Var<T> add(Var<T> a, Var<T> b) {
  require_same_shape(a, b, "add");
  auto av = a.value(), bv = b.value();
  std::vector<T> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  Graph<T>& g = a.graph();
  const auto ia = a.id(), ib = b.id();
  return g.record("add", a.shape(), std::move(out), {a, b}, [&g, ia, ib](std::span<const T> d) {
    for (auto id : {ia, ib}) {
      if (!g.needs_grad(id)) continue;
      auto gx = g.grad_buffer(id);
      for (std::size_t i = 0; i < d.size(); ++i) gx[i] += d[i];
    }
  });
}

template <typename T>
Var<T> sub(Var<T> a, Var<T> b) {
  require_same_shape(a, b, "sub");
  auto av = a.value(), bv = b.value();
  std::vector<T> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] - bv[i];
  Graph<T>& g = a.graph();
  const auto ia = a.id(), ib = b.id();
  return g.record("sub", a.shape(), std::move(out), {a, b}, [&g, ia, ib](std::span<const T> d) {
    if (g.needs_grad(ia)) {
      auto ga = g.grad_buffer(ia);
      for (std::size_t i = 0; i < d.size(); ++i) ga[i] += d[i];
    }
    if (g.needs_grad(ib)) {
      auto gb = g.grad_buffer(ib);
      for (std::size_t i = 0; i < d.size(); ++i) gb[i] -= d[i];
    }
  });
}

template <typename T>
Var<T> mul(Var<T> a, Var<T> b) {
  require_same_shape(a, b, "mul");
  auto av = a.value(), bv = b.value();
  std::vector<T> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  Graph<T>& g = a.graph();
  const auto ia = a.id(), ib = b.id();
  return g.record("mul", a.shape(), std::move(out), {a, b}, [&g, ia, ib](std::span<const T> d) {
    if (g.needs_grad(ia)) {
      auto ga = g.grad_buffer(ia);
      auto bv = g.value_of(ib);
      for (std::size_t i = 0; i < d.size(); ++i) ga[i] += d[i] * bv[i];
    }
    if (g.needs_grad(ib)) {
      auto gb = g.grad_buffer(ib);
      auto av = g.value_of(ia);
      for (std::size_t i = 0; i < d.size(); ++i) gb[i] += d[i] * av[i];
    }
  });
}

template <typename T>
Var<T> scale(Var<T> x, T factor) {
  auto xv = x.value();
  std::vector<T> out(xv.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[i] * factor;
  Graph<T>& g = x.graph();
  const auto ix = x.id();
  return g.record("scale", x.shape(), std::move(out), {x}, [&g, ix, factor](std::span<const T> d) {
    auto gx = g.grad_buffer(ix);
    for (std::size_t i = 0; i < d.size(); ++i) gx[i] += d[i] * factor;
  });
}

template <typename T>
Var<T> add_rowvec(Var<T> x, Var<T> bias) {
  same_graph(x, bias, "add_rowvec");
  const std::size_t n = x.shape().back();
  if (bias.size() != n) {
    throw ShapeError("add_rowvec: bias " + to_string(bias.shape()) + " for " + to_string(x.shape()));
  }
  auto xv = x.value(), bv = bias.value();
  std::vector<T> out(xv.size());
  const std::size_t rows = xv.size() / n;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < n; ++c) out[r * n + c] = xv[r * n + c] + bv[c];
  }
  Graph<T>& g = x.graph();
  const auto ix = x.id(), ib = bias.id();
  return g.record("add_rowvec", x.shape(), std::move(out), {x, bias},
                  [&g, ix, ib, rows, n](std::span<const T> d) {
                    if (g.needs_grad(ix)) {
                      auto gx = g.grad_buffer(ix);
                      for (std::size_t i = 0; i < d.size(); ++i) gx[i] += d[i];
                    }
                    if (g.needs_grad(ib)) {
                      auto gb = g.grad_buffer(ib);
                      for (std::size_t r = 0; r < rows; ++r) {
                        for (std::size_t c = 0; c < n; ++c) gb[c] += d[r * n + c];
                      }
                    }
                  });
}

template <typename T>
Var<T> relu(Var<T> x) {
  auto xv = x.value();
  std::vector<T> out(xv.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[i] > T(0) ? xv[i] : T(0);
  Graph<T>& g = x.graph();
  const auto ix = x.id();
  return g.record("relu", x.shape(), std::move(out), {x}, [&g, ix](std::span<const T> d) {
    auto gx = g.grad_buffer(ix);
    auto xv = g.value_of(ix);
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (xv[i] > T(0)) gx[i] += d[i];
    }
  });
}

template <typename T>
Var<T> softmax(Var<T> x, std::size_t axis) {
  const AxisSplit s = split_axis(x.shape(), axis, "softmax");
  auto xv = x.value();
  std::vector<T> out(xv.size());
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t in = 0; in < s.inner; ++in) {
      const std::size_t base = o * s.len * s.inner + in;
      T mx = xv[base];
      for (std::size_t j = 1; j < s.len; ++j) mx = std::max(mx, xv[base + j * s.inner]);
      T total = 0;
      for (std::size_t j = 0; j < s.len; ++j) {
        const T e = std::exp(xv[base + j * s.inner] - mx);
        out[base + j * s.inner] = e;
        total += e;
      }
      for (std::size_t j = 0; j < s.len; ++j) out[base + j * s.inner] /= total;
    }
  }
  Graph<T>& g = x.graph();
  const auto ix = x.id();
  std::vector<T> y;
  if (g.grad_enabled()) y = out;
  return g.record("softmax", x.shape(), std::move(out), {x},
                  [&g, ix, s, y = std::move(y)](std::span<const T> d) {
                    auto gx = g.grad_buffer(ix);
                    for (std::size_t o = 0; o < s.outer; ++o) {
                      for (std::size_t in = 0; in < s.inner; ++in) {
                        const std::size_t base = o * s.len * s.inner + in;
                        T dot = 0;
                        for (std::size_t j = 0; j < s.len; ++j) {
                          dot += d[base + j * s.inner] * y[base + j * s.inner];
                        }
                        for (std::size_t j = 0; j < s.len; ++j) {
                          const std::size_t k = base + j * s.inner;
                          gx[k] += y[k] * (d[k] - dot);
                        }
                      }
                    }
                  });
}

template <typename T>
Var<T> mean(Var<T> x, std::size_t axis) {
  const AxisSplit s = split_axis(x.shape(), axis, "mean");
  Shape out_shape;
  for (std::size_t i = 0; i < x.shape().size(); ++i) {
    if (i != axis) out_shape.push_back(x.shape()[i]);
  }
  if (out_shape.empty()) out_shape.push_back(1);
  auto xv = x.value();
  std::vector<double> acc(s.outer * s.inner, 0.0);
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t j = 0; j < s.len; ++j) {
      const T* src = xv.data() + (o * s.len + j) * s.inner;
      double* dst = acc.data() + o * s.inner;
      for (std::size_t in = 0; in < s.inner; ++in) dst[in] += src[in];
    }
  }
  std::vector<T> out(acc.size());
  for (std::size_t i = 0; i < acc.size(); ++i) out[i] = static_cast<T>(acc[i] / static_cast<double>(s.len));
  const T inv = T(1) / static_cast<T>(s.len);
  Graph<T>& g = x.graph();
  const auto ix = x.id();
  return g.record("mean", std::move(out_shape), std::move(out), {x},
                  [&g, ix, s, inv](std::span<const T> d) {
                    auto gx = g.grad_buffer(ix);
                    for (std::size_t o = 0; o < s.outer; ++o) {
                      for (std::size_t j = 0; j < s.len; ++j) {
                        T* dst = gx.data() + (o * s.len + j) * s.inner;
                        const T* src = d.data() + o * s.inner;
                        for (std::size_t in = 0; in < s.inner; ++in) dst[in] += src[in] * inv;
                      }
                    }
                  });
}

template <typename T>
Var<T> sum(Var<T> x) {
  T total = 0;
  for (T v : x.value()) total += v;
  Graph<T>& g = x.graph();
  const auto ix = x.id();
  return g.record("sum", {1}, {total}, {x}, [&g, ix](std::span<const T> d) {
    for (T& v : g.grad_buffer(ix)) v += d[0];
  });
}

template <typename T>
Var<T> concat(std::span<const Var<T>> parts, std::size_t axis) {
  if (parts.empty()) throw ShapeError("concat of zero tensors");
  const Shape& first = parts[0].shape();
  const AxisSplit s0 = split_axis(first, axis, "concat");
  std::vector<std::size_t> lens;
  std::size_t total_len = 0;
  for (const Var<T>& p : parts) {
    same_graph(parts[0], p, "concat");
    const Shape& sh = p.shape();
    bool ok = sh.size() == first.size();
    for (std::size_t i = 0; ok && i < sh.size(); ++i) ok = (i == axis) || sh[i] == first[i];
    if (!ok) throw ShapeError("concat: " + to_string(first) + " vs " + to_string(sh));
    lens.push_back(sh[axis]);
    total_len += sh[axis];
  }
  Shape out_shape = first;
  out_shape[axis] = total_len;
  std::vector<T> out(s0.outer * total_len * s0.inner);
  std::size_t offset = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    auto pv = parts[p].value();
    const std::size_t chunk = lens[p] * s0.inner;
    for (std::size_t o = 0; o < s0.outer; ++o) {
      std::copy_n(pv.data() + o * chunk, chunk, out.data() + (o * total_len + offset) * s0.inner);
    }
    offset += lens[p];
  }
  std::vector<std::uint32_t> ids;
  for (const Var<T>& p : parts) ids.push_back(p.id());
  Graph<T>& g = parts[0].graph();
  return g.record("concat", std::move(out_shape), std::move(out), parts,
                  [&g, ids, lens, s0, total_len](std::span<const T> d) {
                    std::size_t offset = 0;
                    for (std::size_t p = 0; p < ids.size(); ++p) {
                      const std::size_t chunk = lens[p] * s0.inner;
                      if (g.needs_grad(ids[p])) {
                        auto gp = g.grad_buffer(ids[p]);
                        for (std::size_t o = 0; o < s0.outer; ++o) {
                          const T* src = d.data() + (o * total_len + offset) * s0.inner;
                          T* dst = gp.data() + o * chunk;
                          for (std::size_t i = 0; i < chunk; ++i) dst[i] += src[i];
                        }
                      }
                      offset += lens[p];
                    }
                  });
}

template <typename T>
Var<T> slice(Var<T> x, std::size_t axis, std::size_t start, std::size_t length) {
  const AxisSplit s = split_axis(x.shape(), axis, "slice");
  if (length == 0 || start + length > s.len) {
    throw ShapeError("slice [" + std::to_string(start) + ", +" + std::to_string(length) +
                     ") out of range for " + to_string(x.shape()));
  }
  Shape out_shape = x.shape();
  out_shape[axis] = length;
  auto xv = x.value();
  std::vector<T> out(s.outer * length * s.inner);
  const std::size_t chunk = length * s.inner;
  for (std::size_t o = 0; o < s.outer; ++o) {
    std::copy_n(xv.data() + (o * s.len + start) * s.inner, chunk, out.data() + o * chunk);
  }
  Graph<T>& g = x.graph();
  const auto ix = x.id();
  return g.record("slice", std::move(out_shape), std::move(out), {x},
                  [&g, ix, s, start, chunk](std::span<const T> d) {
                    auto gx = g.grad_buffer(ix);
                    for (std::size_t o = 0; o < s.outer; ++o) {
                      T* dst = gx.data() + (o * s.len + start) * s.inner;
                      const T* src = d.data() + o * chunk;
                      for (std::size_t i = 0; i < chunk; ++i) dst[i] += src[i];
                    }
                  });
}

template <typename T>
Var<T> reshape(Var<T> x, Shape shape) {
  if (numel(shape) != x.size()) {
    throw ShapeError("reshape " + to_string(x.shape()) + " -> " + to_string(shape));
  }
  auto xv = x.value();
  Graph<T>& g = x.graph();
  const auto ix = x.id();
  return g.record("reshape", std::move(shape), std::vector<T>(xv.begin(), xv.end()), {x},
                  [&g, ix](std::span<const T> d) {
                    auto gx = g.grad_buffer(ix);
                    for (std::size_t i = 0; i < d.size(); ++i) gx[i] += d[i];
                  });
}

template <typename T>
Var<T> embedding_lookup(Var<T> table, std::span<const std::int32_t> ids) {
  require_rank2(table, "embedding_lookup");
  if (ids.empty()) throw ShapeError("embedding_lookup with no ids");
  const std::size_t k = table.shape()[0], dim = table.shape()[1];
  auto tv = table.value();
  std::vector<T> out(ids.size() * dim);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= k) {
      throw InvalidInput("embedding_lookup: id " + std::to_string(ids[i]) + " outside [0, " +
                         std::to_string(k) + ")");
    }
    std::copy_n(tv.data() + static_cast<std::size_t>(ids[i]) * dim, dim, out.data() + i * dim);
  }
  Graph<T>& g = table.graph();
  const auto it = table.id();
  std::vector<std::int32_t> kept;
  if (g.needs_grad(it)) kept.assign(ids.begin(), ids.end());
  return g.record("embedding_lookup", {ids.size(), dim}, std::move(out), {table},
                  [&g, it, dim, kept = std::move(kept)](std::span<const T> d) {
                    auto gt = g.grad_buffer(it);
                    for (std::size_t i = 0; i < kept.size(); ++i) {
                      T* row = gt.data() + static_cast<std::size_t>(kept[i]) * dim;
                      const T* src = d.data() + i * dim;
                      for (std::size_t c = 0; c < dim; ++c) row[c] += src[c];
                    }
                  });
}

template <typename T>
Var<T> layer_norm(Var<T> x, Var<T> gain, Var<T> bias, T eps) {
  same_graph(x, gain, "layer_norm");
  same_graph(x, bias, "layer_norm");
  const std::size_t n = x.shape().back();
  if (gain.size() != n || bias.size() != n) {
    throw ShapeError("layer_norm: affine params do not match " + to_string(x.shape()));
  }
  auto xv = x.value(), gv = gain.value(), bv = bias.value();
  const std::size_t rows = xv.size() / n;
  std::vector<T> out(xv.size());
  std::vector<T> xhat(xv.size());
  std::vector<T> inv_std(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const T* row = xv.data() + r * n;
    T mu = 0;
    for (std::size_t c = 0; c < n; ++c) mu += row[c];
    mu /= static_cast<T>(n);
    T var = 0;
    for (std::size_t c = 0; c < n; ++c) var += (row[c] - mu) * (row[c] - mu);
    var /= static_cast<T>(n);
    inv_std[r] = T(1) / std::sqrt(var + eps);
    for (std::size_t c = 0; c < n; ++c) {
      const T h = (row[c] - mu) * inv_std[r];
      xhat[r * n + c] = h;
      out[r * n + c] = h * gv[c] + bv[c];
    }
  }
  Graph<T>& g = x.graph();
  const auto ix = x.id(), ig = gain.id(), ib = bias.id();
  return g.record(
      "layer_norm", x.shape(), std::move(out), {x, gain, bias},
      [&g, ix, ig, ib, rows, n, xhat = std::move(xhat), inv_std = std::move(inv_std)](
          std::span<const T> d) {
        auto gv = g.value_of(ig);
        if (g.needs_grad(ig)) {
          auto gg = g.grad_buffer(ig);
          for (std::size_t i = 0; i < d.size(); ++i) gg[i % n] += d[i] * xhat[i];
        }
        if (g.needs_grad(ib)) {
          auto gb = g.grad_buffer(ib);
          for (std::size_t i = 0; i < d.size(); ++i) gb[i % n] += d[i];
        }
        if (g.needs_grad(ix)) {
          auto gx = g.grad_buffer(ix);
          for (std::size_t r = 0; r < rows; ++r) {
            T mean_dh = 0, mean_dh_h = 0;
            for (std::size_t c = 0; c < n; ++c) {
              const T dh = d[r * n + c] * gv[c];
              mean_dh += dh;
              mean_dh_h += dh * xhat[r * n + c];
            }
            mean_dh /= static_cast<T>(n);
            mean_dh_h /= static_cast<T>(n);
            for (std::size_t c = 0; c < n; ++c) {
              const T dh = d[r * n + c] * gv[c];
              gx[r * n + c] += inv_std[r] * (dh - mean_dh - xhat[r * n + c] * mean_dh_h);
            }
          }
        }
      });
}

template <typename T>
Var<T> cross_entropy(Var<T> logits, std::size_t label) {
  auto z = logits.value();
  if (label >= z.size()) {
    throw InvalidInput("cross_entropy: label " + std::to_string(label) + " with " +
                       std::to_string(z.size()) + " classes");
  }
  const T mx = *std::max_element(z.begin(), z.end());
  T total = 0;
  for (T v : z) total += std::exp(v - mx);
  const T log_z = mx + std::log(total);
  std::vector<T> probs(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) probs[i] = std::exp(z[i] - log_z);
  Graph<T>& g = logits.graph();
  const auto il = logits.id();
  return g.record("cross_entropy", {1}, {log_z - z[label]}, {logits},
                  [&g, il, label, probs = std::move(probs)](std::span<const T> d) {
                    auto gl = g.grad_buffer(il);
                    for (std::size_t i = 0; i < probs.size(); ++i) {
                      gl[i] += d[0] * (probs[i] - (i == label ? T(1) : T(0)));
                    }
                  });
}

template <typename T>
Var<T> dropout(Var<T> x, double p, Rng& rng) {
  if (p < 0.0 || p >= 1.0) throw InvalidInput("dropout probability must be in [0, 1)");
  if (p == 0.0) return x;
  const T keep_scale = static_cast<T>(1.0 / (1.0 - p));
  auto xv = x.value();
  std::vector<T> mask(xv.size());
  std::vector<T> out(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) {
    mask[i] = rng.uniform() < p ? T(0) : keep_scale;
    out[i] = xv[i] * mask[i];
  }
  Graph<T>& g = x.graph();
  const auto ix = x.id();
  return g.record("dropout", x.shape(), std::move(out), {x},
                  [&g, ix, mask = std::move(mask)](std::span<const T> d) {
                    auto gx = g.grad_buffer(ix);
                    for (std::size_t i = 0; i < d.size(); ++i) gx[i] += d[i] * mask[i];
                  });
}

#define DSVIT_INSTANTIATE_OPS(T)                                                       \
  template Var<T> matmul(Var<T>, Var<T>);                                              \
  template Var<T> matmul_bt(Var<T>, Var<T>);                                           \
  template Var<T> add(Var<T>, Var<T>);                                                 \
  template Var<T> sub(Var<T>, Var<T>);                                                 \
  template Var<T> mul(Var<T>, Var<T>);                                                 \
  template Var<T> scale(Var<T>, T);                                                    \
  template Var<T> add_rowvec(Var<T>, Var<T>);                                          \
  template Var<T> relu(Var<T>);                                                        \
  template Var<T> softmax(Var<T>, std::size_t);                                        \
  template Var<T> mean(Var<T>, std::size_t);                                           \
  template Var<T> sum(Var<T>);                                                         \
  template Var<T> concat(std::span<const Var<T>>, std::size_t);                        \
  template Var<T> slice(Var<T>, std::size_t, std::size_t, std::size_t);                \
  template Var<T> reshape(Var<T>, Shape);                                              \
  template Var<T> embedding_lookup(Var<T>, std::span<const std::int32_t>);             \
  template Var<T> layer_norm(Var<T>, Var<T>, Var<T>, T);                               \
  template Var<T> cross_entropy(Var<T>, std::size_t);                                  \
  template Var<T> dropout(Var<T>, double, Rng&);

DSVIT_INSTANTIATE_OPS(float)
DSVIT_INSTANTIATE_OPS(double)

}  // namespace dsvit::num
