#include "dsvit/model/rtab.hpp"

#include <cmath>

#include "dsvit/errors.hpp"
#include "dsvit/json_util.hpp"
#include "dsvit/numcore/ops.hpp"

namespace dsvit::model {

void RtabConfig::validate() const {
  if (dim == 0) throw InvalidInput("rtab dim must be >= 1");
  if (n_classes < 2) throw InvalidInput("rtab n_classes must be >= 2");
}

void to_json(nlohmann::json& j, const RtabConfig& c) {
  j = {{"dim", c.dim}, {"hidden", c.fusion_width()}, {"n_classes", c.n_classes}};
}

void from_json(const nlohmann::json& j, RtabConfig& c) {
  reject_unknown(j, {"dim", "hidden", "n_classes"}, "rtab config");
  try {
    read_opt(j, "dim", c.dim);
    read_opt(j, "hidden", c.hidden);
    read_opt(j, "n_classes", c.n_classes);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("rtab config: ") + e.what());
  }
}

num::ParamSet<float> init_rtab_params(const RtabConfig& c, std::uint64_t seed) {
  c.validate();
  num::Rng rng(num::mix_seed(seed, 0x27AB));
  auto dense = [&](std::size_t fan_in, std::size_t fan_out) {
    num::Tensor t({fan_in, fan_out}, 0.0f);
    const double std = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (float& v : t.data) v = static_cast<float>(rng.normal(0.0, std));
    return t;
  };
  const std::size_t d = c.dim, h = c.fusion_width();
  num::ParamSet<float> ps;
  ps.add("rtab/fuse/w1", dense(2 * d, h));
  ps.add("rtab/fuse/b1", num::Tensor({h}, 0.0f));
  ps.add("rtab/fuse/w2", dense(h, d));
  ps.add("rtab/fuse/b2", num::Tensor({d}, 0.0f));
  ps.add("rtab/w_a", dense(d, 1));
  // Stored [n_classes x d]; fan-in is d.
  num::Tensor w_c = dense(d, c.n_classes);
  ps.add("rtab/w_c", num::Tensor({c.n_classes, d}, std::move(w_c.data)));
  ps.add("rtab/b_c", num::Tensor({c.n_classes}, 0.0f));
  return ps;
}

namespace {

template <typename T>
void check_sequence(std::span<const Var<T>> seq) {
  if (seq.empty()) throw InvalidInput("feature sequence is empty");
  for (const Var<T>& m : seq) {
    if (m.shape() != seq[0].shape()) {
      throw ShapeError("feature sequence mixes shapes " + num::to_string(seq[0].shape()) + " and " +
                       num::to_string(m.shape()));
    }
  }
}

}  // namespace

template <typename T>
std::vector<Var<T>> residuals(std::span<const Var<T>> seq) {
  check_sequence(seq);
  std::vector<Var<T>> out;
  for (std::size_t t = 1; t < seq.size(); ++t) out.push_back(num::sub(seq[t], seq[t - 1]));
  return out;
}

template <typename T>
Var<T> fuse_residual(const num::Binding<T>& b, Var<T> m, Var<T> r) {
  if (m.shape() != r.shape()) {
    throw ShapeError("fuse_residual: " + num::to_string(m.shape()) + " vs " + num::to_string(r.shape()));
  }
  Var<T> x = num::concat({m, r}, 1);
  Var<T> h = num::relu(num::add_rowvec(num::matmul(x, b["rtab/fuse/w1"]), b["rtab/fuse/b1"]));
  return num::add_rowvec(num::matmul(h, b["rtab/fuse/w2"]), b["rtab/fuse/b2"]);
}

template <typename T>
std::vector<Var<T>> residual_fusion(const num::Binding<T>& b, std::span<const Var<T>> seq) {
  const std::vector<Var<T>> r = residuals(seq);
  std::vector<Var<T>> out{seq[0]};
  for (std::size_t t = 1; t < seq.size(); ++t) out.push_back(fuse_residual(b, seq[t], r[t - 1]));
  return out;
}

template <typename T>
Pooled<T> attention_pool(Var<T> w_a, std::span<const Var<T>> x) {
  check_sequence(x);
  const std::size_t steps = x.size();
  const std::size_t d = x[0].size();
  std::vector<Var<T>> rows;
  rows.reserve(steps);
  for (const Var<T>& m : x) rows.push_back(num::reshape(m, {1, d}));
  Var<T> stacked = steps == 1 ? rows[0] : num::concat<T>(std::span<const Var<T>>(rows), 0);
  Var<T> weights = num::softmax(num::matmul(stacked, w_a), 0);
  Var<T> p = num::matmul(num::reshape(weights, {1, steps}), stacked);
  return {p, weights};
}

template <typename T>
Var<T> classify(Var<T> w_c, Var<T> b_c, Var<T> p) {
  if (p.shape().size() != 2 || p.shape()[0] != 1) p = num::reshape(p, {1, p.size()});
  return num::add_rowvec(num::matmul_bt(p, w_c), b_c);
}

template <typename T>
SequenceResult<T> rtab_forward(const num::Binding<T>& b, std::span<const Var<T>> features) {
  const std::vector<Var<T>> fused = residual_fusion(b, features);
  const Pooled<T> pooled = attention_pool(b["rtab/w_a"], std::span<const Var<T>>(fused));
  return {classify(b["rtab/w_c"], b["rtab/b_c"], pooled.p), pooled.weights};
}

template <typename T>
SequenceResult<T> forward_sequence(const num::Binding<T>& b, const EncoderConfig& c,
                                   std::span<const slicer::PatchedSample> scans,
                                   const ForwardOptions& opts) {
  std::vector<Var<T>> features;
  for (const auto& s : scans) features.push_back(forward(b, c, s, opts).feature);
  return rtab_forward(b, std::span<const Var<T>>(features));
}

#define DSVIT_INSTANTIATE(T)                                                                   \
  template std::vector<Var<T>> residuals(std::span<const Var<T>>);                            \
  template Var<T> fuse_residual(const num::Binding<T>&, Var<T>, Var<T>);                      \
  template std::vector<Var<T>> residual_fusion(const num::Binding<T>&, std::span<const Var<T>>); \
  template Pooled<T> attention_pool(Var<T>, std::span<const Var<T>>);                         \
  template Var<T> classify(Var<T>, Var<T>, Var<T>);                                           \
  template SequenceResult<T> rtab_forward(const num::Binding<T>&, std::span<const Var<T>>);   \
  template SequenceResult<T> forward_sequence(const num::Binding<T>&, const EncoderConfig&,   \
                                              std::span<const slicer::PatchedSample>,         \
                                              const ForwardOptions&);
DSVIT_INSTANTIATE(float)
DSVIT_INSTANTIATE(double)
#undef DSVIT_INSTANTIATE

}  // namespace dsvit::model
