#include "dsvit/model/encoder.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "dsvit/errors.hpp"
#include "dsvit/json_util.hpp"
#include "dsvit/numcore/ops.hpp"
#include "dsvit/synthvol/dsv_io.hpp"

namespace dsvit::model {

using num::Binding;
using num::ParamSet;
using num::Tensor;

void EncoderConfig::validate() const {
  if (dim == 0 || heads == 0 || dim % heads != 0) {
    throw InvalidInput("dim " + std::to_string(dim) + " must be a positive multiple of heads " +
                       std::to_string(heads));
  }
  if (n_cross_layers == 0) throw InvalidInput("at least one cross-plane layer is required");
  if (mlp_ratio == 0) throw InvalidInput("mlp_ratio must be >= 1");
  if (bottleneck_width() == 0 || bottleneck_width() >= 2 * dim) {
    throw InvalidInput("fusion_hidden must lie in [1, 2 * dim)");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) throw InvalidInput("dropout must lie in [0, 1)");
  if (n_classes < 2) throw InvalidInput("n_classes must be >= 2");
  if (num_regions < 2 || num_regions > 65535) throw InvalidInput("num_regions must lie in [2, 65535]");
  if (!use_mri_stream && !use_seg_stream) throw InvalidInput("both streams are disabled");
  slicer::check_geometry(dims, slicing);
}

void to_json(nlohmann::json& j, const EncoderConfig& c) {
  j = {{"dims", {c.dims.h, c.dims.w, c.dims.l}},
       {"num_regions", c.num_regions},
       {"patch_size", c.slicing.patch_size},
       {"slice_stride", c.slicing.slice_stride},
       {"dim", c.dim},
       {"heads", c.heads},
       {"n_self_layers", c.n_self_layers},
       {"n_cross_layers", c.n_cross_layers},
       {"mlp_ratio", c.mlp_ratio},
       {"fusion_hidden", c.bottleneck_width()},
       {"dropout", c.dropout},
       {"n_classes", c.n_classes},
       {"share_plane_weights", c.share_plane_weights},
       {"use_mri_stream", c.use_mri_stream},
       {"use_seg_stream", c.use_seg_stream},
       {"dual_stream_embedding", c.dual_stream_embedding}};
}

void from_json(const nlohmann::json& j, EncoderConfig& c) {
  reject_unknown(j,
                 {"dims", "num_regions", "patch_size", "slice_stride", "dim", "heads",
                  "n_self_layers", "n_cross_layers", "mlp_ratio", "fusion_hidden", "dropout",
                  "n_classes", "share_plane_weights", "use_mri_stream", "use_seg_stream",
                  "dual_stream_embedding"},
                 "encoder config");
  try {
    if (j.contains("dims")) {
      const auto& d = j.at("dims");
      if (!d.is_array() || d.size() != 3) throw InvalidInput("dims must be [h, w, l]");
      c.dims = synth::Dims{d[0].get<std::uint32_t>(), d[1].get<std::uint32_t>(),
                           d[2].get<std::uint32_t>()};
    }
    read_opt(j, "num_regions", c.num_regions);
    read_opt(j, "patch_size", c.slicing.patch_size);
    read_opt(j, "slice_stride", c.slicing.slice_stride);
    read_opt(j, "dim", c.dim);
    read_opt(j, "heads", c.heads);
    read_opt(j, "n_self_layers", c.n_self_layers);
    read_opt(j, "n_cross_layers", c.n_cross_layers);
    read_opt(j, "mlp_ratio", c.mlp_ratio);
    read_opt(j, "fusion_hidden", c.fusion_hidden);
    read_opt(j, "dropout", c.dropout);
    read_opt(j, "n_classes", c.n_classes);
    read_opt(j, "share_plane_weights", c.share_plane_weights);
    read_opt(j, "use_mri_stream", c.use_mri_stream);
    read_opt(j, "use_seg_stream", c.use_seg_stream);
    read_opt(j, "dual_stream_embedding", c.dual_stream_embedding);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("encoder config: ") + e.what());
  }
}

void apply_ablation(EncoderConfig& c, std::string_view arm) {
  c.use_mri_stream = true;
  c.use_seg_stream = true;
  c.dual_stream_embedding = true;
  if (arm == "dual" || arm == "none") return;
  if (arm == "wo_mri") {
    c.use_mri_stream = false;
  } else if (arm == "wo_seg") {
    c.use_seg_stream = false;
  } else if (arm == "wo_dual_emb") {
    c.dual_stream_embedding = false;
  } else {
    throw InvalidInput("unknown ablation mode '" + std::string(arm) +
                       "' (expected dual, wo_mri, wo_seg or wo_dual_emb)");
  }
}

std::string ablation_name(const EncoderConfig& c) {
  if (!c.use_mri_stream) return "wo_mri";
  if (!c.use_seg_stream) return "wo_seg";
  if (!c.dual_stream_embedding) return "wo_dual_emb";
  return "dual";
}

namespace {

std::string self_prefix(const EncoderConfig& c, std::size_t plane_index, std::size_t layer) {
  if (c.share_plane_weights) return "encoder/self/" + std::to_string(layer) + "/";
  return "encoder/self/" + slicer::to_string(slicer::kPlanes[plane_index]) + "/" +
         std::to_string(layer) + "/";
}

std::string cross_prefix(std::size_t layer) { return "encoder/cross/" + std::to_string(layer) + "/"; }

Tensor gaussian(num::Rng& rng, num::Shape shape, double std = 0.02) {
  Tensor t(std::move(shape), 0.0f);
  for (float& v : t.data) v = static_cast<float>(rng.normal(0.0, std));
  return t;
}

// Weight matrix [fan_in x fan_out] with std 1 / sqrt(fan_in).
Tensor dense(num::Rng& rng, std::size_t fan_in, std::size_t fan_out) {
  return gaussian(rng, {fan_in, fan_out}, 1.0 / std::sqrt(static_cast<double>(fan_in)));
}

void add_block(ParamSet<float>& ps, num::Rng& rng, const std::string& pre, std::size_t d,
               std::size_t ratio) {
  ps.add(pre + "ln1/gain", Tensor({d}, 1.0f));
  ps.add(pre + "ln1/bias", Tensor({d}, 0.0f));
  ps.add(pre + "attn/w_qkv", dense(rng, d, 3 * d));
  ps.add(pre + "attn/b_qkv", Tensor({3 * d}, 0.0f));
  ps.add(pre + "attn/w_o", dense(rng, d, d));
  ps.add(pre + "attn/b_o", Tensor({d}, 0.0f));
  ps.add(pre + "ln2/gain", Tensor({d}, 1.0f));
  ps.add(pre + "ln2/bias", Tensor({d}, 0.0f));
  ps.add(pre + "mlp/w1", dense(rng, d, ratio * d));
  ps.add(pre + "mlp/b1", Tensor({ratio * d}, 0.0f));
  ps.add(pre + "mlp/w2", dense(rng, ratio * d, d));
  ps.add(pre + "mlp/b2", Tensor({d}, 0.0f));
}

template <typename T>
Var<T> maybe_dropout(Var<T> x, const EncoderConfig& c, const ForwardOptions& opts) {
  if (!opts.training || c.dropout == 0.0) return x;
  if (opts.rng == nullptr) throw InvalidInput("training forward needs a random source");
  return num::dropout(x, c.dropout, *opts.rng);
}

template <typename T>
Var<T> attention(const Binding<T>& b, const std::string& pre, Var<T> x, std::size_t heads) {
  const std::size_t d = x.shape()[1];
  const std::size_t dh = d / heads;
  const T inv_sqrt = T(1) / std::sqrt(static_cast<T>(dh));
  Var<T> qkv = num::add_rowvec(num::matmul(x, b[pre + "attn/w_qkv"]), b[pre + "attn/b_qkv"]);
  std::vector<Var<T>> outs;
  outs.reserve(heads);
  for (std::size_t h = 0; h < heads; ++h) {
    Var<T> q = num::scale(num::slice(qkv, 1, h * dh, dh), inv_sqrt);
    Var<T> k = num::slice(qkv, 1, d + h * dh, dh);
    Var<T> v = num::slice(qkv, 1, 2 * d + h * dh, dh);
    Var<T> a = num::softmax(num::matmul_bt(q, k), 1);
    outs.push_back(num::matmul(a, v));
  }
  Var<T> o = heads == 1 ? outs[0] : num::concat<T>(std::span<const Var<T>>(outs), 1);
  return num::add_rowvec(num::matmul(o, b[pre + "attn/w_o"]), b[pre + "attn/b_o"]);
}

template <typename T>
Var<T> block(const Binding<T>& b, const EncoderConfig& c, const std::string& pre, Var<T> x,
             const ForwardOptions& opts) {
  Var<T> h = num::layer_norm(x, b[pre + "ln1/gain"], b[pre + "ln1/bias"]);
  x = num::add(x, maybe_dropout(attention(b, pre, h, c.heads), c, opts));
  h = num::layer_norm(x, b[pre + "ln2/gain"], b[pre + "ln2/bias"]);
  h = num::relu(num::add_rowvec(num::matmul(h, b[pre + "mlp/w1"]), b[pre + "mlp/b1"]));
  h = num::add_rowvec(num::matmul(h, b[pre + "mlp/w2"]), b[pre + "mlp/b2"]);
  return num::add(x, maybe_dropout(h, c, opts));
}

}  // namespace

ParamSet<float> init_params(const EncoderConfig& c, std::uint64_t seed) {
  c.validate();
  num::Rng rng(num::mix_seed(seed, 0x1417));
  const std::size_t d = c.dim;
  const std::size_t p2 = std::size_t{c.slicing.patch_size} * c.slicing.patch_size;
  ParamSet<float> ps;
  ps.add("embed/w_proj", dense(rng, p2, d));
  ps.add("embed/E", gaussian(rng, {static_cast<std::size_t>(c.num_regions), d}, 1.0));
  ps.add("embed/pe", gaussian(rng, {c.token_count(), d}));
  const std::size_t h = c.bottleneck_width();
  for (Plane p : slicer::kPlanes) {
    const std::string pre = "fusion/" + slicer::to_string(p) + "/";
    ps.add(pre + "w1", dense(rng, 2 * d, h));
    ps.add(pre + "b1", Tensor({h}, 0.0f));
    ps.add(pre + "w2", dense(rng, h, d));
    ps.add(pre + "b2", Tensor({d}, 0.0f));
  }
  const std::size_t plane_sets = c.share_plane_weights ? 1 : 3;
  for (std::size_t p = 0; p < plane_sets; ++p) {
    for (std::size_t l = 0; l < c.n_self_layers; ++l) add_block(ps, rng, self_prefix(c, p, l), d, c.mlp_ratio);
  }
  for (std::size_t l = 0; l < c.n_cross_layers; ++l) add_block(ps, rng, cross_prefix(l), d, c.mlp_ratio);
  ps.add("encoder/cls", gaussian(rng, {1, d}));
  ps.add("encoder/norm/gain", Tensor({d}, 1.0f));
  ps.add("encoder/norm/bias", Tensor({d}, 0.0f));
  ps.add("head/w", dense(rng, d, c.n_classes));
  ps.add("head/b", Tensor({c.n_classes}, 0.0f));
  return ps;
}

template <typename T>
BottleneckMLP<T> bottleneck(const Binding<T>& b, Plane plane) {
  const std::string pre = "fusion/" + slicer::to_string(plane) + "/";
  return {plane, b[pre + "w1"], b[pre + "b1"], b[pre + "w2"], b[pre + "b2"]};
}

template <typename T>
FusedTokenMatrix<T> embed_and_fuse(const Binding<T>& b, const EncoderConfig& c,
                                   const slicer::PatchedSample& sample) {
  if (sample.token_count() != c.token_count()) {
    throw ShapeError("sample has " + std::to_string(sample.token_count()) +
                     " tokens, model expects " + std::to_string(c.token_count()));
  }
  Var<T> w_proj = b["embed/w_proj"];
  Var<T> table = b["embed/E"];
  Var<T> pe = b["embed/pe"];
  Graph<T>& g = pe.graph();
  std::array<TokenMatrix<T>, 3> fused;
  std::size_t offset = 0;
  for (std::size_t p = 0; p < 3; ++p) {
    const slicer::PlaneTokens& pt = sample.planes[p];
    if (pt.plane != slicer::kPlanes[p]) throw InvariantViolation("sample planes out of order");
    TokenMatrix<T> mri = c.use_mri_stream ? embed_mri(w_proj, pe, pt, offset) : zero_tokens(g, pt, c.dim);
    TokenMatrix<T> seg = !c.use_seg_stream          ? zero_tokens(g, pt, c.dim)
                         : c.dual_stream_embedding ? embed_seg(table, pe, pt, offset)
                                                   : embed_seg_as_pixels(w_proj, pe, pt, offset, c.num_regions);
    fused[p] = fuse_plane(bottleneck(b, pt.plane), mri, seg, pt.plane);
    offset += pt.count;
  }
  return concat_planes(fused[0], fused[1], fused[2]);
}

template <typename T>
Var<T> plane_self_attention(const Binding<T>& b, const EncoderConfig& c, Var<T> tokens,
                            std::size_t plane_index, const ForwardOptions& opts) {
  for (std::size_t l = 0; l < c.n_self_layers; ++l) {
    tokens = block(b, c, self_prefix(c, plane_index, l), tokens, opts);
  }
  return tokens;
}

template <typename T>
ForwardResult<T> encode(const Binding<T>& b, const EncoderConfig& c, const FusedTokenMatrix<T>& fused,
                        const ForwardOptions& opts) {
  if (fused.tokens.shape().size() != 2 || fused.tokens.shape()[1] != c.dim) {
    throw ShapeError("encode: token matrix " + num::to_string(fused.tokens.shape()) +
                     " does not have width " + std::to_string(c.dim));
  }
  std::vector<Var<T>> parts;
  parts.push_back(b["encoder/cls"]);
  for (std::size_t p = 0; p < 3; ++p) {
    parts.push_back(plane_self_attention(b, c, num::slice(fused.tokens, 0, fused.bounds[p], fused.segment_size(p)), p, opts));
  }
  Var<T> x = num::concat<T>(std::span<const Var<T>>(parts), 0);
  for (std::size_t l = 0; l < c.n_cross_layers; ++l) x = block(b, c, cross_prefix(l), x, opts);
  Var<T> m = num::layer_norm(num::slice(x, 0, 0, 1), b["encoder/norm/gain"], b["encoder/norm/bias"]);
  Var<T> logits = num::add_rowvec(num::matmul(m, b["head/w"]), b["head/b"]);
  return {logits, m};
}

template <typename T>
ForwardResult<T> forward(const Binding<T>& b, const EncoderConfig& c,
                         const slicer::PatchedSample& sample, const ForwardOptions& opts) {
  return encode(b, c, embed_and_fuse(b, c, sample), opts);
}

Prediction predict(std::span<const float> logits) {
  if (logits.empty()) throw InvalidInput("predict: empty logits");
  std::size_t best = 0;
  for (std::size_t i = 1; i < logits.size(); ++i) {
    if (logits[i] > logits[best]) best = i;
  }
  double total = 0.0;
  for (float z : logits) total += std::exp(static_cast<double>(z) - logits[best]);
  return {best, 1.0 / total};
}

ScanFeature infer(const ParamSet<float>& params, const EncoderConfig& c,
                  const slicer::PatchedSample& sample) {
  num::Graph<float> g(false);
  Binding<float> b(g, params, false);
  const auto r = forward(b, c, sample);
  ScanFeature out;
  out.logits.assign(r.logits.value().begin(), r.logits.value().end());
  out.m.assign(r.feature.value().begin(), r.feature.value().end());
  return out;
}

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  std::memcpy(b, &v, 4);
  out.write(b, 4);
}

std::uint32_t get_u32(std::istream& in) {
  char b[4];
  if (!in.read(b, 4)) throw FormatError("checkpoint truncated");
  std::uint32_t v;
  std::memcpy(&v, b, 4);
  return v;
}

std::string get_bytes(std::istream& in, std::uint32_t n) {
  std::string s(n, '\0');
  if (n > 0 && !in.read(s.data(), n)) throw FormatError("checkpoint truncated");
  return s;
}

}  // namespace

std::string checkpoint_bytes(const Checkpoint& ckpt) {
  std::ostringstream out(std::ios::binary);
  nlohmann::json shapes = nlohmann::json::object();
  for (std::size_t i = 0; i < ckpt.params.size(); ++i) {
    const auto& s = ckpt.params.at(i).shape;
    if (s.size() > 3) throw InvalidInput("checkpoint tensors are limited to rank 3");
    shapes[ckpt.params.name(i)] = s;
  }
  const std::string meta =
      nlohmann::json{{"checkpoint_version", kCheckpointVersion}, {"config", ckpt.config}, {"shapes", shapes}}.dump();
  out.write(kCheckpointMagic.data(), kCheckpointMagic.size());
  put_u32(out, static_cast<std::uint32_t>(meta.size()));
  out.write(meta.data(), static_cast<std::streamsize>(meta.size()));
  put_u32(out, static_cast<std::uint32_t>(ckpt.params.size()));
  for (std::size_t i = 0; i < ckpt.params.size(); ++i) {
    const std::string& name = ckpt.params.name(i);
    const Tensor& t = ckpt.params.at(i);
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    std::array<std::uint32_t, 3> dims{1, 1, 1};
    for (std::size_t a = 0; a < t.shape.size(); ++a) dims[a] = static_cast<std::uint32_t>(t.shape[a]);
    synth::write_dsv(out, synth::DsvType::kF32, dims, t.data, {});
  }
  return std::move(out).str();
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const std::string bytes = checkpoint_bytes(ckpt);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write checkpoint " + path.string());
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kCheckpointMagic) {
    throw FormatError(path.string() + " is not a checkpoint (bad magic)");
  }
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(get_bytes(in, get_u32(in)));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint metadata: ") + e.what());
  }
  if (!meta.contains("checkpoint_version") || meta["checkpoint_version"] != kCheckpointVersion) {
    throw InvalidInput("checkpoint version mismatch in " + path.string() + " (expected " +
                       std::to_string(kCheckpointVersion) + ")");
  }
  Checkpoint ckpt;
  ckpt.config = meta.value("config", nlohmann::json::object());
  const auto& shapes = meta.at("shapes");
  const std::uint32_t count = get_u32(in);
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = get_bytes(in, get_u32(in));
    synth::DsvRecord rec = synth::read_dsv(in);
    if (rec.type != synth::DsvType::kF32) throw FormatError("checkpoint tensor " + name + " is not f32");
    if (!shapes.contains(name)) throw FormatError("checkpoint tensor " + name + " has no shape");
    num::Shape shape = shapes.at(name).get<num::Shape>();
    if (num::numel(shape) != rec.f32.size()) throw FormatError("checkpoint tensor " + name + " size mismatch");
    ckpt.params.add(std::move(name), Tensor(std::move(shape), std::move(rec.f32)));
  }
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes in checkpoint");
  return ckpt;
}

#define DSVIT_INSTANTIATE(T)                                                                      \
  template BottleneckMLP<T> bottleneck(const Binding<T>&, Plane);                                \
  template FusedTokenMatrix<T> embed_and_fuse(const Binding<T>&, const EncoderConfig&,           \
                                              const slicer::PatchedSample&);                     \
  template Var<T> plane_self_attention(const Binding<T>&, const EncoderConfig&, Var<T>,          \
                                       std::size_t, const ForwardOptions&);                      \
  template ForwardResult<T> encode(const Binding<T>&, const EncoderConfig&,                      \
                                   const FusedTokenMatrix<T>&, const ForwardOptions&);           \
  template ForwardResult<T> forward(const Binding<T>&, const EncoderConfig&,                     \
                                    const slicer::PatchedSample&, const ForwardOptions&);
DSVIT_INSTANTIATE(float)
DSVIT_INSTANTIATE(double)
#undef DSVIT_INSTANTIATE

}  // namespace dsvit::model
