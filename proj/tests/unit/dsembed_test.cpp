#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "dsvit/model/dsembed.hpp"
#include "dsvit/numcore/ops.hpp"
#include "dsvit/numcore/rng.hpp"
#include "test_util.hpp"

using namespace dsvit;
using namespace dsvit::model;
using num::Graph;
using num::Tensor;
using testutil::random_tensor;

namespace {

slicer::PlaneTokens plane_of(std::size_t n, std::size_t p2, std::uint64_t seed, int num_regions) {
  slicer::PlaneTokens t;
  t.plane = slicer::Plane::kCoronal;
  t.count = n;
  t.patch_elems = p2;
  num::Rng rng(seed);
  for (std::size_t i = 0; i < n * p2; ++i) {
    t.mri.push_back(static_cast<float>(rng.uniform()));
    t.seg.push_back(static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(num_regions))));
  }
  for (std::size_t j = 0; j < n; ++j) {
    t.provenance.push_back({t.plane, static_cast<std::uint32_t>(j / 4), static_cast<std::uint32_t>(j % 4)});
  }
  return t;
}

}  // namespace

TEST(DsEmbed, ZeroProjectionAndTableGiveZeroTokens) {
  Graph<float> g(false);
  const auto plane = plane_of(6, 16, 1, 5);
  auto w = g.leaf(Tensor({16, 4}, 0.0f));
  auto pe = g.leaf(Tensor({10, 4}, 0.0f));
  const auto tok = embed_mri(w, pe, plane, 2);
  for (float v : tok.tokens.value()) EXPECT_EQ(v, 0.0f);
}

TEST(DsEmbed, ZeroProjectionLeavesPositionalRowsExactly) {
  Graph<float> g(false);
  const auto plane = plane_of(6, 16, 1, 5);
  auto w = g.leaf(Tensor({16, 4}, 0.0f));
  const Tensor pe_t = random_tensor<float>({10, 4}, 9);
  auto pe = g.leaf(pe_t);
  const auto tok = embed_mri(w, pe, plane, 3);
  for (std::size_t j = 0; j < 6; ++j) {
    for (std::size_t d = 0; d < 4; ++d) EXPECT_EQ(tok.tokens.value()[j * 4 + d], pe_t((3 + j), d));
  }
  EXPECT_EQ(tok.provenance, plane.provenance);
}

TEST(DsEmbed, SingleHotPatchReadsOneProjectionRow) {
  // p = 2 patch [[1, 0], [0, 0]] flattens to (1, 0, 0, 0), so the token is
  // row 0 of the [p^2 x D] projection plus the positional vector.
  Graph<float> g(false);
  const Tensor w_t({4, 3}, {0.5f, -1.0f, 2.0f, 9.0f, 9.0f, 9.0f, 7.0f, 7.0f, 7.0f, 3.0f, 3.0f, 3.0f});
  const Tensor pe_t({1, 3}, {0.25f, 0.125f, -0.5f});
  auto tok = embed_patches(g.leaf(w_t), g.leaf(pe_t), g.leaf(Tensor({1, 4}, {1.0f, 0.0f, 0.0f, 0.0f})));
  EXPECT_EQ(tok.tensor().data, (std::vector<float>{0.75f, -0.875f, 1.5f}));
}

TEST(DsEmbed, UniformPatchReturnsItsTableRow) {
  Graph<float> g(false);
  const Tensor table_t = random_tensor<float>({6, 8}, 2);
  auto table = g.leaf(table_t);
  auto pe = g.leaf(Tensor({1, 8}, 0.0f));
  for (std::int32_t k = 0; k < 6; ++k) {
    const std::vector<std::int32_t> labels(64, k);
    auto z = embed_labels(table, pe, labels, 64);
    for (std::size_t d = 0; d < 8; ++d) EXPECT_FLOAT_EQ(z.value()[d], table_t(k, d));
  }
}

TEST(DsEmbed, TwoPixelPatchAverages) {
  Graph<float> g(false);
  auto table = g.leaf(Tensor({2, 2}, {1.0f, 0.0f, 0.0f, 1.0f}));
  auto pe = g.leaf(Tensor({1, 2}, 0.0f));
  const std::vector<std::int32_t> labels{0, 1};
  auto z = embed_labels(table, pe, labels, 2);
  EXPECT_EQ(z.tensor().data, (std::vector<float>{0.5f, 0.5f}));
}

TEST(DsEmbed, PixelOrderInsidePatchNeverMatters) {
  const Tensor table_t = random_tensor<float>({7, 8}, 3);
  const Tensor pe_t = random_tensor<float>({5, 8}, 4);
  auto plane = plane_of(5, 64, 11, 7);
  Graph<float> g1(false);
  const Tensor a = embed_seg(g1.leaf(table_t), g1.leaf(pe_t), plane, 0).tokens.tensor();
  num::Rng rng(99);
  for (std::size_t j = 0; j < plane.count; ++j) {
    std::vector<std::int32_t> patch(plane.seg.begin() + j * 64, plane.seg.begin() + (j + 1) * 64);
    rng.shuffle(patch);
    std::copy(patch.begin(), patch.end(), plane.seg.begin() + j * 64);
  }
  Graph<float> g2(false);
  const Tensor b = embed_seg(g2.leaf(table_t), g2.leaf(pe_t), plane, 0).tokens.tensor();
  EXPECT_TRUE(num::bit_equal(a, b));
}

TEST(DsEmbed, SharedPositionalTableCouplesBothStreams) {
  const auto plane = plane_of(4, 16, 5, 4);
  const Tensor w = random_tensor<float>({16, 8}, 6, 0.02);
  const Tensor e = random_tensor<float>({4, 8}, 7, 0.02);
  Tensor pe = random_tensor<float>({4, 8}, 8, 0.02);
  auto run = [&](const Tensor& pe_t) {
    Graph<float> g(false);
    auto pe_v = g.leaf(pe_t);
    return std::pair{embed_mri(g.leaf(w), pe_v, plane, 0).tokens.tensor(),
                     embed_seg(g.leaf(e), pe_v, plane, 0).tokens.tensor()};
  };
  const auto [mri0, seg0] = run(pe);
  const float delta = 0.375f;
  pe(2, 5) += delta;
  const auto [mri1, seg1] = run(pe);
  for (std::size_t i = 0; i < mri0.size(); ++i) {
    if (i == 2 * 8 + 5) {
      EXPECT_NEAR(mri1.data[i] - mri0.data[i], delta, 1e-6);
      EXPECT_NEAR(seg1.data[i] - seg0.data[i], delta, 1e-6);
    } else {
      EXPECT_EQ(mri1.data[i], mri0.data[i]);
      EXPECT_EQ(seg1.data[i], seg0.data[i]);
    }
  }
  // With both contents zeroed the perturbation is visible bit-exactly.
  Graph<float> g(false);
  auto pe_v = g.leaf(pe);
  const Tensor zm = embed_mri(g.leaf(Tensor({16, 8}, 0.0f)), pe_v, plane, 0).tokens.tensor();
  const Tensor zs = embed_seg(g.leaf(Tensor({4, 8}, 0.0f)), pe_v, plane, 0).tokens.tensor();
  EXPECT_TRUE(num::bit_equal(zm, pe));
  EXPECT_TRUE(num::bit_equal(zs, pe));
}

TEST(DsEmbed, AbsentLabelsGetZeroGradient) {
  auto plane = plane_of(6, 16, 12, 3);  // labels drawn from {0, 1, 2}
  Graph<double> g(true);
  auto table = g.leaf(random_tensor<double>({6, 4}, 13), true);
  auto pe = g.leaf(random_tensor<double>({6, 4}, 14), true);
  auto z = embed_seg(table, pe, plane, 0).tokens;
  g.backward(num::sum(num::mul(z, z)));
  const auto grad = g.grad(table);
  for (std::size_t k = 0; k < 6; ++k) {
    double row = 0.0;
    for (std::size_t d = 0; d < 4; ++d) row += std::abs(grad(k, d));
    if (k < 3) EXPECT_GT(row, 0.0) << "label " << k;
    else EXPECT_EQ(row, 0.0) << "label " << k;
  }
}

TEST(DsEmbed, RelabelingWithPermutedRowsIsEquivariant) {
  const std::vector<std::int32_t> perm{3, 0, 4, 1, 2};
  auto plane = plane_of(5, 16, 21, 5);
  const Tensor table_t = random_tensor<float>({5, 8}, 22);
  Tensor permuted({5, 8});
  for (std::size_t k = 0; k < 5; ++k) {
    for (std::size_t d = 0; d < 8; ++d) permuted(static_cast<std::size_t>(perm[k]), d) = table_t(k, d);
  }
  const Tensor pe_t = random_tensor<float>({5, 8}, 23);
  Graph<float> g(false);
  const Tensor a = embed_seg(g.leaf(table_t), g.leaf(pe_t), plane, 0).tokens.tensor();
  for (auto& v : plane.seg) v = perm[static_cast<std::size_t>(v)];
  const Tensor b = embed_seg(g.leaf(permuted), g.leaf(pe_t), plane, 0).tokens.tensor();
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a.data[i], b.data[i], 1e-6);
}

TEST(DsEmbed, OutOfRangeLabelIsRejected) {
  auto plane = plane_of(2, 4, 1, 3);
  plane.seg[5] = 3;
  Graph<float> g(false);
  EXPECT_THROW(embed_seg(g.leaf(Tensor({3, 2}, 0.0f)), g.leaf(Tensor({2, 2}, 0.0f)), plane, 0), InvalidInput);
}

TEST(DsEmbed, ProjectionWidthMismatchIsRejected) {
  Graph<float> g(false);
  EXPECT_THROW(embed_patches(g.leaf(Tensor({9, 2})), g.leaf(Tensor({1, 2})), g.leaf(Tensor({1, 4}))),
               ShapeError);
}

TEST(DsEmbed, LabelsAsPixelsUseScaledValues) {
  auto plane = plane_of(1, 4, 1, 3);
  plane.seg = {0, 1, 2, 2};
  Graph<float> g(false);
  const Tensor w({4, 1}, {1.0f, 10.0f, 100.0f, 1000.0f});
  auto tok = embed_seg_as_pixels(g.leaf(w), g.leaf(Tensor({1, 1}, 0.0f)), plane, 0, 3);
  EXPECT_FLOAT_EQ(tok.tokens.item(), 0.0f + 5.0f + 100.0f + 1000.0f);
}
