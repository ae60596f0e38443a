// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "support/grad_cases.hpp"
#include "support/oracles.hpp"
#include "templink/error.hpp"
#include "templink/nn/kernels.hpp"
#include "templink/nn/layers.hpp"
#include "templink/nn/ops.hpp"
#include "templink/nn/optim.hpp"
#include "templink/rng.hpp"

namespace fs = std::filesystem;
using namespace templink;
using namespace templink::nn;
using templink::check::GradCase;
using templink::check::random_tensor;

namespace {

constexpr double kGradTolerance = 1e-4;

void expect_all_pass(const std::vector<GradCase>& cases) {
  ASSERT_GE(cases.size(), 5u);
  for (const auto& c : cases) {
    EXPECT_LT(c.result.max_rel_error, kGradTolerance) << c.block << " " << c.shape << ": " << c.result.worst;
    EXPECT_GT(c.result.checked, 0u);
  }
}

LocalCsr path3() {
  LocalCsr adj;
  adj.offsets = {0, 1, 3, 4};
  adj.targets = {1, 0, 2, 1};
  return adj;
}

}  // namespace

// ---------------------------------------------------------------------------
// Kernels: every SIMD table must agree with the scalar reference.

class KernelEquivalence : public ::testing::TestWithParam<kernels::Isa> {};

TEST_P(KernelEquivalence, MatchesScalarReference) {
  if (!kernels::supported(GetParam())) GTEST_SKIP() << "ISA not available on this machine";
  const auto& ref = kernels::table(kernels::Isa::scalar);
  const auto& simd = kernels::table(GetParam());
  Rng rng(1, {});
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t m = 1 + rng.below(13), k = 1 + rng.below(37), n = 1 + rng.below(19);
    const auto a = random_tensor({m, k}, trial);
    const auto b = random_tensor({k, n}, trial + 1000);
    const auto g = random_tensor({m, n}, trial + 2000);
    auto close = [](const Tensor& x, const Tensor& y) {
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (std::abs(x[i] - y[i]) > 1e-12 * (1.0 + std::abs(x[i]))) return false;
      }
      return true;
    };
    Tensor c1({m, n}, 0.5), c2({m, n}, 0.5);
    ref.gemm(m, k, n, a.data(), b.data(), c1.data());
    simd.gemm(m, k, n, a.data(), b.data(), c2.data());
    EXPECT_TRUE(close(c1, c2)) << "gemm " << m << "x" << k << "x" << n;

    Tensor t1({k, n}), t2({k, n});
    ref.gemm_tn(m, k, n, a.data(), g.data(), t1.data());
    simd.gemm_tn(m, k, n, a.data(), g.data(), t2.data());
    EXPECT_TRUE(close(t1, t2)) << "gemm_tn";

    Tensor u1({m, k}), u2({m, k});
    ref.gemm_nt(m, n, k, g.data(), b.data(), u1.data());
    simd.gemm_nt(m, n, k, g.data(), b.data(), u2.data());
    EXPECT_TRUE(close(u1, u2)) << "gemm_nt";

    const auto src = random_tensor(b.shape(), trial + 3000);
    Tensor y1 = b, y2 = b;
    ref.axpy(b.size(), 0.3, src.data(), y1.data());
    simd.axpy(b.size(), 0.3, src.data(), y2.data());
    EXPECT_TRUE(close(y1, y2)) << "axpy";
    const double d1 = ref.dot(k, a.data(), b.data());
    const double d2 = simd.dot(k, a.data(), b.data());
    EXPECT_NEAR(d1, d2, 1e-12 * (1.0 + std::abs(d1))) << "dot";
  }
}

TEST_P(KernelEquivalence, RowResultsDoNotDependOnBatchPosition) {
  if (!kernels::supported(GetParam())) GTEST_SKIP() << "ISA not available on this machine";
  const auto& t = kernels::table(GetParam());
  const std::size_t m = 9, k = 21, n = 7;
  const auto a = random_tensor({m, k}, 5);
  const auto b = random_tensor({k, n}, 6);
  Tensor all({m, n});
  t.gemm(m, k, n, a.data(), b.data(), all.data());
  for (std::size_t i = 0; i < m; ++i) {
    Tensor one({1, n});
    t.gemm(1, k, n, a.data() + i * k, b.data(), one.data());
    for (std::size_t j = 0; j < n; ++j) EXPECT_EQ(one[j], all.at(i, j));
  }
}

INSTANTIATE_TEST_SUITE_P(Isas, KernelEquivalence,
                         ::testing::Values(kernels::Isa::scalar, kernels::Isa::avx2, kernels::Isa::neon),
                         [](const auto& info) { return std::string(kernels::to_string(info.param)); });

TEST(Kernels, SelectSwitchesTheActiveTable) {
  const auto before = kernels::active().isa;
  kernels::select(kernels::Isa::scalar);
  EXPECT_EQ(kernels::active().isa, kernels::Isa::scalar);
  kernels::select(before);
  if (!kernels::supported(kernels::Isa::neon)) {
    EXPECT_THROW(kernels::table(kernels::Isa::neon), Error);
  }
}

// ---------------------------------------------------------------------------
// Forward values worked by hand.

TEST(Ops, MatmulAndBroadcastBias) {
  Tape tape;
  auto a = tape.constant(Tensor({2, 2}, {1, 2, 3, 4}));
  auto b = tape.constant(Tensor({2, 1}, {5, 6}));
  auto y = add_bias(matmul(a, b), tape.constant(Tensor({1}, {1})));
  EXPECT_EQ(y.value(), Tensor({2, 1}, {18, 40}));
  EXPECT_THROW(matmul(a, tape.constant(Tensor({3, 1}))), Error);
}

TEST(Ops, NeighborMeanWeightedAndIsolated) {
  // path 0-1-2 plus isolated node 3
  LocalCsr adj = path3();
  adj.offsets.push_back(4);
  Tape tape;
  auto h = tape.constant(Tensor({4, 1}, {1, 2, 4, 8}));
  EXPECT_EQ(neighbor_mean(h, adj, nullptr).value(), Tensor({4, 1}, {2, 2.5, 2, 8}));
  auto w = tape.constant(Tensor({4}, {0.5, 0.5, 0.25, 0.25}));
  // row 1: (0.5 * 1 + 0.25 * 4) / 2
  EXPECT_EQ(neighbor_mean(h, adj, &w).value(), Tensor({4, 1}, {1, 0.75, 0.5, 8}));
}

TEST(Ops, BceMatchesClosedForm) {
  Tape tape;
  auto logits = tape.constant(Tensor({2, 1}, {0.0, 2.0}));
  const std::vector<double> labels{1.0, 0.0};
  const double expected = 0.5 * (std::log(2.0) + std::log1p(std::exp(2.0)));
  EXPECT_NEAR(bce_with_logits(logits, labels).value()[0], expected, 1e-15);
  auto big = tape.constant(Tensor({1, 1}, {800.0}));
  EXPECT_TRUE(std::isfinite(bce_with_logits(big, std::vector<double>{0.0}).value()[0]));
}

TEST(Ops, StepIsNotDifferentiable) {
  Tape tape;
  auto x = tape.leaf(Tensor({2}, {-1.0, 3.0}));
  auto s = step(x);
  EXPECT_EQ(s.value(), Tensor({2}, {0.0, 1.0}));
  try {
    tape.backward(sum(mul(s, x)));
    FAIL() << "expected not_differentiable";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::not_differentiable);
  }
}

TEST(Ops, LeafGradientsOfSimpleExpression) {
  Tape tape;
  auto x = tape.leaf(Tensor({2}, {1.0, -2.0}));
  auto y = tape.leaf(Tensor({2}, {3.0, 0.5}));
  tape.backward(sum(mul(add(x, y), x)));  // d/dx = 2x + y, d/dy = x
  EXPECT_EQ(tape.grad(x), Tensor({2}, {5.0, -3.5}));
  EXPECT_EQ(tape.grad(y), Tensor({2}, {1.0, -2.0}));
}

TEST(Layers, ZeroGruHalvesTheState) {
  ParameterStore store;
  auto cell = GruCell::create(store, "gru", 2, 3, 1);
  for (auto* p : store.all()) p->value.fill(0.0);
  Tape tape;
  auto out = cell.step(tape, tape.constant(Tensor({1, 2}, {5, -5})), tape.constant(Tensor({1, 3}, {1, -2, 4})));
  EXPECT_EQ(out.value(), Tensor({1, 3}, {0.5, -1.0, 2.0}));
}

TEST(Layers, GruRunStopsAtLength) {
  ParameterStore store;
  auto cell = GruCell::create(store, "gru", 1, 2, 3);
  Tensor data({2, 3, 1}, {1, 2, 3, 1, 2, 99});
  const std::vector<std::uint32_t> lengths{3, 2};
  Tape tape;
  auto h = cell.run(tape, data, lengths);
  Tensor two({1, 2, 1}, {1, 2});
  const std::vector<std::uint32_t> len2{2};
  auto h2 = cell.run(tape, two, len2);
  EXPECT_EQ(h.value().at(1, 0), h2.value().at(0, 0));
  EXPECT_EQ(h.value().at(1, 1), h2.value().at(0, 1));
}

TEST(Layers, SortPoolOrdersByLastChannelAndPads) {
  Tape tape;
  // one graph: rows (0,3) (7,1) (2,5) (9,1) -> last channel 5,3,1,1; ties by previous channel
  auto h = tape.constant(Tensor({4, 2}, {0, 3, 7, 1, 2, 5, 9, 1}));
  const std::vector<std::uint32_t> offsets{0, 4};
  EXPECT_EQ(sort_pool(h, offsets, 5).value(), Tensor({5, 2}, {2, 5, 0, 3, 9, 1, 7, 1, 0, 0}));
  EXPECT_EQ(sort_pool(h, offsets, 2).value(), Tensor({2, 2}, {2, 5, 0, 3}));
}

TEST(Layers, TwoNodePoolTakesTargets) {
  Tape tape;
  auto h = tape.constant(Tensor({5, 1}, {1, 2, 3, 4, 5}));
  const std::vector<std::uint32_t> offsets{0, 3, 5};
  EXPECT_EQ(two_node_pool(h, offsets).value(), Tensor({2, 2}, {1, 2, 4, 5}));
  const std::vector<std::uint32_t> bad{0, 1};
  EXPECT_THROW(two_node_pool(h, bad), Error);
}

TEST(Layers, Conv1dReadoutMaxOverWindows) {
  ParameterStore store;
  auto r = Conv1dReadout::create(store, "r", 1, 2, 1, Activation::identity, 1);
  r.kernel->value = Tensor({2, 1}, {1, -1});
  r.bias->value.fill(0.0);
  Tape tape;
  // K = 4 slots with values 1, 5, 2, 2: window differences -4, 3, 0
  auto out = r.forward(tape, tape.constant(Tensor({4, 1}, {1, 5, 2, 2})), 4);
  EXPECT_EQ(out.value(), Tensor({1, 1}, {3}));
}

TEST(Layers, InitializationIsKeyedByName) {
  ParameterStore a, b;
  Dense::create(a, "x", 3, 2, Activation::relu, 9);
  Dense::create(b, "y", 4, 4, Activation::relu, 9);
  Dense::create(b, "x", 3, 2, Activation::relu, 9);
  EXPECT_EQ(a.get("x.w").value, b.get("x.w").value);
  for (double v : a.get("x.w").value.values()) EXPECT_LE(std::abs(v), 1.0 / std::sqrt(3.0));
}

// ---------------------------------------------------------------------------
// Finite-difference gradients.

TEST(Gradients, Dense) { expect_all_pass(check::dense_cases()); }
TEST(Gradients, GruStep) { expect_all_pass(check::gru_cases()); }
TEST(Gradients, GraphConvUnweighted) { expect_all_pass(check::graph_conv_cases(false)); }
TEST(Gradients, GraphConvWeighted) { expect_all_pass(check::graph_conv_cases(true)); }
TEST(Gradients, Conv1dReadout) { expect_all_pass(check::conv1d_readout_cases()); }
TEST(Gradients, SortPoolPath) { expect_all_pass(check::sort_pool_cases()); }
TEST(Gradients, TwoNodePool) { expect_all_pass(check::two_node_pool_cases()); }
TEST(Gradients, SealForward) { expect_all_pass(check::seal_forward_cases()); }

TEST(Gradients, GruRunThroughTime) {
  ParameterStore store;
  auto cell = GruCell::create(store, "gru", 2, 3, 4);
  const auto data = random_tensor({2, 4, 2}, 8);
  const std::vector<std::uint32_t> lengths{4, 2};
  const auto r = check::check_gradients(store, [&](Tape& tape) {
    return check::probe_loss(cell.run(tape, data, lengths), 3);
  });
  EXPECT_LT(r.max_rel_error, kGradTolerance) << r.worst;
}

// ---------------------------------------------------------------------------
// Optimizer and checkpoints.

TEST(Adam, FirstStepMovesByLearningRateTimesSign) {
  ParameterStore store;
  auto& p = store.add("p", Tensor({3}, {1.0, 1.0, 1.0}));
  p.grad = Tensor({3}, {2.0, -0.5, 0.0});
  AdamState state;
  AdamConfig cfg;
  cfg.lr = 0.1;
  adam_step(store, state, cfg);
  EXPECT_NEAR(p.value[0], 0.9, 1e-8);
  EXPECT_NEAR(p.value[1], 1.1, 1e-7);
  EXPECT_EQ(p.value[2], 1.0);
  EXPECT_EQ(state.steps, 1u);
}

TEST(Adam, NonFiniteGradientLeavesValuesUntouched) {
  ParameterStore store;
  auto& p = store.add("p", Tensor({2}, {1.0, 2.0}));
  p.grad = Tensor({2}, {1.0, std::nan("")});
  AdamState state;
  try {
    adam_step(store, state, {});
    FAIL() << "expected numeric_error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::numeric_error);
  }
  EXPECT_EQ(p.value, Tensor({2}, {1.0, 2.0}));
}

TEST(Adam, MinimizesAQuadratic) {
  ParameterStore store;
  auto& p = store.add("p", Tensor({2}, {3.0, -4.0}));
  AdamState state;
  AdamConfig cfg;
  cfg.lr = 0.05;
  for (int i = 0; i < 2000; ++i) {
    store.zero_grad();
    Tape tape;
    auto x = tape.parameter(p);
    tape.backward(sum(mul(x, x)));
    adam_step(store, state, cfg);
  }
  EXPECT_NEAR(p.value[0], 0.0, 1e-3);
  EXPECT_NEAR(p.value[1], 0.0, 1e-3);
}

TEST(Checkpoint, RoundTripIsBitExact) {
  const auto dir = fs::temp_directory_path() / "templink_test_ckpt";
  fs::create_directories(dir);
  ParameterStore store;
  Dense::create(store, "d", 4, 3, Activation::relu, 2);
  store.get("d.w").value[0] = 1.0 / 3.0;
  save_checkpoint(dir / "m.ckpt", make_checkpoint(store, {{"kind", "test"}}));
  const auto back = load_checkpoint(dir / "m.ckpt");
  EXPECT_EQ(back.meta.at("kind"), "test");
  ParameterStore other;
  Dense::create(other, "d", 4, 3, Activation::relu, 99);
  restore(other, back);
  for (std::size_t i = 0; i < store.all().size(); ++i) EXPECT_EQ(other.all()[i]->value, store.all()[i]->value);

  ParameterStore wrong;
  Dense::create(wrong, "d", 5, 3, Activation::relu, 2);
  EXPECT_THROW(restore(wrong, back), Error);
}

TEST(Checkpoint, CorruptFilesAreRejected) {
  const auto dir = fs::temp_directory_path() / "templink_test_ckpt_bad";
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "bad.ckpt", std::ios::binary);
    out << "not a checkpoint";
  }
  EXPECT_THROW(load_checkpoint(dir / "bad.ckpt"), Error);
  EXPECT_THROW(load_checkpoint(dir / "missing.ckpt"), Error);

  ParameterStore store;
  Dense::create(store, "d", 2, 2, Activation::relu, 2);
  save_checkpoint(dir / "ok.ckpt", make_checkpoint(store));
  const auto size = fs::file_size(dir / "ok.ckpt");
  fs::resize_file(dir / "ok.ckpt", size - 5);
  EXPECT_THROW(load_checkpoint(dir / "ok.ckpt"), Error);
}
