// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <numbers>

#include "bytelm/corpus.hpp"
#include "bytelm/errors.hpp"
#include "bytelm/model.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace bytelm;
using bytelm::testing::random_bytes;
using bytelm::testing::random_state;

namespace {

// Straight-line reference for one cell step, written from the equations with
// plain loops. Shares nothing with the library beyond the parameter struct.
struct Oracle {
  using Mat = std::vector<std::vector<double>>;

  const ModelParams<double>& p;
  int E, H;

  explicit Oracle(const ModelParams<double>& params) : p(params), E(params.embed), H(params.hidden) {}

  static Mat effective(const WeightNormMatrix<double>& w) {
    Mat out(static_cast<std::size_t>(w.direction.rows()),
            std::vector<double>(static_cast<std::size_t>(w.direction.cols())));
    for (Eigen::Index r = 0; r < w.direction.rows(); ++r) {
      double sq = 0.0;
      for (Eigen::Index c = 0; c < w.direction.cols(); ++c) sq += w.direction(r, c) * w.direction(r, c);
      const double norm = std::sqrt(sq);
      for (Eigen::Index c = 0; c < w.direction.cols(); ++c) {
        out[r][c] = w.scale[r] * w.direction(r, c) / norm;
      }
    }
    return out;
  }

  static std::vector<double> matvec(const Mat& W, const std::vector<double>& v) {
    std::vector<double> out(W.size(), 0.0);
    for (std::size_t r = 0; r < W.size(); ++r) {
      for (std::size_t c = 0; c < v.size(); ++c) out[r] += W[r][c] * v[c];
    }
    return out;
  }

  static double sig(double z) { return 1.0 / (1.0 + std::exp(-z)); }

  // Advances (h, c) for one stream; returns the 256 logits.
  std::vector<double> step(std::vector<double>& h, std::vector<double>& c, std::uint8_t byte,
                           std::optional<Clamp> clamp = std::nullopt) const {
    std::vector<double> x(static_cast<std::size_t>(E));
    for (int k = 0; k < E; ++k) x[k] = p.embedding(byte, k);
    std::vector<double> r = h;
    if (p.cell == CellKind::kMLSTM) {
      const auto a = matvec(effective(p.mult_x), x);
      const auto b = matvec(effective(p.mult_h), h);
      for (int k = 0; k < H; ++k) r[k] = a[k] * b[k];
    }
    std::vector<double> gate[4];
    for (int g = 0; g < 4; ++g) {
      const auto gx = matvec(effective(p.gate_x[g]), x);
      const auto gr = matvec(effective(p.gate_r[g]), r);
      gate[g].resize(static_cast<std::size_t>(H));
      for (int k = 0; k < H; ++k) {
        const double z = gx[k] + gr[k] + p.gate_bias[g][k];
        gate[g][k] = g < 3 ? sig(z) : std::tanh(z);
      }
    }
    for (int k = 0; k < H; ++k) c[k] = gate[1][k] * c[k] + gate[0][k] * gate[3][k];
    if (clamp) c[clamp->unit] = clamp->value;
    for (int k = 0; k < H; ++k) h[k] = gate[2][k] * std::tanh(c[k]);
    std::vector<double> logits(256);
    for (int v = 0; v < 256; ++v) {
      logits[v] = p.output_bias[v];
      for (int k = 0; k < H; ++k) logits[v] += p.output(v, k) * h[k];
    }
    return logits;
  }

  static double nll(const std::vector<double>& logits, std::uint8_t target) {
    double mx = logits[0];
    for (double l : logits) mx = std::max(mx, l);
    double s = 0.0;
    for (double l : logits) s += std::exp(l - mx);
    return mx + std::log(s) - logits[target];
  }
};

Batch make_batch(std::size_t B, std::size_t T, std::uint64_t seed) {
  BatchStream s(random_bytes(B * (T + 1), seed), B, T);
  return s.next_batch();
}

ModelParams<double> unit_model(CellKind cell) {
  auto p = ModelParams<double>::zeros(cell, 1, 1);
  p.embedding.setOnes();
  auto set = [](WeightNormMatrix<double>& w) {
    w.direction.setOnes();
    w.scale.setOnes();
  };
  set(p.mult_x);
  set(p.mult_h);
  for (int g = 0; g < 4; ++g) {
    set(p.gate_x[g]);
    set(p.gate_r[g]);
  }
  return p;
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("cell kind names") {
  CHECK(parse_cell_kind("mlstm") == CellKind::kMLSTM);
  CHECK(parse_cell_kind("lstm") == CellKind::kLSTM);
  CHECK(cell_kind_name(CellKind::kLSTM) == "lstm");
  CHECK_THROWS_AS(parse_cell_kind("gru"), ConfigError);
}

TEST_CASE("init_params") {
  const auto a = init_params<double>(CellKind::kMLSTM, 3, 5, 42, 0.1);
  const auto b = init_params<double>(CellKind::kMLSTM, 3, 5, 42, 0.1);
  const auto va = tensor_views(a);
  const auto vb = tensor_views(b);
  REQUIRE(va.size() == vb.size());
  for (std::size_t t = 0; t < va.size(); ++t) {
    for (std::size_t k = 0; k < va[t].size(); ++k) CHECK(va[t].data[k] == vb[t].data[k]);
  }
  // g = ||v|| so the effective weight is V itself.
  const Matrix<double> w = effective_weight(a.gate_r[2].direction, a.gate_r[2].scale);
  CHECK((w - a.gate_r[2].direction).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(a.gate_bias[1] == Vector<double>::Ones(5));
  for (int g : {0, 2, 3}) CHECK(a.gate_bias[g].isZero(0.0));
  CHECK(a.output_bias.isZero(0.0));
  CHECK(a.embedding.cwiseAbs().maxCoeff() <= 0.1);

  const auto c = init_params<double>(CellKind::kMLSTM, 3, 5, 43, 0.1);
  CHECK(c.embedding != a.embedding);
  CHECK_THROWS_AS(init_params<double>(CellKind::kMLSTM, 0, 5, 1, 0.1), ConfigError);
  CHECK_THROWS_AS(init_params<double>(CellKind::kMLSTM, 3, 5, 1, 0.0), ConfigError);

  const auto lstm = init_params<double>(CellKind::kLSTM, 3, 5, 42, 0.1);
  CHECK(lstm.parameter_count() < a.parameter_count());
  bool has_mult = false;
  for (const auto& v : tensor_views(lstm)) has_mult |= v.name == "V_mx";
  CHECK_FALSE(has_mult);
}

TEST_CASE("tensor names in canonical order") {
  const auto p = init_params<double>(CellKind::kMLSTM, 2, 3, 1, 0.1);
  std::vector<std::string> names;
  for (const auto& v : tensor_views(p)) names.push_back(v.name);
  REQUIRE(names.size() > 4);
  CHECK(names.front() == "embedding");
  CHECK(names[1] == "V_mx");
  CHECK(names[2] == "g_mx");
  CHECK(names[names.size() - 2] == "W_y");
  CHECK(names.back() == "b_y");
}

TEST_CASE("effective_weight") {
  Matrix<double> V(1, 2);
  V << 3, 4;
  Vector<double> g(1);
  g << 10;
  const auto W = effective_weight(V, g);
  CHECK(W(0, 0) == doctest::Approx(6.0).epsilon(1e-15));
  CHECK(W(0, 1) == doctest::Approx(8.0).epsilon(1e-15));

  Rng rng(5);
  Matrix<double> R(6, 4);
  for (Eigen::Index i = 0; i < R.size(); ++i) R.data()[i] = rng.uniform(-1, 1);
  Vector<double> s(6);
  for (Eigen::Index i = 0; i < s.size(); ++i) s[i] = rng.uniform(-2, 2);
  const auto base = effective_weight(R, s);
  const auto scaled = effective_weight(Matrix<double>(R * 7.5), s);
  CHECK((base - scaled).cwiseAbs().maxCoeff() < 1e-14);
  for (Eigen::Index i = 0; i < 6; ++i) CHECK(std::abs(base.row(i).norm() - std::abs(s[i])) < 1e-12);
  const auto identity = effective_weight(R, Vector<double>(R.rowwise().norm()));
  CHECK((identity - R).cwiseAbs().maxCoeff() < 1e-15);

  R.row(3).setZero();
  CHECK_THROWS_AS(effective_weight(R, s), NumericalError);
}

TEST_CASE("zero model step is uniform") {
  for (CellKind cell : {CellKind::kMLSTM, CellKind::kLSTM}) {
    const auto p = zero_params<double>(cell, 4, 6);
    auto state = ModelState<double>::zeros(6, 3);
    const std::vector<std::uint8_t> bytes{'a', 'b', 200};
    const auto logits = forward_step(p, state, bytes);
    CHECK(logits.isZero(0.0));
    CHECK(state.c.isZero(0.0));
    CHECK(state.h.isZero(0.0));

    Matrix<double> lg;
    const CellRunner<double> runner(p);
    auto s2 = ModelState<double>::zeros(6, 3);
    runner.step(s2, bytes, std::nullopt, &lg);
    CHECK(lg.isZero(0.0));

    BatchStream stream(random_bytes(3 * 9, 2), 3, 8);
    const auto fwd = forward_sequence(p, ModelState<double>::zeros(6, 3), stream.next_batch());
    CHECK(fwd.loss == doctest::Approx(std::log(256.0)).epsilon(1e-15));
    // Gates sit at exactly one half.
    CHECK((fwd.cache.gates.topRows(18).array() == 0.5).all());
  }
}

TEST_CASE("H=1 hand example") {
  const auto p = unit_model(CellKind::kMLSTM);
  auto state = ModelState<double>::zeros(1, 1);
  const std::vector<std::uint8_t> byte{65};
  forward_step(p, state, byte);
  // sigma(1) = 0.731059, tanh(1) = 0.761594.
  const double c = 0.731058578630005 * 0.761594155955765;
  CHECK(state.c(0, 0) == doctest::Approx(0.556770).epsilon(1e-6));
  CHECK(state.c(0, 0) == doctest::Approx(c).epsilon(1e-12));
  CHECK(state.h(0, 0) == doctest::Approx(0.369606).epsilon(1e-6));
}

TEST_CASE("forward matches the straight-line oracle") {
  for (CellKind cell : {CellKind::kMLSTM, CellKind::kLSTM}) {
    const std::size_t B = 2, T = 3;
    const int H = 4, E = 2;
    auto p = init_params<double>(cell, E, H, 7, 0.6);
    Rng rng(8);
    for (auto& b : p.output_bias) b = rng.uniform(-1, 1);
    for (auto& g : p.gate_bias) for (auto& b : g) b = rng.uniform(-1, 1);
    p.gate_x[1].scale *= 1.7;  // g away from ||v||

    const Batch batch = make_batch(B, T, 9);
    const auto s0 = random_state<double>(H, B, 10);
    const auto fwd = forward_sequence(p, s0, batch);

    const Oracle oracle(p);
    double total = 0.0;
    for (std::size_t b = 0; b < B; ++b) {
      std::vector<double> h(H), c(H);
      for (int k = 0; k < H; ++k) {
        h[k] = s0.h(k, static_cast<Eigen::Index>(b));
        c[k] = s0.c(k, static_cast<Eigen::Index>(b));
      }
      for (std::size_t t = 0; t < T; ++t) {
        const auto logits = oracle.step(h, c, batch.inputs[b * T + t]);
        total += Oracle::nll(logits, batch.targets[b * T + t]);
      }
      for (int k = 0; k < H; ++k) {
        CHECK(std::abs(fwd.final_state.h(k, static_cast<Eigen::Index>(b)) - h[k]) < 1e-10);
        CHECK(std::abs(fwd.final_state.c(k, static_cast<Eigen::Index>(b)) - c[k]) < 1e-10);
      }
    }
    CHECK(std::abs(fwd.loss - total / static_cast<double>(B * T)) < 1e-10);
  }
}

TEST_CASE("clamp overwrites the cell in every stream") {
  const auto p = init_params<double>(CellKind::kMLSTM, 3, 5, 2, 0.5);
  auto state = random_state<double>(5, 4, 3);
  const std::vector<std::uint8_t> bytes{1, 2, 3, 4};
  forward_step(p, state, bytes, Clamp{2, 0.7});
  for (Eigen::Index b = 0; b < 4; ++b) CHECK(state.c(2, b) == 0.7);

  // The clamped value feeds h in the same step.
  const Oracle oracle(p);
  auto s = random_state<double>(5, 1, 4);
  std::vector<double> h(5), c(5);
  for (int k = 0; k < 5; ++k) {
    h[k] = s.h(k, 0);
    c[k] = s.c(k, 0);
  }
  const auto ref = oracle.step(h, c, 9, Clamp{4, -1.0});
  const auto logits = forward_step(p, s, std::vector<std::uint8_t>{9}, Clamp{4, -1.0});
  for (int k = 0; k < 5; ++k) CHECK(std::abs(s.h(k, 0) - h[k]) < 1e-12);
  for (int v = 0; v < 256; ++v) CHECK(std::abs(logits(v, 0) - ref[v]) < 1e-12);

  CHECK_THROWS_AS(forward_step(p, state, bytes, Clamp{5, 0.0}), ContractError);
}

TEST_CASE("step errors") {
  const auto p = init_params<double>(CellKind::kMLSTM, 3, 5, 2, 0.5);
  auto bad = ModelState<double>::zeros(4, 1);
  CHECK_THROWS_AS(forward_step(p, bad, std::vector<std::uint8_t>{1}), ContractError);
  auto nan_state = ModelState<double>::zeros(5, 1);
  nan_state.c(1, 0) = std::nan("");
  const CellRunner<double> runner(p);
  try {
    runner.step(nan_state, std::vector<std::uint8_t>{1}, std::nullopt, nullptr, 17);
    FAIL("expected a numerical error");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("17") != std::string::npos);
  }
}

TEST_CASE("cell invariants over random inputs") {
  for (CellKind cell : {CellKind::kMLSTM, CellKind::kLSTM}) {
    const auto p = init_params<double>(cell, 4, 8, 3, 1.0);
    const Batch batch = make_batch(3, 20, 4);
    const auto fwd = forward_sequence(p, random_state<double>(8, 3, 5), batch);
    const auto& gates = fwd.cache.gates;
    CHECK((gates.topRows(24).array() > 0.0).all());
    CHECK((gates.topRows(24).array() < 1.0).all());
    CHECK((gates.bottomRows(8).array().abs() <= 1.0).all());
    CHECK((fwd.cache.tanh_c.array().abs() <= 1.0).all());
    const Vector<double> sums = fwd.cache.probs.colwise().sum().transpose();
    CHECK((sums.array() - 1.0).abs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("perfect prediction gives zero loss") {
  auto p = zero_params<double>(CellKind::kMLSTM, 2, 3);
  p.output_bias['a'] = 1000.0;
  Batch batch{2, 3, std::vector<std::uint8_t>(6, 'a'), std::vector<std::uint8_t>(6, 'a'), false};
  CHECK(forward_sequence(p, ModelState<double>::zeros(3, 2), batch).loss == 0.0);
}

TEST_CASE("loss is invariant to batch row order") {
  const auto p = init_params<double>(CellKind::kMLSTM, 3, 6, 1, 0.5);
  const Batch batch = make_batch(3, 5, 2);
  Batch swapped = batch;
  for (std::size_t t = 0; t < 5; ++t) {
    std::swap(swapped.inputs[t], swapped.inputs[2 * 5 + t]);
    std::swap(swapped.targets[t], swapped.targets[2 * 5 + t]);
  }
  const double a = forward_sequence(p, ModelState<double>::zeros(6, 3), batch).loss;
  const double b = forward_sequence(p, ModelState<double>::zeros(6, 3), swapped).loss;
  CHECK(std::abs(a - b) < 1e-13);
}

TEST_CASE("loss_to_bpb") {
  CHECK(loss_to_bpb(std::log(256.0)) == 8.0);
  CHECK(loss_to_bpb(0.0) == 0.0);
  CHECK(loss_to_bpb(std::numbers::ln2) == 1.0);
  CHECK_THROWS_AS(loss_to_bpb(-1e-3), ContractError);
}

TEST_CASE("zero model output-bias gradient is uniform minus target frequency") {
  const auto p = zero_params<double>(CellKind::kMLSTM, 2, 3);
  const Batch batch = make_batch(2, 6, 12);
  const auto fwd = forward_sequence(p, ModelState<double>::zeros(3, 2), batch);
  const auto g = backward_sequence(p, fwd.cache, batch.targets);
  std::vector<double> freq(256, 0.0);
  for (auto t : batch.targets) freq[t] += 1.0 / 12.0;
  for (int v = 0; v < 256; ++v) CHECK(std::abs(g.output_bias[v] - (1.0 / 256.0 - freq[v])) < 1e-15);
}

TEST_CASE("duplicated rows leave mean-loss gradients unchanged") {
  const auto p = init_params<double>(CellKind::kMLSTM, 3, 4, 2, 0.5);
  const Batch batch = make_batch(2, 4, 3);
  Batch doubled{4, 4, batch.inputs, batch.targets, false};
  doubled.inputs.insert(doubled.inputs.end(), batch.inputs.begin(), batch.inputs.end());
  doubled.targets.insert(doubled.targets.end(), batch.targets.begin(), batch.targets.end());
  const auto f1 = forward_sequence(p, ModelState<double>::zeros(4, 2), batch);
  const auto f2 = forward_sequence(p, ModelState<double>::zeros(4, 4), doubled);
  CHECK(std::abs(f1.loss - f2.loss) < 1e-14);
  const auto g1 = backward_sequence(p, f1.cache, batch.targets);
  const auto g2 = backward_sequence(p, f2.cache, doubled.targets);
  const auto v1 = tensor_views(g1);
  const auto v2 = tensor_views(g2);
  for (std::size_t t = 0; t < v1.size(); ++t) {
    for (std::size_t k = 0; k < v1[t].size(); ++k) {
      CHECK(std::abs(v1[t].data[k] - v2[t].data[k]) < 1e-14);
    }
  }
}

TEST_CASE("finite differences agree with backprop") {
  for (CellKind cell : {CellKind::kMLSTM, CellKind::kLSTM}) {
    for (std::uint64_t seed : {1, 2, 3}) {
      CAPTURE(seed);
      const auto p = init_params<double>(cell, 4, 8, seed, 0.5);
      const Batch batch = make_batch(2, 5, seed + 100);
      const auto rep = grad_check(p, random_state<double>(8, 2, seed + 200), batch, 1e-5);
      CHECK(rep.max_relative_error < 1e-4);
      CHECK(rep.checked == p.parameter_count());
    }
  }
}

TEST_CASE("grad check catches a corrupted entry") {
  const auto p = init_params<double>(CellKind::kMLSTM, 4, 8, 1, 0.5);
  const Batch batch = make_batch(2, 5, 101);
  const auto s0 = random_state<double>(8, 2, 201);
  const auto fwd = forward_sequence(p, s0, batch);
  auto g = backward_sequence(p, fwd.cache, batch.targets);
  // Corrupt the largest entry of a recurrent direction so the fault is visible.
  Eigen::Index r = 0, c = 0;
  g.gate_r[0].direction.cwiseAbs().maxCoeff(&r, &c);
  g.gate_r[0].direction(r, c) *= 2.0;
  const auto rep = compare_gradients(p, s0, batch, g, 1e-5);
  CHECK(rep.max_relative_error > 1e-2);
  CHECK(rep.worst_tensor == "V_im");

  CHECK_THROWS_AS(grad_check(p, s0, batch, 0.0), ContractError);
}

TEST_CASE("float and double forward agree") {
  const auto pd = init_params<double>(CellKind::kMLSTM, 4, 16, 1, 0.3);
  const auto pf = pd.cast<float>();
  const Batch batch = make_batch(2, 10, 5);
  const double ld = forward_sequence(pd, ModelState<double>::zeros(16, 2), batch).loss;
  const double lf = forward_sequence(pf, ModelState<float>::zeros(16, 2), batch).loss;
  CHECK(std::abs(ld - lf) < 1e-4);
}

}  // TEST_SUITE
