#include "netgen/encoders.hpp"
#include "netgen/gradcheck.hpp"

#include "support.hpp"

#include <doctest.h>

using namespace netgen;
using testing::random_matrix;

namespace {

EncoderConfig make_config(EncoderKind kind, int window, int dim) {
  EncoderConfig c;
  c.kind = kind;
  c.window = window;
  c.dim = dim;
  return c;
}

double encoder_grad_error(Encoder& enc, const Matrix& x, Rng& rng) {
  const Matrix r = random_matrix(x.rows(), enc.config().dim, rng);
  auto params = enc.params();
  nn::ParamTensor input("input", x.rows(), x.cols());
  input.value = x;
  params.push_back(&input);
  auto fragment = [&](bool with_grad) {
    const Matrix h = enc.forward(input.value, true);
    if (with_grad) {
      nn::zero_grads(params);
      input.grad = enc.backward(r);
    }
    return h.cwiseProduct(r).sum();
  };
  return nn::gradient_check(fragment, params).max_rel_error;
}

Matrix permute_rows(const Matrix& x, const std::vector<Index>& perm) {
  Matrix out(x.rows(), x.cols());
  for (Index i = 0; i < x.rows(); ++i) out.row(i) = x.row(perm[static_cast<std::size_t>(i)]);
  return out;
}

}  // namespace

TEST_CASE("cnn encoder output shape at v=264, t=120, window 6") {
  Rng rng(1);
  for (int d : {4, 8, 12}) {
    CnnEncoder enc(make_config(EncoderKind::Cnn, 6, d), 120, rng);
    const auto h = enc.forward(random_matrix(264, 120, rng), false);
    CHECK(h.rows() == 264);
    CHECK(h.cols() == d);
  }
}

TEST_CASE("cnn encoder maps identical rows to identical embeddings") {
  Rng rng(2);
  CnnEncoder enc(make_config(EncoderKind::Cnn, 4, 5), 40, rng);
  const auto h = enc.forward(Matrix::Zero(6, 40), false);
  for (Index i = 1; i < 6; ++i) CHECK(h.row(i) == h.row(0));
}

TEST_CASE("cnn encoder reports the minimal admissible length") {
  Rng rng(3);
  const auto cfg = make_config(EncoderKind::Cnn, 6, 4);
  CHECK(cfg.min_length() == 34);
  CHECK_NOTHROW(CnnEncoder(cfg, 34, rng));
  try {
    CnnEncoder enc(cfg, 33, rng);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("t >= 34") != std::string::npos);
  }
}

TEST_CASE("gru encoder at t=512, window 32 uses 16 segments and a 64-wide readout") {
  Rng rng(4);
  GruEncoder enc(make_config(EncoderKind::Gru, 32, 8), 512, rng);
  CHECK(enc.segments() == 16);
  const auto params = enc.params();
  const auto* readout = params[params.size() - 2];
  CHECK(readout->name == "encoder.readout.weight");
  CHECK(readout->value.rows() == 64);
  const auto h = enc.forward(random_matrix(3, 512, rng), false);
  CHECK(h.rows() == 3);
  CHECK(h.cols() == 8);
}

TEST_CASE("gru encoder drops the trailing remainder") {
  Rng rng(5);
  GruEncoder enc(make_config(EncoderKind::Gru, 4, 3), 10, rng);
  CHECK(enc.segments() == 2);
  Matrix x = random_matrix(5, 10, rng);
  const auto h = enc.forward(x, false);
  CHECK(h.rows() == 5);
  CHECK(h.cols() == 3);
  x.rightCols(2) = random_matrix(5, 2, rng);
  CHECK(enc.forward(x, false) == h);
}

TEST_CASE("gru encoder is sensitive to time order") {
  Rng rng(6);
  GruEncoder enc(make_config(EncoderKind::Gru, 4, 4), 16, rng);
  const Matrix x = random_matrix(3, 16, rng);
  Matrix shuffled = x;
  std::vector<Index> perm(16);
  for (Index k = 0; k < 16; ++k) perm[static_cast<std::size_t>(k)] = k;
  shuffle(perm, rng);
  for (Index k = 0; k < 16; ++k) shuffled.col(k) = x.col(perm[static_cast<std::size_t>(k)]);
  CHECK((enc.forward(shuffled, false) - enc.forward(x, false)).cwiseAbs().maxCoeff() > 1e-6);
}

TEST_CASE("gru encoder rejects a window longer than the series") {
  Rng rng(7);
  CHECK_THROWS_AS(GruEncoder(make_config(EncoderKind::Gru, 9, 4), 8, rng), ConfigError);
  CHECK_THROWS_AS(GruEncoder(make_config(EncoderKind::Gru, 0, 4), 8, rng), ConfigError);
  CHECK_THROWS_AS(GruEncoder(make_config(EncoderKind::Gru, 4, 0), 8, rng), ConfigError);
  CHECK_THROWS_AS(encoder_kind_from_string("lstm"), ConfigError);
}

TEST_CASE("both encoders are equivariant to ROI permutation and deterministic per seed") {
  for (auto kind : {EncoderKind::Cnn, EncoderKind::Gru}) {
    Rng init_a(8), init_b(8), data(9);
    const int t = 40;
    auto a = make_encoder(make_config(kind, 4, 4), t, init_a);
    auto b = make_encoder(make_config(kind, 4, 4), t, init_b);
    const Matrix x = random_matrix(7, t, data);
    const auto h = a->forward(x, false);
    CHECK(b->forward(x, false) == h);

    std::vector<Index> perm(7);
    for (Index k = 0; k < 7; ++k) perm[static_cast<std::size_t>(k)] = k;
    shuffle(perm, data);
    CHECK((a->forward(permute_rows(x, perm), false) - permute_rows(h, perm)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("output shape is v x d for several lengths") {
  Rng rng(10);
  for (int t : {34, 50, 77}) {
    for (auto kind : {EncoderKind::Cnn, EncoderKind::Gru}) {
      auto enc = make_encoder(make_config(kind, 6, 5), t, rng);
      const auto h = enc->forward(random_matrix(4, t, rng), false);
      CHECK(h.rows() == 4);
      CHECK(h.cols() == 5);
    }
  }
}

TEST_CASE("encoder gradients match finite differences") {
  SUBCASE("cnn at v=4, t=40, window 4, d=4") {
    Rng rng(11);
    CnnEncoder enc(make_config(EncoderKind::Cnn, 4, 4), 40, rng);
    CHECK(encoder_grad_error(enc, random_matrix(4, 40, rng), rng) < 1e-4);
  }
  SUBCASE("gru at v=4, t=40, window 4, d=4") {
    Rng rng(12);
    GruEncoder enc(make_config(EncoderKind::Gru, 4, 4), 40, rng);
    CHECK(encoder_grad_error(enc, random_matrix(4, 40, rng), rng) < 1e-4);
  }
}
