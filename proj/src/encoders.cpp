#include "netgen/encoders.hpp"

namespace netgen {

std::string to_string(EncoderKind kind) { return kind == EncoderKind::Cnn ? "cnn" : "gru"; }

EncoderKind encoder_kind_from_string(const std::string& name) {
  if (name == "cnn") return EncoderKind::Cnn;
  if (name == "gru") return EncoderKind::Gru;
  throw ConfigError("unknown encoder kind '" + name + "' (expected cnn or gru)");
}

int EncoderConfig::min_length() const {
  if (kind == EncoderKind::Gru) return window;
  // Conv2 and Conv3 (kernel 8, stride 1) each need 7 extra positions, so
  // Conv1 must produce at least 15 outputs at stride 2.
  return window + 2 * 14;
}

void EncoderConfig::validate(int t) const {
  if (window < 1) throw ConfigError("encoder.window must be positive");
  if (dim < 1) throw ConfigError("encoder.dim must be positive");
  if (t < min_length()) {
    throw ConfigError(to_string(kind) + " encoder with window " + std::to_string(window) + " needs t >= " +
                      std::to_string(min_length()) + ", got t = " + std::to_string(t));
  }
}

namespace {

EncoderConfig validated(EncoderConfig config, int t) {
  config.validate(t);
  return config;
}

}  // namespace

// ---------------------------------------------------------------------------

CnnEncoder::CnnEncoder(EncoderConfig config, int t, Rng& rng)
    : Encoder(validated(config, t)),
      t_(t),
      conv1_("encoder.conv1", 1, 32, config.window, 2),
      conv2_("encoder.conv2", 32, 32, 8, 1),
      conv3_("encoder.conv3", 32, 16, 8, 1),
      pool_(16),
      fc1_("encoder.fc1", 16, 32),
      fc2_("encoder.fc2", 32, config.dim) {
  conv1_.init(rng);
  conv2_.init(rng);
  conv3_.init(rng);
  fc1_.init(rng);
  fc2_.init(rng);
}

Matrix CnnEncoder::forward(const Matrix& x, bool training) {
  if (x.cols() != t_) {
    throw ShapeError("cnn encoder: expected " + std::to_string(t_) + " time steps, got " + std::to_string(x.cols()));
  }
  require_finite(x, "cnn encoder input");
  Matrix h = conv1_.forward(x, training);
  h = conv2_.forward(h, training);
  h = conv3_.forward(h, training);
  h = pool_.forward(h, training);
  h = fc1_.forward(h, training);
  h = relu_.forward(h, training);
  return fc2_.forward(h, training);
}

Matrix CnnEncoder::backward(const Matrix& dh) {
  Matrix g = fc2_.backward(dh);
  g = relu_.backward(g);
  g = fc1_.backward(g);
  g = pool_.backward(g);
  g = conv3_.backward(g);
  g = conv2_.backward(g);
  return conv1_.backward(g);
}

nn::ParamList CnnEncoder::params() {
  nn::ParamList out;
  for (nn::Layer* layer : std::initializer_list<nn::Layer*>{&conv1_, &conv2_, &conv3_, &fc1_, &fc2_}) {
    for (auto* p : layer->params()) out.push_back(p);
  }
  return out;
}

// ---------------------------------------------------------------------------

GruEncoder::GruEncoder(EncoderConfig config, int t, Rng& rng)
    : Encoder(validated(config, t)),
      t_(t),
      segments_(t / config.window),
      readout_("encoder.readout", 2 * config.window, config.dim) {
  const Index h = config.window;
  for (int l = 0; l < EncoderConfig::kGruLayers; ++l) {
    const Index in = l == 0 ? h : 2 * h;
    const std::string prefix = "encoder.gru" + std::to_string(l);
    layers_.push_back(Stack{Direction{nn::GruCell(prefix + ".fwd", in, h), {}},
                            Direction{nn::GruCell(prefix + ".bwd", in, h), {}}});
  }
  for (auto& layer : layers_) {
    layer.forward.cell.init(rng);
    layer.backward.cell.init(rng);
  }
  readout_.init(rng);
}

Matrix GruEncoder::forward(const Matrix& x, bool training) {
  if (x.cols() != t_) {
    throw ShapeError("gru encoder: expected " + std::to_string(t_) + " time steps, got " + std::to_string(x.cols()));
  }
  require_finite(x, "gru encoder input");
  rows_ = x.rows();
  const Index h = config_.window;
  const auto z = static_cast<std::size_t>(segments_);

  std::vector<Matrix> inputs(z);
  for (std::size_t s = 0; s < z; ++s) inputs[s] = x.middleCols(static_cast<Index>(s) * h, h);

  for (auto& layer : layers_) {
    layer.forward.steps.clear();
    layer.backward.steps.clear();
    layer.forward.steps.reserve(z);
    layer.backward.steps.resize(z);
    Matrix state = Matrix::Zero(rows_, h);
    for (std::size_t s = 0; s < z; ++s) {
      layer.forward.steps.push_back(layer.forward.cell.forward(inputs[s], state));
      state = layer.forward.steps.back().h;
    }
    state.setZero();
    for (std::size_t s = z; s-- > 0;) {
      layer.backward.steps[s] = layer.backward.cell.forward(inputs[s], state);
      state = layer.backward.steps[s].h;
    }
    for (std::size_t s = 0; s < z; ++s) {
      Matrix out(rows_, 2 * h);
      out << layer.forward.steps[s].h, layer.backward.steps[s].h;
      inputs[s] = std::move(out);
    }
  }

  const auto& top = layers_.back();
  Matrix readout(rows_, 2 * h);
  readout << top.forward.steps.back().h, top.backward.steps.front().h;
  return readout_.forward(readout, training);
}

Matrix GruEncoder::backward(const Matrix& dh) {
  const Index h = config_.window;
  const auto z = static_cast<std::size_t>(segments_);
  Matrix dread = readout_.backward(dh);

  std::vector<Matrix> dout(z, Matrix::Zero(rows_, 2 * h));
  dout[z - 1].leftCols(h) = dread.leftCols(h);
  dout[0].rightCols(h) += dread.rightCols(h);

  for (std::size_t l = layers_.size(); l-- > 0;) {
    auto& layer = layers_[l];
    const Index in = layer.forward.cell.input_size();
    std::vector<Matrix> din(z, Matrix::Zero(rows_, in));
    Matrix carry = Matrix::Zero(rows_, h);
    for (std::size_t s = z; s-- > 0;) {
      auto g = layer.forward.cell.backward(layer.forward.steps[s], dout[s].leftCols(h) + carry);
      din[s] += g.dx;
      carry = std::move(g.dh_prev);
    }
    carry.setZero();
    for (std::size_t s = 0; s < z; ++s) {
      auto g = layer.backward.cell.backward(layer.backward.steps[s], dout[s].rightCols(h) + carry);
      din[s] += g.dx;
      carry = std::move(g.dh_prev);
    }
    dout = std::move(din);
  }

  Matrix dx = Matrix::Zero(rows_, t_);
  for (std::size_t s = 0; s < z; ++s) dx.middleCols(static_cast<Index>(s) * h, h) = dout[s];
  return dx;
}

nn::ParamList GruEncoder::params() {
  nn::ParamList out;
  for (auto& layer : layers_) {
    for (auto* p : layer.forward.cell.params()) out.push_back(p);
    for (auto* p : layer.backward.cell.params()) out.push_back(p);
  }
  for (auto* p : readout_.params()) out.push_back(p);
  return out;
}

std::unique_ptr<Encoder> make_encoder(const EncoderConfig& config, int t, Rng& rng) {
  if (config.kind == EncoderKind::Cnn) return std::make_unique<CnnEncoder>(config, t, rng);
  return std::make_unique<GruEncoder>(config, t, rng);
}

}  // namespace netgen
