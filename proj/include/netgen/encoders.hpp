#pragma once

#include "netgen/layers.hpp"

#include <memory>
#include <string>
#include <vector>

namespace netgen {

enum class EncoderKind { Cnn, Gru };

std::string to_string(EncoderKind kind);
EncoderKind encoder_kind_from_string(const std::string& name);

struct EncoderConfig {
  EncoderKind kind = EncoderKind::Gru;
  int window = 8;  // CNN: first kernel width. GRU: segment length and hidden size.
  int dim = 8;     // embedding size per ROI

  static constexpr int kCnnLayers = 3;
  static constexpr int kGruLayers = 4;

  /// Shortest series the encoder accepts for this window.
  int min_length() const;
  /// Throws ConfigError for non-positive sizes or a series shorter than min_length().
  void validate(int t) const;
};

/// Maps ROI series to per-ROI embeddings with parameters shared across ROIs.
/// Input rows are ROI series (ROIs of several samples may be stacked), t
/// columns; output has one row of `dim` values per input row.
class Encoder {
 public:
  virtual ~Encoder() = default;
  virtual Matrix forward(const Matrix& x, bool training) = 0;
  virtual Matrix backward(const Matrix& dh) = 0;
  virtual nn::ParamList params() = 0;
  const EncoderConfig& config() const { return config_; }

 protected:
  explicit Encoder(EncoderConfig config) : config_(config) {}
  EncoderConfig config_;
};

/// Conv(1->32, k=window, s=2) -> Conv(32->32, k=8) -> Conv(32->16, k=8)
/// -> global max pool -> Dense(16->32) -> ReLU -> Dense(32->dim).
class CnnEncoder : public Encoder {
 public:
  CnnEncoder(EncoderConfig config, int t, Rng& rng);
  Matrix forward(const Matrix& x, bool training) override;
  Matrix backward(const Matrix& dh) override;
  nn::ParamList params() override;

 private:
  int t_;
  nn::Conv1d conv1_, conv2_, conv3_;
  nn::GlobalMaxPool1d pool_;
  nn::Dense fc1_;
  nn::Relu relu_;
  nn::Dense fc2_;
};

/// Four stacked bidirectional GRU layers over floor(t / window) consecutive
/// segments of length `window` (trailing remainder dropped), hidden size
/// `window` per direction. The top layer's last forward state and last
/// backward state (the one at the first segment) form a 2*window readout,
/// mapped to `dim` by a dense layer.
class GruEncoder : public Encoder {
 public:
  GruEncoder(EncoderConfig config, int t, Rng& rng);
  Matrix forward(const Matrix& x, bool training) override;
  Matrix backward(const Matrix& dh) override;
  nn::ParamList params() override;

  int segments() const { return segments_; }

 private:
  struct Direction {
    nn::GruCell cell;
    std::vector<nn::GruCell::Step> steps;
  };
  struct Stack {
    Direction forward, backward;
  };

  int t_;
  int segments_;
  std::vector<Stack> layers_;
  nn::Dense readout_;
  Index rows_ = 0;
};

std::unique_ptr<Encoder> make_encoder(const EncoderConfig& config, int t, Rng& rng);

}  // namespace netgen
