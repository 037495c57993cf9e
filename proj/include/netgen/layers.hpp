#pragma once

#include "netgen/random.hpp"
#include "netgen/tensor.hpp"

#include <string>
#include <vector>

namespace netgen::nn {

/// A trainable array and its accumulated gradient.
struct ParamTensor {
  std::string name;
  Matrix value;
  Matrix grad;

  ParamTensor() = default;
  ParamTensor(std::string name, Index rows, Index cols)
      : name(std::move(name)), value(Matrix::Zero(rows, cols)), grad(Matrix::Zero(rows, cols)) {}

  void zero_grad() { grad.setZero(); }
  Index size() const { return value.size(); }
};

using ParamList = std::vector<ParamTensor*>;

void zero_grads(const ParamList& params);

/// Uniform in +-sqrt(6 / (fan_in + fan_out)).
void glorot_uniform(Matrix& w, Index fan_in, Index fan_out, Rng& rng);

/// Row-wise softmax with max subtraction.
Matrix softmax_rows(const Matrix& m);

/// Backward of softmax_rows given its output y and upstream gradient dy.
Matrix softmax_rows_backward(const Matrix& y, const Matrix& dy);

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Layers act on matrices whose rows are independent items (samples, or ROIs
// of several samples stacked). forward() caches what backward() needs, so a
// layer instance serves one forward/backward pair at a time. backward()
// accumulates into parameter gradients and returns the input gradient.
class Layer {
 public:
  virtual ~Layer() = default;
  virtual Matrix forward(const Matrix& x, bool training) = 0;
  virtual Matrix backward(const Matrix& dy) = 0;
  virtual ParamList params() { return {}; }
  /// Non-trainable state that must survive checkpointing.
  virtual ParamList buffers() { return {}; }
};

/// y = x W + b with W of shape in x out.
class Dense : public Layer {
 public:
  Dense(std::string name, Index in, Index out);
  void init(Rng& rng);
  Matrix forward(const Matrix& x, bool training) override;
  Matrix backward(const Matrix& dy) override;
  ParamList params() override { return {&weight_, &bias_}; }

  Index in_features() const { return weight_.value.rows(); }
  Index out_features() const { return weight_.value.cols(); }
  ParamTensor& weight() { return weight_; }
  ParamTensor& bias() { return bias_; }

 private:
  ParamTensor weight_, bias_;
  Matrix input_;
};

class Relu : public Layer {
 public:
  Matrix forward(const Matrix& x, bool training) override;
  Matrix backward(const Matrix& dy) override;

 private:
  Matrix mask_;
};

class SoftmaxRows : public Layer {
 public:
  Matrix forward(const Matrix& x, bool training) override;
  Matrix backward(const Matrix& dy) override;

 private:
  Matrix output_;
};

/// 1-D convolution without padding.
///
/// Feature maps are stored position-major: each row holds `length` blocks of
/// `channels` values, so a receptive field is one contiguous slice. The
/// kernel has shape (kernel * in_channels) x out_channels.
class Conv1d : public Layer {
 public:
  Conv1d(std::string name, Index in_channels, Index out_channels, Index kernel, Index stride);
  void init(Rng& rng);
  Matrix forward(const Matrix& x, bool training) override;
  Matrix backward(const Matrix& dy) override;
  ParamList params() override { return {&weight_, &bias_}; }

  Index output_length(Index input_length) const;
  Index in_channels() const { return in_channels_; }
  Index out_channels() const { return out_channels_; }

 private:
  Index in_channels_, out_channels_, kernel_, stride_;
  ParamTensor weight_, bias_;
  Matrix columns_;
  Index items_ = 0, in_length_ = 0, out_length_ = 0;
};

/// Max over the temporal axis per channel: rows of (length * channels)
/// become rows of `channels`.
class GlobalMaxPool1d : public Layer {
 public:
  explicit GlobalMaxPool1d(Index channels) : channels_(channels) {}
  Matrix forward(const Matrix& x, bool training) override;
  Matrix backward(const Matrix& dy) override;

 private:
  Index channels_;
  Index in_cols_ = 0;
  std::vector<Index> argmax_;
};

/// Normalizes each column over the batch rows. Training mode uses batch
/// statistics and updates running estimates (momentum 0.1); evaluation mode
/// uses the running estimates.
class BatchNorm1d : public Layer {
 public:
  BatchNorm1d(std::string name, Index features, double eps = 1e-5, double momentum = 0.1);
  Matrix forward(const Matrix& x, bool training) override;
  Matrix backward(const Matrix& dy) override;
  ParamList params() override { return {&gamma_, &beta_}; }
  ParamList buffers() override { return {&running_mean_, &running_var_}; }

 private:
  double eps_, momentum_;
  ParamTensor gamma_, beta_, running_mean_, running_var_;
  Matrix normalized_;
  RowVector inv_std_;
  bool trained_batch_ = false;
};

/// Gated recurrent unit with gate order (reset, update, candidate):
///   r = sig(x Wr + br + h Ur + cr)
///   z = sig(x Wz + bz + h Uz + cz)
///   n = tanh(x Wn + bn + r * (h Un + cn))
///   h' = (1 - z) * n + z * h
class GruCell {
 public:
  struct Step {
    Matrix x, h_prev, r, z, n, hidden_n, h;
  };
  struct StepGrad {
    Matrix dx, dh_prev;
  };

  GruCell(std::string name, Index input, Index hidden);
  void init(Rng& rng);
  Step forward(const Matrix& x, const Matrix& h_prev) const;
  StepGrad backward(const Step& step, const Matrix& dh);
  ParamList params() { return {&w_input_, &b_input_, &w_hidden_, &b_hidden_}; }

  Index input_size() const { return w_input_.value.rows(); }
  Index hidden_size() const { return hidden_; }

 private:
  Index hidden_;
  ParamTensor w_input_, b_input_, w_hidden_, b_hidden_;
};

}  // namespace netgen::nn
