#include "netgen/layers.hpp"

#include <cmath>

namespace netgen::nn {

void zero_grads(const ParamList& params) {
  for (auto* p : params) p->zero_grad();
}

void glorot_uniform(Matrix& w, Index fan_in, Index fan_out, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (Index i = 0; i < w.size(); ++i) w.data()[i] = uniform(rng, -bound, bound);
}

Matrix softmax_rows(const Matrix& m) {
  Matrix out(m.rows(), m.cols());
  for (Index i = 0; i < m.rows(); ++i) {
    const double top = m.row(i).maxCoeff();
    out.row(i) = (m.row(i).array() - top).exp();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

Matrix softmax_rows_backward(const Matrix& y, const Matrix& dy) {
  Eigen::VectorXd inner = (y.array() * dy.array()).rowwise().sum();
  return (y.array() * (dy.colwise() - inner).array()).matrix();
}

// ---------------------------------------------------------------------------

Dense::Dense(std::string name, Index in, Index out)
    : weight_(name + ".weight", in, out), bias_(name + ".bias", 1, out) {}

void Dense::init(Rng& rng) {
  glorot_uniform(weight_.value, in_features(), out_features(), rng);
  bias_.value.setZero();
}

Matrix Dense::forward(const Matrix& x, bool) {
  require_finite(x, "dense input");
  if (x.cols() != in_features()) {
    throw ShapeError(weight_.name + ": input " + shape_str(x) + " does not match " +
                     std::to_string(in_features()) + " features");
  }
  input_ = x;
  Matrix y = x * weight_.value;
  y.rowwise() += bias_.value.row(0);
  return y;
}

Matrix Dense::backward(const Matrix& dy) {
  if (dy.rows() != input_.rows() || dy.cols() != out_features()) {
    throw ShapeError(weight_.name + ": upstream gradient " + shape_str(dy) + " does not match output");
  }
  weight_.grad.noalias() += input_.transpose() * dy;
  bias_.grad += dy.colwise().sum();
  return dy * weight_.value.transpose();
}

// ---------------------------------------------------------------------------

Matrix Relu::forward(const Matrix& x, bool) {
  require_finite(x, "relu input");
  mask_ = (x.array() > 0.0).cast<double>().matrix();
  return x.cwiseMax(0.0);
}

Matrix Relu::backward(const Matrix& dy) {
  if (dy.rows() != mask_.rows() || dy.cols() != mask_.cols()) throw ShapeError("relu: gradient shape mismatch");
  return dy.cwiseProduct(mask_);
}

Matrix SoftmaxRows::forward(const Matrix& x, bool) {
  require_finite(x, "softmax input");
  output_ = softmax_rows(x);
  return output_;
}

Matrix SoftmaxRows::backward(const Matrix& dy) {
  if (dy.rows() != output_.rows() || dy.cols() != output_.cols()) {
    throw ShapeError("softmax: gradient shape mismatch");
  }
  return softmax_rows_backward(output_, dy);
}

// ---------------------------------------------------------------------------

Conv1d::Conv1d(std::string name, Index in_channels, Index out_channels, Index kernel, Index stride)
    : in_channels_(in_channels),
      out_channels_(out_channels),
      kernel_(kernel),
      stride_(stride),
      weight_(name + ".weight", kernel * in_channels, out_channels),
      bias_(name + ".bias", 1, out_channels) {
  if (kernel < 1 || stride < 1 || in_channels < 1 || out_channels < 1) {
    throw ShapeError(name + ": kernel, stride and channels must be positive");
  }
}

void Conv1d::init(Rng& rng) {
  glorot_uniform(weight_.value, kernel_ * in_channels_, kernel_ * out_channels_, rng);
  bias_.value.setZero();
}

Index Conv1d::output_length(Index input_length) const {
  if (input_length < kernel_) return 0;
  return (input_length - kernel_) / stride_ + 1;
}

Matrix Conv1d::forward(const Matrix& x, bool) {
  require_finite(x, "conv1d input");
  if (x.cols() % in_channels_ != 0) {
    throw ShapeError(weight_.name + ": input width " + std::to_string(x.cols()) +
                     " is not a multiple of " + std::to_string(in_channels_) + " channels");
  }
  items_ = x.rows();
  in_length_ = x.cols() / in_channels_;
  out_length_ = output_length(in_length_);
  if (out_length_ < 1) {
    throw ShapeError(weight_.name + ": input length " + std::to_string(in_length_) +
                     " shorter than kernel " + std::to_string(kernel_));
  }
  const Index span = kernel_ * in_channels_;
  columns_.resize(items_ * out_length_, span);
  for (Index i = 0; i < items_; ++i) {
    for (Index l = 0; l < out_length_; ++l) {
      columns_.row(i * out_length_ + l) = x.row(i).segment(l * stride_ * in_channels_, span);
    }
  }
  Matrix y = columns_ * weight_.value;
  y.rowwise() += bias_.value.row(0);
  return Eigen::Map<const Matrix>(y.data(), items_, out_length_ * out_channels_);
}

Matrix Conv1d::backward(const Matrix& dy) {
  if (dy.rows() != items_ || dy.cols() != out_length_ * out_channels_) {
    throw ShapeError(weight_.name + ": upstream gradient " + shape_str(dy) + " does not match output");
  }
  Eigen::Map<const Matrix> dout(dy.data(), items_ * out_length_, out_channels_);
  weight_.grad.noalias() += columns_.transpose() * dout;
  bias_.grad += dout.colwise().sum();
  Matrix dcolumns = dout * weight_.value.transpose();
  const Index span = kernel_ * in_channels_;
  Matrix dx = Matrix::Zero(items_, in_length_ * in_channels_);
  for (Index i = 0; i < items_; ++i) {
    for (Index l = 0; l < out_length_; ++l) {
      dx.row(i).segment(l * stride_ * in_channels_, span) += dcolumns.row(i * out_length_ + l);
    }
  }
  return dx;
}

// ---------------------------------------------------------------------------

Matrix GlobalMaxPool1d::forward(const Matrix& x, bool) {
  require_finite(x, "max pool input");
  if (x.cols() % channels_ != 0 || x.cols() == 0) throw ShapeError("max pool: width not a multiple of channels");
  in_cols_ = x.cols();
  const Index length = x.cols() / channels_;
  Matrix y(x.rows(), channels_);
  argmax_.assign(static_cast<std::size_t>(x.rows() * channels_), 0);
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index c = 0; c < channels_; ++c) {
      Index best = c;
      for (Index l = 1; l < length; ++l) {
        const Index col = l * channels_ + c;
        if (x(i, col) > x(i, best)) best = col;
      }
      y(i, c) = x(i, best);
      argmax_[static_cast<std::size_t>(i * channels_ + c)] = best;
    }
  }
  return y;
}

Matrix GlobalMaxPool1d::backward(const Matrix& dy) {
  if (dy.cols() != channels_ || dy.rows() * channels_ != static_cast<Index>(argmax_.size())) {
    throw ShapeError("max pool: gradient shape mismatch");
  }
  Matrix dx = Matrix::Zero(dy.rows(), in_cols_);
  for (Index i = 0; i < dy.rows(); ++i) {
    for (Index c = 0; c < channels_; ++c) dx(i, argmax_[static_cast<std::size_t>(i * channels_ + c)]) += dy(i, c);
  }
  return dx;
}

// ---------------------------------------------------------------------------

BatchNorm1d::BatchNorm1d(std::string name, Index features, double eps, double momentum)
    : eps_(eps),
      momentum_(momentum),
      gamma_(name + ".gamma", 1, features),
      beta_(name + ".beta", 1, features),
      running_mean_(name + ".running_mean", 1, features),
      running_var_(name + ".running_var", 1, features) {
  gamma_.value.setOnes();
  running_var_.value.setOnes();
}

Matrix BatchNorm1d::forward(const Matrix& x, bool training) {
  require_finite(x, "batch norm input");
  if (x.cols() != gamma_.value.cols()) {
    throw ShapeError(gamma_.name + ": input " + shape_str(x) + " does not match " +
                     std::to_string(gamma_.value.cols()) + " features");
  }
  trained_batch_ = training;
  if (training) {
    if (x.rows() < 2) {
      throw ShapeError("batch norm in training mode needs a batch of at least 2 samples; got " +
                       std::to_string(x.rows()) + " (use batch size >= 2)");
    }
    const auto n = static_cast<double>(x.rows());
    RowVector mean = x.colwise().mean();
    Matrix centered = x.rowwise() - mean;
    RowVector var = centered.array().square().colwise().sum() / n;
    inv_std_ = (var.array() + eps_).rsqrt();
    normalized_ = centered.array().rowwise() * inv_std_.array();
    running_mean_.value = (1.0 - momentum_) * running_mean_.value + momentum_ * mean;
    running_var_.value = (1.0 - momentum_) * running_var_.value + momentum_ * (var * (n / (n - 1.0)));
  } else {
    inv_std_ = (running_var_.value.array() + eps_).rsqrt();
    normalized_ = (x.rowwise() - running_mean_.value.row(0)).array().rowwise() * inv_std_.array();
  }
  Matrix y = normalized_.array().rowwise() * gamma_.value.row(0).array();
  y.rowwise() += beta_.value.row(0);
  return y;
}

Matrix BatchNorm1d::backward(const Matrix& dy) {
  if (dy.rows() != normalized_.rows() || dy.cols() != normalized_.cols()) {
    throw ShapeError(gamma_.name + ": gradient shape mismatch");
  }
  gamma_.grad += (dy.array() * normalized_.array()).colwise().sum().matrix();
  beta_.grad += dy.colwise().sum();
  Matrix dnorm = dy.array().rowwise() * gamma_.value.row(0).array();
  if (!trained_batch_) return dnorm.array().rowwise() * inv_std_.array();
  const auto n = static_cast<double>(dy.rows());
  RowVector sum_d = dnorm.colwise().sum();
  RowVector sum_dx = (dnorm.array() * normalized_.array()).colwise().sum();
  Matrix dx = (n * dnorm.array()).matrix();
  dx.rowwise() -= sum_d;
  dx -= (normalized_.array().rowwise() * sum_dx.array()).matrix();
  dx = dx.array().rowwise() * (inv_std_.array() / n);
  return dx;
}

// ---------------------------------------------------------------------------

GruCell::GruCell(std::string name, Index input, Index hidden)
    : hidden_(hidden),
      w_input_(name + ".w_input", input, 3 * hidden),
      b_input_(name + ".b_input", 1, 3 * hidden),
      w_hidden_(name + ".w_hidden", hidden, 3 * hidden),
      b_hidden_(name + ".b_hidden", 1, 3 * hidden) {}

void GruCell::init(Rng& rng) {
  const double bound = std::sqrt(1.0 / static_cast<double>(hidden_));
  for (auto* w : {&w_input_.value, &w_hidden_.value}) {
    for (Index i = 0; i < w->size(); ++i) w->data()[i] = uniform(rng, -bound, bound);
  }
  b_input_.value.setZero();
  b_hidden_.value.setZero();
}

GruCell::Step GruCell::forward(const Matrix& x, const Matrix& h_prev) const {
  require_finite(x, "gru input");
  if (x.cols() != input_size() || h_prev.cols() != hidden_ || x.rows() != h_prev.rows()) {
    throw ShapeError(w_input_.name + ": input " + shape_str(x) + " / state " + shape_str(h_prev) +
                     " do not match cell " + std::to_string(input_size()) + "->" + std::to_string(hidden_));
  }
  const Index h = hidden_;
  Matrix gx = x * w_input_.value;
  gx.rowwise() += b_input_.value.row(0);
  Matrix gh = h_prev * w_hidden_.value;
  gh.rowwise() += b_hidden_.value.row(0);

  Step s;
  s.x = x;
  s.h_prev = h_prev;
  s.r = (gx.leftCols(h) + gh.leftCols(h)).unaryExpr([](double a) { return sigmoid(a); });
  s.z = (gx.middleCols(h, h) + gh.middleCols(h, h)).unaryExpr([](double a) { return sigmoid(a); });
  s.hidden_n = gh.rightCols(h);
  s.n = (gx.rightCols(h).array() + s.r.array() * s.hidden_n.array()).tanh().matrix();
  s.h = ((1.0 - s.z.array()) * s.n.array() + s.z.array() * h_prev.array()).matrix();
  return s;
}

GruCell::StepGrad GruCell::backward(const Step& s, const Matrix& dh) {
  if (dh.rows() != s.h.rows() || dh.cols() != hidden_) throw ShapeError(w_input_.name + ": gradient shape mismatch");
  const Index h = hidden_;
  const auto rows = dh.rows();
  Matrix dn = dh.array() * (1.0 - s.z.array());
  Matrix dz = dh.array() * (s.h_prev.array() - s.n.array());
  Matrix dn_pre = dn.array() * (1.0 - s.n.array().square());
  Matrix dr = dn_pre.array() * s.hidden_n.array();
  Matrix dz_pre = dz.array() * s.z.array() * (1.0 - s.z.array());
  Matrix dr_pre = dr.array() * s.r.array() * (1.0 - s.r.array());

  Matrix dgx(rows, 3 * h), dgh(rows, 3 * h);
  dgx << dr_pre, dz_pre, dn_pre;
  dgh << dr_pre, dz_pre, (dn_pre.array() * s.r.array()).matrix();

  w_input_.grad.noalias() += s.x.transpose() * dgx;
  b_input_.grad += dgx.colwise().sum();
  w_hidden_.grad.noalias() += s.h_prev.transpose() * dgh;
  b_hidden_.grad += dgh.colwise().sum();

  StepGrad g;
  g.dx = dgx * w_input_.value.transpose();
  g.dh_prev = (dh.array() * s.z.array()).matrix() + dgh * w_hidden_.value.transpose();
  return g;
}

}  // namespace netgen::nn
