// SPDX-License-Identifier: Apache-2.0
#include "templink/nn/tensor.hpp"

#include <cmath>
#include <numeric>

#include "templink/error.hpp"
#include "templink/nn/kernels.hpp"

namespace templink::nn {

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> values) : shape_(std::move(shape)), data_(std::move(values)) {
  if (data_.size() != shape_size(shape_)) {
    fail(ErrorCode::invalid_argument, "tensor shape " + shape_string(shape_) + " does not match " +
                                          std::to_string(data_.size()) + " values");
  }
}

Tensor Tensor::reshaped(Shape shape) const {
  if (shape_size(shape) != data_.size()) {
    fail(ErrorCode::invalid_argument, "cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
  }
  Tensor t;
  t.shape_ = std::move(shape);
  t.data_ = data_;
  return t;
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

Parameter& ParameterStore::add(const std::string& name, Tensor value) {
  if (contains(name)) fail(ErrorCode::invalid_argument, "duplicate parameter " + name);
  Tensor grad(value.shape());
  params_.push_back(Parameter{name, std::move(value), std::move(grad)});
  return params_.back();
}

Parameter& ParameterStore::get(const std::string& name) {
  for (auto& p : params_) {
    if (p.name == name) return p;
  }
  fail(ErrorCode::invalid_argument, "unknown parameter " + name);
}

const Parameter& ParameterStore::get(const std::string& name) const {
  for (const auto& p : params_) {
    if (p.name == name) return p;
  }
  fail(ErrorCode::invalid_argument, "unknown parameter " + name);
}

bool ParameterStore::contains(const std::string& name) const {
  for (const auto& p : params_) {
    if (p.name == name) return true;
  }
  return false;
}

std::vector<Parameter*> ParameterStore::all() {
  std::vector<Parameter*> out;
  for (auto& p : params_) out.push_back(&p);
  return out;
}

std::vector<const Parameter*> ParameterStore::all() const {
  std::vector<const Parameter*> out;
  for (const auto& p : params_) out.push_back(&p);
  return out;
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

void ParameterStore::zero_grad() {
  for (auto& p : params_) p.grad.fill(0.0);
}

void ParameterStore::assign_values(const ParameterStore& other) {
  for (auto& p : params_) {
    const auto& src = other.get(p.name);
    if (src.value.shape() != p.value.shape()) {
      fail(ErrorCode::invalid_argument, "shape mismatch for parameter " + p.name);
    }
    p.value = src.value;
  }
}

const Tensor& Var::value() const { return tape->value(*this); }

Var Tape::constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, {}, nullptr, false, true});
  return {this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::leaf(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, {}, nullptr, true, true});
  return {this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::parameter(Parameter& param) {
  nodes_.push_back(Node{param.value, {}, {}, &param, true, true});
  return {this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

namespace {

void check_finite([[maybe_unused]] const Tensor& t) {
#ifndef NDEBUG
  for (double v : t.values()) {
    if (!std::isfinite(v)) fail(ErrorCode::numeric_error, "non-finite value recorded on tape");
  }
#endif
}

}  // namespace

Var Tape::record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward, bool differentiable) {
  check_finite(value);
  bool needs = false;
  for (Var in : inputs) needs = needs || nodes_[in.id].requires_grad;
  nodes_.push_back(Node{std::move(value), {}, needs ? std::move(backward) : BackwardFn{}, nullptr, needs,
                        differentiable});
  return {this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::record(Tensor value, const std::vector<Var>& inputs, BackwardFn backward, bool differentiable) {
  check_finite(value);
  bool needs = false;
  for (Var in : inputs) needs = needs || nodes_[in.id].requires_grad;
  nodes_.push_back(Node{std::move(value), {}, needs ? std::move(backward) : BackwardFn{}, nullptr, needs,
                        differentiable});
  return {this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Tensor& Tape::grad(Var v) {
  auto& node = nodes_[v.id];
  if (node.grad.size() != node.value.size() || node.grad.shape() != node.value.shape()) {
    node.grad = Tensor(node.value.shape());
  }
  return node.grad;
}

void Tape::backward(Var loss) {
  if (nodes_[loss.id].value.size() != 1) {
    fail(ErrorCode::invalid_argument, "backward() needs a scalar loss, got " +
                                          shape_string(nodes_[loss.id].value.shape()));
  }
  for (auto& n : nodes_) n.grad = Tensor();
  grad(loss)[0] = 1.0;
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    auto& node = nodes_[i];
    if (!node.requires_grad || node.grad.size() == 0) continue;
    if (node.param != nullptr) {
      kernels::active().axpy(node.grad.size(), 1.0, node.grad.data(), node.param->grad.data());
      continue;
    }
    if (!node.backward) continue;
    if (!node.differentiable) {
      bool nonzero = false;
      for (double g : node.grad.values()) nonzero = nonzero || g != 0.0;
      if (nonzero) fail(ErrorCode::not_differentiable, "backward reached a non-differentiable op");
      continue;
    }
    // Callbacks only touch gradients of earlier nodes; nodes_ never grows here.
    node.backward(*this, node.grad);
  }
}

}  // namespace templink::nn
