/*
 * Copyright 2026 The Vital Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef VITAL_TENSOR_H_
#define VITAL_TENSOR_H_

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vital {

using Shape = std::vector<std::size_t>;

std::size_t num_elements(const Shape& shape);
std::string shape_to_string(const Shape& shape);

// Raised when operand shapes do not conform to an op.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when a primitive produces NaN or Inf.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Tape;

namespace detail {

struct Node {
  Shape shape;
  // Shared so that aliased leaves (see Tensor::alias) can reuse the buffer
  // while holding independent gradients.
  std::shared_ptr<std::vector<double>> data;
  std::vector<double> grad;  // empty until a gradient arrives
  bool requires_grad = false;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> inputs;
  std::function<void(Node&)> backward;

  std::vector<double>& grad_buffer();
};

}  // namespace detail

// Dense row-major float64 array. Copies are shallow handles; use clone() for
// a deep copy.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values,
                     bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const;

  std::span<const double> data() const;
  // Mutable access to the value buffer. Only valid on leaves; mutating an
  // interior node invalidates recorded backward rules.
  std::span<double> mutable_data();
  double item() const;
  double at(std::size_t i) const { return data()[i]; }
  double at(std::size_t row, std::size_t col) const;

  bool requires_grad() const;
  void set_requires_grad(bool value);
  bool has_grad() const;
  // Gradient buffer; zeros of the right size when nothing accumulated.
  std::vector<double> grad() const;
  std::span<const double> grad_view() const;
  void zero_grad();

  // New leaf sharing this tensor's value buffer with its own gradient slot.
  Tensor alias() const;
  // New leaf with a private copy of the values.
  Tensor clone() const;

  const char* op_name() const;
  const detail::Node* node() const { return node_.get(); }

 private:
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  std::shared_ptr<detail::Node> node_;

  friend class Tape;
  friend Tensor make_result(const char*, Shape, std::vector<double>,
                            std::vector<Tensor>,
                            std::function<void(detail::Node&)>);
  friend std::shared_ptr<detail::Node> node_of(const Tensor&);
};

// Ordered record of primitive applications on the current thread. Primitives
// record their output here when a tape is active (see TapeScope) and any
// input requires a gradient.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Populates grad on every requires_grad tensor reachable from loss.
  // Rejected when called a second time before reset().
  void backward(const Tensor& loss);
  void reset();
  std::size_t size() const { return nodes_.size(); }
  bool consumed() const { return consumed_; }

  static Tape* current();

 private:
  friend class TapeScope;
  friend Tensor make_result(const char*, Shape, std::vector<double>,
                            std::vector<Tensor>,
                            std::function<void(detail::Node&)>);
  void record(std::shared_ptr<detail::Node> node);

  std::vector<std::shared_ptr<detail::Node>> nodes_;
  bool consumed_ = false;
};

// RAII activation of a tape on the calling thread.
class TapeScope {
 public:
  explicit TapeScope(Tape& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* previous_;
};

// Builds an op result and records it when needed. Exposed for op authors.
Tensor make_result(const char* op, Shape shape, std::vector<double> values,
                   std::vector<Tensor> inputs,
                   std::function<void(detail::Node&)> backward);

}  // namespace vital

#endif  // VITAL_TENSOR_H_
