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

#include "vital/ops.h"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace vital::ops {

namespace {

using RowMat =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

using detail::Node;

[[noreturn]] void shape_mismatch(const char* op, const Shape& a,
                                 const Shape& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " +
                   shape_to_string(a) + " and " + shape_to_string(b));
}

void require_rank(const char* op, const Tensor& t, std::size_t rank) {
  if (t.rank() != rank) {
    throw ShapeError(std::string(op) + ": expected rank " +
                     std::to_string(rank) + ", got " +
                     shape_to_string(t.shape()));
  }
}

std::size_t last_dim(const Shape& s) { return s.empty() ? 1 : s.back(); }

bool wants_grad(const Node& node, std::size_t i) {
  return node.inputs[i]->requires_grad;
}

std::vector<double>& input_grad(Node& node, std::size_t i) {
  return node.inputs[i]->grad_buffer();
}

const std::vector<double>& input_data(const Node& node, std::size_t i) {
  return *node.inputs[i]->data;
}

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

}  // namespace

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank("matmul", a, 2);
  require_rank("matmul", b, 2);
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) shape_mismatch("matmul", a.shape(), b.shape());
  std::vector<double> out(m * n);
  MutMap(out.data(), m, n).noalias() =
      ConstMap(a.data().data(), m, k) * ConstMap(b.data().data(), k, n);
  return make_result(
      "matmul", {m, n}, std::move(out), {a, b}, [m, k, n](Node& self) {
        ConstMap g(self.grad.data(), m, n);
        if (wants_grad(self, 0)) {
          MutMap(input_grad(self, 0).data(), m, k).noalias() +=
              g * ConstMap(input_data(self, 1).data(), k, n).transpose();
        }
        if (wants_grad(self, 1)) {
          MutMap(input_grad(self, 1).data(), k, n).noalias() +=
              ConstMap(input_data(self, 0).data(), m, k).transpose() * g;
        }
      });
}

Tensor add(const Tensor& a, const Tensor& b) {
  const bool same = a.shape() == b.shape();
  const bool bias =
      !same && b.rank() == 1 && a.rank() >= 1 && b.dim(0) == a.shape().back();
  if (!same && !bias) shape_mismatch("add", a.shape(), b.shape());
  const auto x = a.data();
  const auto y = b.data();
  std::vector<double> out(x.size());
  if (same) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + y[i];
  } else {
    const std::size_t n = y.size();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + y[i % n];
  }
  return make_result("add", a.shape(), std::move(out), {a, b},
                     [same](Node& self) {
                       const auto& g = self.grad;
                       if (wants_grad(self, 0)) {
                         auto& ga = input_grad(self, 0);
                         for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                       }
                       if (wants_grad(self, 1)) {
                         auto& gb = input_grad(self, 1);
                         const std::size_t n = gb.size();
                         if (same) {
                           for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
                         } else {
                           for (std::size_t i = 0; i < g.size(); ++i)
                             gb[i % n] += g[i];
                         }
                       }
                     });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) shape_mismatch("elementwise_mul", a.shape(), b.shape());
  const auto x = a.data();
  const auto y = b.data();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * y[i];
  return make_result("elementwise_mul", a.shape(), std::move(out), {a, b},
                     [](Node& self) {
                       const auto& g = self.grad;
                       if (wants_grad(self, 0)) {
                         auto& ga = input_grad(self, 0);
                         const auto& y = input_data(self, 1);
                         for (std::size_t i = 0; i < g.size(); ++i)
                           ga[i] += g[i] * y[i];
                       }
                       if (wants_grad(self, 1)) {
                         auto& gb = input_grad(self, 1);
                         const auto& x = input_data(self, 0);
                         for (std::size_t i = 0; i < g.size(); ++i)
                           gb[i] += g[i] * x[i];
                       }
                     });
}

Tensor scale(const Tensor& a, double factor) {
  const auto x = a.data();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * factor;
  return make_result("scalar_scale", a.shape(), std::move(out), {a},
                     [factor](Node& self) {
                       auto& ga = input_grad(self, 0);
                       for (std::size_t i = 0; i < ga.size(); ++i)
                         ga[i] += self.grad[i] * factor;
                     });
}

Tensor softmax_last_axis(const Tensor& a, bool causal) {
  const std::size_t n = last_dim(a.shape());
  const std::size_t rows = a.size() / n;
  if (causal && (a.rank() != 2 || a.dim(0) != a.dim(1))) {
    throw ShapeError("causal softmax needs square scores, got " +
                     shape_to_string(a.shape()));
  }
  const auto x = a.data();
  std::vector<double> out(x.size(), 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t width = causal ? r + 1 : n;
    const double* in = x.data() + r * n;
    double* y = out.data() + r * n;
    const double mx = *std::max_element(in, in + width);
    double total = 0.0;
    for (std::size_t j = 0; j < width; ++j) {
      y[j] = std::exp(in[j] - mx);
      total += y[j];
    }
    const double inv = 1.0 / total;
    for (std::size_t j = 0; j < width; ++j) y[j] *= inv;
  }
  return make_result(
      "softmax_last_axis", a.shape(), std::move(out), {a},
      [n, rows, causal](Node& self) {
        auto& ga = input_grad(self, 0);
        const auto& y = *self.data;
        const auto& g = self.grad;
        for (std::size_t r = 0; r < rows; ++r) {
          const std::size_t width = causal ? r + 1 : n;
          const std::size_t base = r * n;
          double dot = 0.0;
          for (std::size_t j = 0; j < width; ++j) dot += g[base + j] * y[base + j];
          for (std::size_t j = 0; j < width; ++j)
            ga[base + j] += y[base + j] * (g[base + j] - dot);
        }
      });
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  double eps) {
  const std::size_t n = last_dim(x.shape());
  if (gain.shape() != Shape{n}) shape_mismatch("layer_norm", x.shape(), gain.shape());
  if (bias.shape() != Shape{n}) shape_mismatch("layer_norm", x.shape(), bias.shape());
  const std::size_t rows = x.size() / n;
  const auto in = x.data();
  const auto w = gain.data();
  const auto b = bias.data();
  std::vector<double> out(in.size());
  auto xhat = std::make_shared<std::vector<double>>(in.size());
  auto rstd = std::make_shared<std::vector<double>>(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = in.data() + r * n;
    double mu = 0.0;
    for (std::size_t j = 0; j < n; ++j) mu += row[j];
    mu /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t j = 0; j < n; ++j) var += (row[j] - mu) * (row[j] - mu);
    var /= static_cast<double>(n);
    const double s = 1.0 / std::sqrt(var + eps);
    (*rstd)[r] = s;
    for (std::size_t j = 0; j < n; ++j) {
      const double h = (row[j] - mu) * s;
      (*xhat)[r * n + j] = h;
      out[r * n + j] = h * w[j] + b[j];
    }
  }
  return make_result(
      "layer_norm", x.shape(), std::move(out), {x, gain, bias},
      [n, rows, xhat, rstd](Node& self) {
        const auto& g = self.grad;
        const auto& w = input_data(self, 1);
        if (wants_grad(self, 1)) {
          auto& gw = input_grad(self, 1);
          for (std::size_t i = 0; i < g.size(); ++i) gw[i % n] += g[i] * (*xhat)[i];
        }
        if (wants_grad(self, 2)) {
          auto& gb = input_grad(self, 2);
          for (std::size_t i = 0; i < g.size(); ++i) gb[i % n] += g[i];
        }
        if (wants_grad(self, 0)) {
          auto& gx = input_grad(self, 0);
          const double inv_n = 1.0 / static_cast<double>(n);
          for (std::size_t r = 0; r < rows; ++r) {
            const std::size_t base = r * n;
            double sum_d = 0.0, sum_dh = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
              const double d = g[base + j] * w[j];
              sum_d += d;
              sum_dh += d * (*xhat)[base + j];
            }
            const double s = (*rstd)[r];
            for (std::size_t j = 0; j < n; ++j) {
              const double d = g[base + j] * w[j];
              gx[base + j] +=
                  s * (d - sum_d * inv_n - (*xhat)[base + j] * sum_dh * inv_n);
            }
          }
        }
      });
}

Tensor gelu(const Tensor& a) {
  const auto x = a.data();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * normal_cdf(x[i]);
  return make_result("gelu", a.shape(), std::move(out), {a}, [](Node& self) {
    auto& ga = input_grad(self, 0);
    const auto& x = input_data(self, 0);
    constexpr double kInvSqrt2Pi = 0.3989422804014327;
    for (std::size_t i = 0; i < ga.size(); ++i) {
      const double pdf = kInvSqrt2Pi * std::exp(-0.5 * x[i] * x[i]);
      ga[i] += self.grad[i] * (normal_cdf(x[i]) + x[i] * pdf);
    }
  });
}

Tensor concat(std::span<const Tensor> parts, std::size_t axis) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  const Tensor& first = parts.front();
  if (first.rank() == 1 && axis == 0) {
    std::vector<double> out;
    std::vector<std::size_t> offsets;
    for (const Tensor& p : parts) {
      require_rank("concat", p, 1);
      offsets.push_back(out.size());
      out.insert(out.end(), p.data().begin(), p.data().end());
    }
    const std::size_t total = out.size();
    return make_result("concat", {total}, std::move(out),
                       {parts.begin(), parts.end()}, [offsets](Node& self) {
                         for (std::size_t p = 0; p < offsets.size(); ++p) {
                           if (!wants_grad(self, p)) continue;
                           auto& gp = input_grad(self, p);
                           for (std::size_t i = 0; i < gp.size(); ++i)
                             gp[i] += self.grad[offsets[p] + i];
                         }
                       });
  }
  require_rank("concat", first, 2);
  if (axis > 1) throw ShapeError("concat: axis must be 0 or 1");
  const std::size_t other = axis == 0 ? first.dim(1) : first.dim(0);
  std::size_t total = 0;
  std::vector<std::size_t> offsets;
  for (const Tensor& p : parts) {
    require_rank("concat", p, 2);
    const std::size_t p_other = axis == 0 ? p.dim(1) : p.dim(0);
    if (p_other != other) shape_mismatch("concat", first.shape(), p.shape());
    offsets.push_back(total);
    total += p.dim(axis);
  }
  const Shape shape = axis == 0 ? Shape{total, other} : Shape{other, total};
  std::vector<double> out(num_elements(shape));
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const auto src = parts[p].data();
    if (axis == 0) {
      std::copy(src.begin(), src.end(), out.begin() + offsets[p] * other);
    } else {
      const std::size_t w = parts[p].dim(1);
      for (std::size_t r = 0; r < other; ++r)
        std::copy_n(src.data() + r * w, w, out.data() + r * total + offsets[p]);
    }
  }
  return make_result(
      "concat", shape, std::move(out), {parts.begin(), parts.end()},
      [offsets, axis, other, total](Node& self) {
        for (std::size_t p = 0; p < offsets.size(); ++p) {
          if (!wants_grad(self, p)) continue;
          auto& gp = input_grad(self, p);
          if (axis == 0) {
            const double* g = self.grad.data() + offsets[p] * other;
            for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += g[i];
          } else {
            const std::size_t w = self.inputs[p]->shape[1];
            for (std::size_t r = 0; r < other; ++r)
              for (std::size_t c = 0; c < w; ++c)
                gp[r * w + c] += self.grad[r * total + offsets[p] + c];
          }
        }
      });
}

Tensor concat(std::initializer_list<Tensor> parts, std::size_t axis) {
  return concat(std::span<const Tensor>(parts.begin(), parts.size()), axis);
}

Tensor slice(const Tensor& a, std::vector<std::size_t> begin,
             std::vector<std::size_t> extent) {
  if (begin.size() != a.rank() || extent.size() != a.rank() || a.rank() == 0 ||
      a.rank() > 2) {
    throw ShapeError("slice: bad box for " + shape_to_string(a.shape()));
  }
  for (std::size_t i = 0; i < a.rank(); ++i) {
    if (extent[i] == 0 || begin[i] + extent[i] > a.dim(i)) {
      throw ShapeError("slice: box " + shape_to_string(begin) + "+" +
                       shape_to_string(extent) + " exceeds " +
                       shape_to_string(a.shape()));
    }
  }
  const std::size_t rows = a.rank() == 2 ? extent[0] : 1;
  const std::size_t cols = extent.back();
  const std::size_t width = a.shape().back();
  const std::size_t r0 = a.rank() == 2 ? begin[0] : 0;
  const std::size_t c0 = begin.back();
  const auto src = a.data();
  std::vector<double> out(rows * cols);
  for (std::size_t r = 0; r < rows; ++r)
    std::copy_n(src.data() + (r0 + r) * width + c0, cols, out.data() + r * cols);
  return make_result("slice", Shape(extent.begin(), extent.end()),
                     std::move(out), {a},
                     [rows, cols, width, r0, c0](Node& self) {
                       auto& ga = input_grad(self, 0);
                       for (std::size_t r = 0; r < rows; ++r)
                         for (std::size_t c = 0; c < cols; ++c)
                           ga[(r0 + r) * width + c0 + c] += self.grad[r * cols + c];
                     });
}

Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t count) {
  require_rank("slice", a, 2);
  return slice(a, {begin, 0}, {count, a.dim(1)});
}

Tensor transpose(const Tensor& a) {
  require_rank("transpose", a, 2);
  const std::size_t m = a.dim(0), n = a.dim(1);
  std::vector<double> out(m * n);
  MutMap(out.data(), n, m) = ConstMap(a.data().data(), m, n).transpose();
  return make_result("transpose", {n, m}, std::move(out), {a},
                     [m, n](Node& self) {
                       MutMap(input_grad(self, 0).data(), m, n) +=
                           ConstMap(self.grad.data(), n, m).transpose();
                     });
}

Tensor mean(const Tensor& a) {
  const auto x = a.data();
  double total = 0.0;
  for (double v : x) total += v;
  const double inv = 1.0 / static_cast<double>(x.size());
  return make_result("mean", {}, {total * inv}, {a}, [inv](Node& self) {
    auto& ga = input_grad(self, 0);
    const double g = self.grad[0] * inv;
    for (double& v : ga) v += g;
  });
}

Tensor mean(const Tensor& a, std::size_t axis) {
  require_rank("mean", a, 2);
  if (axis > 1) throw ShapeError("mean: axis must be 0 or 1");
  const std::size_t m = a.dim(0), n = a.dim(1);
  const std::size_t out_len = axis == 0 ? n : m;
  const double inv = 1.0 / static_cast<double>(axis == 0 ? m : n);
  const auto x = a.data();
  std::vector<double> out(out_len, 0.0);
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t c = 0; c < n; ++c) out[axis == 0 ? c : r] += x[r * n + c];
  for (double& v : out) v *= inv;
  return make_result("mean", {out_len}, std::move(out), {a},
                     [m, n, axis, inv](Node& self) {
                       auto& ga = input_grad(self, 0);
                       for (std::size_t r = 0; r < m; ++r)
                         for (std::size_t c = 0; c < n; ++c)
                           ga[r * n + c] += inv * self.grad[axis == 0 ? c : r];
                     });
}

Tensor embedding_gather(const Tensor& table,
                        std::span<const std::size_t> indices) {
  require_rank("embedding_gather", table, 2);
  if (indices.empty()) throw ShapeError("embedding_gather: no indices");
  const std::size_t rows = table.dim(0), d = table.dim(1);
  std::vector<std::size_t> idx(indices.begin(), indices.end());
  const auto src = table.data();
  std::vector<double> out(idx.size() * d);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] >= rows) {
      throw ShapeError("embedding_gather: index " + std::to_string(idx[i]) +
                       " out of range for " + shape_to_string(table.shape()));
    }
    std::copy_n(src.data() + idx[i] * d, d, out.data() + i * d);
  }
  const std::size_t n = idx.size();
  return make_result("embedding_gather", {n, d}, std::move(out), {table},
                     [idx = std::move(idx), d](Node& self) {
                       auto& gt = input_grad(self, 0);
                       for (std::size_t i = 0; i < idx.size(); ++i)
                         for (std::size_t j = 0; j < d; ++j)
                           gt[idx[i] * d + j] += self.grad[i * d + j];
                     });
}

Tensor repeat_last_dim(const Tensor& a, std::size_t d) {
  if (d == 0) throw ShapeError("repeat_last_dim: d must be positive");
  Shape shape = a.shape();
  shape.push_back(d);
  const auto x = a.data();
  std::vector<double> out(x.size() * d);
  for (std::size_t i = 0; i < x.size(); ++i)
    std::fill_n(out.data() + i * d, d, x[i]);
  return make_result("repeat_last_dim", std::move(shape), std::move(out), {a},
                     [d](Node& self) {
                       auto& ga = input_grad(self, 0);
                       for (std::size_t i = 0; i < ga.size(); ++i) {
                         double s = 0.0;
                         for (std::size_t j = 0; j < d; ++j) s += self.grad[i * d + j];
                         ga[i] += s;
                       }
                     });
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (num_elements(shape) != a.size()) shape_mismatch("reshape", a.shape(), shape);
  std::vector<double> out(a.data().begin(), a.data().end());
  return make_result("reshape", std::move(shape), std::move(out), {a},
                     [](Node& self) {
                       auto& ga = input_grad(self, 0);
                       for (std::size_t i = 0; i < ga.size(); ++i)
                         ga[i] += self.grad[i];
                     });
}

Tensor binary_cross_entropy_with_logits(const Tensor& logits,
                                        std::span<const double> targets,
                                        double pos_weight) {
  if (targets.size() != logits.size()) {
    throw ShapeError("binary_cross_entropy: " + std::to_string(targets.size()) +
                     " targets for logits " + shape_to_string(logits.shape()));
  }
  std::vector<double> y(targets.begin(), targets.end());
  const auto z = logits.data();
  std::vector<double> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    out[i] = pos_weight * y[i] * softplus(-z[i]) + (1.0 - y[i]) * softplus(z[i]);
  }
  return make_result(
      "binary_cross_entropy", logits.shape(), std::move(out), {logits},
      [y = std::move(y), pos_weight](Node& self) {
        auto& gz = input_grad(self, 0);
        const auto& z = input_data(self, 0);
        for (std::size_t i = 0; i < gz.size(); ++i) {
          const double d = -pos_weight * y[i] * sigmoid(-z[i]) +
                           (1.0 - y[i]) * sigmoid(z[i]);
          gz[i] += self.grad[i] * d;
        }
      });
}

Tensor softmax_cross_entropy(const Tensor& logits, std::size_t label) {
  require_rank("softmax_cross_entropy", logits, 1);
  const auto z = logits.data();
  if (label >= z.size()) {
    throw ShapeError("softmax_cross_entropy: label " + std::to_string(label) +
                     " out of range for " + shape_to_string(logits.shape()));
  }
  const double mx = *std::max_element(z.begin(), z.end());
  double total = 0.0;
  for (double v : z) total += std::exp(v - mx);
  const double lse = mx + std::log(total);
  return make_result("softmax_cross_entropy", {}, {lse - z[label]}, {logits},
                     [label, lse](Node& self) {
                       auto& gz = input_grad(self, 0);
                       const auto& z = input_data(self, 0);
                       for (std::size_t i = 0; i < gz.size(); ++i) {
                         const double p = std::exp(z[i] - lse);
                         gz[i] += self.grad[0] * (p - (i == label ? 1.0 : 0.0));
                       }
                     });
}

}  // namespace vital::ops
