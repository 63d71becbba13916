#include "kgcl/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kgcl/errors.hpp"

namespace kgcl {

namespace {

std::string shape_str(const Tensor& t) {
  return std::to_string(t.rows()) + "x" + std::to_string(t.cols());
}

[[noreturn]] void shape_fail(const char* op, const Tensor& a, const Tensor& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + shape_str(a) + " and " +
                   shape_str(b));
}

void require_same(const char* op, const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) shape_fail(op, a, b);
}

void require_row_vector(const char* op, const Tensor& a) {
  if (a.rows() != 1) throw ShapeError(std::string(op) + ": expected a row vector, got " + shape_str(a));
}

Tape& tape_of(Var a, Var b) {
  if (a.tape != b.tape) throw ShapeError("vars recorded on different tapes");
  return *a.tape;
}

}  // namespace

const Tensor& Var::value() const { return tape->value(id); }

double Var::item() const {
  const auto& v = value();
  if (v.size() != 1) throw ShapeError("item() on a " + shape_str(v) + " var");
  return v[0];
}

Var Tape::record(const char* op, Tensor value, BackwardFn fn) {
  if (!value.all_finite()) throw NumericError(std::string(op) + ": non-finite output");
  nodes_.push_back(Node{std::move(value), Tensor{}, std::move(fn)});
  return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Tensor& Tape::grad_buffer(std::uint32_t id) {
  auto& n = nodes_[id];
  if (n.grad.empty() && !n.value.empty()) n.grad = Tensor(n.value.rows(), n.value.cols());
  return n.grad;
}

Var Tape::constant(Tensor value) { return record("constant", std::move(value), nullptr); }

Var Tape::leaf(Parameter& p) {
  Parameter* param = &p;
  return record("leaf", p.value, [param](Tape& t, std::uint32_t self) {
    const auto& g = t.node_grad(self);
    if (param->grad.empty()) param->zero_grad();
    for (std::size_t i = 0; i < g.size(); ++i) param->grad[i] += g[i];
  });
}

Var Tape::gather_rows(Parameter& p, std::span<const std::uint32_t> rows) {
  const auto d = p.value.cols();
  Tensor out(rows.size(), d);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= p.value.rows())
      throw ShapeError("gather_rows: row " + std::to_string(rows[i]) + " of " + p.name + " (" +
                       shape_str(p.value) + ")");
    std::copy_n(p.value.data() + rows[i] * d, d, out.data() + i * d);
  }
  Parameter* param = &p;
  std::vector<std::uint32_t> idx(rows.begin(), rows.end());
  return record("gather_rows", std::move(out), [param, idx = std::move(idx)](Tape& t, std::uint32_t self) {
    const auto& g = t.node_grad(self);
    if (param->grad.empty()) param->zero_grad();
    const auto d = param->value.cols();
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t j = 0; j < d; ++j) param->grad(idx[i], j) += g(i, j);
  });
}

Var Tape::frozen_rows(const Parameter& p, std::span<const std::uint32_t> rows) {
  const auto d = p.value.cols();
  Tensor out(rows.size(), d);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= p.value.rows())
      throw ShapeError("frozen_rows: row " + std::to_string(rows[i]) + " of " + p.name);
    std::copy_n(p.value.data() + rows[i] * d, d, out.data() + i * d);
  }
  return constant(std::move(out));
}

void Tape::backward(Var root) {
  if (root.tape != this) throw ShapeError("backward: var belongs to another tape");
  const auto& rv = nodes_[root.id].value;
  if (rv.size() != 1) throw ShapeError("backward: root must be 1x1, got " + shape_str(rv));
  for (auto& n : nodes_) n.grad = Tensor{};
  grad_buffer(root.id)[0] = 1.0;
  for (std::int64_t i = root.id; i >= 0; --i) {
    auto id = static_cast<std::uint32_t>(i);
    if (nodes_[id].grad.empty() || !nodes_[id].backward) continue;
    nodes_[id].backward(*this, id);
  }
}

namespace ad {

Var matmul(Var a, Var b) {
  Tape& t = tape_of(a, b);
  const auto& av = a.value();
  const auto& bv = b.value();
  if (av.cols() != bv.rows()) shape_fail("matmul", av, bv);
  Tensor out(av.rows(), bv.cols());
  kernels::gemm(false, false, av, bv, out, 0.0);
  return t.record("matmul", std::move(out), [a = a.id, b = b.id](Tape& t, std::uint32_t self) {
    const auto& g = t.node_grad(self);
    kernels::gemm(false, true, g, t.value(b), t.grad_buffer(a), 1.0);
    kernels::gemm(true, false, t.value(a), g, t.grad_buffer(b), 1.0);
  });
}

Var transpose(Var a) {
  const auto& av = a.value();
  Tensor out(av.cols(), av.rows());
  for (std::size_t i = 0; i < av.rows(); ++i)
    for (std::size_t j = 0; j < av.cols(); ++j) out(j, i) = av(i, j);
  return a.tape->record("transpose", std::move(out), [a = a.id](Tape& t, std::uint32_t self) {
    const auto& g = t.node_grad(self);
    auto& ga = t.grad_buffer(a);
    for (std::size_t i = 0; i < ga.rows(); ++i)
      for (std::size_t j = 0; j < ga.cols(); ++j) ga(i, j) += g(j, i);
  });
}

namespace {

template <class F, class GA, class GB>
Var binary(const char* op, Var a, Var b, F f, GA ga_fn, GB gb_fn) {
  Tape& t = tape_of(a, b);
  const auto& av = a.value();
  const auto& bv = b.value();
  require_same(op, av, bv);
  Tensor out(av.rows(), av.cols());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(av[i], bv[i]);
  return t.record(op, std::move(out), [a = a.id, b = b.id, ga_fn, gb_fn](Tape& t, std::uint32_t self) {
    const auto& g = t.node_grad(self);
    const auto& av = t.value(a);
    const auto& bv = t.value(b);
    auto& ga = t.grad_buffer(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * ga_fn(av[i], bv[i]);
    auto& gb = t.grad_buffer(b);
    for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * gb_fn(av[i], bv[i]);
  });
}

// y = f(x) elementwise, dy/dx = df(x, y).
template <class F, class DF>
Var unary(const char* op, Var a, F f, DF df) {
  const auto& av = a.value();
  Tensor out(av.rows(), av.cols());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(av[i]);
  return a.tape->record(op, std::move(out), [a = a.id, df](Tape& t, std::uint32_t self) {
    const auto& g = t.node_grad(self);
    const auto& x = t.value(a);
    const auto& y = t.value(self);
    auto& ga = t.grad_buffer(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * df(x[i], y[i]);
  });
}

}  // namespace

Var add(Var a, Var b) {
  return binary("add", a, b, [](double x, double y) { return x + y; },
                [](double, double) { return 1.0; }, [](double, double) { return 1.0; });
}

Var sub(Var a, Var b) {
  return binary("sub", a, b, [](double x, double y) { return x - y; },
                [](double, double) { return 1.0; }, [](double, double) { return -1.0; });
}

Var mul(Var a, Var b) {
  return binary("mul", a, b, [](double x, double y) { return x * y; },
                [](double, double y) { return y; }, [](double x, double) { return x; });
}

Var scale(Var a, double s) {
  return unary("scale", a, [s](double x) { return s * x; }, [s](double, double) { return s; });
}

Var affine(Var a, double s, double c) {
  return unary("affine", a, [s, c](double x) { return s * x + c; },
               [s](double, double) { return s; });
}

Var add_row_broadcast(Var x, Var b) {
  Tape& t = tape_of(x, b);
  const auto& xv = x.value();
  const auto& bv = b.value();
  if (bv.rows() != 1 || bv.cols() != xv.cols()) shape_fail("add_row_broadcast", xv, bv);
  Tensor out = xv;
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += bv[j];
  return t.record("add_row_broadcast", std::move(out), [x = x.id, b = b.id](Tape& t, std::uint32_t self) {
    const auto& g = t.node_grad(self);
    auto& gx = t.grad_buffer(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
    auto& gb = t.grad_buffer(b);
    for (std::size_t i = 0; i < g.rows(); ++i)
      for (std::size_t j = 0; j < g.cols(); ++j) gb[j] += g(i, j);
  });
}

Var add_col_broadcast(Var x, Var b) {
  Tape& t = tape_of(x, b);
  const auto& xv = x.value();
  const auto& bv = b.value();
  if (bv.cols() != 1 || bv.rows() != xv.rows()) shape_fail("add_col_broadcast", xv, bv);
  Tensor out = xv;
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += bv[i];
  return t.record("add_col_broadcast", std::move(out), [x = x.id, b = b.id](Tape& t, std::uint32_t self) {
    const auto& g = t.node_grad(self);
    auto& gx = t.grad_buffer(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
    auto& gb = t.grad_buffer(b);
    for (std::size_t i = 0; i < g.rows(); ++i)
      for (std::size_t j = 0; j < g.cols(); ++j) gb[i] += g(i, j);
  });
}

Var elu(Var a) {
  return unary("elu", a, [](double x) { return x > 0.0 ? x : std::expm1(x); },
               [](double x, double y) { return x > 0.0 ? 1.0 : y + 1.0; });
}

Var sigmoid(Var a) {
  return unary("sigmoid", a,
               [](double x) {
                 if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
                 double e = std::exp(x);
                 return e / (1.0 + e);
               },
               [](double, double y) { return y * (1.0 - y); });
}

Var log(Var a) {
  return unary("log", a, [](double x) { return std::log(x); },
               [](double x, double) { return 1.0 / x; });
}

Var log_sigmoid(Var a) {
  return unary("log_sigmoid", a,
               [](double x) { return -(std::max(-x, 0.0) + std::log1p(std::exp(-std::abs(x)))); },
               [](double x, double) {
                 if (x >= 0.0) {
                   double e = std::exp(-x);
                   return e / (1.0 + e);
                 }
                 return 1.0 / (1.0 + std::exp(x));
               });
}

Var exp(Var a) {
  return unary("exp", a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var clamp_min(Var a, double lo) {
  return unary("clamp_min", a, [lo](double x) { return x < lo ? lo : x; },
               [lo](double x, double) { return x < lo ? 0.0 : 1.0; });
}

Var softmax_rows(Var a) {
  const auto& av = a.value();
  Tensor out(av.rows(), av.cols());
  for (std::size_t i = 0; i < av.rows(); ++i) {
    auto r = av.row(i);
    double mx = *std::max_element(r.begin(), r.end());
    double z = 0.0;
    for (std::size_t j = 0; j < r.size(); ++j) z += (out(i, j) = std::exp(r[j] - mx));
    for (std::size_t j = 0; j < r.size(); ++j) out(i, j) /= z;
  }
  return a.tape->record("softmax_rows", std::move(out), [a = a.id](Tape& t, std::uint32_t self) {
    const auto& g = t.node_grad(self);
    const auto& y = t.value(self);
    auto& ga = t.grad_buffer(a);
    for (std::size_t i = 0; i < y.rows(); ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < y.cols(); ++j) s += g(i, j) * y(i, j);
      for (std::size_t j = 0; j < y.cols(); ++j) ga(i, j) += y(i, j) * (g(i, j) - s);
    }
  });
}

Var sum(Var a) {
  double s = 0.0;
  for (double v : a.value().values()) s += v;
  return a.tape->record("sum", Tensor::scalar(s), [a = a.id](Tape& t, std::uint32_t self) {
    double g = t.node_grad(self)[0];
    auto& ga = t.grad_buffer(a);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g;
  });
}

Var mean(Var a) {
  const auto n = static_cast<double>(a.value().size());
  return scale(sum(a), 1.0 / n);
}

Var mean_of(std::span<const Var> vs) {
  if (vs.empty()) throw ShapeError("mean_of: no inputs");
  Tape& t = *vs.front().tape;
  Tensor out = vs.front().value();
  for (std::size_t k = 1; k < vs.size(); ++k) {
    require_same("mean_of", out, vs[k].value());
    const auto& v = vs[k].value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += v[i];
  }
  const double inv = 1.0 / static_cast<double>(vs.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= inv;
  std::vector<std::uint32_t> ids;
  for (auto v : vs) ids.push_back(v.id);
  return t.record("mean_of", std::move(out), [ids = std::move(ids), inv](Tape& t, std::uint32_t self) {
    const auto& g = t.node_grad(self);
    for (auto id : ids) {
      auto& gi = t.grad_buffer(id);
      for (std::size_t i = 0; i < g.size(); ++i) gi[i] += inv * g[i];
    }
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  Tape& t = *parts.front().tape;
  const auto rows = parts.front().rows();
  std::size_t cols = 0;
  for (auto p : parts) {
    if (p.rows() != rows) shape_fail("concat_cols", parts.front().value(), p.value());
    cols += p.cols();
  }
  Tensor out(rows, cols);
  std::vector<std::uint32_t> ids;
  std::size_t off = 0;
  for (auto p : parts) {
    const auto& v = p.value();
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < v.cols(); ++j) out(i, off + j) = v(i, j);
    off += v.cols();
    ids.push_back(p.id);
  }
  return t.record("concat_cols", std::move(out), [ids = std::move(ids)](Tape& t, std::uint32_t self) {
    const auto& g = t.node_grad(self);
    std::size_t off = 0;
    for (auto id : ids) {
      auto& gi = t.grad_buffer(id);
      for (std::size_t i = 0; i < gi.rows(); ++i)
        for (std::size_t j = 0; j < gi.cols(); ++j) gi(i, j) += g(i, off + j);
      off += t.value(id).cols();
    }
  });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  Tape& t = *parts.front().tape;
  const auto cols = parts.front().cols();
  std::size_t rows = 0;
  for (auto p : parts) {
    if (p.cols() != cols) shape_fail("concat_rows", parts.front().value(), p.value());
    rows += p.rows();
  }
  std::vector<double> data;
  data.reserve(rows * cols);
  std::vector<std::uint32_t> ids;
  for (auto p : parts) {
    auto v = p.value().values();
    data.insert(data.end(), v.begin(), v.end());
    ids.push_back(p.id);
  }
  return t.record("concat_rows", Tensor(rows, cols, std::move(data)),
                  [ids = std::move(ids)](Tape& t, std::uint32_t self) {
                    const auto& g = t.node_grad(self);
                    std::size_t off = 0;
                    for (auto id : ids) {
                      auto& gi = t.grad_buffer(id);
                      for (std::size_t i = 0; i < gi.size(); ++i) gi[i] += g[off + i];
                      off += gi.size();
                    }
                  });
}

Var row(Var a, std::size_t r) {
  const auto& av = a.value();
  if (r >= av.rows()) throw ShapeError("row: index " + std::to_string(r) + " of " + shape_str(av));
  auto src = av.row(r);
  return a.tape->record("row", Tensor(1, av.cols(), std::vector<double>(src.begin(), src.end())),
                        [a = a.id, r](Tape& t, std::uint32_t self) {
                          const auto& g = t.node_grad(self);
                          auto dst = t.grad_buffer(a).row(r);
                          for (std::size_t j = 0; j < g.size(); ++j) dst[j] += g[j];
                        });
}

Var select_rows(Var a, std::span<const std::size_t> idx) {
  const auto& av = a.value();
  const auto d = av.cols();
  Tensor out(idx.size(), d);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] >= av.rows())
      throw ShapeError("select_rows: index " + std::to_string(idx[i]) + " of " + shape_str(av));
    std::copy_n(av.data() + idx[i] * d, d, out.data() + i * d);
  }
  std::vector<std::size_t> rows(idx.begin(), idx.end());
  return a.tape->record("select_rows", std::move(out), [a = a.id, rows = std::move(rows)](Tape& t, std::uint32_t self) {
    const auto& g = t.node_grad(self);
    auto& ga = t.grad_buffer(a);
    const auto d = ga.cols();
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = 0; j < d; ++j) ga(rows[i], j) += g(i, j);
  });
}

Var col(Var a, std::size_t c) {
  const auto& av = a.value();
  if (c >= av.cols()) throw ShapeError("col: index " + std::to_string(c) + " of " + shape_str(av));
  Tensor out(av.rows(), 1);
  for (std::size_t i = 0; i < av.rows(); ++i) out[i] = av(i, c);
  return a.tape->record("col", std::move(out), [a = a.id, c](Tape& t, std::uint32_t self) {
    const auto& g = t.node_grad(self);
    auto& ga = t.grad_buffer(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga(i, c) += g[i];
  });
}

Var dot(Var a, Var b) {
  Tape& t = tape_of(a, b);
  const auto& av = a.value();
  const auto& bv = b.value();
  require_row_vector("dot", av);
  require_same("dot", av, bv);
  double s = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) s += av[i] * bv[i];
  return t.record("dot", Tensor::scalar(s), [a = a.id, b = b.id](Tape& t, std::uint32_t self) {
    double g = t.node_grad(self)[0];
    const auto& av = t.value(a);
    const auto& bv = t.value(b);
    auto& ga = t.grad_buffer(a);
    for (std::size_t i = 0; i < av.size(); ++i) ga[i] += g * bv[i];
    auto& gb = t.grad_buffer(b);
    for (std::size_t i = 0; i < av.size(); ++i) gb[i] += g * av[i];
  });
}

namespace {

struct CosineParts {
  double value, na, nb;
  bool a_clamped, b_clamped;
};

CosineParts cosine_parts(const double* a, const double* b, std::size_t d) {
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  double na = std::sqrt(aa), nb = std::sqrt(bb);
  CosineParts p{0.0, std::max(na, ad::kNormFloor), std::max(nb, ad::kNormFloor), na < ad::kNormFloor,
                nb < ad::kNormFloor};
  p.value = ab / (p.na * p.nb);
  return p;
}

// Accumulates g * d cos / d a and g * d cos / d b.
void cosine_backward(const double* a, const double* b, std::size_t d, const CosineParts& p,
                     double g, double* ga, double* gb) {
  const double inv = 1.0 / (p.na * p.nb);
  for (std::size_t i = 0; i < d; ++i) {
    double da = b[i] * inv - (p.a_clamped ? 0.0 : p.value * a[i] / (p.na * p.na));
    double db = a[i] * inv - (p.b_clamped ? 0.0 : p.value * b[i] / (p.nb * p.nb));
    ga[i] += g * da;
    gb[i] += g * db;
  }
}

}  // namespace

Var cosine(Var a, Var b) {
  Tape& t = tape_of(a, b);
  const auto& av = a.value();
  const auto& bv = b.value();
  require_row_vector("cosine", av);
  require_same("cosine", av, bv);
  auto p = cosine_parts(av.data(), bv.data(), av.size());
  return t.record("cosine", Tensor::scalar(p.value), [a = a.id, b = b.id](Tape& t, std::uint32_t self) {
    const auto& av = t.value(a);
    const auto& bv = t.value(b);
    auto p = cosine_parts(av.data(), bv.data(), av.size());
    double* ga = t.grad_buffer(a).data();
    double* gb = t.grad_buffer(b).data();
    cosine_backward(av.data(), bv.data(), av.size(), p, t.node_grad(self)[0], ga, gb);
  });
}

Var cosine_rows(Var a, Var b) {
  Tape& t = tape_of(a, b);
  const auto& av = a.value();
  const auto& bv = b.value();
  require_row_vector("cosine_rows", av);
  if (bv.cols() != av.cols()) shape_fail("cosine_rows", av, bv);
  const auto d = av.cols();
  Tensor out(1, bv.rows());
  for (std::size_t r = 0; r < bv.rows(); ++r) out[r] = cosine_parts(av.data(), bv.data() + r * d, d).value;
  return t.record("cosine_rows", std::move(out), [a = a.id, b = b.id](Tape& t, std::uint32_t self) {
    const auto& av = t.value(a);
    const auto& bv = t.value(b);
    const auto& g = t.node_grad(self);
    const auto d = av.cols();
    double* ga = t.grad_buffer(a).data();
    double* gb = t.grad_buffer(b).data();
    for (std::size_t r = 0; r < bv.rows(); ++r) {
      const double* br = bv.data() + r * d;
      auto p = cosine_parts(av.data(), br, d);
      cosine_backward(av.data(), br, d, p, g[r], ga, gb + r * d);
    }
  });
}

Var cyclic_correlation(Var a, Var b) {
  Tape& t = tape_of(a, b);
  const auto& av = a.value();
  const auto& bv = b.value();
  require_row_vector("cyclic_correlation", av);
  require_same("cyclic_correlation", av, bv);
  const auto d = av.size();
  Tensor out(1, d);
  for (std::size_t k = 0; k < d; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) s += av[i] * bv[(i + k) % d];
    out[k] = s;
  }
  return t.record("cyclic_correlation", std::move(out), [a = a.id, b = b.id](Tape& t, std::uint32_t self) {
    const auto& g = t.node_grad(self);
    const auto& av = t.value(a);
    const auto& bv = t.value(b);
    const auto d = av.size();
    auto& ga = t.grad_buffer(a);
    auto& gb = t.grad_buffer(b);
    for (std::size_t k = 0; k < d; ++k)
      for (std::size_t i = 0; i < d; ++i) {
        ga[i] += g[k] * bv[(i + k) % d];
        gb[(i + k) % d] += g[k] * av[i];
      }
  });
}

Var logsumexp(Var a) {
  const auto& av = a.value();
  if (av.empty()) throw ShapeError("logsumexp: empty input");
  double mx = *std::max_element(av.values().begin(), av.values().end());
  double z = 0.0;
  for (double v : av.values()) z += std::exp(v - mx);
  return a.tape->record("logsumexp", Tensor::scalar(mx + std::log(z)), [a = a.id](Tape& t, std::uint32_t self) {
    double g = t.node_grad(self)[0];
    double lse = t.value(self)[0];
    const auto& av = t.value(a);
    auto& ga = t.grad_buffer(a);
    for (std::size_t i = 0; i < av.size(); ++i) ga[i] += g * std::exp(av[i] - lse);
  });
}

}  // namespace ad

double finite_difference_check(const LossFn& f, std::span<Parameter* const> params, double eps) {
  for (auto* p : params) p->zero_grad();
  {
    Tape tape;
    Var loss = f(tape);
    tape.backward(loss);
  }
  std::vector<Tensor> analytic;
  for (auto* p : params) analytic.push_back(p->grad);

  auto eval = [&f]() {
    Tape tape;
    return f(tape).item();
  };
  double worst = 0.0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& v = params[k]->value;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double x = v[i];
      v[i] = x + eps;
      const double fp = eval();
      v[i] = x - eps;
      const double fm = eval();
      v[i] = x;
      const double numeric = (fp - fm) / (2.0 * eps);
      const double a = analytic[k][i];
      worst = std::max(worst, std::abs(numeric - a) / std::max(1.0, std::abs(a)));
    }
  }
  return worst;
}

}  // namespace kgcl
