#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "kgcl/adam.hpp"
#include "kgcl/autodiff.hpp"
#include "kgcl/errors.hpp"

using namespace kgcl;

namespace {

Parameter random_param(const std::string& name, std::size_t r, std::size_t c, std::mt19937_64& rng,
                       double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor t(r, c);
  for (auto& v : t.values()) v = u(rng);
  return Parameter(name, std::move(t));
}

// Scalar probe: sum(out .* W) for a fixed random W, so every output entry
// receives a distinct upstream gradient.
Var probe(Tape& tape, Var out, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Tensor w(out.rows(), out.cols());
  for (auto& v : w.values()) v = u(rng);
  return ad::sum(ad::mul(out, tape.constant(std::move(w))));
}

double op_check(const std::function<Var(Tape&, std::vector<Var>&)>& build, std::vector<Parameter>& params,
                std::uint64_t seed) {
  std::vector<Parameter*> ptrs;
  for (auto& p : params) ptrs.push_back(&p);
  LossFn f = [&](Tape& tape) {
    std::vector<Var> leaves;
    for (auto& p : params) leaves.push_back(tape.leaf(p));
    return probe(tape, build(tape, leaves), seed);
  };
  return finite_difference_check(f, ptrs);
}

std::vector<double> brute_correlation(const std::vector<double>& a, const std::vector<double>& b) {
  const auto d = a.size();
  std::vector<double> out(d, 0.0);
  for (std::size_t k = 0; k < d; ++k)
    for (std::size_t i = 0; i < d; ++i) out[k] += a[i] * b[(i + k) % d];
  return out;
}

}  // namespace

TEST(Ops, FixedPoints) {
  Tape t;
  EXPECT_EQ(ad::elu(t.scalar(0.0)).item(), 0.0);
  EXPECT_EQ(ad::sigmoid(t.scalar(0.0)).item(), 0.5);
}

TEST(Ops, CyclicCorrelationByHand) {
  Tape t;
  auto out = ad::cyclic_correlation(t.constant(Tensor::row_vector({1, 2})), t.constant(Tensor::row_vector({3, 4})));
  EXPECT_EQ(out.value(), Tensor::row_vector({11, 10}));
}

TEST(Ops, CyclicCorrelationMatchesDefinition) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  for (std::size_t d = 1; d <= 16; ++d) {
    std::vector<double> a(d), b(d);
    for (auto& v : a) v = n(rng);
    for (auto& v : b) v = n(rng);
    Tape t;
    auto out = ad::cyclic_correlation(t.constant(Tensor::row_vector(a)), t.constant(Tensor::row_vector(b)));
    auto expect = brute_correlation(a, b);
    for (std::size_t k = 0; k < d; ++k) EXPECT_NEAR(out.value()[k], expect[k], 1e-12);
  }
}

TEST(Ops, CosineSelfSimilarity) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 10; ++i) {
    auto p = random_param("x", 1, 7, rng);
    Tape t;
    auto x = t.constant(p.value);
    EXPECT_NEAR(ad::cosine(x, x).item(), 1.0, 1e-12);
  }
}

TEST(Ops, CosineOfZeroVectorIsFinite) {
  Tape t;
  auto z = t.constant(Tensor(1, 3));
  auto x = t.constant(Tensor::row_vector({1, 2, 3}));
  EXPECT_EQ(ad::cosine(z, x).item(), 0.0);
}

TEST(Ops, SoftmaxRowsNormalised) {
  std::mt19937_64 rng(3);
  auto p = random_param("x", 6, 9, rng, -30, 30);
  Tape t;
  auto s = ad::softmax_rows(t.constant(p.value)).value();
  for (std::size_t r = 0; r < 6; ++r) {
    double sum = 0;
    for (double v : s.row(r)) {
      EXPECT_GT(v, 0.0);
      sum += v;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(Ops, LogsumexpStableForLargeInputs) {
  Tape t;
  auto v = ad::logsumexp(t.constant(Tensor::row_vector({1000.0, 1000.0})));
  EXPECT_NEAR(v.item(), 1000.0 + std::log(2.0), 1e-9);
}

TEST(Ops, ShapeMismatchNamesShapes) {
  Tape t;
  try {
    ad::add(t.constant(Tensor(2, 3)), t.constant(Tensor(3, 2)));
    FAIL();
  } catch (const ShapeError& e) {
    std::string what = e.what();
    EXPECT_NE(what.find("2x3"), std::string::npos);
    EXPECT_NE(what.find("3x2"), std::string::npos);
  }
  EXPECT_THROW(ad::matmul(t.constant(Tensor(2, 3)), t.constant(Tensor(2, 3))), ShapeError);
}

TEST(Ops, NonFiniteOutputThrows) {
  Tape t;
  EXPECT_THROW(ad::log(t.scalar(0.0)), NumericError);
  EXPECT_THROW(ad::exp(t.scalar(1000.0)), NumericError);
  EXPECT_THROW(t.constant(Tensor::row_vector({std::nan("")})), NumericError);
}

TEST(Backward, SumGivesOnes) {
  Parameter x("x", Tensor::row_vector({3, -1, 2}));
  Tape t;
  t.backward(ad::sum(t.leaf(x)));
  EXPECT_EQ(x.grad, Tensor::row_vector({1, 1, 1}));
}

TEST(Backward, DotSelf) {
  Parameter x("x", Tensor::row_vector({1, 2}));
  Tape t;
  auto v = t.leaf(x);
  t.backward(ad::dot(v, v));
  EXPECT_EQ(x.grad, Tensor::row_vector({2, 4}));
}

TEST(Backward, ConstantHasZeroGradient) {
  Parameter x("x", Tensor::row_vector({1, 2}));
  Tape t;
  auto leaf = t.leaf(x);
  auto c = t.scalar(5.0);
  t.backward(ad::add(c, ad::scale(ad::sum(leaf), 0.0)));
  EXPECT_EQ(x.grad, Tensor(1, 2));
}

TEST(Backward, NonScalarRootRejected) {
  Parameter x("x", Tensor::row_vector({1, 2}));
  Tape t;
  EXPECT_THROW(t.backward(t.leaf(x)), ShapeError);
}

TEST(Backward, GatherRowsScatterAdds) {
  Parameter table("E", Tensor(3, 2, 1.0));
  Tape t;
  const std::uint32_t rows[] = {2, 0, 2};
  t.backward(ad::sum(t.gather_rows(table, rows)));
  EXPECT_EQ(table.grad, Tensor(3, 2, std::vector<double>{1, 1, 0, 0, 2, 2}));
}

TEST(Backward, FrozenParametersUntouched) {
  Parameter w("w", Tensor::row_vector({1, 2}));
  Tape t;
  t.backward(ad::sum(t.frozen(w)));
  EXPECT_TRUE(w.grad.empty());
}

TEST(FiniteDifference, LinearIsExact) {
  std::mt19937_64 rng(5);
  auto x = random_param("x", 1, 6, rng);
  auto c = random_param("c", 1, 6, rng);
  Parameter* ps[] = {&x};
  double err = finite_difference_check([&](Tape& t) { return ad::dot(t.leaf(x), t.frozen(c)); }, ps);
  EXPECT_LT(err, 1e-8);
}

class OpGradient : public ::testing::TestWithParam<int> {};

TEST_P(OpGradient, EveryOpPassesCentralDifferences) {
  const auto seed = static_cast<std::uint64_t>(GetParam());
  std::mt19937_64 rng(seed);
  const std::size_t d = 2 + seed % 7;
  using Build = std::function<Var(Tape&, std::vector<Var>&)>;
  struct Case {
    const char* name;
    std::vector<std::pair<std::size_t, std::size_t>> shapes;
    Build build;
    double lo = -1.0, hi = 1.0;
  };
  const std::size_t n = 3;
  std::vector<Case> cases = {
      {"matmul", {{n, d}, {d, 2}}, [](Tape&, std::vector<Var>& v) { return ad::matmul(v[0], v[1]); }},
      {"transpose", {{n, d}}, [](Tape&, std::vector<Var>& v) { return ad::transpose(v[0]); }},
      {"add", {{n, d}, {n, d}}, [](Tape&, std::vector<Var>& v) { return ad::add(v[0], v[1]); }},
      {"sub", {{n, d}, {n, d}}, [](Tape&, std::vector<Var>& v) { return ad::sub(v[0], v[1]); }},
      {"mul", {{n, d}, {n, d}}, [](Tape&, std::vector<Var>& v) { return ad::mul(v[0], v[1]); }},
      {"scale", {{n, d}}, [](Tape&, std::vector<Var>& v) { return ad::scale(v[0], -1.7); }},
      {"affine", {{n, d}}, [](Tape&, std::vector<Var>& v) { return ad::affine(v[0], 0.3, 2.0); }},
      {"row_bcast", {{n, d}, {1, d}}, [](Tape&, std::vector<Var>& v) { return ad::add_row_broadcast(v[0], v[1]); }},
      {"col_bcast", {{n, d}, {n, 1}}, [](Tape&, std::vector<Var>& v) { return ad::add_col_broadcast(v[0], v[1]); }},
      {"elu", {{n, d}}, [](Tape&, std::vector<Var>& v) { return ad::elu(v[0]); }},
      {"sigmoid", {{n, d}}, [](Tape&, std::vector<Var>& v) { return ad::sigmoid(v[0]); }},
      {"log_sigmoid", {{n, d}}, [](Tape&, std::vector<Var>& v) { return ad::log_sigmoid(ad::scale(v[0], 5.0)); }},
      {"log", {{n, d}}, [](Tape&, std::vector<Var>& v) { return ad::log(v[0]); }, 0.5, 2.0},
      {"exp", {{n, d}}, [](Tape&, std::vector<Var>& v) { return ad::exp(v[0]); }},
      {"clamp_min", {{n, d}}, [](Tape&, std::vector<Var>& v) { return ad::clamp_min(v[0], 0.1); }, 0.3, 1.0},
      {"softmax_rows", {{n, d}}, [](Tape&, std::vector<Var>& v) { return ad::softmax_rows(v[0]); }},
      {"sum", {{n, d}}, [](Tape&, std::vector<Var>& v) { return ad::sum(v[0]); }},
      {"mean", {{n, d}}, [](Tape&, std::vector<Var>& v) { return ad::mean(v[0]); }},
      {"mean_of", {{n, d}, {n, d}, {n, d}}, [](Tape&, std::vector<Var>& v) { return ad::mean_of(v); }},
      {"concat_cols", {{n, d}, {n, 2}}, [](Tape&, std::vector<Var>& v) { return ad::concat_cols(v); }},
      {"concat_rows", {{n, d}, {2, d}}, [](Tape&, std::vector<Var>& v) { return ad::concat_rows(v); }},
      {"row", {{n, d}}, [](Tape&, std::vector<Var>& v) { return ad::row(v[0], 1); }},
      {"col", {{n, d}}, [](Tape&, std::vector<Var>& v) { return ad::col(v[0], 1); }},
      {"select_rows", {{n, d}},
       [](Tape&, std::vector<Var>& v) {
         const std::size_t idx[] = {2, 0, 2};
         return ad::select_rows(v[0], idx);
       }},
      {"dot", {{1, d}, {1, d}}, [](Tape&, std::vector<Var>& v) { return ad::dot(v[0], v[1]); }},
      {"cosine", {{1, d}, {1, d}}, [](Tape&, std::vector<Var>& v) { return ad::cosine(v[0], v[1]); }},
      {"cosine_rows", {{1, d}, {n, d}}, [](Tape&, std::vector<Var>& v) { return ad::cosine_rows(v[0], v[1]); }},
      {"cyclic_correlation", {{1, d}, {1, d}},
       [](Tape&, std::vector<Var>& v) { return ad::cyclic_correlation(v[0], v[1]); }},
      {"logsumexp", {{n, d}}, [](Tape&, std::vector<Var>& v) { return ad::logsumexp(v[0]); }},
  };
  for (auto& c : cases) {
    std::vector<Parameter> params;
    for (std::size_t i = 0; i < c.shapes.size(); ++i)
      params.push_back(random_param("p" + std::to_string(i), c.shapes[i].first, c.shapes[i].second, rng, c.lo, c.hi));
    EXPECT_LT(op_check(c.build, params, seed * 31 + 7), 1e-6) << c.name << " d=" << d;
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, OpGradient, ::testing::Range(0, 20));

TEST(Adam, ZeroGradientLeavesParameters) {
  Parameter p("p", Tensor::row_vector({1.0, -2.0}));
  p.zero_grad();
  AdamState s;
  Parameter* ps[] = {&p};
  for (int i = 0; i < 3; ++i) adam_step(ps, s, 0.1);
  EXPECT_EQ(p.value, Tensor::row_vector({1.0, -2.0}));
  EXPECT_EQ(s.step, 3u);
}

TEST(Adam, FirstStepClosedForm) {
  Parameter p("p", Tensor::scalar(0.5));
  p.grad = Tensor::scalar(1.0);
  AdamState s;
  Parameter* ps[] = {&p};
  adam_step(ps, s, 0.1);
  // m_hat = 1, v_hat = 1 -> delta = -lr / (1 + eps).
  EXPECT_NEAR(p.value[0] - 0.5, -0.1, 1e-6);
  EXPECT_NEAR(p.value[0] - 0.5, -0.1 / (1.0 + 1e-8), 1e-15);
}

TEST(Adam, MatchesReferenceOverSeveralSteps) {
  Parameter p("p", Tensor::row_vector({0.2, -0.4}));
  AdamState s;
  Parameter* ps[] = {&p};
  double m[2] = {0, 0}, v[2] = {0, 0}, x[2] = {0.2, -0.4};
  const double grads[3][2] = {{0.5, -1.0}, {0.1, 0.3}, {-2.0, 0.0}};
  for (int step = 1; step <= 3; ++step) {
    p.grad = Tensor::row_vector({grads[step - 1][0], grads[step - 1][1]});
    adam_step(ps, s, 0.01);
    for (int i = 0; i < 2; ++i) {
      const double g = grads[step - 1][i];
      m[i] = 0.9 * m[i] + 0.1 * g;
      v[i] = 0.999 * v[i] + 0.001 * g * g;
      const double mh = m[i] / (1 - std::pow(0.9, step));
      const double vh = v[i] / (1 - std::pow(0.999, step));
      x[i] -= 0.01 * mh / (std::sqrt(vh) + 1e-8);
      EXPECT_NEAR(p.value[i], x[i], 1e-14);
    }
  }
}

TEST(Adam, IdenticalParametersUpdateIdentically) {
  Parameter a("a", Tensor::row_vector({1, 2, 3}));
  Parameter b("b", Tensor::row_vector({1, 2, 3}));
  a.grad = b.grad = Tensor::row_vector({0.3, -0.2, 0.9});
  AdamState s;
  Parameter* ps[] = {&a, &b};
  adam_step(ps, s, 0.05);
  EXPECT_EQ(a.value, b.value);
}

TEST(Adam, ShapeMismatchThrows) {
  Parameter a("a", Tensor::row_vector({1, 2}));
  a.zero_grad();
  AdamState s;
  Parameter* ps[] = {&a};
  adam_step(ps, s, 0.1);
  Parameter b("b", Tensor::row_vector({1, 2, 3}));
  b.zero_grad();
  Parameter* qs[] = {&b};
  EXPECT_THROW(adam_step(qs, s, 0.1), ShapeError);
  a.grad = Tensor(2, 2);
  EXPECT_THROW(adam_step(ps, s, 0.1), ShapeError);
}
