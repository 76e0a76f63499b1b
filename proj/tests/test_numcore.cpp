#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "stage/num/errors.hpp"
#include "stage/num/grad_check.hpp"
#include "stage/num/layers.hpp"
#include "stage/num/matrix.hpp"
#include "stage/num/ops.hpp"
#include "stage/num/param_store.hpp"
#include "stage/num/rng.hpp"

using namespace stage;

TEST_CASE("dense matrix basics") {
  auto m = num::DenseMatrix::from_rows({{1.0, 2.0}, {3.0, 4.0}});
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 2);
  CHECK(m(1, 0) == 3.0);

  auto i = num::DenseMatrix::identity(2);
  CHECK(m.matmul(i) == m);
  CHECK(i.matmul(m) == m);

  auto mt = m.transposed();
  CHECK(mt(0, 1) == 3.0);

  auto p = m.matmul(m);
  CHECK(p(0, 0) == doctest::Approx(7.0));
  CHECK(p(0, 1) == doctest::Approx(10.0));
  CHECK(p(1, 0) == doctest::Approx(15.0));
  CHECK(p(1, 1) == doctest::Approx(22.0));

  // matmul_transposed(b) = a * b^T
  auto q = m.matmul_transposed(m);
  auto q_ref = m.matmul(mt);
  CHECK(q == q_ref);

  CHECK_THROWS_AS(m.matmul(num::DenseMatrix(3, 2)), std::invalid_argument);
  CHECK(m.all_finite());
}

TEST_CASE("softmax rows matches hand-computed values") {
  auto logits = num::DenseMatrix::from_rows({{1.0, 0.0}});
  auto p = num::softmax_rows(logits, 1.0);
  CHECK(p(0, 0) == doctest::Approx(0.731059).epsilon(1e-5));
  CHECK(p(0, 1) == doctest::Approx(0.268941).epsilon(1e-5));
}

TEST_CASE("softmax equal logits are uniform at any temperature") {
  for (double c : {-3.0, 0.0, 41.5}) {
    for (double tau : {1e-3, 1.0, 1e6}) {
      auto p = num::softmax_rows(num::DenseMatrix::from_rows({{c, c, c}}), tau);
      for (int i = 0; i < 3; ++i) {
        CHECK(p(0, i) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("softmax infinite-temperature limit is uniform") {
  auto p = num::softmax_rows(num::DenseMatrix::from_rows({{1.0, 0.0}}), 1e6);
  CHECK(std::abs(p(0, 0) - 0.5) < 1e-6);
  CHECK(std::abs(p(0, 1) - 0.5) < 1e-6);
}

TEST_CASE("softmax rejects bad inputs") {
  auto logits = num::DenseMatrix::from_rows({{1.0, 0.0}});
  CHECK_THROWS_AS(num::softmax_rows(logits, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(num::softmax_rows(logits, -1.0), std::invalid_argument);
  // Non-finite data is divergence, not a malformed call.
  auto bad = num::DenseMatrix::from_rows({{std::nan(""), 0.0}});
  CHECK_THROWS_AS(num::softmax_rows(bad, 1.0), num::NonFiniteError);
}

TEST_CASE("softmax simplex property under fuzzing") {
  num::Rng rng(num::derive_seed(7, "softmax_fuzz"));
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t cols = 2 + rng.uniform_int(6);
    num::DenseMatrix logits(3, cols);
    for (double& x : logits.values()) x = 40.0 * (rng.uniform() - 0.5);
    const double tau = std::exp(
        std::log(1e-3) + rng.uniform() * (std::log(1e6) - std::log(1e-3)));
    auto p = num::softmax_rows(logits, tau);
    for (std::size_t r = 0; r < p.rows(); ++r) {
      double sum = 0.0;
      for (std::size_t c = 0; c < cols; ++c) {
        CHECK(p(r, c) >= 0.0);
        sum += p(r, c);
      }
      CHECK(std::abs(sum - 1.0) <= 1e-9);
    }
  }
}

TEST_CASE("softmax max probability strictly decreases with temperature") {
  auto logits = num::DenseMatrix::from_rows({{0.7, -0.4}});
  double prev = 1.1;  // above any probability
  for (double tau : {0.01, 0.1, 0.5, 1.0, 5.0, 50.0, 1e3}) {
    auto p = num::softmax_rows(logits, tau);
    const double mx = std::max(p(0, 0), p(0, 1));
    CHECK(mx < prev);
    prev = mx;
  }
}

TEST_CASE("cosine similarity examples") {
  std::vector<double> a{3.0, 4.0};
  CHECK(num::cosine_similarity(a, a) == doctest::Approx(1.0));
  std::vector<double> e1{1.0, 0.0};
  std::vector<double> e2{0.0, 1.0};
  CHECK(num::cosine_similarity(e1, e2) == doctest::Approx(0.0));
  std::vector<double> d{1.0, 1.0};
  CHECK(num::cosine_similarity(d, e1) == doctest::Approx(0.707107).epsilon(1e-5));

  // symmetry and positive-scale invariance
  std::vector<double> b{-2.0, 5.0};
  CHECK(num::cosine_similarity(a, b) == doctest::Approx(num::cosine_similarity(b, a)));
  std::vector<double> a3{9.0, 12.0};
  CHECK(num::cosine_similarity(a3, b) ==
        doctest::Approx(num::cosine_similarity(a, b)));

  std::vector<double> zero{0.0, 0.0};
  CHECK_THROWS_AS(num::cosine_similarity(zero, a), num::DegenerateInputError);
}

TEST_CASE("finite differences on closed-form functions") {
  auto square = [](std::span<const double> x) { return x[0] * x[0]; };
  std::vector<double> at{3.0};
  auto g = num::finite_diff_grad(square, at, 1e-4);
  CHECK(std::abs(g[0] - 6.0) <= 1e-6);

  auto constant = [](std::span<const double>) { return 41.5; };
  std::vector<double> at2{1.0, -2.0, 0.5};
  auto g2 = num::finite_diff_grad(constant, at2, 1e-4);
  for (double v : g2) CHECK(v == doctest::Approx(0.0));
}

TEST_CASE("finite differences agree with the analytic softmax jacobian") {
  // f(x) = softmax([x, 0]) first entry; f'(x) = p(1-p).
  auto f = [](std::span<const double> x) {
    auto p = num::softmax_rows(num::DenseMatrix::from_rows({{x[0], 0.0}}), 1.0);
    return p(0, 0);
  };
  std::vector<double> at{1.0};
  auto g = num::finite_diff_grad(f, at, 1e-5);
  const double p = 0.7310585786300049;
  CHECK(std::abs(g[0] - p * (1.0 - p)) < 1e-6);
}

TEST_CASE("grad_check linear layer") {
  num::ParamStore params;
  num::Rng rng(num::derive_seed(0, "grad_linear"));
  num::linear_init(params, "lin", 4, 3, rng);
  num::DenseMatrix input(2, 4);
  for (double& x : input.values()) x = rng.normal();

  auto loss = [](const num::ParamStore& p, const num::DenseMatrix& x) {
    return num::linear_forward(p, "lin", x).frobenius_sq();
  };
  auto backward = [](num::ParamStore& p, const num::DenseMatrix& x) {
    p.zero_grads();
    auto y = num::linear_forward(p, "lin", x);
    num::DenseMatrix dy = y;
    dy.scale(2.0);
    return num::linear_backward(p, "lin", x, dy);
  };
  CHECK(num::grad_check(params, input, loss, backward) < 1e-6);
}

TEST_CASE("grad_check identity layer is exact") {
  num::ParamStore params;  // no parameters
  num::DenseMatrix input = num::DenseMatrix::from_rows({{0.3, -1.2, 4.0}});
  auto loss = [](const num::ParamStore&, const num::DenseMatrix& x) {
    double s = 0.0;
    for (double v : x.values()) s += v;
    return s;
  };
  auto backward = [](num::ParamStore& p, const num::DenseMatrix& x) {
    p.zero_grads();
    return num::DenseMatrix(x.rows(), x.cols(), 1.0);
  };
  CHECK(num::grad_check(params, input, loss, backward) == doctest::Approx(0.0));
}

TEST_CASE("grad_check softmax cross-entropy head") {
  num::Rng rng(num::derive_seed(1, "grad_xent"));
  num::ParamStore params;
  num::DenseMatrix logits(3, 4);
  for (double& x : logits.values()) x = rng.normal();
  const std::vector<std::uint32_t> labels{2, 0, 3};

  auto loss = [&](const num::ParamStore&, const num::DenseMatrix& x) {
    return num::softmax_cross_entropy(x, labels).loss;
  };
  auto backward = [&](num::ParamStore& p, const num::DenseMatrix& x) {
    p.zero_grads();
    return num::softmax_cross_entropy(x, labels).dlogits;
  };
  CHECK(num::grad_check(params, logits, loss, backward) < 1e-5);
}

TEST_CASE("param store contracts") {
  num::ParamStore params;
  params.create("b.second", 1, 2);
  params.create("a.first", 2, 2);
  CHECK_THROWS_AS(params.create("a.first", 2, 2), std::invalid_argument);
  CHECK(params.entry_count() == 2);
  CHECK(params.total_params() == 6);
  CHECK_THROWS_AS(params.value("missing"), std::out_of_range);

  // lexicographic iteration
  std::vector<std::string> names;
  for (const auto& [name, entry] : params) names.push_back(name);
  CHECK(names == std::vector<std::string>{"a.first", "b.second"});

  params.value("a.first")(0, 0) = 1.0;
  params.grad("a.first")(0, 0) = 0.5;
  params.sgd_step(0.1);
  CHECK(params.value("a.first")(0, 0) == doctest::Approx(0.95));
  params.zero_grads();
  CHECK(params.grad("a.first")(0, 0) == 0.0);
}

TEST_CASE("rng determinism and stream separation") {
  num::Rng a(num::derive_seed(42, "stream"));
  num::Rng b(num::derive_seed(42, "stream"));
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  CHECK(num::derive_seed(42, "stream") != num::derive_seed(42, "other"));
  CHECK(num::derive_seed(42, "stream", 1) != num::derive_seed(42, "stream", 2));
  CHECK(num::derive_seed(42, "stream", 1, 2) !=
        num::derive_seed(42, "stream", 2, 1));

  // normal() has roughly standard moments
  num::Rng c(num::derive_seed(7, "normal"));
  double sum = 0.0;
  double sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double x = c.normal();
    sum += x;
    sq += x * x;
  }
  CHECK(std::abs(sum / n) < 0.03);
  CHECK(std::abs(sq / n - 1.0) < 0.05);

  // uniform_int covers [0, n) without bias at small n
  num::Rng d(num::derive_seed(9, "uniform_int"));
  std::vector<int> hist(5, 0);
  for (int i = 0; i < 5000; ++i) ++hist[d.uniform_int(5)];
  for (int count : hist) CHECK(count > 800);
}

TEST_CASE("guarded log floors near-zero probabilities") {
  CHECK(num::guarded_log(0.0) == doctest::Approx(std::log(1e-12)));
  CHECK(num::guarded_log(0.5) == doctest::Approx(std::log(0.5)));
}
