// Copyright (C) 2026 the icle authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may not use this file except in compliance
// with the License. You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software distributed under the License
// is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express
// or implied. See the License for the specific language governing permissions and limitations under the License.

// Equivalence tests: the active SIMD kernel set must agree with the scalar
// reference within reassociation tolerance on randomized inputs, including
// non-multiple-of-lane-width tails.

#include <cmath>
#include <vector>

#include "doctest.h"
#include "icle/kernels/kernels.hpp"
#include "icle/rng.hpp"

using icle::SeededRng;
namespace kn = icle::kernels;

namespace {

std::vector<float> random_vec(SeededRng& rng, size_t n) {
  std::vector<float> v(n);
  for (auto& x : v) x = static_cast<float>(rng.next_normal());
  return v;
}

void expect_close(const std::vector<float>& a, const std::vector<float>& b, double tol) {
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    const double denom = std::max(1.0, std::abs(static_cast<double>(b[i])));
    CHECK(std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i])) / denom < tol);
  }
}

}  // namespace

TEST_CASE("active kernel set reports a variant") {
  CHECK((kn::active_name() == "scalar" || kn::active_name() == "avx2" || kn::active_name() == "neon"));
}

TEST_CASE("gemm variants match scalar reference") {
  SeededRng rng(11);
  const auto& act = kn::f32();
  const auto& ref = kn::scalar_f32();
  // deliberately awkward sizes to cover vector tails
  for (auto [m, k, n] : {std::tuple<size_t, size_t, size_t>{7, 13, 9},
                         {16, 64, 24},
                         {1, 5, 1},
                         {3, 8, 33}}) {
    auto a = random_vec(rng, m * k);
    auto bnn = random_vec(rng, k * n);
    std::vector<float> c1(m * n, 0.0f), c2(m * n, 0.0f);
    act.gemm_nn(a.data(), bnn.data(), c1.data(), m, k, n);
    ref.gemm_nn(a.data(), bnn.data(), c2.data(), m, k, n);
    expect_close(c1, c2, 1e-4);

    auto bnt = random_vec(rng, n * k);
    std::fill(c1.begin(), c1.end(), 0.0f);
    std::fill(c2.begin(), c2.end(), 0.0f);
    act.gemm_nt(a.data(), bnt.data(), c1.data(), m, k, n);
    ref.gemm_nt(a.data(), bnt.data(), c2.data(), m, k, n);
    expect_close(c1, c2, 1e-4);

    auto btn = random_vec(rng, m * n);
    std::vector<float> d1(k * n, 0.0f), d2(k * n, 0.0f);
    act.gemm_tn(a.data(), btn.data(), d1.data(), m, k, n);
    ref.gemm_tn(a.data(), btn.data(), d2.data(), m, k, n);
    expect_close(d1, d2, 1e-4);
  }
}

TEST_CASE("gemm accumulates into the output") {
  const auto& act = kn::f32();
  std::vector<float> a{1.0f, 2.0f}, b{3.0f, 4.0f};
  std::vector<float> c{10.0f};
  act.gemm_nn(a.data(), b.data(), c.data(), 1, 2, 1);  // b interpreted as [2,1]
  CHECK(c[0] == doctest::Approx(10.0f + 11.0f));
}

TEST_CASE("vector kernels match scalar reference") {
  SeededRng rng(23);
  const auto& act = kn::f32();
  const auto& ref = kn::scalar_f32();
  for (size_t n : {1u, 3u, 8u, 17u, 256u, 1000u}) {
    auto x = random_vec(rng, n);
    auto y = random_vec(rng, n);

    CHECK(std::abs(act.dot(x.data(), y.data(), n) - ref.dot(x.data(), y.data(), n)) /
              std::max(1.0f, std::abs(ref.dot(x.data(), y.data(), n))) <
          1e-4);
    CHECK(act.reduce_max(x.data(), n) == ref.reduce_max(x.data(), n));
    CHECK(std::abs(act.reduce_sum(x.data(), n) - ref.reduce_sum(x.data(), n)) < 1e-3);

    auto y1 = y, y2 = y;
    act.axpy(0.37f, x.data(), y1.data(), n);
    ref.axpy(0.37f, x.data(), y2.data(), n);
    expect_close(y1, y2, 1e-5);

    auto x1 = x, x2 = x;
    act.scale(x1.data(), -1.25f, n);
    ref.scale(x2.data(), -1.25f, n);
    expect_close(x1, x2, 1e-6);

    std::vector<float> o1(n), o2(n);
    act.vadd(x.data(), y.data(), o1.data(), n);
    ref.vadd(x.data(), y.data(), o2.data(), n);
    expect_close(o1, o2, 1e-6);
  }
}

TEST_CASE("softmax_row matches reference and normalizes") {
  SeededRng rng(5);
  const auto& act = kn::f32();
  const auto& ref = kn::scalar_f32();
  for (size_t n : {1u, 2u, 9u, 64u, 100u}) {
    auto x = random_vec(rng, n);
    for (auto& v : x) v *= 10.0f;
    auto x1 = x, x2 = x;
    act.softmax_row(x1.data(), n);
    ref.softmax_row(x2.data(), n);
    expect_close(x1, x2, 1e-5);
    CHECK(act.reduce_sum(x1.data(), n) == doctest::Approx(1.0f).epsilon(1e-5));
  }
}

TEST_CASE("softmax_row survives large magnitudes via max shift") {
  const auto& act = kn::f32();
  std::vector<float> x{1000.0f, 1000.0f};
  act.softmax_row(x.data(), 2);
  CHECK(x[0] == doctest::Approx(0.5f));
  CHECK(x[1] == doctest::Approx(0.5f));
}

TEST_CASE("rmsnorm_row matches reference") {
  SeededRng rng(7);
  const auto& act = kn::f32();
  const auto& ref = kn::scalar_f32();
  for (size_t n : {2u, 8u, 31u, 64u}) {
    auto x = random_vec(rng, n);
    auto g = random_vec(rng, n);
    std::vector<float> o1(n), o2(n);
    act.rmsnorm_row(x.data(), g.data(), 1e-6f, o1.data(), n);
    ref.rmsnorm_row(x.data(), g.data(), 1e-6f, o2.data(), n);
    expect_close(o1, o2, 1e-5);
  }
}

TEST_CASE("float64 table matches float64 scalar reference") {
  SeededRng rng(3);
  const auto& act = kn::f64();
  const auto& ref = kn::scalar_f64();
  const size_t m = 5, k = 11, n = 7;
  std::vector<double> a(m * k), b(k * n);
  for (auto& v : a) v = rng.next_normal();
  for (auto& v : b) v = rng.next_normal();
  std::vector<double> c1(m * n, 0.0), c2(m * n, 0.0);
  act.gemm_nn(a.data(), b.data(), c1.data(), m, k, n);
  ref.gemm_nn(a.data(), b.data(), c2.data(), m, k, n);
  for (size_t i = 0; i < c1.size(); ++i) CHECK(c1[i] == doctest::Approx(c2[i]).epsilon(1e-12));
}
