#include <doctest.h>

#include <random>

#include "nmembrane/error.hpp"
#include "nmembrane/projection.hpp"

using namespace nmembrane;

namespace {
void check_close(const std::vector<double>& a, std::initializer_list<double> b) {
  REQUIRE(a.size() == b.size());
  std::size_t i = 0;
  for (double v : b) CHECK(a[i++] == doctest::Approx(v).epsilon(1e-14));
}
}  // namespace

TEST_CASE("hand-computed projections") {
  check_close(isotonic_project(std::vector<double>{1.0, 3.0}, std::vector<double>{1.0, 1.0}), {2.0, 2.0});
  check_close(isotonic_project(std::vector<double>{0.0, 3.0}, std::vector<double>{2.0, 1.0}), {1.0, 1.0});
  check_close(isotonic_project(std::vector<double>{3.0, 1.0, 2.0}, std::vector<double>{1.0, 1.0, 1.0}), {3.0, 1.5, 1.5});
  check_close(isotonic_project(std::vector<double>{0.0, 1.0, 2.0}, std::vector<double>{1.0, 2.0, 1.0}), {1.0, 1.0, 1.0});
  check_close(isotonic_project(std::vector<double>{5.0, 4.0, -1.0}, std::vector<double>{1.0, 7.0, 3.0}), {5.0, 4.0, -1.0});
}

TEST_CASE("PAVA agrees with the exhaustive oracle") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> uw(0.2, 4.0);
  for (std::size_t n = 1; n <= 9; ++n)
    for (int t = 0; t < 200; ++t) {
      std::vector<double> v(n), w(n);
      for (std::size_t k = 0; k < n; ++k) {
        v[k] = nd(rng);
        w[k] = uw(rng);
      }
      const auto a = isotonic_project(v, w);
      const auto b = qp_oracle_project(v, w);
      for (std::size_t k = 0; k < n; ++k) CHECK(std::abs(a[k] - b[k]) <= 1e-12);
    }
}

TEST_CASE("projection properties") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  const std::vector<double> w{1.0, 0.5, 2.0, 1.5};
  IsotonicProjector proj(4);
  for (int t = 0; t < 500; ++t) {
    std::vector<double> v(4), d(4);
    for (std::size_t k = 0; k < 4; ++k) {
      v[k] = nd(rng);
      d[k] = std::abs(nd(rng));
    }
    std::vector<double> p(4), q(4), vd(4);
    proj.project(v, w, p);
    for (std::size_t k = 0; k < 4; ++k) vd[k] = v[k] + d[k];
    proj.project(vd, w, q);
    double ws_v = 0.0, ws_p = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
      ws_v += w[k] * v[k];
      ws_p += w[k] * p[k];
      CHECK(q[k] >= p[k] - 1e-12);  // monotone
      if (k + 1 < 4) CHECK(p[k] >= p[k + 1]);
    }
    CHECK(ws_p == doctest::Approx(ws_v).epsilon(1e-12));  // weighted mean preserved
    std::vector<double> pp(4);
    proj.project(p, w, pp);
    for (std::size_t k = 0; k < 4; ++k) CHECK(pp[k] == doctest::Approx(p[k]).epsilon(1e-14));  // idempotent
  }
}

TEST_CASE("projector output may alias input") {
  std::vector<double> v{1.0, 2.0, 3.0};
  const std::vector<double> w{1.0, 1.0, 1.0};
  IsotonicProjector proj;
  proj.project(v, w, v);
  CHECK(v[0] == doctest::Approx(2.0));
  CHECK(v[2] == doctest::Approx(2.0));
}

TEST_CASE("input checks") {
  CHECK_THROWS_AS(isotonic_project(std::vector<double>{1.0, 2.0}, std::vector<double>{1.0, -1.0}), Error);
  try {
    qp_oracle_project(std::vector<double>(13, 0.0), std::vector<double>(13, 1.0));
    FAIL("oracle accepted N = 13");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TooLarge);
  }
}
