#include <cmath>

#include "doctest.h"
#include "tfp/randgen.hpp"

using namespace tfp;

TEST_CASE("orbit sizes and class variances") {
  CHECK(orbit_size({0, 0}) == 1);
  CHECK(orbit_size({0, 1}) == 2);
  CHECK(orbit_size({0, 0, 1}) == 3);
  CHECK(orbit_size({2, 0, 1}) == 6);
  CHECK(orbit_size({1, 1, 0, 0}) == 6);
  CHECK(class_variance({0, 0}) == 2.0);
  CHECK(class_variance({0, 1}) == 1.0);
  CHECK(class_variance({0, 0, 1}) == 1.0);
  CHECK(class_variance({0, 1, 2}) == 0.5);
  CHECK(class_variance({0, 0, 0}) == 3.0);
  // product-of-factorials form: prod c_j! / (p-1)!
  CHECK(class_variance({1, 1, 0, 0}) == doctest::Approx(4.0 / 6.0));
  CHECK(class_variance({0, 1, 2}, VarianceNorm::unit_melon) == 1.0);
  CHECK(class_variance({0, 0}, VarianceNorm::unit_melon) == 2.0);
}

TEST_CASE("seed streams") {
  SeedStream s(42);
  CHECK(s.derive("a", 0) == SeedStream(42).derive("a", 0));
  CHECK(s.derive("a", 0) != s.derive("a", 1));
  CHECK(s.derive("a", 0) != s.derive("b", 0));
  CHECK(s.derive("a", 0) != SeedStream(43).derive("a", 0));
  // neighbouring streams are uncorrelated
  const int n = 20000;
  double sxy = 0, sx = 0, sy = 0, sxx = 0, syy = 0;
  for (int i = 0; i < n; ++i) {
    auto e1 = s.engine("x", i), e2 = s.engine("x", i + 1);
    double x = std::normal_distribution<double>()(e1), y = std::normal_distribution<double>()(e2);
    sx += x, sy += y, sxy += x * y, sxx += x * x, syy += y * y;
  }
  double c = (sxy / n - sx / n * sy / n) / std::sqrt((sxx / n - sx * sx / n / n) * (syy / n - sy * sy / n / n));
  CHECK(std::abs(c) < 4.0 / std::sqrt(n));
}

TEST_CASE("symmetric tensors are orbit constant and reproducible") {
  EnsembleSpec spec{3, 3, EntryLaw::gaussian, 7};
  auto a = sample_symmetric_tensor(spec), b = sample_symmetric_tensor(spec);
  CHECK(a.data() == b.data());
  spec.seed = 8;
  CHECK(sample_symmetric_tensor(spec).data() != a.data());
  CHECK(a.at({0, 0, 1}) == a.at({0, 1, 0}));
  CHECK(a.at({0, 0, 1}) == a.at({1, 0, 0}));
  CHECK(a.at({0, 1, 2}) == a.at({2, 1, 0}));
  CHECK(a.at({0, 1, 2}) == a.at({1, 2, 0}));
  CHECK(a.at({0, 0, 1}) != a.at({0, 1, 1}));
  for (auto law : {EntryLaw::rademacher, EntryLaw::uniform}) {
    EnsembleSpec s2{4, 2, law, 1};
    auto t = sample_symmetric_tensor(s2);
    CHECK(t.at({0, 1, 1, 0}) == t.at({1, 0, 0, 1}));
  }
  // rademacher magnitudes are exactly the class standard deviations
  auto rng = SeedStream(3).engine("t", 0);
  auto x = sample_symmetric_raw(3, 2, EntryLaw::rademacher, VarianceNorm::paper, rng);
  CHECK(x.at({0, 0, 0}) * x.at({0, 0, 0}) == doctest::Approx(3.0));
  CHECK(x.at({0, 0, 1}) * x.at({0, 0, 1}) == doctest::Approx(1.0));
  CHECK_THROWS(parse_law("cauchy"));
}

TEST_CASE("class variances of the ensemble") {
  const int n = 100000;
  SeedStream root(11);
  for (auto law : {EntryLaw::gaussian, EntryLaw::uniform}) {
    double d = 0, d4 = 0, o = 0, o4 = 0, c3 = 0, c34 = 0;
    for (int s = 0; s < n; ++s) {
      auto rng = root.engine(law_name(law), s);
      auto x2 = sample_symmetric_raw(2, 3, law, VarianceNorm::paper, rng);
      double a = x2.at({1, 1}), b = x2.at({0, 2});
      d += a * a, d4 += a * a * a * a, o += b * b, o4 += b * b * b * b;
      auto x3 = sample_symmetric_raw(3, 2, law, VarianceNorm::paper, rng);
      double c = x3.at({0, 0, 1});
      c3 += c * c, c34 += c * c * c * c;
    }
    auto within = [&](double s, double s4, double target) {
      double m = s / n, var = s4 / n - m * m;
      return std::abs(m - target) < 5 * std::sqrt(var / n);
    };
    CHECK(within(d, d4, 2.0));
    CHECK(within(o, o4, 1.0));
    CHECK(within(c3, c34, 1.0));
  }
}

TEST_CASE("Haar orthogonal matrices") {
  SeedStream root(5);
  for (int s = 0; s < 100; ++s) {
    auto rng = root.engine("haar", s);
    auto U = sample_haar_orthogonal(16, rng);
    double err = 0;
    for (int i = 0; i < 16; ++i)
      for (int j = 0; j < 16; ++j) {
        double g = 0;
        for (int k = 0; k < 16; ++k) g += U.at({k, i}) * U.at({k, j});
        err = std::max(err, std::abs(g - (i == j)));
      }
    CHECK(err < 1e-12);
  }
  const int N = 8, n = 100000;
  double m2 = 0, m4 = 0, e4 = 0, e8 = 0;
  for (int s = 0; s < n; ++s) {
    auto rng = root.engine("moment", s);
    auto U = sample_haar_orthogonal(N, rng);
    double u = U[0] * U[0];
    m2 += u, m4 += u * u;
    // first column is uniform on the sphere: E[u1^2 u2^2] = 1/(N(N+2))
    double w = U.at({0, 3}) * U.at({0, 3}) * U.at({1, 3}) * U.at({1, 3});
    e4 += w, e8 += w * w;
  }
  double mean = m2 / n, se = std::sqrt((m4 / n - mean * mean) / n);
  CHECK(std::abs(mean - 1.0 / N) < 4 * se);
  double mw = e4 / n, sw = std::sqrt((e8 / n - mw * mw) / n);
  CHECK(std::abs(mw - 1.0 / (N * (N + 2))) < 4 * sw);
}

TEST_CASE("deterministic families") {
  auto I = make_deterministic_family(FamilyKind::identity, 2, 4);
  CHECK(I.data() == identity_matrix(4).data());
  auto d = make_deterministic_family(FamilyKind::diagonal, 3, 2);
  CHECK(d.at({0, 0, 0}) == 1);
  CHECK(d.at({1, 1, 1}) == 1);
  double s = 0;
  for (double v : d.data()) s += v;
  CHECK(s == 2);
  auto r = make_deterministic_family(FamilyKind::rank_one, 1, 9);
  CHECK(r[0] == 3.0);
  CHECK(make_deterministic_family(FamilyKind::rank_one, 3, 2).at({0, 0, 0}) == 1);
  CHECK_THROWS_AS(make_deterministic_family(FamilyKind::identity, 3, 2), ShapeError);
  for (int N : {1, 2, 5, 9}) {
    auto In = make_deterministic_family(FamilyKind::identity, 2, N);
    CHECK(eval_closed(ColoredMap(bouquet(2)), VertexTensors{&In}) == 1.0);
  }
}
