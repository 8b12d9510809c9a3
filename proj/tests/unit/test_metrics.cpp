#include <doctest.h>

#include <cmath>

#include "featprop/metrics.hpp"
#include "featprop/random.hpp"

using namespace featprop;

TEST_CASE("perfect prediction") {
  const LabelVector y({0, 1, 2, 1, 0}, 3);
  const std::vector<int> pred = y.values();
  CHECK(macro_f1(pred, y) == 1.0);
  CHECK(micro_f1(pred, y) == 1.0);
  CHECK(accuracy(pred, y) == 1.0);
}

TEST_CASE("predicting one class everywhere") {
  // truth A,A,B,B predicted A,A,A,A: F1(A) = 2/3, F1(B) = 0.
  const LabelVector y({0, 0, 1, 1}, 2);
  const std::vector<int> pred{0, 0, 0, 0};
  CHECK(macro_f1(pred, y) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(accuracy(pred, y) == 0.5);
  CHECK(micro_f1(pred, y) == 0.5);
}

TEST_CASE("a class absent from truth and prediction scores zero") {
  const LabelVector y({0, 0, 1}, 3);
  const std::vector<int> pred{0, 0, 1};
  CHECK(macro_f1(pred, y) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("micro F1 equals accuracy") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const int c = 2 + static_cast<int>(rng.below(6));
    std::vector<int> truth(40), pred(40);
    for (int i = 0; i < 40; ++i) {
      truth[i] = static_cast<int>(rng.below(c));
      pred[i] = static_cast<int>(rng.below(c));
    }
    const LabelVector y(truth, c);
    CHECK(std::abs(micro_f1(pred, y) - accuracy(pred, y)) < 1e-12);
    const double m = macro_f1(pred, y);
    CHECK(m >= 0.0);
    CHECK(m <= 1.0);
  }
}

TEST_CASE("metric input validation") {
  const LabelVector y({0, 1}, 2);
  CHECK_THROWS_AS(macro_f1(std::vector<int>{0}, y), DimensionError);
  CHECK_THROWS_AS(accuracy(std::vector<int>{}, LabelVector({}, 2)), DimensionError);
}

TEST_CASE("entropy") {
  CHECK(entropy(std::vector<double>{1.0, 0.0}) == 0.0);
  CHECK(entropy(std::vector<double>{0.25, 0.25, 0.25, 0.25}) == doctest::Approx(std::log(4.0)));
}
