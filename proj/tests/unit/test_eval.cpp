#include <doctest.h>

#include "bage/eval.hpp"
#include "../support/helpers.hpp"

using namespace bage;
using bage::testing::error_kind;

TEST_CASE("accuracy and top-1 error") {
  const std::vector<int> t{0, 1, 2, 3};
  CHECK(accuracy(t, t) == 1.0);
  CHECK(top1_error(t, t) == 0.0);
  const std::vector<int> half{0, 1, 5, 5};
  CHECK(accuracy(half, t) == 0.5);
  CHECK(top1_error(half, t) == 0.5);
  CHECK(error_kind([] { accuracy(std::vector<int>{}, std::vector<int>{}); }) == ErrorKind::EmptyInput);
  CHECK(error_kind([&] { accuracy(std::vector<int>{1}, t); }) == ErrorKind::LengthMismatch);
}

TEST_CASE("confusion matrix") {
  const std::vector<int> t{0, 1, 2, 3, 4, 5};
  const auto perfect = confusion_matrix(t, t);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) CHECK(perfect.at(i, j) == (i == j ? 1 : 0));

  const auto single = confusion_matrix(std::vector<int>{1}, std::vector<int>{0});
  CHECK(single.at(0, 1) == 1);
  CHECK(single.total() == 1);
  CHECK(single.above_diagonal_fraction() == 1.0);
  CHECK(error_kind([] { confusion_matrix(std::vector<int>{1, 2}, std::vector<int>{0}); }) == ErrorKind::LengthMismatch);
  CHECK(error_kind([] { confusion_matrix(std::vector<int>{7}, std::vector<int>{0}); }) == ErrorKind::OutOfRange);

  const auto csv = single.to_csv({"1960s", "1970s", "1980s", "1990s", "2000s", "2010s"});
  CHECK(csv.rfind("true\\predicted,1960s,1970s", 0) == 0);
  CHECK(csv.find("\n1960s,0,1,0,0,0,0\n") != std::string::npos);
}

TEST_CASE("accuracy equals trace over total") {
  std::mt19937_64 rng(71);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 50;
    std::vector<int> p(n), t(n);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = static_cast<int>(rng() % 6);
      t[i] = static_cast<int>(rng() % 6);
    }
    const auto cm = confusion_matrix(p, t);
    CHECK(cm.total() == static_cast<long>(n));
    CHECK(accuracy(p, t) == static_cast<double>(cm.trace()) / static_cast<double>(cm.total()));
    const auto rows = cm.row_sums();
    for (int c = 0; c < 6; ++c) CHECK(rows[static_cast<std::size_t>(c)] == std::count(t.begin(), t.end(), c));
    CHECK(zero_rule_baseline(t) >= 1.0 / 6.0);
  }
}

TEST_CASE("zero-rule baseline") {
  CHECK(zero_rule_baseline(std::vector<int>{0, 1, 2, 3, 4, 5}) == doctest::Approx(1.0 / 6.0));
  CHECK(zero_rule_baseline(std::vector<int>{3, 3, 3}) == 1.0);
  // validation class sizes of the reference dataset
  std::vector<int> validation;
  const int counts[6] = {84, 153, 205, 207, 201, 80};
  for (int c = 0; c < 6; ++c) validation.insert(validation.end(), static_cast<std::size_t>(counts[c]), c);
  CHECK(validation.size() == 930);
  CHECK(zero_rule_baseline(validation) == doctest::Approx(207.0 / 930.0));
  CHECK(zero_rule_baseline(validation) == doctest::Approx(0.2226).epsilon(1e-3));
  CHECK(error_kind([] { zero_rule_baseline(std::vector<int>{}); }) == ErrorKind::EmptyInput);
}

TEST_CASE("confident and uncertain patch rankings") {
  const std::vector<PatchRecord> records{
      {"a", 0, {0.99, 0.01, 0, 0, 0, 0}},
      {"b", 1, {0.2, 0.7, 0.1, 0, 0, 0}},
      {"c", 2, {0.1, 0.3, 0.6, 0, 0, 0}},
      {"d", 3, {0.5, 0.1, 0.1, 0.3, 0, 0}},
  };
  const auto top = rank_confident_patches(records, 2);
  REQUIRE(top.size() == 2);
  CHECK(top[0].patch_id == "a");
  CHECK(top[1].patch_id == "b");
  CHECK(top[0].true_probability == 0.99);
  CHECK(rank_confident_patches(records, 10).size() == 3);

  const std::vector<PatchRecord> wrong{{"x", 1, {0.9, 0.1}}, {"y", 0, {0.2, 0.8}}};
  CHECK(rank_confident_patches(wrong, 5).empty());

  const auto uncertain = rank_uncertain_patches(records, 4);
  REQUIRE(uncertain.size() == 4);
  CHECK(uncertain[0].patch_id == "d");
  CHECK(uncertain[0].margin == doctest::Approx(0.2));
  for (std::size_t i = 1; i < uncertain.size(); ++i) CHECK(uncertain[i - 1].margin <= uncertain[i].margin);
  CHECK(prediction_margin(std::vector<double>{0.1, 0.6, 0.3}) == doctest::Approx(0.3));
}
