#include <catch2/catch_amalgamated.hpp>

#include "fairkit/config.hpp"
#include "fairkit/pipeline.hpp"
#include "fairkit/random.hpp"
#include "fairkit/reweight.hpp"

using namespace fairkit;

namespace {

DichotomizedAttributes make_attrs(const std::vector<std::string>& names,
                                  const std::vector<std::vector<std::uint8_t>>& values) {
  DichotomizedAttributes attrs;
  attrs.names = names;
  attrs.values = values;
  attrs.privileged.assign(names.size(), 1);
  attrs.bucket_names.assign(names.size(), {"0", "1"});
  return attrs;
}

}  // namespace

TEST_CASE("chi-squared of a perfectly independent table is zero") {
  ContingencyTable t;
  t.observed = {{10, 10}, {20, 20}};
  Chi2Result r = chi2_statistic(t);
  CHECK(r.statistic == Catch::Approx(0.0).margin(1e-12));
  CHECK_FALSE(r.significant);
}

TEST_CASE("chi-squared hand computation on a 2x2 table") {
  ContingencyTable t;
  t.observed = {{30, 10}, {10, 30}};
  Chi2Result r = chi2_statistic(t);
  CHECK(r.statistic == Catch::Approx(20.0));
  CHECK(r.df == 1);
  CHECK(r.critical == Catch::Approx(3.841));
  CHECK(r.significant);
}

TEST_CASE("degenerate tables are rejected") {
  ContingencyTable zero_row;
  zero_row.observed = {{0, 0}, {5, 5}};
  CHECK_THROWS_AS(chi2_statistic(zero_row), Error);

  ContingencyTable tiny;
  tiny.observed = {{3, 4}};
  CHECK_THROWS_AS(chi2_statistic(tiny), Error);
}

TEST_CASE("collapse drops empty rows and columns") {
  ContingencyTable t;
  t.observed = {{5, 0, 5}, {0, 0, 0}, {3, 0, 7}};
  ContingencyTable c = t.collapsed();
  CHECK(c.n_rows() == 2);
  CHECK(c.n_cols() == 2);
  CHECK(c.observed[0][0] == 5);
  CHECK(c.observed[1][1] == 7);
}

TEST_CASE("small expected counts merge along the target margin") {
  ContingencyTable t;
  // third column is rare; merging should fold it into a neighbour
  t.observed = {{20, 20, 1}, {20, 20, 2}};
  ContingencyTable merged = t.merged_small_expected();
  CHECK(merged.n_cols() == 2);
  long long total_before = t.grand_total();
  CHECK(merged.grand_total() == total_before);
}

TEST_CASE("critical-value table agrees with the incomplete-gamma route") {
  for (int df = 1; df <= 30; ++df) {
    double critical = chi2_critical_05(df);
    double p = chi2_p_value(critical, df);
    CHECK(p == Catch::Approx(0.05).margin(5e-4));
  }
}

TEST_CASE("interaction probability is a direct conditional count") {
  // 10 rows in cell (1,1); 4 carry the target class
  DichotomizedAttributes attrs = make_attrs(
      {"A", "B"},
      {{1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0},
       {1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0}});
  std::vector<int> target = {1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 1, 0};
  double p = interaction_probability(attrs, target, {0, 1}, 1, {1, 1});
  CHECK(p == Catch::Approx(0.4));

  SECTION("all rows matching the target give 1.0") {
    std::vector<int> all_target(target.size(), 1);
    CHECK(interaction_probability(attrs, all_target, {0, 1}, 1, {1, 1}) == 1.0);
  }
  SECTION("three-way cell") {
    DichotomizedAttributes attrs3 = make_attrs(
        {"A", "B", "C"},
        {{1, 1, 1, 1, 1, 0}, {1, 1, 1, 1, 1, 0}, {1, 1, 1, 1, 1, 1}});
    std::vector<int> t3 = {1, 1, 0, 0, 0, 1};
    CHECK(interaction_probability(attrs3, t3, {0, 1, 2}, 1, {1, 1, 1}) == Catch::Approx(0.4));
  }
  SECTION("empty cell is an error") {
    CHECK_THROWS_AS(interaction_probability(attrs, target, {0, 1}, 1, {1, 0}), Error);
  }
}

TEST_CASE("intersectional weight union semantics") {
  DichotomizedAttributes attrs = make_attrs({"A", "B", "C"}, {{1}, {1}, {0}});

  auto interaction = [&](std::vector<std::size_t> which, double p) {
    Interaction inter;
    inter.attrs = std::move(which);
    inter.chi2.significant = true;
    inter.cell_probability.assign(inter.n_cells(), 0.0);
    inter.cell_total.assign(inter.n_cells(), 1);
    inter.cell_target.assign(inter.n_cells(), 0);
    // the row sits in the all-ones cell of {A,B} or pattern cell otherwise
    std::size_t cell = inter.cell_of_row(attrs, 0);
    inter.cell_probability[cell] = p;
    return inter;
  };

  SECTION("single matching interaction keeps its probability") {
    std::vector<Interaction> set = {interaction({0, 1}, 0.6)};
    CHECK(intersectional_weight(attrs, 0, set) == Catch::Approx(0.6));
  }
  SECTION("two halves union to 0.75") {
    std::vector<Interaction> set = {interaction({0, 1}, 0.5), interaction({0, 2}, 0.5)};
    CHECK(intersectional_weight(attrs, 0, set) == Catch::Approx(0.75));
  }
  SECTION("no matching interaction keeps weight 1") {
    std::vector<Interaction> none;
    CHECK(intersectional_weight(attrs, 0, none) == 1.0);
  }
  SECTION("insignificant interactions contribute nothing") {
    std::vector<Interaction> set = {interaction({0, 1}, 0.6)};
    set.front().chi2.significant = false;
    CHECK(intersectional_weight(attrs, 0, set) == 1.0);
  }
  SECTION("adding p = 0 changes nothing") {
    std::vector<Interaction> set = {interaction({0, 1}, 0.6)};
    std::vector<Interaction> with_zero = set;
    with_zero.push_back(interaction({0, 2}, 0.0));
    CHECK(intersectional_weight(attrs, 0, with_zero) ==
          intersectional_weight(attrs, 0, set));
  }
  SECTION("adding p = 1 forces weight 1") {
    std::vector<Interaction> set = {interaction({0, 1}, 0.6), interaction({0, 2}, 1.0)};
    CHECK(intersectional_weight(attrs, 0, set) == 1.0);
  }
  SECTION("order independence") {
    std::vector<Interaction> forward = {interaction({0, 1}, 0.3), interaction({0, 2}, 0.8),
                                        interaction({1, 2}, 0.1)};
    std::vector<Interaction> backward = {forward[2], forward[0], forward[1]};
    CHECK(intersectional_weight(attrs, 0, forward) ==
          Catch::Approx(intersectional_weight(attrs, 0, backward)));
  }
}

TEST_CASE("chi-squared is invariant under swapping the two attributes") {
  Rng rng(12);
  std::size_t n = 120;
  DichotomizedAttributes attrs = make_attrs(
      {"A", "B"}, {std::vector<std::uint8_t>(n), std::vector<std::uint8_t>(n)});
  std::vector<int> target(n);
  for (std::size_t r = 0; r < n; ++r) {
    attrs.values[0][r] = static_cast<std::uint8_t>(rng.next_below(2));
    attrs.values[1][r] = static_cast<std::uint8_t>(rng.next_below(2));
    double p = (attrs.values[0][r] == attrs.values[1][r]) ? 0.7 : 0.3;
    target[r] = rng.next_real() < p ? 1 : 0;
  }

  auto table_for = [&](std::vector<std::size_t> order) {
    ContingencyTable t;
    t.observed.assign(4, std::vector<long long>(2, 0));
    for (std::size_t r = 0; r < n; ++r) {
      std::size_t cell = static_cast<std::size_t>(attrs.values[order[0]][r]) |
                         (static_cast<std::size_t>(attrs.values[order[1]][r]) << 1);
      ++t.observed[cell][static_cast<std::size_t>(target[r])];
    }
    return t.collapsed().merged_small_expected();
  };
  Chi2Result ab = chi2_statistic(table_for({0, 1}));
  Chi2Result ba = chi2_statistic(table_for({1, 0}));
  CHECK(ab.statistic == Catch::Approx(ba.statistic));
  CHECK(ab.df == ba.df);
}

TEST_CASE("nine attributes yield 120 tested tuples") {
  std::size_t n = 60;
  Rng rng(90);
  std::vector<std::vector<std::uint8_t>> values(9, std::vector<std::uint8_t>(n));
  std::vector<std::string> names;
  for (int a = 0; a < 9; ++a) {
    names.push_back("A" + std::to_string(a));
    for (std::size_t r = 0; r < n; ++r)
      values[static_cast<std::size_t>(a)][r] = static_cast<std::uint8_t>(rng.next_below(2));
  }
  std::vector<int> target(n);
  for (std::size_t r = 0; r < n; ++r) target[r] = static_cast<int>(rng.next_below(2));

  SampleWeights sw = assign_weights(make_attrs(names, values), target, 2, 1);
  CHECK(sw.interactions.size() == 120);  // C(9,2) + C(9,3)
  for (double w : sw.weights) {
    CHECK(w > 0.0);
    CHECK(w <= 1.0);
  }
}

TEST_CASE("a planted dependence is flagged significant and reweights its rows") {
  std::size_t n = 400;
  Rng rng(4);
  std::vector<std::vector<std::uint8_t>> values(3, std::vector<std::uint8_t>(n));
  std::vector<int> target(n);
  for (std::size_t r = 0; r < n; ++r) {
    values[0][r] = static_cast<std::uint8_t>(rng.next_below(2));  // planted pair
    values[1][r] = static_cast<std::uint8_t>(rng.next_below(2));
    values[2][r] = static_cast<std::uint8_t>(rng.next_below(2));  // noise
    double p = (values[0][r] ^ values[1][r]) ? 0.8 : 0.2;
    target[r] = rng.next_real() < p ? 1 : 0;
  }
  DichotomizedAttributes attrs = make_attrs({"G", "A", "N"}, values);
  SampleWeights sw = assign_weights(attrs, target, 2, 1);

  bool planted_found = false;
  for (const auto& inter : sw.interactions) {
    if (inter.attrs == std::vector<std::size_t>{0, 1}) {
      planted_found = inter.chi2.significant;
      // verify against the direct statistic
      ContingencyTable t;
      t.observed.assign(4, std::vector<long long>(2, 0));
      for (std::size_t r = 0; r < n; ++r) {
        std::size_t cell = static_cast<std::size_t>(values[0][r]) |
                           (static_cast<std::size_t>(values[1][r]) << 1);
        ++t.observed[cell][static_cast<std::size_t>(target[r])];
      }
      Chi2Result direct = chi2_statistic(t.collapsed().merged_small_expected());
      CHECK(inter.chi2.statistic == Catch::Approx(direct.statistic));
    }
  }
  CHECK(planted_found);

  // rows in significant cells carry the union weight, never above 1
  std::size_t reweighted = 0;
  for (std::size_t r = 0; r < n; ++r)
    if (sw.weights[r] < 1.0) ++reweighted;
  CHECK(reweighted > 0);
}

TEST_CASE("no significant interactions leave every weight at 1") {
  // tiny sample with a uniform target: nothing can clear the critical value
  std::size_t n = 24;
  Rng rng(77);
  std::vector<std::vector<std::uint8_t>> values(2, std::vector<std::uint8_t>(n));
  std::vector<int> target(n);
  for (std::size_t r = 0; r < n; ++r) {
    values[0][r] = static_cast<std::uint8_t>(r % 2);
    values[1][r] = static_cast<std::uint8_t>((r / 2) % 2);
    target[r] = static_cast<int>(r % 2 == 0);
  }
  // decouple target from the attributes
  for (std::size_t r = 0; r < n; ++r) target[r] = static_cast<int>((r / 4) % 2);

  SampleWeights sw = assign_weights(make_attrs({"A", "B"}, values), target, 2, 1);
  if (sw.n_significant == 0) {
    for (double w : sw.weights) CHECK(w == 1.0);
  }
}
