#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <set>

#include "fairkit/random.hpp"
#include "fairkit/smoten.hpp"

using namespace fairkit;

namespace {

// Random nominal table for property checks.
struct RandomData {
  std::vector<std::vector<int>> rows;
  std::vector<int> labels;
  int n_classes;
  std::vector<int> cardinalities;
};

RandomData make_nominal_data(Rng& rng, std::size_t min_rows = 8) {
  RandomData d;
  d.n_classes = 2 + static_cast<int>(rng.next_below(3));
  std::size_t n_features = 1 + rng.next_below(4);
  std::size_t n_rows = min_rows + rng.next_below(40);
  for (std::size_t f = 0; f < n_features; ++f)
    d.cardinalities.push_back(2 + static_cast<int>(rng.next_below(4)));
  for (std::size_t r = 0; r < n_rows; ++r) {
    std::vector<int> row;
    for (std::size_t f = 0; f < n_features; ++f)
      row.push_back(static_cast<int>(rng.next_below(
          static_cast<std::uint64_t>(d.cardinalities[f]))));
    d.rows.push_back(row);
    d.labels.push_back(static_cast<int>(rng.next_below(
        static_cast<std::uint64_t>(d.n_classes))));
  }
  return d;
}

}  // namespace

TEST_CASE("vdm_delta hand-evaluated cases") {
  // feature 0: value 0 appears 4 times with class counts [3,1];
  //            value 1 appears 2 times with class counts [1,1].
  std::vector<std::vector<int>> rows = {{0}, {0}, {0}, {0}, {1}, {1}};
  std::vector<int> labels = {0, 0, 0, 1, 0, 1};
  VdmTable t = VdmTable::build(rows, labels, 2);
  // |3/4 - 1/2| + |1/4 - 1/2| = 0.5
  CHECK(t.delta(0, 0, 1) == Catch::Approx(0.5));
  CHECK(t.delta(0, 0, 0) == 0.0);
}

TEST_CASE("vdm_delta maximal separation equals 2 with two classes") {
  std::vector<std::vector<int>> rows = {{0}, {0}, {0}, {0}, {1}, {1}, {1}, {1}};
  std::vector<int> labels = {0, 0, 0, 0, 1, 1, 1, 1};
  VdmTable t = VdmTable::build(rows, labels, 2);
  CHECK(t.delta(0, 0, 1) == Catch::Approx(2.0));
}

TEST_CASE("vdm_delta unknown value") {
  std::vector<std::vector<int>> rows = {{0}, {1}};
  std::vector<int> labels = {0, 1};
  VdmTable t = VdmTable::build(rows, labels, 2);
  CHECK_THROWS_AS(t.delta(0, 0, 7), Error);
}

TEST_CASE("vdm_distance sums per-feature deltas") {
  std::vector<std::vector<int>> rows = {{0, 0}, {0, 0}, {0, 0}, {0, 1},
                                        {1, 1}, {1, 0}, {0, 1}, {1, 0}};
  std::vector<int> labels = {0, 0, 0, 1, 0, 1, 0, 1};
  VdmTable t = VdmTable::build(rows, labels, 2);
  double expected = t.delta(0, 0, 1) + t.delta(1, 0, 1);
  CHECK(t.distance({0, 0}, {1, 1}) == Catch::Approx(expected));

  SECTION("identical rows have zero distance") {
    CHECK(t.distance({0, 1}, {0, 1}) == 0.0);
  }
  SECTION("rows differing in one feature equal that delta") {
    CHECK(t.distance({0, 0}, {0, 1}) == Catch::Approx(t.delta(1, 0, 1)));
  }
  SECTION("length mismatch") {
    CHECK_THROWS_AS(t.distance({0}, {0, 1}), Error);
  }
}

TEST_CASE("vdm properties over random tables") {
  Rng rng(101);
  for (int tables = 0; tables < 1000; ++tables) {
    RandomData d = make_nominal_data(rng);
    VdmTable t = VdmTable::build(d.rows, d.labels, d.n_classes);

    std::set<int> seen;
    for (const auto& row : d.rows) seen.insert(row[0]);
    std::vector<int> values(seen.begin(), seen.end());
    if (values.size() < 2) continue;
    int a = values[rng.next_below(values.size())];
    int b = values[rng.next_below(values.size())];
    int c = values[rng.next_below(values.size())];

    CHECK(t.delta(0, a, b) == Catch::Approx(t.delta(0, b, a)));
    CHECK(t.delta(0, a, a) == 0.0);
    CHECK(t.delta(0, a, b) >= 0.0);
    // triangle inequality for k = 1
    CHECK(t.delta(0, a, c) <= t.delta(0, a, b) + t.delta(0, b, c) + 1e-12);
  }
}

TEST_CASE("smoten balances a 45/30 imbalance to 45/45") {
  Rng rng(5);
  std::vector<std::vector<int>> rows;
  std::vector<int> labels;
  for (int i = 0; i < 45; ++i) {
    rows.push_back({static_cast<int>(rng.next_below(3)),
                    static_cast<int>(rng.next_below(2))});
    labels.push_back(0);
  }
  for (int i = 0; i < 30; ++i) {
    rows.push_back({static_cast<int>(rng.next_below(3)),
                    static_cast<int>(rng.next_below(2))});
    labels.push_back(1);
  }
  ResamplePlan plan = plan_balance(labels, 2, 5, 99);
  SmotenResult out = smoten_resample(rows, labels, 2, plan);

  std::map<int, int> counts;
  for (int y : out.labels) ++counts[y];
  CHECK(counts[0] == 45);
  CHECK(counts[1] == 45);
  CHECK(out.rows.size() == 90);
  for (std::size_t r = 0; r < rows.size(); ++r) CHECK(out.rows[r] == rows[r]);
}

TEST_CASE("already balanced data returns unchanged") {
  std::vector<std::vector<int>> rows = {{0}, {1}, {0}, {1}};
  std::vector<int> labels = {0, 0, 1, 1};
  ResamplePlan plan = plan_balance(labels, 2, 5, 1);
  SmotenResult out = smoten_resample(rows, labels, 2, plan);
  CHECK(out.rows == rows);
  CHECK(out.labels == labels);
}

TEST_CASE("identical minority rows produce identical synthetic rows") {
  std::vector<std::vector<int>> rows = {{2, 1}, {2, 1}, {2, 1},
                                        {0, 0}, {1, 0}, {0, 1}, {1, 1}, {0, 0}};
  std::vector<int> labels = {1, 1, 1, 0, 0, 0, 0, 0};
  ResamplePlan plan = plan_balance(labels, 2, 5, 7);
  SmotenResult out = smoten_resample(rows, labels, 2, plan);
  for (std::size_t r = out.n_original; r < out.rows.size(); ++r)
    CHECK(out.rows[r] == std::vector<int>{2, 1});
}

TEST_CASE("singleton minority class duplicates with a warning") {
  std::vector<std::vector<int>> rows = {{0}, {1}, {2}, {2}};
  std::vector<int> labels = {0, 0, 0, 1};
  ResamplePlan plan = plan_balance(labels, 2, 5, 3);
  SmotenResult out = smoten_resample(rows, labels, 2, plan);
  REQUIRE_FALSE(out.warnings.empty());
  std::map<int, int> counts;
  for (int y : out.labels) ++counts[y];
  CHECK(counts[0] == counts[1]);
  for (std::size_t r = out.n_original; r < out.rows.size(); ++r)
    CHECK(out.rows[r] == std::vector<int>{2});
}

TEST_CASE("synthetic features come from original same-class values") {
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    RandomData d = make_nominal_data(rng, 12);
    ResamplePlan plan = plan_balance(d.labels, d.n_classes, 5,
                                     1000 + static_cast<std::uint64_t>(trial));
    SmotenResult out = smoten_resample(d.rows, d.labels, d.n_classes, plan);

    std::vector<int> counts(static_cast<std::size_t>(d.n_classes), 0);
    for (int y : out.labels) ++counts[static_cast<std::size_t>(y)];
    int majority = *std::max_element(counts.begin(), counts.end());
    for (std::size_t c = 0; c < counts.size(); ++c) {
      bool class_exists = false;
      for (int y : d.labels)
        if (y == static_cast<int>(c)) class_exists = true;
      if (class_exists) CHECK(counts[c] == majority);
    }

    for (std::size_t r = out.n_original; r < out.rows.size(); ++r) {
      int cls = out.labels[r];
      for (std::size_t f = 0; f < out.rows[r].size(); ++f) {
        bool found = false;
        for (std::size_t o = 0; o < out.n_original; ++o)
          if (out.labels[o] == cls && out.rows[o][f] == out.rows[r][f]) found = true;
        CHECK(found);
      }
    }
  }
}

TEST_CASE("smoten is deterministic for a fixed seed") {
  Rng rng(77);
  RandomData d = make_nominal_data(rng, 15);
  ResamplePlan plan = plan_balance(d.labels, d.n_classes, 5, 4242);
  SmotenResult a = smoten_resample(d.rows, d.labels, d.n_classes, plan);
  SmotenResult b = smoten_resample(d.rows, d.labels, d.n_classes, plan);
  CHECK(a.rows == b.rows);
  CHECK(a.labels == b.labels);
}
