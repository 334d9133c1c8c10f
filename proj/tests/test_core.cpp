#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "raregap/core.hpp"
#include "raregap/rng.hpp"
#include "support/fixtures.hpp"

using raregap::componentwise_leq;
using raregap::evaluation_grid;
using raregap::first_event_time;
using raregap::pre_event_state;
using raregap::Trajectory;
using raregap::TrajectoryDataset;

TEST_CASE("componentwise order") {
  const std::vector<double> a{1.0, 3.0}, b{2.0, 2.0}, c{2.0, 3.0};
  CHECK(componentwise_leq(a, a));  // reflexive (closed comparison)
  CHECK(componentwise_leq(a, c));
  CHECK(componentwise_leq(b, c));
  CHECK_FALSE(componentwise_leq(a, b));  // incomparable pair
  CHECK_FALSE(componentwise_leq(b, a));
  CHECK_FALSE(componentwise_leq(c, a));
  CHECK_THROWS_AS(componentwise_leq(a, std::vector<double>{1.0}), std::invalid_argument);

  SECTION("transitivity on random triples") {
    raregap::detail::Rng rng(11);
    for (int i = 0; i < 500; ++i) {
      std::vector<double> x{rng.uniform(0, 4), rng.uniform(0, 4)};
      std::vector<double> y{rng.uniform(0, 4), rng.uniform(0, 4)};
      std::vector<double> z{rng.uniform(0, 4), rng.uniform(0, 4)};
      if (componentwise_leq(x, y) && componentwise_leq(y, z)) CHECK(componentwise_leq(x, z));
    }
  }
}

TEST_CASE("trajectory invariants") {
  CHECK_THROWS_AS(Trajectory({1.0, 2.0}, {}, 1), std::invalid_argument);         // no steps
  CHECK_THROWS_AS(Trajectory({1.0, 2.0}, {0, 1}, 1), std::invalid_argument);     // few states
  CHECK_THROWS_AS(Trajectory({1.0, 2.0, 3.0}, {0, 1}, 2), std::invalid_argument);
  CHECK_THROWS_AS(Trajectory({1.0, 2.0}, {2}, 1), std::invalid_argument);        // bad flag
  CHECK_THROWS_AS(Trajectory({1.0, 1.0 / 0.0}, {1}, 1), std::invalid_argument);  // inf
  CHECK_THROWS_AS(Trajectory({1.0, 2.0}, {1}, 0), std::invalid_argument);

  const Trajectory tr({1.0, 2.0, 3.0, 4.0}, {0, 1, 0}, 1);
  CHECK(tr.horizon() == 3);
  CHECK(tr.dimension() == 1);
  CHECK(tr.state(0)[0] == 1.0);
  CHECK(tr.state(3)[0] == 4.0);
  CHECK(tr.event(2) == 1);
  CHECK_THROWS_AS(tr.state(4), std::out_of_range);
  CHECK_THROWS_AS(tr.event(0), std::out_of_range);
  CHECK_THROWS_AS(tr.event(4), std::out_of_range);

  const Trajectory wide({1.0, 2.0, 3.0, 4.0}, {1}, 2);
  CHECK(wide.horizon() == 1);
  CHECK(wide.state(1)[1] == 4.0);
}

TEST_CASE("first event time and pre-event state") {
  const auto ds = fixtures::two_trajectories();
  REQUIRE(first_event_time(ds[0]).value() == 2);
  REQUIRE(first_event_time(ds[1]).value() == 1);
  CHECK(pre_event_state(ds[0])[0] == 2.0);
  CHECK(pre_event_state(ds[1])[0] == 3.0);

  const Trajectory quiet({5.0, 6.0, 7.0}, {0, 0}, 1);
  CHECK_FALSE(first_event_time(quiet).has_value());
  CHECK_THROWS_WITH(pre_event_state(quiet), "no event on trajectory");

  SECTION("matches a brute scan on random flag vectors") {
    raregap::detail::Rng rng(17);
    for (int rep = 0; rep < 2000; ++rep) {
      const int h = 1 + static_cast<int>(rng.uniform01() * 30);
      std::vector<std::uint8_t> flags(static_cast<std::size_t>(h));
      for (auto& f : flags) f = rng.bernoulli(0.15) ? 1 : 0;
      std::vector<double> states(static_cast<std::size_t>(h) + 1, 0.0);
      const Trajectory tr(states, flags, 1);

      int expected = 0;  // brute scan
      for (int t = h; t >= 1; --t)
        if (flags[static_cast<std::size_t>(t) - 1]) expected = t;
      const auto got = first_event_time(tr);
      if (expected == 0)
        CHECK_FALSE(got.has_value());
      else
        CHECK(got.value() == expected);
    }
  }
}

TEST_CASE("dataset invariants") {
  CHECK_THROWS_AS(TrajectoryDataset({}), std::invalid_argument);
  CHECK_THROWS_AS(TrajectoryDataset({Trajectory({1.0, 2.0}, {1}, 1),
                                     Trajectory({1.0, 2.0, 3.0, 4.0}, {1}, 2)}),
                  std::invalid_argument);

  const auto ds = fixtures::two_trajectories();
  CHECK(ds.size() == 2);
  CHECK(ds.dimension() == 1);
  CHECK(ds.min_horizon() == 1);
  CHECK(ds.max_horizon() == 2);
  CHECK_FALSE(ds.common_horizon());
  CHECK(ds.count_event_bearing() == 2);

  SECTION("event-bearing filter") {
    std::vector<Trajectory> trajs{Trajectory({1.0, 2.0}, {0}, 1),
                                  Trajectory({3.0, 4.0}, {1}, 1),
                                  Trajectory({5.0, 6.0}, {0}, 1)};
    const TrajectoryDataset mixed(std::move(trajs));
    CHECK(mixed.count_event_bearing() == 1);
    const auto kept = mixed.event_bearing();
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].state(0)[0] == 3.0);

    const TrajectoryDataset quiet({Trajectory({1.0, 2.0}, {0}, 1)});
    CHECK_THROWS_WITH(quiet.event_bearing(), "no event-bearing trajectories");
  }
}

TEST_CASE("evaluation grid") {
  SECTION("hand fixture") {
    const auto grid = evaluation_grid(fixtures::two_trajectories());
    CHECK(grid.dimension == 1);
    REQUIRE(grid.size() == 3);
    CHECK(grid.flat == std::vector<double>{1.0, 2.0, 3.0});
  }

  SECTION("sorted, deduplicated, complete, order independent") {
    raregap::detail::Rng rng(23);
    for (const int dim : {1, 2, 3}) {
      fixtures::RandomDatasetOptions opt;
      opt.n = 30;
      opt.max_horizon = 8;
      opt.dimension = dim;
      opt.lattice_states = true;  // force duplicate states
      const auto ds = fixtures::random_dataset(rng, opt);
      const auto grid = evaluation_grid(ds);

      for (std::size_t i = 1; i < grid.size(); ++i)
        CHECK(raregap::lexicographic_less(grid.point(i - 1), grid.point(i)));

      // every state of every trajectory appears
      std::size_t total_states = 0;
      for (const auto& tr : ds) {
        total_states += static_cast<std::size_t>(tr.horizon()) + 1;
        for (int t = 0; t <= tr.horizon(); ++t) {
          const auto x = tr.state(t);
          bool found = false;
          for (std::size_t g = 0; g < grid.size() && !found; ++g) {
            const auto p = grid.point(g);
            found = std::equal(p.begin(), p.end(), x.begin());
          }
          CHECK(found);
        }
      }
      CHECK(grid.size() <= total_states);
      CHECK(grid.size() < total_states);  // lattice states guarantee duplicates

      std::vector<Trajectory> shuffled(ds.begin(), ds.end());
      std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937_64(99));
      const auto grid2 = evaluation_grid(TrajectoryDataset(std::move(shuffled)));
      CHECK(grid.flat == grid2.flat);
    }
  }
}
