#include <algorithm>
#include <cmath>

#include "../support/dense_oracle.hpp"
#include "doctest.h"
#include "ri/bridge.hpp"

using namespace ri;

TEST_CASE("dense_subfamily against exhaustive search") {
  std::size_t checked = 0;
  for (int K = 1; K <= 10; ++K)
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << K); ++mask) {
      const auto idx = testing::mask_indices(mask, K);
      for (std::int64_t G = 1; G <= K; ++G)
        for (double beta : {0.25, 0.5, 1.0}) {
          const auto target = static_cast<std::size_t>(std::ceil(beta * static_cast<double>(G) - 1e-9));
          const bool enough = static_cast<double>(idx.size()) >= beta * K;
          const bool exists = enough && testing::dense_subset_exists(idx, target, G);
          ++checked;
          if (!exists) {
            CHECK_THROWS_AS(dense_subfamily(idx, K, beta, G), std::invalid_argument);
            continue;
          }
          const DenseResult r = dense_subfamily(idx, K, beta, G);
          REQUIRE(r.subset.size() == target);
          for (std::size_t i = 0; i < r.subset.size(); ++i) {
            CHECK(std::binary_search(idx.begin(), idx.end(), r.subset[i]));
            if (i > 0) CHECK(r.subset[i] - r.subset[i - 1] <= G);
            if (i > 0) CHECK(r.subset[i] > r.subset[i - 1]);
          }
          // The run-counting bound.
          CHECK(static_cast<double>(r.longest_run) >= r.regime_bound - 1e-9);
        }
    }
  CHECK(checked > 10000);
}

TEST_CASE("dense_subfamily input checks") {
  CHECK_THROWS_AS(dense_subfamily({0, 1}, 5, 0.5, 2), std::invalid_argument);
  CHECK_THROWS_AS(dense_subfamily({1, 2}, 5, 0.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(dense_subfamily({1, 2}, 5, 0.5, 0), std::invalid_argument);
  const DenseResult r = dense_subfamily({5, 1, 3, 3, 9}, 10, 0.4, 2);
  CHECK(r.subset == std::vector<std::int64_t>{1});
  CHECK(r.longest_run == 3);
}
