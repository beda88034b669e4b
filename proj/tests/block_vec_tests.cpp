#include <doctest.h>

#include <cmath>
#include <limits>

#include "rangemon/block_vec.hpp"
#include "rangemon/errors.hpp"
#include "test_support.hpp"

using namespace rangemon;
using testsupport::make_block_vec;
using testsupport::random_block_vec;

TEST_SUITE("block_vec") {

TEST_CASE("layout bookkeeping") {
  auto layout = BlockLayout::make({2, 3, 1});
  CHECK(layout->num_blocks() == 3);
  CHECK(layout->total_dim() == 6);
  CHECK(layout->block_dim(1) == 3);
  CHECK(layout->block_offset(0) == 0);
  CHECK(layout->block_offset(1) == 2);
  CHECK(layout->block_offset(2) == 5);
  CHECK(*BlockLayout::uniform(3, 2) == *BlockLayout::make({2, 2, 2}));
  CHECK(*layout != *BlockLayout::uniform(3, 2));
}

TEST_CASE("layout rejects non-positive dims") {
  CHECK_THROWS_AS(BlockLayout::make({2, 0}), ConfigError);
  CHECK_THROWS_AS(BlockLayout::make({-1}), ConfigError);
  CHECK_THROWS_AS(BlockLayout::make({}), ConfigError);
}

TEST_CASE("block views alias the flat storage") {
  BlockVec v(BlockLayout::make({2, 2}));
  v.block(1)[0] = 7.0;
  CHECK(v.data()[2] == 7.0);
  v.data()[3] = -1.0;
  CHECK(v.block(1)[1] == -1.0);
  CHECK_THROWS_AS(v.block(2), IndexError);
}

TEST_CASE("norm_2q on the worked three-block example") {
  BlockVec v = make_block_vec({{3, 4}, {0, 0}, {1, 0}});
  CHECK(norm_2q(v, 1.0) == doctest::Approx(6.0).epsilon(1e-15));
  CHECK(norm_2q(v, 0.0) == doctest::Approx(2.0));
  CHECK(norm_2q(v, kInfQ) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(norm_2q(v, 2.0) == doctest::Approx(std::sqrt(25.0 + 1.0)).epsilon(1e-15));
}

TEST_CASE("norm_2q rejects invalid q") {
  BlockVec v = make_block_vec({{1}});
  CHECK_THROWS_AS(norm_2q(v, -1.0), ConfigError);
  CHECK_THROWS_AS(norm_2q(v, std::numeric_limits<double>::quiet_NaN()), ConfigError);
}

TEST_CASE("norm_2q zero tolerance is on block norms") {
  BlockVec v = make_block_vec({{1e-13, 0}, {1e-3, 0}});
  CHECK(norm_2q(v, 0.0) == doctest::Approx(1.0));       // default 1e-12
  CHECK(norm_2q(v, 0.0, 1e-16) == doctest::Approx(2.0));
}

TEST_CASE("block_axpy identity, zero scaling, cancellation") {
  BlockVec x = make_block_vec({{1}, {2}});
  BlockVec zero = make_block_vec({{0}, {0}});
  BlockVec r1 = block_axpy(1.0, x, zero);
  CHECK(r1.data() == x.data());

  RngStream rng(11);
  BlockVec y = random_block_vec(BlockLayout::make({1, 1}), rng);
  BlockVec r2 = block_axpy(0.0, x, y);
  CHECK(r2.data() == y.data());

  BlockVec r3 = block_axpy(-1.0, x, x);
  CHECK(r3.data().norm() == 0.0);
}

TEST_CASE("block_axpy rejects mismatched layouts") {
  BlockVec x = make_block_vec({{1, 2}});
  BlockVec y = make_block_vec({{1}, {2}});
  CHECK_THROWS_AS(block_axpy(1.0, x, y), ShapeError);
}

TEST_CASE("norm family properties over random vectors") {
  // Ordering, triangle inequality, homogeneity, and the sparsity bound,
  // checked over 10^4 random block vectors.
  RngStream rng(42);
  auto layout = BlockLayout::make({2, 3, 1, 4});
  int checked = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    BlockVec u = random_block_vec(layout, rng, 3.0);
    BlockVec v = random_block_vec(layout, rng, 3.0);
    const double ninf = norm_2q(v, kInfQ);
    const double n2 = norm_2q(v, 2.0);
    const double n1 = norm_2q(v, 1.0);
    REQUIRE(ninf <= n2 + 1e-12);
    REQUIRE(n2 <= n1 + 1e-12);
    REQUIRE(norm_2q(v, 0.0) <= v.num_blocks());

    for (double q : {1.0, 2.0, kInfQ}) {
      BlockVec sum = block_axpy(1.0, u, v);
      REQUIRE(norm_2q(sum, q) <= norm_2q(u, q) + norm_2q(v, q) + 1e-12);
      const double alpha = rng.uniform(-4.0, 4.0);
      BlockVec scaled = block_axpy(alpha, v, BlockVec(layout));
      REQUIRE(norm_2q(scaled, q) ==
              doctest::Approx(std::abs(alpha) * norm_2q(v, q)).epsilon(1e-12));
    }
    const double alpha = rng.uniform(0.5, 2.0);
    BlockVec scaled = block_axpy(alpha, v, BlockVec(layout));
    REQUIRE(norm_2q(scaled, 0.0) == norm_2q(v, 0.0));
    ++checked;
  }
  CHECK(checked == 10000);
}

TEST_CASE("all_finite flags non-finite entries") {
  BlockVec v = make_block_vec({{1, 2}, {3, 4}});
  CHECK(all_finite(v));
  v.block(1)[0] = std::numeric_limits<double>::infinity();
  CHECK_FALSE(all_finite(v));
  v.block(1)[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_FALSE(all_finite(v));
}

}  // TEST_SUITE
