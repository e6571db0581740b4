#include <doctest.h>

#include <random>

#include "pc/pooling.hpp"

using namespace pc;

namespace {

CodeGrid make_grid(int gridH, int gridW, int K, std::uint64_t seed, bool integers = false) {
  CodeGrid grid;
  grid.gridH = gridH;
  grid.gridW = gridW;
  grid.codes.resize(gridH * gridW, K);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> real(0.0, 1.0);
  std::uniform_int_distribution<int> ints(0, 9);
  for (Eigen::Index i = 0; i < grid.codes.size(); ++i)
    grid.codes.data()[i] = integers ? static_cast<double>(ints(rng)) : real(rng);
  return grid;
}

Matrix random_weights(int M, int K, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  Matrix w(M, K);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = dist(rng);
  return w;
}

}  // namespace

TEST_CASE("pool_unit") {
  SUBCASE("all-ones weights give column sums") {
    CodeGrid grid = make_grid(3, 3, 4, 1);
    Vector pooled = pool_unit(Matrix::Ones(9, 4), grid);
    Vector sums = grid.codes.colwise().sum();
    CHECK((pooled - sums).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("all-zero weights annihilate") {
    CodeGrid grid = make_grid(3, 3, 4, 2);
    CHECK(pool_unit(Matrix::Zero(9, 4), grid).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("matches the direct double loop") {
    CodeGrid grid = make_grid(2, 2, 2, 3);
    Matrix w = random_weights(4, 2, 4);
    Vector pooled = pool_unit(w, grid);
    for (int k = 0; k < 2; ++k) {
      double expected = 0.0;
      for (int j = 0; j < 4; ++j) expected += w(j, k) * grid.codes(j, k);
      CHECK(pooled[k] == doctest::Approx(expected).epsilon(1e-14));
    }
  }
  SUBCASE("linearity in the codes") {
    CodeGrid u = make_grid(3, 4, 3, 5);
    CodeGrid v = make_grid(3, 4, 3, 6);
    Matrix w = random_weights(12, 3, 7);
    const double a = 2.5, b = -1.25;
    CodeGrid mix = u;
    mix.codes = a * u.codes + b * v.codes;
    Vector lhs = pool_unit(w, mix);
    Vector rhs = a * pool_unit(w, u) + b * pool_unit(w, v);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("shape mismatch is rejected") {
    CodeGrid grid = make_grid(2, 2, 3, 8);
    CHECK_THROWS_AS(pool_unit(Matrix::Ones(4, 2), grid), std::invalid_argument);
    CHECK_THROWS_AS(pool_unit(Matrix::Ones(5, 3), grid), std::invalid_argument);
  }
}

TEST_CASE("pool_all") {
  SUBCASE("L units of K codes give an L*K feature") {
    CodeGrid grid = make_grid(4, 4, 16, 9);
    PoolingWeights w = init_pooling({InitKind::SpmQuadrants}, 4, 4, 4, 16, 0);
    CHECK(pool_all(w, grid).size() == 64);
  }
  SUBCASE("quadrant indicators recover per-quadrant sums bitwise") {
    CodeGrid grid = make_grid(4, 4, 3, 10, /*integers=*/true);
    PoolingWeights w = init_pooling({InitKind::SpmQuadrants}, 4, 4, 4, 3, 0);
    Vector pooled = pool_all(w, grid);
    // quadrant order: TL, TR, BL, BR
    for (int q = 0; q < 4; ++q) {
      const int r0 = q / 2 == 0 ? 0 : 2, c0 = q % 2 == 0 ? 0 : 2;
      for (int k = 0; k < 3; ++k) {
        double sum = 0.0;
        for (int r = r0; r < r0 + 2; ++r)
          for (int c = c0; c < c0 + 2; ++c) sum += grid.codes(r * 4 + c, k);
        CHECK(pooled[q * 3 + k] == sum);  // bitwise: integer-valued doubles
      }
    }
  }
  SUBCASE("counting: all ones everywhere") {
    CodeGrid grid = make_grid(5, 5, 2, 0);
    grid.codes.setOnes();
    PoolingWeights w = init_pooling({InitKind::SpmWhole}, 1, 5, 5, 2, 0);
    Vector pooled = pool_all(w, grid);
    CHECK(pooled[0] == 25.0);
    CHECK(pooled[1] == 25.0);
  }
}

TEST_CASE("init_pooling") {
  SUBCASE("quadrants on a 4x4 grid have 4 ones per map") {
    PoolingWeights w = init_pooling({InitKind::SpmQuadrants}, 4, 4, 4, 3, 0);
    for (int l = 0; l < 4; ++l) {
      for (int k = 0; k < 3; ++k) {
        CHECK(w.units[l].col(k).sum() == 4.0);
        CHECK(w.units[l].col(k).minCoeff() == 0.0);
        CHECK(w.units[l].col(k).maxCoeff() == 1.0);
      }
    }
    // quadrant partition: each position belongs to exactly one unit
    Matrix total = Matrix::Zero(16, 3);
    for (int l = 0; l < 4; ++l) total += w.units[l];
    CHECK((total.array() == 1.0).all());
  }
  SUBCASE("odd grids put the middle row/column in the bottom/right quadrants") {
    PoolingWeights w = init_pooling({InitKind::SpmQuadrants}, 4, 5, 5, 1, 0);
    CHECK(w.units[0].col(0).sum() == 4.0);   // TL: 2x2
    CHECK(w.units[1].col(0).sum() == 6.0);   // TR: 2x3
    CHECK(w.units[2].col(0).sum() == 6.0);   // BL: 3x2
    CHECK(w.units[3].col(0).sum() == 9.0);   // BR: 3x3
    CHECK(w.units[3](2 * 5 + 2, 0) == 1.0);  // center cell goes bottom-right
  }
  SUBCASE("quadrants demand exactly four units") {
    CHECK_THROWS_AS(init_pooling({InitKind::SpmQuadrants}, 3, 4, 4, 2, 0),
                    std::invalid_argument);
  }
  SUBCASE("random init is reproducible, in range, and centered near 0.5") {
    InitScheme scheme;
    scheme.kind = InitKind::RandomGaussian;
    PoolingWeights a = init_pooling(scheme, 4, 10, 10, 30, 77);
    PoolingWeights b = init_pooling(scheme, 4, 10, 10, 30, 77);
    PoolingWeights c = init_pooling(scheme, 4, 10, 10, 30, 78);
    double sum = 0.0;
    long n = 0;
    bool anyDifferent = false;
    for (int l = 0; l < 4; ++l) {
      CHECK((a.units[l] - b.units[l]).cwiseAbs().maxCoeff() == 0.0);
      anyDifferent |= (a.units[l] - c.units[l]).cwiseAbs().maxCoeff() > 0.0;
      CHECK(a.units[l].minCoeff() >= 0.0);
      CHECK(a.units[l].maxCoeff() <= 1.0);
      sum += a.units[l].sum();
      n += a.units[l].size();
    }
    CHECK(anyDifferent);
    CHECK(n >= 10000);
    CHECK(sum / static_cast<double>(n) == doctest::Approx(0.5).epsilon(0.04));
  }
  SUBCASE("constant fill composes to global sum pooling") {
    CodeGrid grid = make_grid(3, 3, 2, 11);
    InitScheme scheme;
    scheme.kind = InitKind::Constant;
    scheme.value = 1.0;
    PoolingWeights w = init_pooling(scheme, 1, 3, 3, 2, 0);
    Vector pooled = pool_all(w, grid);
    Vector sums = grid.codes.colwise().sum();
    CHECK((pooled - sums).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("prepool") {
  SUBCASE("S=1 is the identity") {
    CodeGrid grid = make_grid(5, 7, 3, 12);
    CodeGrid out = prepool(grid, 1);
    CHECK(out.gridH == 5);
    CHECK(out.gridW == 7);
    CHECK((out.codes - grid.codes).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("27x27 with S=3 gives 81 positions") {
    CodeGrid grid = make_grid(27, 27, 2, 13);
    CodeGrid out = prepool(grid, 3);
    CHECK(out.gridH == 9);
    CHECK(out.gridW == 9);
    CHECK(out.positionCount() == 81);
    // spot check one interior block
    Vector expected = Vector::Zero(2);
    for (int r = 3; r < 6; ++r)
      for (int c = 6; c < 9; ++c) expected += grid.codes.row(r * 27 + c).transpose();
    CHECK((out.codes.row(1 * 9 + 2).transpose() - expected).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("2x2 grid with S=2 collapses to the total sum") {
    CodeGrid grid = make_grid(2, 2, 3, 14);
    CodeGrid out = prepool(grid, 2);
    REQUIRE(out.positionCount() == 1);
    Vector total = grid.codes.colwise().sum();
    CHECK((out.codes.row(0).transpose() - total).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("trailing remainder folds into the last block") {
    CodeGrid grid = make_grid(5, 5, 1, 15);
    CodeGrid out = prepool(grid, 2);
    CHECK(out.gridH == 2);
    CHECK(out.gridW == 2);
    // last block row covers rows 2..4, last block col covers cols 2..4
    double expected = 0.0;
    for (int r = 2; r < 5; ++r)
      for (int c = 2; c < 5; ++c) expected += grid.codes(r * 5 + c, 0);
    CHECK(out.codes(3, 0) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(out.codes.sum() == doctest::Approx(grid.codes.sum()).epsilon(1e-12));  // nothing dropped
  }
  SUBCASE("pooling commutes with prepooling for block-constant weights") {
    const int S = 3, H = 9, W = 9, K = 4;
    CodeGrid grid = make_grid(H, W, K, 16);
    // build weights constant on each SxS block
    Matrix blockW = random_weights((H / S) * (W / S), K, 17);
    Matrix w(H * W, K);
    for (int r = 0; r < H; ++r)
      for (int c = 0; c < W; ++c)
        w.row(r * W + c) = blockW.row((r / S) * (W / S) + c / S);

    PoolingWeights full;
    full.gridH = H;
    full.gridW = W;
    full.units = {w};
    PoolingWeights down = prepool_weights(full, S);
    CHECK((down.units[0] - blockW).cwiseAbs().maxCoeff() == 0.0);

    Vector direct = pool_unit(w, grid);
    Vector viaPrepool = pool_unit(down.units[0], prepool(grid, S));
    const double relTol = 1e-10 * std::max(1.0, direct.cwiseAbs().maxCoeff());
    CHECK((direct - viaPrepool).cwiseAbs().maxCoeff() < relTol);
  }
}
