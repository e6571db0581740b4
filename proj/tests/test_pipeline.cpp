#include <doctest.h>

#include <cmath>
#include <random>

#include "pc/encode.hpp"
#include "pc/image.hpp"
#include "pc/kmeans.hpp"
#include "pc/whiten.hpp"

using namespace pc;

namespace {

Image constant_image(int w, int h, int ch, double value) {
  Image img;
  img.width = w;
  img.height = h;
  img.channels = ch;
  img.pixels.assign(static_cast<std::size_t>(w) * h * ch, value);
  return img;
}

Image random_image(int w, int h, int ch, std::uint64_t seed) {
  Image img = constant_image(w, h, ch, 0.0);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  for (double& p : img.pixels) p = dist(rng);
  return img;
}

Matrix random_patches(int n, int dim, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, scale);
  Matrix m(n, dim);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

}  // namespace

TEST_CASE("extract_patches counts and contents") {
  SUBCASE("32x32 with 6x6 windows gives a 27x27 grid") {
    Image img = random_image(32, 32, 3, 7);
    PatchGrid grid = extract_patches(img, 6, 1);
    CHECK(grid.gridH == 27);
    CHECK(grid.gridW == 27);
    CHECK(grid.count() == 729);
    CHECK(grid.patches.cols() == 108);
  }
  SUBCASE("whole-image window is the single degenerate patch") {
    Image img = random_image(32, 32, 3, 8);
    PatchGrid grid = extract_patches(img, 32, 1);
    REQUIRE(grid.count() == 1);
    for (int ch = 0; ch < 3; ++ch)
      for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x)
          CHECK(grid.patches(0, ch * 1024 + y * 32 + x) == img.at(ch, y, x));
  }
  SUBCASE("zero image yields zero patches") {
    Image img = constant_image(8, 8, 1, 0.0);
    PatchGrid grid = extract_patches(img, 6, 1);
    CHECK(grid.count() == 9);
    CHECK(grid.patches.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("patch larger than image is rejected") {
    Image img = constant_image(8, 8, 1, 0.0);
    CHECK_THROWS_AS(extract_patches(img, 9, 1), std::invalid_argument);
    CHECK_THROWS_AS(extract_patches(img, 4, 0), std::invalid_argument);
  }
  SUBCASE("patch count law over assorted shapes") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 20; ++trial) {
      std::uniform_int_distribution<int> dim(6, 24), side(1, 6), strideDist(1, 3);
      const int w = dim(rng), h = dim(rng), p = side(rng), s = strideDist(rng);
      Image img = random_image(w, h, 1, trial);
      PatchGrid grid = extract_patches(img, p, s);
      CHECK(grid.count() == ((w - p) / s + 1) * ((h - p) / s + 1));
    }
  }
}

TEST_CASE("normalize_patch") {
  SUBCASE("constant patch maps to zero") {
    Vector patch(4);
    patch << 5, 5, 5, 5;
    CHECK(normalize_patch(patch, 10.0).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("zero varFloor is rejected") {
    Vector patch(2);
    patch << 0, 2;
    CHECK_THROWS_AS(normalize_patch(patch, 0.0), std::invalid_argument);
  }
  SUBCASE("[1,3] with varFloor 1") {
    // mean 2, population variance 1, denominator sqrt(1+1)
    Vector patch(2);
    patch << 1, 3;
    Vector out = normalize_patch(patch, 1.0);
    CHECK(out[0] == doctest::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(out[1] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  }
  SUBCASE("row-wise version matches per-patch calls") {
    Matrix patches = random_patches(11, 7, 3);
    Matrix rows = patches;
    normalize_patches(rows, 10.0);
    for (Eigen::Index i = 0; i < patches.rows(); ++i) {
      Vector one = normalize_patch(patches.row(i), 10.0);
      CHECK((rows.row(i).transpose() - one).cwiseAbs().maxCoeff() < 1e-14);
    }
  }
}

TEST_CASE("fit_zca") {
  SUBCASE("white data gives the identity transform") {
    const double s = std::sqrt(2.0);
    Matrix patches(4, 2);
    patches << s, 0, -s, 0, 0, s, 0, -s;  // population covariance = I
    WhitenTransform wt = fit_zca(patches, 1e-12);
    CHECK((wt.matrix - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-6);
  }
  SUBCASE("diagonal covariance has a closed-form transform") {
    const double a = std::sqrt(8.0), b = std::sqrt(2.0);
    Matrix patches(4, 2);
    patches << a, 0, -a, 0, 0, b, 0, -b;  // population covariance diag(4, 1)
    WhitenTransform wt = fit_zca(patches, 1e-12);
    Matrix expected(2, 2);
    expected << 0.5, 0, 0, 1;
    CHECK((wt.matrix - expected).cwiseAbs().maxCoeff() < 1e-5);
  }
  SUBCASE("transform is symmetric") {
    Matrix patches = random_patches(60, 9, 5);
    WhitenTransform wt = fit_zca(patches, 0.1);
    CHECK((wt.matrix - wt.matrix.transpose()).cwiseAbs().maxCoeff() < 1e-10);
  }
  SUBCASE("whitened fitting set has identity covariance") {
    Matrix patches = random_patches(200, 4, 6, 3.0);
    WhitenTransform wt = fit_zca(patches, 1e-12);
    Matrix whitened = patches;
    whiten_apply_rows(wt, whitened);
    Matrix cov = whitened.transpose() * whitened / static_cast<double>(whitened.rows());
    CHECK((cov - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-6);
  }
  SUBCASE("too few patches is rejected") {
    CHECK_THROWS_AS(fit_zca(random_patches(4, 4, 7), 0.1), std::invalid_argument);
    CHECK_THROWS_AS(fit_zca(random_patches(10, 4, 7), 0.0), std::invalid_argument);
  }
}

TEST_CASE("kmeans_fit") {
  SUBCASE("single cluster is the mean") {
    Matrix patches = random_patches(30, 3, 9);
    Dictionary dict = kmeans_fit(patches, 1, 10, 1);
    Vector mean = patches.colwise().mean();
    CHECK((dict.centroids.row(0).transpose() - mean).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("well-separated clouds are recovered") {
    Matrix patches(40, 2);
    patches.topRows(20) = random_patches(20, 2, 10).array() + 100.0;
    patches.bottomRows(20) = random_patches(20, 2, 11).array() - 100.0;
    Dictionary dict = kmeans_fit(patches, 2, 20, 2);
    // one centroid per cloud, inside that cloud's range
    double hi = std::max(dict.centroids(0, 0), dict.centroids(1, 0));
    double lo = std::min(dict.centroids(0, 0), dict.centroids(1, 0));
    CHECK(hi > 90.0);
    CHECK(lo < -90.0);
  }
  SUBCASE("distortion never increases") {
    Matrix patches = random_patches(200, 5, 12);
    std::vector<double> trace;
    kmeans_fit(patches, 8, 25, 3, &trace);
    REQUIRE(trace.size() >= 2);
    for (std::size_t t = 1; t < trace.size(); ++t) CHECK(trace[t] <= trace[t - 1] + 1e-12);
  }
  SUBCASE("K larger than the sample is rejected") {
    CHECK_THROWS_AS(kmeans_fit(random_patches(4, 2, 13), 5, 5, 1), std::invalid_argument);
  }
}

TEST_CASE("triangle_encode") {
  SUBCASE("distances [1,3] give code [1,0]") {
    Dictionary dict;
    dict.centroids.resize(2, 1);
    dict.centroids << 1.0, -3.0;
    Vector patch = Vector::Zero(1);
    Vector code = triangle_encode(patch, dict);
    CHECK(code[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(code[1] == 0.0);
  }
  SUBCASE("equidistant patch yields the zero code") {
    Dictionary dict;
    dict.centroids.resize(3, 2);
    dict.centroids << 1, 0, -1, 0, 0, 1;
    Vector code = triangle_encode(Vector::Zero(2), dict);
    CHECK(code.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("matches the brute-force formula") {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> dist(0.0, 1.0);
    Dictionary dict;
    dict.centroids = random_patches(5, 4, 22);
    Vector patch(4);
    for (int i = 0; i < 4; ++i) patch[i] = dist(rng);

    Vector z(5);
    for (int k = 0; k < 5; ++k) z[k] = (patch - dict.centroids.row(k).transpose()).norm();
    const double mu = z.mean();
    Vector code = triangle_encode(patch, dict);
    for (int k = 0; k < 5; ++k)
      CHECK(code[k] == doctest::Approx(std::max(0.0, mu - z[k])).epsilon(1e-12));
  }
  SUBCASE("nonnegative with at least one exact zero") {
    for (int trial = 0; trial < 10; ++trial) {
      Dictionary dict;
      dict.centroids = random_patches(6, 3, 100 + trial);
      Vector code = triangle_encode(random_patches(1, 3, 200 + trial).row(0), dict);
      CHECK(code.minCoeff() >= 0.0);
      CHECK(code.minCoeff() == 0.0);
    }
  }
  SUBCASE("dimension mismatch is rejected") {
    Dictionary dict;
    dict.centroids = random_patches(2, 3, 23);
    CHECK_THROWS_AS(triangle_encode(Vector::Zero(2), dict), std::invalid_argument);
  }
  SUBCASE("row-wise version agrees with per-patch calls") {
    Dictionary dict;
    dict.centroids = random_patches(7, 5, 24);
    Matrix patches = random_patches(13, 5, 25);
    Matrix codes = triangle_encode_rows(patches, dict);
    for (Eigen::Index i = 0; i < patches.rows(); ++i) {
      Vector one = triangle_encode(patches.row(i), dict);
      CHECK((codes.row(i).transpose() - one).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("encode_image") {
  Matrix sample = random_patches(300, 108, 31).array() + 0.5;
  Matrix fitSample = sample * 255.0;
  normalize_patches(fitSample, kNormVarFloor);
  WhitenTransform wt = fit_zca(fitSample, 0.1);
  Matrix whitened = fitSample;
  whiten_apply_rows(wt, whitened);
  Dictionary dict = kmeans_fit(whitened, 16, 10, 32);

  SUBCASE("CIFAR-sized image gives a 27x27x16 grid") {
    Image img = random_image(32, 32, 3, 33);
    CodeGrid grid = encode_image(img, dict, wt, 6);
    CHECK(grid.gridH == 27);
    CHECK(grid.gridW == 27);
    CHECK(grid.codes.rows() == 729);
    CHECK(grid.codes.cols() == 16);
    CHECK(grid.codes.minCoeff() >= 0.0);
  }
  SUBCASE("uniform image encodes identically everywhere") {
    Image img = constant_image(32, 32, 3, 0.25);
    CodeGrid grid = encode_image(img, dict, wt, 6);
    for (Eigen::Index j = 1; j < grid.codes.rows(); ++j)
      CHECK((grid.codes.row(j) - grid.codes.row(0)).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("deterministic") {
    Image img = random_image(32, 32, 3, 34);
    CodeGrid a = encode_image(img, dict, wt, 6);
    CodeGrid b = encode_image(img, dict, wt, 6);
    CHECK((a.codes - b.codes).cwiseAbs().maxCoeff() == 0.0);
  }
}
