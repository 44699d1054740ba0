#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "sstem/error.hpp"
#include "sstem/hashing.hpp"
#include "sstem/numeric.hpp"

using namespace sstem;

TEST(AccurateMean, ThreeConfidencesIsExact) {
  const std::vector<double> v{0.8, 0.6, 0.7};
  EXPECT_EQ(accurate_mean(v), 0.7);
  // The naive left-to-right mean misses by one ulp.
  EXPECT_NE((0.8 + 0.6 + 0.7) / 3.0, 0.7);
}

TEST(AccurateMean, ConstantSeriesIsExact) {
  for (double c : {0.1, 0.3, 0.7, 0.9999, 1.0 / 3.0}) {
    for (std::size_t n : {1u, 2u, 3u, 7u, 10u, 49u}) {
      std::vector<double> v(n, c);
      EXPECT_EQ(accurate_mean(v), c) << c << " x" << n;
    }
  }
}

TEST(AccurateMean, EmptyThrows) { EXPECT_THROW(accurate_mean(std::vector<double>{}), Error); }

TEST(AccurateMean, OrderIndependent) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(101);
  for (auto& x : v) x = u(rng);
  const double m = accurate_mean(v);
  for (int k = 0; k < 20; ++k) {
    std::shuffle(v.begin(), v.end(), rng);
    EXPECT_EQ(accurate_mean(v), m);
  }
}

TEST(Cosine, IdenticalVectorsGiveExactlyOne) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> v(1 + trial % 64);
    for (auto& x : v) x = u(rng);
    EXPECT_EQ(cosine_similarity(v, v), 1.0);
  }
}

TEST(Cosine, OrthogonalOppositeAndZero) {
  const std::vector<double> a{1, 0, 0}, b{0, 2, 0}, c{-3, 0, 0}, z{0, 0, 0};
  EXPECT_EQ(cosine_similarity(a, b), 0.0);
  EXPECT_EQ(cosine_similarity(a, c), -1.0);
  EXPECT_EQ(cosine_similarity(a, z), 0.0);
  EXPECT_THROW(cosine_similarity(a, std::vector<double>{1, 2}), Error);
}

TEST(ClampUnit, Bounds) {
  EXPECT_EQ(clamp_unit(-0.2), 0.0);
  EXPECT_EQ(clamp_unit(1.0000001), 1.0);
  EXPECT_EQ(clamp_unit(0.25), 0.25);
}

TEST(Sha256, KnownVectors) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  Sha256 h;
  h.update("a");
  h.update("bc");
  EXPECT_EQ(h.hex_digest(), sha256_hex("abc"));
}

TEST(Base64, RoundTripAllLengths) {
  std::string s;
  for (int n = 0; n < 40; ++n) {
    EXPECT_EQ(base64_decode(base64_encode(s)), s) << n;
    s.push_back(static_cast<char>(n * 37 + 1));
  }
  EXPECT_EQ(base64_encode("hi"), "aGk=");
}

TEST(Fnv1a, DeterministicAndSeeded) {
  EXPECT_EQ(fnv1a64("token"), fnv1a64("token"));
  EXPECT_NE(fnv1a64("token", 1), fnv1a64("token", 2));
  EXPECT_NE(fnv1a64("token"), fnv1a64("tokem"));
}
