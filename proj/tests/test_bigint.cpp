#include <doctest.h>

#include <random>

#include "ctxeq/bigint.hpp"

using namespace ctxeq;

TEST_CASE("small arithmetic agrees with int64") {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int64_t> d(-1000000, 1000000);
  for (int i = 0; i < 2000; ++i) {
    int64_t a = d(rng), b = d(rng);
    CHECK(BigInt(a + b) == BigInt(a) + BigInt(b));
    CHECK(BigInt(a - b) == BigInt(a) - BigInt(b));
    CHECK(BigInt(a * b) == BigInt(a) * BigInt(b));
    CHECK((BigInt(a) < BigInt(b)) == (a < b));
  }
}

TEST_CASE("string round trip") {
  for (const char* s : {"0", "1", "-1", "123456789012345678901234567890", "-987654321987654321"}) {
    CHECK(BigInt::from_string(s).to_string() == s);
  }
}

TEST_CASE("euclidean division invariants") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int64_t> d(-500, 500);
  for (int i = 0; i < 5000; ++i) {
    int64_t a = d(rng), b = d(rng);
    if (b == 0) continue;
    BigInt q, r;
    BigInt::divmod_euclid(BigInt(a), BigInt(b), q, r);
    CHECK(BigInt(a) == q * BigInt(b) + r);
    CHECK(r >= BigInt(0));
    CHECK(r < BigInt(b).abs());
  }
}

TEST_CASE("euclidean mod matches the SMT-LIB convention") {
  CHECK(BigInt(-3).mod_euclid(BigInt(2)) == BigInt(1));
  CHECK(BigInt(-3).div_euclid(BigInt(2)) == BigInt(-2));
  CHECK(BigInt(7).mod_euclid(BigInt(-3)) == BigInt(1));
  CHECK(BigInt(7).div_euclid(BigInt(-3)) == BigInt(-2));
}

TEST_CASE("gcd lcm") {
  CHECK(BigInt::gcd(BigInt(12), BigInt(18)) == BigInt(6));
  CHECK(BigInt::lcm(BigInt(4), BigInt(6)) == BigInt(12));
  CHECK(BigInt::gcd(BigInt(0), BigInt(5)) == BigInt(5));
}

TEST_CASE("large multiplication") {
  BigInt a = BigInt::from_string("123456789123456789123456789");
  BigInt b = BigInt::from_string("987654321987654321");
  CHECK((a * b).to_string() == "121932631356500531469135800347203169112635269");
}
