#pragma once

#include <cstdint>
#include <string>
#include <vector>
#include <functional>

namespace ctxeq {

// Arbitrary-precision signed integer. Sign-magnitude, base 2^32 limbs,
// little-endian. Only the operations the checker needs.
class BigInt {
public:
  BigInt() = default;
  BigInt(int64_t v);
  static BigInt from_string(const std::string& s);  // [-]digits

  bool is_zero() const { return limbs_.empty(); }
  bool is_negative() const { return neg_; }
  int sign() const { return is_zero() ? 0 : (neg_ ? -1 : 1); }

  BigInt operator-() const;
  BigInt operator+(const BigInt& o) const;
  BigInt operator-(const BigInt& o) const;
  BigInt operator*(const BigInt& o) const;

  // Truncated division (C-style), rounds toward zero.
  static void divmod_trunc(const BigInt& a, const BigInt& b, BigInt& q, BigInt& r);
  // Euclidean division: remainder in [0, |b|). Matches SMT-LIB div/mod.
  static void divmod_euclid(const BigInt& a, const BigInt& b, BigInt& q, BigInt& r);
  BigInt div_euclid(const BigInt& o) const;
  BigInt mod_euclid(const BigInt& o) const;

  static BigInt gcd(BigInt a, BigInt b);
  static BigInt lcm(const BigInt& a, const BigInt& b);
  BigInt abs() const;

  int compare(const BigInt& o) const;  // -1, 0, 1
  bool operator==(const BigInt& o) const { return compare(o) == 0; }
  bool operator!=(const BigInt& o) const { return compare(o) != 0; }
  bool operator<(const BigInt& o) const { return compare(o) < 0; }
  bool operator<=(const BigInt& o) const { return compare(o) <= 0; }
  bool operator>(const BigInt& o) const { return compare(o) > 0; }
  bool operator>=(const BigInt& o) const { return compare(o) >= 0; }

  bool fits_int64() const;
  int64_t to_int64() const;  // precondition: fits_int64()
  std::string to_string() const;
  size_t hash() const;
  // Number of limbs; used as a crude size guard by the LIA procedure.
  size_t width() const { return limbs_.size(); }

private:
  bool neg_ = false;                 // ignored when limbs_ empty (zero)
  std::vector<uint32_t> limbs_;      // little-endian, no trailing zeros

  void trim();
  static int cmp_mag(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b);
  static std::vector<uint32_t> add_mag(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b);
  static std::vector<uint32_t> sub_mag(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b);  // a >= b
  static std::vector<uint32_t> mul_mag(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b);
  static void divmod_mag(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b,
                         std::vector<uint32_t>& q, std::vector<uint32_t>& r);
};

}  // namespace ctxeq

template <>
struct std::hash<ctxeq::BigInt> {
  size_t operator()(const ctxeq::BigInt& v) const { return v.hash(); }
};
