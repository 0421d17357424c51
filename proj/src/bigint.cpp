#include "ctxeq/bigint.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

namespace ctxeq {

BigInt::BigInt(int64_t v) {
  neg_ = v < 0;
  uint64_t m = neg_ ? (~static_cast<uint64_t>(v) + 1) : static_cast<uint64_t>(v);
  while (m) {
    limbs_.push_back(static_cast<uint32_t>(m & 0xffffffffu));
    m >>= 32;
  }
}

BigInt BigInt::from_string(const std::string& s) {
  size_t i = 0;
  bool neg = false;
  if (i < s.size() && (s[i] == '-' || s[i] == '+')) {
    neg = s[i] == '-';
    ++i;
  }
  if (i >= s.size()) throw std::invalid_argument("BigInt: empty numeral");
  BigInt r;
  for (; i < s.size(); ++i) {
    if (s[i] < '0' || s[i] > '9') throw std::invalid_argument("BigInt: bad digit");
    r = r * BigInt(10) + BigInt(s[i] - '0');
  }
  r.neg_ = neg && !r.is_zero();
  return r;
}

void BigInt::trim() {
  while (!limbs_.empty() && limbs_.back() == 0) limbs_.pop_back();
  if (limbs_.empty()) neg_ = false;
}

int BigInt::cmp_mag(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
  if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
  for (size_t i = a.size(); i-- > 0;)
    if (a[i] != b[i]) return a[i] < b[i] ? -1 : 1;
  return 0;
}

std::vector<uint32_t> BigInt::add_mag(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
  std::vector<uint32_t> r;
  r.reserve(std::max(a.size(), b.size()) + 1);
  uint64_t carry = 0;
  for (size_t i = 0; i < std::max(a.size(), b.size()); ++i) {
    uint64_t s = carry;
    if (i < a.size()) s += a[i];
    if (i < b.size()) s += b[i];
    r.push_back(static_cast<uint32_t>(s & 0xffffffffu));
    carry = s >> 32;
  }
  if (carry) r.push_back(static_cast<uint32_t>(carry));
  return r;
}

std::vector<uint32_t> BigInt::sub_mag(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
  std::vector<uint32_t> r;
  r.reserve(a.size());
  int64_t borrow = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    int64_t s = static_cast<int64_t>(a[i]) - borrow - (i < b.size() ? b[i] : 0);
    if (s < 0) {
      s += (1ll << 32);
      borrow = 1;
    } else {
      borrow = 0;
    }
    r.push_back(static_cast<uint32_t>(s));
  }
  assert(borrow == 0);
  while (!r.empty() && r.back() == 0) r.pop_back();
  return r;
}

std::vector<uint32_t> BigInt::mul_mag(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
  if (a.empty() || b.empty()) return {};
  std::vector<uint32_t> r(a.size() + b.size(), 0);
  for (size_t i = 0; i < a.size(); ++i) {
    uint64_t carry = 0;
    for (size_t j = 0; j < b.size(); ++j) {
      uint64_t cur = r[i + j] + static_cast<uint64_t>(a[i]) * b[j] + carry;
      r[i + j] = static_cast<uint32_t>(cur & 0xffffffffu);
      carry = cur >> 32;
    }
    size_t k = i + b.size();
    while (carry) {
      uint64_t cur = r[k] + carry;
      r[k] = static_cast<uint32_t>(cur & 0xffffffffu);
      carry = cur >> 32;
      ++k;
    }
  }
  while (!r.empty() && r.back() == 0) r.pop_back();
  return r;
}

// Schoolbook long division on magnitudes, one output limb per step.
void BigInt::divmod_mag(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b,
                        std::vector<uint32_t>& q, std::vector<uint32_t>& r) {
  assert(!b.empty());
  q.assign(a.size(), 0);
  r.clear();
  for (size_t i = a.size(); i-- > 0;) {
    r.insert(r.begin(), a[i]);
    while (!r.empty() && r.back() == 0) r.pop_back();
    if (cmp_mag(r, b) < 0) continue;
    // binary search the quotient limb
    uint64_t lo = 1, hi = 0xffffffffu, best = 0;
    while (lo <= hi) {
      uint64_t mid = lo + (hi - lo) / 2;
      std::vector<uint32_t> t = mul_mag(b, {static_cast<uint32_t>(mid & 0xffffffffu),
                                            static_cast<uint32_t>(mid >> 32)});
      while (!t.empty() && t.back() == 0) t.pop_back();
      if (cmp_mag(t, r) <= 0) {
        best = mid;
        lo = mid + 1;
      } else {
        hi = mid - 1;
      }
    }
    q[i] = static_cast<uint32_t>(best);
    std::vector<uint32_t> t = mul_mag(b, {q[i]});
    r = sub_mag(r, t);
  }
  while (!q.empty() && q.back() == 0) q.pop_back();
}

BigInt BigInt::operator-() const {
  BigInt r = *this;
  if (!r.is_zero()) r.neg_ = !r.neg_;
  return r;
}

BigInt BigInt::operator+(const BigInt& o) const {
  BigInt r;
  if (neg_ == o.neg_) {
    r.limbs_ = add_mag(limbs_, o.limbs_);
    r.neg_ = neg_;
  } else {
    int c = cmp_mag(limbs_, o.limbs_);
    if (c == 0) return BigInt();
    if (c > 0) {
      r.limbs_ = sub_mag(limbs_, o.limbs_);
      r.neg_ = neg_;
    } else {
      r.limbs_ = sub_mag(o.limbs_, limbs_);
      r.neg_ = o.neg_;
    }
  }
  r.trim();
  return r;
}

BigInt BigInt::operator-(const BigInt& o) const { return *this + (-o); }

BigInt BigInt::operator*(const BigInt& o) const {
  BigInt r;
  r.limbs_ = mul_mag(limbs_, o.limbs_);
  r.neg_ = !r.limbs_.empty() && (neg_ != o.neg_);
  return r;
}

void BigInt::divmod_trunc(const BigInt& a, const BigInt& b, BigInt& q, BigInt& r) {
  if (b.is_zero()) throw std::domain_error("BigInt: division by zero");
  std::vector<uint32_t> qm, rm;
  divmod_mag(a.limbs_, b.limbs_, qm, rm);
  q.limbs_ = std::move(qm);
  q.neg_ = !q.limbs_.empty() && (a.neg_ != b.neg_);
  r.limbs_ = std::move(rm);
  r.neg_ = !r.limbs_.empty() && a.neg_;
  q.trim();
  r.trim();
}

void BigInt::divmod_euclid(const BigInt& a, const BigInt& b, BigInt& q, BigInt& r) {
  divmod_trunc(a, b, q, r);
  if (r.is_negative()) {
    if (b.is_negative()) {
      q = q + BigInt(1);
      r = r - b;
    } else {
      q = q - BigInt(1);
      r = r + b;
    }
  }
}

BigInt BigInt::div_euclid(const BigInt& o) const {
  BigInt q, r;
  divmod_euclid(*this, o, q, r);
  return q;
}

BigInt BigInt::mod_euclid(const BigInt& o) const {
  BigInt q, r;
  divmod_euclid(*this, o, q, r);
  return r;
}

BigInt BigInt::gcd(BigInt a, BigInt b) {
  a = a.abs();
  b = b.abs();
  while (!b.is_zero()) {
    BigInt q, r;
    divmod_trunc(a, b, q, r);
    a = b;
    b = r.abs();
  }
  return a;
}

BigInt BigInt::lcm(const BigInt& a, const BigInt& b) {
  if (a.is_zero() || b.is_zero()) return BigInt();
  BigInt g = gcd(a, b);
  BigInt q, r;
  divmod_trunc(a * b, g, q, r);
  return q.abs();
}

BigInt BigInt::abs() const {
  BigInt r = *this;
  r.neg_ = false;
  return r;
}

int BigInt::compare(const BigInt& o) const {
  if (neg_ != o.neg_ && !(is_zero() && o.is_zero())) return neg_ ? -1 : 1;
  int c = cmp_mag(limbs_, o.limbs_);
  return neg_ ? -c : c;
}

bool BigInt::fits_int64() const {
  if (limbs_.size() > 2) return false;
  uint64_t m = 0;
  for (size_t i = 0; i < limbs_.size(); ++i) m |= static_cast<uint64_t>(limbs_[i]) << (32 * i);
  return neg_ ? m <= (1ull << 63) : m < (1ull << 63);
}

int64_t BigInt::to_int64() const {
  uint64_t m = 0;
  for (size_t i = 0; i < limbs_.size(); ++i) m |= static_cast<uint64_t>(limbs_[i]) << (32 * i);
  return neg_ ? -static_cast<int64_t>(m) : static_cast<int64_t>(m);
}

std::string BigInt::to_string() const {
  if (is_zero()) return "0";
  std::string digits;
  std::vector<uint32_t> m = limbs_;
  while (!m.empty()) {
    std::vector<uint32_t> q, r;
    divmod_mag(m, {10}, q, r);
    digits.push_back(static_cast<char>('0' + (r.empty() ? 0 : r[0])));
    m = q;
  }
  if (neg_) digits.push_back('-');
  std::reverse(digits.begin(), digits.end());
  return digits;
}

size_t BigInt::hash() const {
  size_t h = neg_ ? 0x9e3779b97f4a7c15ull : 0;
  for (uint32_t l : limbs_) h = h * 1000003ull + l;
  return h;
}

}  // namespace ctxeq
