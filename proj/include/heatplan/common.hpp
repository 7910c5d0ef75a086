#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace heatplan {

// Integer grid coordinate. x is the column, y the row (row 0 is the first PGM row).
struct Cell {
  int x = 0;
  int y = 0;

  friend bool operator==(const Cell&, const Cell&) = default;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

// Continuous position in cell units; cell (i, j) has its center at (i, j).
struct State {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const State&, const State&) = default;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Vec2&, const Vec2&) = default;
  Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  friend Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
  friend Vec2 operator-(const Vec2& a, const Vec2& b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, const Vec2& v) { return {s * v.x, s * v.y}; }
  double norm() const { return std::hypot(x, y); }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
};

inline State operator+(const State& s, const Vec2& d) { return {s.x + d.x, s.y + d.y}; }
inline Vec2 operator-(const State& a, const State& b) { return {a.x - b.x, a.y - b.y}; }

// Cell containing a continuous state (nearest cell center).
inline Cell cell_of(const State& s) {
  return {static_cast<int>(std::floor(s.x + 0.5)), static_cast<int>(std::floor(s.y + 0.5))};
}

inline State center_of(const Cell& c) { return {static_cast<double>(c.x), static_cast<double>(c.y)}; }

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class InfeasibleConfig : public Error {
 public:
  using Error::Error;
};

// Order-sensitive 64-bit mix used for seed derivation.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t hash64(std::uint64_t a, std::uint64_t b);
std::uint64_t hash64(std::uint64_t a, std::uint64_t b, std::uint64_t c);

// Counter-based stream: the i-th draw is splitmix64(seed + i * golden).
// Bit-identical on every platform, unlike the std:: distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();
  // Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [lo, hi] (inclusive).
  int uniform_int(int lo, int hi);
  bool bernoulli(double p) { return uniform() < p; }
  double normal();
  Vec2 normal2() { return {normal(), normal()}; }

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace heatplan
