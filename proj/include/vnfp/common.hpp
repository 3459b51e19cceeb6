#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <cmath>
#include <stdexcept>
#include <string>

namespace vnfp {

using NodeId = int;
// Directed link index. Cable c owns links 2c (a->b) and 2c+1 (b->a).
using LinkId = int;
using CableId = int;
using DemandId = int;
using InstanceId = int;

inline constexpr CableId cable_of(LinkId l) { return l / 2; }
inline constexpr LinkId reverse_link(LinkId l) { return l ^ 1; }

// Bandwidth in whole kb/s. Integer storage keeps allocate/release exact
// inverses and makes threshold comparisons against beta levels exact.
struct Bandwidth {
  std::int64_t kbps = 0;

  static Bandwidth from_mbps(double mbps) {
    return Bandwidth{static_cast<std::int64_t>(std::llround(mbps * 1000.0))};
  }
  static constexpr Bandwidth from_kbps(std::int64_t v) { return Bandwidth{v}; }

  double mbps() const { return static_cast<double>(kbps) / 1000.0; }

  friend constexpr auto operator<=>(Bandwidth, Bandwidth) = default;
  friend constexpr Bandwidth operator+(Bandwidth a, Bandwidth b) { return {a.kbps + b.kbps}; }
  friend constexpr Bandwidth operator-(Bandwidth a, Bandwidth b) { return {a.kbps - b.kbps}; }
  friend constexpr Bandwidth operator*(Bandwidth a, std::int64_t k) { return {a.kbps * k}; }
  constexpr Bandwidth& operator+=(Bandwidth b) { kbps += b.kbps; return *this; }
  constexpr Bandwidth& operator-=(Bandwidth b) { kbps -= b.kbps; return *this; }
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text. line() is 1-based, 0 when not tied to a line.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

// An allocation that would violate a capacity, delay or structural rule.
class AllocationError : public Error {
 public:
  using Error::Error;
};

}  // namespace vnfp
