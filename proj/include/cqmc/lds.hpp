#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>
#include <random>

#include "cqmc/matrix.hpp"

// Base-2 Sobol' nets with Matousek linear scrambling and a digital shift.
//
// Direction-number file layout (Joe & Kuo): one header line, then one row per
// dimension d >= 2 with whitespace-separated columns
//
//     d  s  a  m_1 ... m_s
//
// where s is the degree of the primitive polynomial, a encodes its interior
// coefficients (most significant bit first, leading and trailing 1 omitted) and
// m_k are the odd initial direction integers. Dimension 1 is the van der Corput
// sequence and has no row.

#ifndef CQMC_DIRECTION_FILE
#define CQMC_DIRECTION_FILE "data/new-joe-kuo-64.txt"
#endif

namespace cqmc {

inline constexpr int kBits = 32;
inline constexpr double kTwoPowMinus32 = 1.0 / 4294967296.0;

struct DirectionRow {
  unsigned dim = 0;
  unsigned degree = 0;
  std::uint32_t coeffs = 0;
  std::vector<std::uint32_t> m;
};

/// Rows for dimensions 2..(size()+1). Dimension 1 is implicit.
class DirectionTable {
 public:
  DirectionTable() = default;
  explicit DirectionTable(std::vector<DirectionRow> rows) : rows_(std::move(rows)) {}

  static DirectionTable parse(std::istream& in) {
    std::vector<DirectionRow> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::istringstream ls(line);
      std::string first;
      if (!(ls >> first)) continue;
      if (first.find_first_not_of("0123456789") != std::string::npos) continue;  // header
      DirectionRow r;
      r.dim = static_cast<unsigned>(std::stoul(first));
      if (!(ls >> r.degree >> r.coeffs))
        throw std::runtime_error("direction table: malformed row at line " + std::to_string(lineno));
      r.m.resize(r.degree);
      for (auto& mk : r.m)
        if (!(ls >> mk))
          throw std::runtime_error("direction table: too few m_k at line " + std::to_string(lineno));
      if (r.dim != rows.size() + 2)
        throw std::runtime_error("direction table: dimensions must be consecutive from 2 (line " +
                                 std::to_string(lineno) + ")");
      rows.push_back(std::move(r));
    }
    return DirectionTable(std::move(rows));
  }

  static DirectionTable load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open direction-number file: " + path);
    return parse(in);
  }

  /// The table shipped with the library (path fixed at build time).
  static const DirectionTable& bundled() {
    static const DirectionTable table = load(CQMC_DIRECTION_FILE);
    return table;
  }

  std::size_t max_dimension() const { return rows_.size() + 1; }
  const DirectionRow& row(std::size_t dim) const { return rows_.at(dim - 2); }

 private:
  std::vector<DirectionRow> rows_;
};

using DirectionVector = std::array<std::uint32_t, kBits>;

/// Unscrambled Sobol' net: direction integers for each of s coordinates.
class DigitalNet {
 public:
  DigitalNet(std::size_t dimension, const DirectionTable& table = DirectionTable::bundled())
      : dirs_(dimension) {
    if (dimension < 1 || dimension > 64)
      throw std::invalid_argument("DigitalNet: dimension must be in [1, 64]");
    if (dimension > table.max_dimension())
      throw std::out_of_range("DigitalNet: dimension " + std::to_string(dimension) +
                              " exceeds the direction table (max " +
                              std::to_string(table.max_dimension()) + ")");
    for (int k = 0; k < kBits; ++k) dirs_[0][k] = std::uint32_t{1} << (kBits - 1 - k);
    for (std::size_t j = 1; j < dimension; ++j) {
      const DirectionRow& r = table.row(j + 1);
      const unsigned s = r.degree;
      auto& v = dirs_[j];
      for (unsigned k = 0; k < s && k < kBits; ++k) v[k] = r.m[k] << (kBits - 1 - k);
      for (unsigned k = s; k < kBits; ++k) {
        v[k] = v[k - s] ^ (v[k - s] >> s);
        for (unsigned l = 1; l < s; ++l)
          if ((r.coeffs >> (s - 1 - l)) & 1u) v[k] ^= v[k - l];
      }
    }
  }

  std::size_t dimension() const { return dirs_.size(); }
  const DirectionVector& directions(std::size_t j) const { return dirs_[j]; }

  /// Integer coordinate j of point i in Gray-code order.
  std::uint32_t bits(std::uint64_t i, std::size_t j) const {
    std::uint64_t g = i ^ (i >> 1);
    std::uint32_t x = 0;
    for (int k = 0; g != 0; ++k, g >>= 1)
      if (g & 1u) x ^= dirs_[j][k];
    return x;
  }

  /// First 2^m points (Gray-code order), origin included unless skipped.
  Matrix points(unsigned m, bool skip_origin = false) const;

 private:
  std::vector<DirectionVector> dirs_;
};

/// Maps a 32-bit digit vector to (0,1), clamped away from the endpoints.
inline double to_unit(std::uint32_t x) {
  return std::clamp(static_cast<double>(x) * kTwoPowMinus32, kTwoPowMinus32, 1.0 - kTwoPowMinus32);
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct ScrambleSeed {
  std::uint64_t master = 0;
  std::uint64_t replicate = 0;

  /// 64-bit stream key; distinct per (master, replicate).
  std::uint64_t derive() const { return splitmix64(master ^ splitmix64(replicate)); }
};

/// Per-coordinate lower-triangular bit matrix (unit diagonal) plus digital shift.
/// rows[j][r] is the mask of row r: bit (31-r) is the diagonal, higher bits are
/// the strictly-lower entries acting on more significant digits.
struct LinearScramble {
  std::vector<DirectionVector> rows;
  std::vector<std::uint32_t> shift;

  static LinearScramble identity(std::size_t s) {
    LinearScramble ls{std::vector<DirectionVector>(s), std::vector<std::uint32_t>(s, 0)};
    for (auto& r : ls.rows)
      for (int k = 0; k < kBits; ++k) r[k] = std::uint32_t{1} << (kBits - 1 - k);
    return ls;
  }

  static LinearScramble random(std::size_t s, ScrambleSeed seed) {
    std::mt19937_64 rng(seed.derive());
    LinearScramble ls{std::vector<DirectionVector>(s), std::vector<std::uint32_t>(s)};
    for (std::size_t j = 0; j < s; ++j) {
      for (int r = 0; r < kBits; ++r) {
        const std::uint32_t diag = std::uint32_t{1} << (kBits - 1 - r);
        const std::uint32_t above = r == 0 ? 0u : ~std::uint32_t{0} << (kBits - r);
        ls.rows[j][r] = diag | (static_cast<std::uint32_t>(rng() >> 32) & above);
      }
      ls.shift[j] = static_cast<std::uint32_t>(rng() >> 32);
    }
    return ls;
  }

  /// L x (mod 2), without the shift.
  std::uint32_t linear(std::size_t j, std::uint32_t x) const {
    std::uint32_t y = 0;
    for (int r = 0; r < kBits; ++r)
      y |= static_cast<std::uint32_t>(std::popcount(rows[j][r] & x) & 1) << (kBits - 1 - r);
    return y;
  }

  std::uint32_t apply(std::size_t j, std::uint32_t x) const { return linear(j, x) ^ shift[j]; }
};

/// Sequential point stream over a (possibly scrambled) net in Gray-code order.
/// Scrambling is folded into the direction integers: L(C i) = (L C) i.
class SobolStream {
 public:
  explicit SobolStream(const DigitalNet& net)
      : SobolStream(net, LinearScramble::identity(net.dimension())) {}

  SobolStream(const DigitalNet& net, const LinearScramble& scramble)
      : dirs_(net.dimension()), shift_(scramble.shift), state_(net.dimension()) {
    for (std::size_t j = 0; j < net.dimension(); ++j)
      for (int k = 0; k < kBits; ++k) dirs_[j][k] = scramble.linear(j, net.directions(j)[k]);
    state_ = shift_;
  }

  SobolStream(const DigitalNet& net, ScrambleSeed seed)
      : SobolStream(net, LinearScramble::random(net.dimension(), seed)) {}

  std::size_t dimension() const { return dirs_.size(); }
  std::uint64_t index() const { return index_; }

  /// Writes the current point and advances.
  void next(std::span<double> out) {
    for (std::size_t j = 0; j < state_.size(); ++j) out[j] = to_unit(state_[j]);
    advance();
  }

  void next_bits(std::span<std::uint32_t> out) {
    std::copy(state_.begin(), state_.end(), out.begin());
    advance();
  }

  void skip(std::uint64_t count) {
    for (std::uint64_t c = 0; c < count; ++c) advance();
  }

 private:
  void advance() {
    ++index_;
    if (index_ >= (std::uint64_t{1} << kBits)) throw std::out_of_range("SobolStream exhausted");
    const int c = std::countr_zero(index_);
    for (std::size_t j = 0; j < state_.size(); ++j) state_[j] ^= dirs_[j][c];
  }

  std::vector<DirectionVector> dirs_;
  std::vector<std::uint32_t> shift_;
  std::vector<std::uint32_t> state_;
  std::uint64_t index_ = 0;
};

inline Matrix DigitalNet::points(unsigned m, bool skip_origin) const {
  if (m > 20) throw std::invalid_argument("DigitalNet::points: m must be <= 20");
  const std::size_t n = std::size_t{1} << m;
  Matrix pts(n, dimension());
  SobolStream stream(*this);
  if (skip_origin) stream.skip(1);
  for (std::size_t i = 0; i < n; ++i) {
    // Unscrambled coordinates are k / 2^32 exactly; the origin stays at 0.
    std::vector<std::uint32_t> b(dimension());
    stream.next_bits(b);
    for (std::size_t j = 0; j < dimension(); ++j) pts(i, j) = static_cast<double>(b[j]) * kTwoPowMinus32;
  }
  return pts;
}

/// First 2^m scrambled points as a matrix (test and diagnostic helper).
inline Matrix scrambled_points(const DigitalNet& net, ScrambleSeed seed, unsigned m) {
  const std::size_t n = std::size_t{1} << m;
  Matrix pts(n, net.dimension());
  SobolStream stream(net, seed);
  for (std::size_t i = 0; i < n; ++i) stream.next(pts.row(i));
  return pts;
}

/// Occupancy of the dyadic grid with 2^exponents[j] cells on axis j.
/// Cells are indexed row-major with axis 0 most significant.
inline std::vector<std::size_t> elementary_interval_counts(const Matrix& points,
                                                           std::span<const unsigned> exponents) {
  if (exponents.size() != points.cols() && points.rows() > 0)
    throw std::invalid_argument("elementary_interval_counts: one exponent per axis required");
  std::size_t total = 0;
  for (unsigned e : exponents) total += e;
  if (total > 30) throw std::invalid_argument("elementary_interval_counts: grid too fine");
  std::vector<std::size_t> counts(std::size_t{1} << total, 0);
  for (std::size_t i = 0; i < points.rows(); ++i) {
    std::size_t cell = 0;
    for (std::size_t j = 0; j < exponents.size(); ++j) {
      const std::size_t cells = std::size_t{1} << exponents[j];
      auto c = static_cast<std::size_t>(points(i, j) * static_cast<double>(cells));
      cell = (cell << exponents[j]) | std::min(c, cells - 1);
    }
    ++counts[cell];
  }
  return counts;
}

}  // namespace cqmc
