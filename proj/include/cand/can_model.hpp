#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cand/errors.hpp"

namespace cand {

/// Byte order of a multi-byte signal. Bits within a byte always run
/// MSB-first; endianness decides how bytes chain together.
enum class Endianness : std::uint8_t { Big, Little };

constexpr int kPayloadBits = 64;
constexpr int kPayloadBytes = 8;

/// Bit index convention used throughout: bit 0 is the most significant bit
/// of byte 0 (the first transmitted bit); bit 63 is the least significant
/// bit of byte 7. Byte j holds bits [8j, 8j+7].
constexpr int byte_of_bit(int i) { return i >> 3; }

/// MSB-first traversal order of the 64 payload bits under ordering `e`.
/// Big:    0,1,...,63
/// Little: 56,...,63, 48,...,55, ..., 0,...,7
inline std::array<int, kPayloadBits> ordering_sequence(Endianness e) {
  std::array<int, kPayloadBits> seq{};
  if (e == Endianness::Big) {
    for (int i = 0; i < kPayloadBits; ++i) seq[i] = i;
  } else {
    int pos = 0;
    for (int byte = kPayloadBytes - 1; byte >= 0; --byte)
      for (int bit = 0; bit < 8; ++bit) seq[pos++] = byte * 8 + bit;
  }
  return seq;
}

/// Bit following `i` in ordering_sequence(e); nullopt past the end
/// (bit 63 under Big, bit 7 under Little).
inline std::optional<int> successor(int i, Endianness e) {
  if ((i & 7) != 7) return i + 1;  // within a byte both orderings agree
  if (e == Endianness::Big) {
    if (i == 63) return std::nullopt;
    return i + 1;
  }
  if (i == 7) return std::nullopt;
  return i - 15;  // e.g. 15 -> 0: next byte down, MSB side
}

/// Bit preceding `i` in ordering_sequence(e); nullopt at the start.
inline std::optional<int> predecessor(int i, Endianness e) {
  if ((i & 7) != 0) return i - 1;
  if (e == Endianness::Big) {
    if (i == 0) return std::nullopt;
    return i - 1;
  }
  if (i == 56) return std::nullopt;
  return i + 15;  // e.g. 0 -> 15
}

/// 64-bit payload stored MSB-of-byte-0-first: bit i of the payload is
/// (word >> (63 - i)) & 1. XOR of two payloads exposes flips directly.
using PayloadBits = std::uint64_t;

inline int payload_bit(PayloadBits p, int i) {
  return static_cast<int>((p >> (63 - i)) & 1u);
}

inline PayloadBits with_payload_bit(PayloadBits p, int i, int value) {
  const PayloadBits mask = PayloadBits{1} << (63 - i);
  return value ? (p | mask) : (p & ~mask);
}

/// Expand up to 8 raw bytes MSB-first and zero-fill to 64 bits.
inline PayloadBits pad_payload(std::span<const std::uint8_t> bytes) {
  if (bytes.size() > kPayloadBytes)
    throw ParseError("malformed frame: payload longer than 8 bytes");
  PayloadBits p = 0;
  for (std::size_t k = 0; k < bytes.size(); ++k)
    p |= static_cast<PayloadBits>(bytes[k]) << (8 * (7 - k));
  return p;
}

/// One timestamped CAN packet.
struct CanFrame {
  double timestamp = 0.0;        // seconds
  std::uint32_t arbitration_id = 0;
  bool extended_id = false;      // 29-bit id; carried through opaquely
  PayloadBits payload = 0;
  int original_length = 0;       // byte count before zero-padding, 0..8

  friend bool operator==(const CanFrame&, const CanFrame&) = default;
};

/// Per-ID time series of padded payloads: an n x 64 bit matrix.
/// Timestamps are non-decreasing; duplicates are kept in arrival order and
/// treated as consecutive samples by all flip statistics.
struct IdTrace {
  std::uint32_t arbitration_id = 0;
  bool extended_id = false;
  std::vector<double> timestamps;
  std::vector<PayloadBits> rows;
  int max_length = 0;  // largest original_length observed

  std::size_t size() const { return rows.size(); }
  int bit(std::size_t row, int i) const { return payload_bit(rows[row], i); }

  /// True when column i never changes over the whole trace.
  bool is_constant_bit(int i) const {
    if (rows.empty()) return true;
    const int v = payload_bit(rows.front(), i);
    for (const PayloadBits r : rows)
      if (payload_bit(r, i) != v) return false;
    return true;
  }

  std::array<bool, kPayloadBits> constant_mask() const {
    std::array<bool, kPayloadBits> mask{};
    for (int i = 0; i < kPayloadBits; ++i) mask[i] = is_constant_bit(i);
    return mask;
  }
};

/// A candidate signal: its bit indices ordered MSB to LSB. Consecutive
/// indices must be adjacent under a single ordering of the two above.
struct SignalSpec {
  std::vector<int> bit_indices;

  int msb() const { return bit_indices.front(); }
  int lsb() const { return bit_indices.back(); }
  int length() const { return static_cast<int>(bit_indices.size()); }

  /// True when some pair of consecutive indices crosses a byte boundary.
  bool multi_byte() const {
    return byte_of_bit(bit_indices.front()) != byte_of_bit(bit_indices.back()) ||
           [this] {
             for (std::size_t k = 1; k < bit_indices.size(); ++k)
               if (byte_of_bit(bit_indices[k]) != byte_of_bit(bit_indices[k - 1]))
                 return true;
             return false;
           }();
  }

  friend bool operator==(const SignalSpec&, const SignalSpec&) = default;
};

/// Validate a SignalSpec against an ordering: indices in range, distinct,
/// and each consecutive pair adjacent under `e`.
inline bool spec_valid_under(const SignalSpec& s, Endianness e) {
  if (s.bit_indices.empty()) return false;
  std::array<bool, kPayloadBits> seen{};
  for (int i : s.bit_indices) {
    if (i < 0 || i >= kPayloadBits || seen[i]) return false;
    seen[i] = true;
  }
  for (std::size_t k = 1; k < s.bit_indices.size(); ++k) {
    const auto nxt = successor(s.bit_indices[k - 1], e);
    if (!nxt || *nxt != s.bit_indices[k]) return false;
  }
  return true;
}

/// Build the spec starting at `msb` and walking `length` bits under `e`.
inline SignalSpec make_spec(int msb, int length, Endianness e) {
  SignalSpec s;
  s.bit_indices.reserve(static_cast<std::size_t>(length));
  int cur = msb;
  for (int k = 0; k < length; ++k) {
    s.bit_indices.push_back(cur);
    if (k + 1 < length) {
      const auto nxt = successor(cur, e);
      if (!nxt)
        throw ValidationError("signal of length " + std::to_string(length) +
                              " starting at bit " + std::to_string(msb) +
                              " runs past the payload");
      cur = *nxt;
    }
  }
  return s;
}

inline const char* to_string(Endianness e) {
  return e == Endianness::Big ? "big" : "little";
}

}  // namespace cand
