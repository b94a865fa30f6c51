#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cand/can_model.hpp"
#include "cand/rng.hpp"

namespace cand::test {

/// Trace whose timestamps tick at 10 ms from the given rows.
inline IdTrace trace_from_rows(const std::vector<PayloadBits>& rows,
                               std::uint32_t id = 0x123) {
  IdTrace t;
  t.arbitration_id = id;
  t.rows = rows;
  t.max_length = 8;
  for (std::size_t k = 0; k < rows.size(); ++k)
    t.timestamps.push_back(0.01 * static_cast<double>(k));
  return t;
}

/// Trace built from explicit per-bit columns: columns[i] drives bit
/// bit_positions[i]; everything else is zero.
inline IdTrace trace_from_columns(const std::vector<int>& bit_positions,
                                  const std::vector<std::vector<int>>& columns,
                                  std::uint32_t id = 0x123) {
  const std::size_t n = columns.empty() ? 0 : columns[0].size();
  std::vector<PayloadBits> rows(n, 0);
  for (std::size_t c = 0; c < columns.size(); ++c)
    for (std::size_t r = 0; r < n; ++r)
      rows[r] = with_payload_bit(rows[r], bit_positions[c], columns[c][r]);
  return trace_from_rows(rows, id);
}

/// Unit-increment counter of `width` bits placed with MSB at `msb_bit`
/// (big endian placement), n frames.
inline IdTrace counter_trace(int msb_bit, int width, std::size_t n,
                             std::uint32_t id = 0x123) {
  std::vector<PayloadBits> rows(n, 0);
  for (std::size_t k = 0; k < n; ++k) {
    const std::uint64_t v = k & ((std::uint64_t{1} << width) - 1);
    for (int b = 0; b < width; ++b) {
      const int bit_value = static_cast<int>(v >> (width - 1 - b) & 1u);
      rows[k] = with_payload_bit(rows[k], msb_bit + b, bit_value);
    }
  }
  return trace_from_rows(rows, id);
}

}  // namespace cand::test
