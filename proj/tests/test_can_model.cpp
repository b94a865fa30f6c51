#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <vector>

#include "cand/can_model.hpp"
#include "cand/rng.hpp"

using namespace cand;

TEST_CASE("ordering_sequence big endian is the identity") {
  const auto seq = ordering_sequence(Endianness::Big);
  for (int i = 0; i < kPayloadBits; ++i) REQUIRE(seq[i] == i);
}

TEST_CASE("ordering_sequence little endian walks bytes 7 down to 0") {
  const auto seq = ordering_sequence(Endianness::Little);
  std::array<int, kPayloadBits> expected{};
  int pos = 0;
  for (int byte = 7; byte >= 0; --byte)
    for (int bit = 0; bit < 8; ++bit) expected[pos++] = byte * 8 + bit;
  REQUIRE(std::equal(seq.begin(), seq.end(), expected.begin()));
  REQUIRE(seq[0] == 56);
  REQUIRE(seq[7] == 63);
  REQUIRE(seq[8] == 48);
  REQUIRE(seq[63] == 7);
}

TEST_CASE("successor matches documented examples") {
  REQUIRE(successor(14, Endianness::Big) == 15);
  REQUIRE_FALSE(successor(63, Endianness::Big).has_value());
  REQUIRE(successor(15, Endianness::Little) == 0);  // B15 -> B0
  REQUIRE_FALSE(successor(7, Endianness::Little).has_value());
}

TEST_CASE("successor and predecessor agree with the full sequences") {
  for (Endianness e : {Endianness::Big, Endianness::Little}) {
    const auto seq = ordering_sequence(e);
    for (int k = 0; k < kPayloadBits; ++k) {
      const auto next = successor(seq[k], e);
      if (k + 1 < kPayloadBits) {
        REQUIRE(next.has_value());
        REQUIRE(*next == seq[k + 1]);
        const auto prev = predecessor(seq[k + 1], e);
        REQUIRE(prev.has_value());
        REQUIRE(*prev == seq[k]);
      } else {
        REQUIRE_FALSE(next.has_value());
      }
    }
    REQUIRE_FALSE(predecessor(seq[0], e).has_value());
  }
}

TEST_CASE("big/little position map is an involution swapping byte blocks") {
  const auto little = ordering_sequence(Endianness::Little);
  // m(b) = bit sitting at b's little-endian sequence position
  std::array<int, kPayloadBits> m{};
  for (int pos = 0; pos < kPayloadBits; ++pos) m[pos] = little[pos];
  for (int b = 0; b < kPayloadBits; ++b) {
    const int byte = b / 8;
    const int offset = b % 8;
    REQUIRE(m[b] == 8 * (7 - byte) + offset);  // byte blocks swapped
    REQUIRE(m[m[b]] == b);                     // involution
  }
}

TEST_CASE("pad_payload expands bytes MSB-first and zero fills") {
  {
    const std::uint8_t bytes[] = {0xFF};
    const PayloadBits p = pad_payload({bytes, 1});
    for (int i = 0; i < 8; ++i) REQUIRE(payload_bit(p, i) == 1);
    for (int i = 8; i < 64; ++i) REQUIRE(payload_bit(p, i) == 0);
  }
  {
    const PayloadBits p = pad_payload({});
    REQUIRE(p == 0);
  }
  {
    const std::uint8_t bytes[] = {0x80, 0x01};
    const PayloadBits p = pad_payload({bytes, 2});
    REQUIRE(payload_bit(p, 0) == 1);
    REQUIRE(payload_bit(p, 15) == 1);
    int ones = 0;
    for (int i = 0; i < 64; ++i) ones += payload_bit(p, i);
    REQUIRE(ones == 2);
  }
}

TEST_CASE("pad_payload rejects more than 8 bytes") {
  const std::uint8_t bytes[9] = {};
  REQUIRE_THROWS_AS(pad_payload({bytes, 9}), ParseError);
}

TEST_CASE("pad_payload preserves original bytes bit-exactly") {
  SplitMix64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = static_cast<int>(rng.next_below(9));
    std::vector<std::uint8_t> bytes(n);
    for (auto& b : bytes) b = static_cast<std::uint8_t>(rng.next_below(256));
    const PayloadBits p = pad_payload(bytes);
    for (int k = 0; k < n; ++k)
      for (int bit = 0; bit < 8; ++bit)
        REQUIRE(payload_bit(p, 8 * k + bit) == ((bytes[k] >> (7 - bit)) & 1));
    for (int i = 8 * n; i < 64; ++i) REQUIRE(payload_bit(p, i) == 0);
  }
}

TEST_CASE("make_spec walks the requested ordering") {
  const SignalSpec big = make_spec(0, 16, Endianness::Big);
  REQUIRE(big.bit_indices.front() == 0);
  REQUIRE(big.bit_indices.back() == 15);
  REQUIRE(spec_valid_under(big, Endianness::Big));

  const SignalSpec little = make_spec(8, 16, Endianness::Little);
  std::vector<int> expected;
  for (int i = 8; i <= 15; ++i) expected.push_back(i);
  for (int i = 0; i <= 7; ++i) expected.push_back(i);
  REQUIRE(little.bit_indices == expected);
  REQUIRE(spec_valid_under(little, Endianness::Little));
  REQUIRE_FALSE(spec_valid_under(little, Endianness::Big));
  REQUIRE(little.multi_byte());

  REQUIRE_THROWS_AS(make_spec(60, 8, Endianness::Big), ValidationError);
  REQUIRE_THROWS_AS(make_spec(4, 8, Endianness::Little), ValidationError);
}
