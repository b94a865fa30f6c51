#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "cand/interpret.hpp"
#include "cand/rng.hpp"
#include "test_util.hpp"

using namespace cand;

TEST_CASE("translate handles two's complement and byte swaps") {
  // 4-bit all-ones at bits 0..3
  IdTrace t = cand::test::trace_from_rows({0xF000000000000000ULL, 0});
  const SignalSpec four = make_spec(0, 4, Endianness::Big);
  REQUIRE(translate(t, four, Endianness::Big, true).values[0] == -1.0);
  REQUIRE(translate(t, four, Endianness::Big, false).values[0] == 15.0);
  REQUIRE(translate(t, four, Endianness::Big, false).values[1] == 0.0);

  // little endian 16-bit over bytes 0-1 with byte0=0x01 byte1=0x02
  const std::uint8_t bytes[] = {0x01, 0x02};
  IdTrace lt = cand::test::trace_from_rows({pad_payload({bytes, 2}), 0});
  const SignalSpec sixteen = make_spec(8, 16, Endianness::Little);
  REQUIRE(translate(lt, sixteen, Endianness::Little, false).values[0] == 513.0);
}

TEST_CASE("translate round trips every raw value for small widths") {
  for (const int L : {1, 5, 8, 12}) {
    for (const Endianness e : {Endianness::Big, Endianness::Little}) {
      const int msb = e == Endianness::Big ? 3 : 11;  // cross a byte boundary
      SignalSpec spec;
      try {
        spec = make_spec(msb, L, e);
      } catch (const ValidationError&) {
        continue;
      }
      for (const bool is_signed : {false, true}) {
        if (is_signed && L <= 2) continue;
        for (std::uint64_t raw = 0; raw < (std::uint64_t{1} << L); ++raw) {
          PayloadBits p = 0;
          for (int b = 0; b < L; ++b)
            p = with_payload_bit(p, spec.bit_indices[b],
                                 static_cast<int>(raw >> (L - 1 - b) & 1));
          REQUIRE(translate_frame_raw(p, spec) == raw);
          const double num = raw_to_number(raw, L, is_signed);
          REQUIRE(number_to_raw(static_cast<long long>(num), L) == raw);
        }
      }
    }
  }
}

TEST_CASE("interpolation is linear with endpoint clamping") {
  SignalTimeSeries s;
  s.timestamps = {0.0, 10.0};
  s.values = {0.0, 10.0};
  REQUIRE(interpolate_at(s, {5.0}) == std::vector<double>{5.0});
  REQUIRE(interpolate_at(s, {-3.0}) == std::vector<double>{0.0});
  REQUIRE(interpolate_at(s, {42.0}) == std::vector<double>{10.0});
  REQUIRE(interpolate_at(s, {10.0}) == std::vector<double>{10.0});
  REQUIRE(interpolate_at(s, {0.0}) == std::vector<double>{0.0});
  SignalTimeSeries tiny;
  tiny.timestamps = {1.0};
  tiny.values = {1.0};
  REQUIRE_THROWS_AS(interpolate_at(tiny, {1.0}), InsufficientData);
}

TEST_CASE("fit_linear recovers exact lines and defines degenerate R2") {
  {
    std::vector<double> x, y;
    for (int k = 0; k < 10; ++k) {
      x.push_back(k);
      y.push_back(2.0 * k + 3.0);
    }
    const LinearFit f = fit_linear(x, y);
    REQUIRE(f.a == Catch::Approx(2.0).epsilon(1e-12));
    REQUIRE(f.b == Catch::Approx(3.0).epsilon(1e-12));
    REQUIRE(f.r_squared == 1.0);
  }
  {
    const LinearFit f = fit_linear({1, 2, 3}, {5, 5, 5});
    REQUIRE(f.r_squared == 0.0);
    REQUIRE(f.a == 0.0);
    REQUIRE(f.b == 5.0);
  }
  {
    std::vector<double> x, y;
    for (int k = 0; k < 8; ++k) {
      x.push_back(k);
      y.push_back(-double(k));
    }
    const LinearFit f = fit_linear(x, y);
    REQUIRE(f.a == Catch::Approx(-1.0).epsilon(1e-12));
    REQUIRE(f.r_squared == Catch::Approx(1.0).epsilon(1e-12));
  }
  REQUIRE_THROWS_AS(fit_linear({1, 1, 1}, {1, 2, 3}), ValidationError);
  REQUIRE_THROWS_AS(fit_linear({1}, {1}), InsufficientData);
}

TEST_CASE("fit_linear matches the closed form on two points") {
  SplitMix64 rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const double x1 = rng.next_double(), x2 = x1 + 0.1 + rng.next_double();
    const double y1 = 10.0 * rng.next_double() - 5.0;
    const double y2 = 10.0 * rng.next_double() - 5.0;
    const LinearFit f = fit_linear({x1, x2}, {y1, y2});
    const double a = (y2 - y1) / (x2 - x1);
    REQUIRE(f.a == Catch::Approx(a).margin(1e-9));
    REQUIRE(f.b == Catch::Approx(y1 - a * x1).margin(1e-9));
    if (y1 != y2) REQUIRE(f.r_squared == Catch::Approx(1.0).margin(1e-9));
  }
}

namespace {

SignalTimeSeries ramp_series(std::size_t n) {
  SignalTimeSeries s;
  for (std::size_t k = 0; k < n; ++k) {
    s.timestamps.push_back(0.05 * static_cast<double>(k));
    s.values.push_back(static_cast<double>((7 * k) % 256));
  }
  return s;
}

}  // namespace

TEST_CASE("match_signals recovers exact affine relations") {
  const SignalTimeSeries s = ramp_series(1000);
  DidTrace did;
  did.label = "SPEED";
  did.unit = "km/h";
  for (std::size_t k = 5; k < 995; k += 10) {
    const double t = 0.05 * static_cast<double>(k) + 0.013;
    did.timestamps.push_back(t);
  }
  did.values = interpolate_at(s, did.timestamps);
  for (double& v : did.values) v = 0.25 * v + 7.0;

  const auto matches = match_signals({s}, {did});
  REQUIRE(matches[0].has_value());
  REQUIRE(std::abs(matches[0]->scale - 0.25) <= 1e-6 * 0.25);
  REQUIRE(std::abs(matches[0]->offset - 7.0) <= 1e-6 * 7.0);
  REQUIRE(matches[0]->r_squared >= 1.0 - 1e-9);
  REQUIRE(matches[0]->did_label == "SPEED");
}

TEST_CASE("pure noise stays unmatched at the default threshold") {
  SplitMix64 rng(77);
  SignalTimeSeries noise;
  for (int k = 0; k < 1000; ++k) {
    noise.timestamps.push_back(0.05 * k);
    noise.values.push_back(rng.next_double() * 100.0);
  }
  DidTrace did;
  did.label = "SPEED";
  for (int k = 0; k < 200; ++k) {
    did.timestamps.push_back(0.25 * k + 0.01);
    did.values.push_back(rng.next_double() * 40.0);
  }
  const auto matches = match_signals({noise}, {did});
  REQUIRE_FALSE(matches[0].has_value());
}

TEST_CASE("delta one accepts only perfect fits") {
  const SignalTimeSeries s = ramp_series(1000);
  DidTrace exact;
  exact.label = "EXACT";
  DidTrace noisy;
  noisy.label = "NOISY";
  SplitMix64 rng(3);
  for (std::size_t k = 5; k < 995; k += 10) {
    const double t = 0.05 * static_cast<double>(k) + 0.017;
    exact.timestamps.push_back(t);
    noisy.timestamps.push_back(t);
  }
  exact.values = interpolate_at(s, exact.timestamps);
  noisy.values = exact.values;
  for (double& v : noisy.values) v += rng.next_double() - 0.5;

  MatchOptions opt;
  opt.delta = 1.0;
  const auto exact_match = match_signals({s}, {exact}, opt);
  REQUIRE(exact_match[0].has_value());
  REQUIRE(exact_match[0]->r_squared == 1.0);
  const auto noisy_match = match_signals({s}, {noisy}, opt);
  REQUIRE_FALSE(noisy_match[0].has_value());
}

TEST_CASE("matching is invariant to affine rescaling of the raw signal") {
  const SignalTimeSeries s = ramp_series(600);
  SignalTimeSeries scaled = s;
  const double p = 4.0, q = -12.0;
  for (double& v : scaled.values) v = p * v + q;

  DidTrace did;
  did.label = "D";
  for (std::size_t k = 10; k < 590; k += 7)
    did.timestamps.push_back(0.05 * static_cast<double>(k) + 0.02);
  did.values = interpolate_at(s, did.timestamps);
  for (double& v : did.values) v = -3.0 * v + 5.0;

  const auto m1 = match_signals({s}, {did});
  const auto m2 = match_signals({scaled}, {did});
  REQUIRE(m1[0].has_value());
  REQUIRE(m2[0].has_value());
  REQUIRE(m2[0]->scale == Catch::Approx(m1[0]->scale / p).epsilon(1e-9));
  REQUIRE(m2[0]->offset ==
          Catch::Approx(m1[0]->offset - m1[0]->scale * q / p).epsilon(1e-9));
  REQUIRE(m2[0]->r_squared == Catch::Approx(m1[0]->r_squared).margin(1e-12));
  REQUIRE(m1[0]->did_label == m2[0]->did_label);
}

TEST_CASE("signals with no overlapping DID window stay unmatched") {
  const SignalTimeSeries s = ramp_series(100);  // spans [0, 5)
  DidTrace did;
  did.label = "LATE";
  for (int k = 0; k < 50; ++k) {
    did.timestamps.push_back(100.0 + k);
    did.values.push_back(k);
  }
  const auto matches = match_signals({s}, {did});
  REQUIRE_FALSE(matches[0].has_value());
}
