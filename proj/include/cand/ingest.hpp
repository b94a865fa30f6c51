#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "cand/can_model.hpp"
#include "cand/errors.hpp"

namespace cand {

/// A parsed capture: time-ordered frames plus ingest bookkeeping.
struct CanLog {
  std::vector<CanFrame> frames;
  std::string source_name;
  std::size_t malformed_lines = 0;
  std::size_t data_lines = 0;  // non-blank, non-comment input lines
};

/// Labeled diagnostic time series used for physical interpretation.
struct DidTrace {
  std::string label;
  std::string unit;
  std::vector<double> timestamps;  // strictly increasing
  std::vector<double> values;

  std::size_t size() const { return timestamps.size(); }
};

/// How to decode one diagnostic response into a physical value:
/// value = (a_num / a_den) * raw + b, raw being the big-endian integer of
/// the response's data bytes (count taken from the frame's length byte).
struct DidDecodeRule {
  std::uint32_t response_id = 0;
  std::uint8_t service = 0;  // positive-response service byte, e.g. 0x41
  std::uint8_t pid = 0;
  std::string label;
  std::string unit;
  double a_num = 1.0;
  double a_den = 1.0;
  double b = 0.0;
};

namespace detail {

inline bool is_blank_or_comment(std::string_view line) {
  std::size_t k = 0;
  while (k < line.size() && std::isspace(static_cast<unsigned char>(line[k]))) ++k;
  return k == line.size() || line[k] == '#' || line[k] == ';';
}

inline int hex_nibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

inline std::optional<CanFrame> parse_candump_line(std::string_view line) {
  // (<seconds>.<micros>) <iface> <HEXID>#<HEXPAYLOAD>
  std::size_t p = 0;
  auto skip_ws = [&] {
    while (p < line.size() && std::isspace(static_cast<unsigned char>(line[p]))) ++p;
  };
  skip_ws();
  if (p >= line.size() || line[p] != '(') return std::nullopt;
  const std::size_t close = line.find(')', p);
  if (close == std::string_view::npos) return std::nullopt;
  double ts = 0.0;
  {
    const std::string_view num = line.substr(p + 1, close - p - 1);
    const auto rc = std::from_chars(num.data(), num.data() + num.size(), ts);
    if (rc.ec != std::errc{} || rc.ptr != num.data() + num.size()) return std::nullopt;
  }
  p = close + 1;
  skip_ws();
  const std::size_t iface_end = line.find_first_of(" \t", p);
  if (iface_end == std::string_view::npos || iface_end == p) return std::nullopt;
  p = iface_end;
  skip_ws();
  const std::size_t hash = line.find('#', p);
  if (hash == std::string_view::npos || hash == p) return std::nullopt;

  CanFrame f;
  f.timestamp = ts;
  const std::string_view id_text = line.substr(p, hash - p);
  if (id_text.size() > 8) return std::nullopt;
  std::uint32_t id = 0;
  for (char c : id_text) {
    const int v = hex_nibble(c);
    if (v < 0) return std::nullopt;
    id = id << 4 | static_cast<std::uint32_t>(v);
  }
  f.arbitration_id = id;
  f.extended_id = id_text.size() > 3;  // candump prints 3 or 8 hex digits
  if (!f.extended_id && id > 0x7FF) return std::nullopt;
  if (f.extended_id && id > 0x1FFFFFFF) return std::nullopt;

  std::size_t q = hash + 1;
  std::uint8_t bytes[8];
  int nbytes = 0;
  while (q < line.size() &&
         !std::isspace(static_cast<unsigned char>(line[q]))) {
    if (q + 1 >= line.size()) return std::nullopt;  // odd digit count
    const int hi = hex_nibble(line[q]);
    const int lo = hex_nibble(line[q + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    if (nbytes == 8) return std::nullopt;
    bytes[nbytes++] = static_cast<std::uint8_t>(hi << 4 | lo);
    q += 2;
  }
  while (q < line.size()) {
    if (!std::isspace(static_cast<unsigned char>(line[q]))) return std::nullopt;
    ++q;
  }
  f.payload = pad_payload({bytes, static_cast<std::size_t>(nbytes)});
  f.original_length = nbytes;
  return f;
}

}  // namespace detail

/// Parse a candump-style ASCII capture. Lenient by default: malformed lines
/// are counted and skipped. In strict mode the first malformed line throws
/// with its line number.
inline CanLog parse_candump(std::istream& in, bool strict = false,
                            std::string source_name = "") {
  CanLog log;
  log.source_name = std::move(source_name);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::is_blank_or_comment(line)) continue;
    ++log.data_lines;
    if (auto f = detail::parse_candump_line(line)) {
      log.frames.push_back(*f);
    } else {
      if (strict) throw ParseError("malformed candump line", lineno);
      ++log.malformed_lines;
    }
  }
  std::stable_sort(log.frames.begin(), log.frames.end(),
                   [](const CanFrame& a, const CanFrame& b) {
                     return a.timestamp < b.timestamp;
                   });
  return log;
}

inline void serialize_candump(const CanLog& log, std::ostream& out,
                              std::string_view iface = "can0") {
  char buf[64];
  for (const CanFrame& f : log.frames) {
    std::snprintf(buf, sizeof buf, "(%.6f) ", f.timestamp);
    out << buf;
    out << iface << ' ';
    if (f.extended_id)
      std::snprintf(buf, sizeof buf, "%08X#", f.arbitration_id);
    else
      std::snprintf(buf, sizeof buf, "%03X#", f.arbitration_id);
    out << buf;
    for (int k = 0; k < f.original_length; ++k) {
      const auto byte = static_cast<unsigned>(f.payload >> (8 * (7 - k)) & 0xFF);
      std::snprintf(buf, sizeof buf, "%02X", byte);
      out << buf;
    }
    out << '\n';
  }
}

/// Group frames by arbitration id, preserving time order within each id.
inline std::map<std::uint32_t, IdTrace> partition_traces(const CanLog& log) {
  std::map<std::uint32_t, IdTrace> traces;
  for (const CanFrame& f : log.frames) {
    IdTrace& t = traces[f.arbitration_id];
    if (t.rows.empty()) {
      t.arbitration_id = f.arbitration_id;
      t.extended_id = f.extended_id;
    }
    t.timestamps.push_back(f.timestamp);
    t.rows.push_back(f.payload);
    t.max_length = std::max(t.max_length, f.original_length);
  }
  return traces;
}

inline bool trace_is_constant(const IdTrace& t) {
  for (std::size_t r = 1; r < t.rows.size(); ++r)
    if (t.rows[r] != t.rows[0]) return false;
  return true;
}

namespace detail {

inline bool frame_matches_rule(const CanFrame& f, const DidDecodeRule& r) {
  if (f.arbitration_id != r.response_id) return false;
  if (f.original_length < 3) return false;
  const auto byte = [&](int k) {
    return static_cast<std::uint8_t>(f.payload >> (8 * (7 - k)) & 0xFF);
  };
  return byte(1) == r.service && byte(2) == r.pid;
}

}  // namespace detail

/// Decode diagnostic responses into labeled traces. The frame's leading
/// length byte declares how many data bytes follow the service and pid.
/// Frames matched by a rule can optionally be reported for stripping.
inline std::vector<DidTrace> extract_did_traces(
    const CanLog& log, const std::vector<DidDecodeRule>& rules,
    std::vector<bool>* matched_frames = nullptr,
    std::size_t* decode_errors = nullptr) {
  if (matched_frames) matched_frames->assign(log.frames.size(), false);
  std::vector<DidTrace> out;
  for (const DidDecodeRule& rule : rules) {
    DidTrace trace;
    trace.label = rule.label;
    trace.unit = rule.unit;
    for (std::size_t idx = 0; idx < log.frames.size(); ++idx) {
      const CanFrame& f = log.frames[idx];
      if (!detail::frame_matches_rule(f, rule)) continue;
      if (matched_frames) (*matched_frames)[idx] = true;
      const auto byte = [&](int k) {
        return static_cast<std::uint8_t>(f.payload >> (8 * (7 - k)) & 0xFF);
      };
      const int data_bytes = static_cast<int>(byte(0)) - 2;
      if (data_bytes < 1 || 3 + data_bytes > f.original_length) {
        if (decode_errors) ++*decode_errors;
        continue;
      }
      std::uint64_t raw = 0;
      for (int k = 0; k < data_bytes; ++k) raw = raw << 8 | byte(3 + k);
      const double value =
          rule.a_num / rule.a_den * static_cast<double>(raw) + rule.b;
      if (!trace.timestamps.empty() && f.timestamp <= trace.timestamps.back())
        continue;  // keep timestamps strictly increasing
      trace.timestamps.push_back(f.timestamp);
      trace.values.push_back(value);
    }
    if (!trace.timestamps.empty()) out.push_back(std::move(trace));
  }
  return out;
}

/// Remove every frame matched by some rule; used by "strip diagnostics".
inline CanLog strip_frames(const CanLog& log, const std::vector<bool>& matched,
                           std::size_t* stripped = nullptr) {
  CanLog out;
  out.source_name = log.source_name;
  out.malformed_lines = log.malformed_lines;
  out.data_lines = log.data_lines;
  for (std::size_t i = 0; i < log.frames.size(); ++i) {
    if (i < matched.size() && matched[i]) {
      if (stripped) ++*stripped;
      continue;
    }
    out.frames.push_back(log.frames[i]);
  }
  return out;
}

/// Rules shipped by default: the usual broadcast response ids with service
/// 0x41 and the rpm / speed / throttle / accelerator-pedal pids. Nothing in
/// the pipeline depends on these; they are replaceable configuration.
inline std::vector<DidDecodeRule> default_did_rules() {
  std::vector<DidDecodeRule> rules;
  for (std::uint32_t id = 0x7E8; id <= 0x7EF; ++id) {
    rules.push_back({id, 0x41, 0x0C, "ENGINE_RPM", "rpm", 1.0, 4.0, 0.0});
    rules.push_back({id, 0x41, 0x0D, "VEHICLE_SPEED", "km/h", 1.0, 1.0, 0.0});
    rules.push_back({id, 0x41, 0x11, "THROTTLE_POS", "%", 100.0, 255.0, 0.0});
    rules.push_back({id, 0x41, 0x49, "ACCEL_PEDAL_POS", "%", 100.0, 255.0, 0.0});
  }
  return rules;
}

/// One rule per line: `response_id service pid label unit a_num a_den b`.
/// response_id/service/pid are hex (0x prefix optional); blank and #-lines
/// are skipped.
inline std::vector<DidDecodeRule> load_did_rules(std::istream& in) {
  std::vector<DidDecodeRule> rules;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::is_blank_or_comment(line)) continue;
    std::istringstream ss(line);
    std::string id_s, sv_s, pid_s;
    DidDecodeRule r;
    if (!(ss >> id_s >> sv_s >> pid_s >> r.label >> r.unit >> r.a_num >>
          r.a_den >> r.b))
      throw ParseError("bad DID rule (want: id service pid label unit a_num a_den b)",
                       lineno);
    try {
      r.response_id = static_cast<std::uint32_t>(std::stoul(id_s, nullptr, 16));
      r.service = static_cast<std::uint8_t>(std::stoul(sv_s, nullptr, 16));
      r.pid = static_cast<std::uint8_t>(std::stoul(pid_s, nullptr, 16));
    } catch (const std::exception&) {
      throw ParseError("bad hex field in DID rule", lineno);
    }
    if (r.a_den == 0.0) throw ParseError("zero scale denominator", lineno);
    rules.push_back(std::move(r));
  }
  return rules;
}

/// CSV with header `timestamp,label,unit,value`; rows grouped by label and
/// time-sorted per trace. Comment lines before the header are skipped.
inline std::vector<DidTrace> load_did_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  do {
    if (!std::getline(in, line)) throw ParseError("empty DID csv", lineno + 1);
    ++lineno;
  } while (detail::is_blank_or_comment(line));
  {
    std::string header = line;
    header.erase(std::remove_if(header.begin(), header.end(),
                                [](unsigned char c) { return std::isspace(c); }),
                 header.end());
    if (header != "timestamp,label,unit,value")
      throw ParseError("expected header timestamp,label,unit,value", lineno);
  }
  struct Row {
    double t;
    double v;
  };
  std::map<std::string, std::pair<std::string, std::vector<Row>>> by_label;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::is_blank_or_comment(line)) continue;
    std::istringstream ss(line);
    std::string t_s, label, unit, v_s;
    if (!std::getline(ss, t_s, ',') || !std::getline(ss, label, ',') ||
        !std::getline(ss, unit, ',') || !std::getline(ss, v_s))
      throw ParseError("bad DID csv row", lineno);
    try {
      const double t = std::stod(t_s);
      const double v = std::stod(v_s);
      if (!std::isfinite(t) || !std::isfinite(v))
        throw ParseError("non-finite value", lineno);
      auto& slot = by_label[label];
      slot.first = unit;
      slot.second.push_back({t, v});
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception&) {
      throw ParseError("non-numeric timestamp or value", lineno);
    }
  }
  std::vector<DidTrace> out;
  for (auto& [label, slot] : by_label) {
    auto& rows = slot.second;
    std::stable_sort(rows.begin(), rows.end(),
                     [](const Row& a, const Row& b) { return a.t < b.t; });
    DidTrace tr;
    tr.label = label;
    tr.unit = slot.first;
    for (const Row& r : rows) {
      if (!tr.timestamps.empty() && r.t <= tr.timestamps.back()) continue;
      tr.timestamps.push_back(r.t);
      tr.values.push_back(r.v);
    }
    out.push_back(std::move(tr));
  }
  return out;
}

}  // namespace cand
