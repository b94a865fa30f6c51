#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "cand/can_model.hpp"
#include "cand/errors.hpp"

namespace cand {

/// One learned or ground-truth signal record. `start_bit_internal` is the
/// index of the signal's MSB in the internal convention (bit 0 = first
/// transmitted bit); conversion to DBC numbering happens only here.
struct SignalDefinition {
  std::string name;
  int start_bit_internal = 0;
  int length = 1;
  Endianness endianness = Endianness::Big;
  bool is_signed = false;
  double scale = 1.0;
  double offset = 0.0;
  std::string unit;
  std::string comment;

  SignalSpec spec() const {
    return make_spec(start_bit_internal, length, endianness);
  }

  friend bool operator==(const SignalDefinition&, const SignalDefinition&) = default;
};

struct MessageDefinition {
  std::uint32_t arbitration_id = 0;
  bool extended_id = false;
  std::string message_name;
  int dlc = 8;
  std::vector<SignalDefinition> signals;

  friend bool operator==(const MessageDefinition&, const MessageDefinition&) = default;
};

/// DBC bit numbering: within each byte the LSB is numbered lowest, so
/// dbc(i) = 8*floor(i/8) + (7 - i mod 8). The map is an involution.
constexpr int dbc_bit_number(int internal) {
  return 8 * (internal / 8) + (7 - internal % 8);
}

/// DBC start bit: MSB position for big endian (Motorola) signals, LSB
/// position for little endian (Intel) signals.
inline int to_dbc_start_bit(const SignalDefinition& def) {
  const SignalSpec s = def.spec();
  return def.endianness == Endianness::Big ? dbc_bit_number(s.msb())
                                           : dbc_bit_number(s.lsb());
}

inline void validate_message(const MessageDefinition& msg) {
  std::array<int, kPayloadBits> owner;
  owner.fill(-1);
  std::array<int, kPayloadBytes> byte_order;  // -1 free, 0 big, 1 little
  byte_order.fill(-1);
  for (std::size_t k = 0; k < msg.signals.size(); ++k) {
    const SignalDefinition& def = msg.signals[k];
    if (def.length < 1 || def.length > kPayloadBits)
      throw ValidationError("signal " + def.name + ": bad length");
    if (def.length <= 2 && def.is_signed)
      throw ValidationError("signal " + def.name +
                            ": signals of length <= 2 must be unsigned");
    SignalSpec s;
    try {
      s = def.spec();
    } catch (const ValidationError& e) {
      throw ValidationError("signal " + def.name + ": " + e.what());
    }
    for (int i : s.bit_indices) {
      if (owner[i] >= 0)
        throw ValidationError("signal " + def.name + " overlaps " +
                              msg.signals[owner[i]].name + " at bit " +
                              std::to_string(i));
      owner[i] = static_cast<int>(k);
    }
    if (s.multi_byte()) {
      const int order = def.endianness == Endianness::Big ? 0 : 1;
      for (int i : s.bit_indices) {
        int& slot = byte_order[byte_of_bit(i)];
        if (slot == -1) slot = order;
        if (slot != order)
          throw ValidationError("byte " + std::to_string(byte_of_bit(i)) +
                                " mixes big and little endian signals");
      }
    }
  }
}

namespace detail {

inline std::string format_number(double v) {
  char buf[64];
  const auto rc = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, rc.ptr);
}

inline void raw_range(const SignalDefinition& def, double& lo, double& hi) {
  const int L = def.length;
  if (def.is_signed) {
    lo = -std::ldexp(1.0, L - 1);
    hi = std::ldexp(1.0, L - 1) - 1.0;
  } else {
    lo = 0.0;
    hi = std::ldexp(1.0, L) - 1.0;
  }
}

}  // namespace detail

/// Emit the BO_/SG_ subset. Signals are validated first; physical min/max
/// derive from length, signedness, scale, and offset.
inline void write_dbc(const std::vector<MessageDefinition>& defs,
                      std::ostream& out, std::string_view header = "") {
  if (!header.empty()) out << "VERSION \"" << header << "\"\n\n";
  for (const MessageDefinition& msg : defs) {
    validate_message(msg);
    const std::uint32_t dbc_id =
        msg.extended_id ? (msg.arbitration_id | 0x80000000u) : msg.arbitration_id;
    out << "BO_ " << dbc_id << ' ' << msg.message_name << ": " << msg.dlc
        << " Vector__XXX\n";
    for (const SignalDefinition& def : msg.signals) {
      double rlo, rhi;
      detail::raw_range(def, rlo, rhi);
      const double p1 = def.scale * rlo + def.offset;
      const double p2 = def.scale * rhi + def.offset;
      out << " SG_ " << def.name << " : " << to_dbc_start_bit(def) << '|'
          << def.length << '@' << (def.endianness == Endianness::Big ? 0 : 1)
          << (def.is_signed ? '-' : '+') << " ("
          << detail::format_number(def.scale) << ','
          << detail::format_number(def.offset) << ") ["
          << detail::format_number(std::min(p1, p2)) << '|'
          << detail::format_number(std::max(p1, p2)) << "] \"" << def.unit
          << "\" Vector__XXX\n";
    }
    out << '\n';
  }
}

inline std::string write_dbc(const std::vector<MessageDefinition>& defs,
                             std::string_view header = "") {
  std::ostringstream ss;
  write_dbc(defs, ss, header);
  return ss.str();
}

namespace detail {

/// Recover the internal MSB index from a DBC start bit.
inline int internal_msb_from_dbc(int start, int length, Endianness e) {
  if (start < 0 || start >= kPayloadBits)
    throw ValidationError("start bit out of range");
  if (e == Endianness::Big) return dbc_bit_number(start);
  int cur = dbc_bit_number(start);  // LSB position
  for (int k = 1; k < length; ++k) {
    const auto prev = predecessor(cur, Endianness::Little);
    if (!prev)
      throw ValidationError("little endian signal runs past the payload");
    cur = *prev;
  }
  return cur;
}

}  // namespace detail

/// Parse the BO_/SG_ subset written above; any other stanza is skipped.
/// Inverse of write_dbc on its own output.
inline std::vector<MessageDefinition> read_dbc(std::istream& in) {
  std::vector<MessageDefinition> out;
  MessageDefinition* current = nullptr;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag)) continue;
    if (tag == "BO_") {
      MessageDefinition msg;
      std::string name_colon;
      unsigned long long id = 0;
      if (!(ss >> id >> name_colon))
        throw ParseError("malformed BO_ line", lineno);
      if (!name_colon.empty() && name_colon.back() == ':') {
        name_colon.pop_back();
      } else {
        std::string colon;
        if (!(ss >> colon) || colon != ":")
          throw ParseError("malformed BO_ line", lineno);
      }
      if (!(ss >> msg.dlc)) throw ParseError("malformed BO_ line", lineno);
      msg.message_name = name_colon;
      msg.extended_id = (id & 0x80000000u) != 0;
      msg.arbitration_id = static_cast<std::uint32_t>(id & 0x1FFFFFFFu);
      out.push_back(std::move(msg));
      current = &out.back();
    } else if (tag == "SG_") {
      if (!current) throw ParseError("SG_ before any BO_", lineno);
      SignalDefinition def;
      std::string name, colon, placement, coeffs, range;
      if (!(ss >> name >> colon >> placement >> coeffs >> range))
        throw ParseError("malformed SG_ line", lineno);
      if (colon != ":") throw ParseError("malformed SG_ line", lineno);
      def.name = name;
      int start = 0;
      {
        // <start>|<len>@<order><sign>
        const std::size_t bar = placement.find('|');
        const std::size_t at = placement.find('@');
        if (bar == std::string::npos || at == std::string::npos ||
            at + 3 != placement.size())
          throw ParseError("malformed SG_ placement", lineno);
        try {
          start = std::stoi(placement.substr(0, bar));
          def.length = std::stoi(placement.substr(bar + 1, at - bar - 1));
        } catch (const std::exception&) {
          throw ParseError("malformed SG_ placement", lineno);
        }
        const char order = placement[at + 1];
        const char sign = placement.back();
        if (order == '0')
          def.endianness = Endianness::Big;
        else if (order == '1')
          def.endianness = Endianness::Little;
        else
          throw ParseError("bad byte-order flag", lineno);
        if (sign == '-')
          def.is_signed = true;
        else if (sign == '+')
          def.is_signed = false;
        else
          throw ParseError("bad sign flag", lineno);
      }
      {
        // (<scale>,<offset>)
        if (coeffs.size() < 5 || coeffs.front() != '(' || coeffs.back() != ')')
          throw ParseError("malformed SG_ scale/offset", lineno);
        const std::size_t comma = coeffs.find(',');
        if (comma == std::string::npos)
          throw ParseError("malformed SG_ scale/offset", lineno);
        try {
          def.scale = std::stod(coeffs.substr(1, comma - 1));
          def.offset = std::stod(coeffs.substr(comma + 1, coeffs.size() - comma - 2));
        } catch (const std::exception&) {
          throw ParseError("malformed SG_ scale/offset", lineno);
        }
      }
      {
        // "<unit>"
        const std::size_t q1 = line.find('"');
        const std::size_t q2 = q1 == std::string::npos ? std::string::npos
                                                       : line.find('"', q1 + 1);
        if (q2 == std::string::npos)
          throw ParseError("missing unit string", lineno);
        def.unit = line.substr(q1 + 1, q2 - q1 - 1);
      }
      try {
        def.start_bit_internal =
            detail::internal_msb_from_dbc(start, def.length, def.endianness);
      } catch (const ValidationError& e) {
        throw ParseError(std::string("signal ") + def.name + ": " + e.what(),
                         lineno);
      }
      current->signals.push_back(std::move(def));
    }
    // other stanzas (VERSION, CM_, BA_, ...) are ignored
  }
  for (const MessageDefinition& msg : out) validate_message(msg);
  return out;
}

inline std::vector<MessageDefinition> read_dbc_text(const std::string& text) {
  std::istringstream ss(text);
  return read_dbc(ss);
}

}  // namespace cand
