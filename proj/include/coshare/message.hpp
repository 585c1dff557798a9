#pragma once

// Messages exchanged between the two DSM endpoints, and their canonical
// binary encoding.
//
// Wire format (all integers little-endian):
//
//   offset  size  field
//   0       4     stage_index
//   4       1     sender          0 = A, 1 = B
//   5       1     kind            0 NOOP, 1 PROPOSE, 2 ASK_FAVOR, 3 GRANT, 4 DENY
//   6       2     payload_length
//   8       n     payload
//
//   PROPOSE    payload: share_count:u8
//   ASK_FAVOR  payload: favor_type:u8 (1 joint, 2 exclusive), duration_stages:u16,
//                       cc_count:u8, cc_index:u8 * cc_count (strictly ascending)
//   others     empty payload
//
// Exactly one byte string encodes each message; decode rejects anything else.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "coshare/ran.hpp"

namespace coshare {

enum class MessageKind : std::uint8_t { Noop = 0, Propose = 1, AskFavor = 2, Grant = 3, Deny = 4 };

enum class FavorType : std::uint8_t { JointUse = 1, ExclusiveUse = 2 };

inline const char* to_string(MessageKind k) {
  switch (k) {
    case MessageKind::Noop: return "NOOP";
    case MessageKind::Propose: return "PROPOSE";
    case MessageKind::AskFavor: return "ASK_FAVOR";
    case MessageKind::Grant: return "GRANT";
    case MessageKind::Deny: return "DENY";
  }
  return "?";
}

inline const char* to_string(FavorType t) {
  return t == FavorType::JointUse ? "JOINT_USE" : "EXCLUSIVE_USE";
}

struct FavorDescriptor {
  FavorType type{FavorType::ExclusiveUse};
  CcSet ccs;
  std::uint16_t duration_stages{1};

  /// Favor value in carrier-stages.
  std::int64_t units() const {
    return static_cast<std::int64_t>(ccs.size()) * static_cast<std::int64_t>(duration_stages);
  }

  friend bool operator==(const FavorDescriptor&, const FavorDescriptor&) = default;
};

struct ShareProposal {
  std::uint8_t share_count{0};
  friend bool operator==(const ShareProposal&, const ShareProposal&) = default;
};

struct ProtocolMessage {
  std::uint32_t stage_index{0};
  OperatorId sender{OperatorId::A};
  MessageKind kind{MessageKind::Noop};
  std::variant<std::monostate, ShareProposal, FavorDescriptor> payload;

  static ProtocolMessage noop(std::uint32_t stage, OperatorId from) {
    return {stage, from, MessageKind::Noop, std::monostate{}};
  }
  static ProtocolMessage propose(std::uint32_t stage, OperatorId from, std::uint8_t share) {
    return {stage, from, MessageKind::Propose, ShareProposal{share}};
  }
  static ProtocolMessage ask(std::uint32_t stage, OperatorId from, FavorDescriptor favor) {
    return {stage, from, MessageKind::AskFavor, favor};
  }
  static ProtocolMessage grant(std::uint32_t stage, OperatorId from) {
    return {stage, from, MessageKind::Grant, std::monostate{}};
  }
  static ProtocolMessage deny(std::uint32_t stage, OperatorId from) {
    return {stage, from, MessageKind::Deny, std::monostate{}};
  }

  friend bool operator==(const ProtocolMessage&, const ProtocolMessage&) = default;
};

/// Malformed wire input. `field()` names the field that failed to parse.
class DecodeError : public std::runtime_error {
 public:
  DecodeError(std::string field, const std::string& what)
      : std::runtime_error("decode: " + field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

namespace detail {

inline void put_u8(std::vector<std::uint8_t>& out, std::uint8_t v) { out.push_back(v); }
inline void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}
inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint8_t u8(const char* field) {
    need(1, field);
    return in_[pos_++];
  }
  std::uint16_t u16(const char* field) {
    need(2, field);
    auto v = static_cast<std::uint16_t>(in_[pos_] | (in_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  std::uint32_t u32(const char* field) {
    need(4, field);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  void need(std::size_t n, const char* field) const {
    if (in_.size() - pos_ < n) throw DecodeError(field, "truncated input");
  }
  std::span<const std::uint8_t> in_;
  std::size_t pos_{0};
};

}  // namespace detail

inline std::vector<std::uint8_t> encode(const ProtocolMessage& m) {
  std::vector<std::uint8_t> payload;
  switch (m.kind) {
    case MessageKind::Propose: {
      const auto* p = std::get_if<ShareProposal>(&m.payload);
      if (!p) throw std::invalid_argument("encode: PROPOSE without share proposal");
      detail::put_u8(payload, p->share_count);
      break;
    }
    case MessageKind::AskFavor: {
      const auto* f = std::get_if<FavorDescriptor>(&m.payload);
      if (!f) throw std::invalid_argument("encode: ASK_FAVOR without favor descriptor");
      if (f->ccs.empty()) throw std::invalid_argument("encode: favor with empty carrier set");
      if (f->duration_stages == 0) throw std::invalid_argument("encode: favor duration is zero");
      detail::put_u8(payload, static_cast<std::uint8_t>(f->type));
      detail::put_u16(payload, f->duration_stages);
      const auto ccs = f->ccs.indices();
      detail::put_u8(payload, static_cast<std::uint8_t>(ccs.size()));
      for (auto c : ccs) detail::put_u8(payload, static_cast<std::uint8_t>(c));
      break;
    }
    case MessageKind::Noop:
    case MessageKind::Grant:
    case MessageKind::Deny:
      if (!std::holds_alternative<std::monostate>(m.payload))
        throw std::invalid_argument(std::string("encode: ") + to_string(m.kind) +
                                    " carries no payload");
      break;
  }
  std::vector<std::uint8_t> out;
  out.reserve(8 + payload.size());
  detail::put_u32(out, m.stage_index);
  detail::put_u8(out, static_cast<std::uint8_t>(m.sender));
  detail::put_u8(out, static_cast<std::uint8_t>(m.kind));
  detail::put_u16(out, static_cast<std::uint16_t>(payload.size()));
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

inline ProtocolMessage decode(std::span<const std::uint8_t> bytes) {
  detail::Reader r(bytes);
  ProtocolMessage m;
  m.stage_index = r.u32("stage_index");
  const auto sender = r.u8("sender");
  if (sender > 1) throw DecodeError("sender", "unknown operator " + std::to_string(sender));
  m.sender = static_cast<OperatorId>(sender);
  const auto kind = r.u8("kind");
  if (kind > 4) throw DecodeError("kind", "unknown message kind " + std::to_string(kind));
  m.kind = static_cast<MessageKind>(kind);
  const auto len = r.u16("payload_length");
  if (r.remaining() < len) throw DecodeError("payload", "truncated input");
  if (r.remaining() > len) throw DecodeError("payload_length", "trailing bytes after payload");

  switch (m.kind) {
    case MessageKind::Propose:
      if (len != 1) throw DecodeError("payload_length", "PROPOSE payload must be 1 byte");
      m.payload = ShareProposal{r.u8("share_count")};
      break;
    case MessageKind::AskFavor: {
      FavorDescriptor f;
      const auto type = r.u8("favor_type");
      if (type != 1 && type != 2)
        throw DecodeError("favor_type", "unknown favor type " + std::to_string(type));
      f.type = static_cast<FavorType>(type);
      f.duration_stages = r.u16("duration_stages");
      if (f.duration_stages == 0) throw DecodeError("duration_stages", "must be >= 1");
      const auto n = r.u8("cc_count");
      if (n == 0) throw DecodeError("cc_count", "favor must name at least one carrier");
      if (len != 4u + n) throw DecodeError("payload_length", "does not match cc_count");
      int prev = -1;
      for (std::uint8_t i = 0; i < n; ++i) {
        const auto c = r.u8("cc_set");
        if (c >= 32 || static_cast<int>(c) <= prev)
          throw DecodeError("cc_set", "carrier indices must be ascending and < 32");
        prev = c;
        f.ccs.insert(c);
      }
      m.payload = f;
      break;
    }
    case MessageKind::Noop:
    case MessageKind::Grant:
    case MessageKind::Deny:
      if (len != 0)
        throw DecodeError("payload_length", std::string(to_string(m.kind)) + " has no payload");
      break;
  }
  return m;
}

inline std::string to_hex(std::span<const std::uint8_t> bytes) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    if (i) s += ' ';
    s += digits[bytes[i] >> 4];
    s += digits[bytes[i] & 0xF];
  }
  return s;
}

inline std::vector<std::uint8_t> from_hex(const std::string& text) {
  std::vector<std::uint8_t> out;
  int hi = -1;
  for (char ch : text) {
    int v;
    if (ch >= '0' && ch <= '9') v = ch - '0';
    else if (ch >= 'a' && ch <= 'f') v = ch - 'a' + 10;
    else if (ch >= 'A' && ch <= 'F') v = ch - 'A' + 10;
    else continue;
    if (hi < 0) {
      hi = v;
    } else {
      out.push_back(static_cast<std::uint8_t>(hi * 16 + v));
      hi = -1;
    }
  }
  if (hi >= 0) throw std::invalid_argument("from_hex: odd number of hex digits");
  return out;
}

}  // namespace coshare
