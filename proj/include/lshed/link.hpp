#pragma once
//
// Plant <-> controller datagram codec and link impairment.
//
// Datagram layout (all integers unsigned little-endian, reals IEEE binary64 LE):
//
//   header     magic 0x4C 0x53 | version 0x01 | msg_type | seq u32 | timestamp_ms u64 | count u16
//   [part]     u8, present only on fragments: bits 0-6 index, bit 7 set on the last part
//   records    telemetry: load_id u16, demand_status f64, measured_power_w f64   (18 bytes)
//              command:   load_id u16, status f64                                (10 bytes)
//   trailer    telemetry only: capacity_w f64, loss_w f64, mission_id u16, loading_pu f64
//
// A datagram never exceeds 1400 bytes; larger batches are split into parts
// sharing seq, and every telemetry part carries the trailer.
//

#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "lshed/model.hpp"

namespace lshed {

using Bytes = std::vector<std::uint8_t>;

inline constexpr std::uint8_t kMagic0 = 0x4C;
inline constexpr std::uint8_t kMagic1 = 0x53;
inline constexpr std::uint8_t kProtocolVersion = 0x01;
inline constexpr std::uint8_t kMsgTelemetry = 0x01;
inline constexpr std::uint8_t kMsgCommand = 0x02;

inline constexpr std::size_t kHeaderSize = 18;
inline constexpr std::size_t kTelemetryRecordSize = 18;
inline constexpr std::size_t kTelemetryTrailerSize = 26;
inline constexpr std::size_t kCommandRecordSize = 10;
inline constexpr std::size_t kMaxDatagramSize = 1400;

enum class DecodeError { Truncated, BadMagic, BadVersion, WrongType, CountMismatch };
std::string_view to_string(DecodeError e);

template <class T>
class Decoded {
 public:
  Decoded(T value) : v_(std::move(value)) {}
  Decoded(DecodeError e) : v_(e) {}
  bool ok() const { return std::holds_alternative<T>(v_); }
  explicit operator bool() const { return ok(); }
  const T& value() const { return std::get<T>(v_); }
  T& value() { return std::get<T>(v_); }
  DecodeError error() const { return std::get<DecodeError>(v_); }

 private:
  std::variant<T, DecodeError> v_;
};

struct PartInfo {
  std::uint8_t index = 0;
  bool last = true;
  bool operator==(const PartInfo&) const = default;
};

struct TelemetryFrame {
  std::uint32_t seq = 0;
  std::optional<PartInfo> part;
  SystemSnapshot snapshot;  // only this part's loads when fragmented
};

struct CommandFrame {
  std::uint32_t seq = 0;
  TimeMs timestamp_ms = 0;  // time of the telemetry the batch answers
  std::optional<PartInfo> part;
  std::vector<ShedCommand> commands;
};

std::vector<Bytes> encode_telemetry(const SystemSnapshot& snapshot, std::uint32_t seq);
Decoded<TelemetryFrame> decode_telemetry(std::span<const std::uint8_t> bytes);

std::vector<Bytes> encode_commands(std::span<const ShedCommand> commands, std::uint32_t seq, TimeMs timestamp_ms);
Decoded<CommandFrame> decode_commands(std::span<const std::uint8_t> bytes);

// Reorders fragments back into whole messages. Only the newest sequence number
// is kept in flight; an older incomplete message is abandoned.
class TelemetryAssembler {
 public:
  // Returns the complete snapshot once every part of `frame.seq` has arrived.
  std::optional<std::pair<std::uint32_t, SystemSnapshot>> push(TelemetryFrame frame);

 private:
  std::optional<std::uint32_t> seq_;
  std::map<std::uint8_t, TelemetryFrame> parts_;
};

class CommandAssembler {
 public:
  std::optional<CommandFrame> push(CommandFrame frame);

 private:
  std::optional<std::uint32_t> seq_;
  std::map<std::uint8_t, CommandFrame> parts_;
};

struct ImpairmentConfig {
  double loss_probability = 0.0;
  double latency_ms = 0.0;  // fixed one-way delay
  double jitter_ms = 0.0;   // uniform extra delay in [0, jitter_ms]
  std::uint64_t seed = 42;
  bool operator==(const ImpairmentConfig&) const = default;
};

// Seeded drop / delay decisions, one call per datagram.
class Impairment {
 public:
  explicit Impairment(const ImpairmentConfig& config);

  // Delivery time for a datagram sent at `now`, or nullopt when dropped.
  std::optional<TimeMs> impair(TimeMs now);
  const ImpairmentConfig& config() const { return config_; }

 private:
  double uniform();

  ImpairmentConfig config_;
  std::mt19937_64 rng_;
};

// Datagrams in flight, released in delivery-time order (send order on ties).
class DelayLine {
 public:
  void push(Bytes datagram, TimeMs deliver_at);
  std::vector<Bytes> pop_due(TimeMs now);
  bool empty() const { return queue_.empty(); }
  std::optional<TimeMs> next_delivery() const;

 private:
  struct Entry {
    TimeMs deliver_at;
    std::uint64_t order;
    Bytes datagram;
    bool operator>(const Entry& o) const {
      return deliver_at != o.deliver_at ? deliver_at > o.deliver_at : order > o.order;
    }
  };
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue_;
  std::uint64_t counter_ = 0;
};

}  // namespace lshed
