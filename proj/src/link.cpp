#include "lshed/link.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace lshed {

namespace {

class Writer {
 public:
  explicit Writer(Bytes& out) : out_(out) {}
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) { put(v, 2); }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }

 private:
  void put(std::uint64_t v, int n) {
    for (int k = 0; k < n; ++k) out_.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
  }
  Bytes& out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}
  std::uint8_t u8() { return in_[pos_++]; }
  std::uint16_t u16() { return static_cast<std::uint16_t>(get(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  double f64() { return std::bit_cast<double>(get(8)); }

 private:
  std::uint64_t get(int n) {
    std::uint64_t v = 0;
    for (int k = 0; k < n; ++k) v |= static_cast<std::uint64_t>(in_[pos_++]) << (8 * k);
    return v;
  }
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

void write_header(Writer& w, std::uint8_t type, std::uint32_t seq, TimeMs ts, std::size_t count,
                  std::optional<PartInfo> part) {
  w.u8(kMagic0);
  w.u8(kMagic1);
  w.u8(kProtocolVersion);
  w.u8(type);
  w.u32(seq);
  w.u64(static_cast<std::uint64_t>(ts));
  w.u16(static_cast<std::uint16_t>(count));
  if (part) w.u8(static_cast<std::uint8_t>((part->index & 0x7F) | (part->last ? 0x80 : 0x00)));
}

struct Header {
  std::uint8_t type;
  std::uint32_t seq;
  std::uint64_t timestamp;
  std::uint16_t count;
  std::optional<PartInfo> part;
};

// Validates the fixed header and the length implied by `count`.
std::variant<Header, DecodeError> read_header(std::span<const std::uint8_t> bytes, std::uint8_t expected_type,
                                              std::size_t record_size, std::size_t trailer_size) {
  if (bytes.size() < 2) return DecodeError::Truncated;
  if (bytes[0] != kMagic0 || bytes[1] != kMagic1) return DecodeError::BadMagic;
  if (bytes.size() < 3) return DecodeError::Truncated;
  if (bytes[2] != kProtocolVersion) return DecodeError::BadVersion;
  if (bytes.size() < kHeaderSize) return DecodeError::Truncated;
  if (bytes[3] != expected_type) return DecodeError::WrongType;

  Reader r(bytes.subspan(4));
  Header h;
  h.type = bytes[3];
  h.seq = r.u32();
  h.timestamp = r.u64();
  h.count = r.u16();
  const std::size_t plain = kHeaderSize + h.count * record_size + trailer_size;
  if (bytes.size() < plain) return DecodeError::Truncated;
  if (bytes.size() > plain + 1) return DecodeError::CountMismatch;
  if (bytes.size() == plain + 1) {
    const std::uint8_t p = bytes[kHeaderSize];
    h.part = PartInfo{static_cast<std::uint8_t>(p & 0x7F), (p & 0x80) != 0};
  }
  return h;
}

template <class T>
std::vector<std::span<const T>> split(std::span<const T> items, std::size_t per_part) {
  std::vector<std::span<const T>> parts;
  if (items.size() <= per_part) {
    parts.push_back(items);
    return parts;
  }
  for (std::size_t k = 0; k < items.size(); k += per_part)
    parts.push_back(items.subspan(k, std::min(per_part, items.size() - k)));
  if (parts.size() > 128) throw std::length_error("message needs more than 128 datagrams");
  return parts;
}

}  // namespace

std::string_view to_string(DecodeError e) {
  switch (e) {
    case DecodeError::Truncated:
      return "truncated datagram";
    case DecodeError::BadMagic:
      return "bad magic";
    case DecodeError::BadVersion:
      return "unsupported version";
    case DecodeError::WrongType:
      return "unexpected message type";
    case DecodeError::CountMismatch:
      return "record count does not match datagram length";
  }
  return "?";
}

std::vector<Bytes> encode_telemetry(const SystemSnapshot& snapshot, std::uint32_t seq) {
  constexpr std::size_t per_part = (kMaxDatagramSize - kHeaderSize - 1 - kTelemetryTrailerSize) / kTelemetryRecordSize;
  const auto parts = split(std::span<const LoadTelemetry>(snapshot.loads), per_part);
  std::vector<Bytes> out;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    Bytes b;
    Writer w(b);
    std::optional<PartInfo> part;
    if (parts.size() > 1) part = PartInfo{static_cast<std::uint8_t>(k), k + 1 == parts.size()};
    write_header(w, kMsgTelemetry, seq, snapshot.time_ms, parts[k].size(), part);
    for (const auto& l : parts[k]) {
      w.u16(l.load_id);
      w.f64(l.demand_status);
      w.f64(l.measured_power_w);
    }
    w.f64(snapshot.total_capacity_w);
    w.f64(snapshot.total_loss_w);
    w.u16(snapshot.mission_id);
    w.f64(snapshot.loading_pu);
    out.push_back(std::move(b));
  }
  return out;
}

Decoded<TelemetryFrame> decode_telemetry(std::span<const std::uint8_t> bytes) {
  auto hv = read_header(bytes, kMsgTelemetry, kTelemetryRecordSize, kTelemetryTrailerSize);
  if (auto* e = std::get_if<DecodeError>(&hv)) return *e;
  const Header& h = std::get<Header>(hv);

  TelemetryFrame f;
  f.seq = h.seq;
  f.part = h.part;
  f.snapshot.time_ms = static_cast<TimeMs>(h.timestamp);
  Reader r(bytes.subspan(kHeaderSize + (h.part ? 1 : 0)));
  f.snapshot.loads.reserve(h.count);
  for (std::size_t k = 0; k < h.count; ++k) {
    LoadTelemetry l;
    l.load_id = r.u16();
    l.demand_status = r.f64();
    l.measured_power_w = r.f64();
    f.snapshot.loads.push_back(l);
  }
  f.snapshot.total_capacity_w = r.f64();
  f.snapshot.total_loss_w = r.f64();
  f.snapshot.mission_id = r.u16();
  f.snapshot.loading_pu = r.f64();
  return f;
}

std::vector<Bytes> encode_commands(std::span<const ShedCommand> commands, std::uint32_t seq, TimeMs timestamp_ms) {
  constexpr std::size_t per_part = (kMaxDatagramSize - kHeaderSize - 1) / kCommandRecordSize;
  const auto parts = split(commands, per_part);
  std::vector<Bytes> out;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    Bytes b;
    Writer w(b);
    std::optional<PartInfo> part;
    if (parts.size() > 1) part = PartInfo{static_cast<std::uint8_t>(k), k + 1 == parts.size()};
    write_header(w, kMsgCommand, seq, timestamp_ms, parts[k].size(), part);
    for (const auto& c : parts[k]) {
      w.u16(c.load_id);
      w.f64(c.status);
    }
    out.push_back(std::move(b));
  }
  return out;
}

Decoded<CommandFrame> decode_commands(std::span<const std::uint8_t> bytes) {
  auto hv = read_header(bytes, kMsgCommand, kCommandRecordSize, 0);
  if (auto* e = std::get_if<DecodeError>(&hv)) return *e;
  const Header& h = std::get<Header>(hv);

  CommandFrame f;
  f.seq = h.seq;
  f.timestamp_ms = static_cast<TimeMs>(h.timestamp);
  f.part = h.part;
  Reader r(bytes.subspan(kHeaderSize + (h.part ? 1 : 0)));
  f.commands.reserve(h.count);
  for (std::size_t k = 0; k < h.count; ++k) {
    ShedCommand c;
    c.load_id = r.u16();
    c.status = r.f64();
    f.commands.push_back(c);
  }
  return f;
}

namespace {

// Shared fragment bookkeeping; returns the ordered parts once complete.
template <class Frame>
std::optional<std::vector<Frame>> collect(std::optional<std::uint32_t>& seq, std::map<std::uint8_t, Frame>& parts,
                                          Frame frame) {
  if (!frame.part) {
    std::vector<Frame> whole;
    whole.push_back(std::move(frame));
    return whole;
  }
  if (seq && frame.seq < *seq) return std::nullopt;  // stale fragment
  if (!seq || frame.seq != *seq) {
    seq = frame.seq;
    parts.clear();
  }
  parts[frame.part->index] = std::move(frame);
  auto last = std::find_if(parts.begin(), parts.end(), [](const auto& kv) { return kv.second.part->last; });
  if (last == parts.end()) return std::nullopt;
  const std::size_t expected = static_cast<std::size_t>(last->first) + 1;
  if (parts.size() != expected || parts.rbegin()->first != last->first) return std::nullopt;

  std::vector<Frame> ordered;
  for (auto& [idx, f] : parts) ordered.push_back(std::move(f));
  parts.clear();
  seq.reset();
  return ordered;
}

}  // namespace

std::optional<std::pair<std::uint32_t, SystemSnapshot>> TelemetryAssembler::push(TelemetryFrame frame) {
  auto ordered = collect(seq_, parts_, std::move(frame));
  if (!ordered) return std::nullopt;
  SystemSnapshot snap = std::move(ordered->back().snapshot);
  std::vector<LoadTelemetry> loads;
  for (std::size_t k = 0; k + 1 < ordered->size(); ++k) {
    auto& l = (*ordered)[k].snapshot.loads;
    loads.insert(loads.end(), l.begin(), l.end());
  }
  loads.insert(loads.end(), snap.loads.begin(), snap.loads.end());
  snap.loads = std::move(loads);
  return std::make_pair(ordered->front().seq, std::move(snap));
}

std::optional<CommandFrame> CommandAssembler::push(CommandFrame frame) {
  auto ordered = collect(seq_, parts_, std::move(frame));
  if (!ordered) return std::nullopt;
  CommandFrame out = std::move(ordered->front());
  for (std::size_t k = 1; k < ordered->size(); ++k) {
    auto& c = (*ordered)[k].commands;
    out.commands.insert(out.commands.end(), c.begin(), c.end());
  }
  out.part.reset();
  return out;
}

Impairment::Impairment(const ImpairmentConfig& config) : config_(config), rng_(config.seed) {
  if (!(config.loss_probability >= 0.0 && config.loss_probability <= 1.0))
    throw std::invalid_argument("loss probability must lie in [0,1]");
  if (!(config.latency_ms >= 0.0) || !(config.jitter_ms >= 0.0))
    throw std::invalid_argument("latency and jitter must be nonnegative");
}

double Impairment::uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

std::optional<TimeMs> Impairment::impair(TimeMs now) {
  // Two draws per datagram keep the drop schedule independent of the delay settings.
  const double u_loss = uniform();
  const double u_delay = uniform();
  if (u_loss < config_.loss_probability) return std::nullopt;
  return now + static_cast<TimeMs>(std::llround(config_.latency_ms + u_delay * config_.jitter_ms));
}

void DelayLine::push(Bytes datagram, TimeMs deliver_at) { queue_.push({deliver_at, counter_++, std::move(datagram)}); }

std::vector<Bytes> DelayLine::pop_due(TimeMs now) {
  std::vector<Bytes> out;
  while (!queue_.empty() && queue_.top().deliver_at <= now) {
    out.push_back(queue_.top().datagram);
    queue_.pop();
  }
  return out;
}

std::optional<TimeMs> DelayLine::next_delivery() const {
  if (queue_.empty()) return std::nullopt;
  return queue_.top().deliver_at;
}

}  // namespace lshed
