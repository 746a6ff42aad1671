#include "footseg/net/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>

namespace footseg::net {
namespace {

class Writer {
 public:
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void bytes(const std::string& s) { out_.insert(out_.end(), s.begin(), s.end()); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& in) : in_(in) {}
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  float f32() { return std::bit_cast<float>(u32()); }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s(in_.begin() + static_cast<std::ptrdiff_t>(pos_),
                  in_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw std::runtime_error("checkpoint: truncated data");
  }
  std::uint64_t get(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(in_[pos_ + i]) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  const std::vector<std::uint8_t>& in_;
  std::size_t pos_ = 0;
};

struct Entry {
  std::string name;
  std::vector<std::uint32_t> dims;
  std::uint64_t count() const {
    std::uint64_t c = 1;
    for (auto d : dims) c *= d;
    return c;
  }
};

std::vector<Entry> manifest(const MiniSegNet<float>& net) {
  std::vector<Entry> out;
  for (const auto& l : net.layers()) {
    const auto& s = l.spec;
    out.push_back({l.name + ".weight",
                   {static_cast<std::uint32_t>(s.out_channels), static_cast<std::uint32_t>(s.in_channels),
                    static_cast<std::uint32_t>(s.kernel), static_cast<std::uint32_t>(s.kernel)}});
    out.push_back({l.name + ".bias", {static_cast<std::uint32_t>(s.out_channels)}});
  }
  return out;
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const MiniSegNet<float>& net) {
  const NetConfig& cfg = net.config();
  Writer w;
  w.bytes("MSEG");
  w.u32(kCheckpointVersion);
  w.u32(cfg.dilated ? 1u : 0u);
  w.u32(static_cast<std::uint32_t>(cfg.in_channels));
  w.f32(cfg.input_mean);
  w.f32(cfg.input_std);
  const auto entries = manifest(net);
  w.u32(static_cast<std::uint32_t>(entries.size()));
  std::uint64_t offset = 0;
  for (const auto& e : entries) {
    w.u32(static_cast<std::uint32_t>(e.name.size()));
    w.bytes(e.name);
    w.u32(static_cast<std::uint32_t>(e.dims.size()));
    for (auto d : e.dims) w.u32(d);
    w.u64(offset);
    offset += e.count();
  }
  w.u64(offset);
  for (const auto& l : net.layers()) {
    for (float v : l.weight) w.f32(v);
    for (float v : l.bias) w.f32(v);
  }
  return w.take();
}

MiniSegNet<float> decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  if (r.bytes(4) != "MSEG") throw std::runtime_error("checkpoint: bad magic");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion)
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
  NetConfig cfg;
  const std::uint32_t flags = r.u32();
  if (flags > 1) throw std::runtime_error("checkpoint: unknown flags");
  cfg.dilated = (flags & 1u) != 0;
  cfg.in_channels = static_cast<int>(r.u32());
  if (cfg.in_channels < 1 || cfg.in_channels > 64) throw std::runtime_error("checkpoint: bad channel count");
  cfg.input_mean = r.f32();
  cfg.input_std = r.f32();

  MiniSegNet<float> net(cfg);
  const auto expected = manifest(net);
  const std::uint32_t count = r.u32();
  if (count != expected.size()) throw std::runtime_error("checkpoint: manifest size mismatch");
  std::uint64_t offset = 0;
  for (const auto& e : expected) {
    const std::uint32_t len = r.u32();
    if (len > 256) throw std::runtime_error("checkpoint: bad entry name");
    const std::string name = r.bytes(len);
    const std::uint32_t rank = r.u32();
    if (rank > 8) throw std::runtime_error("checkpoint: bad entry rank");
    std::vector<std::uint32_t> dims(rank);
    for (auto& d : dims) d = r.u32();
    const std::uint64_t at = r.u64();
    if (name != e.name || dims != e.dims || at != offset)
      throw std::runtime_error("checkpoint: manifest entry '" + name + "' does not match the network layout");
    offset += e.count();
  }
  if (r.u64() != offset) throw std::runtime_error("checkpoint: payload size mismatch");
  for (auto& l : net.layers()) {
    for (float& v : l.weight) v = r.f32();
    for (float& v : l.bias) v = r.f32();
  }
  if (!r.done()) throw std::runtime_error("checkpoint: trailing data");
  return net;
}

void save_checkpoint(const std::filesystem::path& path, const MiniSegNet<float>& net) {
  const auto bytes = encode_checkpoint(net);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

MiniSegNet<float> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path.string() + ": cannot open");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace footseg::net
