#pragma once

// Binary policy checkpoint, all integers and floats little-endian:
//
//   "HNRL"                      4 bytes magic
//   u32   version               currently 1
//   u8    algo tag              1 = ddpg, 2 = sac
//   u32   network count
//   per network, in the algo's fixed order:
//     u32 layer count L
//     u32 dims[L + 1]
//     u8  head                  0 = linear, 1 = tanh
//     f64 parameters            per layer: weights row-major (out x in), then biases
//   sac only: f64 log_alpha
//
// Network order: ddpg = actor, critic, actor_target, critic_target;
//                sac  = actor, q1, q2, q1_target, q2_target.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "hnav/ddpg.hpp"
#include "hnav/mlp.hpp"
#include "hnav/sac.hpp"

namespace hnav {

inline constexpr std::array<char, 4> kCheckpointMagic{'H', 'N', 'R', 'L'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using AnyAgent = std::variant<DdpgAgent, SacAgent>;

namespace detail {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

class ByteWriter {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* c = static_cast<const char*>(p);
    buf_.insert(buf_.end(), c, c + n);
  }
  void u8(std::uint8_t v) { bytes(&v, 1); }
  void u32(std::uint32_t v) { bytes(&v, 4); }
  void f64(double v) { bytes(&v, 8); }
  const std::vector<char>& data() const { return buf_; }

 private:
  std::vector<char> buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::vector<char> buf) : buf_(std::move(buf)) {}
  void bytes(void* p, std::size_t n) {
    if (pos_ + n > buf_.size()) throw CheckpointError("checkpoint: truncated file");
    std::memcpy(p, buf_.data() + pos_, n);
    pos_ += n;
  }
  std::uint8_t u8() {
    std::uint8_t v;
    bytes(&v, 1);
    return v;
  }
  std::uint32_t u32() {
    std::uint32_t v;
    bytes(&v, 4);
    return v;
  }
  double f64() {
    double v;
    bytes(&v, 8);
    return v;
  }
  bool at_end() const { return pos_ == buf_.size(); }
  std::size_t remaining() const { return buf_.size() - pos_; }

 private:
  std::vector<char> buf_;
  std::size_t pos_ = 0;
};

inline void write_network(ByteWriter& w, const Mlp& net) {
  w.u32(static_cast<std::uint32_t>(net.layer_count()));
  for (int d : net.dims()) w.u32(static_cast<std::uint32_t>(d));
  w.u8(static_cast<std::uint8_t>(net.head()));
  for (double p : net.flat_parameters()) w.f64(p);
}

inline Mlp read_network(ByteReader& r, const char* name) {
  constexpr std::uint32_t kMaxLayers = 64;
  constexpr std::uint32_t kMaxDim = 1u << 16;
  const std::uint32_t layers = r.u32();
  if (layers == 0 || layers > kMaxLayers) {
    throw CheckpointError(std::string("checkpoint: bad layer count for ") + name);
  }
  std::vector<int> dims(layers + 1);
  for (auto& d : dims) {
    const std::uint32_t v = r.u32();
    if (v == 0 || v > kMaxDim) throw CheckpointError(std::string("checkpoint: bad dims for ") + name);
    d = static_cast<int>(v);
  }
  const std::uint8_t head = r.u8();
  if (head > 1) throw CheckpointError(std::string("checkpoint: bad head tag for ") + name);
  std::size_t count = 0;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    count += static_cast<std::size_t>(dims[i + 1]) * (static_cast<std::size_t>(dims[i]) + 1);
  }
  if (count * sizeof(double) > r.remaining()) throw CheckpointError("checkpoint: truncated file");
  Mlp net(dims, static_cast<Head>(head));
  std::vector<double> params(net.parameter_count());
  for (auto& p : params) p = r.f64();
  net.set_flat_parameters(params);
  return net;
}

inline void expect_dims(const Mlp& net, int in, int out, Head head, const char* name) {
  if (net.input_size() != in || net.output_size() != out || net.head() != head) {
    throw CheckpointError(std::string("checkpoint: ") + name + " has incompatible dims");
  }
}

inline int hidden_width(const Mlp& net) { return net.dims().size() > 2 ? net.dims()[1] : 1; }
inline int hidden_count(const Mlp& net) { return static_cast<int>(net.dims().size()) - 2; }

}  // namespace detail

template <class Agent>
std::vector<char> serialize(const Agent& a) {
  detail::ByteWriter w;
  w.bytes(kCheckpointMagic.data(), kCheckpointMagic.size());
  w.u32(kCheckpointVersion);
  w.u8(Agent::kAlgoTag);
  const auto nets = a.networks();
  w.u32(static_cast<std::uint32_t>(nets.size()));
  for (const Mlp* n : nets) detail::write_network(w, *n);
  if constexpr (std::is_same_v<Agent, SacAgent>) w.f64(a.log_alpha());
  return w.data();
}

inline std::vector<char> serialize(const AnyAgent& agent) {
  return std::visit([](const auto& a) { return serialize(a); }, agent);
}

inline AnyAgent deserialize(std::vector<char> bytes) {
  detail::ByteReader r(std::move(bytes));
  std::array<char, 4> magic{};
  r.bytes(magic.data(), magic.size());
  if (magic != kCheckpointMagic) throw CheckpointError("checkpoint: bad magic (not an HNRL file)");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw CheckpointError("checkpoint: unsupported version " + std::to_string(version));
  }
  const std::uint8_t algo = r.u8();
  const std::uint32_t count = r.u32();
  constexpr int kIn = kObservationSize;
  constexpr int kCriticIn = kObservationSize + kActionSize;

  if (algo == DdpgAgent::kAlgoTag) {
    if (count != 4) throw CheckpointError("checkpoint: ddpg expects 4 networks");
    Mlp actor = detail::read_network(r, "actor");
    Mlp critic = detail::read_network(r, "critic");
    Mlp actor_t = detail::read_network(r, "actor_target");
    Mlp critic_t = detail::read_network(r, "critic_target");
    if (!r.at_end()) throw CheckpointError("checkpoint: trailing bytes");
    detail::expect_dims(actor, kIn, kActionSize, Head::tanh, "actor");
    detail::expect_dims(critic, kCriticIn, 1, Head::linear, "critic");
    if (!actor_t.same_shape(actor) || !critic_t.same_shape(critic)) {
      throw CheckpointError("checkpoint: target networks differ in shape");
    }
    DdpgConfig cfg;
    cfg.width = detail::hidden_width(actor);
    cfg.hidden_layers = detail::hidden_count(actor);
    return DdpgAgent(cfg, std::move(actor), std::move(critic), std::move(actor_t), std::move(critic_t));
  }
  if (algo == SacAgent::kAlgoTag) {
    if (count != 5) throw CheckpointError("checkpoint: sac expects 5 networks");
    Mlp actor = detail::read_network(r, "actor");
    Mlp q1 = detail::read_network(r, "q1");
    Mlp q2 = detail::read_network(r, "q2");
    Mlp q1_t = detail::read_network(r, "q1_target");
    Mlp q2_t = detail::read_network(r, "q2_target");
    const double log_alpha = r.f64();
    if (!r.at_end()) throw CheckpointError("checkpoint: trailing bytes");
    detail::expect_dims(actor, kIn, 2 * kActionSize, Head::linear, "actor");
    detail::expect_dims(q1, kCriticIn, 1, Head::linear, "q1");
    if (!q2.same_shape(q1) || !q1_t.same_shape(q1) || !q2_t.same_shape(q1)) {
      throw CheckpointError("checkpoint: critic networks differ in shape");
    }
    SacConfig cfg;
    cfg.width = detail::hidden_width(actor);
    cfg.hidden_layers = detail::hidden_count(actor);
    return SacAgent(cfg, std::move(actor), std::move(q1), std::move(q2), std::move(q1_t), std::move(q2_t),
                    log_alpha);
  }
  throw CheckpointError("checkpoint: unknown algo tag " + std::to_string(algo));
}

template <class Agent>
void save_checkpoint(const std::filesystem::path& path, const Agent& agent) {
  const auto bytes = serialize(agent);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("checkpoint: cannot write '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError("checkpoint: write failed for '" + path.string() + "'");
}

inline AnyAgent load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("checkpoint: cannot open '" + path.string() + "'");
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize(std::move(bytes));
}

}  // namespace hnav
