#pragma once

// Trusted-node extensions to Brahms: mutual authentication by shared key,
// half-view swaps between authenticated trusted nodes, and eviction of ids
// pulled from untrusted peers.
//
// Cryptography: H is SHA-256 and [x]_K is AES-128 applied to the two 16-byte
// blocks of a digest (no chaining; every digest is fresh per handshake).

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "psim/brahms.hpp"
#include "psim/node_id.hpp"
#include "psim/rng.hpp"

namespace psim {

using Digest = std::array<std::uint8_t, 32>;
using Nonce = std::array<std::uint8_t, 16>;

Digest sha256(std::span<const std::uint8_t> data);

namespace detail {
class BlockCipher;
}

/// 128-bit symmetric key. Trusted nodes all hold one provisioned key; every
/// untrusted node draws its own at start-up.
///
/// Copies share the underlying cipher context, so a key (and its copies)
/// must not be used from two threads at once.
class SecretKey {
 public:
  using Bytes = std::array<std::uint8_t, 16>;

  explicit SecretKey(const Bytes& bytes);
  static SecretKey random(Rng& rng);

  const Bytes& bytes() const { return bytes_; }
  bool operator==(const SecretKey& other) const { return bytes_ == other.bytes_; }

  Digest encrypt(const Digest& plain) const;
  Digest decrypt(const Digest& cipher) const;

 private:
  Bytes bytes_;
  std::shared_ptr<detail::BlockCipher> cipher_;
};

struct HandshakeTranscript {
  Nonce r_a{};
  Nonce r_b{};
  Digest tag_b{};  // [H(r_a || r_b)]_{K_B}
  Digest tag_a{};  // [H(r_b || r_a)]_{K_A}, or a same-sized decoy
};

struct HandshakeResult {
  bool initiator_trusts = false;
  bool responder_trusts = false;
  HandshakeTranscript transcript;
  /// Wire size of the three messages A->B, B->A, A->B.
  std::array<std::size_t, 3> message_bytes{};
};

/// Three-message challenge-response between initiator A and responder B.
/// A sends its third message whatever the outcome of its own check; when the
/// check failed the message is random bytes, so traffic shape never depends
/// on trust status and B can only trust A if A trusted B.
HandshakeResult handshake(const SecretKey& initiator_key, const SecretKey& responder_key, Rng& rng);

struct TrustedExchangeResult {
  View initiator_view;
  View responder_view;
  std::vector<NodeId> received_by_initiator;
  std::vector<NodeId> received_by_responder;
};

/// Half-view shuffle between two authenticated trusted nodes.
///
/// Each side sends floor(|view| / 2) entries chosen uniformly at random; the
/// initiator replaces one of its sent entries with its own id. Each side
/// overwrites the slots it sent with what it received (a received id equal to
/// the receiver's own id leaves the slot unchanged), so view sizes never
/// change. Views shorter than 2 skip the exchange.
TrustedExchangeResult trusted_exchange(const View& initiator_view, const View& responder_view,
                                       NodeId initiator_id, NodeId responder_id, Rng& rng);

/// Linear rule clamped to [0.2, 0.8]: 1 - trusted/total.
double adaptive_eviction_rate(std::size_t trusted_partners, std::size_t total_pull_partners);

class EvictionPolicy {
 public:
  enum class Mode { Fixed, Adaptive };

  static EvictionPolicy fixed(double rate);
  static EvictionPolicy adaptive() { return EvictionPolicy(Mode::Adaptive, 0.0); }

  Mode mode() const { return mode_; }
  double fixed_rate() const { return rate_; }
  bool is_adaptive() const { return mode_ == Mode::Adaptive; }

  double rate(std::size_t trusted_partners, std::size_t total_pull_partners) const;

  /// "adaptive", or the fixed rate with 6 decimals.
  std::string label() const;
  std::string mode_name() const { return is_adaptive() ? "adaptive" : "fixed"; }

  bool operator==(const EvictionPolicy&) const = default;

 private:
  EvictionPolicy(Mode mode, double rate) : mode_(mode), rate_(rate) {}
  Mode mode_;
  double rate_;
};

/// Uniform random subset of exactly floor((1 - rate) * |pulled|) ids.
std::vector<NodeId> evict(std::span<const NodeId> pulled, double rate, Rng& rng);

}  // namespace psim
