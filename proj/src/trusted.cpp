#include "psim/trusted.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "psim/flat_id_set.hpp"

namespace psim {

namespace detail {

class BlockCipher {
 public:
  explicit BlockCipher(const SecretKey::Bytes& key)
      : enc_(EVP_CIPHER_CTX_new()), dec_(EVP_CIPHER_CTX_new()) {
    if (!enc_ || !dec_ ||
        EVP_EncryptInit_ex(enc_.get(), EVP_aes_128_ecb(), nullptr, key.data(), nullptr) != 1 ||
        EVP_DecryptInit_ex(dec_.get(), EVP_aes_128_ecb(), nullptr, key.data(), nullptr) != 1) {
      throw std::runtime_error("AES context initialisation failed");
    }
    EVP_CIPHER_CTX_set_padding(enc_.get(), 0);
    EVP_CIPHER_CTX_set_padding(dec_.get(), 0);
  }

  Digest apply(bool encrypt, const Digest& in) {
    Digest out{};
    int len = 0;
    EVP_CIPHER_CTX* ctx = encrypt ? enc_.get() : dec_.get();
    if (EVP_CipherUpdate(ctx, out.data(), &len, in.data(), static_cast<int>(in.size())) != 1 ||
        len != static_cast<int>(in.size())) {
      throw std::runtime_error("AES block operation failed");
    }
    return out;
  }

 private:
  struct CtxFree {
    void operator()(EVP_CIPHER_CTX* c) const { EVP_CIPHER_CTX_free(c); }
  };
  std::unique_ptr<EVP_CIPHER_CTX, CtxFree> enc_;
  std::unique_ptr<EVP_CIPHER_CTX, CtxFree> dec_;
};

}  // namespace detail

namespace {

struct MdCtxFree {
  void operator()(EVP_MD_CTX* c) const { EVP_MD_CTX_free(c); }
};

struct MdFree {
  void operator()(EVP_MD* m) const { EVP_MD_free(m); }
};

// Fetched once: the implicit fetch behind EVP_sha256() costs more than the hash.
const EVP_MD* sha256_md() {
  static const std::unique_ptr<EVP_MD, MdFree> md(EVP_MD_fetch(nullptr, "SHA256", nullptr));
  return md.get();
}

Nonce random_nonce(Rng& rng) {
  Nonce n{};
  const std::uint64_t a = rng();
  const std::uint64_t b = rng();
  std::memcpy(n.data(), &a, 8);
  std::memcpy(n.data() + 8, &b, 8);
  return n;
}

Digest concat_hash(const Nonce& first, const Nonce& second) {
  std::array<std::uint8_t, 32> buf{};
  std::copy(first.begin(), first.end(), buf.begin());
  std::copy(second.begin(), second.end(), buf.begin() + 16);
  return sha256(buf);
}

}  // namespace

Digest sha256(std::span<const std::uint8_t> data) {
  thread_local std::unique_ptr<EVP_MD_CTX, MdCtxFree> ctx(EVP_MD_CTX_new());
  Digest out{};
  unsigned int len = 0;
  if (!ctx || !sha256_md() || EVP_DigestInit_ex2(ctx.get(), sha256_md(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), out.data(), &len) != 1 || len != out.size()) {
    throw std::runtime_error("SHA-256 failed");
  }
  return out;
}

SecretKey::SecretKey(const Bytes& bytes)
    : bytes_(bytes), cipher_(std::make_shared<detail::BlockCipher>(bytes)) {}

SecretKey SecretKey::random(Rng& rng) {
  Bytes b{};
  const std::uint64_t lo = rng();
  const std::uint64_t hi = rng();
  std::memcpy(b.data(), &lo, 8);
  std::memcpy(b.data() + 8, &hi, 8);
  return SecretKey(b);
}

Digest SecretKey::encrypt(const Digest& plain) const { return cipher_->apply(true, plain); }
Digest SecretKey::decrypt(const Digest& cipher) const { return cipher_->apply(false, cipher); }

HandshakeResult handshake(const SecretKey& initiator_key, const SecretKey& responder_key, Rng& rng) {
  HandshakeResult res;
  auto& tr = res.transcript;

  // A -> B: r_a
  tr.r_a = random_nonce(rng);
  res.message_bytes[0] = tr.r_a.size();

  // B -> A: r_b, [H(r_a || r_b)]_{K_B}
  tr.r_b = random_nonce(rng);
  const Digest h_ab = concat_hash(tr.r_a, tr.r_b);
  tr.tag_b = responder_key.encrypt(h_ab);
  res.message_bytes[1] = tr.r_b.size() + tr.tag_b.size();

  // A checks B, then A -> B: [H(r_b || r_a)]_{K_A}
  res.initiator_trusts = initiator_key.decrypt(tr.tag_b) == concat_hash(tr.r_a, tr.r_b);
  const Digest h_ba = concat_hash(tr.r_b, tr.r_a);
  if (res.initiator_trusts) {
    tr.tag_a = initiator_key.encrypt(h_ba);
  } else {
    for (std::size_t i = 0; i < tr.tag_a.size(); i += 8) {
      const std::uint64_t word = rng();
      std::memcpy(tr.tag_a.data() + i, &word, 8);
    }
  }
  res.message_bytes[2] = tr.tag_a.size();

  // B checks A.
  res.responder_trusts = responder_key.decrypt(tr.tag_a) == h_ba;
  return res;
}

TrustedExchangeResult trusted_exchange(const View& initiator_view, const View& responder_view,
                                       NodeId initiator_id, NodeId responder_id, Rng& rng) {
  TrustedExchangeResult out{initiator_view, responder_view, {}, {}};
  if (initiator_view.size() < 2 || responder_view.size() < 2) return out;

  const auto pick_half = [&rng](const View& v) {
    const std::size_t half = v.size() / 2;
    PositionDrawer drawer(v.size(), half);
    std::vector<std::size_t> slots(half);
    for (auto& s : slots) s = drawer.next(rng);
    return slots;
  };

  const std::vector<std::size_t> init_slots = pick_half(initiator_view);
  const std::vector<std::size_t> resp_slots = pick_half(responder_view);

  std::vector<NodeId> init_sends;
  init_sends.reserve(init_slots.size());
  for (auto s : init_slots) init_sends.push_back(initiator_view[s].id);
  init_sends[uniform_index(rng, init_sends.size())] = initiator_id;

  std::vector<NodeId> resp_sends;
  resp_sends.reserve(resp_slots.size());
  for (auto s : resp_slots) resp_sends.push_back(responder_view[s].id);

  const auto install = [](View& view, const std::vector<std::size_t>& slots,
                          const std::vector<NodeId>& received, NodeId self, std::vector<NodeId>& kept) {
    for (std::size_t k = 0; k < received.size(); ++k) {
      // A link to ourselves is dropped; that slot keeps its old entry so the
      // view size is preserved.
      if (received[k] == self) continue;
      kept.push_back(received[k]);
      if (k < slots.size()) view[slots[k]] = ViewEntry{received[k], 0};
    }
  };

  install(out.initiator_view, init_slots, resp_sends, initiator_id, out.received_by_initiator);
  install(out.responder_view, resp_slots, init_sends, responder_id, out.received_by_responder);
  return out;
}

double adaptive_eviction_rate(std::size_t trusted_partners, std::size_t total_pull_partners) {
  if (total_pull_partners == 0) return 0.8;
  const double p = static_cast<double>(trusted_partners) / static_cast<double>(total_pull_partners);
  return std::clamp(1.0 - p, 0.2, 0.8);
}

EvictionPolicy EvictionPolicy::fixed(double rate) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw std::invalid_argument("eviction rate must lie in [0, 1]");
  return EvictionPolicy(Mode::Fixed, rate);
}

double EvictionPolicy::rate(std::size_t trusted_partners, std::size_t total_pull_partners) const {
  return is_adaptive() ? adaptive_eviction_rate(trusted_partners, total_pull_partners) : rate_;
}

std::string EvictionPolicy::label() const {
  if (is_adaptive()) return "adaptive";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", rate_);
  return buf;
}

std::vector<NodeId> evict(std::span<const NodeId> pulled, double rate, Rng& rng) {
  const std::size_t k = pulled.size();
  const double keep_real = (1.0 - std::clamp(rate, 0.0, 1.0)) * static_cast<double>(k);
  const std::size_t keep = std::min(k, static_cast<std::size_t>(std::floor(keep_real + 1e-9)));

  std::vector<NodeId> out;
  if (keep == k) {
    out.assign(pulled.begin(), pulled.end());
    return out;
  }
  out.reserve(keep);
  if (keep <= k / 2) {
    PositionDrawer drawer(k, keep);
    for (std::size_t i = 0; i < keep; ++i) out.push_back(pulled[drawer.next(rng)]);
    return out;
  }
  // Cheaper to choose the evicted positions.
  const std::size_t drop = k - keep;
  PositionDrawer drawer(k, drop);
  std::vector<bool> dropped(k, false);
  for (std::size_t i = 0; i < drop; ++i) dropped[drawer.next(rng)] = true;
  for (std::size_t i = 0; i < k; ++i) {
    if (!dropped[i]) out.push_back(pulled[i]);
  }
  return out;
}

}  // namespace psim
