#include "stage/semantics/anchor_bank.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "stage/num/rng.hpp"
#include "stage/wire/bytes.hpp"

namespace stage::semantics {

AnchorBank init_anchor_bank(std::uint32_t anchor_count,
                            std::uint32_t protocol_dim, std::uint64_t seed) {
  if (anchor_count < 2 || protocol_dim < 2) {
    throw std::invalid_argument("need anchor_count >= 2 and protocol_dim >= 2");
  }
  AnchorBank bank;
  bank.anchor_count = anchor_count;
  bank.protocol_dim = protocol_dim;
  bank.rows = num::DenseMatrix(anchor_count, protocol_dim);
  num::Rng rng(num::derive_seed(seed, "anchor_bank"));

  const bool orthogonalize = anchor_count <= protocol_dim;
  for (std::uint32_t i = 0; i < anchor_count; ++i) {
    auto row = bank.rows.row(i);
    while (true) {
      for (double& x : row) x = rng.normal();
      if (orthogonalize) {
        // Modified Gram-Schmidt against accepted rows.
        for (std::uint32_t j = 0; j < i; ++j) {
          const auto prev = bank.rows.row(j);
          const double proj = num::dot(row, prev);
          for (std::size_t t = 0; t < row.size(); ++t) row[t] -= proj * prev[t];
        }
      }
      const double n = num::norm(row);
      if (n > 1e-8) {  // redraw near-degenerate rows
        for (double& x : row) x /= n;
        break;
      }
    }
  }
  return bank;
}

std::uint64_t bank_hash(const AnchorBank& bank) {
  std::uint64_t h = 1469598103934665603ull;
  for (double v : bank.rows.values()) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xff;
      h *= 1099511628211ull;
    }
  }
  return h;
}

void save_bank(const AnchorBank& bank, const std::string& path,
               std::uint32_t config_hash) {
  wire::ByteWriter w;
  w.magic("ANB1");
  w.u32(1);  // version
  w.u32(config_hash);
  w.u32(bank.anchor_count);
  w.u32(bank.protocol_dim);
  for (double v : bank.rows.values()) w.f64(v);
  wire::write_file(path, w.buffer());
}

LoadedBank load_bank(const std::string& path) {
  const auto data = wire::read_file(path);
  wire::ByteReader r(data);
  r.expect_magic("ANB1");
  const std::uint32_t version = r.u32();
  if (version != 1) {
    throw wire::ParseError(r.offset() - 4,
                           "unsupported ANB1 version " + std::to_string(version));
  }
  LoadedBank out;
  out.config_hash = r.u32();
  out.bank.anchor_count = r.u32();
  out.bank.protocol_dim = r.u32();
  out.bank.rows =
      num::DenseMatrix(out.bank.anchor_count, out.bank.protocol_dim);
  for (double& v : out.bank.rows.values()) v = r.f64();
  r.expect_end();
  return out;
}

}  // namespace stage::semantics
