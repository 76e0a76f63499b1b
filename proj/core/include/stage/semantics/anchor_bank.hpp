#pragma once

#include <cstdint>
#include <string>

#include "stage/num/matrix.hpp"

namespace stage::semantics {

// Frozen shared reference rows. Unit-norm rows; exactly orthonormal whenever
// anchor_count <= protocol_dim, near-orthogonal Gaussian frame otherwise.
// Never trained; byte_hash() lets callers assert immutability.
struct AnchorBank {
  std::uint32_t anchor_count = 0;   // M
  std::uint32_t protocol_dim = 0;   // d_p
  num::DenseMatrix rows;            // M x d_p
  bool frozen = true;
};

AnchorBank init_anchor_bank(std::uint32_t anchor_count,
                            std::uint32_t protocol_dim, std::uint64_t seed);

// FNV-1a over the row bytes; stable across platforms for identical values.
std::uint64_t bank_hash(const AnchorBank& bank);

void save_bank(const AnchorBank& bank, const std::string& path,
               std::uint32_t config_hash);

struct LoadedBank {
  AnchorBank bank;
  std::uint32_t config_hash = 0;
};
LoadedBank load_bank(const std::string& path);

// Server-evolved per-anchor mean representations, same shape as the bank.
// Rows stay unit-norm through every update.
struct GlobalAnchorPrototypes {
  num::DenseMatrix rows;  // M x d_p
  std::uint32_t round = 0;
};

}  // namespace stage::semantics
