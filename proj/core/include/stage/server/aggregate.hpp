#pragma once

#include <cstdint>
#include <vector>

#include "stage/num/param_store.hpp"
#include "stage/semantics/anchor_bank.hpp"
#include "stage/semantics/losses.hpp"

namespace stage::server {

struct GapUpload {
  std::uint32_t client_id = 0;
  semantics::AnchorStats stats;
};

// Count-weighted pooling of client anchor means, then per-anchor EMA with
// momentum m_ema and row re-normalization. Anchors nobody reported stay
// untouched. Uploads are pooled in client-id order (permutation-invariant).
semantics::GlobalAnchorPrototypes update_gap(
    const semantics::GlobalAnchorPrototypes& gap,
    std::vector<GapUpload> uploads, double m_ema);

// Weighted mean per entry across stores. Entries present in every store are
// averaged (shapes must agree; mismatch names the entry); entries missing
// from any store pass through untouched from the first store holding them.
num::ParamStore aggregate_fedavg(
    const std::vector<const num::ParamStore*>& stores,
    const std::vector<double>& weights);

}  // namespace stage::server
