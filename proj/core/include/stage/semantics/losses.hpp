#pragma once

#include <cstdint>
#include <vector>

#include "stage/num/matrix.hpp"
#include "stage/semantics/anchor_bank.hpp"

namespace stage::semantics {

struct EntropyLossResult {
  double loss = 0.0;       // sum_i qbar_i log qbar_i, in [-log M, 0]
  num::DenseMatrix dq;     // exact gradient w.r.t. every Q entry
};

// Negative Shannon entropy of the column-mean assignment. Minimizing it
// spreads mass across anchors (max-entropy regularizer).
EntropyLossResult entropy_loss(const num::DenseMatrix& q);

// argmax per row, ties to the lowest anchor id.
std::vector<std::uint32_t> hard_assignments(const num::DenseMatrix& q);

// Per-anchor hard-assignment statistics. Only anchors with at least n_min
// assigned nodes are active; ids ascend.
struct AnchorStats {
  std::vector<std::uint32_t> anchor_ids;
  num::DenseMatrix means;  // |I_k| x d_p
  std::vector<std::uint32_t> counts;
};

AnchorStats anchor_conditional_means(const num::DenseMatrix& h,
                                     const num::DenseMatrix& q,
                                     std::uint32_t n_min);

struct GapLossResult {
  double loss = 0.0;
  num::DenseMatrix dmeans;  // gradient w.r.t. each active mean
  bool skipped = false;     // empty active set: loss contributes 0
};

// InfoNCE alignment of local anchor means onto the global prototypes:
//   loss = -(1/|I|) sum_{i in I} log softmax_j( cos(mu_i, Hbar_j)/tau_c )[i].
// Prototypes are constants here; chaining into trainables is the caller's job.
GapLossResult gap_loss(const AnchorStats& stats,
                       const GlobalAnchorPrototypes& gap, double tau_c);

struct AnchorPurity {
  std::uint32_t anchor = 0;
  std::uint32_t count = 0;
  std::uint32_t dominant_class = 0;
  double purity = 0.0;  // dominant-class share of assigned nodes
};

// Top activated anchors by hard-assignment count (ties to the lowest anchor
// id); anchors with zero assignments never appear.
std::vector<AnchorPurity> anchor_purity(const num::DenseMatrix& q,
                                        const std::vector<std::uint32_t>& labels,
                                        std::uint32_t top_n);

}  // namespace stage::semantics
