#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "stage/wire/messages.hpp"

namespace stage::wire {

// Two accounting modes for per-round scalar counts:
//   gap_only   counts just the anchor-mean payload (broadcast = M * d_p,
//              upload = |I_k| * d_p), the headline exchange volume;
//   full       adds ids, counts, sketch, meta-gradient, controller params
//              and the config hash (broadcast = M * d_p + |theta_pi| + 1,
//              upload = |I_k| * (d_p + 2) + 3).
// Headers (magic, type, round, client id) are routing, never counted.
enum class AccountingMode { gap_only, full };

struct PayloadEntry {
  std::uint64_t total = 0;
  std::map<std::string, std::uint64_t> breakdown;  // sums to total
};

PayloadEntry count_scalars(const ClientUpload& msg, AccountingMode mode);
PayloadEntry count_scalars(const ServerBroadcast& msg, AccountingMode mode);

// baseline / max(upload, download); how many times smaller the exchange is
// than shipping `baseline` parameters.
double payload_ratio(std::uint64_t baseline, std::uint64_t upload_total,
                     std::uint64_t download_total);

struct PayloadReport {
  AccountingMode mode = AccountingMode::full;
  PayloadEntry upload;
  PayloadEntry download;
  double ratio = 0.0;
};

PayloadReport make_payload_report(const ClientUpload& up,
                                  const ServerBroadcast& down,
                                  AccountingMode mode,
                                  std::uint64_t baseline_params);

}  // namespace stage::wire
