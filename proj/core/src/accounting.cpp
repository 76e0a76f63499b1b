#include "stage/wire/accounting.hpp"

#include <algorithm>
#include <stdexcept>

namespace stage::wire {

PayloadEntry count_scalars(const ClientUpload& msg, AccountingMode mode) {
  msg.validate();
  PayloadEntry e;
  e.breakdown["means"] = msg.means.size();
  if (mode == AccountingMode::full) {
    e.breakdown["anchor_ids"] = msg.anchor_ids.size();
    e.breakdown["counts"] = msg.counts.size();
    e.breakdown["sketch"] = 2;
    e.breakdown["meta_gradient"] = 1;
  }
  for (const auto& [field, n] : e.breakdown) e.total += n;
  return e;
}

PayloadEntry count_scalars(const ServerBroadcast& msg, AccountingMode mode) {
  msg.validate();
  PayloadEntry e;
  e.breakdown["prototypes"] = msg.prototypes.size();
  if (mode == AccountingMode::full) {
    e.breakdown["controller_params"] = msg.controller_params.size();
    e.breakdown["config_hash"] = 1;
  }
  for (const auto& [field, n] : e.breakdown) e.total += n;
  return e;
}

double payload_ratio(std::uint64_t baseline, std::uint64_t upload_total,
                     std::uint64_t download_total) {
  if (baseline == 0) throw std::invalid_argument("baseline must be > 0");
  const std::uint64_t peak = std::max(upload_total, download_total);
  if (peak == 0) throw std::invalid_argument("empty payload");
  return static_cast<double>(baseline) / static_cast<double>(peak);
}

PayloadReport make_payload_report(const ClientUpload& up,
                                  const ServerBroadcast& down,
                                  AccountingMode mode,
                                  std::uint64_t baseline_params) {
  PayloadReport report;
  report.mode = mode;
  report.upload = count_scalars(up, mode);
  report.download = count_scalars(down, mode);
  report.ratio = payload_ratio(baseline_params, report.upload.total,
                               report.download.total);
  return report;
}

}  // namespace stage::wire
