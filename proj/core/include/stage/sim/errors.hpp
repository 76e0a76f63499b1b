#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace stage::sim {

// Non-finite loss during local training. Rounds are atomic: catching this
// means no state was committed for the round.
struct DivergenceError : std::runtime_error {
  DivergenceError(std::uint32_t client, std::uint32_t round,
                  std::uint32_t epoch, const std::string& detail)
      : std::runtime_error("client " + std::to_string(client) +
                           " diverged at round " + std::to_string(round) +
                           " epoch " + std::to_string(epoch) + ": " + detail),
        client_id(client),
        round(round),
        epoch(epoch) {}

  std::uint32_t client_id;
  std::uint32_t round;
  std::uint32_t epoch;
};

// Requested metric has no defined value (empty split, single-class AUC, ...).
struct UndefinedMetricError : std::runtime_error {
  explicit UndefinedMetricError(const std::string& what)
      : std::runtime_error(what) {}
};

// Stored config hash disagrees with the active config.
struct HashMismatchError : std::runtime_error {
  HashMismatchError(std::uint32_t expected, std::uint32_t found,
                    const std::string& where)
      : std::runtime_error("config hash mismatch in " + where + ": expected " +
                           std::to_string(expected) + ", found " +
                           std::to_string(found)) {}
};

}  // namespace stage::sim
