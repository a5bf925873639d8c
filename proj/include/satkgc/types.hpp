#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace satkgc {

using EntityId = std::int32_t;
using RelationId = std::int32_t;
using TripleId = std::int32_t;

// Sentinel for "no path" in shortest-path distances.
inline constexpr std::int32_t kUnreachable = -1;

// A forward training triple. Inverse triples are derived views: the inverse
// of (h, r, t) is (t, inverse(r), h) and shares the same TripleId.
struct Triple {
  EntityId head = 0;
  RelationId rel = 0;
  EntityId tail = 0;

  friend bool operator==(const Triple&, const Triple&) = default;
};

// Bad or inconsistent input data (files, ids, graph structure).
struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid configuration (ranges, missing required options).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite values where finite ones are required.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// A caller broke a documented precondition.
struct ContractViolation : std::logic_error {
  explicit ContractViolation(const std::string& msg) : std::logic_error(msg) {}
};

}  // namespace satkgc
