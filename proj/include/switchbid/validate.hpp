#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "switchbid/core_model.hpp"

namespace switchbid {

struct ValidateOptions {
  /// Only properties whose name contains this substring run.
  std::string filter;
  /// Admission rule handed to every policy and admission check. Flipping it
  /// to weak is the deliberate fault the suite must catch.
  Threshold admission = Threshold::strict;
  std::uint64_t seed = 20240229;
};

struct PropertyResult {
  std::string name;
  bool passed = false;
  std::size_t cases = 0;
  /// First failure, or a short summary on success.
  std::string detail;
  double seconds = 0.0;
};

struct ValidateReport {
  std::vector<PropertyResult> results;
  bool all_passed() const;
};

/// Every property name, in run order.
std::vector<std::string> property_names();

/// Runs the selected properties; `on_result` sees each result as it lands.
ValidateReport run_validation(const ValidateOptions& options,
                              const std::function<void(const PropertyResult&)>& on_result = {});

}  // namespace switchbid
