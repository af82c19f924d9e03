#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mphate/embed.hpp"
#include "mphate/metrics.hpp"

namespace mphate::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs one `mphate` invocation. `args` excludes the program name.
/// Returns 0 on success, 1 on runtime or numeric failure, 2 on usage errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Metrics report as compact JSON with null for metrics that do not apply.
std::string metrics_json(const MetricsReport& report);

}  // namespace mphate::cli
