#pragma once

#include <string>

#include "retq/config_io.hpp"
#include "retq/ergodicity.hpp"

namespace retq {

inline constexpr const char* kToolVersion = "retq 0.1.0";

// Artifact provenance written into every report.
struct RunMeta {
  std::string config_hash;
  std::uint64_t seed = 0;
};

std::string to_json(const StabilityReport& rep, const RunMeta& meta);
std::string to_json(const MeasureReport& m, const SolverStats& stats,
                    const RunMeta& meta);
std::string to_json(const SimEstimate& e, const RunMeta& meta);
std::string to_json(const OptResult& r, const RunMeta& meta);

// Comparison of analytic measures against simulation CIs, one row per measure.
std::string agreement_csv(const MeasureReport& m, const SimEstimate& e);

// level, state-index, probability
void write_distribution_csv(const StationaryDistribution& z, const std::string& path);

// Optimum row in the layout of the published result tables.
std::string optimum_csv(const OptResult& r);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace retq
