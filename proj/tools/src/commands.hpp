#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "config.hpp"
#include "dta/trend.hpp"
#include "manifest.hpp"

namespace dta::cli {

/// Score maps written by detect, in report column order: before, A, B, C.
inline constexpr ScoreKind detect_kinds[] = {ScoreKind::baseline, ScoreKind::intensity_only,
                                             ScoreKind::uncertainty_only, ScoreKind::proposed};

/// Report column name for a score kind ("before", "A", "B", "C").
std::string method_name(ScoreKind kind);

/// <scores>/<type>/<stem>_<kind>.pgm
std::filesystem::path score_map_path(const std::filesystem::path& scores, const std::string& type,
                                     const std::string& stem, ScoreKind kind);

/// Each command validates `config`, writes its outputs and a run manifest
/// under config.out, and returns the manifest. Progress goes to `log`.
RunManifest cmd_synth(const RunConfig& config, std::ostream& log);
RunManifest cmd_train(const RunConfig& config, std::ostream& log);
RunManifest cmd_detect(const RunConfig& config, std::ostream& log);
RunManifest cmd_evaluate(const RunConfig& config, std::ostream& log);

/// Renders a metrics JSON as the text table; with config.reference set, also
/// the per-method deltas of input against reference. Writes to `out` and,
/// when config.out is set, to that file.
void cmd_report(const RunConfig& config, std::ostream& out);

}  // namespace dta::cli
