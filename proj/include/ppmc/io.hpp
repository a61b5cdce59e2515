#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ppmc/analysis.hpp"
#include "ppmc/data.hpp"

namespace ppmc {

/// Read a panel from CSV with header person_id,time,y1,y2 followed by
/// covariate columns prefixed x1_/x2_/xb_. Rows are sorted into a balanced
/// panel; Mundlak averages of the xb_ columns are attached to both equations.
/// Throws std::runtime_error naming offending persons for unbalanced panels,
/// and for non-binary y1 or NaN cells.
PanelData ingest_csv(const std::string& path);

/// Write a panel in the same format ingest_csv reads; round-trips bit-exactly.
void write_panel_csv(const PanelData& data, const std::string& path);

/// One row per post-burnin iterate, one column per parameter (17 significant
/// digits, so values round-trip bit-exactly).
void write_draws_csv(const ChainOutput& chain, const std::string& path);

/// FNV-1a 64-bit content hash of a file, hex-encoded.
std::string file_content_hash(const std::string& path);

}  // namespace ppmc
