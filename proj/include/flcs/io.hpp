#pragma once

#include "flcs/lcs.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace flcs {

/// Writes lambda1.csv, ftle.csv, gap.csv, xi1_<k>.csv and meta.json into `dir` (created if missing).
/// CSV rows are `x_0,...,x_{d-1},value` in flat node order, no header; invalid nodes hold `nan`.
void write_field(const FieldGrid& field, const std::filesystem::path& dir);
FieldGrid read_field(const std::filesystem::path& dir);

/// Writes ridges.json (full diagnostics) and ridges.csv (polyline,x,y,lambda1,angle).
void write_ridges(const RidgeSet& ridges, const std::filesystem::path& dir, const std::string& stem = "ridges");
RidgeSet read_ridges(const std::filesystem::path& json_file);

/// Run-length encoding of the valid mask: alternating run lengths starting with a valid run.
std::vector<long> encode_mask(const std::vector<std::uint8_t>& valid);
std::vector<std::uint8_t> decode_mask(const std::vector<long>& runs);

/// Writes `text` to `dir/name`, creating `dir`.
void write_text(const std::filesystem::path& dir, const std::string& name, const std::string& text);
std::string read_text(const std::filesystem::path& file);

}  // namespace flcs
