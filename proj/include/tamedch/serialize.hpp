// SPDX-License-Identifier: Apache-2.0
//
// SpectralField on-disk formats.
//
// CSV:     "dim,N" header, a "<dim>,<N>" line, then the mean followed by each
//          coefficient in flat order, one value per line with 17 significant
//          digits (round-trips doubles exactly).
// Binary:  "TCHF" magic, u32 version (1), u32 dim, u32 N, u64 count, then
//          count+1 little-endian f64 values (mean first).
#pragma once

#include <iosfwd>
#include <string>

#include "tamedch/spectral.hpp"

namespace tamedch {

void write_field_csv(std::ostream& os, const SpectralField& v);
SpectralField read_field_csv(std::istream& is);

void write_field_binary(std::ostream& os, const SpectralField& v);
SpectralField read_field_binary(std::istream& is);

/// Shortest text that parses back to exactly x; "Inf", "-Inf", "NaN" for non-finite values.
std::string format_double(double x);

}  // namespace tamedch
