// SPDX-License-Identifier: Apache-2.0
//
// CSV tables and the run manifest. Every CSV starts with a
// "# config_sha1=<hash>" line tying it to the configuration that produced it.
// Numbers are printed in shortest round-trip form, so identical reports give
// byte-identical files.
#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

#include "tamedch/experiments.hpp"

namespace tamedch {

/// Git blob hash: SHA-1 of "blob <size>\0" followed by the content, lowercase hex.
std::string git_blob_sha1(std::string_view content);

/// tau,error,stderr,samples,wallclock_s rows plus a "slope,<slope>,<stderr>,<samples>,<total>" footer.
/// With timing disabled the wall-clock column is written as 0.
void write_temporal_csv(std::ostream& os, const ErrorReport& report, const std::string& config_hash, bool timing);

/// N,lambda_N,error,stderr,samples,wallclock_s rows plus the slope footer (slope against lambda_N).
void write_spatial_csv(std::ostream& os, const ErrorReport& report, const std::string& config_hash, bool timing);

/// M,mean_norm rows; non-finite means print as Inf / NaN.
void write_blowup_csv(std::ostream& os, const std::vector<BlowupRow>& rows, const std::string& config_hash);

/// tau,error_TEEM,error_BEM,time_TEEM,time_BEM rows.
void write_compare_csv(std::ostream& os, const Comparison& cmp, const std::string& config_hash, bool timing);

}  // namespace tamedch
