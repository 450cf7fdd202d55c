// SPDX-License-Identifier: Apache-2.0
#include "tamedch/report.hpp"

#include <openssl/evp.h>

#include <ostream>
#include <stdexcept>
#include <string>

#include <fmt/format.h>

#include "tamedch/serialize.hpp"

namespace tamedch {

std::string git_blob_sha1(std::string_view content) {
  const std::string header = fmt::format("blob {}", content.size());
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr) throw std::runtime_error("EVP_MD_CTX_new failed");
  const bool ok = EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, header.data(), header.size() + 1) == 1 &&  // include the NUL
                  EVP_DigestUpdate(ctx, content.data(), content.size()) == 1 &&
                  EVP_DigestFinal_ex(ctx, digest, &length) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw std::runtime_error("SHA-1 digest failed");
  std::string hex;
  for (unsigned int i = 0; i < length; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

namespace {

std::string fmt_time(double seconds, bool timing) { return timing ? format_double(seconds) : "0"; }

void write_footer(std::ostream& os, const ErrorReport& report, bool timing) {
  double total = 0.0;
  for (const auto& r : report.rows) total += r.wallclock_s;
  os << "slope," << format_double(report.fit.slope) << ',' << format_double(report.fit.std_error) << ','
     << report.samples << ',' << fmt_time(total, timing) << '\n';
}

}  // namespace

void write_temporal_csv(std::ostream& os, const ErrorReport& report, const std::string& config_hash, bool timing) {
  os << "# config_sha1=" << config_hash << '\n';
  os << "tau,error,stderr,samples,wallclock_s\n";
  for (const auto& r : report.rows) {
    os << format_double(r.h) << ',' << format_double(r.error) << ',' << format_double(r.std_error) << ','
       << r.samples << ',' << fmt_time(r.wallclock_s, timing) << '\n';
  }
  write_footer(os, report, timing);
}

void write_spatial_csv(std::ostream& os, const ErrorReport& report, const std::string& config_hash, bool timing) {
  os << "# config_sha1=" << config_hash << '\n';
  os << "N,lambda_N,error,stderr,samples,wallclock_s\n";
  for (const auto& r : report.rows) {
    os << r.N << ',' << format_double(r.h) << ',' << format_double(r.error) << ',' << format_double(r.std_error)
       << ',' << r.samples << ',' << fmt_time(r.wallclock_s, timing) << '\n';
  }
  double total = 0.0;
  for (const auto& r : report.rows) total += r.wallclock_s;
  os << "slope,," << format_double(report.fit.slope) << ',' << format_double(report.fit.std_error) << ','
     << report.samples << ',' << fmt_time(total, timing) << '\n';
}

void write_blowup_csv(std::ostream& os, const std::vector<BlowupRow>& rows, const std::string& config_hash) {
  os << "# config_sha1=" << config_hash << '\n';
  os << "M,mean_norm\n";
  for (const auto& r : rows) os << r.M << ',' << format_double(r.mean_norm) << '\n';
}

void write_compare_csv(std::ostream& os, const Comparison& cmp, const std::string& config_hash, bool timing) {
  os << "# config_sha1=" << config_hash << '\n';
  os << "tau,error_TEEM,error_BEM,time_TEEM,time_BEM\n";
  for (const auto& r : cmp.rows) {
    os << format_double(r.tau) << ',' << format_double(r.error_tamed) << ',' << format_double(r.error_backward)
       << ',' << fmt_time(r.time_tamed, timing) << ',' << fmt_time(r.time_backward, timing) << '\n';
  }
}

}  // namespace tamedch
