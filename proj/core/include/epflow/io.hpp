#pragma once

#include <string>
#include <vector>

#include "epflow/experiments.hpp"

namespace epflow {

/// 17 significant digits, enough to reproduce the double bit pattern.
std::string format_double(double value);

/// Write via a temp file in the same directory, then rename over the target.
void write_file_atomic(const std::string& path, const std::string& content);

/// Fixed column order:
///   t,H,K,E_r,E_a,E_w,com,n_clusters
/// and for comparison series additionally
///   H_rel,K_rel,Ew_rel,Er_rel,Ea_rel,shift_a,work_rate,correction,residual
std::string series_csv(const std::vector<SeriesRow>& rows, bool with_relative);

/// JSON summary: pass/fail, measured metrics, notes, config echo, version.
std::string summary_json(const ExperimentReport& report, const std::string& config_echo);

const char* version_string();

} // namespace epflow
