#include "epflow/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace epflow {

const char* version_string() { return "epflow 0.1.0"; }

std::string format_double(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, target);
}

std::string series_csv(const std::vector<SeriesRow>& rows, bool with_relative) {
    std::string out = "t,H,K,E_r,E_a,E_w,com,n_clusters";
    if (with_relative)
        out += ",H_rel,K_rel,Ew_rel,Er_rel,Ea_rel,shift_a,work_rate,correction,residual";
    out += "\n";
    for (const auto& row : rows) {
        out += format_double(row.t);
        for (double v : {row.H, row.K, row.E_r, row.E_a, row.E_w, row.com})
            out += "," + format_double(v);
        out += "," + std::to_string(row.n_clusters);
        if (with_relative) {
            for (double v : {row.H_rel, row.K_rel, row.Ew_rel, row.Er_rel, row.Ea_rel,
                             row.shift_a, row.work_rate, row.correction, row.residual})
                out += "," + format_double(v);
        }
        out += "\n";
    }
    return out;
}

std::string summary_json(const ExperimentReport& report, const std::string& config_echo) {
    nlohmann::ordered_json j;
    j["experiment"] = report.name;
    j["pass"] = report.pass;
    nlohmann::ordered_json metrics;
    for (const auto& [key, value] : report.metrics) metrics[key] = value;
    j["metrics"] = metrics;
    j["notes"] = report.notes;
    j["config"] = config_echo;
    j["version"] = version_string();
    return j.dump(2) + "\n";
}

} // namespace epflow
