#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "sdde/solver.hpp"
#include "sdde/verify.hpp"

namespace sdde {

/// 17 significant digits: enough to round-trip any double, so identical
/// runs diff byte-identically.
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// Compact label for column headers (deltas, dts).
inline std::string fmt_short(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

/// Write-temp-then-rename so readers never see a torn file.
inline void atomic_write_text(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary);
        if (!os) throw std::runtime_error("cannot open for writing: " + tmp.string());
        os << content;
        if (!os) throw std::runtime_error("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline std::string trajectory_csv(const TrajectoryRecord& rec) {
    std::ostringstream os;
    os << "t,l2_norm,c_norm";
    for (double d : rec.delta_list) os << ",cdelta_" << fmt_short(d);
    os << ",fp_iters\n";
    for (std::size_t i = 0; i < rec.times.size(); ++i) {
        os << fmt17(rec.times[i]) << ',' << fmt17(rec.l2_norms[i]) << ',' << fmt17(rec.c_norms[i]);
        for (std::size_t k = 0; k < rec.delta_list.size(); ++k) os << ',' << fmt17(rec.cdelta_norms[k][i]);
        os << ',' << rec.fp_iters[i] << '\n';
    }
    return os.str();
}

inline std::string probe_csv(const ProbeReport& rep) {
    std::ostringstream os;
    os << "key,x,observed,bound\n";
    for (const ProbeRow& row : rep.rows()) {
        os << row.key << ',' << fmt17(row.x) << ',' << fmt17(row.observed) << ',';
        if (!std::isnan(row.bound)) os << fmt17(row.bound);
        os << '\n';
    }
    return os.str();
}

inline nlohmann::ordered_json probe_json(const ProbeReport& rep) {
    nlohmann::ordered_json j;
    j["name"] = rep.name();
    j["pass"] = rep.pass();
    j["slack"] = rep.slack();
    nlohmann::ordered_json consts;
    for (const auto& [k, v] : rep.constants()) consts[k] = v;
    j["constants"] = std::move(consts);
    j["notes"] = rep.notes();
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const ProbeRow& row : rep.rows()) {
        nlohmann::ordered_json r;
        r["key"] = row.key;
        r["x"] = row.x;
        r["observed"] = row.observed;
        if (!std::isnan(row.bound)) r["bound"] = row.bound;
        r["asserted"] = row.asserted;
        rows.push_back(std::move(r));
    }
    j["rows"] = std::move(rows);
    return j;
}

/// dt-refinement table; the order column is empty on the first pair.
inline std::string order_table_csv(const std::vector<double>& dt_list, const std::vector<double>& diffs,
                                   const std::vector<double>& orders) {
    std::ostringstream os;
    os << "dt_coarse,dt_fine,final_diff,observed_order\n";
    for (std::size_t i = 0; i < diffs.size(); ++i) {
        os << fmt17(dt_list[i]) << ',' << fmt17(dt_list[i + 1]) << ',' << fmt17(diffs[i]) << ',';
        if (i < orders.size() && !std::isnan(orders[i])) os << fmt17(orders[i]);
        os << '\n';
    }
    return os.str();
}

}  // namespace sdde
