#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <optional>
#include <string_view>
#include <string>
#include <vector>

#include "vaxnet/model.hpp"

namespace vaxnet {

struct ReportRow {
    std::string scenario;
    std::string metric;
    std::string unit;
    double value = 0.0;
    std::string note;

    bool operator==(const ReportRow&) const = default;
};

/// Long-format results: one row per (scenario, metric).
struct ExperimentReport {
    std::string title;
    std::vector<ReportRow> rows;

    void add(std::string scenario, std::string metric, std::string unit, double value, std::string note = {}) {
        rows.push_back({std::move(scenario), std::move(metric), std::move(unit), value, std::move(note)});
    }

    std::vector<ReportRow> find(std::string_view metric) const {
        std::vector<ReportRow> out;
        for (const auto& r : rows)
            if (r.metric == metric) out.push_back(r);
        return out;
    }

    std::optional<double> value(std::string_view scenario, std::string_view metric) const {
        for (const auto& r : rows)
            if (r.scenario == scenario && r.metric == metric) return r.value;
        return std::nullopt;
    }

    void sort() {
        std::stable_sort(rows.begin(), rows.end(),
                         [](const ReportRow& a, const ReportRow& b) { return a.scenario < b.scenario; });
    }
};

namespace detail {

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace detail

inline void write_results_csv(const ExperimentReport& report, std::ostream& os) {
    os << "scenario,metric,unit,value,note\r\n";
    for (const auto& r : report.rows) {
        char num[64];
        std::snprintf(num, sizeof num, "%.6f", r.value);
        os << detail::csv_field(r.scenario) << ',' << detail::csv_field(r.metric) << ',' << detail::csv_field(r.unit)
           << ',' << num << ',' << detail::csv_field(r.note) << "\r\n";
    }
}

inline void export_results_csv(const ExperimentReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path + " for writing");
    write_results_csv(report, out);
    out.flush();
    if (!out) throw Error("failed writing " + path);
}

}  // namespace vaxnet
