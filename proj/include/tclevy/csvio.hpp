#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "tclevy/time_change.hpp"

namespace tclevy {

// Fixed, versioned CSV schemas. The first line of every file is the header.
inline constexpr int kCsvSchemaVersion = 1;
inline constexpr const char* kPathCsvHeader = "t,value,status,excursion_id";
inline constexpr const char* kStudyCsvHeader = "key,x_or_t,statistic,value,stderr";

// Shortest round-trip decimal of a double ("%.17g"); infinities print as
// inf / -inf so files stay loadable and byte-stable.
std::string format_g17(double v);

std::string status_name(Path::Status s);

// One aggregated statistic for the study schema.
struct StudyRow {
    std::string key;
    double x_or_t = 0.0;
    std::string statistic;
    double value = 0.0;
    double err = 0.0;
};

// Path rows without a header; one row per node, all carrying the path status.
void append_path_rows(std::ostream& os, const Path& p, int excursion_id);

// Path rows with per-node ids (the glued-extension export). ids must be
// parallel to the nodes.
void append_path_rows(std::ostream& os, const Path& p, const std::vector<int>& ids);

// Whole files: header plus rows.
void write_path_csv(std::ostream& os, const Path& p, int excursion_id = 0);
void write_paths_csv(std::ostream& os, const std::vector<Path>& paths);
void write_study_csv(std::ostream& os, const std::vector<StudyRow>& rows);

} // namespace tclevy
