#include "tclevy/csvio.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "tclevy/common.hpp"

namespace tclevy {

std::string format_g17(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
}

std::string status_name(Path::Status s) {
    switch (s) {
        case Path::Status::Alive: return "alive";
        case Path::Status::Exploded: return "exploded";
        case Path::Status::Censored: return "censored";
    }
    return "unknown";
}

void append_path_rows(std::ostream& os, const Path& p, int excursion_id) {
    std::string st = status_name(p.status);
    for (std::size_t i = 0; i < p.times.size(); ++i)
        os << format_g17(p.times[i]) << ',' << format_g17(p.values[i]) << ',' << st
           << ',' << excursion_id << '\n';
}

void append_path_rows(std::ostream& os, const Path& p, const std::vector<int>& ids) {
    if (ids.size() != p.times.size())
        throw BadParam("append_path_rows: id column must match the node count");
    std::string st = status_name(p.status);
    for (std::size_t i = 0; i < p.times.size(); ++i)
        os << format_g17(p.times[i]) << ',' << format_g17(p.values[i]) << ',' << st
           << ',' << ids[i] << '\n';
}

void write_path_csv(std::ostream& os, const Path& p, int excursion_id) {
    os << kPathCsvHeader << '\n';
    append_path_rows(os, p, excursion_id);
}

void write_paths_csv(std::ostream& os, const std::vector<Path>& paths) {
    os << kPathCsvHeader << '\n';
    for (std::size_t i = 0; i < paths.size(); ++i)
        append_path_rows(os, paths[i], static_cast<int>(i));
}

void write_study_csv(std::ostream& os, const std::vector<StudyRow>& rows) {
    os << kStudyCsvHeader << '\n';
    for (const auto& r : rows)
        os << r.key << ',' << format_g17(r.x_or_t) << ',' << r.statistic << ','
           << format_g17(r.value) << ',' << format_g17(r.err) << '\n';
}

} // namespace tclevy
