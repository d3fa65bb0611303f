#include "carlin/trajectory_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace carlin {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17e", v);
    return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

double parse_double(const std::string& field, std::size_t line_no) {
    const char* begin = field.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0')
        throw ParseError("trajectory CSV line " + std::to_string(line_no) +
                         ": bad numeric field '" + field + "'");
    return v;
}

} // namespace

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
    const int n = traj.dim;
    out << "t";
    for (int i = 0; i < n; ++i) out << ",x" << i;
    for (int i = 0; i < n; ++i) out << ",s" << i;
    out << ",switched\n";
    for (std::size_t r = 0; r < traj.times.size(); ++r) {
        out << fmt(traj.times[r]);
        for (int i = 0; i < n; ++i)
            out << ',' << fmt(traj.states[r][static_cast<std::size_t>(i)]);
        for (int i = 0; i < n; ++i)
            out << ',' << fmt(traj.row_pivots[r][static_cast<std::size_t>(i)]);
        out << ',' << (traj.row_switched[r] ? 1 : 0) << '\n';
    }
    if (traj.divergence_time)
        out << "# diverged at t=" << fmt(*traj.divergence_time) << '\n';
}

Trajectory read_trajectory_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;

    if (!std::getline(in, line))
        throw ParseError("trajectory CSV: empty input");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> header = split(line, ',');
    if (header.size() < 4 || header.front() != "t" || header.back() != "switched" ||
        header.size() % 2 != 0)
        throw ParseError("trajectory CSV: unrecognised header");
    const int n = static_cast<int>((header.size() - 2) / 2);

    Trajectory traj;
    traj.dim = n;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.front() == '#') {
            const std::string tag = "# diverged at t=";
            if (line.rfind(tag, 0) == 0)
                traj.divergence_time = parse_double(line.substr(tag.size()), line_no);
            continue;
        }
        const std::vector<std::string> fields = split(line, ',');
        if (fields.size() != header.size())
            throw ParseError("trajectory CSV line " + std::to_string(line_no) +
                             ": wrong field count");
        traj.times.push_back(parse_double(fields[0], line_no));
        std::vector<double> x(static_cast<std::size_t>(n));
        std::vector<double> s(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            x[static_cast<std::size_t>(i)] =
                parse_double(fields[static_cast<std::size_t>(1 + i)], line_no);
        for (int i = 0; i < n; ++i)
            s[static_cast<std::size_t>(i)] =
                parse_double(fields[static_cast<std::size_t>(1 + n + i)], line_no);
        traj.states.push_back(std::move(x));
        traj.row_pivots.push_back(std::move(s));
        const std::string& sw = fields.back();
        if (sw != "0" && sw != "1")
            throw ParseError("trajectory CSV line " + std::to_string(line_no) +
                             ": switched flag must be 0 or 1");
        traj.row_switched.push_back(sw == "1" ? 1 : 0);
    }
    return traj;
}

void save_trajectory_csv(const Trajectory& traj, const std::string& path) {
    std::ofstream f(path);
    if (!f)
        throw IoError("cannot open '" + path + "' for writing");
    write_trajectory_csv(traj, f);
    f.flush();
    if (!f)
        throw IoError("failed writing '" + path + "'");
}

Trajectory load_trajectory_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f)
        throw IoError("cannot open '" + path + "' for reading");
    return read_trajectory_csv(f);
}

} // namespace carlin
