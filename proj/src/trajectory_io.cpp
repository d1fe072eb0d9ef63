#include "gwi/trajectory_io.hpp"

#include "gwi/error.hpp"

#include <charconv>
#include <fmt/format.h>
#include <fstream>
#include <istream>
#include <ostream>

namespace gwi {
namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

}  // namespace

void write_trajectory(std::ostream& out, const std::string& header, std::span<const Count> values) {
    out << "# " << header << '\n';
    std::string buffer;
    buffer.reserve(values.size() * 4);
    for (Count v : values) {
        buffer += std::to_string(v);
        buffer += '\n';
    }
    out << buffer;
}

TrajectoryFile read_trajectory(std::istream& in) {
    TrajectoryFile file;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view body = trim(line);
        if (body.empty()) continue;
        if (body.front() == '#') {
            file.comments.emplace_back(trim(body.substr(1)));
            continue;
        }
        Count value = 0;
        const auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), value);
        if (ec != std::errc{} || ptr != body.data() + body.size() || value < 0)
            throw Error(ErrorKind::InvalidArgument,
                        fmt::format("line {}: expected a non-negative integer, got '{}'", line_no, body));
        file.values.push_back(value);
    }
    return file;
}

TrajectoryFile read_trajectory_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::InvalidArgument, fmt::format("cannot open trajectory file '{}'", path));
    return read_trajectory(in);
}

}  // namespace gwi
