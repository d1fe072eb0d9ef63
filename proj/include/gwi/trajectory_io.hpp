#pragma once

#include "gwi/simulate.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace gwi {

/// Text trajectory: any number of '#' comment lines, then one integer per line.
struct TrajectoryFile {
    std::vector<std::string> comments;  // without the leading '#', trimmed
    std::vector<Count> values;
};

void write_trajectory(std::ostream& out, const std::string& header, std::span<const Count> values);

/// Throws InvalidArgument on a malformed line (with its line number).
TrajectoryFile read_trajectory(std::istream& in);
TrajectoryFile read_trajectory_file(const std::string& path);

}  // namespace gwi
