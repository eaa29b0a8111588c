#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "reachkit/tasks.hpp"

namespace reachkit {

// One JSON object per line:
// {"task","step","t","x","y","theta","v","omega"}.
std::string record_line(const TrajectoryRecord& r);
TrajectoryRecord parse_record_line(const std::string& line);

void write_jsonl(const std::filesystem::path& path, const std::vector<TrajectoryRecord>& records);
// Throws FormatError naming the first malformed line.
std::vector<TrajectoryRecord> read_jsonl(const std::filesystem::path& path);

}  // namespace reachkit
