#include "reachkit/trajectory_io.hpp"

#include <fstream>

#include <json.hpp>

#include "reachkit/errors.hpp"

namespace reachkit {

using nlohmann::json;

std::string record_line(const TrajectoryRecord& r) {
  // ordered_json keeps the documented key order on disk.
  nlohmann::ordered_json j;
  j["task"] = r.task;
  j["step"] = r.step;
  j["t"] = r.t;
  j["x"] = r.state.x;
  j["y"] = r.state.y;
  j["theta"] = r.state.theta;
  j["v"] = r.action[0];
  j["omega"] = r.action[1];
  return j.dump();
}

TrajectoryRecord parse_record_line(const std::string& line) {
  const json j = json::parse(line);
  TrajectoryRecord r;
  r.task = j.at("task").get<int>();
  r.step = j.at("step").get<int>();
  r.t = j.at("t").get<double>();
  r.state = {j.at("x").get<double>(), j.at("y").get<double>(), j.at("theta").get<double>()};
  r.action = {j.at("v").get<double>(), j.at("omega").get<double>()};
  return r;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<TrajectoryRecord>& records) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  for (const auto& r : records) out << record_line(r) << '\n';
}

std::vector<TrajectoryRecord> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::vector<TrajectoryRecord> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse_record_line(line));
    } catch (const json::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace reachkit
