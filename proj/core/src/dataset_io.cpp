#include "adaptd/dataset_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "json.hpp"

namespace adaptd {
namespace {

using nlohmann::json;

constexpr const char* kFormat = "adaptd-dataset";
constexpr int kVersion = 1;

json state_to_json(const State& s) {
  if (s.is_discrete()) return s.id();
  return json::array({s.x(), s.y()});
}

State state_from_json(const json& j) {
  if (j.is_number_integer()) return State::discrete(j.get<std::int64_t>());
  if (j.is_array() && j.size() == 2) return State::point(j[0].get<double>(), j[1].get<double>());
  throw std::runtime_error("dataset: bad state entry " + j.dump());
}

}  // namespace

void write_dataset(std::ostream& out, const Dataset& data) {
  json header = {{"format", kFormat},
                 {"version", kVersion},
                 {"env_id", data.env_id},
                 {"policy_id", data.policy_id},
                 {"seed", data.seed}};
  out << header.dump() << '\n';
  for (const auto& tr : data.trajectories) {
    json states = json::array();
    json actions = json::array();
    json rewards = json::array();
    for (const auto& t : tr.transitions) {
      states.push_back(state_to_json(t.state));
      actions.push_back(t.action);
      rewards.push_back(t.reward);
    }
    if (!tr.empty()) states.push_back(state_to_json(tr.transitions.back().next_state));
    json line = {{"states", std::move(states)},
                 {"actions", std::move(actions)},
                 {"rewards", std::move(rewards)},
                 {"terminal", !tr.empty() && tr.transitions.back().terminal}};
    out << line.dump() << '\n';
  }
}

void write_dataset(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_dataset(out, data);
}

Dataset read_dataset(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("dataset: missing header line");
  const json header = json::parse(line);
  if (header.value("format", "") != kFormat) throw std::runtime_error("dataset: unrecognised format");
  if (header.value("version", 0) != kVersion) throw std::runtime_error("dataset: unsupported version");

  Dataset data;
  data.env_id = header.at("env_id").get<std::string>();
  data.policy_id = header.at("policy_id").get<std::string>();
  data.seed = header.at("seed").get<std::uint64_t>();

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    const auto& states = j.at("states");
    const auto& actions = j.at("actions");
    const auto& rewards = j.at("rewards");
    const bool terminal = j.at("terminal").get<bool>();
    if (actions.size() != rewards.size()) throw std::runtime_error("dataset: actions/rewards length mismatch");
    const std::size_t len = actions.size();
    if (states.size() != (len == 0 ? 0 : len + 1)) throw std::runtime_error("dataset: states length mismatch");

    Trajectory tr;
    tr.transitions.reserve(len);
    for (std::size_t t = 0; t < len; ++t) {
      tr.transitions.push_back(Transition{state_from_json(states[t]), actions[t].get<int>(),
                                          rewards[t].get<double>(), state_from_json(states[t + 1]),
                                          terminal && t + 1 == len});
    }
    try {
      validate(tr);
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error(std::string("dataset: ") + e.what());
    }
    data.trajectories.push_back(std::move(tr));
  }
  return data;
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_dataset(in);
}

}  // namespace adaptd
