#include <fstream>
#include <sstream>
#include <stdexcept>

#include "adaptd/approximator.hpp"
#include "adaptd/confidence.hpp"
#include "json.hpp"

namespace adaptd {
namespace {

using nlohmann::json;

constexpr const char* kFormat = "adaptd-approximator";
constexpr int kVersion = 1;

json header(const std::string& kind) { return {{"format", kFormat}, {"version", kVersion}, {"kind", kind}}; }

json box_json(const Box& b) { return {b.x_min, b.x_max, b.y_min, b.y_max}; }

Box box_from(const json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>(), j.at(3).get<double>()};
}

json cells_json(const CellApproximator& a) {
  return {{"values", std::vector<double>(a.raw_values().begin(), a.raw_values().end())},
          {"counts", std::vector<std::size_t>(a.visit_counts().begin(), a.visit_counts().end())}};
}

void restore_cells(CellApproximator& a, const json& j) {
  a.restore(j.at("values").get<std::vector<double>>(), j.at("counts").get<std::vector<std::size_t>>());
}

json mlp_arch(const MlpConfig& c) {
  return {{"inputs", c.shape.inputs},
          {"hidden", c.shape.hidden},
          {"activation", "relu"},
          {"batch_size", c.batch_size},
          {"input_box", box_json(c.input_box)},
          {"output_scale", c.output_scale},
          {"adam",
           {{"learning_rate", c.adam.learning_rate},
            {"beta1", c.adam.beta1},
            {"beta2", c.adam.beta2},
            {"epsilon", c.adam.epsilon}}}};
}

MlpConfig mlp_config_from(const json& a) {
  MlpConfig c;
  c.shape.inputs = a.at("inputs").get<std::size_t>();
  c.shape.hidden = a.at("hidden").get<std::vector<std::size_t>>();
  c.batch_size = a.at("batch_size").get<std::size_t>();
  c.input_box = box_from(a.at("input_box"));
  c.output_scale = a.at("output_scale").get<double>();
  const auto& adam = a.at("adam");
  c.adam = {adam.at("learning_rate").get<double>(), adam.at("beta1").get<double>(), adam.at("beta2").get<double>(),
            adam.at("epsilon").get<double>()};
  return c;
}

std::unique_ptr<ValueApproximator> from_json(const json& j) {
  if (j.value("format", "") != kFormat) throw std::runtime_error("checkpoint: unrecognised format");
  if (j.value("version", 0) != kVersion) throw std::runtime_error("checkpoint: unsupported version");
  const std::string kind = j.at("kind").get<std::string>();
  const json& arch = j.at("architecture");
  if (kind == "tabular") {
    auto a = std::make_unique<TabularApprox>(arch.at("state_count").get<std::size_t>());
    restore_cells(*a, j.at("params"));
    return a;
  }
  if (kind == "biased_tabular") {
    std::map<std::int64_t, double> clamps;
    for (const auto& c : arch.at("clamps")) clamps[c.at(0).get<std::int64_t>()] = c.at(1).get<double>();
    auto a = std::make_unique<BiasedTabularApprox>(arch.at("state_count").get<std::size_t>(), std::move(clamps));
    restore_cells(*a, j.at("params"));
    return a;
  }
  if (kind == "grid") {
    auto a = std::make_unique<GridApprox>(box_from(arch.at("box")), arch.at("cell_size").get<double>());
    restore_cells(*a, j.at("params"));
    return a;
  }
  if (kind == "mlp") {
    auto a = std::make_unique<MlpApprox>(mlp_config_from(arch), j.at("seed").get<std::uint64_t>());
    a->set_params(j.at("params").get<std::vector<double>>());
    if (j.contains("adam_state")) {
      const auto& s = j.at("adam_state");
      a->restore_optimizer(s.at("t").get<std::size_t>(), s.at("m").get<std::vector<double>>(),
                           s.at("v").get<std::vector<double>>());
    }
    return a;
  }
  if (kind == "ensemble_mean") {
    std::vector<std::unique_ptr<ValueApproximator>> members;
    for (const auto& m : j.at("members")) members.push_back(from_json(m));
    return std::make_unique<EnsembleMeanApprox>(std::move(members));
  }
  throw std::runtime_error("checkpoint: unknown approximator kind '" + kind + "'");
}

}  // namespace

std::string TabularApprox::checkpoint_json() const {
  json j = header(kind());
  j["architecture"] = {{"state_count", cell_count()}};
  j["params"] = cells_json(*this);
  return j.dump();
}

std::string BiasedTabularApprox::checkpoint_json() const {
  json j = header(kind());
  json clamps = json::array();
  for (const auto& [id, v] : clamps_) clamps.push_back({id, v});
  j["architecture"] = {{"state_count", cell_count()}, {"clamps", clamps}};
  j["params"] = cells_json(*this);
  return j.dump();
}

std::string GridApprox::checkpoint_json() const {
  json j = header(kind());
  j["architecture"] = {{"box", box_json(box_)}, {"cell_size", cell_size_}, {"nx", nx_}, {"ny", ny_}};
  j["params"] = cells_json(*this);
  return j.dump();
}

std::string MlpApprox::checkpoint_json() const {
  json j = header(kind());
  j["architecture"] = mlp_arch(cfg_);
  j["seed"] = seed_;
  j["params"] = params_;
  j["adam_state"] = {{"t", adam_.steps()},
                     {"m", std::vector<double>(adam_.first_moment().begin(), adam_.first_moment().end())},
                     {"v", std::vector<double>(adam_.second_moment().begin(), adam_.second_moment().end())}};
  return j.dump();
}

std::string EnsembleMeanApprox::checkpoint_json() const {
  json j = header(kind());
  j["architecture"] = {{"members", members_.size()}};
  json members = json::array();
  for (const auto& m : members_) members.push_back(json::parse(m->checkpoint_json()));
  j["members"] = std::move(members);
  return j.dump();
}

std::unique_ptr<ValueApproximator> load_approximator(std::string_view json_text) {
  try {
    return from_json(json::parse(json_text));
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("checkpoint: ") + e.what());
  }
}

void save_approximator(const std::filesystem::path& path, const ValueApproximator& approx) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << approx.checkpoint_json() << '\n';
}

std::unique_ptr<ValueApproximator> load_approximator_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return load_approximator(buf.str());
}

}  // namespace adaptd
