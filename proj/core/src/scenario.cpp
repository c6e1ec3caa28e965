#include <set>
#include <sstream>
#include <stdexcept>

#include "adaptd/scenario.hpp"
#include "scenario_json.hpp"

namespace adaptd {
namespace {

using json = nlohmann::json;

std::string format_number(double x) {
  std::ostringstream s;
  s << x;
  return s.str();
}

std::string default_name(const EnvSpec& spec, ApproximatorKind approx) {
  std::string base;
  switch (spec.kind) {
    case EnvKind::chain:
      base = "chain-k" + std::to_string(spec.chain.k) + "-p" + std::to_string(spec.chain.p) + "-sigma" +
             format_number(spec.chain.sigma);
      break;
    case EnvKind::labyrinth:
      base = spec.map_file.empty() ? "labyrinth-map" + std::to_string(spec.map_id) : "labyrinth-custom";
      break;
    case EnvKind::mountain_car: base = "mountain-car"; break;
  }
  return base + "/" + to_string(approx);
}

double default_output_scale(EnvKind kind) {
  switch (kind) {
    case EnvKind::chain: return 1.0;
    case EnvKind::labyrinth: return 1000.0;
    case EnvKind::mountain_car: return 100.0;
  }
  return 1.0;
}

}  // namespace

std::string to_string(EnvKind kind) {
  switch (kind) {
    case EnvKind::chain: return "chain";
    case EnvKind::labyrinth: return "labyrinth";
    case EnvKind::mountain_car: return "mountain_car";
  }
  throw std::invalid_argument("unknown environment kind");
}

EnvKind parse_env_kind(std::string_view text) {
  for (EnvKind k : {EnvKind::chain, EnvKind::labyrinth, EnvKind::mountain_car}) {
    if (to_string(k) == text) return k;
  }
  throw std::invalid_argument("unknown environment kind: " + std::string(text));
}

BuiltScenario build_scenario(const EnvSpec& spec) {
  BuiltScenario out;
  ApproximatorKind kind = ApproximatorKind::tabular;
  switch (spec.kind) {
    case EnvKind::chain: {
      out.scenario = make_chain_scenario(spec.chain);
      const auto& env = static_cast<const ChainEnv&>(*out.scenario.env);
      kind = spec.approximator.value_or(ApproximatorKind::tabular);
      for (int i = 1; i <= spec.chain.k; ++i) {
        out.eval.states.push_back(env.branch(i));
        out.eval.cells.push_back({i, 0});
      }
      break;
    }
    case EnvKind::labyrinth: {
      LabMap map = spec.map_file.empty() ? builtin_lab_map(spec.map_id) : load_lab_map(spec.map_file);
      const std::string id = spec.map_file.empty() ? "labyrinth-map" + std::to_string(spec.map_id) : "labyrinth-custom";
      out.scenario = make_labyrinth_scenario(std::move(map), spec.step_size, id);
      kind = spec.approximator.value_or(ApproximatorKind::grid);
      out.eval = lattice_states(*out.scenario.env, spec.lattice);
      break;
    }
    case EnvKind::mountain_car: {
      out.scenario = make_mountain_car_scenario(spec.eps);
      kind = spec.approximator.value_or(ApproximatorKind::mlp);
      out.eval = lattice_states(*out.scenario.env, spec.lattice);
      break;
    }
  }

  const StateSpace space = out.scenario.env->state_space();
  ApproximatorSpec& a = out.approximator;
  a.kind = kind;
  switch (kind) {
    case ApproximatorKind::tabular:
    case ApproximatorKind::biased_tabular:
      if (!space.discrete()) throw std::invalid_argument("scenario: tabular approximators need discrete states");
      a.state_count = space.discrete_count;
      if (kind == ApproximatorKind::biased_tabular) {
        if (spec.kind != EnvKind::chain) throw std::invalid_argument("scenario: biased_tabular is defined on the chain");
        const auto& env = static_cast<const ChainEnv&>(*out.scenario.env);
        const double forced = spec.chain.mu + spec.clamp_beta;
        a.clamps = {{env.bottleneck(1).id(), forced}, {env.bottleneck(2).id(), forced}};
      }
      break;
    case ApproximatorKind::grid:
      if (space.discrete()) throw std::invalid_argument("scenario: grid approximator needs continuous states");
      a.box = space.box;
      a.cell_size = spec.cell_size;
      break;
    case ApproximatorKind::mlp:
      if (space.discrete()) throw std::invalid_argument("scenario: mlp approximator needs continuous states");
      a.mlp.input_box = space.box;
      a.mlp.output_scale = spec.output_scale > 0.0 ? spec.output_scale : default_output_scale(spec.kind);
      break;
  }
  out.name = spec.name.empty() ? default_name(spec, kind) : spec.name;
  if (out.eval.size() == 0) throw std::invalid_argument("scenario: no evaluation states");
  return out;
}

namespace detail {

EnvSpec env_spec_from_json(const json& j) {
  static const std::set<std::string> known = {"kind", "name", "k", "p", "mu", "sigma", "map", "map_file", "step_size",
                                              "eps", "approximator", "clamp_beta", "cell_size", "output_scale",
                                              "lattice"};
  if (!j.is_object()) throw std::invalid_argument("environment: expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw std::invalid_argument("environment: unknown key '" + key + "'");
  }
  EnvSpec s;
  try {
    s.kind = parse_env_kind(j.at("kind").get<std::string>());
    s.name = j.value("name", s.name);
    s.chain.k = j.value("k", s.chain.k);
    s.chain.p = j.value("p", s.chain.p);
    s.chain.mu = j.value("mu", s.chain.mu);
    s.chain.sigma = j.value("sigma", s.chain.sigma);
    s.map_id = j.value("map", s.map_id);
    s.map_file = j.value("map_file", s.map_file);
    s.step_size = j.value("step_size", s.step_size);
    s.eps = j.value("eps", s.eps);
    if (j.contains("approximator")) s.approximator = parse_approximator_kind(j.at("approximator").get<std::string>());
    s.clamp_beta = j.value("clamp_beta", s.clamp_beta);
    s.cell_size = j.value("cell_size", s.cell_size);
    s.output_scale = j.value("output_scale", s.output_scale);
    if (j.contains("lattice")) {
      const json& l = j.at("lattice");
      s.lattice.nx = l.at(0).get<std::size_t>();
      s.lattice.ny = l.at(1).get<std::size_t>();
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument("environment: " + std::string(e.what()));
  }
  return s;
}

json env_spec_json(const EnvSpec& s) {
  json j = {{"kind", to_string(s.kind)}};
  if (!s.name.empty()) j["name"] = s.name;
  switch (s.kind) {
    case EnvKind::chain:
      j["k"] = s.chain.k;
      j["p"] = s.chain.p;
      j["mu"] = s.chain.mu;
      j["sigma"] = s.chain.sigma;
      j["clamp_beta"] = s.clamp_beta;
      break;
    case EnvKind::labyrinth:
      if (s.map_file.empty()) {
        j["map"] = s.map_id;
      } else {
        j["map_file"] = s.map_file;
      }
      j["step_size"] = s.step_size;
      j["cell_size"] = s.cell_size;
      j["lattice"] = {s.lattice.nx, s.lattice.ny};
      break;
    case EnvKind::mountain_car:
      j["eps"] = s.eps;
      j["cell_size"] = s.cell_size;
      j["lattice"] = {s.lattice.nx, s.lattice.ny};
      break;
  }
  if (s.approximator) j["approximator"] = to_string(*s.approximator);
  if (s.output_scale > 0.0) j["output_scale"] = s.output_scale;
  return j;
}

}  // namespace detail

EnvSpec parse_env_spec(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw std::invalid_argument("environment: " + std::string(e.what()));
  }
  return detail::env_spec_from_json(j);
}

std::string env_spec_to_json(const EnvSpec& spec) { return detail::env_spec_json(spec).dump(); }

}  // namespace adaptd
