#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "adaptd/eval.hpp"
#include "json.hpp"
#include "parallel.hpp"

namespace adaptd {
namespace {

using json = nlohmann::json;

json state_json(const State& s) {
  if (s.is_discrete()) return s.id();
  return json::array({s.x(), s.y()});
}

State state_from_json(const json& j) {
  if (j.is_number_integer()) return State::discrete(j.get<std::int64_t>());
  if (j.is_array() && j.size() == 2) return State::point(j[0].get<double>(), j[1].get<double>());
  throw std::runtime_error("ground truth: malformed state");
}

}  // namespace

EvalStates lattice_states(const Environment& env, const LatticeSpec& spec) {
  EvalStates out;
  const StateSpace space = env.state_space();
  if (space.discrete()) {
    for (std::size_t id = 0; id < space.discrete_count; ++id) {
      const State s = State::discrete(static_cast<std::int64_t>(id));
      if (!env.is_free(s)) continue;
      out.states.push_back(s);
      out.cells.push_back({static_cast<int>(id), 0});
    }
    return out;
  }
  if (spec.nx == 0 || spec.ny == 0) throw std::invalid_argument("lattice: empty grid");
  const Box& b = space.box;
  const double dx = b.width() / static_cast<double>(spec.nx);
  const double dy = b.height() / static_cast<double>(spec.ny);
  for (std::size_t iy = 0; iy < spec.ny; ++iy) {
    for (std::size_t ix = 0; ix < spec.nx; ++ix) {
      const State s = State::point(b.x_min + (static_cast<double>(ix) + 0.5) * dx,
                                   b.y_min + (static_cast<double>(iy) + 0.5) * dy);
      if (!env.is_free(s)) continue;
      out.states.push_back(s);
      out.cells.push_back({static_cast<int>(ix), static_cast<int>(iy)});
    }
  }
  return out;
}

GroundTruth estimate_ground_truth(const Environment& env, const Policy& policy, const EvalStates& states,
                                  const GroundTruthOptions& options, std::uint64_t seed) {
  if (options.episodes == 0) throw std::invalid_argument("ground truth: episodes must be positive");
  if (states.size() == 0) throw std::invalid_argument("ground truth: no evaluation states");
  GroundTruth gt;
  gt.env_id = env.id();
  gt.eval = states;
  gt.values.assign(states.size(), 0.0);
  gt.samples.assign(states.size(), options.episodes);
  gt.std_errors.assign(states.size(), 0.0);
  const double gamma = env.discount();
  detail::parallel_for(states.size(), options.threads, [&](std::size_t i) {
    double mean = 0.0;
    double m2 = 0.0;
    for (std::size_t e = 0; e < options.episodes; ++e) {
      Rng rng = make_rng(derive_seed(seed, i, e));
      const Trajectory tr = rollout(env, policy, states.states[i], options.max_steps, rng);
      const double g = tr.empty() ? 0.0 : discounted_return(tr, gamma, 0);
      const double delta = g - mean;
      mean += delta / static_cast<double>(e + 1);
      m2 += delta * (g - mean);
    }
    gt.values[i] = mean;
    const auto n = static_cast<double>(options.episodes);
    gt.std_errors[i] = options.episodes > 1 ? std::sqrt(m2 / (n - 1.0) / n) : 0.0;
  });
  return gt;
}

GroundTruth analytic_ground_truth(const Environment& env, const EvalStates& states) {
  if (states.size() == 0) throw std::invalid_argument("ground truth: no evaluation states");
  GroundTruth gt;
  gt.env_id = env.id();
  gt.eval = states;
  gt.analytic = true;
  for (const State& s : states.states) {
    const std::optional<double> v = env.true_value(s);
    if (!v) throw std::invalid_argument("ground truth: no closed form at " + to_string(s));
    gt.values.push_back(*v);
  }
  gt.samples.assign(states.size(), 0);
  gt.std_errors.assign(states.size(), 0.0);
  return gt;
}

void save_ground_truth(const std::filesystem::path& path, const GroundTruth& gt) {
  json states = json::array();
  json cells = json::array();
  for (std::size_t i = 0; i < gt.size(); ++i) {
    states.push_back(state_json(gt.eval.states[i]));
    cells.push_back(json::array({gt.eval.cells[i][0], gt.eval.cells[i][1]}));
  }
  const json doc = {{"format", "adaptd-ground-truth"},
                    {"version", 1},
                    {"env_id", gt.env_id},
                    {"analytic", gt.analytic},
                    {"states", states},
                    {"cells", cells},
                    {"values", gt.values},
                    {"samples", gt.samples},
                    {"std_errors", gt.std_errors}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << doc.dump() << '\n';
}

GroundTruth load_ground_truth(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error("ground truth: " + std::string(e.what()));
  }
  if (doc.value("format", "") != "adaptd-ground-truth" || doc.value("version", 0) != 1) {
    throw std::runtime_error("ground truth: unsupported format in " + path.string());
  }
  GroundTruth gt;
  try {
    gt.env_id = doc.at("env_id").get<std::string>();
    gt.analytic = doc.at("analytic").get<bool>();
    for (const json& s : doc.at("states")) gt.eval.states.push_back(state_from_json(s));
    for (const json& c : doc.at("cells")) gt.eval.cells.push_back({c.at(0).get<int>(), c.at(1).get<int>()});
    gt.values = doc.at("values").get<std::vector<double>>();
    gt.samples = doc.at("samples").get<std::vector<std::size_t>>();
    gt.std_errors = doc.at("std_errors").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw std::runtime_error("ground truth: " + std::string(e.what()));
  }
  const std::size_t n = gt.eval.states.size();
  if (gt.eval.cells.size() != n || gt.values.size() != n || gt.samples.size() != n || gt.std_errors.size() != n) {
    throw std::runtime_error("ground truth: field lengths disagree");
  }
  return gt;
}

}  // namespace adaptd
