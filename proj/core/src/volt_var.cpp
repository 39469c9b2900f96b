#include "intact/volt_var.hpp"

#include <fstream>
#include <stdexcept>

#include "intact/feeder13_json.hpp"

namespace intact {

using nlohmann::json;

FeederSpec FeederSpec::from_json(const json& j) {
  FeederSpec s;
  s.name = j.value("name", "feeder");
  s.buses = j.at("buses").get<int>();
  s.v_source = j.value("v_source", 1.0);
  for (const auto& l : j.at("lines")) {
    s.lines.push_back({l.at("from").get<int>(), l.at("to").get<int>(), l.at("r").get<double>(),
                       l.at("x").get<double>()});
  }
  for (const auto& c : j.at("capacitors")) {
    s.capacitors.push_back({c.at("bus").get<int>(), c.at("q").get<double>()});
  }
  for (const auto& r : j.at("regulators")) {
    s.regulators.push_back({r.at("line").get<int>(), r.value("range", 0.1)});
  }
  const auto& b = j.at("battery");
  s.battery = {b.at("bus").get<int>(), b.at("p_max").get<double>(),
               b.at("capacity").get<double>(), b.value("soc_init", 0.5)};
  for (const auto& l : j.at("base_load")) {
    s.base_load.push_back({l.at("bus").get<int>(), l.at("p").get<double>(), l.at("q").get<double>()});
  }
  s.load_curve = j.at("load_curve").get<std::vector<double>>();
  s.noise_std = j.value("noise_std", 0.0);
  s.validate();
  return s;
}

FeederSpec FeederSpec::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("feeder file not readable: " + path.string());
  json j;
  in >> j;
  return from_json(j);
}

FeederSpec FeederSpec::default_feeder() { return from_json(json::parse(kFeeder13Json)); }

json FeederSpec::to_json() const {
  json j;
  j["name"] = name;
  j["buses"] = buses;
  j["v_source"] = v_source;
  j["lines"] = json::array();
  for (const auto& l : lines) j["lines"].push_back({{"from", l.from}, {"to", l.to}, {"r", l.r}, {"x", l.x}});
  j["capacitors"] = json::array();
  for (const auto& c : capacitors) j["capacitors"].push_back({{"bus", c.bus}, {"q", c.q}});
  j["regulators"] = json::array();
  for (const auto& r : regulators) j["regulators"].push_back({{"line", r.line}, {"range", r.range}});
  j["battery"] = {{"bus", battery.bus}, {"p_max", battery.p_max}, {"capacity", battery.capacity},
                  {"soc_init", battery.soc_init}};
  j["base_load"] = json::array();
  for (const auto& l : base_load) j["base_load"].push_back({{"bus", l.bus}, {"p", l.p}, {"q", l.q}});
  j["load_curve"] = load_curve;
  j["noise_std"] = noise_std;
  return j;
}

void FeederSpec::validate() const {
  if (buses < 2) throw ConfigError("feeder: need at least 2 buses");
  if (static_cast<int>(lines.size()) != buses - 1) {
    throw ConfigError("feeder: a radial feeder over " + std::to_string(buses) + " buses needs " +
                      std::to_string(buses - 1) + " lines");
  }
  for (const auto& l : lines) {
    if (l.from < 0 || l.from >= buses || l.to <= 0 || l.to >= buses) {
      throw ConfigError("feeder: line endpoint out of range");
    }
    if (l.r < 0 || l.x < 0) throw ConfigError("feeder: negative impedance");
  }
  for (const auto& c : capacitors) {
    if (c.bus < 0 || c.bus >= buses) throw ConfigError("feeder: capacitor bus out of range");
  }
  for (const auto& r : regulators) {
    if (r.line < 0 || r.line >= static_cast<int>(lines.size())) {
      throw ConfigError("feeder: regulator line out of range");
    }
  }
  if (battery.bus < 0 || battery.bus >= buses) throw ConfigError("feeder: battery bus out of range");
  if (battery.capacity <= 0) throw ConfigError("feeder: battery capacity must be positive");
  if (load_curve.size() != 24) throw ConfigError("feeder: load_curve must have 24 entries");
}

VoltVarToyEnv::VoltVarToyEnv() : spec_(FeederSpec::default_feeder()) { build(); }

VoltVarToyEnv::VoltVarToyEnv(const FeederSpec& spec) : spec_(spec) {
  spec_.validate();
  build();
}

VoltVarToyEnv::VoltVarToyEnv(const std::filesystem::path& feeder_file)
    : spec_(FeederSpec::from_file(feeder_file)) {
  build();
}

void VoltVarToyEnv::build() {
  const int n = spec_.buses;

  // Parent line per bus via BFS from the substation.
  parent_line_.assign(static_cast<std::size_t>(n), -1);
  std::vector<std::vector<std::pair<int, int>>> adj(static_cast<std::size_t>(n));  // (neighbor, line)
  for (std::size_t li = 0; li < spec_.lines.size(); ++li) {
    const auto& l = spec_.lines[li];
    adj[static_cast<std::size_t>(l.from)].emplace_back(l.to, static_cast<int>(li));
    adj[static_cast<std::size_t>(l.to)].emplace_back(l.from, static_cast<int>(li));
  }
  std::vector<int> bfs{0};
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  seen[0] = true;
  for (std::size_t head = 0; head < bfs.size(); ++head) {
    const int u = bfs[head];
    for (const auto& [v, li] : adj[static_cast<std::size_t>(u)]) {
      if (seen[static_cast<std::size_t>(v)]) continue;
      seen[static_cast<std::size_t>(v)] = true;
      parent_line_[static_cast<std::size_t>(v)] = li;
      bfs.push_back(v);
    }
  }
  for (int b = 1; b < n; ++b) {
    if (!seen[static_cast<std::size_t>(b)]) throw ConfigError("feeder: bus disconnected from substation");
  }

  // Path edge sets root -> bus, then LinDistFlow sensitivities
  // R_ij = 2 * sum of r over shared path edges (likewise X).
  std::vector<std::vector<int>> path(static_cast<std::size_t>(n));
  for (int b = 1; b < n; ++b) {
    int cur = b;
    auto& pb = path[static_cast<std::size_t>(b)];
    while (cur != 0) {
      const int li = parent_line_[static_cast<std::size_t>(cur)];
      pb.push_back(li);
      const auto& l = spec_.lines[static_cast<std::size_t>(li)];
      cur = (l.to == cur) ? l.from : l.to;
    }
  }
  r_mat_ = Mat::Zero(n, n);
  x_mat_ = Mat::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    for (int j = 1; j < n; ++j) {
      std::vector<bool> on_i(spec_.lines.size(), false);
      for (const int li : path[static_cast<std::size_t>(i)]) on_i[static_cast<std::size_t>(li)] = true;
      double r = 0.0, x = 0.0;
      for (const int li : path[static_cast<std::size_t>(j)]) {
        if (on_i[static_cast<std::size_t>(li)]) {
          r += spec_.lines[static_cast<std::size_t>(li)].r;
          x += spec_.lines[static_cast<std::size_t>(li)].x;
        }
      }
      r_mat_(i, j) = 2.0 * r;
      x_mat_(i, j) = 2.0 * x;
    }
  }

  // Downstream bus sets per line (buses whose path uses the line).
  downstream_.assign(spec_.lines.size(), {});
  for (int b = 1; b < n; ++b) {
    for (const int li : path[static_cast<std::size_t>(b)]) {
      downstream_[static_cast<std::size_t>(li)].push_back(b);
    }
  }

  // Action layout: capacitors (2 bins), regulators (33), battery (33).
  std::vector<int> bins;
  for (std::size_t i = 0; i < spec_.capacitors.size(); ++i) bins.push_back(2);
  for (std::size_t i = 0; i < spec_.regulators.size(); ++i) bins.push_back(33);
  bins.push_back(33);
  action_spec_ = IntegerActionSpec(std::move(bins), /*embed_all=*/false);
}

int VoltVarToyEnv::obs_dim() const {
  return spec_.buses + static_cast<int>(spec_.capacitors.size()) +
         static_cast<int>(spec_.regulators.size()) + 2;  // + SOC + time
}

std::vector<double> VoltVarToyEnv::reset(std::uint64_t seed) {
  caps_.assign(spec_.capacitors.size(), 0);
  taps_.assign(spec_.regulators.size(), 16);
  battery_tap_ = 16;
  battery_power_ = 0.0;
  soc_ = spec_.battery.soc_init;
  t_ = 0;
  done_ = false;

  RngStream rng(seed);
  load_noise_ = Mat::Ones(kHorizon, spec_.buses);
  if (spec_.noise_std > 0.0) {
    for (int t = 0; t < kHorizon; ++t) {
      for (int b = 0; b < spec_.buses; ++b) {
        load_noise_(t, b) = std::max(0.0, 1.0 + spec_.noise_std * rng.normal());
      }
    }
  }
  return observation();
}

EnvStep VoltVarToyEnv::step(std::span<const int> action) {
  if (done_) throw std::logic_error("VoltVarToyEnv::step: episode done; call reset()");
  if (static_cast<int>(action.size()) != action_spec_.dims()) {
    throw ShapeError("VoltVarToyEnv::step: action length " + std::to_string(action.size()) +
                     ", expected " + std::to_string(action_spec_.dims()));
  }
  for (int k = 0; k < action_spec_.dims(); ++k) {
    const int n = action_spec_.bins[static_cast<std::size_t>(k)];
    if (action[static_cast<std::size_t>(k)] < 0 || action[static_cast<std::size_t>(k)] >= n) {
      throw std::out_of_range("VoltVarToyEnv::step: component " + std::to_string(k) + " = " +
                              std::to_string(action[static_cast<std::size_t>(k)]) + " outside {0.." +
                              std::to_string(n - 1) + "}");
    }
  }

  const std::size_t nc = spec_.capacitors.size();
  const std::size_t nr = spec_.regulators.size();
  int switched = 0;
  for (std::size_t i = 0; i < nc; ++i) {
    const int s = action[i];
    if (s != caps_[i]) ++switched;
    caps_[i] = s;
  }
  for (std::size_t i = 0; i < nr; ++i) {
    const int s = action[nc + i];
    if (s != taps_[i]) ++switched;
    taps_[i] = s;
  }
  const int bat = action[nc + nr];
  if (bat != battery_tap_) ++switched;
  battery_tap_ = bat;

  // Battery power limited by stored/absorbable energy over the 1 h step.
  double p_bat = spec_.battery.p_max * (static_cast<double>(bat) - 16.0) / 16.0;
  if (p_bat > 0.0) p_bat = std::min(p_bat, soc_ * spec_.battery.capacity);
  if (p_bat < 0.0) p_bat = std::max(p_bat, -(1.0 - soc_) * spec_.battery.capacity);
  battery_power_ = p_bat;

  Eigen::VectorXd p_inj(spec_.buses), q_inj(spec_.buses);
  fill_injections(t_, p_inj, q_inj, p_bat);
  const Eigen::VectorXd v = current_voltages();

  double violation = 0.0;
  for (int b = 1; b < spec_.buses; ++b) {
    violation += std::max(0.0, std::abs(v(b) - 1.0) - kVoltageBand);
  }
  const double loss = loss_proxy(p_inj, q_inj);

  EnvStep out;
  out.reward = -violation - kSwitchWeight * switched - kLossWeight * loss;
  out.info["violation"] = violation;
  out.info["switched"] = static_cast<double>(switched);
  out.info["loss_proxy"] = loss;
  out.info["battery_power"] = p_bat;

  soc_ = std::clamp(soc_ - p_bat / spec_.battery.capacity, 0.0, 1.0);
  ++t_;
  out.done = t_ >= kHorizon;
  done_ = out.done;
  out.obs = observation();
  return out;
}

void VoltVarToyEnv::fill_injections(int time, Eigen::VectorXd& p, Eigen::VectorXd& q,
                                    double battery_power) const {
  p.setZero(spec_.buses);
  q.setZero(spec_.buses);
  const double mult = spec_.load_curve[static_cast<std::size_t>(time)];
  for (const auto& l : spec_.base_load) {
    const double m = mult * load_noise_(time, l.bus);
    p(l.bus) -= l.p * m;
    q(l.bus) -= l.q * m;
  }
  for (std::size_t i = 0; i < spec_.capacitors.size(); ++i) {
    if (caps_[i]) q(spec_.capacitors[i].bus) += spec_.capacitors[i].q;
  }
  p(spec_.battery.bus) += battery_power;
}

Eigen::VectorXd VoltVarToyEnv::voltage_profile(const Eigen::VectorXd& p_inj,
                                               const Eigen::VectorXd& q_inj) const {
  return Eigen::VectorXd::Constant(spec_.buses, spec_.v_source) + r_mat_ * p_inj + x_mat_ * q_inj;
}

Eigen::VectorXd VoltVarToyEnv::current_voltages() const {
  const int time = std::min(t_, kHorizon - 1);
  Eigen::VectorXd p(spec_.buses), q(spec_.buses);
  fill_injections(time, p, q, battery_power_);
  Eigen::VectorXd v = voltage_profile(p, q);
  for (std::size_t i = 0; i < spec_.regulators.size(); ++i) {
    const auto& reg = spec_.regulators[i];
    const double boost = reg.range * (static_cast<double>(taps_[i]) - 16.0) / 16.0;
    for (const int b : downstream_[static_cast<std::size_t>(reg.line)]) v(b) += boost;
  }
  return v;
}

double VoltVarToyEnv::loss_proxy(const Eigen::VectorXd& p_inj, const Eigen::VectorXd& q_inj) const {
  double total = 0.0;
  for (std::size_t li = 0; li < spec_.lines.size(); ++li) {
    double fp = 0.0, fq = 0.0;
    for (const int b : downstream_[li]) {
      fp -= p_inj(b);
      fq -= q_inj(b);
    }
    total += spec_.lines[li].r * (fp * fp + fq * fq);
  }
  return total;
}

std::vector<double> VoltVarToyEnv::observation() const {
  const Eigen::VectorXd v = current_voltages();
  std::vector<double> obs;
  obs.reserve(static_cast<std::size_t>(obs_dim()));
  for (int b = 0; b < spec_.buses; ++b) obs.push_back(v(b));
  for (const int c : caps_) obs.push_back(static_cast<double>(c));
  for (const int t : taps_) obs.push_back(static_cast<double>(t) / 32.0);
  obs.push_back(soc_);
  obs.push_back(static_cast<double>(t_) / static_cast<double>(kHorizon));
  return obs;
}

}  // namespace intact
