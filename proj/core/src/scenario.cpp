#include "omav/scenario.hpp"

#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace omav {

namespace {

using nlohmann::json;

constexpr double kDegToRad = std::numbers::pi / 180.0;

void check_keys(const json& obj, const char* where,
                std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool found = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        found = true;
        break;
      }
    if (!found)
      throw ScenarioError("unknown key \"" + it.key() + "\" in " + where);
  }
}

// Angle fields accept either a radian or a degree spelling, not both.
double angle_value(const json& obj, const char* rad_key,
                   const char* deg_key, double fallback) {
  const bool has_rad = obj.contains(rad_key);
  const bool has_deg = obj.contains(deg_key);
  if (has_rad && has_deg)
    throw ScenarioError(std::string("both ") + rad_key + " and " + deg_key +
                        " given");
  if (has_deg) return obj.at(deg_key).get<double>() * kDegToRad;
  if (has_rad) return obj.at(rad_key).get<double>();
  return fallback;
}

void set_if(const json& obj, const char* key, double& out) {
  if (obj.contains(key)) out = obj.at(key).get<double>();
}

void apply_param_overrides(const json& obj, VehicleParams& p) {
  check_keys(obj, "params",
             {"preset", "n_links", "type", "option", "m_b", "m_p", "I_b",
              "I_p", "a", "a11", "gravity", "d", "b_f", "theta_l"});
  // The canonical echo records the preset inside params; honor it first so
  // the echo reparses to the same vehicle. An empty name means custom.
  if (obj.contains("preset")) {
    const std::string name = obj.at("preset").get<std::string>();
    if (!name.empty()) p = VehicleParams::preset(name);
  }
  if (obj.contains("n_links")) {
    p.n_links = obj.at("n_links").get<int>();
    // Geometry vectors from the preset no longer fit; refill defaults
    // unless explicit arrays follow.
    p.d.clear();
    p.b_f.clear();
    p.theta_l.clear();
  }
  if (obj.contains("type")) {
    const std::string t = obj.at("type").get<std::string>();
    if (t == "type1")
      p.type = VehicleType::Type1;
    else if (t == "type2")
      p.type = VehicleType::Type2;
    else
      throw ScenarioError("type must be \"type1\" or \"type2\"");
  }
  if (obj.contains("option")) {
    const std::string o = obj.at("option").get<std::string>();
    if (o == "servo")
      p.option = ActuationOption::Servo;
    else if (o == "coupled-rotor")
      p.option = ActuationOption::CoupledRotor;
    else
      throw ScenarioError("option must be \"servo\" or \"coupled-rotor\"");
  }
  set_if(obj, "m_b", p.m_b);
  set_if(obj, "m_p", p.m_p);
  set_if(obj, "I_b", p.I_b);
  set_if(obj, "I_p", p.I_p);
  set_if(obj, "a", p.a);
  set_if(obj, "a11", p.a11);
  set_if(obj, "gravity", p.gravity);
  if (obj.contains("d")) p.d = obj.at("d").get<std::vector<double>>();
  if (obj.contains("b_f")) {
    const json& b = obj.at("b_f");
    if (b.is_number())
      p.b_f = {b.get<double>()};
    else
      p.b_f = b.get<std::vector<double>>();
  }
  if (obj.contains("theta_l"))
    p.theta_l = obj.at("theta_l").get<std::vector<double>>();
  p.finalize();
}

ReferenceSpec parse_reference(const json& obj) {
  if (!obj.is_object() || !obj.contains("type"))
    throw ScenarioError("reference needs a \"type\" field");
  const std::string type = obj.at("type").get<std::string>();
  if (type == "regulate") {
    check_keys(obj, "reference", {"type", "x", "y", "phi", "phi_deg"});
    RegulatePose r;
    set_if(obj, "x", r.x);
    set_if(obj, "y", r.y);
    r.phi = angle_value(obj, "phi", "phi_deg", 0.0);
    return r;
  }
  if (type == "circle") {
    check_keys(obj, "reference",
               {"type", "radius", "cx", "cy", "rate", "with_phi", "phi_amp",
                "phi_amp_deg", "phi_rate", "phi_rate_deg_s"});
    CircleTrack c;
    set_if(obj, "radius", c.radius);
    set_if(obj, "cx", c.cx);
    set_if(obj, "cy", c.cy);
    set_if(obj, "rate", c.rate);
    c.phi_amp = angle_value(obj, "phi_amp", "phi_amp_deg", 0.0);
    c.phi_rate = angle_value(obj, "phi_rate", "phi_rate_deg_s", 0.0);
    // Giving an amplitude arms the sweep; an explicit flag (as written by
    // the canonical echo) wins over the shorthand.
    c.with_phi = obj.contains("phi_amp") || obj.contains("phi_amp_deg");
    if (obj.contains("with_phi"))
      c.with_phi = obj.at("with_phi").get<bool>();
    return c;
  }
  throw ScenarioError("reference type must be \"regulate\" or \"circle\"");
}

std::array<double, 4> parse_pole_array(const json& arr, const char* where) {
  if (!arr.is_array() || arr.size() != 4)
    throw ScenarioError(std::string(where) + " must be an array of 4 poles");
  std::array<double, 4> p{};
  for (int i = 0; i < 4; ++i) p[i] = arr.at(i).get<double>();
  return p;
}

void parse_box(const json& obj, PerturbationBox& box) {
  check_keys(obj, "box", {"a", "c", "m_p", "m_b", "b_f", "I_p", "I_b"});
  for (int k = 0; k < kPerturbationDim; ++k) {
    const char* name = param_name(static_cast<PerturbedParam>(k));
    if (!obj.contains(name)) continue;
    const json& r = obj.at(name);
    if (!r.is_array() || r.size() != 2)
      throw ScenarioError(std::string("box.") + name +
                          " must be [lo, hi]");
    const double lo = r.at(0).get<double>(), hi = r.at(1).get<double>();
    if (lo > hi)
      throw ScenarioError(std::string("box.") + name + " has lo > hi");
    box.range[k] = {lo, hi};
  }
}

void parse_search(const json& obj, const char* where, double& start,
                  double& growth, double& cap, double& rel_resolution) {
  check_keys(obj, where, {"start", "growth", "cap", "rel_resolution"});
  set_if(obj, "start", start);
  set_if(obj, "growth", growth);
  set_if(obj, "cap", cap);
  set_if(obj, "rel_resolution", rel_resolution);
  if (!(start > 0.0) || !(growth > 1.0) || !(cap > 0.0) ||
      !(rel_resolution > 0.0))
    throw ScenarioError(std::string(where) + " values out of range");
}

void refresh_gains(ScenarioConfig& cfg) {
  cfg.scenario.gains.x = design_gains(cfg.poles[0]);
  cfg.scenario.gains.y = design_gains(cfg.poles[1]);
  cfg.scenario.gains.phi = design_gains(cfg.poles[2]);
}

json params_json(const VehicleParams& p) {
  json j;
  j["type"] = p.type == VehicleType::Type2 ? "type2" : "type1";
  j["option"] =
      p.option == ActuationOption::CoupledRotor ? "coupled-rotor" : "servo";
  j["n_links"] = p.n_links;
  j["m_b"] = p.m_b;
  j["m_p"] = p.m_p;
  j["I_b"] = p.I_b;
  j["I_p"] = p.I_p;
  j["a"] = p.a;
  j["a11"] = p.a11;
  j["gravity"] = p.gravity;
  j["d"] = p.d;
  j["b_f"] = p.b_f;
  j["theta_l"] = p.theta_l;
  j["preset"] = p.preset_name;
  return j;
}

json reference_json(const ReferenceSpec& ref) {
  json j;
  if (const auto* r = std::get_if<RegulatePose>(&ref)) {
    j["type"] = "regulate";
    j["x"] = r->x;
    j["y"] = r->y;
    j["phi"] = r->phi;
  } else {
    const auto& c = std::get<CircleTrack>(ref);
    j["type"] = "circle";
    j["radius"] = c.radius;
    j["cx"] = c.cx;
    j["cy"] = c.cy;
    j["rate"] = c.rate;
    j["with_phi"] = c.with_phi;
    j["phi_amp"] = c.phi_amp;
    j["phi_rate"] = c.phi_rate;
  }
  return j;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace

ScenarioConfig default_config() {
  ScenarioConfig cfg;
  cfg.params = VehicleParams::preset("main-paper");
  cfg.scenario.reference = RegulatePose{10.0, 8.0, 60.0 * kDegToRad};
  cfg.scenario.start = {9.0, 7.0, 30.0 * kDegToRad};
  cfg.poles = {{{-3.0, -3.0, -3.0, -3.0},
                {-3.0, -3.0, -3.0, -3.0},
                {-3.0, -3.0, -3.0, -3.0}}};
  refresh_gains(cfg);
  cfg.scenario.options.dt = 1e-3;
  cfg.scenario.options.t_final = 8.0;
  cfg.box = default_search_box();
  cfg.config_hash = scenario_hash(cfg);
  return cfg;
}

ScenarioConfig default_track_config(bool with_phi) {
  ScenarioConfig cfg = default_config();
  CircleTrack c;
  c.radius = 1.0;
  c.cx = 5.0;
  c.cy = 5.0;
  c.rate = 0.5;
  c.with_phi = with_phi;
  if (with_phi) {
    c.phi_amp = 80.0 * kDegToRad;
    c.phi_rate = 30.0 * kDegToRad;  // 30 deg/s
  }
  cfg.scenario.reference = c;
  cfg.scenario.start = reference_pose(cfg.scenario.reference, 0.0);
  cfg.scenario.options.t_final = 20.0;
  cfg.config_hash = scenario_hash(cfg);
  return cfg;
}

ScenarioConfig parse_scenario(const std::string& json_text) {
  ScenarioConfig cfg = default_config();
  try {
    const json root = json::parse(json_text);
    if (!root.is_object())
      throw ScenarioError("config must be a JSON object");
    check_keys(root, "config",
               {"preset", "params", "reference", "start", "poles", "dt",
                "t_final", "min_margin", "disturbance", "seed", "samples",
                "workers", "box", "sweep_omegas", "range_search",
                "tolerance_search"});

    if (root.contains("preset"))
      cfg.params =
          VehicleParams::preset(root.at("preset").get<std::string>());
    if (root.contains("params"))
      apply_param_overrides(root.at("params"), cfg.params);

    if (root.contains("reference")) {
      cfg.scenario.reference = parse_reference(root.at("reference"));
      cfg.scenario.start = reference_pose(cfg.scenario.reference, 0.0);
    }
    if (root.contains("start")) {
      const json& s = root.at("start");
      check_keys(s, "start", {"x", "y", "phi", "phi_deg"});
      set_if(s, "x", cfg.scenario.start.x);
      set_if(s, "y", cfg.scenario.start.y);
      cfg.scenario.start.phi =
          angle_value(s, "phi", "phi_deg", cfg.scenario.start.phi);
    }

    if (root.contains("poles")) {
      const json& p = root.at("poles");
      if (p.is_array()) {
        const auto shared = parse_pole_array(p, "poles");
        cfg.poles = {shared, shared, shared};
      } else if (p.is_object()) {
        check_keys(p, "poles", {"x", "y", "phi"});
        if (p.contains("x"))
          cfg.poles[0] = parse_pole_array(p.at("x"), "poles.x");
        if (p.contains("y"))
          cfg.poles[1] = parse_pole_array(p.at("y"), "poles.y");
        if (p.contains("phi"))
          cfg.poles[2] = parse_pole_array(p.at("phi"), "poles.phi");
      } else {
        throw ScenarioError("poles must be an array or an object");
      }
      refresh_gains(cfg);
    }

    set_if(root, "dt", cfg.scenario.options.dt);
    set_if(root, "t_final", cfg.scenario.options.t_final);
    set_if(root, "min_margin", cfg.scenario.options.min_margin);
    if (!(cfg.scenario.options.dt > 0.0) ||
        !(cfg.scenario.options.t_final > 0.0))
      throw ScenarioError("dt and t_final must be positive");

    if (root.contains("disturbance")) {
      const json& d = root.at("disturbance");
      check_keys(d, "disturbance", {"amplitude", "omega", "phase"});
      set_if(d, "amplitude", cfg.scenario.disturbance.amplitude);
      set_if(d, "omega", cfg.scenario.disturbance.omega);
      set_if(d, "phase", cfg.scenario.disturbance.phase);
    }

    if (root.contains("seed"))
      cfg.seed = root.at("seed").get<std::uint64_t>();
    if (root.contains("samples")) {
      cfg.samples = root.at("samples").get<int>();
      if (cfg.samples < 1) throw ScenarioError("samples must be >= 1");
    }
    if (root.contains("workers")) {
      cfg.workers = root.at("workers").get<int>();
      if (cfg.workers < 1) throw ScenarioError("workers must be >= 1");
    }
    if (root.contains("box")) parse_box(root.at("box"), cfg.box);
    if (root.contains("sweep_omegas")) {
      cfg.sweep_omegas =
          root.at("sweep_omegas").get<std::vector<double>>();
      for (double w : cfg.sweep_omegas)
        if (w < 0.0) throw ScenarioError("sweep omegas must be >= 0");
    }
    if (root.contains("range_search"))
      parse_search(root.at("range_search"), "range_search",
                   cfg.range_opt.start, cfg.range_opt.growth,
                   cfg.range_opt.cap, cfg.range_opt.rel_resolution);
    if (root.contains("tolerance_search"))
      parse_search(root.at("tolerance_search"), "tolerance_search",
                   cfg.tol_opt.start, cfg.tol_opt.growth, cfg.tol_opt.cap,
                   cfg.tol_opt.rel_resolution);
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("config parse error: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(std::string("config validation error: ") + e.what());
  }
  cfg.config_hash = scenario_hash(cfg);
  return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string canonical_scenario_json(const ScenarioConfig& cfg) {
  json j;
  j["params"] = params_json(cfg.params);
  j["reference"] = reference_json(cfg.scenario.reference);
  j["start"] = {{"x", cfg.scenario.start.x},
                {"y", cfg.scenario.start.y},
                {"phi", cfg.scenario.start.phi}};
  j["poles"] = {{"x", cfg.poles[0]},
                {"y", cfg.poles[1]},
                {"phi", cfg.poles[2]}};
  j["dt"] = cfg.scenario.options.dt;
  j["t_final"] = cfg.scenario.options.t_final;
  j["min_margin"] = cfg.scenario.options.min_margin;
  j["disturbance"] = {{"amplitude", cfg.scenario.disturbance.amplitude},
                      {"omega", cfg.scenario.disturbance.omega},
                      {"phase", cfg.scenario.disturbance.phase}};
  j["seed"] = cfg.seed;
  j["samples"] = cfg.samples;
  j["workers"] = cfg.workers;
  json box = json::object();
  for (int k = 0; k < kPerturbationDim; ++k)
    box[param_name(static_cast<PerturbedParam>(k))] = {
        cfg.box.range[k].first, cfg.box.range[k].second};
  j["box"] = std::move(box);
  j["sweep_omegas"] = cfg.sweep_omegas;
  j["range_search"] = {{"start", cfg.range_opt.start},
                       {"growth", cfg.range_opt.growth},
                       {"cap", cfg.range_opt.cap},
                       {"rel_resolution", cfg.range_opt.rel_resolution}};
  j["tolerance_search"] = {{"start", cfg.tol_opt.start},
                           {"growth", cfg.tol_opt.growth},
                           {"cap", cfg.tol_opt.cap},
                           {"rel_resolution", cfg.tol_opt.rel_resolution}};
  return j.dump(2);
}

std::uint64_t scenario_hash(const ScenarioConfig& cfg) {
  return fnv1a(canonical_scenario_json(cfg));
}

}  // namespace omav
