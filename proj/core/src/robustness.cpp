#include "omav/robustness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include <json.hpp>

namespace omav {

const char* param_name(PerturbedParam p) {
  switch (p) {
    case PerturbedParam::JointArm: return "a";
    case PerturbedParam::ComOffset: return "c";
    case PerturbedParam::LinkMass: return "m_p";
    case PerturbedParam::PlatformMass: return "m_b";
    case PerturbedParam::JointFriction: return "b_f";
    case PerturbedParam::LinkInertia: return "I_p";
    case PerturbedParam::PlatformInertia: return "I_b";
  }
  return "?";
}

PerturbedParams apply_perturbation(const VehicleParams& nominal,
                                   const Perturbation& d) {
  PerturbedParams out{nominal, false};
  VehicleParams& p = out.params;
  auto scale = [&](PerturbedParam k) {
    return 1.0 + d.delta[static_cast<int>(k)];
  };

  p.a *= scale(PerturbedParam::JointArm);
  for (double& di : p.d)
    if (di != 0.0) di *= scale(PerturbedParam::ComOffset);
  p.m_p *= scale(PerturbedParam::LinkMass);
  p.m_b *= scale(PerturbedParam::PlatformMass);
  for (double& b : p.b_f) b *= scale(PerturbedParam::JointFriction);

  const double sp = scale(PerturbedParam::LinkInertia);
  const double sb = scale(PerturbedParam::PlatformInertia);
  if (sp <= 0.0) {
    p.I_p = 0.01 * nominal.I_p;
    out.inertia_clamped = true;
  } else {
    p.I_p = nominal.I_p * sp;
  }
  if (sb <= 0.0) {
    p.I_b = 0.01 * nominal.I_b;
    out.inertia_clamped = true;
  } else {
    p.I_b = nominal.I_b * sb;
  }

  p.finalize();
  return out;
}

PerturbationBox default_search_box() {
  PerturbationBox box;
  box.range[static_cast<int>(PerturbedParam::JointArm)] = {-0.208, 0.211};
  box.range[static_cast<int>(PerturbedParam::ComOffset)] = {-0.1028, 1.41};
  box.range[static_cast<int>(PerturbedParam::LinkMass)] = {-0.00149, 0.0274};
  box.range[static_cast<int>(PerturbedParam::PlatformMass)] = {-0.0315,
                                                              0.00149};
  box.range[static_cast<int>(PerturbedParam::JointFriction)] = {-0.35,
                                                               0.0715};
  box.range[static_cast<int>(PerturbedParam::LinkInertia)] = {-9.0, 9.0};
  box.range[static_cast<int>(PerturbedParam::PlatformInertia)] = {-9.0, 9.0};
  return box;
}

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

double uniform01(std::uint64_t seed, std::uint64_t sample,
                 std::uint64_t dim) {
  std::uint64_t h = splitmix64(seed + 0x9e3779b97f4a7c15ULL * (sample + 1));
  h = splitmix64(h + 0xd1b54a32d192ed03ULL * (dim + 1));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

Perturbation plan_sample(const PerturbationBox& box, std::uint64_t seed,
                         int index) {
  Perturbation d;
  if (index < 2 * kPerturbationDim) {
    const int k = index / 2;
    d.delta[k] =
        (index % 2 == 0) ? box.range[k].first : box.range[k].second;
    return d;
  }
  for (int k = 0; k < kPerturbationDim; ++k) {
    const double u = uniform01(seed, static_cast<std::uint64_t>(index),
                               static_cast<std::uint64_t>(k));
    d.delta[k] =
        box.range[k].first + u * (box.range[k].second - box.range[k].first);
  }
  return d;
}

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  if (workers <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  auto work = [&] {
    for (int i; (i = next.fetch_add(1)) < n;) fn(i);
  };
  std::vector<std::thread> pool;
  const int extra = std::min(workers, n) - 1;
  pool.reserve(extra);
  for (int i = 0; i < extra; ++i) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
}

namespace {

SampleOutcome evaluate_sample(const VehicleParams& nominal,
                              const ScenarioSpec& scenario,
                              const Perturbation& d) {
  SampleOutcome out;
  out.delta = d;
  PerturbedParams pp;
  try {
    pp = apply_perturbation(nominal, d);
  } catch (const std::invalid_argument&) {
    out.valid = false;
    return out;
  }
  out.inertia_clamped = pp.inertia_clamped;
  try {
    const SimLog log = run_scenario(pp.params, nominal, scenario);
    out.termination = log.termination;
    out.metrics = compute_metrics(log);
  } catch (const std::exception&) {
    out.valid = false;
  }
  return out;
}

void summarize(WorstCaseReport& r) {
  double best_pos = -1.0, best_phi = -1.0;
  for (int i = 0; i < static_cast<int>(r.outcomes.size()); ++i) {
    const SampleOutcome& o = r.outcomes[i];
    if (!o.valid) {
      ++r.invalid;
      continue;
    }
    if (o.termination != TerminationReason::Completed) {
      ++r.failures;
      continue;
    }
    if (o.metrics.e_pos_max > best_pos) {
      best_pos = o.metrics.e_pos_max;
      r.worst_pos_index = i;
    }
    if (o.metrics.e_phi_max > best_phi) {
      best_phi = o.metrics.e_phi_max;
      r.worst_phi_index = i;
    }
  }
  r.e_pos_bound = best_pos >= 0.0 ? best_pos : 0.0;
  r.e_phi_bound = best_phi >= 0.0 ? best_phi : 0.0;
}

}  // namespace

WorstCaseReport worst_case_over(const VehicleParams& nominal,
                                const ScenarioSpec& scenario,
                                const std::vector<Perturbation>& list,
                                int workers) {
  WorstCaseReport r;
  r.samples = static_cast<int>(list.size());
  r.workers = workers;
  r.outcomes.resize(list.size());
  parallel_for(r.samples, workers, [&](int i) {
    r.outcomes[i] = evaluate_sample(nominal, scenario, list[i]);
  });
  summarize(r);
  return r;
}

WorstCaseReport worst_case_search(const VehicleParams& nominal,
                                  const ScenarioSpec& scenario,
                                  const PerturbationBox& box, int samples,
                                  std::uint64_t seed, int workers) {
  std::vector<Perturbation> list;
  list.reserve(samples);
  for (int i = 0; i < samples; ++i)
    list.push_back(plan_sample(box, seed, i));
  WorstCaseReport r = worst_case_over(nominal, scenario, list, workers);
  r.seed = seed;
  return r;
}

BracketResult bracket_and_bisect(const std::function<bool(double)>& fails,
                                 double start, double growth, double cap,
                                 double rel_resolution) {
  BracketResult r;
  double lo = 0.0;
  double x = std::min(start, cap);
  double hi = 0.0;
  while (true) {
    ++r.evals;
    if (fails(x)) {
      hi = x;
      break;
    }
    lo = x;
    if (x >= cap) {
      r.ok = cap;
      r.censored = true;
      return r;
    }
    x = std::min(x * growth, cap);
  }
  while (hi - lo > rel_resolution * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    ++r.evals;
    if (fails(mid))
      hi = mid;
    else
      lo = mid;
  }
  r.ok = lo;
  r.fail = hi;
  return r;
}

ParamRange param_range_search(const VehicleParams& nominal,
                              const ScenarioSpec& scenario,
                              PerturbedParam param,
                              const RangeSearchOptions& opt) {
  auto run_fails = [&](double delta) {
    Perturbation d;
    d.delta[static_cast<int>(param)] = delta;
    return !evaluate_sample(nominal, scenario, d).ok();
  };
  const BracketResult up = bracket_and_bisect(
      [&](double m) { return run_fails(m); }, opt.start, opt.growth,
      opt.cap, opt.rel_resolution);
  const BracketResult dn = bracket_and_bisect(
      [&](double m) { return run_fails(-m); }, opt.start, opt.growth,
      opt.cap, opt.rel_resolution);
  ParamRange out;
  out.hi = up.ok;
  out.hi_censored = up.censored;
  out.lo = -dn.ok;
  out.lo_censored = dn.censored;
  out.evals = up.evals + dn.evals;
  return out;
}

std::vector<ToleranceEntry> disturbance_tolerance(
    const VehicleParams& nominal, const ScenarioSpec& scenario,
    const std::vector<double>& omegas, const ToleranceOptions& opt,
    int workers) {
  std::vector<ToleranceEntry> entries(omegas.size());
  parallel_for(static_cast<int>(omegas.size()), workers, [&](int i) {
    ScenarioSpec s = scenario;
    s.disturbance.omega = omegas[i];
    // Probe with A*cos(omega t): full amplitude from t = 0 and a constant
    // bias in the omega = 0 row instead of an identically zero signal.
    s.disturbance.phase = 1.5707963267948966;
    auto fails = [&](double amp) {
      ScenarioSpec ss = s;
      ss.disturbance.amplitude = amp;
      return run_scenario(nominal, nominal, ss).termination !=
             TerminationReason::Completed;
    };
    const BracketResult r = bracket_and_bisect(
        fails, opt.start, opt.growth, opt.cap, opt.rel_resolution);
    ToleranceEntry& e = entries[i];
    e.omega = omegas[i];
    e.amplitude = r.ok;
    e.censored = r.censored;
    e.evals = r.evals;
    ScenarioSpec ss = s;
    ss.disturbance.amplitude = r.ok;
    e.e_pos_steady =
        compute_metrics(run_scenario(nominal, nominal, ss)).e_pos_steady;
  });
  return entries;
}

// ---- reports -------------------------------------------------------------

namespace {

using nlohmann::json;

json delta_json(const Perturbation& d) {
  json j;
  for (int k = 0; k < kPerturbationDim; ++k)
    j[param_name(static_cast<PerturbedParam>(k))] = d.delta[k];
  return j;
}

json context_json(
    const std::vector<std::pair<std::string, std::string>>& context) {
  json j = json::object();
  for (const auto& [k, v] : context) j[k] = v;
  return j;
}

json outcome_json(const SampleOutcome& o) {
  json j;
  j["delta"] = delta_json(o.delta);
  j["valid"] = o.valid;
  j["inertia_clamped"] = o.inertia_clamped;
  j["termination"] = termination_name(o.termination);
  j["e_pos_max"] = o.metrics.e_pos_max;
  j["e_phi_max"] = o.metrics.e_phi_max;
  j["e_pos_steady"] = o.metrics.e_pos_steady;
  j["e_phi_steady"] = o.metrics.e_phi_steady;
  return j;
}

}  // namespace

std::string worst_case_report_json(
    const WorstCaseReport& report,
    const std::vector<std::pair<std::string, std::string>>& context) {
  json j;
  j["context"] = context_json(context);
  j["seed"] = report.seed;
  j["samples"] = report.samples;
  j["workers"] = report.workers;
  j["failures"] = report.failures;
  j["invalid"] = report.invalid;
  j["bounds"] = {{"e_pos_max", report.e_pos_bound},
                 {"e_phi_max", report.e_phi_bound}};
  auto worst = [&](int idx) -> json {
    if (idx < 0) return nullptr;
    json w = outcome_json(report.outcomes[idx]);
    w["index"] = idx;
    return w;
  };
  j["worst_position"] = worst(report.worst_pos_index);
  j["worst_orientation"] = worst(report.worst_phi_index);
  json arr = json::array();
  for (const SampleOutcome& o : report.outcomes)
    arr.push_back(outcome_json(o));
  j["outcomes"] = std::move(arr);
  return j.dump(2);
}

std::string param_range_report_json(
    const std::vector<std::pair<PerturbedParam, ParamRange>>& ranges,
    const std::vector<std::pair<std::string, std::string>>& context) {
  json j;
  j["context"] = context_json(context);
  json obj = json::object();
  for (const auto& [param, r] : ranges) {
    json e;
    e["lo"] = r.lo;
    e["hi"] = r.hi;
    e["lo_censored"] = r.lo_censored;
    e["hi_censored"] = r.hi_censored;
    e["evals"] = r.evals;
    obj[param_name(param)] = std::move(e);
  }
  j["ranges"] = std::move(obj);
  return j.dump(2);
}

std::string disturbance_report_json(
    const std::vector<ToleranceEntry>& entries,
    const std::vector<std::pair<std::string, std::string>>& context) {
  json j;
  j["context"] = context_json(context);
  json arr = json::array();
  for (const ToleranceEntry& e : entries) {
    json o;
    o["omega"] = e.omega;
    o["amplitude"] = e.amplitude;
    o["censored"] = e.censored;
    o["evals"] = e.evals;
    o["e_pos_steady"] = e.e_pos_steady;
    arr.push_back(std::move(o));
  }
  j["tolerance"] = std::move(arr);
  return j.dump(2);
}

}  // namespace omav
