#include "rfcw/runner.hpp"

#include "rfcw/glauber.hpp"
#include "rfcw/kramers.hpp"
#include "rfcw/landscape.hpp"
#include "rfcw/meso.hpp"
#include "rfcw/model.hpp"
#include "rfcw/potential.hpp"
#include "rfcw/saddleflow.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace rfcw {

namespace {

using nlohmann::json;

constexpr const char* kVersion = "rfcw 0.1.0";

json tag(double v, const char* method) {
  return json{{"value", v}, {"method", method}};
}

struct Setup {
  SystemParams params;
  RandomField field;
  int n = 1;
  std::string out_dir;
  int threads = 0;
};

Setup make_setup(const Config& cfg) {
  Setup s;
  if (const std::string* path = cfg.find("model", "field_file")) {
    std::ifstream is(*path);
    if (!is) throw IoError("cannot open field file: " + *path);
    FieldFile ff = read_field(is);
    s.params = ff.params;
    s.field = ff.field;
    s.params.beta = cfg.get_double("model", "beta", s.params.beta);
  } else {
    s.params.N = static_cast<int>(cfg.get_int("model", "N", 0));
    if (s.params.N <= 0) cfg.require("model", "N");
    s.params.beta = cfg.get_double("model", "beta", 0.0);
    if (s.params.beta <= 0.0) cfg.require("model", "beta");
    FieldDistribution dist =
        FieldDistribution::parse(cfg.get("model", "dist", "constant(0)"));
    s.field = sample_field(dist, s.params.N, cfg.get_u64("model", "seed", 1));
  }
  s.params.validate();
  s.n = static_cast<int>(cfg.get_int("meso", "n", 1));
  s.out_dir = cfg.get("output", "dir", "");
  s.threads = static_cast<int>(cfg.get_int("runtime", "threads", 0));
  return s;
}

std::string output_path(const Setup& s, const std::string& name) {
  if (s.out_dir.empty()) return {};
  std::error_code ec;
  std::filesystem::create_directories(s.out_dir, ec);
  if (ec) throw IoError("cannot create output directory: " + s.out_dir);
  return (std::filesystem::path(s.out_dir) / name).string();
}

// starting minimum: explicit model.start_m if given, otherwise the shallowest
// minimum (largest free energy), breaking ties toward lower magnetization
CriticalPoint pick_start(const Landscape1D& land, const Config& cfg) {
  auto cps = land.critical_points();
  const CriticalPoint* best = nullptr;
  if (const std::string* sm = cfg.find("model", "start_m")) {
    double want = std::stod(*sm);
    for (const auto& cp : cps) {
      if (!cp.is_minimum) continue;
      if (!best || std::abs(cp.m_star - want) < std::abs(best->m_star - want))
        best = &cp;
    }
  } else {
    for (const auto& cp : cps) {
      if (!cp.is_minimum) continue;
      if (!best || cp.F_value > best->F_value + 1e-15) best = &cp;
    }
  }
  if (!best) throw std::runtime_error("landscape has no minimum");
  return *best;
}

struct MesoSetup {
  Partition part;
  MesoLandscape landscape;
  LumpedChain lumped;
  BarrierSpec barrier;
  std::int64_t a_state = -1, b_state = -1;
};

MesoSetup make_meso(const Setup& s, const Config& cfg,
                    const Landscape1D& land) {
  Partition part = build_partition(s.field, s.n);
  MesoLandscape ml(s.params, s.field, part);
  LumpedChain lumped = lumped_chain(part, s.params);
  BarrierSpec barrier = land.barrier(pick_start(land, cfg));
  auto [a, b] = well_states(ml, lumped.grid, barrier);
  return MesoSetup{std::move(part), std::move(ml), std::move(lumped), barrier,
                   a, b};
}

json critical_point_json(const CriticalPoint& cp) {
  return json{{"m_star", cp.m_star},
              {"is_minimum", cp.is_minimum},
              {"F", cp.F_value},
              {"curvature_a", cp.curvature_a},
              {"susceptibility", cp.susceptibility},
              {"method", "formula"}};
}

json cmd_landscape(const Setup& s, const Config& cfg) {
  Landscape1D land(s.params, s.field);
  json payload;
  payload["critical_points"] = json::array();
  for (const auto& cp : land.critical_points())
    payload["critical_points"].push_back(critical_point_json(cp));
  BarrierSpec barrier = land.barrier(pick_start(land, cfg));
  json deeper = json::array();
  for (const auto& d : barrier.deeper) deeper.push_back(d.m_star);
  payload["barrier"] = json{{"start_m", barrier.start.m_star},
                            {"saddle_m", barrier.saddle.m_star},
                            {"delta_F", barrier.delta_F},
                            {"deeper_m", deeper},
                            {"method", "formula"}};
  std::string csv = output_path(s, "landscape.csv");
  if (!csv.empty()) {
    std::ofstream os(csv);
    if (!os) throw IoError("cannot write " + csv);
    land.write_csv(os,
                   static_cast<int>(cfg.get_int("landscape", "grid_points",
                                                2001)));
    payload["csv"] = csv;
  }
  return payload;
}

json cmd_predict(const Setup& s, const Config& cfg) {
  Landscape1D land(s.params, s.field);
  BarrierSpec barrier = land.barrier(pick_start(land, cfg));
  bool empirical = cfg.get_bool("predict", "empirical", true);
  SharpPrediction p = sharp_prediction(land, barrier, empirical);
  json payload;
  payload["empirical"] = empirical;
  payload["delta_F"] = tag(p.delta_F, "formula");
  payload["gamma_bar1"] = tag(p.gamma_bar1, "formula");
  payload["a_saddle"] = tag(p.a_z_star, "formula");
  payload["a_minimum"] = tag(p.a_m0, "formula");
  payload["log_ZQ_saddle"] = tag(p.log_ZQ_saddle, "formula");
  payload["log_Zcap"] = tag(p.log_Zcap, "formula");
  payload["log_mean_time"] = tag(p.log_mean_time, "formula");
  payload["naive_log_mean_time"] = tag(p.naive_log_mean_time, "formula");
  return payload;
}

json exact_payload(const MesoSetup& ms) {
  std::vector<int> A{static_cast<int>(ms.a_state)};
  std::vector<int> B{static_cast<int>(ms.b_state)};
  PotentialSolution sol = solve_potential_metastable(ms.lumped.chain, A, B);
  HittingTimeResult ht = mean_hitting_time_metastable(ms.lumped.chain, A, B);
  json payload;
  payload["log_cap"] = tag(sol.log_cap, "exact");
  payload["log_cap_dirichlet"] = tag(sol.log_cap_dirichlet, "exact");
  payload["log_mean_time"] = tag(ht.log_mean, "exact");
  payload["solver"] = sol.method;
  payload["residual"] = sol.residual;
  payload["lumping_exact"] = ms.lumped.exact;
  payload["well_a"] = ms.a_state;
  payload["well_b"] = ms.b_state;
  return payload;
}

json cmd_exact(const Setup& s, const Config& cfg) {
  Landscape1D land(s.params, s.field);
  MesoSetup ms = make_meso(s, cfg, land);
  return exact_payload(ms);
}

struct BoundsOut {
  json payload;
  double log_lower = 0.0, log_upper = 0.0;
};

BoundsOut bounds_payload(const Setup& s, const Config& cfg,
                         const MesoSetup& ms) {
  SaddleData saddle =
      meso_saddle(ms.barrier.saddle, ms.part, s.params, s.field);
  double rho = cfg.get_double("bounds", "rho",
                              flow_box_radius(saddle, s.params, ms.barrier));
  double nu = cfg.get_double("bounds", "nu", 0.8);
  double nu0 = cfg.get_double("bounds", "nu0", 0.25);
  SaddleNeighborhood nb =
      make_neighborhood(ms.landscape, saddle, ms.lumped.grid, rho, nu, nu0);
  SaddleFlowResult flow =
      build_saddle_flow(ms.landscape, saddle, nb, ms.lumped, ms.barrier);
  FlowDiagnostics diag = validate_flow(ms.lumped.chain, flow.flow, 1e-9);
  if (!diag.ok)
    throw std::runtime_error("saddle flow failed validation: " +
                             diag.violated);
  BkOptions opts;
  opts.monte_carlo = cfg.get_bool("bounds", "monte_carlo",
                                  ms.part.active().size() > 1);
  opts.mc_paths = cfg.get_int("bounds", "mc_paths", 20000);
  opts.seed = cfg.get_u64("bounds", "seed", 1);
  BkBound bk = bk_lower_bound(ms.lumped.chain, flow.flow, opts);
  UpperBoundResult ub =
      upper_bound_via_g(saddle, nb, ms.landscape, ms.lumped, ms.barrier);

  BoundsOut out;
  out.log_lower = bk.log_value;
  out.log_upper = ub.log_numeric;
  out.payload["log_cap_lower"] = tag(bk.log_value, "bound_lower");
  out.payload["log_cap_upper"] = tag(ub.log_numeric, "bound_upper");
  out.payload["log_cap_upper_closed_form"] =
      tag(ub.log_closed_form, "formula");
  out.payload["bk"] = json{{"method", bk.method},
                           {"paths", bk.paths},
                           {"rel_stderr", bk.rel_stderr}};
  out.payload["flow"] = json{{"clipped_mass", flow.clipped_mass},
                             {"side_exit_mass", flow.side_exit_mass},
                             {"arcs", flow.flow.arcs.size()}};
  out.payload["neighborhood"] = json{{"rho", nb.rho},
                                     {"nu", nb.nu},
                                     {"nu0", nb.nu0},
                                     {"boundary_excess", nb.boundary_excess}};
  out.payload["gamma_hat1"] = tag(saddle.gamma_hat1, "formula");
  return out;
}

json cmd_bounds(const Setup& s, const Config& cfg) {
  Landscape1D land(s.params, s.field);
  MesoSetup ms = make_meso(s, cfg, land);
  BoundsOut out = bounds_payload(s, cfg, ms);
  if (cfg.get_bool("bounds", "exact", true))
    out.payload["exact"] = exact_payload(ms);
  return out.payload;
}

json simulate_payload(const Setup& s, const Config& cfg, const MesoSetup& ms,
                      std::int64_t replicas) {
  SimSpec spec;
  spec.lumped = &ms.lumped.chain;
  spec.target = {ms.b_state};
  spec.replicas = replicas;
  spec.seed = cfg.get_u64("simulate", "seed", 1);
  spec.max_steps = cfg.get_int("simulate", "max_steps", 10'000'000'000LL);
  std::string start = cfg.get("simulate", "start", "nu");
  if (start == "nu") {
    set_exact_nu_start(spec, {static_cast<int>(ms.a_state)});
  } else if (start == "gibbs") {
    // restricted Gibbs over the magnetization layer of the starting well
    const MesoGrid& grid = ms.lumped.grid;
    auto ka = grid.coords(ms.a_state);
    int layer = 0;
    for (int v : ka) layer += v;
    spec.start = SimSpec::Start::GibbsRestricted;
    for (std::int64_t idx = 0; idx < grid.size(); ++idx) {
      auto k = grid.coords(idx);
      int l = 0;
      for (int v : k) l += v;
      if (l == layer) spec.start_set.push_back(static_cast<int>(idx));
    }
  } else if (start == "fixed") {
    spec.start = SimSpec::Start::Fixed;
    spec.start_state = ms.a_state;
  } else {
    throw std::runtime_error("unknown simulate.start: " + start);
  }
  McEstimate est = estimate_mean_time(spec, s.threads);

  std::string csv = output_path(s, "simulate.csv");
  if (!csv.empty()) {
    std::ofstream os(csv);
    if (!os) throw IoError("cannot write " + csv);
    os << "replica,steps,truncated\n";
    for (std::int64_t r = 0; r < est.replicas; ++r)
      os << r << "," << est.steps[r] << ","
         << int(est.truncated_flags[r]) << "\n";
  }

  json payload;
  payload["mean"] = tag(est.mean, "monte_carlo");
  payload["stderr"] = est.stderr_;
  payload["replicas"] = est.replicas;
  payload["truncated"] = est.truncated;
  payload["usable"] = est.usable;
  payload["start"] = start;
  if (!csv.empty()) payload["csv"] = csv;
  return payload;
}

json cmd_simulate(const Setup& s, const Config& cfg) {
  Landscape1D land(s.params, s.field);
  MesoSetup ms = make_meso(s, cfg, land);
  return simulate_payload(s, cfg, ms,
                          cfg.get_int("simulate", "replicas", 10000));
}

json cmd_validate(const Setup& s, const Config& cfg) {
  Landscape1D land(s.params, s.field);
  MesoSetup ms = make_meso(s, cfg, land);
  bool empirical = cfg.get_bool("predict", "empirical", true);
  SharpPrediction pred = sharp_prediction(land, ms.barrier, empirical);
  json exact = exact_payload(ms);
  BoundsOut bounds = bounds_payload(s, cfg, ms);

  double log_cap_exact = exact["log_cap"]["value"].get<double>();
  double log_time_exact = exact["log_mean_time"]["value"].get<double>();

  json capacity;
  capacity["exact"] = exact["log_cap"];
  capacity["bound_lower"] = bounds.payload["log_cap_lower"];
  capacity["bound_upper"] = bounds.payload["log_cap_upper"];
  capacity["formula"] = tag(pred.log_Zcap, "formula");
  capacity["sandwich_ok"] = bounds.log_lower <= log_cap_exact + 1e-9 &&
                            log_cap_exact <= bounds.log_upper + 1e-9;
  capacity["log_ratio_upper_lower"] = bounds.log_upper - bounds.log_lower;
  capacity["log_ratio_exact_formula"] = log_cap_exact - pred.log_Zcap;

  // magnetization projection of the lumped chain (the naive 1D dynamics)
  ReversibleChain naive = project_naive_chain(ms.lumped);
  auto layer_of = [&](std::int64_t idx) {
    int M = 0;
    for (int v : ms.lumped.grid.coords(idx)) M += v;
    return M;
  };
  HittingTimeResult naive_ht = mean_hitting_time_metastable(
      naive, {layer_of(ms.a_state)}, {layer_of(ms.b_state)});

  json mean_time;
  mean_time["exact"] = exact["log_mean_time"];
  mean_time["formula"] = tag(pred.log_mean_time, "formula");
  mean_time["naive_formula"] = tag(pred.naive_log_mean_time, "formula");
  mean_time["naive_chain"] = tag(naive_ht.log_mean, "exact");
  mean_time["log_ratio_exact_formula"] =
      log_time_exact - pred.log_mean_time;
  mean_time["log_ratio_naive_exact"] = naive_ht.log_mean - log_time_exact;

  std::int64_t R = cfg.get_int("validate", "replicas", 2000);
  if (R > 0) {
    json mc = simulate_payload(s, cfg, ms, R);
    double mean = mc["mean"]["value"].get<double>();
    mean_time["monte_carlo"] = mc;
    if (mean > 0.0) mean_time["log_mc"] = tag(std::log(mean), "monte_carlo");
  }

  json payload;
  payload["capacity"] = capacity;
  payload["mean_time"] = mean_time;
  payload["bounds_detail"] = bounds.payload;
  return payload;
}

json cmd_report(const Setup& s, const Config& cfg) {
  json payload;
  payload["landscape"] = cmd_landscape(s, cfg);
  payload["predict"] = cmd_predict(s, cfg);
  Landscape1D land(s.params, s.field);
  MesoSetup ms = make_meso(s, cfg, land);
  payload["exact"] = exact_payload(ms);
  BoundsOut bounds = bounds_payload(s, cfg, ms);
  payload["bounds"] = bounds.payload;
  return payload;
}

}  // namespace

RunResult run_command(const std::string& command, const Config& cfg) {
  auto t0 = std::chrono::steady_clock::now();
  RunResult res;
  try {
    Setup s = make_setup(cfg);
    json payload;
    if (command == "landscape")
      payload = cmd_landscape(s, cfg);
    else if (command == "predict")
      payload = cmd_predict(s, cfg);
    else if (command == "exact")
      payload = cmd_exact(s, cfg);
    else if (command == "bounds")
      payload = cmd_bounds(s, cfg);
    else if (command == "simulate")
      payload = cmd_simulate(s, cfg);
    else if (command == "validate")
      payload = cmd_validate(s, cfg);
    else if (command == "report")
      payload = cmd_report(s, cfg);
    else
      throw IoError("unknown command: " + command);

    double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    json record;
    record["command"] = command;
    record["config"] = cfg.to_string();
    record["version"] = kVersion;
    record["wall_time_s"] = wall;
    record["payload"] = payload;
    res.exit_code = 0;
    res.json = record.dump(2);
  } catch (const IoError& e) {
    res.exit_code = 1;
    res.json = json{{"error", e.what()}, {"kind", "internal"}}.dump(2);
  } catch (const std::invalid_argument& e) {
    res.exit_code = 2;
    res.json = json{{"error", e.what()}, {"kind", "domain"}}.dump(2);
  } catch (const std::runtime_error& e) {
    res.exit_code = 2;
    res.json = json{{"error", e.what()}, {"kind", "domain"}}.dump(2);
  } catch (const std::exception& e) {
    res.exit_code = 1;
    res.json = json{{"error", e.what()}, {"kind", "internal"}}.dump(2);
  }
  return res;
}

}  // namespace rfcw
