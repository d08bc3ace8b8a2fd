#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include <json.hpp>

#include "nldg/csv.hpp"
#include "nldg/errors.hpp"
#include "nldg/nonrel.hpp"
#include "nldg/soliton.hpp"
#include "nldg/standing_waves.hpp"

namespace nldg::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::ofstream open_out(const RunConfig& c, const std::string& name) {
  const fs::path path = fs::path(c.out_dir) / name;
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  return os;
}

void write_json(const RunConfig& c, const std::string& name, const json& j) {
  std::ofstream os = open_out(c, name);
  os << j.dump(2) << '\n';
}

std::string numbered(const char* stem, std::size_t i) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%06zu.csv", stem, i);
  return buf;
}

GridPtr config_grid(const RunConfig& c) {
  return make_star_grid({c.graph.N, c.graph.truncation_length}, c.graph.h, c.graph.far_end);
}

SolitonSpec soliton_spec(const RunConfig& c) {
  return {c.physics.p, c.physics.m, c.graph.N, c.soliton_shift};
}

json grid_json(const RunConfig& c, const Grid& g) {
  return {{"N", c.graph.N},
          {"truncation_length", g.spec().truncation_length},
          {"h", g.edge(g.graph().edges().front().id).h},
          {"far_end", c.graph.far_end == FarEnd::kHardWall ? "hard_wall" : "dirichlet"},
          {"dofs", g.size()}};
}

json physics_json(const PhysParams& p) { return {{"m", p.m}, {"c", p.c}, {"p", p.p}}; }

SpinorField rescaled_as_field(const RescaledState& s) {
  SpinorField f = SpinorField::zeros(s.grid());
  f.phi = s.u.values.cast<cplx>();
  f.chi = s.w.values.cast<cplx>();
  return f;
}

void say(bool verbose, std::ostream& log, const std::string& msg) {
  if (verbose) log << msg << '\n';
}

// ---------------------------------------------------------------- soliton

int cmd_soliton(const RunConfig& c, bool verbose, std::ostream& log) {
  const SolitonSpec spec = soliton_spec(c);
  const GridPtr grid = config_grid(c);
  const RescaledState seed = seed_state(spec, grid);
  {
    std::ofstream os = open_out(c, "profile.csv");
    write_field_csv(os, rescaled_as_field(seed));
  }
  json j = {{"p", spec.p},         {"m", spec.m},         {"N", spec.N},
            {"shift", spec.shift}, {"c_p", spec.c_p()},   {"gamma_p", spec.gamma_p()},
            {"delta", spec.delta()}, {"peak", soliton_profile(spec, 0.0)},
            {"grid", grid_json(c, *grid)}};
  write_json(c, "constants.json", j);
  say(verbose, log, "soliton: wrote profile.csv and constants.json");
  return kExitOk;
}

// ---------------------------------------------------------------- evolve

const char* initial_name(InitialData d) {
  switch (d) {
    case InitialData::kZero: return "zero";
    case InitialData::kSoliton: return "soliton";
    case InitialData::kGaussian: return "gaussian";
    case InitialData::kStandingWave: return "standing_wave";
  }
  return "";
}

struct Initial {
  SpinorField psi;
  json info = json::object();
};

Initial initial_state(const RunConfig& c, bool verbose, std::ostream& log) {
  const EvolveConfig& e = c.evolve;
  if (e.initial == InitialData::kStandingWave) {
    // The graph section describes the rescaled grid; the evolution runs on
    // the matched physical grid where the back-scaled profile is exact.
    const GridPtr rescaled = make_star_grid(
        {c.graph.N, c.graph.truncation_length}, c.graph.h, c.graph.far_end);
    ContinuationOptions opts;
    opts.singular_values = false;
    opts.min_step = std::min(1e-4, e.eps_step);
    const Branch b = continue_branch(soliton_spec(c), rescaled, e.eps, e.eps_step, opts);
    const BranchPoint& last = b.points.back();
    PhysicalStandingWave wave = scale_to_physical(last.state, c.physics);
    const double res = nlde_residual(wave.psi, wave.omega, c.physics);
    say(verbose, log, "evolve: standing wave at eps=" + csv::num(last.state.eps) +
                          " omega=" + csv::num(wave.omega) + " residual=" + csv::num(res));
    Initial out{wave.psi};
    out.info = {{"eps", last.state.eps},
                {"omega", wave.omega},
                {"nlde_residual", res},
                {"newton_residual", last.residual_norm},
                {"physical_h", wave.psi.grid->edge(EdgeId{0}).h},
                {"physical_truncation_length", wave.psi.grid->spec().truncation_length}};
    return out;
  }
  const GridPtr grid = config_grid(c);
  if (e.initial == InitialData::kZero) return {SpinorField::zeros(grid)};
  if (e.initial == InitialData::kSoliton) {
    const SolitonSpec spec = soliton_spec(c);
    const double a = e.amplitude;
    return {SpinorField::sample(
        grid, [&](EdgeId ed, double x) { return cplx(a * soliton_eval(spec, ed, x)); },
        [](EdgeId, double) { return cplx(0.0); })};
  }
  const double a = e.amplitude, w = e.width;
  return {SpinorField::sample(
      grid, [&](EdgeId, double x) { return cplx(a * std::exp(-(x * x) / (w * w))); },
      [](EdgeId, double) { return cplx(0.0); })};
}

double max_drift(const Trajectory& t, double EvolutionState::*field) {
  double d = 0.0;
  for (const EvolutionState& s : t.states) d = std::max(d, std::abs(s.*field - t.states.front().*field));
  return d;
}

int cmd_evolve(const RunConfig& c, bool verbose, std::ostream& log) {
  const EvolveConfig& e = c.evolve;
  Initial init = initial_state(c, verbose, log);
  const HermitianOperator D = assemble_dirac(init.psi.grid, c.physics);

  Trajectory traj;
  std::string status = "completed";
  int code = kExitOk;
  std::string error;
  try {
    traj = evolve(init.psi, e.integrator, D, c.physics.p);
    if (traj.reason == Termination::kBlowupFlagged) {
      status = "blowup_flagged";
      code = kExitBlowup;
    }
  } catch (const EvolutionError& err) {
    traj = err.partial();
    status = "solver_error";
    error = err.what();
    code = kExitSolver;
  }

  std::vector<double> duhamel;
  if (e.duhamel && code == kExitOk && !traj.states.empty())
    duhamel = duhamel_residual_series(traj, D, traj.states.back().t);
  {
    std::ofstream os = open_out(c, "diagnostics.csv");
    write_diagnostics_csv(os, traj, e.duhamel ? &duhamel : nullptr);
  }
  std::vector<std::string> snapshots;
  const std::size_t n = traj.states.size();
  for (std::size_t i = 0; i < n; ++i) {
    const bool pick = i == 0 || i + 1 == n ||
                      (e.snapshot_every > 0 && i % static_cast<std::size_t>(e.snapshot_every) == 0);
    if (!pick) continue;
    snapshots.push_back(numbered("snapshot", i));
    std::ofstream os = open_out(c, snapshots.back());
    write_field_csv(os, traj.states[i].psi);
  }

  json j = {{"status", status},
            {"initial", initial_name(e.initial)},
            {"records", n},
            {"t_final", n ? traj.states.back().t : 0.0},
            {"dt", e.integrator.dt},
            {"t_end", e.integrator.t_end},
            {"max_mass_drift", n ? max_drift(traj, &EvolutionState::mass) : 0.0},
            {"max_energy_drift", n ? max_drift(traj, &EvolutionState::energy) : 0.0},
            {"snapshots", snapshots},
            {"physics", physics_json(c.physics)},
            {"initial_data", init.info}};
  if (!duhamel.empty()) {
    double mx = 0.0;
    for (double v : duhamel) mx = std::max(mx, v);
    j["max_duhamel_residual"] = mx;
  }
  if (!error.empty()) j["error"] = error;
  write_json(c, "summary.json", j);
  say(verbose, log, "evolve: " + status + " after " + std::to_string(n) + " records");
  if (!error.empty()) log << "solver error: " << error << '\n';
  if (code == kExitBlowup) log << "blow-up flag raised at t=" << csv::num(traj.states.back().t) << '\n';
  return code;
}

// ---------------------------------------------------------------- branch

int cmd_branch(const RunConfig& c, bool verbose, std::ostream& log) {
  const BranchConfig& bc = c.branch;
  const GridPtr grid = config_grid(c);
  ContinuationOptions opts;
  opts.newton = {bc.newton_tol, bc.newton_max_iter};
  opts.min_step = bc.min_step;
  opts.singular_values = bc.singular_values;

  Branch branch;
  std::string error;
  try {
    branch = continue_branch(soliton_spec(c), grid, bc.eps_max, bc.eps_step, opts);
  } catch (const BranchError& err) {
    branch = err.partial();
    error = err.what();
  }
  const std::vector<BranchRow> rows = branch_rows(branch, c.physics);
  {
    std::ofstream os = open_out(c, "branch.csv");
    write_branch_csv(os, rows);
  }
  std::vector<std::string> profiles;
  const std::size_t n = branch.points.size();
  for (std::size_t i = 0; i < n; ++i) {
    const bool pick = i == 0 || i + 1 == n ||
                      (bc.profile_every > 0 && i % static_cast<std::size_t>(bc.profile_every) == 0);
    if (!pick) continue;
    profiles.push_back(numbered("profile", i));
    std::ofstream os = open_out(c, profiles.back());
    write_field_csv(os, rescaled_as_field(branch.points[i].state));
  }
  double max_res = 0.0;
  for (const BranchPoint& p : branch.points) max_res = std::max(max_res, p.residual_norm);
  const bool complete = error.empty();
  json j = {{"complete", complete},
            {"eps_max", bc.eps_max},
            {"eps_reached", n ? branch.points.back().state.eps : 0.0},
            {"points", n},
            {"max_residual", max_res},
            {"profiles", profiles},
            {"shift", c.soliton_shift},
            {"physics", physics_json(c.physics)},
            {"grid", grid_json(c, *grid)}};
  if (!complete) j["error"] = error;
  write_json(c, "summary.json", j);
  say(verbose, log, "branch: " + std::to_string(n) + " points");
  if (!complete) {
    log << "branch stopped early: " << error << '\n';
    return kExitPartialBranch;
  }
  return kExitOk;
}

// ---------------------------------------------------------------- nonrel

int cmd_nonrel(const RunConfig& c, bool verbose, std::ostream& log) {
  const NonrelConfig& nc = c.nonrel;
  const GridPtr grid = config_grid(c);
  const SweepResult r = nonrel_sweep(grid, c.physics, nc.k, nc.c_list);
  {
    std::ofstream os = open_out(c, "sweep.csv");
    write_sweep_csv(os, r);
  }
  auto row = [&](const char* name, const char* limit, RestSign sign) {
    json norms = json::array(), prop = json::array();
    for (const SweepPoint& p : r.points)
      norms.push_back(sign == RestSign::kMinus ? p.norm_minus : p.norm_plus);
    if (nc.propagator_t > 0.0) {
      // Data in the component that survives the limit, normalized.
      SpinorField psi = random_bumps(grid, c.rng_seed);
      (sign == RestSign::kMinus ? psi.chi : psi.phi).setZero();
      psi *= 1.0 / l2_norm(psi);
      for (double cv : nc.c_list) {
        PhysParams pp = c.physics;
        pp.c = cv;
        prop.push_back(propagator_difference(psi, pp, sign, nc.propagator_t, nc.propagator_dt));
      }
    }
    const bool minus = sign == RestSign::kMinus;
    return json{{"name", name},
                {"limit", limit},
                {"shift", minus ? "D - m c^2" : "D + m c^2"},
                {"slope", minus ? r.slope_minus : r.slope_plus},
                {"monotone", minus ? r.monotone_minus : r.monotone_plus},
                {"norms", norms},
                {"propagator_difference", prop}};
  };
  json rows = json::array();
  rows.push_back(row("kirchhoff", "upper", RestSign::kMinus));
  rows.push_back(row("delta_prime", "lower", RestSign::kPlus));
  json j = {{"c_list", nc.c_list},
            {"k", {nc.k.real(), nc.k.imag()}},
            {"propagator_t", nc.propagator_t},
            {"propagator_dt", nc.propagator_dt},
            {"rows", rows},
            {"physics", physics_json(c.physics)},
            {"grid", grid_json(c, *grid)}};
  write_json(c, "summary.json", j);
  say(verbose, log, "nonrel: slopes " + csv::num(r.slope_minus) + ", " + csv::num(r.slope_plus));
  return kExitOk;
}

// ---------------------------------------------------------------- resolvent-check

int cmd_resolvent(const RunConfig& c, bool verbose, std::ostream& log) {
  const ResolventConfig& rc = c.resolvent;
  const GridPtr grid = config_grid(c);
  const ResolventQuery q = make_query(rc.k, c.physics.m);
  const HermitianOperator D = assemble_dirac(grid, c.physics);
  const SpinorField psi = random_bumps(grid, c.rng_seed);

  const KernelApplication ka = apply_kernel(psi, q, rc.kernel);
  const SpinorField direct = shifted_solve(D, rc.k, psi);
  const double kernel_err = l2_norm(ka.value - direct) / l2_norm(direct);
  SpinorField applied = D.apply(ka.value) - rc.k * ka.value;
  const double identity_err = l2_norm(applied - psi) / l2_norm(psi);
  const double ansatz_gap =
      l2_norm(apply_kernel_ansatz(psi, q).value - ka.value) / l2_norm(ka.value);
  const double rd_minus =
      resdecomp_check(grid, c.physics, rc.resdecomp_k, RestSign::kMinus, rc.samples, c.rng_seed);
  const double rd_plus =
      resdecomp_check(grid, c.physics, rc.resdecomp_k, RestSign::kPlus, rc.samples, c.rng_seed);

  json checks = json::array();
  bool all = true;
  auto check = [&](const char* name, double value, double tol) {
    const bool ok = std::isfinite(value) && value <= tol;
    all = all && ok;
    checks.push_back({{"name", name}, {"value", value}, {"tolerance", tol}, {"pass", ok}});
  };
  check("kernel_vs_shifted_solve", kernel_err, rc.tolerance);
  check("resolvent_identity", identity_err, rc.identity_tolerance);
  check("resdecomp_minus", rd_minus, rc.resdecomp_tolerance);
  check("resdecomp_plus", rd_plus, rc.resdecomp_tolerance);

  std::vector<KernelSample> samples;
  for (double x : {0.0, 0.5, 1.5})
    for (double y : {0.25, 1.0, 2.0})
      for (int e = 0; e < 3; ++e)
        for (int f = 0; f < 3; ++f) samples.push_back({x, e, y, f});
  {
    std::ofstream os = open_out(c, "kernel_samples.csv");
    write_kernel_samples(os, samples, q, rc.kernel);
  }
  json j = {{"pass", all},
            {"checks", checks},
            {"k", {rc.k.real(), rc.k.imag()}},
            {"lambda", {q.lambda.real(), q.lambda.imag()}},
            {"resdecomp_k", {rc.resdecomp_k.real(), rc.resdecomp_k.imag()}},
            {"kernel_form", rc.kernel.form == KernelForm::kDerived ? "derived" : "three_matrix"},
            {"correction_scale", rc.kernel.correction_scale},
            {"ansatz_vs_quadrature", ansatz_gap},
            {"vertex_continuity_gap", ka.continuity_gap},
            {"physics", physics_json(c.physics)},
            {"grid", grid_json(c, *grid)}};
  write_json(c, "report.json", j);
  say(verbose, log, "resolvent-check: kernel " + csv::num(kernel_err) + ", identity " +
                        csv::num(identity_err));
  if (!all) {
    for (const auto& ch : checks)
      if (!ch["pass"].get<bool>())
        log << "FAILED check " << ch["name"].get<std::string>() << ": "
            << csv::num(ch["value"].get<double>()) << " > "
            << csv::num(ch["tolerance"].get<double>()) << '\n';
    return kExitSolver;
  }
  return kExitOk;
}

}  // namespace

SpinorField random_bumps(GridPtr grid, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0), center(0.5, 3.0), width(0.5, 1.5);
  struct Bump {
    cplx a;
    double x0, w;
  };
  const int ne = grid->graph().edge_count();
  std::vector<Bump> phi(static_cast<std::size_t>(ne)), chi(static_cast<std::size_t>(ne));
  for (int e = 0; e < ne; ++e) {
    for (auto* v : {&phi, &chi}) {
      Bump& b = (*v)[static_cast<std::size_t>(e)];
      const double re = unit(rng), im = unit(rng);
      b.a = {re, im};
      b.x0 = center(rng);
      b.w = width(rng);
    }
  }
  auto eval = [](const Bump& b, double x) {
    const double s = (x - b.x0) / b.w;
    return b.a * std::exp(-s * s);
  };
  return SpinorField::sample(
      grid, [&](EdgeId e, double x) { return eval(phi[static_cast<std::size_t>(e.value)], x); },
      [&](EdgeId e, double x) { return eval(chi[static_cast<std::size_t>(e.value)], x); });
}

int run_command(Command command, const RunConfig& config, bool verbose, std::ostream& log) {
  switch (command) {
    case Command::kSoliton: return cmd_soliton(config, verbose, log);
    case Command::kEvolve: return cmd_evolve(config, verbose, log);
    case Command::kBranch: return cmd_branch(config, verbose, log);
    case Command::kNonrel: return cmd_nonrel(config, verbose, log);
    case Command::kResolventCheck: return cmd_resolvent(config, verbose, log);
  }
  return kExitConfig;
}

int execute(Command command, const RunConfig& config, bool verbose, std::ostream& err) {
  try {
    validate(config, command);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  std::error_code ec;
  fs::create_directories(config.out_dir, ec);
  if (ec) {
    err << "cannot create output directory " << config.out_dir << ": " << ec.message() << '\n';
    return kExitConfig;
  }
  try {
    return run_command(command, config, verbose, err);
  } catch (const ParameterError& e) {
    err << "parameter error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "solver error: " << e.what() << '\n';
    return kExitSolver;
  }
}

}  // namespace nldg::cli
