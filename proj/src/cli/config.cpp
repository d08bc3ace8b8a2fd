#include "config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "nldg/errors.hpp"

namespace nldg::cli {

namespace {

/// Reads typed values from one table and remembers which keys were used.
class Section {
 public:
  Section(const toml::table* table, std::string name) : table_(table), name_(std::move(name)) {}

  double real(const char* key, double fallback) {
    const toml::node* n = find(key);
    if (!n) return fallback;
    if (auto v = n->value<double>()) return *v;
    fail(key, "a number");
  }
  int integer(const char* key, int fallback) {
    const toml::node* n = find(key);
    if (!n) return fallback;
    if (auto v = n->as_integer()) {
      const auto x = v->get();
      if (x < INT32_MIN || x > INT32_MAX) fail(key, "an integer in range");
      return static_cast<int>(x);
    }
    fail(key, "an integer");
  }
  std::uint64_t unsigned_integer(const char* key, std::uint64_t fallback) {
    const toml::node* n = find(key);
    if (!n) return fallback;
    if (auto v = n->as_integer(); v && v->get() >= 0) return static_cast<std::uint64_t>(v->get());
    fail(key, "a nonnegative integer");
  }
  bool boolean(const char* key, bool fallback) {
    const toml::node* n = find(key);
    if (!n) return fallback;
    if (auto v = n->as_boolean()) return v->get();
    fail(key, "a boolean");
  }
  std::string string(const char* key, const std::string& fallback) {
    const toml::node* n = find(key);
    if (!n) return fallback;
    if (auto v = n->as_string()) return v->get();
    fail(key, "a string");
  }
  std::vector<double> reals(const char* key, const std::vector<double>& fallback) {
    const toml::node* n = find(key);
    if (!n) return fallback;
    const toml::array* a = n->as_array();
    if (!a) fail(key, "an array of numbers");
    std::vector<double> out;
    for (const toml::node& item : *a) {
      auto v = item.value<double>();
      if (!v) fail(key, "an array of numbers");
      out.push_back(*v);
    }
    return out;
  }

  /// Every key in the table must have been read.
  void finish() const {
    if (!table_) return;
    for (const auto& [k, v] : *table_)
      if (!used_.count(std::string(k.str())))
        throw ConfigError("unknown key '" + std::string(k.str()) + "' in [" + name_ + "]");
  }

 private:
  const toml::node* find(const char* key) {
    used_.insert(key);
    return table_ ? table_->get(key) : nullptr;
  }
  [[noreturn]] void fail(const char* key, const char* what) const {
    throw ConfigError("[" + name_ + "] " + key + " must be " + what);
  }

  const toml::table* table_;
  std::string name_;
  std::set<std::string> used_;
};

const toml::table* subtable(const toml::table& root, const char* name) {
  const toml::node* n = root.get(name);
  if (!n) return nullptr;
  if (!n->is_table()) throw ConfigError(std::string("'") + name + "' must be a table");
  return n->as_table();
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& source) {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << "cannot parse " << source << ": " << e.description() << " (line "
       << e.source().begin.line << ")";
    throw ConfigError(os.str());
  }
  static const std::set<std::string> tables{"graph", "physics", "soliton", "evolution",
                                            "branch", "nonrel", "resolvent", "run"};
  for (const auto& [k, v] : root)
    if (!tables.count(std::string(k.str())))
      throw ConfigError("unknown table '" + std::string(k.str()) + "'");

  RunConfig c;
  {
    Section s(subtable(root, "graph"), "graph");
    c.graph.N = s.integer("N", c.graph.N);
    c.graph.truncation_length = s.real("truncation_length", c.graph.truncation_length);
    c.graph.h = s.real("h", c.graph.h);
    const std::string fe = s.string("far_end", "hard_wall");
    if (fe == "hard_wall") c.graph.far_end = FarEnd::kHardWall;
    else if (fe == "dirichlet") c.graph.far_end = FarEnd::kDirichlet;
    else throw ConfigError("[graph] far_end must be \"hard_wall\" or \"dirichlet\"");
    s.finish();
  }
  {
    Section s(subtable(root, "physics"), "physics");
    c.physics.m = s.real("m", c.physics.m);
    c.physics.c = s.real("c", c.physics.c);
    c.physics.p = s.real("p", c.physics.p);
    s.finish();
  }
  {
    Section s(subtable(root, "soliton"), "soliton");
    c.soliton_shift = s.real("shift", c.soliton_shift);
    s.finish();
  }
  {
    Section s(subtable(root, "evolution"), "evolution");
    EvolveConfig& e = c.evolve;
    e.integrator.dt = s.real("dt", e.integrator.dt);
    e.integrator.t_end = s.real("t_end", e.integrator.t_end);
    e.integrator.linear_solver_rtol = s.real("linear_solver_rtol", e.integrator.linear_solver_rtol);
    e.integrator.blowup_factor = s.real("blowup_factor", e.integrator.blowup_factor);
    e.integrator.output_every = s.integer("output_every", 100);
    const std::string sign = s.string("sign", "focusing");
    if (sign == "focusing") e.integrator.sign = NonlinearitySign::kFocusing;
    else if (sign == "defocusing") e.integrator.sign = NonlinearitySign::kDefocusing;
    else throw ConfigError("[evolution] sign must be \"focusing\" or \"defocusing\"");
    static const std::map<std::string, InitialData> kinds{
        {"zero", InitialData::kZero}, {"soliton", InitialData::kSoliton},
        {"gaussian", InitialData::kGaussian}, {"standing_wave", InitialData::kStandingWave}};
    const std::string init = s.string("initial", "standing_wave");
    if (!kinds.count(init))
      throw ConfigError("[evolution] initial must be zero, soliton, gaussian or standing_wave");
    e.initial = kinds.at(init);
    e.amplitude = s.real("amplitude", e.amplitude);
    e.width = s.real("width", e.width);
    e.eps = s.real("eps", e.eps);
    e.eps_step = s.real("eps_step", e.eps_step);
    e.snapshot_every = s.integer("snapshot_every", e.snapshot_every);
    e.duhamel = s.boolean("duhamel", e.duhamel);
    s.finish();
  }
  {
    Section s(subtable(root, "branch"), "branch");
    BranchConfig& b = c.branch;
    b.eps_max = s.real("eps_max", b.eps_max);
    b.eps_step = s.real("eps_step", b.eps_step);
    b.min_step = s.real("min_step", b.min_step);
    b.newton_tol = s.real("newton_tol", b.newton_tol);
    b.newton_max_iter = s.integer("newton_max_iter", b.newton_max_iter);
    b.singular_values = s.boolean("singular_values", b.singular_values);
    b.profile_every = s.integer("profile_every", b.profile_every);
    s.finish();
  }
  {
    Section s(subtable(root, "nonrel"), "nonrel");
    NonrelConfig& n = c.nonrel;
    n.c_list = s.reals("c_list", n.c_list);
    n.k = {s.real("k_re", n.k.real()), s.real("k_im", n.k.imag())};
    n.propagator_t = s.real("propagator_t", n.propagator_t);
    n.propagator_dt = s.real("propagator_dt", n.propagator_dt);
    s.finish();
  }
  {
    Section s(subtable(root, "resolvent"), "resolvent");
    ResolventConfig& r = c.resolvent;
    r.k = {s.real("k_re", r.k.real()), s.real("k_im", r.k.imag())};
    r.resdecomp_k = {s.real("resdecomp_k_re", r.resdecomp_k.real()),
                     s.real("resdecomp_k_im", r.resdecomp_k.imag())};
    r.tolerance = s.real("tolerance", r.tolerance);
    r.identity_tolerance = s.real("identity_tolerance", r.identity_tolerance);
    r.resdecomp_tolerance = s.real("resdecomp_tolerance", r.resdecomp_tolerance);
    r.samples = s.integer("samples", r.samples);
    const std::string form = s.string("kernel_form", "derived");
    if (form == "derived") r.kernel.form = KernelForm::kDerived;
    else if (form == "three_matrix") r.kernel.form = KernelForm::kThreeMatrix;
    else throw ConfigError("[resolvent] kernel_form must be \"derived\" or \"three_matrix\"");
    r.kernel.correction_scale = s.real("debug_correction_scale", 1.0);
    s.finish();
  }
  {
    Section s(subtable(root, "run"), "run");
    c.out_dir = s.string("out_dir", c.out_dir);
    c.rng_seed = s.unsigned_integer("rng_seed", c.rng_seed);
    s.finish();
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

bool finite_positive(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

void validate(const RunConfig& c, Command command) {
  require(c.graph.N >= 2, "[graph] N must be at least 2");
  require(finite_positive(c.graph.truncation_length), "[graph] truncation_length must be positive");
  require(finite_positive(c.graph.h), "[graph] h must be positive");
  require(std::lround(c.graph.truncation_length / c.graph.h) >= 4,
          "[graph] truncation_length / h must give at least 4 cells");
  try {
    c.physics.validate();
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("[physics] ") + e.what());
  }
  require(!c.out_dir.empty(), "[run] out_dir must not be empty");

  auto need_c1 = [&](const char* what) {
    require(c.physics.c == 1.0, std::string(what) + " requires [physics] c = 1");
  };

  switch (command) {
    case Command::kSoliton:
      require(c.soliton_shift >= 0.0, "[soliton] shift must be nonnegative");
      require(c.graph.N % 2 == 0 || c.soliton_shift == 0.0,
              "[soliton] shift must be 0 for odd N (the positive solution is unique)");
      break;
    case Command::kEvolve: {
      const EvolveConfig& e = c.evolve;
      try {
        e.integrator.validate();
      } catch (const ParameterError& err) {
        throw ConfigError(std::string("[evolution] ") + err.what());
      }
      require(std::isfinite(e.amplitude), "[evolution] amplitude must be finite");
      require(finite_positive(e.width), "[evolution] width must be positive");
      require(e.snapshot_every >= 0, "[evolution] snapshot_every must be >= 0");
      require(!e.duhamel || e.integrator.output_every == 1,
              "[evolution] duhamel = true requires output_every = 1");
      if (e.initial == InitialData::kSoliton)
        require(c.graph.N % 2 == 0 || c.soliton_shift == 0.0, "[soliton] shift must be 0 for odd N");
      if (e.initial == InitialData::kStandingWave) {
        need_c1("a standing-wave initial state");
        require(finite_positive(e.eps), "[evolution] eps must be positive for a standing wave");
        require(finite_positive(e.eps_step), "[evolution] eps_step must be positive");
        require(c.graph.N % 2 == 0 || c.soliton_shift == 0.0, "[soliton] shift must be 0 for odd N");
        require(std::lround(c.graph.truncation_length / c.graph.h) >= 4,
                "[graph] too few cells for the standing wave");
      }
      break;
    }
    case Command::kBranch: {
      const BranchConfig& b = c.branch;
      require(std::isfinite(b.eps_max), "[branch] eps_max must be finite");
      require(finite_positive(b.eps_step), "[branch] eps_step must be positive");
      require(finite_positive(b.min_step) && b.min_step <= b.eps_step,
              "[branch] min_step must be positive and at most eps_step");
      require(finite_positive(b.newton_tol), "[branch] newton_tol must be positive");
      require(b.newton_max_iter >= 1, "[branch] newton_max_iter must be >= 1");
      require(b.profile_every >= 0, "[branch] profile_every must be >= 0");
      require(c.graph.N % 2 == 0 || c.soliton_shift == 0.0, "[soliton] shift must be 0 for odd N");
      require(c.soliton_shift >= 0.0, "[soliton] shift must be nonnegative");
      need_c1("branch");
      break;
    }
    case Command::kNonrel: {
      const NonrelConfig& n = c.nonrel;
      require(n.c_list.size() >= 4, "[nonrel] c_list needs at least 4 values");
      for (std::size_t i = 0; i < n.c_list.size(); ++i) {
        require(finite_positive(n.c_list[i]), "[nonrel] c_list values must be positive");
        require(i == 0 || n.c_list[i] > n.c_list[i - 1], "[nonrel] c_list must be increasing");
      }
      require(std::isfinite(n.k.real()) && std::isfinite(n.k.imag()) && n.k.imag() != 0.0,
              "[nonrel] k must be finite and off the real axis");
      require(std::isfinite(n.propagator_t) && n.propagator_t >= 0.0,
              "[nonrel] propagator_t must be >= 0");
      require(finite_positive(n.propagator_dt), "[nonrel] propagator_dt must be positive");
      break;
    }
    case Command::kResolventCheck: {
      const ResolventConfig& r = c.resolvent;
      require(c.graph.N == 3, "resolvent-check requires [graph] N = 3");
      need_c1("resolvent-check");
      try {
        make_query(r.k, c.physics.m);
      } catch (const ParameterError& e) {
        throw ConfigError(std::string("[resolvent] k: ") + e.what());
      }
      require(r.resdecomp_k.imag() != 0.0, "[resolvent] resdecomp_k must be off the real axis");
      require(finite_positive(r.tolerance) && finite_positive(r.identity_tolerance) &&
                  finite_positive(r.resdecomp_tolerance),
              "[resolvent] tolerances must be positive");
      require(r.samples >= 1, "[resolvent] samples must be >= 1");
      require(std::isfinite(r.kernel.correction_scale),
              "[resolvent] debug_correction_scale must be finite");
      break;
    }
  }
}

Command parse_command(const std::string& verb) {
  if (verb == "soliton") return Command::kSoliton;
  if (verb == "evolve") return Command::kEvolve;
  if (verb == "branch") return Command::kBranch;
  if (verb == "nonrel") return Command::kNonrel;
  if (verb == "resolvent-check") return Command::kResolventCheck;
  throw ConfigError("unknown command '" + verb + "'");
}

const char* command_name(Command c) {
  switch (c) {
    case Command::kSoliton: return "soliton";
    case Command::kEvolve: return "evolve";
    case Command::kBranch: return "branch";
    case Command::kNonrel: return "nonrel";
    case Command::kResolventCheck: return "resolvent-check";
  }
  return "";
}

}  // namespace nldg::cli
