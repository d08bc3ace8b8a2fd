#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "nldg/evolution.hpp"
#include "nldg/grid.hpp"
#include "nldg/operators.hpp"
#include "nldg/resolvent.hpp"

namespace nldg::cli {

/// Invalid or inconsistent configuration (exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Command { kSoliton, kEvolve, kBranch, kNonrel, kResolventCheck };

struct GraphConfig {
  int N = 3;
  double truncation_length = 30.0;
  double h = 0.05;
  FarEnd far_end = FarEnd::kHardWall;
};

enum class InitialData { kZero, kSoliton, kGaussian, kStandingWave };

struct EvolveConfig {
  EvolutionConfig integrator;
  InitialData initial = InitialData::kStandingWave;
  double amplitude = 1.0;     ///< soliton / gaussian scale
  double width = 1.0;         ///< gaussian width
  double eps = 0.05;          ///< standing wave: m - omega
  double eps_step = 0.01;     ///< standing wave: continuation step
  int snapshot_every = 0;     ///< write a snapshot every k records (0: first and last only)
  bool duhamel = false;       ///< add the duhamel_residual column (needs output_every = 1)
};

struct BranchConfig {
  double shift = 0.0;
  double eps_max = 0.1;
  double eps_step = 0.01;
  double min_step = 1e-4;
  double newton_tol = 1e-10;
  int newton_max_iter = 25;
  bool singular_values = true;
  int profile_every = 5;  ///< profile snapshot every k branch points (0: first and last only)
};

struct NonrelConfig {
  std::vector<double> c_list{1.0, 2.0, 4.0, 8.0, 16.0};
  cplx k{0.0, 1.0};
  double propagator_t = 0.5;  ///< 0 disables the propagator check
  double propagator_dt = 1e-3;
};

struct ResolventConfig {
  cplx k{1.0, 0.5};
  cplx resdecomp_k{0.0, 1.0};
  double tolerance = 1e-3;
  double identity_tolerance = 1e-3;
  double resdecomp_tolerance = 1e-6;
  int samples = 4;
  KernelOptions kernel;
};

struct RunConfig {
  GraphConfig graph;
  PhysParams physics{0.5, 1.0, 4.0};
  double soliton_shift = 0.0;
  EvolveConfig evolve;
  BranchConfig branch;
  NonrelConfig nonrel;
  ResolventConfig resolvent;
  std::string out_dir = "out";
  std::uint64_t rng_seed = 1;
};

/// Parses TOML text. Unknown tables or keys and wrongly typed values are
/// rejected with ConfigError.
RunConfig parse_config(const std::string& text, const std::string& source = "<string>");
RunConfig load_config(const std::string& path);

/// Re-checks every constraint the given command relies on. Throws ConfigError.
void validate(const RunConfig& config, Command command);

Command parse_command(const std::string& verb);
const char* command_name(Command c);

}  // namespace nldg::cli
