#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "scjarz/jarzynski.hpp"
#include "scjarz/quantum_oracle.hpp"

namespace scjarz {

inline constexpr int kSchemaVersion = 1;

enum class Command { Gibbs, Work, Jarzynski, Oracle };

std::string_view to_string(Command command) noexcept;
Command command_from_string(std::string_view name);

struct ModelSection {
  ModelKind kind = ModelKind::Harmonic;
  double m = 1.0;
  double lambda = 0.0;
  double omega_i = 1.0;
  double omega_f = 2.0;
  double t_i = 0.0;
  double t_f = 1.0;
  ProtocolShape shape = ProtocolShape::Linear;
};

struct PhysicsSection {
  double beta = 1.0;
  double hbar = 1.0;
};

struct NumericsSection {
  IntegratorSettings integrator;
  QuadratureDomain domain{8.0, 8.0, 48, 48, QuadratureRule::GaussLegendre};
  int n_max = 48;
  WignerGridSpec wigner{512, 16.0};
  double residual_threshold = 1e-6;
  double failure_budget = 0.01;
};

// Uniform inclusive grid for the gibbs scan, evaluated at frozen time t.
struct GridSection {
  double p_min = -2.0, p_max = 2.0;
  double q_min = -2.0, q_max = 2.0;
  int n_p = 21;
  int n_q = 21;
  double t = 0.0;
};

struct OracleSection {
  double t = 0.0;
  double window = 3.0;  // comparison box |p|, |q| <= window
  int samples = 41;     // per axis
  bool export_wigner = true;
};

struct RunSection {
  Command command = Command::Jarzynski;
  std::string out = ".";
  std::uint64_t seed = 1;
  bool prefactor = false;
  bool monte_carlo = false;
  std::size_t samples = 1000;
  int threads = 1;
  double p0 = 0.0;  // work: initial point
  double q0 = 1.0;
};

struct RunConfig {
  int schema_version = kSchemaVersion;
  ModelSection model;
  PhysicsSection physics;
  NumericsSection numerics;
  GridSection grid;
  OracleSection oracle;
  RunSection run;

  // Throws Validation naming the offending field as section.key.
  void validate() const;

  HamiltonianModel make_model() const;

  // Canonical form: every field, fixed order, 17 significant digits.
  std::string to_ini() const;
  // SHA-256 of the canonical form, lowercase hex.
  std::string hash() const;
};

RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace scjarz
