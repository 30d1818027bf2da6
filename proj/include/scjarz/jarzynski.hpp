#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "scjarz/errors.hpp"
#include "scjarz/pseudo_work.hpp"

namespace scjarz {

enum class QuadratureRule { GaussLegendre, Trapezoid };

std::string_view to_string(QuadratureRule rule) noexcept;
QuadratureRule quadrature_rule_from_string(std::string_view name);

// Box [-p_max, p_max] x [-q_max, q_max] with a tensor-product rule.
struct QuadratureDomain {
  double p_max = 8.0;
  double q_max = 8.0;
  int n_p = 48;
  int n_q = 48;
  QuadratureRule rule = QuadratureRule::GaussLegendre;

  void validate() const;
};

struct QuadratureNodes {
  std::vector<double> p, q;    // abscissae per axis
  std::vector<double> wp, wq;  // weights per axis

  std::size_t size() const { return p.size() * q.size(); }
};

QuadratureNodes make_nodes(const QuadratureDomain& domain);

// Boltzmann factors at the domain edges must be this small relative to the peak.
inline constexpr double kEdgeWeightLimit = 1e-10;

// Relative Boltzmann weight treated as outside the thermal support, matching
// the truncation the edge criterion already accepts. Such nodes take the endpoint
// pseudo-work instead of the path integral, and are dropped (counted as
// truncated) when no stationary point exists there.
inline constexpr double kNegligibleWeight = kEdgeWeightLimit;

struct NodeFailure {
  double p = 0.0;
  double q = 0.0;
  ErrorKind kind = ErrorKind::NewtonDiverged;
  std::string message;
};

struct PartitionResult {
  double Z = 0.0;
  double edge_ratio = 0.0;  // max edge weight / peak weight
  std::size_t nodes = 0;
  std::size_t truncated = 0;  // negligible-weight nodes without a stationary point
  std::vector<NodeFailure> failures;
};

// Z_sc(t) = integral of exp(-beta G_t) dp dq. Failed nodes are excluded and
// listed; `partition` throws when any node failed.
PartitionResult partition_detailed(const HamiltonianModel& model, double t, double beta,
                                   double hbar, const QuadratureDomain& domain,
                                   const IntegratorSettings& settings,
                                   bool with_prefactor = false);
double partition(const HamiltonianModel& model, double t, double beta, double hbar,
                 const QuadratureDomain& domain, const IntegratorSettings& settings);

// Same integral with the propagated pseudo-energy G_{t_f}^{(t_i)}.
PartitionResult propagated_partition_detailed(const HamiltonianModel& model, double t_i,
                                              double t_f, double beta, double hbar,
                                              const QuadratureDomain& domain,
                                              const IntegratorSettings& settings);
double propagated_partition(const HamiltonianModel& model, double t_i, double t_f, double beta,
                            double hbar, const QuadratureDomain& domain,
                            const IntegratorSettings& settings);

// Propagated pseudo-energy at a single point (direct solve at t_f).
double propagated_pseudo_energy(const HamiltonianModel& model, double t_i, double t_f,
                                RealPoint target, double hbar_beta,
                                const IntegratorSettings& settings);

struct JarzynskiOptions {
  bool prefactor = false;
  bool monte_carlo = false;
  std::size_t samples = 1000;
  std::uint64_t seed = 1;
  double failure_budget = 0.01;  // abort when more than this fraction of nodes fail
};

struct PrefactorRatio {
  double Z_i = 0.0;
  double Z_f = 0.0;
  double ratio = 0.0;
};

struct MonteCarloEstimate {
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::size_t proposals = 0;
  double lhs = 0.0;
  double std_error = 0.0;
};

struct JarzynskiReport {
  double Z_i = 0.0;
  double Z_f = 0.0;  // propagated partition over the protocol
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
  std::size_t nodes = 0;
  std::size_t path_nodes = 0;  // nodes whose pseudo-work was path-integrated
  std::size_t truncated_nodes = 0;
  double max_work_mismatch = 0.0;
  double edge_ratio = 0.0;
  std::optional<PrefactorRatio> prefactor_on;
  std::optional<MonteCarloEstimate> monte_carlo;
  std::vector<NodeFailure> failures;
};

// Thermal average of exp(-beta W) over initial conditions against
// Z_sc(t_f) / Z_sc(t_i), over the model's full protocol span.
JarzynskiReport verify_identity(const HamiltonianModel& model, double beta, double hbar,
                                const QuadratureDomain& domain,
                                const IntegratorSettings& settings,
                                const JarzynskiOptions& options = {});

}  // namespace scjarz
