#include "scjarz/jarzynski.hpp"

#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <random>
#include <sstream>

#include "scjarz/parallel.hpp"

namespace scjarz {

namespace {

struct GridPoint {
  std::size_t index;
  RealPoint z;
  double weight;
};

std::vector<GridPoint> tensor_points(const QuadratureNodes& nodes) {
  std::vector<GridPoint> out;
  out.reserve(nodes.size());
  for (std::size_t i = 0; i < nodes.p.size(); ++i) {
    for (std::size_t j = 0; j < nodes.q.size(); ++j) {
      out.push_back({out.size(), {nodes.p[i], nodes.q[j]}, nodes.wp[i] * nodes.wq[j]});
    }
  }
  return out;
}

NodeFailure to_failure(RealPoint z, const NumericalError& e) {
  return {z.p, z.q, e.kind(), e.what()};
}

// Evaluates fn at every grid point; failures are captured per point.
template <class Value, class Fn>
void evaluate_points(const std::vector<GridPoint>& points, int threads, Fn&& fn,
                     std::vector<std::optional<Value>>& values,
                     std::vector<std::optional<NodeFailure>>& failures) {
  values.assign(points.size(), std::nullopt);
  failures.assign(points.size(), std::nullopt);
  parallel_for(points.size(), threads, [&](std::size_t k) {
    try {
      values[k] = fn(points[k].z);
    } catch (const NumericalError& e) {
      failures[k] = to_failure(points[k].z, e);
    }
  });
}

std::vector<NodeFailure> collect(const std::vector<std::optional<NodeFailure>>& failures) {
  std::vector<NodeFailure> out;
  for (const auto& f : failures) {
    if (f) out.push_back(*f);
  }
  return out;
}

// Largest Boltzmann weight on the four edge midpoints relative to the peak.
double edge_ratio(const QuadratureDomain& domain, double beta, double G_min,
                  const std::function<double(RealPoint)>& energy,
                  std::vector<NodeFailure>& failures) {
  const RealPoint edges[] = {
      {domain.p_max, 0.0}, {-domain.p_max, 0.0}, {0.0, domain.q_max}, {0.0, -domain.q_max}};
  double worst = 0.0;
  for (const auto& z : edges) {
    try {
      worst = std::max(worst, std::exp(-beta * (energy(z) - G_min)));
    } catch (const NumericalError& e) {
      failures.push_back(to_failure(z, e));
    }
  }
  return worst;
}

void require_edges(double ratio, const char* what) {
  if (ratio > kEdgeWeightLimit) {
    std::ostringstream os;
    os << what << ": edge Boltzmann weight ratio " << ratio << " exceeds " << kEdgeWeightLimit
       << "; enlarge p_max / q_max";
    throw NumericalError(ErrorKind::DomainTooSmall, os.str());
  }
}

void require_no_failures(const std::vector<NodeFailure>& failures, std::size_t nodes,
                         const char* what) {
  if (failures.empty()) return;
  std::ostringstream os;
  os << what << ": " << failures.size() << " of " << nodes << " nodes failed; first at ("
     << failures.front().p << ", " << failures.front().q << "): " << failures.front().message;
  throw NumericalError(failures.front().kind, os.str());
}

double weighted_sum(const std::vector<GridPoint>& points,
                    const std::vector<std::optional<double>>& integrand) {
  std::vector<double> terms(points.size(), 0.0);
  for (std::size_t k = 0; k < points.size(); ++k) {
    if (integrand[k]) terms[k] = points[k].weight * *integrand[k];
  }
  return pairwise_sum(terms);
}

// Classical Boltzmann weight relative to the grid peak, used to decide
// whether a node without a stationary point may be dropped.
std::vector<double> classical_weights(const std::vector<GridPoint>& points, double beta,
                                      const std::function<double(RealPoint)>& energy) {
  std::vector<double> H(points.size());
  for (std::size_t k = 0; k < points.size(); ++k) H[k] = energy(points[k].z);
  const double H_min = *std::min_element(H.begin(), H.end());
  for (double& h : H) h = std::exp(-beta * (h - H_min));
  return H;
}

// Failures at nodes whose classical weight is negligible are truncation, not
// error: the stationary point ceases to exist past a caustic at high energy.
std::size_t drop_negligible_failures(std::vector<std::optional<NodeFailure>>& failures,
                                     const std::vector<double>& weight) {
  std::size_t dropped = 0;
  for (std::size_t k = 0; k < failures.size(); ++k) {
    if (failures[k] && failures[k]->kind != ErrorKind::Validation &&
        weight[k] < kNegligibleWeight) {
      failures[k].reset();
      ++dropped;
    }
  }
  return dropped;
}

double min_value(const std::vector<std::optional<double>>& values) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& v : values) {
    if (v) m = std::min(m, *v);
  }
  return m;
}

PartitionResult integrate_energy(const QuadratureDomain& domain, double beta,
                                 const IntegratorSettings& settings,
                                 const std::function<double(RealPoint)>& energy,
                                 const std::function<double(RealPoint)>& weight_factor,
                                 const std::function<double(RealPoint)>& classical_energy) {
  domain.validate();
  const auto points = tensor_points(make_nodes(domain));
  std::vector<std::optional<std::pair<double, double>>> values;
  std::vector<std::optional<NodeFailure>> node_failures;
  evaluate_points<std::pair<double, double>>(
      points, settings.threads,
      [&](RealPoint z) {
        return std::pair{energy(z), weight_factor ? weight_factor(z) : 1.0};
      },
      values, node_failures);
  const std::size_t truncated =
      drop_negligible_failures(node_failures, classical_weights(points, beta, classical_energy));

  std::vector<std::optional<double>> G(points.size());
  for (std::size_t k = 0; k < points.size(); ++k) {
    if (values[k]) G[k] = values[k]->first;
  }
  const double G_min = min_value(G);
  std::vector<std::optional<double>> integrand(points.size());
  for (std::size_t k = 0; k < points.size(); ++k) {
    if (values[k]) integrand[k] = values[k]->second * std::exp(-beta * (values[k]->first - G_min));
  }

  PartitionResult out;
  out.nodes = points.size();
  out.truncated = truncated;
  out.failures = collect(node_failures);
  out.Z = std::exp(-beta * G_min) * weighted_sum(points, integrand);
  out.edge_ratio = edge_ratio(domain, beta, G_min, energy, out.failures);
  return out;
}

}  // namespace

std::string_view to_string(QuadratureRule rule) noexcept {
  return rule == QuadratureRule::GaussLegendre ? "gauss-legendre" : "trapezoid";
}

QuadratureRule quadrature_rule_from_string(std::string_view name) {
  if (name == "gauss-legendre") return QuadratureRule::GaussLegendre;
  if (name == "trapezoid") return QuadratureRule::Trapezoid;
  throw NumericalError(ErrorKind::Validation, "unknown quadrature rule '" + std::string(name) + "'");
}

void QuadratureDomain::validate() const {
  auto fail = [](const char* field, const char* msg) {
    throw NumericalError(ErrorKind::Validation, std::string(field) + ": " + msg);
  };
  if (!(p_max > 0.0)) fail("numerics.p_max", "must be > 0");
  if (!(q_max > 0.0)) fail("numerics.q_max", "must be > 0");
  if (n_p < 2) fail("numerics.n_p", "must be >= 2");
  if (n_q < 2) fail("numerics.n_q", "must be >= 2");
}

QuadratureNodes make_nodes(const QuadratureDomain& domain) {
  domain.validate();
  auto axis = [&](double half_width, int n, std::vector<double>& x, std::vector<double>& w) {
    x.resize(n);
    w.resize(n);
    if (domain.rule == QuadratureRule::GaussLegendre) {
      std::unique_ptr<gsl_integration_glfixed_table, decltype(&gsl_integration_glfixed_table_free)>
          table(gsl_integration_glfixed_table_alloc(n), &gsl_integration_glfixed_table_free);
      for (int i = 0; i < n; ++i) {
        gsl_integration_glfixed_point(-half_width, half_width, i, &x[i], &w[i], table.get());
      }
    } else {
      const double h = 2.0 * half_width / (n - 1);
      for (int i = 0; i < n; ++i) {
        x[i] = -half_width + i * h;
        w[i] = (i == 0 || i == n - 1) ? 0.5 * h : h;
      }
    }
  };
  QuadratureNodes nodes;
  axis(domain.p_max, domain.n_p, nodes.p, nodes.wp);
  axis(domain.q_max, domain.n_q, nodes.q, nodes.wq);
  return nodes;
}

PartitionResult partition_detailed(const HamiltonianModel& model, double t, double beta,
                                   double hbar, const QuadratureDomain& domain,
                                   const IntegratorSettings& settings, bool with_prefactor) {
  std::function<double(RealPoint)> factor;
  if (with_prefactor) {
    factor = [&](RealPoint z) {
      return *pseudo_hamiltonian(model, t, z, beta, hbar, settings, true).prefactor;
    };
  }
  return integrate_energy(
      domain, beta, settings,
      [&](RealPoint z) { return pseudo_hamiltonian(model, t, z, beta, hbar, settings).G; },
      factor, [&](RealPoint z) { return model.eval(t, z.complex()).real(); });
}

double partition(const HamiltonianModel& model, double t, double beta, double hbar,
                 const QuadratureDomain& domain, const IntegratorSettings& settings) {
  const PartitionResult r = partition_detailed(model, t, beta, hbar, domain, settings);
  require_no_failures(r.failures, r.nodes, "partition");
  require_edges(r.edge_ratio, "partition");
  return r.Z;
}

double propagated_pseudo_energy(const HamiltonianModel& model, double t_i, double t_f,
                                RealPoint target, double hbar_beta,
                                const IntegratorSettings& settings) {
  const PseudoState state = solve_pseudo_state(model, t_i, t_f, target, hbar_beta, settings);
  return propagated_energy(model, t_i, state, settings).G;
}

namespace {

// Energy at t_f of the classical trajectory started at z at t_i; proxy for
// the propagated pseudo-energy.
double forward_classical_energy(const HamiltonianModel& model, double t_i, double t_f,
                                RealPoint z, const IntegratorSettings& settings) {
  try {
    const ComplexPoint end = flow_real(model, t_i, t_f, z.complex(), settings);
    return model.eval(t_f, end).real();
  } catch (const NumericalError&) {
    return std::numeric_limits<double>::infinity();
  }
}

}  // namespace

PartitionResult propagated_partition_detailed(const HamiltonianModel& model, double t_i,
                                              double t_f, double beta, double hbar,
                                              const QuadratureDomain& domain,
                                              const IntegratorSettings& settings) {
  return integrate_energy(
      domain, beta, settings,
      [&](RealPoint z) {
        return propagated_pseudo_energy(model, t_i, t_f, z, hbar * beta, settings);
      },
      {}, [&](RealPoint z) { return forward_classical_energy(model, t_i, t_f, z, settings); });
}

double propagated_partition(const HamiltonianModel& model, double t_i, double t_f, double beta,
                            double hbar, const QuadratureDomain& domain,
                            const IntegratorSettings& settings) {
  const PartitionResult r =
      propagated_partition_detailed(model, t_i, t_f, beta, hbar, domain, settings);
  require_no_failures(r.failures, r.nodes, "propagated_partition");
  require_edges(r.edge_ratio, "propagated_partition");
  return r.Z;
}

namespace {

struct IdentityNode {
  double G_initial = 0.0;
  double G_propagated = 0.0;
  double W = 0.0;
  double mismatch = 0.0;
  double prefactor_initial = 0.0;
  double G_final_direct = 0.0;
  double prefactor_final = 0.0;
  bool path_integrated = false;
};

MonteCarloEstimate monte_carlo_lhs(const HamiltonianModel& model, double beta, double hbar,
                                   const QuadratureDomain& domain,
                                   const IntegratorSettings& settings,
                                   const JarzynskiOptions& options, double G_min) {
  const double t_i = model.protocol().t_i();
  const double t_f = model.protocol().t_f();
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> up(-domain.p_max, domain.p_max);
  std::uniform_real_distribution<double> uq(-domain.q_max, domain.q_max);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  MonteCarloEstimate mc;
  mc.samples = options.samples;
  mc.seed = options.seed;
  std::vector<double> values;
  values.reserve(options.samples);
  const std::size_t max_proposals = 10000 * std::max<std::size_t>(options.samples, 1);
  while (values.size() < options.samples) {
    if (++mc.proposals > max_proposals) {
      throw NumericalError(ErrorKind::NewtonDiverged, "monte carlo: acceptance rate too low");
    }
    const RealPoint z{up(rng), uq(rng)};
    const double u = u01(rng);
    try {
      const double G = pseudo_hamiltonian(model, t_i, z, beta, hbar, settings).G;
      if (u >= std::exp(-beta * (G - G_min))) continue;
      const WorkResult w = pseudo_work(model, t_i, t_f, z, hbar * beta, settings, false);
      values.push_back(std::exp(-beta * w.W));
    } catch (const NumericalError&) {
      continue;
    }
  }
  const double n = static_cast<double>(values.size());
  mc.lhs = pairwise_sum(values) / n;
  std::vector<double> sq(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) sq[k] = (values[k] - mc.lhs) * (values[k] - mc.lhs);
  mc.std_error = n > 1 ? std::sqrt(pairwise_sum(sq) / (n - 1) / n) : 0.0;
  return mc;
}

}  // namespace

JarzynskiReport verify_identity(const HamiltonianModel& model, double beta, double hbar,
                                const QuadratureDomain& domain,
                                const IntegratorSettings& settings,
                                const JarzynskiOptions& options) {
  settings.validate();
  domain.validate();
  const double t_i = model.protocol().t_i();
  const double t_f = model.protocol().t_f();
  const double hb = hbar * beta;
  const auto points = tensor_points(make_nodes(domain));

  std::size_t truncated = 0;

  // Pass 1: initial and propagated pseudo-energies by direct solves.
  std::vector<std::optional<IdentityNode>> values;
  std::vector<std::optional<NodeFailure>> node_failures;
  evaluate_points<IdentityNode>(
      points, settings.threads,
      [&](RealPoint z) {
        IdentityNode node;
        const auto initial = pseudo_hamiltonian(model, t_i, z, beta, hbar, settings,
                                                options.prefactor);
        node.G_initial = initial.G;
        try {
          node.G_propagated = propagated_pseudo_energy(model, t_i, t_f, z, hb, settings);
          node.W = node.G_propagated - node.G_initial;
        } catch (const NumericalError&) {
          // Continuation in time is more robust than a cold solve at t_f.
          const WorkResult w = pseudo_work(model, t_i, t_f, z, hb, settings, false);
          node.G_propagated = w.G_propagated;
          node.W = w.W;
          node.mismatch = w.mismatch();
          node.path_integrated = true;
        }
        if (options.prefactor) {
          node.prefactor_initial = *initial.prefactor;
          const auto final_value = pseudo_hamiltonian(model, t_f, z, beta, hbar, settings, true);
          node.G_final_direct = final_value.G;
          node.prefactor_final = *final_value.prefactor;
        }
        return node;
      },
      values, node_failures);
  {
    const auto w_i = classical_weights(
        points, beta, [&](RealPoint z) { return model.eval(t_i, z.complex()).real(); });
    const auto w_f = classical_weights(points, beta, [&](RealPoint z) {
      return forward_classical_energy(model, t_i, t_f, z, settings);
    });
    std::vector<double> w(points.size());
    for (std::size_t k = 0; k < w.size(); ++k) w[k] = std::max(w_i[k], w_f[k]);
    truncated = drop_negligible_failures(node_failures, w);
  }

  double G_ref = std::numeric_limits<double>::infinity();
  for (const auto& v : values) {
    if (v) G_ref = std::min({G_ref, v->G_initial, v->G_propagated});
  }

  // Pass 2: path-integrated pseudo-work wherever either Boltzmann weight matters.
  std::vector<std::size_t> relevant;
  for (std::size_t k = 0; k < points.size(); ++k) {
    if (!values[k]) continue;
    const double w = std::max(std::exp(-beta * (values[k]->G_initial - G_ref)),
                              std::exp(-beta * (values[k]->G_propagated - G_ref)));
    if (values[k]->path_integrated) {
      if (w >= kNegligibleWeight &&
          values[k]->mismatch > settings.work_tol * (1.0 + std::abs(values[k]->W))) {
        std::ostringstream os;
        os << "path/endpoint work mismatch " << values[k]->mismatch;
        node_failures[k] = NodeFailure{points[k].z.p, points[k].z.q, ErrorKind::WorkMismatch,
                                       os.str()};
        values[k].reset();
      }
      continue;
    }
    if (w >= kNegligibleWeight) relevant.push_back(k);
  }
  parallel_for(relevant.size(), settings.threads, [&](std::size_t r) {
    const std::size_t k = relevant[r];
    try {
      const WorkResult w = pseudo_work(model, t_i, t_f, points[k].z, hb, settings, false);
      if (w.mismatch() > settings.work_tol * (1.0 + std::abs(w.W))) {
        std::ostringstream os;
        os << "path/endpoint work mismatch " << w.mismatch();
        throw NumericalError(ErrorKind::WorkMismatch, os.str());
      }
      values[k]->G_initial = w.G_initial;
      values[k]->G_propagated = w.G_propagated;
      values[k]->W = w.W;
      values[k]->mismatch = w.mismatch();
      values[k]->path_integrated = true;
    } catch (const NumericalError& e) {
      node_failures[k] = to_failure(points[k].z, e);
      values[k].reset();
    }
  });

  JarzynskiReport report;
  report.nodes = points.size();
  report.truncated_nodes = truncated;
  for (const auto& v : values) {
    if (v && v->path_integrated) ++report.path_nodes;
  }
  report.failures = collect(node_failures);
  if (static_cast<double>(report.failures.size()) >
      options.failure_budget * static_cast<double>(points.size())) {
    std::ostringstream os;
    os << "verify_identity: " << report.failures.size() << " of " << points.size()
       << " nodes failed (budget " << options.failure_budget * 100 << "%); first at ("
       << report.failures.front().p << ", " << report.failures.front().q
       << "): " << report.failures.front().message;
    throw NumericalError(report.failures.front().kind, os.str());
  }

  std::vector<std::optional<double>> initial(points.size()), final_prop(points.size()),
      weighted(points.size());
  for (std::size_t k = 0; k < points.size(); ++k) {
    if (!values[k]) continue;
    const IdentityNode& v = *values[k];
    initial[k] = std::exp(-beta * (v.G_initial - G_ref));
    final_prop[k] = std::exp(-beta * (v.G_propagated - G_ref));
    weighted[k] = std::exp(-beta * (v.G_initial + v.W - G_ref));
    report.max_work_mismatch = std::max(report.max_work_mismatch, v.mismatch);
  }
  const double scale = std::exp(-beta * G_ref);
  const double zi = weighted_sum(points, initial);
  report.Z_i = scale * zi;
  report.Z_f = scale * weighted_sum(points, final_prop);
  report.lhs = weighted_sum(points, weighted) / zi;
  report.rhs = report.Z_f / report.Z_i;
  report.residual = std::abs(report.lhs - report.rhs) / report.rhs;

  std::vector<NodeFailure> edge_failures;
  const double ratio_i = edge_ratio(
      domain, beta, G_ref,
      [&](RealPoint z) { return pseudo_hamiltonian(model, t_i, z, beta, hbar, settings).G; },
      edge_failures);
  const double ratio_f = edge_ratio(
      domain, beta, G_ref,
      [&](RealPoint z) { return propagated_pseudo_energy(model, t_i, t_f, z, hb, settings); },
      edge_failures);
  report.edge_ratio = std::max(ratio_i, ratio_f);
  report.failures.insert(report.failures.end(), edge_failures.begin(), edge_failures.end());
  require_edges(report.edge_ratio, "verify_identity");

  if (options.prefactor) {
    std::vector<std::optional<double>> with_n_i(points.size()), with_n_f(points.size());
    for (std::size_t k = 0; k < points.size(); ++k) {
      if (!values[k]) continue;
      with_n_i[k] = values[k]->prefactor_initial * *initial[k];
      with_n_f[k] =
          values[k]->prefactor_final * std::exp(-beta * (values[k]->G_final_direct - G_ref));
    }
    PrefactorRatio pr;
    pr.Z_i = scale * weighted_sum(points, with_n_i);
    pr.Z_f = scale * weighted_sum(points, with_n_f);
    pr.ratio = pr.Z_f / pr.Z_i;
    report.prefactor_on = pr;
  }
  if (options.monte_carlo) {
    report.monte_carlo = monte_carlo_lhs(model, beta, hbar, domain, settings, options, G_ref);
  }
  return report;
}

}  // namespace scjarz
