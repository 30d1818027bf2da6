#include "scjarz/commands.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <optional>
#include <sstream>

#include "scjarz/parallel.hpp"

namespace scjarz {

namespace {

using json = nlohmann::ordered_json;

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw NumericalError(ErrorKind::Validation, "--out: cannot write '" + path.string() + "'");
  }
  out.precision(17);
  return out;
}

void write_csv_banner(std::ostream& out, const RunConfig& config, std::string_view command) {
  out << "# scjarz " << command << " schema_version=" << kSchemaVersion
      << " config_hash=" << config.hash() << '\n';
}

json report_header(const RunConfig& config, std::string_view command) {
  return json{{"schema_version", kSchemaVersion},
              {"command", command},
              {"config_hash", config.hash()}};
}

void write_json(const std::filesystem::path& path, const json& doc) {
  std::ofstream out = open_output(path);
  out << doc.dump(2) << '\n';
}

std::filesystem::path prepare(const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    throw NumericalError(ErrorKind::Validation,
                         "--out: cannot create '" + out_dir.string() + "': " + ec.message());
  }
  return out_dir;
}

double axis_value(double lo, double hi, int n, int k) {
  return n == 1 ? lo : lo + (hi - lo) * k / (n - 1);
}

json failures_json(const std::vector<NodeFailure>& failures) {
  json out = json::array();
  for (const auto& f : failures) {
    out.push_back({{"p", f.p}, {"q", f.q}, {"kind", to_string(f.kind)}, {"message", f.message}});
  }
  return out;
}

std::string_view row_marker(ErrorKind kind) {
  return kind == ErrorKind::CausticEncountered ? "CAUSTIC" : "DIVERGED";
}

}  // namespace

CommandResult cmd_gibbs(const RunConfig& config, const std::filesystem::path& out_dir) {
  const HamiltonianModel model = config.make_model();
  const GridSection& g = config.grid;
  const IntegratorSettings& s = config.numerics.integrator;
  const std::size_t n = static_cast<std::size_t>(g.n_p) * g.n_q;

  struct Row {
    std::optional<PseudoHamiltonianValue> value;
    ErrorKind error = ErrorKind::NewtonDiverged;
  };
  std::vector<Row> rows(n);
  parallel_for(n, s.threads, [&](std::size_t k) {
    const RealPoint z{axis_value(g.p_min, g.p_max, g.n_p, static_cast<int>(k % g.n_p)),
                      axis_value(g.q_min, g.q_max, g.n_q, static_cast<int>(k / g.n_p))};
    try {
      rows[k].value = pseudo_hamiltonian(model, g.t, z, config.physics.beta, config.physics.hbar,
                                         s, config.run.prefactor);
    } catch (const NumericalError& e) {
      if (e.kind() == ErrorKind::Validation) throw;
      rows[k].error = e.kind();
    }
  });

  const auto dir = prepare(out_dir);
  const auto path = dir / "gibbs.csv";
  std::ofstream out = open_output(path);
  write_csv_banner(out, config, "gibbs");
  out << "q,p,G,G_from_total_action,z_c_p,z_c_q,jacobian_det,area_A";
  if (config.run.prefactor) out << ",prefactor";
  out << '\n';
  std::size_t failed = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double p = axis_value(g.p_min, g.p_max, g.n_p, static_cast<int>(k % g.n_p));
    const double q = axis_value(g.q_min, g.q_max, g.n_q, static_cast<int>(k / g.n_p));
    out << q << ',' << p << ',';
    if (!rows[k].value) {
      ++failed;
      out << row_marker(rows[k].error) << ",,,,,";
      if (config.run.prefactor) out << ',';
      out << '\n';
      continue;
    }
    const auto& v = *rows[k].value;
    out << v.G << ',' << v.G_from_total_action << ',' << v.center.p << ',' << v.center.q << ','
        << v.jacobian_det << ',' << v.arc.area;
    if (config.run.prefactor) out << ',' << v.prefactor.value_or(std::nan(""));
    out << '\n';
  }

  CommandResult result;
  result.files.push_back(path);
  std::ostringstream summary;
  summary << "gibbs: " << n - failed << " of " << n << " points";
  if (failed > 0) {
    summary << ", " << failed << " failed (marked in the CSV)";
    result.exit_code = kExitNumerical;
  }
  result.summary = summary.str();
  return result;
}

CommandResult cmd_work(const RunConfig& config, const std::filesystem::path& out_dir) {
  const HamiltonianModel model = config.make_model();
  const IntegratorSettings& s = config.numerics.integrator;
  const double hb = config.physics.hbar * config.physics.beta;
  const WorkResult w = pseudo_work(model, config.model.t_i, config.model.t_f,
                                   {config.run.p0, config.run.q0}, hb, s, false);
  const bool within = w.mismatch() <= s.work_tol * (1.0 + std::abs(w.W));

  const auto dir = prepare(out_dir);
  CommandResult result;
  {
    const auto path = dir / "work.csv";
    std::ofstream out = open_output(path);
    write_csv_banner(out, config, "work");
    out << "t,check_p,check_q,z_c_p,z_c_q,pseudo_power\n";
    for (const auto& node : w.trajectory.nodes) {
      out << node.t << ',' << node.check.p << ',' << node.check.q << ',' << node.center.p << ','
          << node.center.q << ',' << node.power << '\n';
    }
    result.files.push_back(path);
  }
  json doc = report_header(config, "work");
  doc["p0"] = config.run.p0;
  doc["q0"] = config.run.q0;
  doc["W"] = w.W;
  doc["W_endpoint"] = w.W_endpoint;
  doc["mismatch"] = w.mismatch();
  doc["G_initial"] = w.G_initial;
  doc["G_propagated"] = w.G_propagated;
  doc["within_tolerance"] = within;
  const auto json_path = dir / "work.json";
  write_json(json_path, doc);
  result.files.push_back(json_path);

  std::ostringstream summary;
  summary << "work: W = " << std::setprecision(12) << w.W << ", endpoint " << w.W_endpoint
          << ", mismatch " << std::setprecision(3) << w.mismatch();
  result.summary = summary.str();
  if (!within) result.exit_code = kExitNumerical;
  return result;
}

CommandResult cmd_jarzynski(const RunConfig& config, const std::filesystem::path& out_dir) {
  const HamiltonianModel model = config.make_model();
  JarzynskiOptions options;
  options.prefactor = config.run.prefactor;
  options.monte_carlo = config.run.monte_carlo;
  options.samples = config.run.samples;
  options.seed = config.run.seed;
  options.failure_budget = config.numerics.failure_budget;
  const JarzynskiReport r = verify_identity(model, config.physics.beta, config.physics.hbar,
                                            config.numerics.domain, config.numerics.integrator,
                                            options);

  json doc = report_header(config, "jarzynski");
  doc["Z_i"] = r.Z_i;
  doc["Z_f"] = r.Z_f;
  doc["lhs"] = r.lhs;
  doc["rhs"] = r.rhs;
  doc["residual"] = r.residual;
  if (r.prefactor_on) {
    doc["prefactor_on"] = {{"Z_i", r.prefactor_on->Z_i},
                           {"Z_f", r.prefactor_on->Z_f},
                           {"ratio", r.prefactor_on->ratio}};
  } else {
    doc["prefactor_on"] = nullptr;
  }
  doc["failures"] = failures_json(r.failures);
  if (r.monte_carlo) {
    const auto& mc = *r.monte_carlo;
    doc["monte_carlo"] = {{"samples", mc.samples},     {"seed", mc.seed},
                          {"proposals", mc.proposals}, {"lhs", mc.lhs},
                          {"std_error", mc.std_error}, {"residual", std::abs(mc.lhs - r.rhs) / r.rhs}};
  }
  doc["diagnostics"] = {{"nodes", r.nodes},
                        {"path_nodes", r.path_nodes},
                        {"truncated_nodes", r.truncated_nodes},
                        {"max_work_mismatch", r.max_work_mismatch},
                        {"edge_ratio", r.edge_ratio},
                        {"residual_threshold", config.numerics.residual_threshold}};

  const auto dir = prepare(out_dir);
  const auto path = dir / "jarzynski.json";
  write_json(path, doc);

  CommandResult result;
  result.files.push_back(path);
  std::ostringstream summary;
  summary << "jarzynski: lhs " << std::setprecision(12) << r.lhs << ", rhs " << r.rhs
          << ", residual " << std::setprecision(3) << r.residual << " (threshold "
          << config.numerics.residual_threshold << ")";
  result.summary = summary.str();
  if (!(r.residual < config.numerics.residual_threshold)) result.exit_code = kExitNumerical;
  return result;
}

CommandResult cmd_oracle(const RunConfig& config, const std::filesystem::path& out_dir) {
  const HamiltonianModel model = config.make_model();
  const double beta = config.physics.beta, hbar = config.physics.hbar;
  const double t = config.oracle.t;
  const OscillatorScales scales{config.model.m, model.protocol().omega(t), hbar};
  const FockOperator rho =
      thermal_fock(model.kind(), model.lambda(), beta, config.numerics.n_max, scales);
  const WignerGrid w = wigner_transform(rho, config.numerics.wigner);

  json doc = report_header(config, "oracle");
  doc["model"] = to_string(model.kind());
  doc["t"] = t;
  doc["trace"] = rho.trace().real();
  doc["top_level_weight"] = rho.top_level_weight();
  doc["wigner_integral"] = w.integral();
  doc["wigner_max_imag"] = w.max_imag;

  std::ostringstream summary;
  if (model.kind() == ModelKind::Harmonic) {
    const HarmonicClosedForms closed(beta, hbar, config.model.m, scales.omega);
    double max_error = 0.0;
    for (std::size_t ip = 0; ip < w.p.size(); ++ip) {
      if (std::abs(w.p[ip]) > config.oracle.window) continue;
      for (std::size_t iq = 0; iq < w.q.size(); ++iq) {
        if (std::abs(w.q[iq]) > config.oracle.window) continue;
        max_error = std::max(max_error, std::abs(w.W(ip, iq) - closed.weyl_symbol(w.p[ip], w.q[iq])));
      }
    }
    doc["Z_exact"] = closed.Z();
    doc["max_abs_error"] = max_error;
    summary << "oracle: harmonic max |W - closed form| = " << std::setprecision(3) << max_error;
  } else {
    const DensityComparison c = compare_thermal_densities(
        model, t, beta, hbar, config.numerics.n_max, config.numerics.wigner,
        config.numerics.domain, config.numerics.integrator, config.oracle.window,
        config.oracle.samples);
    doc["linf_gap"] = c.linf_gap;
    doc["relative_gap"] = c.linf_gap / c.peak;
    doc["Z_sc"] = c.semiclassical_norm;
    doc["compared_points"] = c.points;
    summary << "oracle: quartic L-inf density gap = " << std::setprecision(3) << c.linf_gap;
  }

  const FockOperator ground = fock_projector(0, config.numerics.n_max, scales);
  const ConventionAudit audit = weyl_convention_audit(ground, ground, config.numerics.wigner);
  doc["convention_audit"] = {{"trace_fock", audit.trace_fock.real()},
                             {"phase_space", audit.phase_space},
                             {"ratio", audit.ratio},
                             {"ratio_over_2pi_hbar", audit.ratio / (2.0 * std::numbers::pi * hbar)}};

  const auto dir = prepare(out_dir);
  CommandResult result;
  const auto path = dir / "oracle.json";
  write_json(path, doc);
  result.files.push_back(path);
  if (config.oracle.export_wigner) {
    const auto csv = dir / "wigner.csv";
    std::ofstream out = open_output(csv);
    write_csv_banner(out, config, "oracle");
    write_wigner_csv(out, w);
    result.files.push_back(csv);
  }
  summary << ", audit constant " << std::setprecision(12) << audit.ratio;
  result.summary = summary.str();
  return result;
}

CommandResult run_command(const RunConfig& config, const std::filesystem::path& out_dir) {
  switch (config.run.command) {
    case Command::Gibbs: return cmd_gibbs(config, out_dir);
    case Command::Work: return cmd_work(config, out_dir);
    case Command::Jarzynski: return cmd_jarzynski(config, out_dir);
    case Command::Oracle: return cmd_oracle(config, out_dir);
  }
  throw NumericalError(ErrorKind::Validation, "run.command: unknown");
}

int exit_code_for(const NumericalError& error) noexcept {
  return error.kind() == ErrorKind::Validation ? kExitValidation : kExitNumerical;
}

}  // namespace scjarz
