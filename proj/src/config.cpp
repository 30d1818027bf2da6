#include "scjarz/config.hpp"

#include <openssl/evp.h>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <sstream>
#include <vector>

namespace scjarz {

namespace {

[[noreturn]] void invalid(const std::string& field, const std::string& message) {
  throw NumericalError(ErrorKind::Validation, field + ": " + message);
}

std::string format_double(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

template <class T>
T parse_integer(const std::string& path, const std::string& text) {
  T value{};
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size()) {
    invalid(path, "expected an integer, got '" + text + "'");
  }
  return value;
}

double parse_real(const std::string& path, const std::string& text) {
  double value = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size() || !std::isfinite(value)) {
    invalid(path, "expected a finite number, got '" + text + "'");
  }
  return value;
}

bool parse_bool(const std::string& path, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  invalid(path, "expected true or false, got '" + text + "'");
}

// Rethrows a library parse error with the config path in front.
template <class Fn>
auto with_path(const std::string& path, Fn&& fn) {
  try {
    return fn();
  } catch (const NumericalError& e) {
    invalid(path, e.what());
  }
}

struct Field {
  std::string path;  // section.key
  bool canonical;    // part of the hashed form
  std::function<void(RunConfig&, const std::string&)> read;
  std::function<std::string(const RunConfig&)> write;
};

template <class Get>
Field real(std::string path, Get get) {
  return {path, true, [=](RunConfig& c, const std::string& v) { get(c) = parse_real(path, v); },
          [=](const RunConfig& c) { return format_double(get(c)); }};
}

template <class Get>
Field integer(std::string path, Get get, bool canonical = true) {
  return {path, canonical,
          [=](RunConfig& c, const std::string& v) {
            using T = std::remove_reference_t<decltype(get(c))>;
            get(c) = parse_integer<T>(path, v);
          },
          [=](const RunConfig& c) { return std::to_string(get(c)); }};
}

template <class Get>
Field boolean(std::string path, Get get) {
  return {path, true, [=](RunConfig& c, const std::string& v) { get(c) = parse_bool(path, v); },
          [=](const RunConfig& c) { return std::string(get(c) ? "true" : "false"); }};
}

template <class Get, class Parse>
Field named(std::string path, Get get, Parse parse) {
  return {path, true,
          [=](RunConfig& c, const std::string& v) { get(c) = with_path(path, [&] { return parse(v); }); },
          [=](const RunConfig& c) { return std::string(to_string(get(c))); }};
}

#define FIELD(expr) [](auto& c) -> auto& { return c.expr; }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      named("model.kind", FIELD(model.kind), model_kind_from_string),
      real("model.m", FIELD(model.m)),
      real("model.lambda", FIELD(model.lambda)),
      real("model.omega_i", FIELD(model.omega_i)),
      real("model.omega_f", FIELD(model.omega_f)),
      real("model.t_i", FIELD(model.t_i)),
      real("model.t_f", FIELD(model.t_f)),
      named("model.shape", FIELD(model.shape), protocol_shape_from_string),
      real("physics.beta", FIELD(physics.beta)),
      real("physics.hbar", FIELD(physics.hbar)),
      integer("numerics.n_sigma_steps", FIELD(numerics.integrator.n_sigma_steps)),
      integer("numerics.n_time_steps", FIELD(numerics.integrator.n_time_steps)),
      integer("numerics.real_substeps", FIELD(numerics.integrator.real_substeps)),
      boolean("numerics.richardson_check", FIELD(numerics.integrator.richardson_check)),
      real("numerics.tolerance", FIELD(numerics.integrator.tolerance)),
      real("numerics.newton_tol", FIELD(numerics.integrator.newton_tol)),
      integer("numerics.continuation_stages", FIELD(numerics.integrator.continuation_stages)),
      integer("numerics.max_newton_iters", FIELD(numerics.integrator.max_newton_iters)),
      real("numerics.work_tol", FIELD(numerics.integrator.work_tol)),
      real("numerics.p_max", FIELD(numerics.domain.p_max)),
      real("numerics.q_max", FIELD(numerics.domain.q_max)),
      integer("numerics.n_p", FIELD(numerics.domain.n_p)),
      integer("numerics.n_q", FIELD(numerics.domain.n_q)),
      named("numerics.rule", FIELD(numerics.domain.rule), quadrature_rule_from_string),
      integer("numerics.n_max", FIELD(numerics.n_max)),
      integer("numerics.wigner_n_q", FIELD(numerics.wigner.n_q)),
      real("numerics.wigner_q_max", FIELD(numerics.wigner.q_max)),
      real("numerics.residual_threshold", FIELD(numerics.residual_threshold)),
      real("numerics.failure_budget", FIELD(numerics.failure_budget)),
      real("grid.p_min", FIELD(grid.p_min)),
      real("grid.p_max", FIELD(grid.p_max)),
      real("grid.q_min", FIELD(grid.q_min)),
      real("grid.q_max", FIELD(grid.q_max)),
      integer("grid.n_p", FIELD(grid.n_p)),
      integer("grid.n_q", FIELD(grid.n_q)),
      real("grid.t", FIELD(grid.t)),
      real("oracle.t", FIELD(oracle.t)),
      real("oracle.window", FIELD(oracle.window)),
      integer("oracle.samples", FIELD(oracle.samples)),
      boolean("oracle.export_wigner", FIELD(oracle.export_wigner)),
      named("run.command", FIELD(run.command), command_from_string),
      integer("run.seed", FIELD(run.seed)),
      boolean("run.prefactor", FIELD(run.prefactor)),
      boolean("run.monte_carlo", FIELD(run.monte_carlo)),
      integer("run.samples", FIELD(run.samples)),
      real("run.p0", FIELD(run.p0)),
      real("run.q0", FIELD(run.q0)),
      // Execution knobs: they do not change results, so they stay out of the hash.
      {"run.out", false, [](RunConfig& c, const std::string& v) { c.run.out = v; },
       [](const RunConfig& c) { return c.run.out; }},
      integer("run.threads", FIELD(run.threads), false),
  };
  return table;
}

#undef FIELD

}  // namespace

std::string_view to_string(Command command) noexcept {
  switch (command) {
    case Command::Gibbs: return "gibbs";
    case Command::Work: return "work";
    case Command::Jarzynski: return "jarzynski";
    case Command::Oracle: return "oracle";
  }
  return "unknown";
}

Command command_from_string(std::string_view name) {
  if (name == "gibbs") return Command::Gibbs;
  if (name == "work") return Command::Work;
  if (name == "jarzynski") return Command::Jarzynski;
  if (name == "oracle") return Command::Oracle;
  throw NumericalError(ErrorKind::Validation, "unknown command '" + std::string(name) + "'");
}

void RunConfig::validate() const {
  if (schema_version != kSchemaVersion) {
    invalid("schema_version", "unsupported version " + std::to_string(schema_version) +
                                  " (expected " + std::to_string(kSchemaVersion) + ")");
  }
  if (!(model.m > 0.0)) invalid("model.m", "must be > 0");
  if (!(model.lambda >= 0.0)) invalid("model.lambda", "must be >= 0");
  if (model.kind == ModelKind::Harmonic && model.lambda != 0.0) {
    invalid("model.lambda", "must be 0 for the harmonic model");
  }
  if (!(model.omega_i > 0.0)) invalid("model.omega_i", "must be > 0");
  if (!(model.omega_f > 0.0)) invalid("model.omega_f", "must be > 0");
  if (!(model.t_f >= model.t_i)) invalid("model.t_f", "must be >= model.t_i");
  if (model.shape == ProtocolShape::Constant && model.omega_i != model.omega_f) {
    invalid("model.omega_f", "must equal model.omega_i for a constant protocol");
  }
  if (!(physics.beta > 0.0)) invalid("physics.beta", "must be > 0");
  if (!(physics.hbar > 0.0)) invalid("physics.hbar", "must be > 0");

  numerics.integrator.validate();
  numerics.domain.validate();
  if (numerics.n_max < 1) invalid("numerics.n_max", "must be >= 1");
  numerics.wigner.validate();
  if (!(numerics.residual_threshold > 0.0)) invalid("numerics.residual_threshold", "must be > 0");
  if (!(numerics.failure_budget >= 0.0 && numerics.failure_budget <= 1.0)) {
    invalid("numerics.failure_budget", "must lie in [0, 1]");
  }

  if (grid.n_p < 1) invalid("grid.n_p", "must be >= 1");
  if (grid.n_q < 1) invalid("grid.n_q", "must be >= 1");
  if (!(grid.p_max >= grid.p_min)) invalid("grid.p_max", "must be >= grid.p_min");
  if (!(grid.q_max >= grid.q_min)) invalid("grid.q_max", "must be >= grid.q_min");
  if (grid.t < model.t_i || grid.t > model.t_f) invalid("grid.t", "must lie in [t_i, t_f]");

  if (oracle.t < model.t_i || oracle.t > model.t_f) invalid("oracle.t", "must lie in [t_i, t_f]");
  if (!(oracle.window > 0.0)) invalid("oracle.window", "must be > 0");
  if (oracle.samples < 1) invalid("oracle.samples", "must be >= 1");

  if (run.monte_carlo && run.samples < 2) invalid("run.samples", "must be >= 2");
  if (run.threads < 1) invalid("run.threads", "must be >= 1");
}

HamiltonianModel RunConfig::make_model() const {
  validate();
  return {model.kind, model.m,
          FrequencyProtocol(model.t_i, model.t_f, model.omega_i, model.omega_f, model.shape),
          model.lambda};
}

std::string RunConfig::to_ini() const {
  std::ostringstream out;
  out << "schema_version = " << schema_version << "\n";
  std::string section;
  for (const Field& f : fields()) {
    if (!f.canonical) continue;
    const auto dot = f.path.find('.');
    const std::string s = f.path.substr(0, dot);
    if (s != section) {
      out << "\n[" << s << "]\n";
      section = s;
    }
    out << f.path.substr(dot + 1) << " = " << f.write(*this) << "\n";
  }
  return out.str();
}

std::string RunConfig::hash() const {
  const std::string text = to_ini();
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_Digest(text.data(), text.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < length; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return hex.str();
}

RunConfig parse_config(std::string_view text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    invalid("config", "line " + std::to_string(e.line()) + ": " + e.message());
  }

  std::map<std::string, const Field*> by_path;
  for (const Field& f : fields()) by_path[f.path] = &f;

  RunConfig config;
  bool have_version = false;
  for (const auto& [name, node] : tree) {
    if (name == "schema_version") {
      config.schema_version = parse_integer<int>(name, node.data());
      have_version = true;
      continue;
    }
    if (node.empty() && !node.data().empty()) invalid(name, "unknown top-level key");
    for (const auto& [key, leaf] : node) {
      const std::string path = name + "." + key;
      const auto it = by_path.find(path);
      if (it == by_path.end()) invalid(path, "unknown key");
      it->second->read(config, leaf.data());
    }
  }
  if (!have_version) invalid("schema_version", "missing");
  config.numerics.integrator.threads = config.run.threads;
  config.validate();
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) invalid("--config", "cannot read '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

}  // namespace scjarz
