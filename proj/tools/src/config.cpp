#include "mbern_cli/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "mbern/errors.hpp"
#include "mbern/montecarlo.hpp"

namespace mbern::cli {

using nlohmann::json;

namespace {

// Reads fields of one JSON object and rejects the ones nobody asked for.
class Fields {
 public:
  Fields(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) fail("must be an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  const json& at(const std::string& key) {
    if (!has(key)) fail("missing field '" + key + "'");
    return j_.at(key);
  }

  double number(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number()) fail("field '" + key + "' must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail("field '" + key + "' must be finite");
    return x;
  }

  std::int64_t integer(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number_integer()) fail("field '" + key + "' must be an integer");
    return v.get<std::int64_t>();
  }

  std::uint64_t unsigned_integer(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number_unsigned()) fail("field '" + key + "' must be a nonnegative integer");
    return v.get<std::uint64_t>();
  }

  std::string string(const std::string& key) {
    const json& v = at(key);
    if (!v.is_string()) fail("field '" + key + "' must be a string");
    return v.get<std::string>();
  }

  bool boolean(const std::string& key) {
    const json& v = at(key);
    if (!v.is_boolean()) fail("field '" + key + "' must be a boolean");
    return v.get<bool>();
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) fail("unknown field '" + key + "'");
    }
  }

  [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(where_ + ": " + msg); }

  const std::string& where() const { return where_; }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

Matrix parse_matrix(const json& j, const std::string& where) {
  if (j.is_number()) {
    Matrix m(1, 1);
    m(0, 0) = j.get<double>();
    return m;
  }
  if (j.is_object()) {
    Fields f(j, where);
    const json& diag = f.at("diag");
    f.finish();
    if (!diag.is_array() || diag.empty()) f.fail("'diag' must be a non-empty array");
    Vector v(static_cast<Index>(diag.size()));
    for (std::size_t i = 0; i < diag.size(); ++i) {
      if (!diag[i].is_number()) f.fail("'diag' entries must be numbers");
      v(static_cast<Index>(i)) = diag[i].get<double>();
    }
    return Matrix(v.asDiagonal());
  }
  if (!j.is_array() || j.empty()) throw ConfigError(where + ": matrix must be a non-empty array");
  const auto d = static_cast<Index>(j.size());
  Matrix m(d, d);
  for (Index i = 0; i < d; ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != d) {
      throw ConfigError(where + ": matrix must be square");
    }
    for (Index k = 0; k < d; ++k) {
      const json& x = row[static_cast<std::size_t>(k)];
      if (!x.is_number()) throw ConfigError(where + ": matrix entries must be numbers");
      m(i, k) = x.get<double>();
    }
  }
  if (!m.allFinite()) throw ConfigError(where + ": matrix entries must be finite");
  return m;
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<double> parse_doubles(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : j) {
    if (!x.is_number()) throw ConfigError(where + ": must be an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

std::vector<double> parse_grid(const json& j) {
  if (j.is_array()) return parse_doubles(j, "t_grid");
  Fields f(j, "t_grid");
  const double start = f.number("start");
  const double stop = f.number("stop");
  const std::int64_t count = f.integer("count");
  std::string spacing = "linear";
  if (f.has("spacing")) spacing = f.string("spacing");
  f.finish();
  if (count < 1) f.fail("count must be >= 1");
  if (spacing != "linear" && spacing != "log") f.fail("spacing must be 'linear' or 'log'");
  if (spacing == "log" && !(start > 0.0 && stop > 0.0)) f.fail("log spacing needs positive ends");
  std::vector<double> grid;
  for (std::int64_t k = 0; k < count; ++k) {
    const double frac = count == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(count - 1);
    grid.push_back(spacing == "linear"
                       ? start + frac * (stop - start)
                       : std::exp(std::log(start) + frac * (std::log(stop) - std::log(start))));
  }
  return grid;
}

EnsembleConfig parse_ensemble(const json& j) {
  Fields f(j, "ensemble");
  EnsembleConfig e;
  e.family = f.string("family");
  if (e.family == "RankOneSphere" || e.family == "SphereVector") {
    e.d = f.integer("d");
    e.n = f.integer("n");
  } else if (e.family == "FixedBasisRademacher") {
    if (f.has("basis")) {
      const json& b = f.at("basis");
      if (!b.is_array() || b.empty()) f.fail("'basis' must be a non-empty array");
      for (std::size_t i = 0; i < b.size(); ++i) {
        e.basis.push_back(parse_matrix(b[i], "ensemble.basis[" + std::to_string(i) + "]"));
      }
      if (f.has("n") || f.has("matrix")) f.fail("give either 'basis' or 'matrix' with 'n'");
    } else {
      const Matrix m = parse_matrix(f.at("matrix"), "ensemble.matrix");
      const std::int64_t n = f.integer("n");
      if (n < 1) f.fail("n must be >= 1");
      e.basis.assign(static_cast<std::size_t>(n), m);
    }
    e.n = static_cast<std::int64_t>(e.basis.size());
    e.d = e.basis.front().rows();
  } else if (e.family == "FiniteSupport") {
    e.n = f.integer("n");
    const json& atoms = f.at("atoms");
    if (!atoms.is_array() || atoms.empty()) f.fail("'atoms' must be a non-empty array");
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      const std::string where = "ensemble.atoms[" + std::to_string(i) + "]";
      Fields a(atoms[i], where);
      const Matrix value = parse_matrix(a.at("value"), where + ".value");
      const double p = a.number("probability");
      a.finish();
      e.atoms.emplace_back(value, p);
    }
    e.d = e.atoms.front().first.rows();
  } else if (e.family == "SubExpScaled" || e.family == "MartingaleAdapted") {
    e.n = f.integer("n");
    e.direction = parse_matrix(f.at("matrix"), "ensemble.matrix");
    e.d = e.direction->rows();
  } else {
    f.fail("unknown family '" + e.family + "'");
  }
  f.finish();
  if (e.n < 1 || e.d < 1) f.fail("n and d must be >= 1");
  // Build once so invalid specs surface as config errors.
  try {
    if (e.is_vector()) {
      (void)e.build_vector();
    } else {
      (void)e.build();
    }
  } catch (const mbern::Error& err) {
    f.fail(err.what());
  }
  return e;
}

json ensemble_json(const EnsembleConfig& e) {
  json j;
  j["family"] = e.family;
  if (e.family == "RankOneSphere" || e.family == "SphereVector") {
    j["d"] = e.d;
    j["n"] = e.n;
  } else if (e.family == "FixedBasisRademacher") {
    json b = json::array();
    for (const auto& m : e.basis) b.push_back(matrix_json(m));
    j["basis"] = std::move(b);
  } else if (e.family == "FiniteSupport") {
    j["n"] = e.n;
    json a = json::array();
    for (const auto& [value, p] : e.atoms) {
      a.push_back(json{{"value", matrix_json(value)}, {"probability", p}});
    }
    j["atoms"] = std::move(a);
  } else {
    j["n"] = e.n;
    j["matrix"] = matrix_json(*e.direction);
  }
  return j;
}

BoundConfig parse_bound(const json& j) {
  Fields f(j, "bound");
  BoundConfig b;
  try {
    if (f.has("regime")) b.regime = regime_from_string(f.string("regime"));
  } catch (const mbern::Error& err) {
    f.fail(err.what());
  }
  if (f.has("n")) b.n = f.integer("n");
  if (f.has("d")) b.d = f.integer("d");
  if (f.has("sigma2")) b.sigma2 = f.number("sigma2");
  if (f.has("U")) b.U = f.number("U");
  if (f.has("trace_var")) b.trace_var = f.number("trace_var");
  if (f.has("expected_w")) b.expected_w = parse_matrix(f.at("expected_w"), "bound.expected_w");
  if (f.has("kappa")) b.kappa = f.number("kappa");
  if (f.has("lk_norm")) b.lk_norm = f.number("lk_norm");
  if (f.has("xi_intdim")) b.xi_intdim = f.number("xi_intdim");
  f.finish();
  return b;
}

json bound_json(const BoundConfig& b) {
  json j = json::object();
  if (b.regime) j["regime"] = std::string(to_string(*b.regime));
  if (b.n) j["n"] = *b.n;
  if (b.d) j["d"] = *b.d;
  if (b.sigma2) j["sigma2"] = *b.sigma2;
  if (b.U) j["U"] = *b.U;
  if (b.trace_var) j["trace_var"] = *b.trace_var;
  if (b.expected_w) j["expected_w"] = matrix_json(*b.expected_w);
  if (b.kappa) j["kappa"] = *b.kappa;
  if (b.lk_norm) j["lk_norm"] = *b.lk_norm;
  if (b.xi_intdim) j["xi_intdim"] = *b.xi_intdim;
  return j;
}

SimSection parse_sim(const json& j) {
  Fields f(j, "sim");
  SimSection s;
  if (f.has("trials")) s.trials = f.unsigned_integer("trials");
  if (f.has("seed")) s.seed = f.unsigned_integer("seed");
  if (f.has("confidence")) s.confidence = f.number("confidence");
  if (f.has("exact")) s.exact = f.boolean("exact");
  f.finish();
  if (s.trials == 0) f.fail("trials must be positive");
  if (!(s.confidence > 0.0 && s.confidence < 1.0)) f.fail("confidence must be in (0, 1)");
  return s;
}

KernelSection parse_kernel(const json& j) {
  Fields f(j, "kernel");
  KernelSection k;
  try {
    k.spec.family = kernel_family_from_string(f.string("family"));
  } catch (const mbern::Error& err) {
    f.fail(err.what());
  }
  if (k.spec.family == KernelFamily::gaussian) {
    k.spec.bandwidth = f.number("bandwidth");
  } else {
    k.spec.degree = static_cast<int>(f.integer("degree"));
    if (f.has("offset")) k.spec.offset = f.number("offset");
  }
  if (f.has("lower")) k.spec.lower = parse_doubles(f.at("lower"), "kernel.lower");
  if (f.has("upper")) k.spec.upper = parse_doubles(f.at("upper"), "kernel.upper");
  if (f.has("n")) k.n = f.integer("n");
  if (f.has("m")) k.m = f.integer("m");
  if (f.has("samples")) k.samples = f.unsigned_integer("samples");
  f.finish();
  try {
    k.spec.validate();
    (void)quadrature_nodes(k.spec, k.m);
  } catch (const mbern::Error& err) {
    f.fail(err.what());
  }
  if (k.n < 1) f.fail("n must be >= 1");
  if (k.samples == 0) f.fail("samples must be positive");
  return k;
}

json kernel_json(const KernelSection& k) {
  json j;
  j["family"] = std::string(to_string(k.spec.family));
  if (k.spec.family == KernelFamily::gaussian) {
    j["bandwidth"] = k.spec.bandwidth;
  } else {
    j["degree"] = k.spec.degree;
    j["offset"] = k.spec.offset;
  }
  j["lower"] = k.spec.lower;
  j["upper"] = k.spec.upper;
  j["n"] = k.n;
  j["m"] = k.m;
  j["samples"] = k.samples;
  return j;
}

OutputSection parse_output(const json& j) {
  Fields f(j, "output");
  OutputSection o;
  if (f.has("path")) o.path = f.string("path");
  try {
    if (f.has("format")) o.format = format_from_string(f.string("format"));
  } catch (const ConfigError& err) {
    f.fail(err.what());
  }
  f.finish();
  return o;
}

Kind kind_from_string(const std::string& s) {
  if (s == "bound") return Kind::bound;
  if (s == "simulate") return Kind::simulate;
  if (s == "compare") return Kind::compare;
  if (s == "kernel") return Kind::kernel;
  if (s == "inequalities") return Kind::inequalities;
  throw ConfigError("unknown kind '" + s + "'");
}

}  // namespace

std::string_view to_string(Kind k) {
  switch (k) {
    case Kind::bound:
      return "bound";
    case Kind::simulate:
      return "simulate";
    case Kind::compare:
      return "compare";
    case Kind::kernel:
      return "kernel";
    case Kind::inequalities:
      return "inequalities";
  }
  return "unknown";
}

Format format_from_string(std::string_view s) {
  if (s == "csv") return Format::csv;
  if (s == "json") return Format::json;
  throw ConfigError("format must be 'csv' or 'json'");
}

std::string_view to_string(Format f) { return f == Format::csv ? "csv" : "json"; }

EnsembleSpec EnsembleConfig::build() const {
  if (family == "FixedBasisRademacher") {
    std::vector<SymMatrix> b;
    for (const auto& m : basis) b.emplace_back(m);
    return EnsembleSpec::rademacher(std::move(b));
  }
  if (family == "RankOneSphere") return EnsembleSpec::rank_one_sphere(d, n);
  if (family == "FiniteSupport") {
    std::vector<Atom> list;
    for (const auto& [value, p] : atoms) list.push_back({SymMatrix(value), p});
    return EnsembleSpec::finite_support(std::move(list), n);
  }
  if (family == "SubExpScaled") return EnsembleSpec::subexp_scaled(SymMatrix(*direction), n);
  if (family == "MartingaleAdapted") {
    return EnsembleSpec::martingale_adapted(SymMatrix(*direction), n);
  }
  throw InvalidSpec("family '" + family + "' is not a matrix ensemble");
}

SphereVectorSpec EnsembleConfig::build_vector() const {
  if (!is_vector()) throw InvalidSpec("not a vector ensemble");
  return {d, n};
}

std::string ExperimentConfig::ensemble_id() const {
  if (!id.empty()) return id;
  if (ensemble) return ensemble->family;
  if (kernel) return std::string(to_string(kernel->spec.family));
  return std::string(to_string(kind));
}

ExperimentConfig parse_config(const json& j) {
  Fields f(j, "config");
  ExperimentConfig cfg;
  cfg.kind = kind_from_string(f.string("kind"));
  if (f.has("id")) cfg.id = f.string("id");
  if (f.has("ensemble")) cfg.ensemble = parse_ensemble(f.at("ensemble"));
  if (f.has("bound")) cfg.bound = parse_bound(f.at("bound"));
  if (f.has("sim")) cfg.sim = parse_sim(f.at("sim"));
  if (f.has("kernel")) cfg.kernel = parse_kernel(f.at("kernel"));
  if (f.has("t_grid")) cfg.t_grid = parse_grid(f.at("t_grid"));
  if (f.has("output")) cfg.output = parse_output(f.at("output"));
  f.finish();

  switch (cfg.kind) {
    case Kind::simulate:
    case Kind::compare:
      if (!cfg.ensemble) f.fail("kind '" + std::string(to_string(cfg.kind)) + "' needs 'ensemble'");
      break;
    case Kind::bound:
      if (!cfg.ensemble && !cfg.bound.regime) f.fail("kind 'bound' needs 'ensemble' or bound.regime");
      break;
    case Kind::kernel:
      if (!cfg.kernel) f.fail("kind 'kernel' needs 'kernel'");
      break;
    case Kind::inequalities:
      break;
  }
  if (cfg.kind != Kind::inequalities) {
    try {
      validate_t_grid(cfg.t_grid);
    } catch (const mbern::Error& err) {
      f.fail(std::string("t_grid: ") + err.what());
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("malformed JSON in '" + path + "': " + e.what());
  }
  return parse_config(j);
}

json serialize_config(const ExperimentConfig& cfg) {
  json j;
  j["kind"] = std::string(to_string(cfg.kind));
  j["id"] = cfg.id;
  if (cfg.ensemble) j["ensemble"] = ensemble_json(*cfg.ensemble);
  j["bound"] = bound_json(cfg.bound);
  j["sim"] = json{{"trials", cfg.sim.trials},
                  {"seed", cfg.sim.seed},
                  {"confidence", cfg.sim.confidence},
                  {"exact", cfg.sim.exact}};
  if (cfg.kernel) j["kernel"] = kernel_json(*cfg.kernel);
  j["t_grid"] = cfg.t_grid;
  j["output"] = json{{"path", cfg.output.path}, {"format", std::string(to_string(cfg.output.format))}};
  return j;
}

}  // namespace mbern::cli
