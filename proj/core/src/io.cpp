#include "vpd/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace vpd {

namespace {

using nlohmann::json;
constexpr double kPi = 3.14159265358979323846;

Rect rect_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 4) {
    throw ConfigError(std::string(what) + " must be [x1_min, x1_max, x2_min, x2_max]");
  }
  return Rect{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

json rect_to_json(const Rect& r) { return json::array({r.x1_min, r.x1_max, r.x2_min, r.x2_max}); }

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

Profile profile_from_json(const json& j, const std::string& base_dir) {
  reject_unknown(j, {"kind", "p", "table_path", "s", "f"}, "profile");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "heaviside") return Profile::heaviside();
  if (kind == "power") return Profile::power(j.at("p").get<double>());
  if (kind == "tabulated") {
    if (j.contains("table_path")) {
      std::filesystem::path p = j.at("table_path").get<std::string>();
      if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
      return Profile::load_table(p.string());
    }
    return Profile::tabulated(j.at("s").get<std::vector<double>>(), j.at("f").get<std::vector<double>>());
  }
  throw ConfigError("unknown profile kind '" + kind + "'");
}

RhoPolicy rho_from_json(const json& j) {
  reject_unknown(j, {"kind", "rho", "rho_init", "growth", "cap"}, "rho_policy");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "none") return RhoPolicy::none();
  if (kind == "fixed") return RhoPolicy::fixed(j.at("rho").get<double>());
  if (kind == "adaptive") {
    return RhoPolicy::adaptive(j.value("rho_init", 1.0), j.value("growth", 2.0), j.value("cap", 1048576.0));
  }
  throw ConfigError("unknown rho_policy kind '" + kind + "'");
}

SolverConfig config_from_json(const json& j, const std::string& base_dir) {
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  reject_unknown(j,
                 {"epsilon", "kappa", "r", "W", "profile", "grid", "domain", "rho_policy", "tolerances",
                  "max_iter", "symmetrize", "accelerate"},
                 "configuration");
  SolverConfig c;
  if (!j.contains("epsilon")) throw ConfigError("missing required key 'epsilon'");
  c.epsilon = j.at("epsilon").get<double>();
  c.kappa = j.value("kappa", 1.0);
  const bool has_r = j.contains("r"), has_W = j.contains("W");
  if (has_r) c.r = j.at("r").get<double>();
  if (has_W) c.W = j.at("W").get<double>();
  if (has_r && !has_W) c.W = c.kappa / (4.0 * kPi * c.r);
  if (has_W && !has_r) c.r = c.kappa / (4.0 * kPi * c.W);
  if (!has_r && !has_W) {
    c.r = 1.0;
    c.W = c.kappa / (4.0 * kPi);
  }
  if (!(c.r > 0.0)) throw ConfigError("r must be positive");
  if (has_r && has_W && std::abs(4.0 * kPi * c.r * c.W - c.kappa) > 1e-12 * c.kappa) {
    throw ConfigError("W and r are inconsistent: 4 pi r W must equal kappa");
  }

  c.profile = j.contains("profile") ? profile_from_json(j.at("profile"), base_dir) : Profile::heaviside();
  c.rho_policy = c.profile.bounded() ? RhoPolicy::none() : RhoPolicy::adaptive();
  if (j.contains("rho_policy")) c.rho_policy = rho_from_json(j.at("rho_policy"));

  int n1 = 256, n2 = 256;
  Rect window = default_domain(c.r);
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    reject_unknown(g, {"n1", "n2", "window"}, "grid");
    n1 = g.value("n1", 256);
    n2 = g.value("n2", 256);
    if (g.contains("window")) window = rect_from_json(g.at("window"), "grid.window");
  }
  c.grid = GridSpec(window, n1, n2);
  c.domain = j.contains("domain") ? rect_from_json(j.at("domain"), "domain") : default_domain(c.r);

  if (j.contains("tolerances")) {
    const json& t = j.at("tolerances");
    reject_unknown(t, {"mass", "fixed_point"}, "tolerances");
    c.tol_mass = t.value("mass", c.tol_mass);
    c.tol_fixed_point = t.value("fixed_point", c.tol_fixed_point);
  }
  c.max_iter = j.value("max_iter", c.max_iter);
  c.symmetrize = j.value("symmetrize", c.symmetrize);
  c.accelerate = j.value("accelerate", c.accelerate);
  return c;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

SolverConfig parse_config(const std::string& json_text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed configuration JSON: ") + e.what());
  }
  SolverConfig c;
  try {
    c = config_from_json(j, base_dir);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad configuration value: ") + e.what());
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  validate_config(c);
  return c;
}

SolverConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read configuration " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const auto dir = std::filesystem::path(path).parent_path();
  return parse_config(ss.str(), dir.empty() ? "." : dir.string());
}

std::string config_to_json(const SolverConfig& c) {
  json j;
  j["epsilon"] = c.epsilon;
  j["kappa"] = c.kappa;
  j["r"] = c.r;
  j["W"] = c.W;
  json p;
  switch (c.profile.kind()) {
    case ProfileKind::heaviside:
      p["kind"] = "heaviside";
      break;
    case ProfileKind::power:
      p["kind"] = "power";
      p["p"] = c.profile.exponent();
      break;
    case ProfileKind::tabulated:
      p["kind"] = "tabulated";
      p["s"] = c.profile.table_s();
      p["f"] = c.profile.table_f();
      break;
  }
  j["profile"] = p;
  j["grid"] = {{"n1", c.grid.n1()}, {"n2", c.grid.n2()}, {"window", rect_to_json(c.grid.window())}};
  j["domain"] = rect_to_json(c.domain);
  json rp;
  switch (c.rho_policy.kind) {
    case RhoPolicy::Kind::none:
      rp["kind"] = "none";
      break;
    case RhoPolicy::Kind::fixed:
      rp["kind"] = "fixed";
      rp["rho"] = c.rho_policy.rho;
      break;
    case RhoPolicy::Kind::adaptive:
      rp = {{"kind", "adaptive"},
            {"rho_init", c.rho_policy.rho_init},
            {"growth", c.rho_policy.growth},
            {"cap", c.rho_policy.cap}};
      break;
  }
  j["rho_policy"] = rp;
  j["tolerances"] = {{"mass", c.tol_mass}, {"fixed_point", c.tol_fixed_point}};
  j["max_iter"] = c.max_iter;
  j["symmetrize"] = c.symmetrize;
  j["accelerate"] = c.accelerate;
  return j.dump(2) + "\n";
}

void write_field_csv(const std::string& path, const ScalarField& field) {
  auto out = open_out(path);
  const GridSpec& g = field.grid();
  out << "x1,x2,value\n";
  for (int i = 0; i < g.n1(); ++i) {
    for (int j = 0; j < g.n2(); ++j) {
      out << format_double(g.x1(i)) << ',' << format_double(g.x2(j)) << ',' << format_double(field(i, j))
          << '\n';
    }
  }
}

ScalarField read_field_csv(const std::string& path, const GridSpec& grid, FieldRole role) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string line;
  if (!std::getline(in, line) || line != "x1,x2,value") {
    throw std::runtime_error(path + ": missing header x1,x2,value");
  }
  ScalarField field(grid, role);
  std::size_t k = 0;
  const double tol1 = 1e-9 * grid.h1(), tol2 = 1e-9 * grid.h2();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (k >= grid.size()) throw std::runtime_error(path + ": more rows than grid cells");
    double x1, x2, v;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &x1, &x2, &v) != 3) {
      throw std::runtime_error(path + ": malformed row " + std::to_string(k + 2));
    }
    const int i = static_cast<int>(k / static_cast<std::size_t>(grid.n2()));
    const int j = static_cast<int>(k % static_cast<std::size_t>(grid.n2()));
    if (std::abs(x1 - grid.x1(i)) > tol1 || std::abs(x2 - grid.x2(j)) > tol2) {
      throw std::runtime_error(path + ": cell centres do not match the grid");
    }
    field[k++] = v;
  }
  if (k != grid.size()) throw std::runtime_error(path + ": fewer rows than grid cells");
  return field;
}

void write_full_plane_csv(const std::string& path, const FullPlaneField& field) {
  auto out = open_out(path);
  out << "x1,x2,value\n";
  for (int k = 0; k < field.columns(); ++k) {
    for (int j = 0; j < field.rows(); ++j) {
      out << format_double(field.x1(k)) << ',' << format_double(field.x2(j)) << ','
          << format_double(field(k, j)) << '\n';
    }
  }
}

void write_velocity_csv(const std::string& path, const VectorField& v) {
  auto out = open_out(path);
  const GridSpec& g = v.v1.grid();
  out << "x1,x2,v1,v2\n";
  for (int i = 0; i < g.n1(); ++i) {
    for (int j = 0; j < g.n2(); ++j) {
      out << format_double(g.x1(i)) << ',' << format_double(g.x2(j)) << ',' << format_double(v.v1(i, j))
          << ',' << format_double(v.v2(i, j)) << '\n';
    }
  }
}

std::string bundle_to_json(const SolutionBundle& b, const SolverConfig& c) {
  json j;
  j["mu"] = b.mu;
  j["energy_E"] = number_or_null(b.energy_E);
  j["core_energy_I"] = b.core_energy_I;
  j["penalty_J"] = number_or_null(b.penalty_J);
  j["mass"] = b.mass;
  j["residual_L1"] = b.residual_L1;
  j["psi_outside_max"] = number_or_null(b.psi_outside_max);
  j["psi_max_in_domain"] = number_or_null(b.psi_max_in_domain);
  j["support"] = {{"cells", b.support.cells},
                  {"diameter", b.support.diameter},
                  {"centroid", {number_or_null(b.support.centroid.x1), number_or_null(b.support.centroid.x2)}},
                  {"dist_to_boundary", b.support.dist_to_boundary},
                  {"aspect_ratio", b.support.aspect_ratio}};
  j["rho_final"] = number_or_null(b.rho_final);
  j["rho_escalations"] = b.rho_escalations;
  j["iterations"] = b.iterations;
  j["converged"] = b.converged;
  j["max_energy_drop"] = number_or_null(b.max_energy_drop);
  j["partial_cells"] = b.partial_cells;
  j["epsilon"] = c.epsilon;
  j["kappa"] = c.kappa;
  j["W"] = c.W;
  j["r"] = c.r;
  j["grid"] = {{"n1", c.grid.n1()}, {"n2", c.grid.n2()}, {"window", rect_to_json(c.grid.window())}};
  j["domain"] = rect_to_json(c.domain);
  return j.dump(2) + "\n";
}

void write_sweep_csv(const std::string& path, const std::vector<SweepRecord>& records) {
  auto out = open_out(path);
  out << "epsilon,lambda,mu,energy_E,core_energy_I,penalty_J,diameter,centroid_x1,centroid_x2,residual,"
         "converged\n";
  for (const auto& r : records) {
    out << format_double(r.epsilon) << ',' << format_double(r.lambda) << ',' << format_double(r.mu) << ','
        << format_double(r.energy_E) << ',' << format_double(r.core_energy_I) << ','
        << format_double(r.penalty_J) << ',' << format_double(r.diameter) << ','
        << format_double(r.centroid.x1) << ',' << format_double(r.centroid.x2) << ','
        << format_double(r.residual) << ',' << (r.converged ? 1 : 0) << '\n';
  }
}

std::string fit_to_json(Observable observable, const FitResult& fit, double kappa) {
  const double expected = expected_slope(observable, kappa);
  json j;
  j["observable"] = observable_name(observable);
  j["slope"] = fit.slope;
  j["intercept"] = fit.intercept;
  j["r_squared"] = fit.r_squared;
  j["n_points"] = fit.n_points;
  j["expected_slope"] = expected;
  j["relative_error"] = std::abs(fit.slope - expected) / expected;
  return j.dump(2) + "\n";
}

void write_text(const std::string& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace vpd
