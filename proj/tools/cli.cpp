#include "cli.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "vpd/vpd.hpp"

namespace vpd::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string hex_digest(const unsigned char* md, unsigned len) {
  std::ostringstream os;
  for (unsigned k = 0; k < len; ++k) os << std::hex << std::setw(2) << std::setfill('0') << int(md[k]);
  return os.str();
}

std::string timestamp() {
  std::time_t t = std::time(nullptr);
  if (const char* env = std::getenv("SOURCE_DATE_EPOCH")) t = static_cast<std::time_t>(std::atoll(env));
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json manifest_base(const std::string& command, const SolverConfig& config) {
  const std::string cfg = config_to_json(config);
  json m;
  m["artifact"] = "vpd";
  m["version"] = VPD_VERSION;
  m["command"] = command;
  m["created"] = timestamp();
  m["config"] = json::parse(cfg);
  m["config_sha256"] = sha256_text(cfg);
  m["grid"] = {{"n1", config.grid.n1()},
               {"n2", config.grid.n2()},
               {"h1", config.grid.h1()},
               {"h2", config.grid.h2()},
               {"window",
                {config.grid.window().x1_min, config.grid.window().x1_max, config.grid.window().x2_min,
                 config.grid.window().x2_max}}};
  m["outputs"] = json::array();
  return m;
}

void add_output(json& manifest, const fs::path& dir, const std::string& name) {
  manifest["outputs"].push_back({{"path", name}, {"sha256", sha256_file((dir / name).string())}});
}

bool prepare_dir(const std::string& out_dir, std::ostream& log) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    log << "error: cannot create output directory " << out_dir << ": " << ec.message() << "\n";
    return false;
  }
  return true;
}

struct CheckRow {
  std::string name;
  bool pass;
  double value;
  double limit;
};

}  // namespace

std::string sha256_text(const std::string& text) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned len = 0;
  EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr);
  return hex_digest(md, len);
}

std::string sha256_file(const std::string& path) { return sha256_text(read_text(path)); }

int cmd_solve(const std::string& config_path, const std::string& out_dir, std::ostream& log) {
  SolverConfig config;
  try {
    config = load_config(config_path);
  } catch (const std::exception& e) {
    log << "configuration error: " << e.what() << "\n";
    return kConfigError;
  }
  std::optional<SolutionBundle> solved;
  try {
    solved = solve(config);
  } catch (const ConfigError& e) {
    log << "configuration error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    log << "solve failed: " << e.what() << "\n";
    return kUnconverged;
  }
  if (!prepare_dir(out_dir, log)) return kConfigError;

  const SolutionBundle& bundle = *solved;
  const fs::path dir(out_dir);
  json manifest = manifest_base("solve", config);
  write_text((dir / "bundle.json").string(), bundle_to_json(bundle, config));
  write_field_csv((dir / "zeta.csv").string(), bundle.state.zeta);
  write_field_csv((dir / "psi.csv").string(), bundle.psi);
  write_velocity_csv((dir / "velocity.csv").string(), velocity_from_stream(bundle.psi));
  write_full_plane_csv((dir / "zeta_full.csv").string(), extend_odd(bundle.state.zeta));
  for (const char* name : {"bundle.json", "zeta.csv", "psi.csv", "velocity.csv", "zeta_full.csv"}) {
    add_output(manifest, dir, name);
  }
  write_text((dir / "manifest.json").string(), manifest.dump(2) + "\n");

  log << "converged: " << (bundle.converged ? "yes" : "no") << " after " << bundle.iterations
      << " iterations\n"
      << "mu = " << format_double(bundle.mu) << ", E = " << format_double(bundle.energy_E)
      << ", residual = " << format_double(bundle.residual_L1) << "\n";
  return bundle.converged ? kSuccess : kUnconverged;
}

int cmd_sweep(const std::string& config_path, const std::vector<double>& epsilons_in, const std::string& out_dir,
              std::ostream& log) {
  SolverConfig config;
  try {
    config = load_config(config_path);
  } catch (const std::exception& e) {
    log << "configuration error: " << e.what() << "\n";
    return kConfigError;
  }
  std::vector<double> epsilons = epsilons_in;
  std::sort(epsilons.begin(), epsilons.end(), std::greater<>());
  if (std::adjacent_find(epsilons.begin(), epsilons.end()) != epsilons.end()) {
    log << "configuration error: repeated epsilon values\n";
    return kConfigError;
  }
  if (epsilons.size() < 3) {
    log << "configuration error: the fits need at least three epsilon values\n";
    return kConfigError;
  }
  for (double e : epsilons) {
    SolverConfig c = config;
    c.epsilon = e;
    try {
      validate_config(c);
    } catch (const std::exception& ex) {
      log << "configuration error at epsilon = " << e << ": " << ex.what() << "\n";
      return kConfigError;
    }
  }
  if (!prepare_dir(out_dir, log)) return kConfigError;

  const SweepResult result = sweep(config, epsilons);
  const fs::path dir(out_dir);
  json manifest = manifest_base("sweep", config);
  manifest["epsilons"] = epsilons;
  write_sweep_csv((dir / "sweep.csv").string(), result.records);
  add_output(manifest, dir, "sweep.csv");

  bool all_converged = true;
  for (const auto& r : result.records) {
    if (!r.converged) {
      all_converged = false;
      log << "epsilon = " << r.epsilon << " did not converge" << (r.error.empty() ? "" : ": " + r.error)
          << "\n";
    }
  }
  try {
    for (Observable o : {Observable::mu, Observable::energy_E}) {
      const FitResult fit = fit_loglinear(result.records, o);
      const std::string name = "fit_" + observable_name(o) + ".json";
      write_text((dir / name).string(), fit_to_json(o, fit, config.kappa));
      add_output(manifest, dir, name);
      log << observable_name(o) << ": slope " << format_double(fit.slope) << " (expected "
          << format_double(expected_slope(o, config.kappa)) << "), r^2 " << format_double(fit.r_squared)
          << "\n";
    }
  } catch (const std::exception& e) {
    log << "fit failed: " << e.what() << "\n";
    all_converged = false;
  }
  write_text((dir / "manifest.json").string(), manifest.dump(2) + "\n");
  return all_converged ? kSuccess : kUnconverged;
}

int cmd_verify(const std::string& bundle_dir, std::ostream& log) {
  const fs::path dir(bundle_dir);
  json manifest, summary;
  SolverConfig config;
  ScalarField zeta(config.grid), psi_file(config.grid);
  try {
    manifest = json::parse(read_text((dir / "manifest.json").string()));
    summary = json::parse(read_text((dir / "bundle.json").string()));
    config = parse_config(manifest.at("config").dump());
    const auto& g = summary.at("grid");
    const auto w = g.at("window").get<std::vector<double>>();
    const GridSpec bundle_grid(Rect{w.at(0), w.at(1), w.at(2), w.at(3)}, g.at("n1").get<int>(),
                               g.at("n2").get<int>());
    if (!(bundle_grid == config.grid)) {
      log << "error: bundle grid does not match the manifest configuration\n";
      return kConfigError;
    }
    zeta = read_field_csv((dir / "zeta.csv").string(), config.grid, FieldRole::vorticity);
    psi_file = read_field_csv((dir / "psi.csv").string(), config.grid, FieldRole::stream);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kConfigError;
  }

  std::vector<CheckRow> rows;
  auto check = [&](const std::string& name, double value, double limit) {
    rows.push_back({name, value <= limit, value, limit});
  };

  for (const auto& out : manifest.at("outputs")) {
    const std::string name = out.at("path").get<std::string>();
    double mismatch = 1.0;
    try {
      mismatch = sha256_file((dir / name).string()) == out.at("sha256").get<std::string>() ? 0.0 : 1.0;
    } catch (const std::exception&) {
    }
    check("digest " + name, mismatch, 0.0);
  }

  Solver solver(config);
  const json& rho_json = summary.at("rho_final");
  const double rho = rho_json.is_null() ? std::numeric_limits<double>::infinity() : rho_json.get<double>();
  if (rho != solver.profile().rho()) solver.set_rho(rho);

  const double kappa = config.kappa;
  const double eps2 = solver.eps2();
  check("mass |int zeta - kappa| / kappa", std::abs(integrate(zeta) - kappa) / kappa, 1e-10);
  check("cap max zeta - sup f / eps^2", zeta.max() - solver.zeta_cap(), 0.0);
  check("symmetry (odd cells)", is_even_in_x2(zeta) ? 0.0 : 1.0, 0.0);
  double outside_mass = 0.0;
  for (std::size_t k = 0; k < zeta.size(); ++k) {
    if (!solver.in_domain(k)) outside_mass += std::abs(zeta[k]);
  }
  check("support inside D", outside_mass, 0.0);

  const ScalarField g = solver.green().apply(zeta);
  const MultiplierSolve ms = solver.solve_multiplier(g);
  const ScalarField psi = stream_from_potential(g, config.W, ms.mu);
  double psi_diff = 0.0, psi_scale = 0.0;
  for (std::size_t k = 0; k < psi.size(); ++k) {
    psi_diff = std::max(psi_diff, std::abs(psi[k] - psi_file[k]));
    psi_scale = std::max(psi_scale, std::abs(psi[k]));
  }
  check("stream matches G zeta - W x1 - mu", psi_diff / (1.0 + psi_scale), 1e-9);

  const ResidualReport rep = residual_L1(solver, zeta, psi, ms.mu, ms.partial_cells);
  check("residual L1 / kappa", rep.residual_L1 / kappa, config.tol_fixed_point);
  check("max psi off D", rep.psi_outside_max, 1e-10);

  std::vector<char> partial(zeta.size(), 0);
  for (std::size_t k : ms.partial_cells) partial[k] = 1;
  double fenchel = 0.0;
  const TruncatedProfile& prof = solver.profile();
  for (std::size_t k = 0; k < zeta.size(); ++k) {
    if (!(zeta[k] > 0.0) || partial[k]) continue;
    const double a = std::min(eps2 * zeta[k], prof.sup_f());
    const double prod = a * psi[k];
    fenchel = std::max(fenchel, std::abs(prof.J(a) + prof.F(psi[k]) - prod) / (1.0 + std::abs(prod)));
  }
  check("Fenchel identity on core", fenchel, 1e-8);

  const EnergyParts e = solver.energy_parts(zeta, g);
  const double I = inner_product(zeta, psi);
  const double lhs = 2.0 * e.total;
  const double rhs = I - e.linear - 2.0 * e.penalty + ms.mu * integrate(zeta);
  check("energy identity", std::abs(lhs - rhs) / std::max(std::abs(lhs), 1e-300), 1e-8);

  auto summary_diff = [&](const char* key, double value) {
    const json& v = summary.at(key);
    const double s = v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
    const double d = std::abs(s - value) / (1.0 + std::abs(value));
    check(std::string("summary ") + key, std::isnan(d) ? 1.0 : d, 1e-9);
  };
  summary_diff("mu", ms.mu);
  summary_diff("energy_E", e.total);
  summary_diff("mass", integrate(zeta));
  summary_diff("core_energy_I", I);

  bool ok = true;
  log << std::left << std::setw(40) << "check" << std::setw(8) << "status" << std::setw(26) << "value"
      << "limit\n";
  for (const auto& r : rows) {
    ok = ok && r.pass;
    log << std::left << std::setw(40) << r.name << std::setw(8) << (r.pass ? "PASS" : "FAIL") << std::setw(26)
        << format_double(r.value) << format_double(r.limit) << "\n";
  }
  return ok ? kSuccess : kVerificationFailed;
}

}  // namespace vpd::cli
