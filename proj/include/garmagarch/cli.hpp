#pragma once

// Command-line front end: fit, simulate, study, diagnose and check.
// Every artifact is written to a temporary file and renamed into place.
// Outputs carry no timestamps, so the same configuration and seed give
// byte-identical files.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "garmagarch/csv.hpp"
#include "garmagarch/diagnostics.hpp"
#include "garmagarch/engine.hpp"
#include "garmagarch/errors.hpp"
#include "garmagarch/estimate.hpp"
#include "garmagarch/model.hpp"
#include "garmagarch/random.hpp"
#include "garmagarch/simulate.hpp"
#include "garmagarch/stationarity.hpp"

namespace garmagarch::cli {

using Json = nlohmann::ordered_json;

enum class Command { fit, simulate, study, diagnose, check };

inline std::string_view to_string(Command c) {
  switch (c) {
    case Command::fit: return "fit";
    case Command::simulate: return "simulate";
    case Command::study: return "study";
    case Command::diagnose: return "diagnose";
    case Command::check: return "check";
  }
  return "?";
}

enum ExitCode : int { kOk = 0, kConfigError = 2, kDataError = 3, kNumericalError = 4 };

struct RunConfig {
  Command command = Command::fit;
  std::string family = "log_gamma";
  std::string variant = "garch";
  std::size_t p = 1, q = 1;
  std::optional<std::size_t> r, s;  // default 1 for GARMA-GARCH, 0 for M-GARMA
  std::string estimator = "mle";
  std::string input;
  std::string column = "0";
  double scale = 1.0;
  std::string output_dir = ".";
  std::uint64_t seed = 1;
  std::size_t reps = 200;
  std::size_t T = 2000;
  std::size_t burn_in = 500;
  std::vector<std::size_t> lags{1, 5, 22};
  std::optional<std::string> preset;
  std::size_t h_max = 64;
  /// Flat parameter vector in ModelSpec::parameter_names() order.
  std::optional<std::vector<double>> params;
  std::size_t threads = 1;
  std::optional<std::size_t> starts;

  void validate() const {
    if (!(scale > 0.0) || !std::isfinite(scale)) throw ConfigError("--scale must be positive");
    if (lags.empty()) throw ConfigError("--lags must name at least one lag");
    for (std::size_t m : lags) {
      if (m == 0) throw ConfigError("--lags entries must be positive");
    }
    if (h_max == 0) throw ConfigError("--h-max must be positive");
    if (threads == 0) throw ConfigError("--threads must be positive");
    if (starts && *starts == 0) throw ConfigError("--starts must be positive");
    if (preset && *preset != "table1" && *preset != "table2") {
      throw ConfigError("unknown preset '" + *preset + "' (expected table1 or table2)");
    }
    if (variant != "garch" && variant != "m_garma") {
      throw ConfigError("unknown variant '" + variant + "' (expected garch or m_garma)");
    }
  }
};

/// Parses argv into a RunConfig. CLI11 errors propagate as CLI::ParseError.
inline RunConfig parse_args(int argc, const char* const* argv) {
  RunConfig c;
  CLI::App app{"GARMA-GARCH models for non-Gaussian time series"};
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<std::size_t> r, s, starts;
  std::optional<std::string> preset;
  std::vector<double> params;
  app.add_option("--family", c.family, "log_gamma | logit_beta | ghsst");
  app.add_option("--variant", c.variant, "garch (GARMA-GARCH) | m_garma (M-GARMA baseline)");
  app.add_option("--p", c.p, "AR order");
  app.add_option("--q", c.q, "MA order");
  app.add_option("--r", r, "ARCH order");
  app.add_option("--s", s, "GARCH order");
  app.add_option("--estimator", c.estimator, "mle | gmle | gmle+pseudo");
  app.add_option("--input", c.input, "input CSV");
  app.add_option("--column", c.column, "column name or 0-based index");
  app.add_option("--scale", c.scale, "multiply observations by this factor");
  app.add_option("--output-dir", c.output_dir, "directory for reports and CSVs");
  app.add_option("--seed", c.seed, "master seed");
  app.add_option("--reps", c.reps, "Monte Carlo replications");
  app.add_option("--T", c.T, "simulated series length");
  app.add_option("--burn-in", c.burn_in, "discarded initial draws");
  app.add_option("--lags", c.lags, "portmanteau lags, comma separated")->delimiter(',');
  app.add_option("--preset", preset, "table1 | table2");
  app.add_option("--h-max", c.h_max, "largest h scanned by check");
  app.add_option("--params", params, "parameter vector, comma separated")->delimiter(',');
  app.add_option("--threads", c.threads, "study worker threads");
  app.add_option("--starts", starts, "optimizer starting points");

  std::vector<std::pair<CLI::App*, Command>> subs;
  subs.emplace_back(app.add_subcommand("fit", "estimate a model from a CSV column"), Command::fit);
  subs.emplace_back(app.add_subcommand("simulate", "simulate a series"), Command::simulate);
  subs.emplace_back(app.add_subcommand("study", "Monte Carlo study"), Command::study);
  subs.emplace_back(app.add_subcommand("diagnose", "diagnostics at given parameters"), Command::diagnose);
  subs.emplace_back(app.add_subcommand("check", "stationarity conditions"), Command::check);

  app.parse(argc, argv);
  for (const auto& [sub, cmd] : subs) {
    if (sub->parsed()) c.command = cmd;
  }
  c.r = r;
  c.s = s;
  c.starts = starts;
  c.preset = preset;
  if (!params.empty()) c.params = params;
  return c;
}

namespace detail {

inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw DataError("write to '" + tmp.string() + "' failed");
  }
  std::filesystem::rename(tmp, path);
}

inline void write_json(const std::filesystem::path& path, const Json& j) { write_atomic(path, j.dump(2) + "\n"); }

/// Finite doubles as numbers, everything else as null.
inline Json num(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

inline Json num(const std::optional<double>& x) { return x ? num(*x) : Json(nullptr); }

inline Json to_json(const TestResult& r) {
  return Json{{"statistic", num(r.statistic)},
              {"p_value", num(r.p_value)},
              {"df", r.df},
              {"available", r.available},
              {"note", r.note}};
}

inline Json unavailable_test(const std::string& note) {
  return Json{{"statistic", nullptr}, {"p_value", nullptr}, {"df", nullptr}, {"available", false}, {"note", note}};
}

inline Json model_json(const ModelSpec& spec) {
  return Json{{"family", to_string(spec.family)},
              {"variant", to_string(spec.variant)},
              {"orders", {{"p", spec.orders.p}, {"q", spec.orders.q}, {"r", spec.orders.r}, {"s", spec.orders.s}}}};
}

inline Json params_json(const ModelSpec& spec, const ParamVector& theta) {
  Json out = Json::object();
  const auto names = spec.parameter_names();
  const auto flat = theta.flatten(spec);
  for (std::size_t i = 0; i < names.size(); ++i) out[names[i]] = num(flat[i]);
  return out;
}

inline ModelSpec resolve_spec(const RunConfig& c) {
  if (c.preset) return preset(*c.preset).spec;
  const Variant v = c.variant == "m_garma" ? Variant::m_garma : Variant::garch;
  const std::size_t dflt = v == Variant::garch ? 1 : 0;
  ModelSpec spec{family_from_string(c.family), v, {c.p, c.q, c.r.value_or(dflt), c.s.value_or(dflt)}};
  spec.validate();
  return spec;
}

/// --params when given, else the preset truth.
inline ParamVector resolve_params(const RunConfig& c, const ModelSpec& spec) {
  ParamVector theta;
  if (c.params) {
    if (c.params->size() != spec.parameter_count()) {
      std::string names;
      for (const auto& n : spec.parameter_names()) names += (names.empty() ? "" : ",") + n;
      throw ConfigError("--params expects " + std::to_string(spec.parameter_count()) + " values (" + names + "), got " +
                        std::to_string(c.params->size()));
    }
    theta = ParamVector::unflatten(spec, *c.params);
  } else if (c.preset) {
    theta = preset(*c.preset).theta;
  } else {
    throw ConfigError(std::string(to_string(c.command)) + " needs --params or --preset");
  }
  try {
    theta.validate(spec);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("invalid parameters: ") + e.what());
  }
  return theta;
}

inline PreparedSeries load_input(const RunConfig& c, const ModelSpec& spec) {
  if (c.input.empty()) throw ConfigError(std::string(to_string(c.command)) + " needs --input");
  const auto y = ingest_csv(c.input, c.column, c.scale);
  return PreparedSeries::from(spec.family, y);
}

inline std::string csv_rows(const std::string& header, std::size_t n,
                            const std::function<std::vector<double>(std::size_t)>& row) {
  std::string out = header + "\n";
  for (std::size_t i = 0; i < n; ++i) {
    const auto vals = row(i);
    for (std::size_t j = 0; j < vals.size(); ++j) {
      if (j > 0) out += ',';
      out += format_number(vals[j]);
    }
    out += '\n';
  }
  return out;
}

/// Diagnostics block plus the four plot-data CSVs. When the full parameter
/// vector is unknown (plain GMLE with invariant parameters) every field is
/// still present and marked unavailable.
inline Json diagnostics_block(const ModelSpec& spec, const std::optional<ParamVector>& theta, const PreparedSeries& data,
                              const RunConfig& c, const std::filesystem::path& dir, Json& artifacts) {
  Json d;
  if (!theta) {
    const std::string note = "invariant parameters were not estimated; use --estimator mle or gmle+pseudo";
    d["available"] = false;
    d["note"] = note;
    for (const char* k : {"loglik", "aic", "bic", "rss"}) d[k] = nullptr;
    d["jb"] = unavailable_test(note);
    Json q = Json::object(), q2 = Json::object();
    for (std::size_t m : c.lags) {
      q[std::to_string(m)] = unavailable_test(note);
      q2[std::to_string(m)] = unavailable_test(note);
    }
    d["q"] = q;
    d["q2"] = q2;
    d["df_note"] = "";
    d["pp_failed"] = nullptr;
    return d;
  }
  const auto rep = diagnose(spec, *theta, data, c.lags);
  d["available"] = true;
  d["note"] = "";
  d["loglik"] = num(rep.loglik);
  d["aic"] = num(rep.aic);
  d["bic"] = num(rep.bic);
  d["rss"] = num(rep.rss);
  d["jb"] = to_json(rep.jb);
  Json q = Json::object(), q2 = Json::object();
  for (const auto& [m, r] : rep.q) q[std::to_string(m)] = to_json(r);
  for (const auto& [m, r] : rep.q2) q2[std::to_string(m)] = to_json(r);
  d["q"] = q;
  d["q2"] = q2;
  d["df_note"] = rep.df_note;
  d["pp_failed"] = rep.pp.failed.size();

  const auto out = filter(spec, *theta, data);
  const auto yhat = fitted_means(theta->family(spec), out);
  const std::size_t T = data.size();
  auto t1 = [](std::size_t t) { return static_cast<double>(t + 1); };
  write_atomic(dir / "fitted.csv", csv_rows("t,y,y_hat", T, [&](std::size_t t) {
                 return std::vector<double>{t1(t), data.y[t], yhat[t]};
               }));
  write_atomic(dir / "residuals.csv", csv_rows("t,resid,sigma", T, [&](std::size_t t) {
                 return std::vector<double>{t1(t), out.eps[t], std::sqrt(out.sigma2[t])};
               }));
  write_atomic(dir / "gamma.csv", csv_rows("t,gamma1,gamma2", T, [&](std::size_t t) {
                 return std::vector<double>{t1(t), out.gamma[t].first, out.gamma[t].second};
               }));
  write_atomic(dir / "pp.csv", csv_rows("u,nu", rep.pp.uniform.size(), [&](std::size_t i) {
                 return std::vector<double>{rep.pp.uniform[i], rep.pp.empirical[i]};
               }));
  for (const char* f : {"fitted.csv", "residuals.csv", "gamma.csv", "pp.csv"}) artifacts.push_back(f);
  return d;
}

inline FitConfig fit_config(const RunConfig& c, std::size_t default_starts) {
  FitConfig f;
  f.starts = c.starts.value_or(default_starts);
  return f;
}

inline int cmd_fit(const RunConfig& c, const std::filesystem::path& dir, std::ostream& out) {
  const auto spec = resolve_spec(c);
  const Method method = method_from_string(c.estimator);
  const auto data = load_input(c, spec);
  const auto rep = fit(spec, data, method, fit_config(c, FitConfig{}.starts));

  Json j;
  j["command"] = "fit";
  j["model"] = model_json(spec);
  j["estimator"] = to_string(method);
  j["input"] = c.input;
  j["column"] = c.column;
  j["scale"] = c.scale;
  j["T"] = rep.T;
  const bool full = rep.theta.invariant.size() == spec.invariant_size();
  Json est = Json::array();
  const auto flat = rep.theta.flatten(spec);  // recursion prefix only when phi was not estimated
  for (std::size_t i = 0; i < rep.names.size(); ++i) {
    const double v = i < flat.size() ? flat[i] : std::numeric_limits<double>::quiet_NaN();
    const bool has_se = rep.se.available && i < rep.se.se.size();
    est.push_back(Json{{"name", rep.names[i]}, {"value", num(v)}, {"se", has_se ? num(rep.se.se[i]) : Json(nullptr)}});
  }
  j["estimates"] = est;
  j["standard_errors"] = {{"available", rep.se.available},
                          {"diagnostic", rep.se.diagnostic},
                          {"hessian_asymmetry", num(rep.se.asymmetry)}};
  j["loglik"] = num(rep.loglik);
  j["aic"] = num(rep.aic);
  j["bic"] = num(rep.bic);
  j["gmle_q"] = num(rep.gmle_q);
  j["convergence"] = {{"converged", rep.converged}, {"iterations", rep.iterations}, {"message", rep.message}};
  Json artifacts = Json::array({"report.json"});
  j["diagnostics"] = diagnostics_block(spec, full ? std::optional(rep.theta) : std::nullopt, data, c, dir, artifacts);
  j["stationarity"] = nullptr;
  if (full && spec.has_variance_recursion()) {
    const auto v = check_stationarity(spec, rep.theta, c.h_max);
    j["stationarity"] = {{"theory_available", v.theory_available}, {"satisfied", v.satisfied}, {"message", v.message}};
  }
  j["artifacts"] = artifacts;
  write_json(dir / "report.json", j);

  out << "fit " << to_string(spec.family) << " " << to_string(spec.variant) << " by " << to_string(method) << ": "
      << (rep.converged ? "converged" : "not converged") << ", T = " << rep.T;
  if (rep.loglik) out << ", loglik = " << format_number(*rep.loglik);
  out << "\n";
  for (const auto& e : est) {
    out << "  " << e["name"].get<std::string>() << " = " << e["value"].dump();
    if (!e["se"].is_null()) out << " (" << e["se"].dump() << ")";
    out << "\n";
  }
  return kOk;
}

inline int cmd_diagnose(const RunConfig& c, const std::filesystem::path& dir, std::ostream& out) {
  const auto spec = resolve_spec(c);
  const auto theta = resolve_params(c, spec);
  const auto data = load_input(c, spec);
  Json j;
  j["command"] = "diagnose";
  j["model"] = model_json(spec);
  j["params"] = params_json(spec, theta);
  j["input"] = c.input;
  j["column"] = c.column;
  j["scale"] = c.scale;
  j["T"] = data.size();
  Json artifacts = Json::array({"report.json"});
  j["diagnostics"] = diagnostics_block(spec, theta, data, c, dir, artifacts);
  j["artifacts"] = artifacts;
  write_json(dir / "report.json", j);
  out << "diagnose: loglik = " << j["diagnostics"]["loglik"].dump() << ", rss = " << j["diagnostics"]["rss"].dump()
      << "\n";
  return kOk;
}

inline int cmd_simulate(const RunConfig& c, const std::filesystem::path& dir, std::ostream& out) {
  const auto spec = resolve_spec(c);
  const auto theta = resolve_params(c, spec);
  if (c.burn_in < 200) throw ConfigError("--burn-in must be at least 200");
  if (c.T == 0) throw ConfigError("--T must be positive");
  Rng rng(c.seed);
  const auto path = simulate_path(spec, theta, c.T, c.burn_in, rng);
  write_atomic(dir / "series.csv", csv_rows("y,mu,sigma2,eps", path.y.size(), [&](std::size_t t) {
                 return std::vector<double>{path.y[t], path.mu[t], path.sigma2[t], path.eps[t]};
               }));
  Json j;
  j["command"] = "simulate";
  j["model"] = model_json(spec);
  j["params"] = params_json(spec, theta);
  j["T"] = c.T;
  j["burn_in"] = c.burn_in;
  j["seed"] = c.seed;
  j["rng"] = kRngAlgorithm;
  j["artifacts"] = Json::array({"report.json", "series.csv"});
  write_json(dir / "report.json", j);
  out << "simulate: wrote " << c.T << " observations to " << (dir / "series.csv").string() << "\n";
  return kOk;
}

inline int cmd_study(const RunConfig& c, const std::filesystem::path& dir, std::ostream& out) {
  SimConfig cfg;
  if (c.preset) cfg = preset(*c.preset);
  cfg.spec = resolve_spec(c);
  cfg.theta = resolve_params(c, cfg.spec);
  cfg.include_mgarma = cfg.spec.variant == Variant::garch && cfg.spec.family != FamilyTag::ghsst;
  cfg.T = c.T;
  cfg.burn_in = c.burn_in;
  cfg.n_reps = c.reps;
  cfg.seed = c.seed;
  cfg.threads = c.threads;
  cfg.fit = fit_config(c, 1);
  cfg.validate();
  const auto summary = run_study(cfg);

  Json j;
  j["command"] = "study";
  j["preset"] = c.preset ? Json(*c.preset) : Json(nullptr);
  j["model"] = model_json(cfg.spec);
  j["truth"] = params_json(cfg.spec, cfg.theta);
  j["T"] = summary.T;
  j["burn_in"] = cfg.burn_in;
  j["reps"] = summary.n_reps;
  j["seed"] = summary.seed;
  j["rng"] = kRngAlgorithm;
  j["starts"] = cfg.fit.starts;
  std::string csv = "model,method,param,truth,mean,rmse,sd,mean_se,used,failed\n";
  Json cells = Json::array();
  for (const auto& cell : summary.cells) {
    Json rows = Json::array();
    for (std::size_t i = 0; i < cell.names.size(); ++i) {
      rows.push_back(Json{{"param", cell.names[i]},
                          {"truth", num(cell.truth[i])},
                          {"mean", num(cell.mean[i])},
                          {"rmse", num(cell.rmse[i])},
                          {"sd", num(cell.sd[i])},
                          {"mean_se", num(cell.mean_se[i])}});
      csv += cell.model + "," + std::string(to_string(cell.method)) + "," + cell.names[i] + "," +
             (cell.truth[i] ? format_number(*cell.truth[i]) : "") + "," + format_number(cell.mean[i]) + "," +
             format_number(cell.rmse[i]) + "," + format_number(cell.sd[i]) + "," + format_number(cell.mean_se[i]) +
             "," + std::to_string(cell.used) + "," + std::to_string(cell.failed) + "\n";
    }
    cells.push_back(Json{{"model", cell.model},
                         {"method", to_string(cell.method)},
                         {"used", cell.used},
                         {"failed", cell.failed},
                         {"rows", rows}});
  }
  j["cells"] = cells;
  j["artifacts"] = Json::array({"report.json", "study.csv"});
  write_atomic(dir / "study.csv", csv);
  write_json(dir / "report.json", j);

  out << "study: T = " << summary.T << ", reps = " << summary.n_reps << ", seed = " << summary.seed << "\n";
  for (const auto& cell : summary.cells) {
    out << "  " << cell.model << " / " << to_string(cell.method) << " (" << cell.used << " used)\n";
    for (std::size_t i = 0; i < cell.names.size(); ++i) {
      out << "    " << cell.names[i] << ": mean " << format_number(cell.mean[i]) << ", rmse "
          << format_number(cell.rmse[i]) << "\n";
    }
  }
  return kOk;
}

inline int cmd_check(const RunConfig& c, const std::filesystem::path& dir, std::ostream& out) {
  const auto spec = resolve_spec(c);
  const auto theta = resolve_params(c, spec);
  const auto v = check_stationarity(spec, theta, c.h_max);
  Json j;
  j["command"] = "check";
  j["model"] = model_json(spec);
  j["params"] = params_json(spec, theta);
  j["theory_available"] = v.theory_available;
  j["satisfied"] = v.satisfied;
  j["h_found"] = v.h_found ? Json(*v.h_found) : Json(nullptr);
  Json bk = Json::array(), ph = Json::array();
  for (double x : v.bk_norms) bk.push_back(num(x));
  for (double x : v.phi_power_norms) ph.push_back(num(x));
  j["bk_norms"] = bk;
  j["phi_power_norms"] = ph;
  j["root_check"] = v.root_check;
  j["phi_spectral_radius"] = num(v.phi_spectral_radius);
  j["message"] = v.message;
  j["artifacts"] = Json::array({"report.json"});
  write_json(dir / "report.json", j);
  out << "check: " << (v.satisfied ? "satisfied" : "not satisfied") << " (" << v.message << ")\n";
  return kOk;
}

inline std::pair<std::string, int> classify(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return {"config_error", kConfigError};
  if (dynamic_cast<const DataError*>(&e)) return {"data_error", kDataError};
  if (dynamic_cast<const DomainError*>(&e)) return {"data_error", kDataError};
  if (dynamic_cast<const SimulationError*>(&e)) return {"simulation_error", kNumericalError};
  if (dynamic_cast<const NumericalError*>(&e)) return {"numerical_error", kNumericalError};
  if (dynamic_cast<const std::filesystem::filesystem_error*>(&e)) return {"data_error", kDataError};
  return {"numerical_error", kNumericalError};
}

}  // namespace detail

/// Runs one command. Failures print {"error": {...}} to `err`, also write it
/// to error.json when the output directory exists, and map to exit codes
/// 2 (configuration), 3 (data or domain) and 4 (numerical or simulation).
inline int run(const RunConfig& config, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  const std::filesystem::path dir(config.output_dir);
  try {
    config.validate();
    std::filesystem::create_directories(dir);
    switch (config.command) {
      case Command::fit: return detail::cmd_fit(config, dir, out);
      case Command::simulate: return detail::cmd_simulate(config, dir, out);
      case Command::study: return detail::cmd_study(config, dir, out);
      case Command::diagnose: return detail::cmd_diagnose(config, dir, out);
      case Command::check: return detail::cmd_check(config, dir, out);
    }
    return kOk;
  } catch (const std::exception& e) {
    const auto [kind, code] = detail::classify(e);
    const Json j{{"error", {{"command", to_string(config.command)}, {"kind", kind}, {"message", e.what()},
                            {"exit_code", code}}}};
    err << j.dump() << "\n";
    std::error_code ec;
    if (std::filesystem::is_directory(dir, ec)) {
      try {
        detail::write_json(dir / "error.json", j);
      } catch (const std::exception&) {
      }
    }
    return code;
  }
}

/// argv entry point used by the garmagarch executable.
inline int main_entry(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  RunConfig config;
  try {
    config = parse_args(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << "usage: garmagarch {fit|simulate|study|diagnose|check} [options]\n"
           "  --family log_gamma|logit_beta|ghsst  --variant garch|m_garma\n"
           "  --p --q --r --s  --estimator mle|gmle|gmle+pseudo  --starts N\n"
           "  --input FILE --column NAME|INDEX --scale X  --output-dir DIR\n"
           "  --seed N --reps N --T N --burn-in N --threads N  --preset table1|table2\n"
           "  --lags 1,5,22  --h-max N  --params v1,v2,...\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    const Json j{{"error", {{"command", nullptr}, {"kind", "config_error"}, {"message", e.what()},
                            {"exit_code", static_cast<int>(kConfigError)}}}};
    err << j.dump() << "\n";
    return kConfigError;
  }
  return run(config, out, err);
}

}  // namespace garmagarch::cli
