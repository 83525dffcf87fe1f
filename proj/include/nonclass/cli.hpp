#ifndef NONCLASS_CLI_HPP
#define NONCLASS_CLI_HPP

// The `nonclass` command line. Exit codes: 0 certified / detected / valid,
// 1 not certified / undetected / invalid, 2 usage or input error.

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "nonclass/catalog.hpp"
#include "nonclass/certify.hpp"
#include "nonclass/detect.hpp"
#include "nonclass/io.hpp"

namespace nonclass::cli {

enum Exit : int { ok = 0, negative = 1, error = 2 };

/// Everything a subcommand needs; filled from flags and an optional config file.
struct RunConfig {
  std::string subcommand;
  std::vector<std::string> inputs;
  std::string method = "reznick";
  int level = 0;
  int b_max = 3;
  int rays = 64;
  std::string norm = "gram";
  std::string system;  // light or spin, inferred from the input when empty
  int degree = 4;      // light witness degree D
  int n_max = 10;
  int d_tilde = 6;
  double tol = 1e-7;
  std::string out;
  unsigned jobs = 0;  // 0: machine parallelism
  unsigned seed = 0;
};

namespace detail {

inline void emit(const RunConfig& cfg, const io::json& j, std::ostream& out) {
  if (cfg.out.empty()) {
    out << j.dump(2) << '\n';
  } else {
    io::write_file(cfg.out, j);
  }
}

inline Method light_or_spin_method(const RunConfig& cfg) {
  if (cfg.method == "sos") return Method::reznick(0);
  if (cfg.method == "reznick") return Method::reznick(cfg.level);
  if (cfg.method == "pfr") return Method::pfr(cfg.level);
  if (cfg.method == "rays") {
    if (cfg.rays < 1) throw Error("--rays must be positive");
    return Method::rays(uniform_angles(cfg.rays));
  }
  throw Error("unknown method '" + cfg.method + "'");
}

inline RealBivarPoly named_or_file_polynomial(const std::string& arg) {
  for (const auto& e : catalog_entries())
    if (e.name == arg && e.kind == EntryKind::polynomial) return std::get<RealBivarPoly>(e.payload);
  return io::any_polynomial_as_real(io::parse_file(arg));
}

inline std::string fmt(double v) {
  if (!std::isfinite(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// certify

inline int cmd_certify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.inputs.size() != 1) throw Error("certify expects one polynomial file");
  const io::json pj = io::parse_file(cfg.inputs[0]);
  CertifyOutcome r;
  if (cfg.method == "sos") {
    r = certify_sos(io::any_polynomial_as_real(pj));
  } else if (cfg.method == "reznick") {
    r = certify_reznick(io::any_polynomial_as_real(pj), cfg.b_max);
  } else if (cfg.method == "pfr") {
    r = certify_pfr(io::any_polynomial_as_hermitian(pj), cfg.b_max);
  } else if (cfg.method == "rays") {
    // necessary condition only: can refute, never certify
    const auto verdicts = check_lines(io::any_polynomial_as_hermitian(pj), uniform_angles(cfg.rays));
    io::json lines = io::json::array();
    bool refuted = false;
    for (const auto& v : verdicts) {
      lines.push_back({{"angle", v.angle}, {"nonnegative", v.nonnegative}});
      refuted = refuted || !v.nonnegative;
    }
    detail::emit(cfg, {{"certified", false}, {"refuted", refuted}, {"lines", lines}}, out);
    err << (refuted ? "refuted on a line\n" : "nonnegative on every line (necessary condition only)\n");
    return negative;
  } else {
    throw Error("unknown method '" + cfg.method + "'");
  }
  io::json attempts = io::json::array();
  for (const auto& [lvl, st] : r.attempts) attempts.push_back({{"level", lvl}, {"status", sdp::to_string(st)}});
  io::json j = {{"certified", r.certified}, {"method", cfg.method}, {"attempts", attempts}, {"message", r.message}};
  if (r.certificate) j["certificate"] = io::to_json(*r.certificate);
  // --out receives the bare certificate so that `verify` can read it back
  if (!cfg.out.empty() && r.certificate) io::write_file(cfg.out, io::to_json(*r.certificate));
  out << j.dump(2) << '\n';
  if (r.certified) {
    err << "certified at level " << r.certificate->level << '\n';
    return ok;
  }
  err << "not certified: " << r.message << '\n';
  return negative;
}

// ---------------------------------------------------------------------------
// verify

inline int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.inputs.size() != 2) throw Error("verify expects a certificate file and a polynomial file");
  const Certificate c = io::certificate_from_json(io::parse_file(cfg.inputs[0]));
  const io::json pj = io::parse_file(cfg.inputs[1]);
  VerifyReport rep;
  switch (c.kind) {
    case CertificateKind::sos_gram:
    case CertificateKind::reznick: {
      const RealBivarPoly f = io::any_polynomial_as_real(pj);
      // Gram side C(h + 2, 2) must cover degree(f) + 2b
      const int half = static_cast<int>(c.matrices.front().rows());
      int h = 0;
      while (static_cast<int>(monomials_up_to(h).size()) < half) ++h;
      if (static_cast<int>(monomials_up_to(h).size()) != half || std::max(0, f.degree()) + 2 * c.level > 2 * h)
        throw Error("certificate size does not match the polynomial degree");
      rep = verify_certificate(c, f);
      break;
    }
    case CertificateKind::pfr: {
      const HermBivarPoly p = io::any_polynomial_as_hermitian(pj);
      const int radial = std::max(0, p.degree()) + c.level + 1;
      for (int s : c.block_index)
        if (s < 0 || s >= radial) throw Error("certificate size does not match the polynomial degree");
      rep = verify_certificate(c, p);
      break;
    }
    case CertificateKind::rays:
      rep = verify_certificate(c, io::any_polynomial_as_hermitian(pj));
      break;
    default:
      throw Error("certificate kind " + to_string(c.kind) + " does not apply to a bivariate polynomial");
  }
  out << io::json{{"ok", rep.ok},
                  {"residual", rep.residual},
                  {"scale", rep.scale},
                  {"min_eigenvalue", rep.min_eigenvalue},
                  {"message", rep.message}}
             .dump(2)
      << '\n';
  err << (rep.ok ? "certificate valid\n" : "certificate invalid: " + rep.message + "\n");
  return rep.ok ? ok : negative;
}

// ---------------------------------------------------------------------------
// detect

inline int cmd_detect(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.inputs.size() != 1) throw Error("detect expects one state or moment file");
  const io::json j = io::parse_file(cfg.inputs[0]);
  const std::string kind = io::kind_of(j);
  const std::string system = kind == "dicke" ? "spin" : "light";
  if (kind != "dicke" && kind != "fock" && kind != "moments")
    throw Error("detect: unsupported input kind '" + kind + "'");
  if (!cfg.system.empty() && cfg.system != system)
    throw Error("detect: input of kind '" + kind + "' is a " + system + " system");
  const Method method = detail::light_or_spin_method(cfg);
  const bool bound = method.kind == Hierarchy::rays;

  DetectionResult r;
  if (system == "spin") {
    if (cfg.norm != "gram") throw Error("detect: spin problems are normalised by the trace");
    r = detect_spin(io::dicke_state_from_json(j), method);
  } else {
    const MomentTable t = kind == "fock" ? moments_from_fock(io::fock_state_from_json(j), cfg.degree)
                                         : io::moment_table_from_json(j);
    Normalization norm;
    if (cfg.norm == "reference") {
      norm = Normalization::reference_state(fock_state(0).state, cfg.degree);
    } else if (cfg.norm != "gram") {
      throw Error("unknown normalisation '" + cfg.norm + "'");
    }
    LightOptions o;
    o.method = method;
    o.norm = norm;
    r = detect_light(t, cfg.degree, o);
  }
  io::json res = io::to_json(r);
  res["detected"] = !bound && r.detected(cfg.tol);
  res["system"] = system;
  if (bound) res["bound"] = "lower";
  detail::emit(cfg, res, out);
  if (!r.optimal()) {
    err << "solver did not converge: " << r.message << '\n';
    return error;
  }
  if (bound) {
    err << "lower bound " << detail::fmt(r.value) << " (a bound cannot prove detection)\n";
    return negative;
  }
  err << (r.detected(cfg.tol) ? "detected" : "not detected") << ", value " << detail::fmt(r.value) << '\n';
  return r.detected(cfg.tol) ? ok : negative;
}

// ---------------------------------------------------------------------------
// hidden, map, catalog

inline int cmd_hidden(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.inputs.size() != 1) throw Error("hidden expects a polynomial name or file");
  const HiddenState h = construct_hidden_state(detail::named_or_file_polynomial(cfg.inputs[0]), cfg.n_max, cfg.d_tilde);
  if (h.status != sdp::SolveStatus::optimal) {
    err << "solver did not converge: " << h.message << '\n';
    return error;
  }
  detail::emit(cfg,
               {{"value", h.value},
                {"moment_matrix_min_eig", h.moment_matrix_min_eig},
                {"n_max", cfg.n_max},
                {"d_tilde", cfg.d_tilde},
                {"state", io::to_json(h.state)}},
               out);
  err << "<W> = " << detail::fmt(h.value) << '\n';
  return h.value < -cfg.tol ? ok : negative;
}

inline int cmd_map(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  if (cfg.inputs.size() != 1) throw Error("map expects one observable file");
  const SpinObservable v = io::spin_observable_from_json(io::parse_file(cfg.inputs[0]));
  const HermBivarPoly w = spin_to_light_witness(v);
  const auto flags = support_inclusion_check(w, v.m());
  detail::emit(cfg,
               {{"light_witness", io::to_json(w)},
                {"stereographic", io::to_json(stereographic_poly(v))},
                {"in_p_m", flags.in_p_m},
                {"in_s_m", flags.in_s_m},
                {"in_p_2m", flags.in_p_2m}},
               out);
  return ok;
}

inline io::json catalog_payload(const NamedEntry& e) {
  return std::visit([](const auto& p) { return io::to_json(p); }, e.payload);
}

inline int cmd_catalog(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  if (cfg.inputs.empty() || cfg.inputs[0] == "list") {
    for (const auto& e : catalog_entries()) out << e.name << '\t' << to_string(e.kind) << '\t' << e.description << '\n';
    return ok;
  }
  if (cfg.inputs[0] != "dump" || cfg.inputs.size() != 2) throw Error("usage: catalog list | catalog dump NAME");
  detail::emit(cfg, catalog_payload(catalog_lookup(cfg.inputs[1])), out);
  return ok;
}

// ---------------------------------------------------------------------------
// reproduce

struct CurvePoint {
  double x = 0.0;
  double value = std::nan("");
  std::string method;
  int level = 0;
};

/// Runs independent jobs on a pool of `jobs` threads; results keep job order.
inline std::vector<CurvePoint> run_pool(std::vector<std::function<CurvePoint()>> tasks, unsigned jobs) {
  std::vector<CurvePoint> out(tasks.size());
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(1, tasks.size())));
  std::atomic<std::size_t> next{0};
  std::mutex fail_mu;
  std::exception_ptr failure;
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        out[i] = tasks[i]();
      } catch (...) {
        std::lock_guard<std::mutex> lock(fail_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < jobs; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

inline CurvePoint hidden_point(const std::string& name, const RealBivarPoly& f, int n_max, int d_tilde) {
  const HiddenState h = construct_hidden_state(f, n_max, d_tilde);
  CurvePoint p{static_cast<double>(n_max), std::nan(""), name, d_tilde};
  if (h.status == sdp::SolveStatus::optimal) p.value = h.value;
  return p;
}

inline std::vector<CurvePoint> reproduce(const std::string& figure, unsigned jobs) {
  std::vector<std::function<CurvePoint()>> tasks;
  if (figure == "fig2") {
    for (int d : {6, 8, 10})
      for (int n = 4; n <= 14; ++n) tasks.emplace_back([=] { return hidden_point("motzkin", motzkin(), n, d); });
  } else if (figure == "robinson-choi-lam") {
    for (int d : {6, 8, 10})
      for (int n = 4; n <= 14; ++n) {
        tasks.emplace_back([=] { return hidden_point("robinson", robinson(), n, d); });
        tasks.emplace_back([=] { return hidden_point("choi-lam", choi_lam(), n, d); });
      }
  } else if (figure == "fig3b") {
    const DickeState s = tura_state(1.0, 1, 8);
    for (int b = 1; b <= 40; ++b)
      tasks.emplace_back([=] {
        const auto r = detect_spin(s, Method::pfr(b));
        return CurvePoint{static_cast<double>(b), r.optimal() ? r.value : std::nan(""), "pfr", b};
      });
    tasks.emplace_back([=] {
      const auto r = detect_spin_lower(s, uniform_angles(128));
      return CurvePoint{0.0, r.optimal() ? r.value : std::nan(""), "rays", 128};
    });
  } else {
    throw Error("unknown figure '" + figure + "' (fig2, fig3b, robinson-choi-lam)");
  }
  return run_pool(std::move(tasks), jobs);
}

inline int cmd_reproduce(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  if (cfg.inputs.size() != 1) throw Error("reproduce expects one figure id");
  const auto pts = reproduce(cfg.inputs[0], cfg.jobs);
  std::ostringstream csv;
  csv << "x,value,method,level\n";
  for (const auto& p : pts) csv << detail::fmt(p.x) << ',' << detail::fmt(p.value) << ',' << p.method << ',' << p.level << '\n';
  if (cfg.out.empty()) {
    out << csv.str();
  } else {
    std::ofstream f(cfg.out);
    if (!f) throw Error("cannot write '" + cfg.out + "'");
    f << csv.str();
  }
  return ok;
}

// ---------------------------------------------------------------------------
// Entry point

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Nonclassicality witnesses from nonnegative polynomials", "nonclass"};
  app.set_config("--config", "", "TOML/INI file with default flag values; flags on the command line win");
  app.require_subcommand(1);
  RunConfig cfg;

  auto add_common = [&cfg](CLI::App* sub) {
    sub->add_option("--out", cfg.out, "Output path (stdout when omitted)");
    sub->add_option("--tol", cfg.tol, "Detection threshold: detected iff value < -tol")->check(CLI::NonNegativeNumber);
    sub->add_option("--seed", cfg.seed, "Seed recorded for reproducibility; all solves are deterministic");
  };
  auto add_method = [&cfg](CLI::App* sub) {
    sub->add_option("--method", cfg.method, "Certificate hierarchy")
        ->check(CLI::IsMember({"sos", "reznick", "pfr", "rays"}));
    sub->add_option("--rays", cfg.rays, "Number of lines for the rays method")->check(CLI::PositiveNumber);
  };

  auto* certify = app.add_subcommand("certify", "Certify nonnegativity of a polynomial");
  certify->add_option("polynomial", cfg.inputs, "Polynomial JSON")->required();
  add_method(certify);
  certify->add_option("--b-max", cfg.b_max, "Highest hierarchy level to try")->check(CLI::NonNegativeNumber);
  add_common(certify);

  auto* verify = app.add_subcommand("verify", "Check a certificate against a polynomial without a solver");
  verify->add_option("files", cfg.inputs, "Certificate JSON, then polynomial JSON")->required()->expected(2);
  add_common(verify);

  auto* detect = app.add_subcommand("detect", "Search for a witness that detects a state or moment table");
  detect->add_option("input", cfg.inputs, "State or moment JSON")->required();
  add_method(detect);
  detect->add_option("--level", cfg.level, "Hierarchy level b")->check(CLI::NonNegativeNumber);
  detect->add_option("--norm", cfg.norm, "Light normalisation")->check(CLI::IsMember({"gram", "reference"}));
  detect->add_option("--system", cfg.system, "light or spin (inferred from the input)")
      ->check(CLI::IsMember({"light", "spin"}));
  detect->add_option("--degree", cfg.degree, "Light witness degree D")->check(CLI::NonNegativeNumber);
  add_common(detect);

  auto* hidden = app.add_subcommand("hidden", "Construct a state hidden from moment tests of degree d-tilde");
  hidden->add_option("polynomial", cfg.inputs, "Catalog name (motzkin, robinson, choi-lam) or JSON file")->required();
  hidden->add_option("--n-max", cfg.n_max, "Photon-number cutoff")->check(CLI::NonNegativeNumber);
  hidden->add_option("--d-tilde", cfg.d_tilde, "Moment-matrix degree")->check(CLI::NonNegativeNumber);
  add_common(hidden);

  auto* map = app.add_subcommand("map", "Map a symmetric spin observable to a light witness");
  map->add_option("observable", cfg.inputs, "Dicke observable JSON")->required();
  add_common(map);

  auto* reproduce_cmd = app.add_subcommand("reproduce", "Write curve data as CSV (x,value,method,level)");
  reproduce_cmd->add_option("figure", cfg.inputs, "fig2, fig3b or robinson-choi-lam")->required();
  reproduce_cmd->add_option("--jobs", cfg.jobs, "Worker threads (default: machine parallelism)");
  add_common(reproduce_cmd);

  auto* catalog = app.add_subcommand("catalog", "List or dump the built-in polynomials, observables and states");
  catalog->add_option("args", cfg.inputs, "list | dump NAME");
  add_common(catalog);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return error;
  }

  try {
    const CLI::App* sub = app.get_subcommands().front();
    cfg.subcommand = sub->get_name();
    if (cfg.subcommand == "certify") return cmd_certify(cfg, out, err);
    if (cfg.subcommand == "verify") return cmd_verify(cfg, out, err);
    if (cfg.subcommand == "detect") return cmd_detect(cfg, out, err);
    if (cfg.subcommand == "hidden") return cmd_hidden(cfg, out, err);
    if (cfg.subcommand == "map") return cmd_map(cfg, out, err);
    if (cfg.subcommand == "reproduce") return cmd_reproduce(cfg, out, err);
    return cmd_catalog(cfg, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return error;
  }
}

}  // namespace nonclass::cli

#endif  // NONCLASS_CLI_HPP
