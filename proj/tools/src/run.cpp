#include "l2t_cli/run.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <ostream>

#include "l2t/cellular.hpp"
#include "l2t/torsion.hpp"
#include "l2t_cli/io.hpp"

namespace l2t::cli {

const char* to_string(Command c) {
  switch (c) {
    case Command::Torsion: return "torsion";
    case Command::FkDet: return "fkdet";
    case Command::Density: return "density";
    case Command::DetClass: return "detclass";
    case Command::Checks: return "checks";
    case Command::Examples: return "examples";
  }
  return "?";
}

void validate(const RunConfig& cfg) {
  auto positive = [](const char* flag, double x) {
    if (!(x > 0) || !std::isfinite(x)) throw InputError(std::string(flag) + " must be positive");
  };
  positive("--tol-rank", cfg.tol_rank);
  positive("--tol-slack", cfg.tol_slack);
  if (cfg.tol_agree) positive("--tol-agree", *cfg.tol_agree);
  if (cfg.epsilon) positive("--epsilon", *cfg.epsilon);
  if (cfg.grid && *cfg.grid < 8) throw InputError("--grid must be at least 8");
  if (!cfg.backend.empty() && cfg.backend != "matrix" && cfg.backend != "group" && cfg.backend != "family")
    throw InputError("--backend must be one of matrix, group, family");
  switch (cfg.command) {
    case Command::Checks:
      if (cfg.suite != "all" && cfg.suite != "fk" && cfg.suite != "epsilon" && cfg.suite != "subdivision" &&
          cfg.suite != "exactseq")
        throw InputError("--suite must be one of all, fk, epsilon, subdivision, exactseq");
      break;
    case Command::Examples:
      if (cfg.out_dir.empty()) throw InputError("examples needs --out");
      break;
    default:
      if (cfg.complex_path.empty()) throw InputError(std::string(to_string(cfg.command)) + " needs --complex");
  }
}

namespace {

struct Prepared {
  ChainComplex complex;
  std::optional<CellComplex> cells;
  std::optional<Representation> rep;
  json input;
};

BackendKind expected_kind(const std::string& flag) {
  if (flag == "matrix") return BackendKind::Matrix;
  if (flag == "group") return BackendKind::FiniteGroup;
  return BackendKind::Family;
}

json rank_list(const ChainComplex& c) {
  json r = json::array();
  for (const auto& o : c.objects) r.push_back(o.dim_tau());
  return r;
}

Prepared prepare(const RunConfig& cfg) {
  Prepared p;
  Input in = read_input(cfg.complex_path);
  if (auto* c = std::get_if<ChainComplex>(&in)) {
    if (!cfg.rep_path.empty() || !cfg.backend.empty())
      throw InputError(cfg.complex_path + ": --rep and --backend apply to cell complexes only");
    p.complex = std::move(*c);
    p.input = {{"kind", "chain_complex"},
               {"backend", l2t::to_string(p.complex.backend()->kind())},
               {"fibers", p.complex.backend()->fiber_count()},
               {"first_degree", p.complex.first_degree},
               {"dim_tau", rank_list(p.complex)}};
    return p;
  }
  auto& cell = std::get<CellInput>(in);
  RepSpec spec;
  std::string source = "default";
  if (!cfg.rep_path.empty()) {
    spec = read_rep(cfg.rep_path);
    source = "file";
  } else if (cell.rep) {
    spec = *cell.rep;
    source = "embedded";
  } else if (cfg.backend == "matrix") {
    spec.kind = RepSpec::Kind::Trivial;
  }
  if (cfg.grid) spec.grid = cfg.grid;
  p.rep = build_representation(spec, cell.complex.pi, kDefaultGrid);
  if (!cfg.backend.empty() && p.rep->backend()->kind() != expected_kind(cfg.backend))
    throw InputError("--backend " + cfg.backend + " does not match the representation backend (" +
                     l2t::to_string(p.rep->backend()->kind()) + ")");
  try {
    p.complex = cochain_complex(cell.complex, *p.rep);
  } catch (const Error& e) {
    throw InputError(cfg.complex_path + ": " + e.what());
  }
  p.cells = std::move(cell.complex);
  json pi = p.cells->pi.infinite_cyclic ? json("infinite_cyclic")
                                        : json("finite of order " + std::to_string(p.cells->pi.table.size()));
  p.input = {{"kind", "cell_complex"},
             {"cells", p.cells->cells.size()},
             {"chi", p.cells->euler_characteristic},
             {"pi", pi},
             {"representation",
              {{"source", source},
               {"backend", l2t::to_string(p.rep->backend()->kind())},
               {"fibers", p.rep->backend()->fiber_count()},
               {"module_dim_tau", p.rep->module.dim_tau()},
               {"unimodular", p.rep->unimodular}}},
             {"dim_tau", rank_list(p.complex)}};
  return p;
}

json header(const RunConfig& cfg, const Prepared* p) {
  json grid = nullptr;
  if (p && p->complex.backend()->kind() == BackendKind::Family) grid = p->complex.backend()->fiber_count();
  if (!p && cfg.command == Command::Checks) grid = cfg.grid.value_or(kDefaultGrid);
  // Check suites use per-suite defaults unless the flag is given.
  json agree = cfg.tol_agree ? json(*cfg.tol_agree) : json(nullptr);
  if (!cfg.tol_agree && cfg.command == Command::Torsion) agree = TorsionOptions{}.agree_tol;
  auto opt_str = [](const std::string& s) { return s.empty() ? json(nullptr) : json(s); };
  json h = {{"tool", "l2torsion"},
            {"version", "0.1.0"},
            {"command", to_string(cfg.command)},
            {"complex", opt_str(cfg.complex_path)},
            {"rep", opt_str(cfg.rep_path)},
            {"backend", opt_str(cfg.backend)},
            {"grid", grid},
            {"epsilon", cfg.epsilon ? json(*cfg.epsilon) : json(nullptr)},
            {"tolerances",
             {{"rank", cfg.tol_rank},
              {"verdict_slack", cfg.tol_slack},
              {"agreement", agree}}},
            {"seed", cfg.seed}};
  if (cfg.command == Command::Checks) h["suite"] = cfg.suite;
  return h;
}

LadderConfig ladder(const RunConfig& cfg) {
  LadderConfig l;
  l.slack = cfg.tol_slack;
  return l;
}

TorsionOptions options(const RunConfig& cfg) {
  TorsionOptions o;
  o.epsilon = cfg.epsilon.value_or(0);
  o.rank_tol = cfg.tol_rank;
  o.agree_tol = cfg.tol_agree.value_or(o.agree_tol);
  o.ladder = ladder(cfg);
  return o;
}

void emit(const RunConfig& cfg, const std::string& name, const std::string& text, std::ostream& out,
          std::ostream& log) {
  if (cfg.out_dir.empty()) {
    out << text;
    return;
  }
  std::filesystem::create_directories(cfg.out_dir);
  const std::string path = (std::filesystem::path(cfg.out_dir) / name).string();
  write_text_file(path, text);
  log << "l2torsion: wrote " << path << "\n";
}

void emit_json(const RunConfig& cfg, const json& report, std::ostream& out, std::ostream& log) {
  emit(cfg, std::string(to_string(cfg.command)) + ".json", report.dump(2) + "\n", out, log);
}

bool all_convergent(const std::vector<DetClassVerdict>& v) {
  for (const auto& x : v)
    if (!x.convergent()) return false;
  return true;
}

int cmd_torsion(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  Prepared p = prepare(cfg);
  const TorsionOptions opt = options(cfg);
  const TorsionReport r = p.cells ? combinatorial_torsion(*p.cells, *p.rep, opt) : torsion(p.complex, opt);
  json degrees = json::array();
  for (size_t k = 0; k < r.detclass.size(); ++k)
    degrees.push_back({{"degree", p.complex.first_degree + static_cast<int>(k)},
                       {"betti", k < r.betti.size() ? number(r.betti[k]) : json(nullptr)},
                       {"verdict", write_verdict(r.detclass[k])}});
  const bool unavailable = !r.log_scalar && !r.determinant_class();
  const char* status = r.log_scalar ? "scalar" : unavailable ? "unavailable" : "line_element";
  json result = {{"status", status},
                 {"epsilon", number(r.epsilon)},
                 {"degrees", degrees},
                 {"determinant_class", r.determinant_class()},
                 {"combined", write_element(r.combined)},
                 {"rho_small", write_element(r.rho_small)},
                 {"log_rho_large", number(r.log_rho_large)},
                 {"reduced", r.reduced ? write_element(*r.reduced) : json(nullptr)},
                 {"log_scalar", r.log_scalar ? number(*r.log_scalar) : json(nullptr)},
                 {"scalar", r.log_scalar ? number(std::exp(*r.log_scalar)) : json(nullptr)},
                 {"consistency",
                  {{"epsilon_independent", r.eps_independence},
                   {"epsilon_check", number(r.epsilon_check)},
                   {"epsilon_discrepancy", number(r.eps_discrepancy)},
                   {"formulas_agree", r.formula_agreement},
                   {"formula_discrepancy", number(r.formula_discrepancy)}}}};
  emit_json(cfg, {{"header", header(cfg, &p)}, {"input", p.input}, {"result", result}}, out, log);
  if (unavailable) {
    log << "l2torsion: scalar torsion unavailable: determinant class not established\n";
    return kExitUnavailable;
  }
  return kExitOk;
}

int cmd_fkdet(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  Prepared p = prepare(cfg);
  const CohomologyProfile prof = cohomology(p.complex, cfg.tol_rank, ladder(cfg));
  const auto& deg = prof.degrees;
  json degrees = json::array();
  bool ok = true;
  for (size_t k = 0; k < deg.size(); ++k) {
    const auto& d = deg[k];
    ok = ok && d.verdict.convergent();
    // Delta_i has the nonzero spectrum of |d_i|^2 and |d_{i+1}|^2.
    const double in = d.verdict.log_integral;
    const double outgoing = k + 1 < deg.size() ? deg[k + 1].verdict.log_integral : 0.0;
    json e = {{"degree", d.degree},
              {"differential_into", k > 0 ? json(d.degree) : json(nullptr)},
              {"log_det", k > 0 ? number(in) : json(nullptr)},
              {"log_det_laplacian", number(2 * ((k > 0 ? in : 0.0) + outgoing))},
              {"betti", number(d.betti)},
              {"verdict", write_verdict(d.verdict)}};
    degrees.push_back(std::move(e));
  }
  emit_json(cfg, {{"header", header(cfg, &p)}, {"input", p.input}, {"result", {{"degrees", degrees}}}}, out, log);
  if (!ok) {
    log << "l2torsion: some determinants are unavailable (verdict not Convergent)\n";
    return kExitUnavailable;
  }
  return kExitOk;
}

std::string fmt_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

int cmd_density(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  Prepared p = prepare(cfg);
  std::string csv;
  const json h = header(cfg, &p);
  if (cfg.out_dir.empty()) csv += "# " + h.dump() + "\n";
  csv += "degree,lambda,phi\n";
  json degrees = json::array();
  for (int i = p.complex.first_degree + 1; i <= p.complex.last_degree(); ++i) {
    const SpectralDensity s = singular_density(*p.complex.into(i), cfg.tol_rank);
    const std::string deg = std::to_string(i) + ",";
    csv += deg + "0," + fmt_double(s.zero_mass) + "\n";
    double phi = s.zero_mass;
    for (const auto& [lam, mass] : s.breakpoints) {
      phi += mass;
      csv += deg + fmt_double(lam) + "," + fmt_double(phi) + "\n";
    }
    degrees.push_back({{"degree", i},
                       {"zero_mass", number(s.zero_mass)},
                       {"total_mass", number(s.total_mass())},
                       {"smallest_positive", s.empty() ? json(nullptr) : number(s.smallest_positive())},
                       {"largest", s.empty() ? json(nullptr) : number(s.largest())},
                       {"breakpoints", s.breakpoints.size()}});
  }
  emit(cfg, "density.csv", csv, out, log);
  if (!cfg.out_dir.empty())
    emit_json(cfg,
              {{"header", h},
               {"input", p.input},
               {"result", {{"density_of", "|d_i| for each differential d_i into degree i"},
                           {"csv", "density.csv"},
                           {"degrees", degrees}}}},
              out, log);
  return kExitOk;
}

int cmd_detclass(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  Prepared p = prepare(cfg);
  const auto v = determinant_class_test(p.complex, cfg.tol_rank, ladder(cfg));
  json degrees = json::array();
  for (size_t k = 0; k < v.size(); ++k)
    degrees.push_back({{"degree", p.complex.first_degree + static_cast<int>(k)}, {"verdict", write_verdict(v[k])}});
  emit_json(cfg,
            {{"header", header(cfg, &p)},
             {"input", p.input},
             {"result", {{"determinant_class", all_convergent(v)}, {"degrees", degrees}}}},
            out, log);
  return kExitOk;
}

int cmd_checks(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  bool pass = true;
  json suites = run_checks(cfg, pass);
  for (const auto& s : suites)
    log << "l2torsion: suite " << s["name"].get<std::string>() << (s["pass"].get<bool>() ? " PASS" : " FAIL")
        << "\n";
  emit_json(cfg, {{"header", header(cfg, nullptr)}, {"pass", pass}, {"suites", suites}}, out, log);
  return pass ? kExitOk : kExitFailed;
}

int cmd_examples(const RunConfig& cfg, std::ostream& log) {
  for (const auto& f : emit_examples(cfg.out_dir)) log << "l2torsion: wrote " << f << "\n";
  return kExitOk;
}

}  // namespace

int run(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  try {
    validate(cfg);
    switch (cfg.command) {
      case Command::Torsion: return cmd_torsion(cfg, out, log);
      case Command::FkDet: return cmd_fkdet(cfg, out, log);
      case Command::Density: return cmd_density(cfg, out, log);
      case Command::DetClass: return cmd_detclass(cfg, out, log);
      case Command::Checks: return cmd_checks(cfg, out, log);
      case Command::Examples: return cmd_examples(cfg, log);
    }
  } catch (const InputError& e) {
    log << "l2torsion: error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const ValidationError& e) {
    log << "l2torsion: invalid input: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const NotUnimodular& e) {
    log << "l2torsion: invalid input: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const ShapeError& e) {
    log << "l2torsion: invalid input: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    log << "l2torsion: error: " << e.what() << "\n";
    return kExitFailed;
  }
  return kExitFailed;
}

}  // namespace l2t::cli
