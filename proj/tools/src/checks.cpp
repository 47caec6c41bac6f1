#include <cmath>
#include <functional>

#include "l2t/cellular.hpp"
#include "l2t/random.hpp"
#include "l2t_cli/run.hpp"

namespace l2t::cli {

using json = nlohmann::json;
using namespace l2t::gen;

namespace {

struct Suite {
  std::string name;
  int cases = 0;
  int failures = 0;
  double max_defect = 0;
  double tolerance = 0;
  json detail = json::object();

  void record(double defect, double tol) {
    ++cases;
    if (!(std::abs(defect) <= tol)) ++failures;
    max_defect = std::max(max_defect, std::isfinite(defect) ? std::abs(defect) : INFINITY);
  }
  json to_json() const {
    return {{"name", name},
            {"pass", failures == 0 && cases > 0},
            {"cases", cases},
            {"failures", failures},
            {"max_defect", std::isfinite(max_defect) ? json(max_defect) : json(nullptr)},
            {"tolerance", tolerance},
            {"detail", detail}};
  }
};

Suite fk_suite(const RunConfig& cfg) {
  Suite s{"fk"};
  s.tolerance = cfg.tol_agree.value_or(1e-8);
  const double exact_tol = cfg.tol_agree.value_or(1e-10);
  Rng rng(cfg.seed);
  double laws[4] = {0, 0, 0, 0};
  for (auto kind : {BackendKind::Matrix, BackendKind::FiniteGroup, BackendKind::Family})
    for (int rep = 0; rep < 50; ++rep) {
      auto b = random_backend(rng, kind);
      const int n = uniform_int(rng, 1, 3);
      Morphism a = random_invertible(rng, b, n), c = random_invertible(rng, b, n);
      const double mult = log_fk_det(compose(a, c)) - log_fk_det(a) - log_fk_det(c);

      const cplx lam = std::polar(uniform(rng, 0.2, 3.0), uniform(rng, 0.0, 6.28));
      const HObject x = HObject::free(b, n);
      const double scalar = log_fk_det(scaled(identity(x), lam)) - x.dim_tau() * std::log(std::abs(lam));

      const int m = uniform_int(rng, 1, 2);
      Morphism d = random_invertible(rng, b, m);
      Morphism block = vstack(hstack(a, random_morphism(rng, b, n, m)),
                              hstack(zero_morphism(HObject::free(b, n), HObject::free(b, m)), d));
      const double tri = log_fk_det(block) - log_fk_det(a) - log_fk_det(d);

      const double t = uniform(rng, 0.3, 3.0);
      auto bs = b->rescaled(b->scale() * t);
      const double scale =
          log_fk_det(from_fibers(HObject::free(bs, n), HObject::free(bs, n), a.fibers)) - t * log_fk_det(a);

      s.record(mult, s.tolerance);
      s.record(scalar, exact_tol);
      s.record(tri, s.tolerance);
      s.record(scale, exact_tol);
      const double v[4] = {mult, scalar, tri, scale};
      for (int k = 0; k < 4; ++k) laws[k] = std::max(laws[k], std::abs(v[k]));
    }
  s.detail = {{"multiplicativity", laws[0]}, {"scalar", laws[1]}, {"block_triangular", laws[2]}, {"scale", laws[3]}};
  return s;
}

Suite epsilon_suite(const RunConfig& cfg) {
  Suite s{"epsilon"};
  s.tolerance = cfg.tol_agree.value_or(1e-8);
  Rng rng(cfg.seed + 1);
  int frames = 0;
  for (int rep = 0; rep < 30; ++rep) {
    auto b = random_backend(rng, static_cast<BackendKind>(rep % 3));
    ChainComplex c = random_complex(rng, b, random_shape(rng, 4, 2, false), 0, 0.05, 5.0);
    double lo = 1e300, hi = 0;
    for (int i = c.first_degree + 1; i <= c.last_degree(); ++i) {
      SpectralDensity d = singular_density(*c.into(i), cfg.tol_rank);
      if (d.empty()) continue;
      lo = std::min(lo, d.smallest_positive());
      hi = std::max(hi, d.largest());
    }
    TorsionOptions a, z;
    a.rank_tol = z.rank_tol = cfg.tol_rank;
    if (hi > 0) {
      a.epsilon = 0.5 * lo * lo;
      z.epsilon = std::min(0.5 * (lo * lo + hi * hi), 0.99 * hi * hi);
    } else {
      a.epsilon = 0.1;
      z.epsilon = 1.0;
    }
    const TorsionReport ra = torsion(c, a), rz = torsion(c, z);
    const bool same = same_frame(ra.combined, rz.combined);
    if (!same) ++frames;
    s.record(same ? (ra.combined.log_coeff - rz.combined.log_coeff) / std::max(1.0, std::abs(ra.combined.log_coeff))
                  : INFINITY,
             s.tolerance);
  }
  s.detail = {{"frame_mismatches", frames}};
  return s;
}

Suite subdivision_suite(const RunConfig& cfg) {
  Suite s{"subdivision"};
  const double tol_matrix = cfg.tol_agree.value_or(1e-9), tol_family = cfg.tol_agree.value_or(1e-6);
  s.tolerance = tol_matrix;
  const int grid = cfg.grid.value_or(kDefaultGrid);
  struct Case {
    const char* name;
    CellComplex k;
    Representation rep;
    double tol;
  };
  const Case cases[] = {
      {"circle/lambda=-1", examples::circle(), examples::lambda_rep(-1.0), tol_matrix},
      {"circle/regular", examples::circle(), examples::circle_regular(grid), tol_family},
      {"torus/twisted", examples::torus(), examples::lambda_rep(std::polar(1.0, 1.1)), tol_matrix},
      {"L(5,1)/zeta", examples::lens(5, 1), examples::lens_zeta(5), tol_matrix},
      {"L(5,1)/regular", examples::lens(5, 1), examples::lens_regular(5), tol_matrix},
  };
  for (const auto& c : cases) {
    SubdivisionCheck r = subdivision_invariance_check(c.k, c.rep, 3, cfg.seed, c.tol);
    s.record(r.pass ? 0.0 : INFINITY, 0.0);
    s.max_defect = std::max(s.max_defect, r.max_defect);
    s.detail[c.name] = {{"max_defect", r.max_defect}, {"tolerance", c.tol}, {"cells", r.subdivided},
                        {"pass", r.pass}};
  }
  return s;
}

Suite exactseq_suite(const RunConfig& cfg) {
  Suite s{"exactseq"};
  s.tolerance = cfg.tol_agree.value_or(1e-6);
  Rng rng(cfg.seed + 2);
  auto b = Backend::matrix();
  int les_fail = 0, cone_fail = 0;
  for (int rep = 0; rep < 30; ++rep) {
    const int len = uniform_int(rng, 2, 4);
    auto shape = [&](bool acyclic) {
      ComplexShape sh;
      for (int k = 0; k + 1 < len; ++k) sh.ranks.push_back(uniform_int(rng, acyclic ? 1 : 0, 2));
      for (int k = 0; k < len; ++k) sh.betti.push_back(acyclic ? 0 : uniform_int(rng, 0, 1));
      return sh;
    };
    const int which = rep % 3;
    ChainComplex l = random_complex(rng, b, shape(which != 1));
    ChainComplex n = random_complex(rng, b, shape(which != 0));
    ExactTriple t = random_triple(rng, l, n, true, true);
    LesCheck c = les_connecting_iso(t.l, t.m, t.n, t.alpha, t.beta, cfg.tol_rank, s.tolerance);
    if (!c.pass) ++les_fail;
    s.record(c.pass ? c.lhs - c.rhs : INFINITY, s.tolerance);
  }
  for (int rep = 0; rep < 30; ++rep) {
    const int len = uniform_int(rng, 2, 4);
    auto shape = [&]() {
      ComplexShape sh;
      for (int k = 0; k + 1 < len; ++k) sh.ranks.push_back(uniform_int(rng, 0, 1));
      for (int k = 0; k < len; ++k) sh.betti.push_back(uniform_int(rng, 0, 1));
      return sh;
    };
    ChainComplex c = random_complex(rng, b, shape()), ct = random_complex(rng, b, shape());
    ConeCheck k = cone_torsion_check(c, ct, random_chain_map(rng, c, ct), cfg.tol_rank, s.tolerance);
    if (!k.pass) ++cone_fail;
    s.record(k.pass ? k.log_rho_f - k.predicted : INFINITY, s.tolerance);
  }
  s.detail = {{"triples", 30}, {"triple_failures", les_fail}, {"cones", 30}, {"cone_failures", cone_fail}};
  return s;
}

}  // namespace

json run_checks(const RunConfig& cfg, bool& pass) {
  const std::pair<const char*, std::function<Suite(const RunConfig&)>> all[] = {
      {"fk", fk_suite}, {"epsilon", epsilon_suite}, {"subdivision", subdivision_suite}, {"exactseq", exactseq_suite}};
  json out = json::array();
  pass = true;
  for (const auto& [name, fn] : all) {
    if (cfg.suite != "all" && cfg.suite != name) continue;
    Suite s;
    try {
      s = fn(cfg);
    } catch (const std::exception& e) {
      s.name = name;
      s.failures = 1;
      s.detail = {{"exception", e.what()}};
    }
    json j = s.to_json();
    pass = pass && j["pass"].get<bool>();
    out.push_back(std::move(j));
  }
  return out;
}

}  // namespace l2t::cli
