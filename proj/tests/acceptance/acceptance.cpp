// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>

#include "generators.hpp"
#include "l2t/cellular.hpp"
#include "l2t/torsion.hpp"

using namespace l2t;
using namespace l2t::testing;

namespace {

using Clock = std::chrono::steady_clock;

int failures = 0;

void report(const std::string& name, bool ok, const std::string& detail) {
  std::printf("%s %-28s %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Runs a criterion body; an exception counts as a failure with its message.
void criterion(const std::string& name, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(name, false, std::string("exception: ") + e.what());
  }
}

Morphism family_scalar(const BackendPtr& b, const std::function<double(double)>& fn) {
  const HObject x = HObject::free(b, 1);
  std::vector<Mat> f;
  for (double p : b->sample_points()) f.push_back(Mat::Constant(1, 1, fn(p)));
  return from_fibers(x, x, std::move(f));
}

void fk_laws() {
  const auto t0 = Clock::now();
  Rng rng(1001);
  double mult = 0, scalar = 0, tri = 0, scale = 0;
  for (auto kind : {BackendKind::Matrix, BackendKind::FiniteGroup, BackendKind::Family})
    for (int rep = 0; rep < 200; ++rep) {
      auto b = random_backend(rng, kind);
      const int n = uniform_int(rng, 1, 3);
      Morphism a = random_invertible(rng, b, n), c = random_invertible(rng, b, n);
      mult = std::max(mult, std::abs(log_fk_det(compose(a, c)) - log_fk_det(a) - log_fk_det(c)));

      const cplx lam = std::polar(uniform(rng, 0.2, 3.0), uniform(rng, 0.0, 6.28));
      const HObject x = HObject::free(b, n);
      scalar = std::max(scalar, std::abs(log_fk_det(scaled(identity(x), lam)) - x.dim_tau() * std::log(std::abs(lam))));

      const int m = uniform_int(rng, 1, 2);
      Morphism d = random_invertible(rng, b, m);
      Morphism off = random_morphism(rng, b, n, m);
      Morphism block = vstack(hstack(a, off), hstack(zero_morphism(HObject::free(b, n), HObject::free(b, m)), d));
      tri = std::max(tri, std::abs(log_fk_det(block) - log_fk_det(a) - log_fk_det(d)));

      const double lam_s = uniform(rng, 0.3, 3.0);
      auto bs = b->rescaled(b->scale() * lam_s);
      Morphism as = from_fibers(HObject::free(bs, n), HObject::free(bs, n), a.fibers);
      scale = std::max(scale, std::abs(log_fk_det(as) - lam_s * log_fk_det(a)));
    }
  const double t = seconds_since(t0);
  report("fk_determinant_laws", mult < 1e-8 && scalar < 1e-10 && tri < 1e-8 && scale < 1e-10 && t < 10,
         fmt("mult=%.2e scalar=%.2e block=%.2e scale=%.2e time=%.2fs", mult, scalar, tri, scale, t));
}

void density_oracle() {
  const auto t0 = Clock::now();
  ExtendedDet e = fk_det_extended(family_scalar(Backend::unit_interval(10000), [](double x) { return x; }));
  ExtendedDet f = fk_det_extended(family_scalar(Backend::unit_interval(256), [](double x) { return std::exp(-1.0 / x); }));
  bool monotone = true;
  for (size_t k = 1; k < f.verdict.ladder.size(); ++k)
    monotone = monotone && f.verdict.ladder[k].second <= f.verdict.ladder[k - 1].second + 1e-12;
  const double t = seconds_since(t0);
  report("spectral_density_oracle",
         std::abs(e.log_det + 1.0) <= 1e-3 && e.verdict.status == VerdictStatus::Convergent &&
             f.verdict.status == VerdictStatus::Divergent && monotone && t < 5,
         fmt("logdet(xi)=%.6f verdict=%s flat=%s monotone=%d time=%.2fs", e.log_det, to_string(e.verdict.status),
             to_string(f.verdict.status), monotone ? 1 : 0, t));
}

void torsion_formulas() {
  Rng rng(1002);
  auto b = Backend::matrix();
  double worst = 0;
  for (int rep = 0; rep < 100; ++rep) {
    ChainComplex c = random_complex(rng, b, random_shape(rng, 5, 2, true), uniform_int(rng, -1, 1));
    if (rep % 2) c = with_random_products(rng, c);
    worst = std::max(worst, std::abs(log_torsion_acyclic(c) - log_torsion_rho_sig(c)));
  }
  const HObject x = HObject::free(b, 1);
  ChainComplex two = make_complex({x, x}, {scaled(identity(x), 2.0)});
  const double rho = *torsion(two).scalar_value();
  report("torsion_formulas", worst < 1e-8 && std::abs(rho - 0.5) < 1e-12,
         fmt("max|projcomp-rhosig|=%.2e rho(d=2)=%.15f", worst, rho));
}

void epsilon_independence() {
  Rng rng(1003);
  double worst = 0;
  int frames = 0;
  for (int rep = 0; rep < 50; ++rep) {
    auto b = random_backend(rng, static_cast<BackendKind>(rep % 3));
    ChainComplex c = random_complex(rng, b, random_shape(rng, 4, 2, false), 0, 0.05, 5.0);
    double lo = 1e300, hi = 0;
    for (int i = c.first_degree + 1; i <= c.last_degree(); ++i) {
      SpectralDensity d = singular_density(*c.into(i));
      if (d.empty()) continue;
      lo = std::min(lo, d.smallest_positive());
      hi = std::max(hi, d.largest());
    }
    TorsionOptions a, z;
    if (hi > 0) {
      a.epsilon = 0.5 * lo * lo;
      z.epsilon = std::min(0.5 * (lo * lo + hi * hi), 0.99 * hi * hi);
    } else {
      a.epsilon = 0.1;
      z.epsilon = 1.0;
    }
    const TorsionReport ra = torsion(c, a), rz = torsion(c, z);
    worst = std::max(worst, std::abs(ra.combined.log_coeff - rz.combined.log_coeff) /
                                std::max(1.0, std::abs(ra.combined.log_coeff)));
    if (!same_frame(ra.combined, rz.combined)) ++frames;
  }
  report("epsilon_independence", worst < 1e-8 && frames == 0,
         fmt("max rel diff=%.2e frame mismatches=%d (50 complexes)", worst, frames));
}

void multiplicativity() {
  Rng rng(1004);
  auto b = Backend::matrix();
  double les_worst = 0, cone_worst = 0;
  int les_fail = 0, cone_fail = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const int len = uniform_int(rng, 2, 4);
    auto shape = [&](bool acyclic) {
      ComplexShape sh;
      for (int k = 0; k + 1 < len; ++k) sh.ranks.push_back(uniform_int(rng, acyclic ? 1 : 0, 2));
      for (int k = 0; k < len; ++k) sh.betti.push_back(acyclic ? 0 : uniform_int(rng, 0, 1));
      return sh;
    };
    const int which = rep % 3;  // 0: L acyclic, 1: N acyclic, 2: both
    ChainComplex l = random_complex(rng, b, shape(which != 1));
    ChainComplex n = random_complex(rng, b, shape(which != 0));
    ExactTriple t = random_triple(rng, l, n, true, true);
    LesCheck c = les_connecting_iso(t.l, t.m, t.n, t.alpha, t.beta, kDefaultRankTol, 1e-6);
    les_worst = std::max(les_worst, std::abs(c.lhs - c.rhs));
    if (!c.pass) ++les_fail;
  }
  for (int rep = 0; rep < 100; ++rep) {
    const int len = uniform_int(rng, 2, 4);
    auto shape = [&]() {
      ComplexShape sh;
      for (int k = 0; k + 1 < len; ++k) sh.ranks.push_back(uniform_int(rng, 0, 1));
      for (int k = 0; k < len; ++k) sh.betti.push_back(uniform_int(rng, 0, 1));
      return sh;
    };
    ChainComplex c = random_complex(rng, b, shape()), ct = random_complex(rng, b, shape());
    ConeCheck k = cone_torsion_check(c, ct, random_chain_map(rng, c, ct), kDefaultRankTol, 1e-6);
    cone_worst = std::max(cone_worst, std::abs(k.log_rho_f - k.predicted));
    if (!k.pass) ++cone_fail;
  }
  report("exact_sequence_and_cone", les_fail == 0 && cone_fail == 0,
         fmt("triples: max defect=%.2e failures=%d/100; cones: max defect=%.2e failures=%d/100", les_worst,
             les_fail, cone_worst, cone_fail));
}

void circle_oracles() {
  const TorsionReport m = combinatorial_torsion(examples::circle(), examples::lambda_rep(-1.0));
  const TorsionReport r = combinatorial_torsion(examples::circle(), examples::circle_regular(4096));
  const double vm = m.scalar_value().value_or(NAN), vr = r.scalar_value().value_or(NAN);
  const auto ns = r.detclass[1].ns_exponent;
  const bool ok = std::abs(vm - 0.5) <= 1e-10 && std::abs(vr - 1.0) <= 1e-3 && r.determinant_class() &&
                  r.detclass[1].status == VerdictStatus::Convergent && ns && std::abs(*ns - 1.0) <= 0.1;
  report("circle_oracles", ok,
         fmt("rho(lambda=-1)=%.12f rho(regular,4096)=%.6f verdict=%s NS=%.3f", vm, vr,
             to_string(r.detclass[1].status), ns ? *ns : NAN));
}

void lens_oracle() {
  const cplx z = std::polar(1.0, 2 * std::numbers::pi / 5);
  const TorsionReport r = combinatorial_torsion(examples::lens(5, 1), examples::lens_zeta(5));
  // brute force on the 4-term scalar complex d = (z-1, 0, z-1)
  const double a = std::norm(z - 1.0);
  const double lap[4] = {a, a, a, a};
  double brute = 0;
  for (int i = 0; i < 4; ++i) brute += 0.5 * (i % 2 == 0 ? 1 : -1) * i * std::log(lap[i]);
  const double v = r.scalar_value().value_or(NAN), closed = 1.0 / a;
  report("lens_L51", std::abs(v - std::exp(brute)) <= 1e-8 && std::abs(v - closed) <= 1e-8,
         fmt("rho=%.12f brute=%.12f |z-1|^-2=%.12f", v, std::exp(brute), closed));
}

void subdivision() {
  struct Case {
    const char* name;
    CellComplex k;
    Representation rep;
    double tol;
  };
  const Case cases[] = {
      {"circle/lambda=-1", examples::circle(), examples::lambda_rep(-1.0), 1e-9},
      {"circle/regular", examples::circle(), examples::circle_regular(4096), 1e-6},
      {"L(5,1)/zeta", examples::lens(5, 1), examples::lens_zeta(5), 1e-9},
      {"L(5,1)/regular", examples::lens(5, 1), examples::lens_regular(5), 1e-9},
  };
  bool ok = true;
  std::string detail;
  for (const auto& c : cases) {
    SubdivisionCheck s = subdivision_invariance_check(c.k, c.rep, 3, 7, c.tol);
    ok = ok && s.pass;
    detail += fmt("%s defect=%.1e; ", c.name, s.max_defect);
  }
  report("subdivision_invariance", ok, detail);
}

void determinant_class_free() {
  auto b = Backend::unit_interval(256);
  const HObject x = HObject::free(b, 1);
  ChainComplex c = make_complex({x, x}, {family_scalar(b, [](double p) { return std::exp(-1.0 / p); })});
  const TorsionReport r = torsion(c);
  const bool divergent = r.detclass[1].status == VerdictStatus::Divergent && !r.detclass[1].diagnostic.empty();
  const bool element = std::isfinite(r.combined.log_coeff) && !r.combined.frame.empty();
  report("determinant_class_free", !r.log_scalar && !r.reduced && element && divergent,
         fmt("scalar=%s element=%s verdict=%s", r.log_scalar ? "present" : "absent",
             describe(r.combined).c_str(), to_string(r.detclass[1].status)));
}

}  // namespace

int main() {
  criterion("fk_determinant_laws", fk_laws);
  criterion("spectral_density_oracle", density_oracle);
  criterion("torsion_formulas", torsion_formulas);
  criterion("epsilon_independence", epsilon_independence);
  criterion("exact_sequence_and_cone", multiplicativity);
  criterion("circle_oracles", circle_oracles);
  criterion("lens_L51", lens_oracle);
  criterion("subdivision_invariance", subdivision);
  criterion("determinant_class_free", determinant_class_free);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
