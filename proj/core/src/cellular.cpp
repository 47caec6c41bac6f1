#include "l2t/cellular.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <random>
#include <set>

namespace l2t {

PiSpec PiSpec::finite(std::vector<std::vector<int>> table) {
  Backend::finite_group(table);  // validates the table
  return PiSpec{false, std::move(table)};
}

int PiSpec::multiply(int g, int h) const {
  if (infinite_cyclic) return g + h;
  const int n = static_cast<int>(table.size());
  if (g < 0 || h < 0 || g >= n || h >= n)
    throw ValidationError("group element token out of range: " + std::to_string(g < 0 || g >= n ? g : h));
  return table[g][h];
}

int PiSpec::inverse(int g) const {
  if (infinite_cyclic) return -g;
  for (int h = 0; h < static_cast<int>(table.size()); ++h)
    if (multiply(g, h) == 0) return h;
  throw ValidationError("group element has no inverse");
}

bool PiSpec::same_as(const PiSpec& o) const {
  return infinite_cyclic == o.infinite_cyclic && table == o.table;
}

RingElement ring_normalize(RingElement a) {
  std::sort(a.begin(), a.end(), [](const Term& x, const Term& y) { return x.g < y.g; });
  RingElement out;
  for (const auto& t : a) {
    if (!out.empty() && out.back().g == t.g)
      out.back().coeff += t.coeff;
    else
      out.push_back(t);
  }
  out.erase(std::remove_if(out.begin(), out.end(), [](const Term& t) { return t.coeff == 0; }), out.end());
  return out;
}

RingElement ring_add(const RingElement& a, const RingElement& b) {
  RingElement c = a;
  c.insert(c.end(), b.begin(), b.end());
  return ring_normalize(std::move(c));
}

RingElement ring_scale(const RingElement& a, std::int64_t s) {
  RingElement c = a;
  for (auto& t : c) t.coeff *= s;
  return ring_normalize(std::move(c));
}

RingElement ring_mul(const PiSpec& pi, const RingElement& a, const RingElement& b) {
  RingElement c;
  for (const auto& x : a)
    for (const auto& y : b) c.push_back({pi.multiply(x.g, y.g), x.coeff * y.coeff});
  return ring_normalize(std::move(c));
}

RingElement ring_monomial(int g, std::int64_t coeff) { return ring_normalize({{g, coeff}}); }

namespace {

std::vector<BoundaryTerm> merge_terms(const std::vector<BoundaryTerm>& terms) {
  std::vector<BoundaryTerm> out;
  for (const auto& t : terms) {
    auto it = std::find_if(out.begin(), out.end(), [&](const BoundaryTerm& u) { return u.face == t.face; });
    if (it == out.end())
      out.push_back({t.face, ring_normalize(t.coeff)});
    else
      it->coeff = ring_add(it->coeff, t.coeff);
  }
  out.erase(std::remove_if(out.begin(), out.end(), [](const BoundaryTerm& t) { return t.coeff.empty(); }),
            out.end());
  return out;
}

const std::vector<BoundaryTerm> kNoTerms;

}  // namespace

int CellComplex::dimension() const {
  int d = -1;
  for (const auto& c : cells) d = std::max(d, c.dim);
  return d;
}

const Cell& CellComplex::cell(const std::string& id) const {
  for (const auto& c : cells)
    if (c.id == id) return c;
  throw ValidationError("unknown cell '" + id + "'");
}

bool CellComplex::has_cell(const std::string& id) const {
  return std::any_of(cells.begin(), cells.end(), [&](const Cell& c) { return c.id == id; });
}

std::vector<std::string> CellComplex::cells_of_dim(int q) const {
  std::vector<std::string> out;
  for (const auto& c : cells)
    if (c.dim == q) out.push_back(c.id);
  return out;
}

const std::vector<BoundaryTerm>& CellComplex::boundary(const std::string& id) const {
  auto it = boundaries.find(id);
  return it == boundaries.end() ? kNoTerms : it->second;
}

int alternating_cell_count(const CellComplex& k) {
  int chi = 0;
  for (const auto& c : k.cells) chi += (c.dim % 2 == 0) ? 1 : -1;
  return chi;
}

void validate(const CellComplex& k) {
  if (k.cells.empty()) throw ValidationError("cell complex has no cells");
  std::set<std::string> ids;
  for (const auto& c : k.cells) {
    if (c.dim < 0) throw ValidationError("cell '" + c.id + "' has negative dimension");
    if (!ids.insert(c.id).second) throw ValidationError("duplicate cell id '" + c.id + "'");
  }
  for (const auto& [id, terms] : k.boundaries) {
    if (!ids.count(id)) throw ValidationError("boundary given for unknown cell '" + id + "'");
    const int q = k.cell(id).dim;
    for (const auto& t : terms) {
      if (!ids.count(t.face))
        throw ValidationError("boundary of '" + id + "' names unknown cell '" + t.face + "'");
      if (k.cell(t.face).dim != q - 1)
        throw ValidationError("boundary of '" + id + "' contains '" + t.face + "' of the wrong dimension");
      for (const auto& m : t.coeff) k.pi.multiply(m.g, k.pi.identity());
    }
  }
  for (const auto& c : k.cells) {
    std::vector<BoundaryTerm> dd;
    for (const auto& t : k.boundary(c.id))
      for (const auto& u : k.boundary(t.face)) dd.push_back({u.face, ring_mul(k.pi, t.coeff, u.coeff)});
    if (!merge_terms(dd).empty())
      throw ValidationError("d^2 != 0 on cell '" + c.id + "' over the group ring");
  }
  if (alternating_cell_count(k) != k.euler_characteristic)
    throw ValidationError("Euler characteristic " + std::to_string(k.euler_characteristic) +
                          " does not match the cell count " + std::to_string(alternating_cell_count(k)));
}

namespace {

Morphism invert(const Morphism& f) {
  std::vector<Mat> inv;
  for (const auto& m : f.fibers) {
    if (m.rows() != m.cols()) throw NotInvertible("generator image is not square");
    if (m.rows() == 0) {
      inv.push_back(m);
      continue;
    }
    Eigen::FullPivLU<Mat> lu(m);
    if (!lu.isInvertible()) throw NotInvertible("generator image is not invertible");
    inv.push_back(lu.inverse());
  }
  return Morphism{f.target, f.source, std::move(inv)};
}

Morphism power(const Morphism& t, const Morphism& t_inv, int n) {
  Morphism out = identity(t.source);
  const Morphism& step = n >= 0 ? t : t_inv;
  for (int k = 0; k < std::abs(n); ++k) out = compose(step, out);
  return out;
}

}  // namespace

Morphism Representation::image(int g) const {
  if (pi.infinite_cyclic) {
    const Morphism& t = generators.at(1);
    if (g >= 0) return power(t, t, g);
    return power(t, invert(t), g);
  }
  auto it = images.find(g);
  if (it == images.end()) throw ValidationError("no image for group element " + std::to_string(g));
  return it->second;
}

Morphism Representation::evaluate(const RingElement& a) const {
  Morphism out = zero_morphism(module, module);
  if (pi.infinite_cyclic && !a.empty()) {
    const Morphism& t = generators.at(1);
    const Morphism ti = invert(t);
    for (const auto& m : a) out = add(out, scaled(power(t, ti, m.g), static_cast<double>(m.coeff)));
    return out;
  }
  for (const auto& m : a) out = add(out, scaled(image(m.g), static_cast<double>(m.coeff)));
  return out;
}

Representation make_representation(const PiSpec& pi, const HObject& module,
                                   std::map<int, Morphism> generators) {
  check_product(module);
  Representation rep;
  rep.pi = pi;
  rep.module = module;
  if (generators.empty()) throw ValidationError("representation needs generator images");
  for (auto& [g, m] : generators) {
    check_shape(m);
    if (!m.source.same_shape(module) || !m.target.same_shape(module))
      throw ValidationError("image of " + std::to_string(g) + " is not an endomorphism of the module");
    m.source = module;
    m.target = module;
    invert(m);
  }
  if (pi.infinite_cyclic) {
    if (generators.size() != 1 || !generators.count(1))
      throw ValidationError("infinite cyclic representations take exactly the image of t (token 1)");
  } else {
    const int n = static_cast<int>(pi.table.size());
    std::map<int, Morphism> known;
    known.emplace(0, identity(module));
    std::deque<int> queue{0};
    while (!queue.empty()) {
      const int x = queue.front();
      queue.pop_front();
      for (const auto& [g, img] : generators) {
        const int y = pi.multiply(g, x);
        Morphism cand = compose(img, known.at(x));
        auto it = known.find(y);
        if (it == known.end()) {
          known.emplace(y, std::move(cand));
          queue.push_back(y);
        } else if (!approx_equal(cand, it->second, 1e-10 * std::max(1.0, max_abs(cand)))) {
          throw ValidationError("generator images violate the group relations at element " +
                                std::to_string(y));
        }
      }
    }
    if (static_cast<int>(known.size()) != n)
      throw ValidationError("generator images do not generate the group");
    rep.images = std::move(known);
  }
  rep.generators = std::move(generators);
  rep.unimodular = true;
  for (const auto& [g, m] : rep.generators)
    if (std::abs(log_fk_det(m)) >= 1e-8) rep.unimodular = false;
  return rep;
}

Representation regular_representation(const PiSpec& pi, int grid) {
  if (pi.infinite_cyclic) {
    auto b = Backend::circle(grid);
    const HObject m = HObject::free(b, 1);
    std::vector<Mat> f;
    for (double th : b->sample_points()) f.push_back(Mat::Constant(1, 1, std::polar(1.0, th)));
    return make_representation(pi, m, {{1, Morphism{m, m, std::move(f)}}});
  }
  auto b = Backend::finite_group(pi.table);
  const HObject m = HObject::free(b, 1);
  const int n = b->group_order();
  std::map<int, Morphism> gens;
  for (int g = 1; g < n; ++g) {
    std::vector<cplx> a(n, 0.0);
    a[g] = 1.0;
    gens.emplace(g, from_group_ring(b, {{a}}));
  }
  if (gens.empty()) gens.emplace(0, identity(m));
  return make_representation(pi, m, std::move(gens));
}

Representation scalar_representation(const PiSpec& pi, const std::map<int, cplx>& generators) {
  auto b = Backend::matrix();
  std::map<int, Morphism> gens;
  for (const auto& [g, z] : generators) gens.emplace(g, from_matrix(b, Mat::Constant(1, 1, z)));
  return make_representation(pi, HObject::free(b, 1), std::move(gens));
}

namespace {

HObject copies(const HObject& m, int n) {
  std::vector<int> dims;
  for (int d : m.dims) dims.push_back(n * d);
  HObject x = HObject::fibered(m.backend, dims);
  if (m.standard() || n == 0) return x;
  std::vector<Mat> p;
  for (int j = 0; j < m.fibers(); ++j) {
    Mat b = Mat::Zero(n * m.dims[j], n * m.dims[j]);
    for (int r = 0; r < n; ++r) b.block(r * m.dims[j], r * m.dims[j], m.dims[j], m.dims[j]) = m.product[j];
    p.push_back(std::move(b));
  }
  return x.with_product(std::move(p));
}

// Block morphism with block (row r, col c) = rho(entries[r][c]).
Morphism block_morphism(const Representation& rep, const HObject& src, const HObject& tgt,
                        const std::vector<std::vector<RingElement>>& entries, int cols) {
  const HObject& m = rep.module;
  std::vector<Mat> fibers;
  for (int j = 0; j < m.fibers(); ++j) fibers.push_back(Mat::Zero(tgt.dims[j], src.dims[j]));
  for (size_t r = 0; r < entries.size(); ++r)
    for (int c = 0; c < cols; ++c) {
      if (entries[r][c].empty()) continue;
      const Morphism blk = rep.evaluate(entries[r][c]);
      for (int j = 0; j < m.fibers(); ++j) {
        const int d = m.dims[j];
        fibers[j].block(static_cast<int>(r) * d, c * d, d, d) = blk.fibers[j];
      }
    }
  return Morphism{src, tgt, std::move(fibers)};
}

void check_group(const CellComplex& k, const Representation& rep) {
  if (!rep.pi.same_as(k.pi)) throw ValidationError("representation group does not match the complex");
}

}  // namespace

ChainComplex cochain_complex(const CellComplex& k, const Representation& rep) {
  validate(k);
  check_group(k, rep);
  const int top = k.dimension();
  std::vector<HObject> objs;
  std::vector<std::vector<std::string>> ids;
  for (int q = 0; q <= top; ++q) {
    ids.push_back(k.cells_of_dim(q));
    objs.push_back(copies(rep.module, static_cast<int>(ids.back().size())));
  }
  std::vector<Morphism> ds;
  for (int q = 1; q <= top; ++q) {
    std::vector<std::vector<RingElement>> e(ids[q].size(), std::vector<RingElement>(ids[q - 1].size()));
    for (size_t r = 0; r < ids[q].size(); ++r)
      for (const auto& t : k.boundary(ids[q][r])) {
        const auto it = std::find(ids[q - 1].begin(), ids[q - 1].end(), t.face);
        auto& slot = e[r][it - ids[q - 1].begin()];
        slot = ring_add(slot, t.coeff);
      }
    ds.push_back(block_morphism(rep, objs[q - 1], objs[q], e, static_cast<int>(ids[q - 1].size())));
  }
  return make_complex(std::move(objs), std::move(ds), 0);
}

TorsionReport combinatorial_torsion(const CellComplex& k, const Representation& rep,
                                    const DetLineElement& sigma, const TorsionOptions& opt) {
  check_group(k, rep);
  if (!rep.unimodular) throw NotUnimodular("representation is not unimodular");
  const DetLineElement n = normalize(sigma);
  if (n.frame.size() != 1 || n.frame[0].label != "M" || n.frame[0].exponent != 1)
    throw ValidationError("volume must be an element of det M (frame label \"M\"), got " + describe(sigma));
  const ChainComplex c = cochain_complex(k, rep);
  return torsion(c, standard_volume(c, k.euler_characteristic * n.log_coeff), opt);
}

TorsionReport combinatorial_torsion(const CellComplex& k, const Representation& rep,
                                    const TorsionOptions& opt) {
  return combinatorial_torsion(k, rep, DetLineElement{{{"M", 1}}, 0.0}, opt);
}

CellComplex relift(const CellComplex& k, const std::string& id, int g) {
  k.cell(id);
  CellComplex out = k;
  const RingElement left = ring_monomial(g), right = ring_monomial(k.pi.inverse(g));
  for (auto& [cid, terms] : out.boundaries) {
    for (auto& t : terms) {
      if (cid == id) t.coeff = ring_mul(k.pi, left, t.coeff);
      if (t.face == id) t.coeff = ring_mul(k.pi, t.coeff, right);
    }
  }
  validate(out);
  return out;
}

Subdivision subdivide(const CellComplex& k, const std::string& id) {
  validate(k);
  const Cell e = k.cell(id);
  if (e.dim < 1) throw Unsupported("0-cells cannot be subdivided");
  auto fresh = [&](std::string s) {
    while (k.has_cell(s)) s += "'";
    return s;
  };
  Subdivision s;
  s.cell = id;
  s.plus = fresh(id + "_p");
  s.minus = fresh(id + "_m");
  s.mid = fresh(id + "_0");

  const auto de = merge_terms(k.boundary(id));
  std::vector<BoundaryTerm> a;
  std::vector<BoundaryTerm> b = de;
  int pick_t = -1, pick_m = -1;
  for (int t = 0; t < static_cast<int>(de.size()) && pick_t < 0; ++t)
    for (int m = 0; m < static_cast<int>(de[t].coeff.size()); ++m)
      if (de[t].coeff[m].coeff < 0) {
        pick_t = t;
        pick_m = m;
        break;
      }
  if (pick_t < 0 && !de.empty()) pick_t = pick_m = 0;
  if (pick_t >= 0) {
    const Term mono = de[pick_t].coeff[pick_m];
    a.push_back({de[pick_t].face, {mono}});
    b = merge_terms(std::vector<BoundaryTerm>(b.begin(), b.end()));
    b.push_back({de[pick_t].face, {{mono.g, -mono.coeff}}});
    b = merge_terms(b);
  }
  s.b_part = b;

  CellComplex out;
  out.pi = k.pi;
  out.euler_characteristic = k.euler_characteristic;
  for (const auto& c : k.cells) {
    if (c.id == id) {
      out.cells.push_back({s.plus, e.dim});
      out.cells.push_back({s.minus, e.dim});
      out.cells.push_back({s.mid, e.dim - 1});
    } else {
      out.cells.push_back(c);
    }
  }
  const RingElement one = ring_monomial(k.pi.identity());
  for (const auto& [cid, terms] : k.boundaries) {
    if (cid == id) continue;
    std::vector<BoundaryTerm> nt;
    for (const auto& t : terms) {
      if (t.face == id) {
        nt.push_back({s.plus, t.coeff});
        nt.push_back({s.minus, t.coeff});
      } else {
        nt.push_back(t);
      }
    }
    out.boundaries[cid] = merge_terms(nt);
  }
  std::vector<BoundaryTerm> dp = a, dm = b, d0;
  dp.push_back({s.mid, one});
  dm.push_back({s.mid, ring_scale(one, -1)});
  for (const auto& t : a)
    for (const auto& u : k.boundary(t.face)) d0.push_back({u.face, ring_scale(ring_mul(k.pi, t.coeff, u.coeff), -1)});
  out.boundaries[s.plus] = merge_terms(dp);
  out.boundaries[s.minus] = merge_terms(dm);
  if (auto m0 = merge_terms(d0); !m0.empty()) out.boundaries[s.mid] = m0;
  validate(out);
  s.complex = std::move(out);
  return s;
}

CellComplex elementary_subdivision(const CellComplex& k, const std::string& id) {
  return subdivide(k, id).complex;
}

ChainMap subdivision_cochain_map(const CellComplex& k, const Subdivision& s, const Representation& rep) {
  const ChainComplex c = cochain_complex(k, rep), cp = cochain_complex(s.complex, rep);
  const RingElement one = ring_monomial(k.pi.identity());
  ChainMap out;
  for (int q = 0; q <= k.dimension(); ++q) {
    const auto src = k.cells_of_dim(q), tgt = s.complex.cells_of_dim(q);
    std::vector<std::vector<RingElement>> e(tgt.size(), std::vector<RingElement>(src.size()));
    auto col = [&](const std::string& id) {
      return static_cast<int>(std::find(src.begin(), src.end(), id) - src.begin());
    };
    for (size_t r = 0; r < tgt.size(); ++r) {
      const std::string& x = tgt[r];
      if (x == s.plus) {
        e[r][col(s.cell)] = one;
      } else if (x == s.minus) {
      } else if (x == s.mid) {
        for (const auto& t : s.b_part) e[r][col(t.face)] = ring_add(e[r][col(t.face)], t.coeff);
      } else {
        e[r][col(x)] = one;
      }
    }
    out.push_back(block_morphism(rep, c.at(q), cp.at(q), e, static_cast<int>(src.size())));
  }
  check_chain_map(c, cp, out, 1e-8);
  return out;
}

SubdivisionCheck subdivision_invariance_check(const CellComplex& k, const Representation& rep, int depth,
                                              std::uint64_t seed, double tol) {
  if (tol <= 0) tol = rep.backend()->kind() == BackendKind::Family ? 1e-6 : 1e-9;
  std::mt19937_64 rng(seed);
  SubdivisionCheck out;
  CellComplex cur = k;
  ChainComplex c = cochain_complex(cur, rep);
  TorsionReport r = combinatorial_torsion(cur, rep);
  if (!r.reduced) throw NoCanonicalElement("complex is not of determinant class");
  double value = r.reduced->log_coeff;
  out.line_case = !r.log_scalar.has_value();
  out.log_values.push_back(value);
  out.predicted.push_back(value);
  for (int round = 0; round < depth; ++round) {
    std::vector<std::string> candidates;
    for (const auto& cell : cur.cells)
      if (cell.dim >= 1) candidates.push_back(cell.id);
    if (candidates.empty()) throw Unsupported("complex has no cells of positive dimension");
    const std::string id = candidates[rng() % candidates.size()];
    Subdivision s = subdivide(cur, id);
    const ChainComplex cp = cochain_complex(s.complex, rep);
    double predicted = value;
    if (out.line_case) {
      const ChainMap f = subdivision_cochain_map(cur, s, rep);
      const auto h = harmonic_frames(c), hp = harmonic_frames(cp);
      for (int q = 0; q < c.size(); ++q) {
        if (h[q].source.is_zero() && hp[q].source.is_zero()) continue;
        const Morphism phi = compose(adjoint(hp[q]), compose(f[q], h[q]));
        predicted -= (q % 2 == 0 ? 1 : -1) * log_fk_det(phi);
      }
    }
    TorsionReport rp = combinatorial_torsion(s.complex, rep);
    if (!rp.reduced) throw NoCanonicalElement("subdivided complex is not of determinant class");
    value = rp.reduced->log_coeff;
    out.subdivided.push_back(id);
    out.log_values.push_back(value);
    out.predicted.push_back(predicted);
    out.max_defect = std::max(out.max_defect, std::abs(value - predicted));
    cur = std::move(s.complex);
    c = cp;
  }
  double scale = 1.0;
  for (double v : out.predicted) scale = std::max(scale, std::abs(v));
  out.pass = out.max_defect <= tol * scale;
  return out;
}

namespace examples {

namespace {

RingElement t_minus_1() { return ring_normalize({{1, 1}, {0, -1}}); }

}  // namespace

CellComplex circle() {
  CellComplex k;
  k.pi = PiSpec::integers();
  k.cells = {{"v", 0}, {"e", 1}};
  k.boundaries["e"] = {{"v", t_minus_1()}};
  k.euler_characteristic = 0;
  validate(k);
  return k;
}

CellComplex circle_two_cells() {
  CellComplex k;
  k.pi = PiSpec::integers();
  k.cells = {{"v0", 0}, {"v1", 0}, {"e0", 1}, {"e1", 1}};
  k.boundaries["e0"] = {{"v1", ring_monomial(0)}, {"v0", ring_monomial(0, -1)}};
  k.boundaries["e1"] = {{"v0", ring_monomial(1)}, {"v1", ring_monomial(0, -1)}};
  k.euler_characteristic = 0;
  validate(k);
  return k;
}

CellComplex torus() {
  CellComplex k;
  k.pi = PiSpec::integers();
  k.cells = {{"v", 0}, {"a", 1}, {"b", 1}, {"F", 2}};
  k.boundaries["a"] = {{"v", t_minus_1()}};
  k.boundaries["F"] = {{"b", t_minus_1()}};
  k.euler_characteristic = 0;
  validate(k);
  return k;
}

CellComplex lens(int p, int q) {
  if (p < 2) throw ValidationError("lens space needs p >= 2");
  int q_inv = -1;
  for (int r = 1; r < p; ++r)
    if ((static_cast<long>(q) * r) % p == 1) q_inv = r;
  if (q_inv < 0) throw ValidationError("lens space needs gcd(p, q) = 1");
  CellComplex k;
  k.pi = PiSpec::finite(Backend::cyclic_table(p));
  k.cells = {{"e0", 0}, {"e1", 1}, {"e2", 2}, {"e3", 3}};
  RingElement norm;
  for (int j = 0; j < p; ++j) norm.push_back({j, 1});
  k.boundaries["e1"] = {{"e0", t_minus_1()}};
  k.boundaries["e2"] = {{"e1", ring_normalize(norm)}};
  k.boundaries["e3"] = {{"e2", ring_normalize({{q_inv % p, 1}, {0, -1}})}};
  k.euler_characteristic = 0;
  validate(k);
  return k;
}

Representation lambda_rep(cplx lambda) { return scalar_representation(PiSpec::integers(), {{1, lambda}}); }

Representation circle_regular(int grid) { return regular_representation(PiSpec::integers(), grid); }

Representation trivial_circle() { return lambda_rep(1.0); }

Representation lens_zeta(int p, int k) {
  return scalar_representation(PiSpec::finite(Backend::cyclic_table(p)),
                               {{1, std::polar(1.0, 2 * std::numbers::pi * k / p)}});
}

Representation lens_regular(int p) { return regular_representation(PiSpec::finite(Backend::cyclic_table(p))); }

}  // namespace examples

}  // namespace l2t
