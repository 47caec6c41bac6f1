#include "l2t_cli/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace l2t::cli {

namespace {

const char* type_name(const json& j) { return j.type_name(); }

std::string location(const std::string& text, size_t byte) {
  size_t line = 1, col = 1;
  for (size_t k = 0; k + 1 < byte && k < text.size(); ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return std::to_string(line) + ":" + std::to_string(col);
}

}  // namespace

json parse_json_text(const std::string& text, const std::string& name) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::string what = e.what();
    if (auto p = what.find("parse error"); p != std::string::npos) what = what.substr(p);
    throw InputError(name + ":" + location(text, e.byte) + ": malformed JSON: " + what);
  }
}

json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path + ": cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json_text(ss.str(), path);
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << text;
  if (!out) throw std::runtime_error(path + ": write failed");
}

// Node

void Node::fail(const std::string& what) const {
  throw InputError(file_ + ": field '" + (path_.empty() ? std::string("<root>") : path_) + "': " + what);
}

void Node::expect(bool ok, const char* type) const {
  if (!ok) fail(std::string("expected ") + type + ", got " + type_name(*j_));
}

bool Node::has(const std::string& key) const { return j_->is_object() && j_->contains(key); }

Node Node::at(const std::string& key) const {
  expect(j_->is_object(), "object");
  const std::string p = path_.empty() ? key : path_ + "." + key;
  auto it = j_->find(key);
  if (it == j_->end()) Node(*j_, file_, p).fail("missing");
  return Node(*it, file_, p);
}

Node Node::at(size_t i) const {
  expect(j_->is_array(), "array");
  const std::string p = path_ + "[" + std::to_string(i) + "]";
  if (i >= j_->size()) Node(*j_, file_, p).fail("missing (array has " + std::to_string(j_->size()) + " entries)");
  return Node((*j_)[i], file_, p);
}

size_t Node::size() const {
  expect(j_->is_array(), "array");
  return j_->size();
}

std::vector<std::pair<std::string, Node>> Node::items() const {
  expect(j_->is_object(), "object");
  std::vector<std::pair<std::string, Node>> out;
  for (auto it = j_->begin(); it != j_->end(); ++it)
    out.emplace_back(it.key(), Node(it.value(), file_, path_.empty() ? it.key() : path_ + "." + it.key()));
  return out;
}

long long Node::as_int() const {
  expect(j_->is_number_integer(), "integer");
  return j_->get<long long>();
}

double Node::as_double() const {
  expect(j_->is_number(), "number");
  const double x = j_->get<double>();
  if (!std::isfinite(x)) fail("not finite");
  return x;
}

std::string Node::as_string() const {
  expect(j_->is_string(), "string");
  return j_->get<std::string>();
}

bool Node::as_bool() const {
  expect(j_->is_boolean(), "boolean");
  return j_->get<bool>();
}

cplx Node::as_complex() const {
  if (j_->is_number()) return as_double();
  expect(j_->is_array() && j_->size() == 2, "number or [re, im]");
  return {at(0).as_double(), at(1).as_double()};
}

Mat Node::as_matrix() const {
  const size_t rows = size();
  if (rows == 0) return Mat(0, 0);
  const size_t cols = at(0).size();
  Mat m(rows, cols);
  for (size_t r = 0; r < rows; ++r) {
    Node row = at(r);
    if (row.size() != cols) row.fail("row length " + std::to_string(row.size()) + ", expected " + std::to_string(cols));
    for (size_t c = 0; c < cols; ++c) m(r, c) = row.at(c).as_complex();
  }
  return m;
}

// Parsing

namespace {

int as_small_int(const Node& n) {
  const long long v = n.as_int();
  if (v < -(1LL << 30) || v > (1LL << 30)) n.fail("integer out of range");
  return static_cast<int>(v);
}

std::vector<std::vector<int>> parse_table(const Node& n) {
  std::vector<std::vector<int>> t;
  for (size_t r = 0; r < n.size(); ++r) {
    Node row = n.at(r);
    std::vector<int> v;
    for (size_t c = 0; c < row.size(); ++c) v.push_back(as_small_int(row.at(c)));
    t.push_back(std::move(v));
  }
  return t;
}

PiSpec parse_pi(const Node& n) {
  if (n.has("infinite_cyclic")) {
    if (!n.at("infinite_cyclic").as_bool()) n.at("infinite_cyclic").fail("must be true");
    return PiSpec::integers();
  }
  if (!n.has("finite")) n.fail("expected {\"finite\": table} or {\"infinite_cyclic\": true}");
  Node t = n.at("finite");
  try {
    return PiSpec::finite(parse_table(t));
  } catch (const ValidationError& e) {
    t.fail(e.what());
  }
}

CellComplex parse_cells(const Node& root) {
  CellComplex k;
  k.pi = parse_pi(root.at("pi"));
  Node cells = root.at("cells");
  for (size_t i = 0; i < cells.size(); ++i) {
    Node c = cells.at(i);
    if (c.size() != 2) c.fail("expected [dim, id]");
    const int dim = as_small_int(c.at(0));
    if (dim < 0) c.at(0).fail("negative dimension");
    k.cells.push_back(Cell{c.at(1).as_string(), dim});
  }
  if (root.has("boundaries")) {
    for (const auto& [id, terms] : root.at("boundaries").items()) {
      std::vector<BoundaryTerm> b;
      for (size_t i = 0; i < terms.size(); ++i) {
        Node t = terms.at(i);
        if (t.size() != 2) t.fail("expected [face, [[g, coeff], ...]]");
        RingElement a;
        Node coeffs = t.at(1);
        for (size_t m = 0; m < coeffs.size(); ++m) {
          Node gc = coeffs.at(m);
          if (gc.size() != 2) gc.fail("expected [g, coeff]");
          const int g = as_small_int(gc.at(0));
          if (!k.pi.infinite_cyclic && (g < 0 || g >= static_cast<int>(k.pi.table.size())))
            gc.at(0).fail("group element token out of range");
          a.push_back(Term{g, gc.at(1).as_int()});
        }
        b.push_back(BoundaryTerm{t.at(0).as_string(), ring_normalize(std::move(a))});
      }
      k.boundaries[id] = std::move(b);
    }
  }
  k.euler_characteristic = root.has("chi") ? as_small_int(root.at("chi")) : alternating_cell_count(k);
  try {
    validate(k);
  } catch (const Error& e) {
    root.fail(std::string("invalid cell complex: ") + e.what());
  }
  return k;
}

BackendPtr parse_backend(const Node& n) {
  const std::string kind = n.at("kind").as_string();
  const double scale = n.has("scale") ? n.at("scale").as_double() : 1.0;
  if (!(scale > 0)) n.at("scale").fail("must be positive");
  auto grid = [&] {
    const int g = as_small_int(n.at("grid"));
    if (g < 1) n.at("grid").fail("must be positive");
    return g;
  };
  try {
    if (kind == "matrix") return Backend::matrix(scale);
    if (kind == "finite_group") return Backend::finite_group(parse_table(n.at("table")), scale);
    if (kind == "interval") return Backend::unit_interval(grid(), scale);
    if (kind == "circle") return Backend::circle(grid(), scale);
    if (kind == "family") {
      std::vector<double> p, w;
      Node pn = n.at("points"), wn = n.at("weights");
      for (size_t j = 0; j < pn.size(); ++j) p.push_back(pn.at(j).as_double());
      for (size_t j = 0; j < wn.size(); ++j) w.push_back(wn.at(j).as_double());
      return Backend::family(std::move(p), std::move(w), scale);
    }
  } catch (const ValidationError& e) {
    n.fail(e.what());
  }
  n.at("kind").fail("unknown backend kind '" + kind + "'");
}

ChainComplex parse_chain(const Node& n) {
  BackendPtr b = parse_backend(n.at("backend"));
  const int first = n.has("first_degree") ? as_small_int(n.at("first_degree")) : 0;
  Node ranks = n.at("ranks");
  std::vector<HObject> objs;
  for (size_t k = 0; k < ranks.size(); ++k) {
    const int r = as_small_int(ranks.at(k));
    if (r < 0) ranks.at(k).fail("negative rank");
    objs.push_back(HObject::free(b, r));
  }
  if (objs.empty()) ranks.fail("a complex needs at least one object");
  Node ds = n.at("differentials");
  if (ds.size() + 1 != objs.size())
    ds.fail("expected " + std::to_string(objs.size() - 1) + " differentials for " + std::to_string(objs.size()) +
            " objects");
  std::vector<Morphism> diffs;
  for (size_t k = 0; k < ds.size(); ++k) {
    Node f = ds.at(k).at("fibers");
    if (static_cast<int>(f.size()) != b->fiber_count())
      f.fail("expected " + std::to_string(b->fiber_count()) + " fibers");
    std::vector<Mat> fibers;
    for (int j = 0; j < b->fiber_count(); ++j) {
      Mat m = f.at(j).as_matrix();
      const int rows = objs[k + 1].dims[j], cols = objs[k].dims[j];
      if (m.size() == 0) m = Mat::Zero(rows, cols);
      if (m.rows() != rows || m.cols() != cols)
        f.at(j).fail("shape " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + ", expected " +
                     std::to_string(rows) + "x" + std::to_string(cols));
      fibers.push_back(std::move(m));
    }
    try {
      diffs.push_back(from_fibers(objs[k], objs[k + 1], std::move(fibers)));
    } catch (const Error& e) {
      ds.at(k).fail(e.what());
    }
  }
  try {
    ChainComplex c = make_complex(objs, diffs, first);
    validate(c);
    return c;
  } catch (const Error& e) {
    n.fail(std::string("invalid chain complex: ") + e.what());
  }
}

}  // namespace

RepSpec parse_rep(const Node& n) {
  RepSpec s;
  Node b = n.at("backend");
  const std::string kind = b.at("kind").as_string();
  if (b.has("grid")) {
    s.grid = as_small_int(b.at("grid"));
    if (*s.grid < 8) b.at("grid").fail("grid size must be at least 8");
  }
  if (kind == "regular") {
    s.kind = RepSpec::Kind::Regular;
  } else if (kind == "trivial") {
    s.kind = RepSpec::Kind::Trivial;
  } else if (kind == "matrix") {
    s.kind = RepSpec::Kind::Explicit;
    if (b.has("scale")) {
      s.scale = b.at("scale").as_double();
      if (!(s.scale > 0)) b.at("scale").fail("must be positive");
    }
    for (const auto& [key, m] : n.at("generators").items()) {
      int g = 0;
      try {
        size_t used = 0;
        g = std::stoi(key, &used);
        if (used != key.size()) throw std::invalid_argument(key);
      } catch (const std::exception&) {
        m.fail("generator key must be an integer group element token");
      }
      s.generators[g] = m.as_matrix();
    }
    if (s.generators.empty()) n.at("generators").fail("no generator images");
  } else {
    b.at("kind").fail("unknown representation kind '" + kind + "' (matrix, regular, trivial)");
  }
  return s;
}

Input parse_input(const json& j, const std::string& file) {
  Node root(j, file);
  if (root.has("chain_complex")) return parse_chain(root.at("chain_complex"));
  if (!root.has("cells")) root.fail("expected a cell complex (\"cells\") or a \"chain_complex\"");
  CellInput in{parse_cells(root), std::nullopt};
  if (root.has("representation")) in.rep = parse_rep(root.at("representation"));
  return in;
}

Input read_input(const std::string& path) { return parse_input(read_json_file(path), path); }

RepSpec read_rep(const std::string& path) {
  const json j = read_json_file(path);
  return parse_rep(Node(j, path));
}

Representation build_representation(const RepSpec& spec, const PiSpec& pi, int grid) {
  try {
    switch (spec.kind) {
      case RepSpec::Kind::Regular:
        return regular_representation(pi, spec.grid.value_or(grid));
      case RepSpec::Kind::Trivial: {
        std::map<int, cplx> g;
        if (pi.infinite_cyclic) g[1] = 1.0;
        for (int x = 1; x < static_cast<int>(pi.table.size()); ++x) g[x] = 1.0;
        if (g.empty()) g[0] = 1.0;
        return scalar_representation(pi, g);
      }
      case RepSpec::Kind::Explicit: {
        const int n = static_cast<int>(spec.generators.begin()->second.rows());
        auto b = Backend::matrix(spec.scale);
        const HObject m = HObject::free(b, n);
        std::map<int, Morphism> gens;
        for (const auto& [g, a] : spec.generators) {
          if (a.rows() != n || a.cols() != n)
            throw InputError("representation: image of " + std::to_string(g) + " is not " + std::to_string(n) +
                             "x" + std::to_string(n));
          gens.emplace(g, from_fibers(m, m, {a}));
        }
        return make_representation(pi, m, std::move(gens));
      }
    }
  } catch (const InputError&) {
    throw;
  } catch (const Error& e) {
    throw InputError(std::string("representation: ") + e.what());
  }
  throw InputError("representation: unknown kind");
}

// Writing

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json write_matrix(const Mat& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) {
      const cplx z = m(r, c);
      row.push_back(z.imag() == 0 ? json(z.real()) : json::array({z.real(), z.imag()}));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

json write_cell_complex(const CellComplex& k) {
  json cells = json::array();
  for (const auto& c : k.cells) cells.push_back(json::array({c.dim, c.id}));
  json bounds = json::object();
  for (const auto& [id, terms] : k.boundaries) {
    json t = json::array();
    for (const auto& bt : terms) {
      json coeffs = json::array();
      for (const auto& term : bt.coeff) coeffs.push_back(json::array({term.g, term.coeff}));
      t.push_back(json::array({bt.face, coeffs}));
    }
    bounds[id] = std::move(t);
  }
  json pi = k.pi.infinite_cyclic ? json{{"infinite_cyclic", true}} : json{{"finite", k.pi.table}};
  return json{{"cells", cells}, {"boundaries", bounds}, {"pi", pi}, {"chi", k.euler_characteristic}};
}

json write_rep(const RepSpec& spec) {
  json b;
  switch (spec.kind) {
    case RepSpec::Kind::Regular:
      b["kind"] = "regular";
      break;
    case RepSpec::Kind::Trivial:
      b["kind"] = "trivial";
      break;
    case RepSpec::Kind::Explicit:
      b["kind"] = "matrix";
      if (spec.scale != 1.0) b["scale"] = spec.scale;
      break;
  }
  if (spec.grid) b["grid"] = *spec.grid;
  json out{{"backend", b}};
  if (spec.kind == RepSpec::Kind::Explicit) {
    json g = json::object();
    for (const auto& [t, m] : spec.generators) g[std::to_string(t)] = write_matrix(m);
    out["generators"] = g;
  }
  return out;
}

json write_chain_complex(const ChainComplex& c) {
  const Backend& b = *c.backend();
  json be{{"kind", to_string(b.kind())}};
  switch (b.kind()) {
    case BackendKind::Matrix:
      be = {{"kind", "matrix"}};
      break;
    case BackendKind::FiniteGroup:
      be = {{"kind", "finite_group"}, {"table", b.group_table()}};
      break;
    case BackendKind::Family:
      be = {{"kind", "family"}, {"points", b.sample_points()}, {"weights", b.sample_weights()}};
      break;
  }
  if (b.scale() != 1.0) be["scale"] = b.scale();
  const int unit = b.kind() == BackendKind::FiniteGroup ? b.group_order() : 1;
  json ranks = json::array(), diffs = json::array();
  for (const auto& o : c.objects) ranks.push_back(o.dims.empty() ? 0 : o.dims[0] / unit);
  for (const auto& d : c.differentials) {
    json f = json::array();
    for (const auto& m : d.fibers) f.push_back(write_matrix(m));
    diffs.push_back(json{{"fibers", f}});
  }
  return json{{"chain_complex",
               {{"backend", be}, {"first_degree", c.first_degree}, {"ranks", ranks}, {"differentials", diffs}}}};
}

json write_element(const DetLineElement& x) {
  json frame = json::array();
  for (const auto& f : x.frame) frame.push_back(json::array({f.label, f.exponent}));
  return json{{"frame", frame}, {"log_coeff", number(x.log_coeff)}};
}

json write_verdict(const DetClassVerdict& v) {
  json ladder = json::array(), tail = json::array();
  for (const auto& [e, i] : v.ladder) ladder.push_back(json::array({number(e), number(i)}));
  for (double t : v.tail_bound) tail.push_back(number(t));
  return json{{"status", to_string(v.status)},
              {"log_integral", number(v.log_integral)},
              {"ns_exponent", v.ns_exponent ? number(*v.ns_exponent) : json(nullptr)},
              {"ladder", ladder},
              {"tail_bound", tail},
              {"diagnostic", v.diagnostic}};
}

}  // namespace l2t::cli
