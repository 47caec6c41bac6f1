#pragma once

// JSON input and output for cell complexes, representations and explicit
// chain complexes.
//
// Cell complex file:
//   {"cells": [[dim, id], ...],
//    "boundaries": {id: [[face, [[g, coeff], ...]], ...]},
//    "pi": {"finite": table} | {"infinite_cyclic": true},
//    "chi": n,
//    "representation": {...}}                      (optional)
//
// Representation file:
//   {"backend": {"kind": "matrix", "scale": s}, "generators": {"g": matrix}}
//   {"backend": {"kind": "regular", "grid": n}}
//   {"backend": {"kind": "trivial"}}
//
// Chain complex file:
//   {"chain_complex": {"backend": {...}, "first_degree": k, "ranks": [...],
//                      "differentials": [{"fibers": [matrix, ...]}, ...]}}
//   backend kinds: matrix, finite_group (table), interval (grid),
//   circle (grid), family (points, weights). Free ranks count copies of the
//   module, so finite_group fibers have |G| * rank rows.
//
// A matrix is an array of rows; an entry is a number or [re, im].

#include <optional>
#include <stdexcept>
#include <string>
#include <variant>

#include <json.hpp>

#include "l2t/cellular.hpp"

namespace l2t::cli {

using json = nlohmann::json;

// Malformed or invalid input; the message names the file and the line or field.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json read_json_file(const std::string& path);
json parse_json_text(const std::string& text, const std::string& name);
void write_text_file(const std::string& path, const std::string& text);

// A position inside a parsed document, used for field diagnostics.
class Node {
 public:
  Node(const json& j, std::string file, std::string path = "")
      : j_(&j), file_(std::move(file)), path_(std::move(path)) {}

  const json& raw() const { return *j_; }
  const std::string& path() const { return path_; }
  bool has(const std::string& key) const;
  Node at(const std::string& key) const;
  Node at(size_t i) const;
  size_t size() const;
  std::vector<std::pair<std::string, Node>> items() const;

  long long as_int() const;
  double as_double() const;
  std::string as_string() const;
  bool as_bool() const;
  cplx as_complex() const;
  Mat as_matrix() const;

  [[noreturn]] void fail(const std::string& what) const;

 private:
  void expect(bool ok, const char* type) const;
  const json* j_;
  std::string file_, path_;
};

struct RepSpec {
  enum class Kind { Explicit, Regular, Trivial };
  Kind kind = Kind::Regular;
  double scale = 1.0;
  std::optional<int> grid;
  std::map<int, Mat> generators;
};

struct CellInput {
  CellComplex complex;
  std::optional<RepSpec> rep;
};

using Input = std::variant<CellInput, ChainComplex>;

Input parse_input(const json& j, const std::string& file);
Input read_input(const std::string& path);
RepSpec parse_rep(const Node& n);
RepSpec read_rep(const std::string& path);
// Throws InputError when the representation does not fit pi.
Representation build_representation(const RepSpec& spec, const PiSpec& pi, int grid);

json write_matrix(const Mat& m);
json write_cell_complex(const CellComplex& k);
json write_rep(const RepSpec& spec);
// Family backends are written as explicit point lists.
json write_chain_complex(const ChainComplex& c);

json write_element(const DetLineElement& x);
json write_verdict(const DetClassVerdict& v);
// Non-finite values become null.
json number(double x);

}  // namespace l2t::cli
