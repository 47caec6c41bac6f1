#include <cmath>
#include <filesystem>
#include <numbers>

#include "l2t_cli/io.hpp"
#include "l2t_cli/run.hpp"

namespace l2t::cli {

namespace {

RepSpec scalar_rep(cplx z) {
  RepSpec s;
  s.kind = RepSpec::Kind::Explicit;
  s.generators[1] = Mat::Constant(1, 1, z);
  return s;
}

json with_rep(json complex, const RepSpec& rep) {
  complex["representation"] = write_rep(rep);
  return complex;
}

json divergent_complex(int grid) {
  json fibers = json::array();
  for (int j = 0; j < grid; ++j) fibers.push_back(json::array({json::array({std::exp(-1.0 / ((j + 0.5) / grid))})}));
  return {{"chain_complex",
           {{"backend", {{"kind", "interval"}, {"grid", grid}}},
            {"first_degree", 0},
            {"ranks", {1, 1}},
            {"differentials", json::array({{{"fibers", fibers}}})}}}};
}

json scalar_two_term(double d) {
  return {{"chain_complex",
           {{"backend", {{"kind", "matrix"}}},
            {"first_degree", 0},
            {"ranks", {1, 1}},
            {"differentials", json::array({{{"fibers", json::array({json::array({json::array({d})})})}}})}}}};
}

}  // namespace

std::vector<std::string> emit_examples(const std::string& out_dir) {
  RepSpec regular, trivial;
  regular.kind = RepSpec::Kind::Regular;
  trivial.kind = RepSpec::Kind::Trivial;
  const std::vector<std::pair<std::string, json>> files = {
      {"circle.json", write_cell_complex(examples::circle())},
      {"circle_two_cells.json", write_cell_complex(examples::circle_two_cells())},
      {"circle_regrep.json", with_rep(write_cell_complex(examples::circle()), regular)},
      {"torus.json", write_cell_complex(examples::torus())},
      {"lens_5_1.json", write_cell_complex(examples::lens(5, 1))},
      {"lens_7_2.json", write_cell_complex(examples::lens(7, 2))},
      {"lens_5_1_regrep.json", with_rep(write_cell_complex(examples::lens(5, 1)), regular)},
      {"lambda_minus1.json", write_rep(scalar_rep(-1.0))},
      {"lambda_twist.json", write_rep(scalar_rep(std::polar(1.0, 1.1)))},
      {"zeta5.json", write_rep(scalar_rep(std::polar(1.0, 2 * std::numbers::pi / 5)))},
      {"zeta7.json", write_rep(scalar_rep(std::polar(1.0, 2 * std::numbers::pi / 7)))},
      {"regular.json", write_rep(regular)},
      {"trivial.json", write_rep(trivial)},
      {"acyclic_d2.json", scalar_two_term(2.0)},
      {"divergent.json", divergent_complex(256)},
  };
  std::filesystem::create_directories(out_dir);
  std::vector<std::string> written;
  for (const auto& [name, j] : files) {
    const std::string path = (std::filesystem::path(out_dir) / name).string();
    write_text_file(path, j.dump(2) + "\n");
    written.push_back(path);
  }
  return written;
}

}  // namespace l2t::cli
