#include "qobs/json_io.hpp"

#include <string>

#include "qobs/errors.hpp"

namespace qobs {

using nlohmann::json;

json matrix_to_json(const CMatrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

Complex complex_from_json(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw InvalidSpec("expected complex number as [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

// Empty matrices lose their column count in the row-major encoding, so the
// expected shape is supplied by the caller.
CMatrix sized_matrix(const json& j, Eigen::Index rows, Eigen::Index cols, const char* key) {
  CMatrix m = matrix_from_json(j.at(key));
  if (m.size() == 0) return CMatrix::Zero(rows, cols);
  if (m.rows() != rows || m.cols() != cols)
    throw InvalidSpec(std::string("matrix '") + key + "' has the wrong shape");
  return m;
}

}  // namespace

CMatrix matrix_from_json(const json& j) {
  if (!j.is_array()) throw InvalidSpec("expected matrix as array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (rows == 0) return CMatrix(0, 0);
  if (!j[0].is_array()) throw InvalidSpec("expected matrix as array of rows");
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  CMatrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw InvalidSpec("ragged matrix rows");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = complex_from_json(row[static_cast<std::size_t>(c)]);
  }
  return m;
}

json to_json(const OscillatorSpec& spec) {
  return json{{"m", spec.num_modes()},
              {"n", spec.num_channels()},
              {"omega", matrix_to_json(spec.omega())},
              {"c_minus", matrix_to_json(spec.c_minus())},
              {"c_plus", matrix_to_json(spec.c_plus())}};
}

OscillatorSpec spec_from_json(const json& j) {
  try {
    const auto m = j.at("m").get<Eigen::Index>();
    const auto n = j.at("n").get<Eigen::Index>();
    if (m <= 0 || n < 0) throw InvalidSpec("spec: m must be positive and n non-negative");
    return OscillatorSpec(sized_matrix(j, m, m, "omega"), sized_matrix(j, n, m, "c_minus"),
                          sized_matrix(j, n, m, "c_plus"));
  } catch (const json::exception& e) {
    throw InvalidSpec(std::string("spec: ") + e.what());
  }
}

json to_json(const StateSpace& ss) {
  return json{{"m", ss.num_modes()},
              {"inputs", ss.num_inputs()},
              {"outputs", ss.num_outputs()},
              {"a_minus", matrix_to_json(ss.a_minus)},
              {"a_plus", matrix_to_json(ss.a_plus)},
              {"b_minus", matrix_to_json(ss.b_minus)},
              {"b_plus", matrix_to_json(ss.b_plus)},
              {"c_minus", matrix_to_json(ss.c_minus)},
              {"c_plus", matrix_to_json(ss.c_plus)},
              {"d", matrix_to_json(ss.d)}};
}

StateSpace state_space_from_json(const json& j) {
  try {
    const CMatrix d = matrix_from_json(j.at("d"));
    const auto m = j.contains("m") ? j.at("m").get<Eigen::Index>()
                                   : matrix_from_json(j.at("a_minus")).rows();
    const auto n_in = j.contains("inputs") ? j.at("inputs").get<Eigen::Index>() : d.cols();
    const auto n_out = j.contains("outputs") ? j.at("outputs").get<Eigen::Index>() : d.rows();
    StateSpace ss{sized_matrix(j, m, m, "a_minus"),    sized_matrix(j, m, m, "a_plus"),
                  sized_matrix(j, m, n_in, "b_minus"), sized_matrix(j, m, n_in, "b_plus"),
                  sized_matrix(j, n_out, m, "c_minus"), sized_matrix(j, n_out, m, "c_plus"),
                  sized_matrix(j, n_out, n_in, "d")};
    ss.check_dimensions();
    return ss;
  } catch (const json::exception& e) {
    throw InvalidSpec(std::string("state space: ") + e.what());
  }
}

}  // namespace qobs
