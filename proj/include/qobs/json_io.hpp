#pragma once

#include "json.hpp"

#include "qobs/core_model.hpp"

namespace qobs {

// Complex numbers serialise as [re, im]; matrices as row-major arrays of rows.

nlohmann::json matrix_to_json(const CMatrix& m);
/// Throws InvalidSpec on ragged rows or malformed entries.
CMatrix matrix_from_json(const nlohmann::json& j);

nlohmann::json to_json(const OscillatorSpec& spec);
OscillatorSpec spec_from_json(const nlohmann::json& j);

nlohmann::json to_json(const StateSpace& ss);
StateSpace state_space_from_json(const nlohmann::json& j);

}  // namespace qobs
