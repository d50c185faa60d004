#pragma once

#include <compare>
#include <string>
#include <string_view>
#include <vector>

#include "qobs/core_model.hpp"

namespace qobs {

/// Memoryless scattering element b_out = S b_in with S unitary.
/// Annihilation and creation sectors scatter identically (S and S^#).
struct StaticComponent {
  CMatrix s;
  std::vector<std::string> port_labels;

  /// Throws InvalidSpec if s is not square and unitary within tolerance.
  explicit StaticComponent(CMatrix s, std::vector<std::string> port_labels = {},
                           double tolerance = kDefaultTolerance);

  /// Zero-mode state-space view with D = S.
  StateSpace as_state_space() const;
};

/// S = (1/sqrt2) [[1, 1], [1, -1]].
StaticComponent beamsplitter_5050();

/// S = [[cos t, sin t], [sin t, -cos t]]; t = pi/4 is the 50-50 splitter.
StaticComponent beamsplitter(double theta);

enum class PortDirection { In, Out };

/// "component.in[k]" or "component.out[k]".
struct PortRef {
  std::string component;
  PortDirection direction = PortDirection::In;
  int index = 0;

  std::string to_string() const;
  auto operator<=>(const PortRef&) const = default;
};

PortRef in_port(std::string component, int index);
PortRef out_port(std::string component, int index);

/// Parses the textual port form; throws NetworkError(PortNotFound) if malformed.
PortRef parse_port(std::string_view text);

struct Block {
  std::string name;
  StateSpace model;
  bool is_static = false;
};

Block make_block(std::string name, const OscillatorSpec& spec);
Block make_block(std::string name, const StateSpace& model);
Block make_block(std::string name, const StaticComponent& component);

struct Edge {
  PortRef from;  // an output port
  PortRef to;    // an input port
};

class ComposedNetwork {
 public:
  const std::vector<Block>& blocks() const { return blocks_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<PortRef>& external_inputs() const { return external_inputs_; }
  const std::vector<PortRef>& external_outputs() const { return external_outputs_; }

  Eigen::Index num_modes() const;
  /// Offset of a block's first mode in the joint state vector.
  Eigen::Index mode_offset(std::string_view block) const;

  /// Direct sum of all blocks with every port in declaration order.
  StateSpace concatenated() const;
  DoubledForm doubled() const;

  /// Position of a port in the concatenated input (or output) ordering.
  /// Throws NetworkError(PortNotFound).
  Eigen::Index global_index(const PortRef& port) const;

  /// Position of a port among the current external inputs/outputs, or -1.
  Eigen::Index external_index(const PortRef& port) const;

 private:
  friend ComposedNetwork concatenate(std::vector<Block> blocks);
  friend ComposedNetwork connect(ComposedNetwork net, const PortRef& out, const PortRef& in);

  const Block& block(std::string_view name) const;

  std::vector<Block> blocks_;
  std::vector<Edge> edges_;
  std::vector<PortRef> external_inputs_;
  std::vector<PortRef> external_outputs_;
};

/// Throws InvalidArgument for an empty list or duplicate block names.
ComposedNetwork concatenate(std::vector<Block> blocks);

/// Routes an external output into an external input.
/// Throws NetworkError with PortNotFound or PortAlreadyUsed.
ComposedNetwork connect(ComposedNetwork net, const PortRef& out, const PortRef& in);
ComposedNetwork connect(ComposedNetwork net, std::string_view out, std::string_view in);

/// Reciprocal condition number below which an instantaneous loop is rejected.
inline constexpr double kLoopConditionThreshold = 1e-12;

struct Reduction {
  StateSpace model;
  std::vector<std::string> warnings;
};

/// Eliminates internal edges. Inputs and outputs of the result follow
/// net.external_inputs() / net.external_outputs().
/// Throws NetworkError(SingularLoop) when I - D_loop is numerically singular.
Reduction reduce_detailed(const ComposedNetwork& net);
StateSpace reduce(const ComposedNetwork& net);

}  // namespace qobs
