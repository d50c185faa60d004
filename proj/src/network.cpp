#include "qobs/network.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <set>

#include <Eigen/LU>

#include "qobs/errors.hpp"

namespace qobs {

using linalg::max_abs;

StaticComponent::StaticComponent(CMatrix s_in, std::vector<std::string> labels, double tolerance)
    : s(std::move(s_in)), port_labels(std::move(labels)) {
  if (s.rows() != s.cols()) throw InvalidSpec("StaticComponent: S must be square");
  const double deviation = max_abs(s * s.adjoint() - CMatrix::Identity(s.rows(), s.cols()));
  if (deviation > tolerance) throw InvalidSpec("StaticComponent: S is not unitary");
  if (!port_labels.empty() && static_cast<Eigen::Index>(port_labels.size()) != s.rows())
    throw InvalidSpec("StaticComponent: one label per port expected");
}

StateSpace StaticComponent::as_state_space() const {
  StateSpace ss = StateSpace::zero(0, s.cols(), s.rows());
  ss.d = s;
  return ss;
}

StaticComponent beamsplitter_5050() {
  const double r = std::numbers::sqrt2 / 2.0;
  CMatrix s(2, 2);
  s << r, r, r, -r;
  return StaticComponent(std::move(s));
}

StaticComponent beamsplitter(double theta) {
  if (theta == std::numbers::pi / 4.0) return beamsplitter_5050();
  CMatrix s(2, 2);
  s << std::cos(theta), std::sin(theta), std::sin(theta), -std::cos(theta);
  return StaticComponent(std::move(s));
}

std::string PortRef::to_string() const {
  return component + (direction == PortDirection::In ? ".in[" : ".out[") + std::to_string(index) +
         "]";
}

PortRef in_port(std::string component, int index) {
  return PortRef{std::move(component), PortDirection::In, index};
}

PortRef out_port(std::string component, int index) {
  return PortRef{std::move(component), PortDirection::Out, index};
}

PortRef parse_port(std::string_view text) {
  auto fail = [&] {
    return NetworkError(NetworkErrorKind::PortNotFound,
                        "malformed port '" + std::string(text) + "'");
  };
  const auto dot = text.rfind('.');
  if (dot == std::string_view::npos || dot == 0) throw fail();
  std::string_view rest = text.substr(dot + 1);
  PortRef port;
  port.component = std::string(text.substr(0, dot));
  if (rest.starts_with("in[")) {
    port.direction = PortDirection::In;
    rest.remove_prefix(3);
  } else if (rest.starts_with("out[")) {
    port.direction = PortDirection::Out;
    rest.remove_prefix(4);
  } else {
    throw fail();
  }
  if (rest.size() < 2 || rest.back() != ']') throw fail();
  rest.remove_suffix(1);
  const auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), port.index);
  if (ec != std::errc{} || ptr != rest.data() + rest.size() || port.index < 0) throw fail();
  return port;
}

Block make_block(std::string name, const OscillatorSpec& spec) {
  return Block{std::move(name), derive_state_space(spec), false};
}

Block make_block(std::string name, const StateSpace& model) {
  model.check_dimensions();
  return Block{std::move(name), model, model.num_modes() == 0};
}

Block make_block(std::string name, const StaticComponent& component) {
  return Block{std::move(name), component.as_state_space(), true};
}

const Block& ComposedNetwork::block(std::string_view name) const {
  for (const Block& b : blocks_)
    if (b.name == name) return b;
  throw NetworkError(NetworkErrorKind::PortNotFound,
                     "no component named '" + std::string(name) + "'");
}

Eigen::Index ComposedNetwork::num_modes() const {
  Eigen::Index m = 0;
  for (const Block& b : blocks_) m += b.model.num_modes();
  return m;
}

Eigen::Index ComposedNetwork::mode_offset(std::string_view name) const {
  Eigen::Index offset = 0;
  for (const Block& b : blocks_) {
    if (b.name == name) return offset;
    offset += b.model.num_modes();
  }
  throw NetworkError(NetworkErrorKind::PortNotFound,
                     "no component named '" + std::string(name) + "'");
}

Eigen::Index ComposedNetwork::global_index(const PortRef& port) const {
  Eigen::Index offset = 0;
  for (const Block& b : blocks_) {
    const Eigen::Index count =
        port.direction == PortDirection::In ? b.model.num_inputs() : b.model.num_outputs();
    if (b.name == port.component) {
      if (port.index < 0 || port.index >= count)
        throw NetworkError(NetworkErrorKind::PortNotFound,
                           "port " + port.to_string() + " is out of range");
      return offset + port.index;
    }
    offset += count;
  }
  throw NetworkError(NetworkErrorKind::PortNotFound,
                     "no component named '" + port.component + "'");
}

Eigen::Index ComposedNetwork::external_index(const PortRef& port) const {
  const auto& list =
      port.direction == PortDirection::In ? external_inputs_ : external_outputs_;
  const auto it = std::find(list.begin(), list.end(), port);
  return it == list.end() ? -1 : static_cast<Eigen::Index>(it - list.begin());
}

StateSpace ComposedNetwork::concatenated() const {
  StateSpace out = StateSpace::zero(0, 0, 0);
  for (const Block& b : blocks_) {
    const StateSpace& m = b.model;
    out.a_minus = linalg::direct_sum(out.a_minus, m.a_minus);
    out.a_plus = linalg::direct_sum(out.a_plus, m.a_plus);
    out.b_minus = linalg::direct_sum(out.b_minus, m.b_minus);
    out.b_plus = linalg::direct_sum(out.b_plus, m.b_plus);
    out.c_minus = linalg::direct_sum(out.c_minus, m.c_minus);
    out.c_plus = linalg::direct_sum(out.c_plus, m.c_plus);
    out.d = linalg::direct_sum(out.d, m.d);
  }
  return out;
}

DoubledForm ComposedNetwork::doubled() const { return to_doubled(concatenated()); }

ComposedNetwork concatenate(std::vector<Block> blocks) {
  if (blocks.empty()) throw InvalidArgument("concatenate: empty block list");
  std::set<std::string> names;
  ComposedNetwork net;
  for (const Block& b : blocks) {
    b.model.check_dimensions();
    if (b.name.empty() || !names.insert(b.name).second)
      throw InvalidArgument("concatenate: block names must be unique and non-empty ('" + b.name +
                            "')");
    for (int k = 0; k < b.model.num_inputs(); ++k) net.external_inputs_.push_back(in_port(b.name, k));
    for (int k = 0; k < b.model.num_outputs(); ++k)
      net.external_outputs_.push_back(out_port(b.name, k));
  }
  net.blocks_ = std::move(blocks);
  return net;
}

ComposedNetwork connect(ComposedNetwork net, const PortRef& out, const PortRef& in) {
  if (out.direction != PortDirection::Out)
    throw NetworkError(NetworkErrorKind::PortNotFound, out.to_string() + " is not an output port");
  if (in.direction != PortDirection::In)
    throw NetworkError(NetworkErrorKind::PortNotFound, in.to_string() + " is not an input port");
  // Validates existence and range.
  net.global_index(out);
  net.global_index(in);
  auto take = [](std::vector<PortRef>& list, const PortRef& port) {
    const auto it = std::find(list.begin(), list.end(), port);
    if (it == list.end())
      throw NetworkError(NetworkErrorKind::PortAlreadyUsed, port.to_string() + " is already connected");
    list.erase(it);
  };
  take(net.external_outputs_, out);
  take(net.external_inputs_, in);
  net.edges_.push_back(Edge{out, in});
  return net;
}

ComposedNetwork connect(ComposedNetwork net, std::string_view out, std::string_view in) {
  return connect(std::move(net), parse_port(out), parse_port(in));
}

namespace {

std::vector<Eigen::Index> indices_of(const ComposedNetwork& net, const std::vector<PortRef>& ports) {
  std::vector<Eigen::Index> idx;
  idx.reserve(ports.size());
  for (const PortRef& p : ports) idx.push_back(net.global_index(p));
  return idx;
}

}  // namespace

Reduction reduce_detailed(const ComposedNetwork& net) {
  Reduction result;
  if (net.external_inputs().empty())
    result.warnings.push_back("network has no external inputs");
  if (net.external_outputs().empty())
    result.warnings.push_back("network has no external outputs");

  const StateSpace full = net.concatenated();
  if (net.edges().empty()) {
    result.model = full;
    return result;
  }

  // Internal inputs in declaration order make the result independent of the
  // order in which edges were added.
  std::vector<Edge> edges = net.edges();
  std::sort(edges.begin(), edges.end(), [&](const Edge& x, const Edge& y) {
    return net.global_index(x.to) < net.global_index(y.to);
  });
  std::vector<Eigen::Index> int_in;
  std::vector<Eigen::Index> int_src;
  for (const Edge& e : edges) {
    int_in.push_back(net.global_index(e.to));
    int_src.push_back(net.global_index(e.from));
  }
  const std::vector<Eigen::Index> ext_in = indices_of(net, net.external_inputs());
  const std::vector<Eigen::Index> ext_out = indices_of(net, net.external_outputs());
  const auto all_modes = Eigen::all;

  const auto n_int = static_cast<Eigen::Index>(int_in.size());
  const CMatrix d_loop = full.d(int_src, int_in);
  const CMatrix loop = CMatrix::Identity(n_int, n_int) - d_loop;
  if (linalg::reciprocal_condition(loop) < kLoopConditionThreshold)
    throw NetworkError(NetworkErrorKind::SingularLoop,
                       "reduce: instantaneous feedback loop is singular (I - D_loop not invertible)");
  const CMatrix k = loop.partialPivLu().inverse();
  const CMatrix kc = k.conjugate();

  const CMatrix cm_src = full.c_minus(int_src, all_modes);
  const CMatrix cp_src = full.c_plus(int_src, all_modes);
  const CMatrix d_src_ext = full.d(int_src, ext_in);
  const CMatrix bm_int = full.b_minus(all_modes, int_in);
  const CMatrix bp_int = full.b_plus(all_modes, int_in);
  const CMatrix d_out_int = full.d(ext_out, int_in);

  // u_int = K (C-_src a + C+_src a^# + D_src,ext u_ext)
  StateSpace& r = result.model;
  r.a_minus = full.a_minus + bm_int * k * cm_src + bp_int * kc * cp_src.conjugate();
  r.a_plus = full.a_plus + bm_int * k * cp_src + bp_int * kc * cm_src.conjugate();
  r.b_minus = full.b_minus(all_modes, ext_in) + bm_int * k * d_src_ext;
  r.b_plus = full.b_plus(all_modes, ext_in) + bp_int * kc * d_src_ext.conjugate();
  r.c_minus = full.c_minus(ext_out, all_modes) + d_out_int * k * cm_src;
  r.c_plus = full.c_plus(ext_out, all_modes) + d_out_int * k * cp_src;
  r.d = full.d(ext_out, ext_in) + d_out_int * k * d_src_ext;
  return result;
}

StateSpace reduce(const ComposedNetwork& net) { return reduce_detailed(net).model; }

}  // namespace qobs
