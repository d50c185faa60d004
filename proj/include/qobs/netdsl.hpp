#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "qobs/core_model.hpp"
#include "qobs/dynamics.hpp"
#include "qobs/errors.hpp"
#include "qobs/network.hpp"

namespace qobs::dsl {

/// 1-based line and byte column.
struct SourcePos {
  int line = 1;
  int column = 1;
};

using Params = std::vector<std::pair<std::string, double>>;

enum class ComponentKind { Mode, BeamSplitter };

struct ComponentDecl {
  std::string name;
  ComponentKind kind = ComponentKind::Mode;
  Params params;                    // omega for modes, theta for splitters
  std::vector<Coupling> couplings;  // modes only, one per channel
  SourcePos pos;

  bool operator==(const ComponentDecl& o) const;
};

struct ConnectionDecl {
  PortRef from;
  PortRef to;
  SourcePos pos;

  bool operator==(const ConnectionDecl& o) const { return from == o.from && to == o.to; }
};

struct IoDecl {
  std::string alias;
  PortRef port;
  SourcePos pos;

  bool operator==(const IoDecl& o) const { return alias == o.alias && port == o.port; }
};

struct DriveDecl {
  PortRef port;
  std::string shape;  // const, sin or pulse
  Params params;
  SourcePos pos;

  bool operator==(const DriveDecl& o) const {
    return port == o.port && shape == o.shape && params == o.params;
  }
};

/// Equality ignores source positions.
struct NetworkDescription {
  std::vector<ComponentDecl> components;
  std::vector<ConnectionDecl> connections;
  std::vector<IoDecl> inputs;
  std::vector<IoDecl> outputs;
  std::vector<DriveDecl> drives;

  bool operator==(const NetworkDescription&) const = default;
};

enum class ErrorKind { Syntax, UnknownComponent, BadParameter, DanglingPort, DuplicateConnection };

std::string_view to_string(ErrorKind kind);

struct ParseError {
  int line = 1;
  int column = 1;
  ErrorKind kind = ErrorKind::Syntax;
  std::string message;

  /// "line:column: kind: message"
  std::string format() const;
};

/// Returns the description or the first error. Never throws on malformed input.
std::variant<NetworkDescription, ParseError> parse(std::string_view text);

/// Canonical source text; parse(to_source(d)) == d.
std::string to_source(const NetworkDescription& desc);

/// Compile-time failure with a source position (dangling declared io).
class DslError : public Error {
 public:
  explicit DslError(ParseError error) : Error(error.format()), error_(std::move(error)) {}
  const ParseError& error() const { return error_; }

 private:
  ParseError error_;
};

/// Concatenates components in declaration order and applies connections in
/// file order.
ComposedNetwork build_network(const NetworkDescription& desc);

/// Reduced model. When any input/output alias is declared, every open port
/// must be declared; otherwise DslError(DanglingPort). Propagates NetworkError.
StateSpace compile(const NetworkDescription& desc);

/// Drives mapped onto the reduced model's external input indices.
std::vector<Drive> compile_drives(const NetworkDescription& desc, const ComposedNetwork& net);

}  // namespace qobs::dsl
