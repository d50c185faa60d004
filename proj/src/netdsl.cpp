#include "qobs/netdsl.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>

namespace qobs::dsl {

bool ComponentDecl::operator==(const ComponentDecl& o) const {
  if (name != o.name || kind != o.kind || params != o.params) return false;
  if (couplings.size() != o.couplings.size()) return false;
  for (std::size_t i = 0; i < couplings.size(); ++i)
    if (couplings[i].kind != o.couplings[i].kind || couplings[i].rate != o.couplings[i].rate)
      return false;
  return true;
}

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Syntax: return "syntax";
    case ErrorKind::UnknownComponent: return "unknown-component";
    case ErrorKind::BadParameter: return "bad-parameter";
    case ErrorKind::DanglingPort: return "dangling-port";
    case ErrorKind::DuplicateConnection: return "duplicate-connection";
  }
  return "syntax";
}

std::string ParseError::format() const {
  return std::to_string(line) + ":" + std::to_string(column) + ": " + std::string(to_string(kind)) +
         ": " + message;
}

namespace {

enum class Tok { Ident, Number, Punct, Newline, End };

struct Token {
  Tok type = Tok::End;
  std::string text;  // identifier, punctuation ("->" included) or number spelling
  double value = 0.0;
  SourcePos pos;
};

struct Failure {
  ParseError error;
};

[[noreturn]] void fail(SourcePos pos, ErrorKind kind, std::string message) {
  throw Failure{ParseError{pos.line, pos.column, kind, std::move(message)}};
}

bool is_ident_start(unsigned char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; }
bool is_ident_char(unsigned char c) { return is_ident_start(c) || (c >= '0' && c <= '9') || c == '~'; }
bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }

// Newlines inside () {} [] are dropped so lists may span lines.
class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {
    if (text_.starts_with("\xEF\xBB\xBF")) i_ = 3;
  }

  Token next() {
    for (;;) {
      Token t = raw();
      if (t.type == Tok::Newline && depth_ > 0) continue;
      if (t.type == Tok::Punct) {
        const char c = t.text[0];
        if (c == '(' || c == '{' || c == '[') ++depth_;
        if ((c == ')' || c == '}' || c == ']') && depth_ > 0) --depth_;
      }
      return t;
    }
  }

 private:
  SourcePos here() const { return {line_, static_cast<int>(i_ - line_start_) + 1}; }

  Token raw() {
    while (i_ < text_.size()) {
      const unsigned char c = static_cast<unsigned char>(text_[i_]);
      if (c == ' ' || c == '\t' || c == '\r') {
        ++i_;
      } else if (c == '#') {
        while (i_ < text_.size() && text_[i_] != '\n') ++i_;
      } else {
        break;
      }
    }
    Token t;
    t.pos = here();
    if (i_ >= text_.size()) return t;
    const unsigned char c = static_cast<unsigned char>(text_[i_]);
    if (c == '\n') {
      ++i_;
      ++line_;
      line_start_ = i_;
      t.type = Tok::Newline;
      return t;
    }
    if (is_ident_start(c)) {
      const std::size_t start = i_;
      while (i_ < text_.size() && is_ident_char(static_cast<unsigned char>(text_[i_]))) ++i_;
      t.type = Tok::Ident;
      t.text = std::string(text_.substr(start, i_ - start));
      return t;
    }
    if (is_digit(c) || (c == '.' && i_ + 1 < text_.size() && is_digit(static_cast<unsigned char>(text_[i_ + 1])))) {
      const std::size_t start = i_;
      while (i_ < text_.size() && is_digit(static_cast<unsigned char>(text_[i_]))) ++i_;
      if (i_ < text_.size() && text_[i_] == '.') {
        ++i_;
        while (i_ < text_.size() && is_digit(static_cast<unsigned char>(text_[i_]))) ++i_;
      }
      if (i_ < text_.size() && (text_[i_] == 'e' || text_[i_] == 'E')) {
        std::size_t j = i_ + 1;
        if (j < text_.size() && (text_[j] == '+' || text_[j] == '-')) ++j;
        if (j < text_.size() && is_digit(static_cast<unsigned char>(text_[j]))) {
          i_ = j;
          while (i_ < text_.size() && is_digit(static_cast<unsigned char>(text_[i_]))) ++i_;
        }
      }
      t.type = Tok::Number;
      t.text = std::string(text_.substr(start, i_ - start));
      const auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.value);
      if (ec != std::errc{} || ptr != t.text.data() + t.text.size() || !std::isfinite(t.value))
        fail(t.pos, ErrorKind::BadParameter, "number '" + t.text + "' is out of range");
      return t;
    }
    if (c == '-' && i_ + 1 < text_.size() && text_[i_ + 1] == '>') {
      i_ += 2;
      t.type = Tok::Punct;
      t.text = "->";
      return t;
    }
    static constexpr std::string_view kPunct = "(){}[]=,.;-*/";
    if (kPunct.find(static_cast<char>(c)) != std::string_view::npos) {
      ++i_;
      t.type = Tok::Punct;
      t.text = std::string(1, static_cast<char>(c));
      return t;
    }
    char buf[32];
    if (c >= 0x20 && c < 0x7f)
      std::snprintf(buf, sizeof buf, "'%c'", c);
    else
      std::snprintf(buf, sizeof buf, "byte 0x%02x", c);
    fail(t.pos, ErrorKind::Syntax, std::string("unexpected character ") + buf);
  }

  std::string_view text_;
  std::size_t i_ = 0;
  int line_ = 1;
  std::size_t line_start_ = 0;
  int depth_ = 0;
};

const std::set<std::string, std::less<>> kKeywords{"mode", "bs", "input", "output", "connect", "drive", "couple"};

struct ComponentInfo {
  ComponentKind kind;
  int inputs;
  int outputs;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : lexer_(text) { advance(); }

  NetworkDescription run() {
    for (;;) {
      while (is_separator()) advance();
      if (tok_.type == Tok::End) break;
      if (tok_.type != Tok::Ident) fail(tok_.pos, ErrorKind::Syntax, "expected a statement keyword");
      const std::string kw = tok_.text;
      const SourcePos pos = tok_.pos;
      advance();
      if (kw == "mode") parse_mode(pos);
      else if (kw == "bs") parse_bs(pos);
      else if (kw == "input") parse_io(pos, PortDirection::In);
      else if (kw == "output") parse_io(pos, PortDirection::Out);
      else if (kw == "connect") parse_connect(pos);
      else if (kw == "drive") parse_drive_stmt(pos);
      else fail(pos, ErrorKind::Syntax, "unknown statement '" + kw + "'");
      if (!is_separator() && tok_.type != Tok::End)
        fail(tok_.pos, ErrorKind::Syntax, "expected end of statement");
    }
    for (const DriveDecl& d : desc_.drives)
      if (connected_.contains(d.port))
        fail(d.pos, ErrorKind::BadParameter, "drive target " + d.port.to_string() + " is connected internally");
    return std::move(desc_);
  }

 private:
  void advance() { tok_ = lexer_.next(); }

  bool is_separator() const {
    return tok_.type == Tok::Newline || (tok_.type == Tok::Punct && tok_.text == ";");
  }

  bool at_punct(std::string_view p) const { return tok_.type == Tok::Punct && tok_.text == p; }

  void expect_punct(std::string_view p) {
    if (!at_punct(p)) fail(tok_.pos, ErrorKind::Syntax, "expected '" + std::string(p) + "'");
    advance();
  }

  std::string expect_ident(std::string_view what) {
    if (tok_.type != Tok::Ident) fail(tok_.pos, ErrorKind::Syntax, "expected " + std::string(what));
    std::string s = tok_.text;
    advance();
    return s;
  }

  std::string expect_name() {
    const SourcePos pos = tok_.pos;
    std::string s = expect_ident("a name");
    if (kKeywords.contains(s)) fail(pos, ErrorKind::Syntax, "'" + s + "' is a keyword");
    return s;
  }

  double factor() {
    if (tok_.type == Tok::Number) {
      const double v = tok_.value;
      advance();
      return v;
    }
    if (tok_.type == Tok::Ident && tok_.text == "pi") {
      advance();
      return std::numbers::pi;
    }
    fail(tok_.pos, ErrorKind::Syntax, "expected a number");
  }

  // number := ['-'] factor [('*' | '/') factor], factor := decimal | pi
  double number(SourcePos* where = nullptr) {
    if (where) *where = tok_.pos;
    const SourcePos start = tok_.pos;
    bool negative = false;
    if (at_punct("-")) {
      negative = true;
      advance();
    }
    double v = factor();
    if (at_punct("*")) {
      advance();
      v *= factor();
    } else if (at_punct("/")) {
      advance();
      const double d = factor();
      if (d == 0.0) fail(start, ErrorKind::BadParameter, "division by zero");
      v /= d;
    }
    if (!std::isfinite(v)) fail(start, ErrorKind::BadParameter, "number is not finite");
    return negative ? -v : v;
  }

  Params params(const std::set<std::string, std::less<>>& allowed, std::string_view owner) {
    Params out;
    if (!at_punct("(")) return out;
    advance();
    if (at_punct(")")) {
      advance();
      return out;
    }
    for (;;) {
      const SourcePos key_pos = tok_.pos;
      std::string key = expect_ident("a parameter name");
      if (!allowed.contains(key))
        fail(key_pos, ErrorKind::BadParameter, "unknown parameter '" + key + "' for " + std::string(owner));
      for (const auto& kv : out)
        if (kv.first == key) fail(key_pos, ErrorKind::BadParameter, "parameter '" + key + "' given twice");
      expect_punct("=");
      out.emplace_back(std::move(key), number());
      if (at_punct(",")) {
        advance();
        continue;
      }
      expect_punct(")");
      return out;
    }
  }

  void declare(const std::string& name, SourcePos pos, ComponentInfo info) {
    if (components_.contains(name)) fail(pos, ErrorKind::BadParameter, "component '" + name + "' declared twice");
    components_.emplace(name, info);
  }

  void parse_mode(SourcePos pos) {
    ComponentDecl decl;
    decl.pos = pos;
    decl.kind = ComponentKind::Mode;
    const SourcePos name_pos = tok_.pos;
    decl.name = expect_name();
    decl.params = params({"omega"}, "mode");
    if (at_punct("{")) {
      advance();
      for (;;) {
        while (at_punct(";")) advance();
        if (at_punct("}")) {
          advance();
          break;
        }
        const SourcePos kw_pos = tok_.pos;
        if (expect_ident("'couple'") != "couple") fail(kw_pos, ErrorKind::Syntax, "expected 'couple'");
        const SourcePos kind_pos = tok_.pos;
        const std::string kind = expect_ident("'annihilation' or 'creation'");
        Coupling c{CouplingKind::Annihilation, 0.0};
        if (kind == "creation") c.kind = CouplingKind::Creation;
        else if (kind != "annihilation")
          fail(kind_pos, ErrorKind::Syntax, "expected 'annihilation' or 'creation'");
        SourcePos rate_pos;
        c.rate = number(&rate_pos);
        if (c.rate < 0.0) fail(rate_pos, ErrorKind::BadParameter, "coupling rate must be non-negative");
        decl.couplings.push_back(c);
      }
    }
    const int n = static_cast<int>(decl.couplings.size());
    declare(decl.name, name_pos, {ComponentKind::Mode, n, n});
    desc_.components.push_back(std::move(decl));
  }

  void parse_bs(SourcePos pos) {
    ComponentDecl decl;
    decl.pos = pos;
    decl.kind = ComponentKind::BeamSplitter;
    const SourcePos name_pos = tok_.pos;
    decl.name = expect_name();
    decl.params = params({"theta"}, "bs");
    declare(decl.name, name_pos, {ComponentKind::BeamSplitter, 2, 2});
    desc_.components.push_back(std::move(decl));
  }

  PortRef port(SourcePos* where = nullptr) {
    const SourcePos pos = tok_.pos;
    if (where) *where = pos;
    PortRef p;
    p.component = expect_ident("a port such as name.out[0]");
    expect_punct(".");
    const SourcePos dir_pos = tok_.pos;
    const std::string dir = expect_ident("'in' or 'out'");
    if (dir == "in") p.direction = PortDirection::In;
    else if (dir == "out") p.direction = PortDirection::Out;
    else fail(dir_pos, ErrorKind::Syntax, "expected 'in' or 'out'");
    expect_punct("[");
    const SourcePos idx_pos = tok_.pos;
    if (tok_.type != Tok::Number || tok_.value != std::floor(tok_.value) || tok_.value > 1e6 ||
        tok_.text.find_first_of(".eE") != std::string::npos)
      fail(idx_pos, ErrorKind::Syntax, "expected a channel index");
    p.index = static_cast<int>(tok_.value);
    advance();
    expect_punct("]");
    const auto it = components_.find(p.component);
    if (it == components_.end())
      fail(pos, ErrorKind::UnknownComponent, "unknown component '" + p.component + "'");
    const int count = p.direction == PortDirection::In ? it->second.inputs : it->second.outputs;
    if (p.index >= count)
      fail(idx_pos, ErrorKind::DanglingPort,
           p.to_string() + " is out of range (" + std::to_string(count) + " channels)");
    return p;
  }

  void claim(const PortRef& p, SourcePos pos) {
    if (!used_.insert(p).second)
      fail(pos, ErrorKind::DuplicateConnection, p.to_string() + " is already in use");
  }

  void parse_io(SourcePos pos, PortDirection direction) {
    IoDecl decl;
    decl.pos = pos;
    const SourcePos alias_pos = tok_.pos;
    decl.alias = expect_name();
    if (!aliases_.emplace(decl.alias, PortRef{}).second)
      fail(alias_pos, ErrorKind::BadParameter, "alias '" + decl.alias + "' declared twice");
    expect_punct("=");
    SourcePos port_pos;
    decl.port = port(&port_pos);
    if (decl.port.direction != direction)
      fail(port_pos, ErrorKind::Syntax,
           direction == PortDirection::In ? "input alias needs an .in[] port" : "output alias needs an .out[] port");
    claim(decl.port, port_pos);
    aliases_[decl.alias] = decl.port;
    (direction == PortDirection::In ? desc_.inputs : desc_.outputs).push_back(std::move(decl));
  }

  void parse_connect(SourcePos pos) {
    ConnectionDecl decl;
    decl.pos = pos;
    SourcePos from_pos, to_pos;
    decl.from = port(&from_pos);
    if (decl.from.direction != PortDirection::Out)
      fail(from_pos, ErrorKind::Syntax, "connection source must be an .out[] port");
    expect_punct("->");
    decl.to = port(&to_pos);
    if (decl.to.direction != PortDirection::In)
      fail(to_pos, ErrorKind::Syntax, "connection sink must be an .in[] port");
    claim(decl.from, from_pos);
    claim(decl.to, to_pos);
    connected_.insert(decl.to);
    desc_.connections.push_back(std::move(decl));
  }

  void parse_drive_stmt(SourcePos pos) {
    DriveDecl decl;
    decl.pos = pos;
    const SourcePos target_pos = tok_.pos;
    const auto alias = tok_.type == Tok::Ident ? aliases_.find(tok_.text) : aliases_.end();
    if (alias != aliases_.end()) {
      decl.port = alias->second;
      advance();
    } else {
      decl.port = port();
    }
    if (decl.port.direction != PortDirection::In)
      fail(target_pos, ErrorKind::Syntax, "drive target must be an input");
    const SourcePos shape_pos = tok_.pos;
    decl.shape = expect_ident("a drive shape (const, sin, pulse)");
    if (decl.shape != "const" && decl.shape != "sin" && decl.shape != "pulse")
      fail(shape_pos, ErrorKind::BadParameter, "unknown drive shape '" + decl.shape + "'");
    decl.params = params({"amp", "phase", "freq", "start", "stop"}, decl.shape);
    try {
      parse_drive(drive_text(decl));
    } catch (const Error& e) {
      fail(shape_pos, ErrorKind::BadParameter, e.what());
    }
    desc_.drives.push_back(std::move(decl));
  }

 public:
  static std::string drive_text(const DriveDecl& d) {
    std::string s = d.shape + ":";
    for (std::size_t i = 0; i < d.params.size(); ++i) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", d.params[i].second);
      s += (i ? "," : "") + d.params[i].first + "=" + buf;
    }
    return s;
  }

 private:
  Lexer lexer_;
  Token tok_;
  NetworkDescription desc_;
  std::map<std::string, ComponentInfo, std::less<>> components_;
  std::map<std::string, PortRef, std::less<>> aliases_;
  std::set<PortRef> used_;
  std::set<PortRef> connected_;
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string params_source(const Params& params) {
  if (params.empty()) return "";
  std::string s = "(";
  for (std::size_t i = 0; i < params.size(); ++i)
    s += (i ? ", " : "") + params[i].first + "=" + num(params[i].second);
  return s + ")";
}

double param_or(const Params& params, std::string_view key, double fallback) {
  for (const auto& kv : params)
    if (kv.first == key) return kv.second;
  return fallback;
}

}  // namespace

std::variant<NetworkDescription, ParseError> parse(std::string_view text) {
  try {
    return Parser(text).run();
  } catch (const Failure& f) {
    return f.error;
  }
}

std::string to_source(const NetworkDescription& desc) {
  std::ostringstream out;
  for (const ComponentDecl& c : desc.components) {
    if (c.kind == ComponentKind::BeamSplitter) {
      out << "bs " << c.name << params_source(c.params) << "\n";
      continue;
    }
    out << "mode " << c.name << params_source(c.params);
    if (!c.couplings.empty()) {
      out << " {";
      for (std::size_t i = 0; i < c.couplings.size(); ++i)
        out << (i ? "; " : " ") << "couple "
            << (c.couplings[i].kind == CouplingKind::Annihilation ? "annihilation " : "creation ")
            << num(c.couplings[i].rate);
      out << " }";
    }
    out << "\n";
  }
  for (const ConnectionDecl& c : desc.connections)
    out << "connect " << c.from.to_string() << " -> " << c.to.to_string() << "\n";
  for (const IoDecl& io : desc.inputs) out << "input " << io.alias << " = " << io.port.to_string() << "\n";
  for (const IoDecl& io : desc.outputs) out << "output " << io.alias << " = " << io.port.to_string() << "\n";
  for (const DriveDecl& d : desc.drives)
    out << "drive " << d.port.to_string() << " " << d.shape << params_source(d.params) << "\n";
  return out.str();
}

ComposedNetwork build_network(const NetworkDescription& desc) {
  std::vector<Block> blocks;
  for (const ComponentDecl& c : desc.components) {
    if (c.kind == ComponentKind::BeamSplitter)
      blocks.push_back(make_block(c.name, beamsplitter(param_or(c.params, "theta", std::numbers::pi / 4.0))));
    else
      blocks.push_back(make_block(c.name, make_mode(param_or(c.params, "omega", 0.0), c.couplings)));
  }
  ComposedNetwork net = concatenate(std::move(blocks));
  for (const ConnectionDecl& c : desc.connections) net = connect(std::move(net), c.from, c.to);
  return net;
}

StateSpace compile(const NetworkDescription& desc) {
  const ComposedNetwork net = build_network(desc);
  if (!desc.inputs.empty() || !desc.outputs.empty()) {
    auto check = [&](const std::vector<PortRef>& open, const std::vector<IoDecl>& declared, const char* what) {
      for (const PortRef& p : open) {
        bool found = false;
        for (const IoDecl& io : declared) found = found || io.port == p;
        if (found) continue;
        SourcePos pos;
        for (const ComponentDecl& c : desc.components)
          if (c.name == p.component) pos = c.pos;
        throw DslError(ParseError{pos.line, pos.column, ErrorKind::DanglingPort,
                                  p.to_string() + " is neither connected nor declared as " + what});
      }
    };
    check(net.external_inputs(), desc.inputs, "input");
    check(net.external_outputs(), desc.outputs, "output");
  }
  return reduce(net);
}

std::vector<Drive> compile_drives(const NetworkDescription& desc, const ComposedNetwork& net) {
  std::vector<Drive> out;
  for (const DriveDecl& d : desc.drives) {
    Drive drive = parse_drive(Parser::drive_text(d));
    drive.channel = net.external_index(d.port);
    if (drive.channel < 0)
      throw DslError(ParseError{d.pos.line, d.pos.column, ErrorKind::BadParameter,
                                d.port.to_string() + " is not an external input"});
    out.push_back(std::move(drive));
  }
  return out;
}

}  // namespace qobs::dsl
