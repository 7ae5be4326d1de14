// Copyright 2026 The qirq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qirq/textir.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

namespace qirq {

static std::string join(const std::vector<std::string> &v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i];
  return s;
}

ParseError::ParseError(std::string code, int line, int col, std::vector<std::string> expected,
                       const std::string &msg)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(col) + ": " + code +
                         ": " + msg +
                         (expected.empty() ? "" : " (expected " + join(expected) + ")")),
      code_(std::move(code)), line_(line), col_(col), expected_(std::move(expected)) {}

namespace {

enum class Tok : uint8_t { Ident, VReg, Global, Int, Float, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  int line = 1, col = 1;
  int64_t ival = 0;
  double fval = 0;
};

class Lexer {
public:
  explicit Lexer(std::string_view s) : s_(s) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip();
      Token t;
      t.line = line_;
      t.col = col_;
      if (i_ >= s_.size()) {
        out.push_back(t);
        return out;
      }
      char c = s_[i_];
      if (c == '%' || c == '@') {
        adv();
        t.kind = c == '%' ? Tok::VReg : Tok::Global;
        t.text = name();
        if (t.text.empty()) fail(t, "empty name after '" + std::string(1, c) + "'");
      } else if (is_name_start(c)) {
        t.kind = Tok::Ident;
        t.text = name();
      } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                 ((c == '-' || c == '+') && i_ + 1 < s_.size() &&
                  (std::isdigit(static_cast<unsigned char>(s_[i_ + 1])) ||
                   s_.substr(i_ + 1, 3) == "inf"))) {
        number(t);
      } else if (c == '-' && i_ + 1 < s_.size() && s_[i_ + 1] == '>') {
        t.kind = Tok::Punct;
        t.text = "->";
        adv();
        adv();
      } else if (std::string_view("(){}[],:=").find(c) != std::string_view::npos) {
        t.kind = Tok::Punct;
        t.text = std::string(1, c);
        adv();
      } else {
        fail(t, std::string("unexpected character '") + c + "'");
      }
      out.push_back(std::move(t));
    }
  }

private:
  std::string_view s_;
  size_t i_ = 0;
  int line_ = 1, col_ = 1;

  static bool is_name_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
  }
  static bool is_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
  }

  [[noreturn]] void fail(const Token &t, const std::string &msg) {
    throw ParseError("SYNTAX", t.line, t.col, {}, msg);
  }

  void adv() {
    if (s_[i_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++i_;
  }

  void skip() {
    while (i_ < s_.size()) {
      char c = s_[i_];
      if (c == ';') {
        while (i_ < s_.size() && s_[i_] != '\n') adv();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        adv();
      } else {
        break;
      }
    }
  }

  std::string name() {
    size_t b = i_;
    while (i_ < s_.size() && is_name_char(s_[i_])) adv();
    return std::string(s_.substr(b, i_ - b));
  }

  void number(Token &t) {
    size_t b = i_;
    if (s_[i_] == '-' || s_[i_] == '+') adv();
    if (s_.substr(i_, 3) == "inf") {
      for (int k = 0; k < 3; ++k) adv();
      t.kind = Tok::Float;
      t.text = std::string(s_.substr(b, i_ - b));
      t.fval = t.text[0] == '-' ? -INFINITY : INFINITY;
      return;
    }
    if (s_.substr(i_, 2) == "0x" || s_.substr(i_, 2) == "0X") {
      adv();
      adv();
      size_t hb = i_;
      while (i_ < s_.size() && std::isxdigit(static_cast<unsigned char>(s_[i_]))) adv();
      std::string_view hex = s_.substr(hb, i_ - hb);
      uint64_t bits = 0;
      if (hex.empty() || hex.size() > 16 ||
          std::from_chars(hex.data(), hex.data() + hex.size(), bits, 16).ec != std::errc{})
        fail(t, "malformed hexadecimal float");
      t.kind = Tok::Float;
      t.fval = std::bit_cast<double>(bits);
      if (s_[b] == '-') t.fval = -t.fval;
      t.text = std::string(s_.substr(b, i_ - b));
      return;
    }
    bool fp = false;
    auto digits = [&] {
      while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) adv();
    };
    digits();
    if (i_ < s_.size() && s_[i_] == '.') {
      fp = true;
      adv();
      digits();
    }
    if (i_ < s_.size() && (s_[i_] == 'e' || s_[i_] == 'E')) {
      fp = true;
      adv();
      if (i_ < s_.size() && (s_[i_] == '+' || s_[i_] == '-')) adv();
      size_t eb = i_;
      digits();
      if (eb == i_) fail(t, "malformed exponent");
    }
    if (i_ < s_.size() && is_name_char(s_[i_])) fail(t, "malformed number");
    t.text = std::string(s_.substr(b, i_ - b));
    const char *p = t.text.data() + (t.text[0] == '+' ? 1 : 0);
    const char *e = t.text.data() + t.text.size();
    if (fp) {
      t.kind = Tok::Float;
      if (std::from_chars(p, e, t.fval).ec != std::errc{}) fail(t, "malformed float");
    } else {
      t.kind = Tok::Int;
      if (std::from_chars(p, e, t.ival).ec != std::errc{}) fail(t, "integer out of range");
    }
  }
};

struct RepeatInfo {
  std::string first, header, latch;
  std::set<std::string> members; // body blocks plus header and latch
};

class Parser {
public:
  explicit Parser(std::vector<Token> toks) : t_(std::move(toks)) {}

  Module module() {
    Module m;
    expect_kw("module");
    m.name = ident("module name");
    expect_kw("attrs");
    while (peek().kind == Tok::Ident && (peek().text == "required_qubits" ||
                                         peek().text == "required_results")) {
      std::string key = next().text;
      expect("=");
      int64_t v = integer("attribute value");
      if (v < 0 || v > (1 << 20)) error("SYNTAX", {}, "attribute value out of range");
      (key == "required_qubits" ? m.required_qubits : m.required_results) = static_cast<int>(v);
    }
    if (is_kw("entry")) {
      next();
      m.entry = global();
    }
    while (is_kw("func")) m.functions.push_back(function());
    if (peek().kind != Tok::End) error("SYNTAX", {"func", "end of input"}, "unexpected token");
    if (m.entry.empty() && !m.functions.empty())
      m.entry = m.find("main") ? "main" : m.functions.front().name;
    return m;
  }

private:
  std::vector<Token> t_;
  size_t p_ = 0;
  Function *f_ = nullptr;
  std::unordered_map<std::string, int> names_;
  std::set<int> defined_;
  std::vector<RepeatInfo> repeats_;
  std::vector<std::string> pending_exit_; // repeat headers awaiting their exit label
  std::vector<std::vector<std::string> *> repeat_stack_;

  const Token &peek(size_t k = 0) const { return t_[std::min(p_ + k, t_.size() - 1)]; }
  const Token &next() {
    const Token &t = t_[p_];
    if (p_ + 1 < t_.size()) ++p_;
    return t;
  }

  [[noreturn]] void error(const std::string &code, std::vector<std::string> expected,
                          const std::string &msg) {
    const Token &t = peek();
    throw ParseError(code, t.line, t.col, std::move(expected),
                     msg + (t.kind == Tok::End ? " at end of input" : " near '" + t.text + "'"));
  }

  bool is_kw(std::string_view kw) const { return peek().kind == Tok::Ident && peek().text == kw; }
  bool is_punct(std::string_view p) const {
    return peek().kind == Tok::Punct && peek().text == p;
  }

  void expect_kw(const std::string &kw) {
    if (!is_kw(kw)) error("SYNTAX", {kw}, "unexpected token");
    next();
  }
  void expect(const std::string &p) {
    if (!is_punct(p)) error("SYNTAX", {"'" + p + "'"}, "unexpected token");
    next();
  }
  std::string ident(const std::string &what) {
    if (peek().kind != Tok::Ident) error("SYNTAX", {what}, "unexpected token");
    return next().text;
  }
  std::string global() {
    if (peek().kind != Tok::Global) error("SYNTAX", {"@name"}, "unexpected token");
    return next().text;
  }
  int64_t integer(const std::string &what) {
    if (peek().kind != Tok::Int) error("SYNTAX", {what}, "unexpected token");
    return next().ival;
  }

  static std::optional<int> indexed(const std::string &s, char prefix) {
    if (s.size() < 2 || s[0] != prefix) return std::nullopt;
    int v = 0;
    for (size_t i = 1; i < s.size(); ++i) {
      if (!std::isdigit(static_cast<unsigned char>(s[i]))) return std::nullopt;
      v = v * 10 + (s[i] - '0');
      if (v > (1 << 20)) return std::nullopt;
    }
    return v;
  }

  VReg vreg_ref(const std::string &name) {
    auto it = names_.find(name);
    if (it != names_.end()) return VReg{it->second};
    f_->vregs.push_back({name, Type::Int});
    int id = static_cast<int>(f_->vregs.size()) - 1;
    names_.emplace(name, id);
    return VReg{id};
  }

  VReg vreg_def(const std::string &name, Type t) {
    VReg v = vreg_ref(name);
    if (!defined_.insert(v.id).second)
      error("DUPLICATE_DEF", {}, "%" + name + " defined more than once");
    f_->vregs[v.id].type = t;
    return v;
  }

  Type operand_type(const Operand &o) const {
    if (auto *v = std::get_if<VReg>(&o)) return f_->info(*v).type;
    return literal_type(*as_literal(o));
  }

  Operand operand() {
    const Token &t = peek();
    switch (t.kind) {
    case Tok::VReg: return vreg_ref(next().text);
    case Tok::Int: return next().ival;
    case Tok::Float: return next().fval;
    case Tok::Ident:
      if (t.text == "true" || t.text == "false") return next().text == "true";
      if (t.text == "inf") {
        next();
        return INFINITY;
      }
      if (t.text == "nan") {
        next();
        return NAN;
      }
      break;
    default: break;
    }
    error("SYNTAX", {"operand"}, "unexpected token");
  }

  QubitRef qubit() {
    const Token &t = peek();
    if (t.kind == Tok::Ident) {
      if (auto q = indexed(t.text, 'q')) {
        next();
        return {*q, false};
      }
    } else if (t.kind == Tok::VReg) {
      VReg v = vreg_ref(next().text);
      return {v.id, true};
    }
    error("SYNTAX", {"qubit"}, "unexpected token");
  }

  int result_slot() {
    const Token &t = peek();
    if (t.kind == Tok::Ident)
      if (auto r = indexed(t.text, 'r')) {
        next();
        return *r;
      }
    error("SYNTAX", {"result slot"}, "unexpected token");
  }

  std::string label() {
    std::string l = ident("block label");
    if (l == "continue") {
      if (repeat_stack_.empty()) error("SYNTAX", {}, "'continue' outside repeat");
    }
    return l;
  }

  Function function() {
    expect_kw("func");
    Function f;
    f.name = global();
    f_ = &f;
    names_.clear();
    defined_.clear();
    repeats_.clear();
    pending_exit_.clear();
    expect("(");
    while (!is_punct(")")) {
      if (!f.params.empty()) expect(",");
      if (peek().kind != Tok::VReg) error("SYNTAX", {"parameter"}, "unexpected token");
      std::string n = next().text;
      expect(":");
      std::string ty = ident("type");
      Type t;
      if (ty == "int") t = Type::Int;
      else if (ty == "bool") t = Type::Bool;
      else if (ty == "float") t = Type::Float;
      else if (ty == "qubit") t = Type::Qubit;
      else error("SYNTAX", {"int", "bool", "float", "qubit"}, "unknown type");
      f.params.push_back(vreg_def(n, t));
    }
    expect(")");
    expect("{");
    items();
    expect("}");
    if (!pending_exit_.empty()) error("REPEAT", {"block"}, "repeat must be followed by a block");
    desugar_entries();
    f_ = nullptr;
    return f;
  }

  void items() {
    while (is_kw("block") || is_kw("repeat")) {
      if (is_kw("block")) block();
      else repeat();
    }
  }

  void repeat() {
    const Token start = peek();
    next();
    int64_t n = integer("trip count");
    if (n < 0) error("REPEAT", {}, "negative trip count");
    expect("{");
    size_t first_idx = f_->blocks.size();
    std::vector<std::string> continues;
    repeat_stack_.push_back(&continues);
    items();
    repeat_stack_.pop_back();
    if (f_->blocks.size() == first_idx) error("REPEAT", {"block"}, "empty repeat body");
    if (!f_->blocks[first_idx].phis.empty())
      throw ParseError("REPEAT", start.line, start.col, {},
                       "first block of a repeat body cannot have phis");
    expect("}");

    RepeatInfo r;
    r.first = f_->blocks[first_idx].label;
    r.header = r.first + ".hdr";
    r.latch = r.first + ".latch";
    for (size_t i = first_idx; i < f_->blocks.size(); ++i) r.members.insert(f_->blocks[i].label);
    for (auto &m : repeats_)
      if (r.members.count(m.first)) r.members.insert(m.members.begin(), m.members.end());
    if (r.members.count(r.header) || r.members.count(r.latch))
      error("REPEAT", {}, "label collision with generated repeat labels");

    // Nested repeats that closed at the end of this body exit to our latch.
    for (auto &h : pending_exit_) set_exit(h, r.latch);
    pending_exit_.clear();

    for (size_t i = first_idx; i < f_->blocks.size(); ++i) {
      auto &b = f_->blocks[i];
      auto fix = [&](std::string &t) {
        if (t == "continue") t = r.latch;
      };
      if (auto *j = std::get_if<Jump>(&b.term)) fix(j->target);
      if (auto *br = std::get_if<Branch>(&b.term)) {
        fix(br->if_true);
        fix(br->if_false);
      }
    }

    VReg i = vreg_def(fresh(r.first + ".i"), Type::Int);
    VReg go = vreg_def(fresh(r.first + ".go"), Type::Bool);
    VReg inext = vreg_def(fresh(r.first + ".inext"), Type::Int);
    BasicBlock hdr;
    hdr.label = r.header;
    hdr.phis.push_back({i, {{inext, r.latch}}});
    hdr.body.push_back(Cmp{CmpKind::Lt, go, i, n});
    hdr.term = Branch{go, r.first, ""}; // exit resolved by the next block
    BasicBlock latch;
    latch.label = r.latch;
    latch.body.push_back(BinOp{BinOpKind::Add, inext, i, int64_t{1}});
    latch.term = Jump{r.header};
    f_->blocks.insert(f_->blocks.begin() + static_cast<long>(first_idx), std::move(hdr));
    f_->blocks.push_back(std::move(latch));
    r.members.insert(r.header);
    r.members.insert(r.latch);
    pending_exit_.push_back(r.header);
    repeats_.push_back(std::move(r));
  }

  std::string fresh(const std::string &base) {
    std::string n = base;
    for (int k = 1; names_.count(n); ++k) n = base + "." + std::to_string(k);
    return n;
  }

  void set_exit(const std::string &header, const std::string &target) {
    auto *b = f_->find_block(header);
    std::get<Branch>(b->term).if_false = target;
  }

  // Outside jumps into a repeat body enter through its header, carrying the
  // initial counter value.
  void desugar_entries() {
    for (auto &r : repeats_) {
      auto *hdr = f_->find_block(r.header);
      auto &phi = hdr->phis.front();
      std::vector<std::pair<Operand, std::string>> init;
      for (auto &b : f_->blocks) {
        if (r.members.count(b.label)) continue;
        bool hit = false;
        auto fix = [&](std::string &t) {
          if (t == r.first) {
            t = r.header;
            hit = true;
          }
        };
        if (auto *j = std::get_if<Jump>(&b.term)) fix(j->target);
        if (auto *br = std::get_if<Branch>(&b.term)) {
          fix(br->if_true);
          fix(br->if_false);
        }
        if (hit) init.push_back({int64_t{0}, b.label});
      }
      phi.incoming.insert(phi.incoming.begin(), init.begin(), init.end());
    }
  }

  void block() {
    expect_kw("block");
    BasicBlock b;
    b.label = ident("block label");
    if (b.label == "continue") error("SYNTAX", {}, "'continue' is reserved");
    expect(":");
    for (auto &h : pending_exit_) set_exit(h, b.label);
    pending_exit_.clear();
    for (;;) {
      if (peek().kind == Tok::VReg && peek(1).kind == Tok::Punct && peek(1).text == "=" &&
          peek(2).kind == Tok::Ident && peek(2).text == "phi") {
        if (!b.body.empty()) error("SYNTAX", {}, "phi after non-phi instruction");
        b.phis.push_back(phi());
        continue;
      }
      if (is_kw("br")) {
        next();
        Operand c = operand();
        expect(",");
        std::string a = label();
        expect(",");
        std::string e = label();
        if (a == e) {
          --p_;
          error("DUPLICATE_TARGET", {}, "branch targets are identical");
        }
        b.term = Branch{c, a, e};
        break;
      }
      if (is_kw("jmp")) {
        next();
        b.term = Jump{label()};
        break;
      }
      if (is_kw("ret")) {
        next();
        b.term = Return{};
        break;
      }
      if (is_kw("block") || is_kw("repeat") || is_punct("}") || peek().kind == Tok::End)
        error("SYNTAX", {"br", "jmp", "ret"}, "block without terminator");
      b.body.push_back(instruction());
    }
    for (auto &x : f_->blocks)
      if (x.label == b.label) error("DUPLICATE_LABEL", {}, "block " + b.label + " redefined");
    f_->blocks.push_back(std::move(b));
  }

  Phi phi() {
    std::string name = next().text;
    next(); // '='
    next(); // 'phi'
    Phi p;
    std::vector<std::pair<Operand, std::string>> in;
    do {
      if (!in.empty()) next();
      expect("[");
      Operand v = operand();
      expect(",");
      std::string l = label();
      expect("]");
      in.push_back({v, l});
    } while (is_punct(","));
    Type t = Type::Int;
    for (auto &[v, l] : in)
      if (!is_vreg(v) || defined_.count(std::get<VReg>(v).id)) {
        t = operand_type(v);
        break;
      }
    p.dst = vreg_def(name, t);
    p.incoming = std::move(in);
    return p;
  }

  Instruction instruction() {
    const Token &t = peek();
    if (t.kind == Tok::VReg) {
      std::string name = next().text;
      expect("=");
      std::string op = ident("operation");
      if (op == "read_result") {
        int s = result_slot();
        return ReadResult{vreg_def(name, Type::Bool), s};
      }
      if (op == "cmp") {
        std::string k = ident("comparison");
        auto ck = parse_cmp(k);
        if (!ck) error("SYNTAX", {"eq", "ne", "lt", "le", "gt", "ge"}, "unknown comparison");
        Operand a = operand();
        expect(",");
        Operand c = operand();
        return Cmp{*ck, vreg_def(name, Type::Bool), a, c};
      }
      if (op == "select") {
        Operand c = operand();
        expect(",");
        Operand a = operand();
        expect(",");
        Operand e = operand();
        return Select{vreg_def(name, operand_type(a)), c, a, e};
      }
      if (auto bk = parse_binop(op)) {
        Operand a = operand();
        expect(",");
        Operand c = operand();
        Type ty = binop_result_type(*bk, operand_type(a), operand_type(c));
        return BinOp{*bk, vreg_def(name, ty), a, c};
      }
      --p_;
      error("SYNTAX", {"read_result", "add", "sub", "mul", "and", "or", "xor", "cmp", "select",
                       "phi"},
            "unknown operation");
    }
    if (t.kind != Tok::Ident) error("SYNTAX", {"instruction"}, "unexpected token");
    std::string op = next().text;
    if (op == "mz") {
      QubitRef q = qubit();
      expect("->");
      return Measure{q, result_slot()};
    }
    if (op == "reset") return Reset{qubit()};
    if (op == "output") {
      std::string k = ident("output kind");
      auto ok = parse_output(k);
      if (!ok)
        error("SYNTAX", {"array_start", "array_end", "tuple_start", "tuple_end", "result"},
              "unknown output kind");
      Output o{*ok, 0};
      if (*ok == OutputKind::Result) o.slot = result_slot();
      return o;
    }
    if (op == "call") {
      Call c;
      c.callee = global();
      expect("(");
      while (!is_punct(")")) {
        if (!c.args.empty()) expect(",");
        CallArg a;
        const Token &at = peek();
        if (at.kind == Tok::Ident && indexed(at.text, 'q')) {
          a.is_qubit = true;
          a.qubit = qubit();
        } else if (at.kind == Tok::VReg && names_.count(at.text) &&
                   f_->vregs[names_.at(at.text)].type == Type::Qubit) {
          a.is_qubit = true;
          a.qubit = qubit();
        } else {
          a.value = operand();
        }
        c.args.push_back(a);
      }
      expect(")");
      return c;
    }
    // Gate.
    QGate g;
    g.name = op;
    if (is_punct("(")) {
      next();
      g.angle = operand();
      expect(")");
    }
    g.qubits.push_back(qubit());
    while (is_punct(",")) {
      next();
      g.qubits.push_back(qubit());
    }
    return g;
  }
};

} // namespace

Module parse(std::string_view src) {
  Lexer lx(src);
  Parser p(lx.run());
  return p.module();
}

// --- emit ------------------------------------------------------------------------

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, res.ptr);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

std::string format_operand(const Function &f, const Operand &o) {
  if (auto *v = std::get_if<VReg>(&o)) {
    if (v->id < 0 || v->id >= static_cast<int>(f.vregs.size())) return "%<invalid>";
    return "%" + f.info(*v).name;
  }
  if (auto *i = std::get_if<int64_t>(&o)) return std::to_string(*i);
  if (auto *d = std::get_if<double>(&o)) return format_double(*d);
  return std::get<bool>(o) ? "true" : "false";
}

static std::string qname(const Function &f, const QubitRef &q) {
  return q.param ? "%" + f.info(VReg{q.index}).name : "q" + std::to_string(q.index);
}

static void emit_instr(std::ostream &os, const Function &f, const Instruction &ins) {
  auto op = [&](const Operand &o) { return format_operand(f, o); };
  auto def = [&](VReg v) { return "%" + f.info(v).name + " = "; };
  std::visit(
      [&](const auto &i) {
        using T = std::decay_t<decltype(i)>;
        if constexpr (std::is_same_v<T, QGate>) {
          os << i.name;
          if (i.angle) os << "(" << op(*i.angle) << ")";
          for (size_t k = 0; k < i.qubits.size(); ++k)
            os << (k ? ", " : " ") << qname(f, i.qubits[k]);
        } else if constexpr (std::is_same_v<T, Measure>) {
          os << "mz " << qname(f, i.qubit) << " -> r" << i.slot;
        } else if constexpr (std::is_same_v<T, Reset>) {
          os << "reset " << qname(f, i.qubit);
        } else if constexpr (std::is_same_v<T, ReadResult>) {
          os << def(i.dst) << "read_result r" << i.slot;
        } else if constexpr (std::is_same_v<T, BinOp>) {
          os << def(i.dst) << binop_name(i.op) << " " << op(i.lhs) << ", " << op(i.rhs);
        } else if constexpr (std::is_same_v<T, Cmp>) {
          os << def(i.dst) << "cmp " << cmp_name(i.op) << " " << op(i.lhs) << ", " << op(i.rhs);
        } else if constexpr (std::is_same_v<T, Select>) {
          os << def(i.dst) << "select " << op(i.cond) << ", " << op(i.if_true) << ", "
             << op(i.if_false);
        } else if constexpr (std::is_same_v<T, Output>) {
          os << "output " << output_name(i.kind);
          if (i.kind == OutputKind::Result) os << " r" << i.slot;
        } else {
          os << "call @" << i.callee << "(";
          for (size_t k = 0; k < i.args.size(); ++k) {
            if (k) os << ", ";
            os << (i.args[k].is_qubit ? qname(f, i.args[k].qubit) : op(i.args[k].value));
          }
          os << ")";
        }
      },
      ins);
}

std::string emit_instruction(const Function &f, const Instruction &ins) {
  std::ostringstream os;
  emit_instr(os, f, ins);
  return os.str();
}

static void emit_function(std::ostream &os, const Function &f) {
  os << "func @" << f.name << "(";
  for (size_t i = 0; i < f.params.size(); ++i) {
    const auto &info = f.info(f.params[i]);
    os << (i ? ", " : "") << "%" << info.name << ": " << type_name(info.type);
  }
  os << ") {\n";
  for (auto &b : f.blocks) {
    os << "block " << b.label << ":\n";
    for (auto &p : b.phis) {
      os << "  %" << f.info(p.dst).name << " = phi ";
      for (size_t k = 0; k < p.incoming.size(); ++k)
        os << (k ? ", " : "") << "[" << format_operand(f, p.incoming[k].first) << ", "
           << p.incoming[k].second << "]";
      os << "\n";
    }
    for (auto &i : b.body) {
      os << "  ";
      emit_instr(os, f, i);
      os << "\n";
    }
    os << "  ";
    if (auto *j = std::get_if<Jump>(&b.term)) os << "jmp " << j->target;
    else if (auto *br = std::get_if<Branch>(&b.term))
      os << "br " << format_operand(f, br->cond) << ", " << br->if_true << ", " << br->if_false;
    else os << "ret";
    os << "\n";
  }
  os << "}\n";
}

std::string emit(const Function &f) {
  std::ostringstream os;
  emit_function(os, f);
  return os.str();
}

std::string emit(const Module &m) {
  std::ostringstream os;
  os << "module " << m.name << "\n";
  os << "attrs required_qubits=" << m.required_qubits
     << " required_results=" << m.required_results << "\n";
  os << "entry @" << m.entry << "\n";
  for (auto &f : m.functions) {
    os << "\n";
    emit_function(os, f);
  }
  return os.str();
}

} // namespace qirq
