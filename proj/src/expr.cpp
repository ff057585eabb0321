#include "tsynth/expr.hpp"

#include <algorithm>
#include <cctype>

#include "tsynth/error.hpp"

namespace tsynth {

CostTable CostTable::preset() {
  CostTable t;
  const OpRegistry& reg = OpRegistry::core16();
  for (int i = 0; i < reg.size(); ++i) {
    const OpInfo& o = reg.op(i);
    t.op_cost[static_cast<size_t>(o.code)] = o.preset_cost;
  }
  return t;
}

ExprPtr Expr::input(int index) {
  auto e = std::shared_ptr<Expr>(new Expr());
  e->kind_ = Kind::Input;
  e->input_index_ = index;
  e->cost_ = CostTable{}.base_value_cost;
  return e;
}

ExprPtr Expr::int_lit(std::int64_t v) {
  auto e = std::shared_ptr<Expr>(new Expr());
  e->kind_ = Kind::IntLit;
  e->lit_value_ = v;
  e->cost_ = CostTable{}.base_value_cost;
  return e;
}

ExprPtr Expr::call(OpCode op, std::vector<ExprPtr> args,
                   std::vector<Literal> params, const CostTable& costs) {
  auto e = std::shared_ptr<Expr>(new Expr());
  e->kind_ = Kind::Call;
  e->op_ = op;
  e->cost_ = costs.cost_of(op);
  for (const ExprPtr& a : args) e->cost_ += a->cost();
  for (const Literal& l : params) e->cost_ += costs.cost_of_literal(l);
  e->args_ = std::move(args);
  e->params_ = std::move(params);
  return e;
}

bool Expr::equals(const Expr& o) const {
  if (kind_ != o.kind_) return false;
  switch (kind_) {
    case Kind::Input: return input_index_ == o.input_index_;
    case Kind::IntLit: return lit_value_ == o.lit_value_;
    case Kind::Call: break;
  }
  if (op_ != o.op_ || args_.size() != o.args_.size() || params_ != o.params_) {
    return false;
  }
  for (size_t i = 0; i < args_.size(); ++i) {
    if (!args_[i]->equals(*o.args_[i])) return false;
  }
  return true;
}

Tensor evaluate(const Expr& e, std::span<const Tensor> inputs,
                const ApplyLimits& lim) {
  switch (e.kind()) {
    case Expr::Kind::Input: {
      int i = e.input_index();
      if (i < 0 || static_cast<size_t>(i) >= inputs.size()) {
        fail(ErrKind::ValueError, "input in" + std::to_string(i + 1) + " not bound");
      }
      return inputs[static_cast<size_t>(i)];
    }
    case Expr::Kind::IntLit:
      return Tensor::scalar(e.lit_value());
    case Expr::Kind::Call: {
      std::vector<Tensor> vals;
      vals.reserve(e.args().size());
      for (const ExprPtr& a : e.args()) vals.push_back(evaluate(*a, inputs, lim));
      try {
        return apply(e.op(), vals, e.params(), lim);
      } catch (const Error& err) {
        throw Error(err.kind(), std::string(err.what()) + " in " + render(e));
      }
    }
  }
  fail(ErrKind::ValueError, "unhandled expr kind");
}

namespace {

void render_into(const Expr& e, std::string& out) {
  switch (e.kind()) {
    case Expr::Kind::Input:
      out += "in" + std::to_string(e.input_index() + 1);
      return;
    case Expr::Kind::IntLit:
      out += std::to_string(e.lit_value());
      return;
    case Expr::Kind::Call:
      break;
  }
  const OpInfo& info = op_info(e.op());
  out += info.name;
  out += '(';
  bool tuple_args = e.op() == OpCode::Stack;
  if (tuple_args) out += '(';
  for (size_t i = 0; i < e.args().size(); ++i) {
    if (i > 0) out += ", ";
    render_into(*e.args()[i], out);
  }
  if (tuple_args) out += ')';
  for (const Literal& lit : e.params()) {
    out += ", ";
    switch (lit.kind) {
      case ParamKind::Axis:
      case ParamKind::ScalarInt:
        out += std::to_string(lit.ints[0]);
        break;
      case ParamKind::AxisPair:
        out += std::to_string(lit.ints[0]) + ", " + std::to_string(lit.ints[1]);
        break;
      case ParamKind::ShapeTuple:
        out += '(';
        for (size_t i = 0; i < lit.ints.size(); ++i) {
          if (i > 0) out += ", ";
          out += std::to_string(lit.ints[i]);
        }
        out += ')';
        break;
    }
  }
  out += ')';
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  ExprPtr parse() {
    ExprPtr e = expr();
    skip_ws();
    if (pos_ != text_.size()) fail(ErrKind::ParseError, "trailing input");
    return e;
  }

 private:
  ExprPtr expr() {
    skip_ws();
    if (pos_ >= text_.size()) fail(ErrKind::ParseError, "unexpected end of input");
    char c = text_[pos_];
    if (c == '-' || std::isdigit(static_cast<unsigned char>(c))) {
      return Expr::int_lit(integer());
    }
    std::string name = ident();
    if (name.size() == 3 && name.compare(0, 2, "in") == 0 &&
        name[2] >= '1' && name[2] <= '9') {
      if (name[2] > '3') fail(ErrKind::ParseError, "only in1..in3 exist");
      return Expr::input(name[2] - '1');
    }
    OpCode op = op_code_of(name);
    const OpInfo& info = op_info(op);
    expect('(');
    std::vector<ExprPtr> args;
    if (op == OpCode::Stack) {
      expect('(');
      args.push_back(expr());
      expect(',');
      args.push_back(expr());
      expect(')');
    } else {
      for (int i = 0; i < info.arity; ++i) {
        if (i > 0) expect(',');
        args.push_back(expr());
      }
    }
    std::vector<Literal> params;
    for (ParamKind kind : info.params) {
      expect(',');
      Literal lit{kind, {}};
      switch (kind) {
        case ParamKind::Axis:
        case ParamKind::ScalarInt:
          lit.ints.push_back(integer());
          break;
        case ParamKind::AxisPair:
          lit.ints.push_back(integer());
          expect(',');
          lit.ints.push_back(integer());
          break;
        case ParamKind::ShapeTuple:
          expect('(');
          lit.ints.push_back(integer());
          while (peek() == ',') {
            expect(',');
            lit.ints.push_back(integer());
          }
          expect(')');
          break;
      }
      params.push_back(std::move(lit));
    }
    expect(')');
    return Expr::call(op, std::move(args), std::move(params));
  }

  void skip_ws() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  void expect(char c) {
    skip_ws();
    if (pos_ >= text_.size() || text_[pos_] != c) {
      fail(ErrKind::ParseError,
           std::string("expected '") + c + "' at offset " + std::to_string(pos_));
    }
    ++pos_;
  }

  std::string ident() {
    skip_ws();
    size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    if (start == pos_) fail(ErrKind::ParseError, "expected identifier");
    return std::string(text_.substr(start, pos_ - start));
  }

  std::int64_t integer() {
    skip_ws();
    size_t start = pos_;
    if (pos_ < text_.size() && text_[pos_] == '-') ++pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
    if (pos_ == start || (text_[start] == '-' && pos_ == start + 1)) {
      fail(ErrKind::ParseError, "expected integer");
    }
    return std::stoll(std::string(text_.substr(start, pos_ - start)));
  }

  std::string_view text_;
  size_t pos_ = 0;
};

void collect_ops(const Expr& e, std::vector<OpCode>& out) {
  if (e.kind() != Expr::Kind::Call) return;
  for (const ExprPtr& a : e.args()) collect_ops(*a, out);
  if (std::find(out.begin(), out.end(), e.op()) == out.end()) {
    out.push_back(e.op());
  }
}

}  // namespace

std::string render(const Expr& e) {
  std::string out;
  render_into(e, out);
  return out;
}

ExprPtr parse_expr(std::string_view text) { return Parser(text).parse(); }

std::vector<OpCode> ops_used(const Expr& e) {
  std::vector<OpCode> out;
  collect_ops(e, out);
  return out;
}

int recompute_cost(const Expr& e, const CostTable& costs) {
  switch (e.kind()) {
    case Expr::Kind::Input:
    case Expr::Kind::IntLit:
      return costs.base_value_cost;
    case Expr::Kind::Call:
      break;
  }
  int c = costs.cost_of(e.op());
  for (const ExprPtr& a : e.args()) c += recompute_cost(*a, costs);
  for (const Literal& l : e.params()) c += costs.cost_of_literal(l);
  return c;
}

}  // namespace tsynth
