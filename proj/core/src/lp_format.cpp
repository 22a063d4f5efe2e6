// CPLEX-style LP text format.
//
//   \ comment
//   Minimize
//    obj: 0.5 s_1 + 0.5 s_2 + 0.1 lambda
//   Subject To
//    loss_1_1_2: s_1 - 2 M_2_1 + 2 M_1_1 >= 1
//   Bounds
//    M_1_1 free
//    lambda >= 0
//   End
//
// Every variable gets a line in Bounds, so the Bounds order fixes the
// variable order on re-parse. Coefficients are written with 17 significant
// digits and round-trip exactly.

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "wdrmsvm/reference_solver.hpp"

namespace wdrmsvm {
namespace {

std::string num(double v) {
  if (v == kInfinity) return "+inf";
  if (v == -kInfinity) return "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_terms(std::ostringstream& os, const std::vector<LpTerm>& terms,
                 const LpModel& model) {
  int on_line = 0;
  bool first = true;
  for (const LpTerm& t : terms) {
    if (on_line == 6) {
      os << "\n   ";
      on_line = 0;
    }
    const double mag = std::abs(t.coef);
    if (first) {
      if (t.coef < 0.0 || std::signbit(t.coef)) os << "- ";
    } else {
      os << (t.coef < 0.0 || std::signbit(t.coef) ? " - " : " + ");
    }
    os << num(mag) << ' ' << model.variables[static_cast<std::size_t>(t.var)].name;
    first = false;
    ++on_line;
  }
}

const char* sense_text(Sense s) {
  switch (s) {
    case Sense::LessEqual:
      return "<=";
    case Sense::GreaterEqual:
      return ">=";
    case Sense::Equal:
      return "=";
  }
  return "=";
}

// ----------------------------------------------------------------------------
// Parsing

enum class TokKind { Name, Label, Number, Plus, Minus, Sense };

struct Token {
  TokKind kind;
  std::string text;
  double value = 0.0;
  Sense sense = Sense::Equal;
  int line = 0;
};

bool is_name_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '!' ||
         c == '"' || c == '#' || c == '$' || c == '%' || c == '&' || c == '(' ||
         c == ')' || c == '/' || c == ',' || c == ';' || c == '?' || c == '@' ||
         c == '\'' || c == '`' || c == '{' || c == '}' || c == '|' || c == '~';
}

bool is_name_char(char c) {
  return is_name_start(c) || std::isdigit(static_cast<unsigned char>(c)) ||
         c == '.';
}

bool parse_special_number(const std::string& lower, double& v) {
  if (lower == "inf" || lower == "infinity") {
    v = kInfinity;
    return true;
  }
  return false;
}

std::string to_lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::vector<Token> tokenize(const std::string& text, int first_line) {
  std::vector<Token> out;
  int line = first_line;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (c == '\n') {
      ++line;
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '+') {
      out.push_back({TokKind::Plus, "+", 0, Sense::Equal, line});
      ++i;
      continue;
    }
    if (c == '-') {
      out.push_back({TokKind::Minus, "-", 0, Sense::Equal, line});
      ++i;
      continue;
    }
    if (c == '<' || c == '>' || c == '=') {
      std::string op(1, c);
      if (i + 1 < text.size() && (text[i + 1] == '=' || text[i + 1] == '<' ||
                                  text[i + 1] == '>')) {
        op += text[i + 1];
      }
      i += op.size();
      Sense s = Sense::Equal;
      if (op == "<=" || op == "<" || op == "=<") s = Sense::LessEqual;
      else if (op == ">=" || op == ">" || op == "=>") s = Sense::GreaterEqual;
      else if (op == "=" || op == "==") s = Sense::Equal;
      else throw ParseError("line " + std::to_string(line) + ": bad operator '" + op + "'");
      out.push_back({TokKind::Sense, op, 0, s, line});
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t j = i;
      while (j < text.size() &&
             (std::isdigit(static_cast<unsigned char>(text[j])) || text[j] == '.')) {
        ++j;
      }
      if (j < text.size() && (text[j] == 'e' || text[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < text.size() && (text[k] == '+' || text[k] == '-')) ++k;
        if (k < text.size() && std::isdigit(static_cast<unsigned char>(text[k]))) {
          j = k;
          while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
        }
      }
      const std::string lit = text.substr(i, j - i);
      double v = 0.0;
      const auto res = std::from_chars(lit.data(), lit.data() + lit.size(), v);
      if (res.ec != std::errc() || res.ptr != lit.data() + lit.size()) {
        throw ParseError("line " + std::to_string(line) + ": bad number '" + lit + "'");
      }
      out.push_back({TokKind::Number, lit, v, Sense::Equal, line});
      i = j;
      continue;
    }
    if (is_name_start(c)) {
      std::size_t j = i;
      while (j < text.size() && is_name_char(text[j])) ++j;
      std::string name = text.substr(i, j - i);
      // Optional whitespace before ':' still makes a label.
      std::size_t k = j;
      while (k < text.size() && (text[k] == ' ' || text[k] == '\t')) ++k;
      double special = 0.0;
      if (k < text.size() && text[k] == ':') {
        out.push_back({TokKind::Label, name, 0, Sense::Equal, line});
        i = k + 1;
      } else if (parse_special_number(to_lower(name), special)) {
        out.push_back({TokKind::Number, name, special, Sense::Equal, line});
        i = j;
      } else {
        out.push_back({TokKind::Name, name, 0, Sense::Equal, line});
        i = j;
      }
      continue;
    }
    throw ParseError("line " + std::to_string(line) + ": unexpected character '" +
                     std::string(1, c) + "'");
  }
  return out;
}

struct RawTerm {
  std::string var;
  double coef;
};

// Reads "[+|-] [number] name" terms until a Sense token or the end.
std::vector<RawTerm> read_expression(const std::vector<Token>& toks,
                                     std::size_t& pos) {
  std::vector<RawTerm> terms;
  while (pos < toks.size() && toks[pos].kind != TokKind::Sense &&
         toks[pos].kind != TokKind::Label) {
    double sign = 1.0;
    while (pos < toks.size() &&
           (toks[pos].kind == TokKind::Plus || toks[pos].kind == TokKind::Minus)) {
      if (toks[pos].kind == TokKind::Minus) sign = -sign;
      ++pos;
    }
    double coef = 1.0;
    if (pos < toks.size() && toks[pos].kind == TokKind::Number) {
      coef = toks[pos].value;
      ++pos;
    }
    if (pos >= toks.size() || toks[pos].kind != TokKind::Name) {
      const int line = pos < toks.size() ? toks[pos].line : toks.back().line;
      throw ParseError("line " + std::to_string(line) + ": expected a variable name");
    }
    terms.push_back({toks[pos].text, sign * coef});
    ++pos;
  }
  return terms;
}

double read_signed_number(const std::vector<Token>& toks, std::size_t& pos) {
  double sign = 1.0;
  while (pos < toks.size() &&
         (toks[pos].kind == TokKind::Plus || toks[pos].kind == TokKind::Minus)) {
    if (toks[pos].kind == TokKind::Minus) sign = -sign;
    ++pos;
  }
  if (pos >= toks.size() || toks[pos].kind != TokKind::Number) {
    const int line = pos < toks.size() ? toks[pos].line : (toks.empty() ? 0 : toks.back().line);
    throw ParseError("line " + std::to_string(line) + ": expected a number");
  }
  return sign * toks[pos++].value;
}

enum class Section { None, Objective, Constraints, Bounds, End };

Section section_keyword(const std::string& line) {
  std::string s = to_lower(line);
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return Section::None;
  s = s.substr(b);
  const auto e = s.find_last_not_of(" \t\r");
  s = s.substr(0, e + 1);
  if (s == "minimize" || s == "minimise" || s == "minimum" || s == "min") {
    return Section::Objective;
  }
  if (s == "maximize" || s == "maximise" || s == "max") {
    throw ParseError("only minimization models are supported");
  }
  if (s == "subject to" || s == "such that" || s == "st" || s == "s.t.") {
    return Section::Constraints;
  }
  if (s == "bounds" || s == "bound") return Section::Bounds;
  if (s == "end") return Section::End;
  return Section::None;
}

}  // namespace

std::string format_lp(const LpModel& model) {
  model.validate();
  std::ostringstream os;
  os << "\\ wdrmsvm LP export: " << model.variables.size() << " variables, "
     << model.constraints.size() << " constraints\n";
  os << "Minimize\n obj: ";
  std::vector<LpTerm> obj;
  for (std::size_t j = 0; j < model.objective.size(); ++j) {
    if (model.objective[j] != 0.0) obj.push_back({static_cast<int>(j), model.objective[j]});
  }
  if (obj.empty() && !model.variables.empty()) obj.push_back({0, 0.0});
  write_terms(os, obj, model);
  os << '\n';
  if (!model.constraints.empty()) {
    os << "Subject To\n";
    for (std::size_t i = 0; i < model.constraints.size(); ++i) {
      const LpConstraint& c = model.constraints[i];
      const std::string name = c.name.empty() ? "r" + std::to_string(i + 1) : c.name;
      os << ' ' << name << ": ";
      if (c.terms.empty()) {
        os << "0 " << model.variables.front().name;
      } else {
        write_terms(os, c.terms, model);
      }
      os << ' ' << sense_text(c.sense) << ' ' << num(c.rhs) << '\n';
    }
  }
  os << "Bounds\n";
  for (const LpVariable& v : model.variables) {
    os << ' ';
    if (v.lower == -kInfinity && v.upper == kInfinity) {
      os << v.name << " free";
    } else if (v.upper == kInfinity) {
      os << v.name << " >= " << num(v.lower);
    } else if (v.lower == v.upper) {
      os << v.name << " = " << num(v.lower);
    } else {
      os << num(v.lower) << " <= " << v.name << " <= " << num(v.upper);
    }
    os << '\n';
  }
  os << "End\n";
  return os.str();
}

void export_lp(const LpModel& model, const std::filesystem::path& path) {
  const std::string text = format_lp(model);
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

LpModel parse_lp(const std::string& text) {
  // Split into sections line by line; comments run from '\' to end of line.
  std::map<Section, std::string> body;
  std::map<Section, int> first_line;
  Section current = Section::None;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool saw_end = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto bs = line.find('\\'); bs != std::string::npos) line.resize(bs);
    const Section kw = section_keyword(line);
    if (kw != Section::None) {
      if (kw == Section::End) {
        saw_end = true;
        break;
      }
      current = kw;
      first_line[current] = lineno + 1;
      continue;
    }
    if (current == Section::None) {
      if (line.find_first_not_of(" \t\r") != std::string::npos) {
        throw ParseError("line " + std::to_string(lineno) +
                         ": content before the objective section");
      }
      continue;
    }
    body[current] += line + "\n";
  }
  if (!saw_end) throw ParseError("missing End section");
  if (!first_line.count(Section::Objective)) {
    throw ParseError("missing Minimize section");
  }

  LpModel model;
  std::map<std::string, int> index;
  auto var = [&](const std::string& name) {
    auto it = index.find(name);
    if (it != index.end()) return it->second;
    const int id = model.add_variable(name);
    index.emplace(name, id);
    return id;
  };

  // Bounds first so their order fixes the variable order.
  struct BoundSpec {
    std::string name;
    double lower, upper;
  };
  std::vector<BoundSpec> bounds;
  {
    std::istringstream bl(body[Section::Bounds]);
    std::string bline;
    int ln = first_line.count(Section::Bounds) ? first_line[Section::Bounds] : 0;
    while (std::getline(bl, bline)) {
      const int this_line = ln++;
      const std::vector<Token> t = tokenize(bline, this_line);
      if (t.empty()) continue;
      std::size_t pos = 0;
      auto fail = [&]() {
        throw ParseError("line " + std::to_string(this_line) + ": bad bound '" + bline + "'");
      };
      if (t.size() == 2 && t[0].kind == TokKind::Name && t[1].kind == TokKind::Name &&
          to_lower(t[1].text) == "free") {
        bounds.push_back({t[0].text, -kInfinity, kInfinity});
        continue;
      }
      if (t[0].kind == TokKind::Name) {
        const std::string name = t[0].text;
        pos = 1;
        if (pos >= t.size() || t[pos].kind != TokKind::Sense) fail();
        const Sense s = t[pos++].sense;
        const double v = read_signed_number(t, pos);
        if (pos != t.size()) fail();
        if (s == Sense::GreaterEqual) bounds.push_back({name, v, kInfinity});
        else if (s == Sense::LessEqual) bounds.push_back({name, 0.0, v});
        else bounds.push_back({name, v, v});
        continue;
      }
      // l <= x [<= u]
      const double lo = read_signed_number(t, pos);
      if (pos >= t.size() || t[pos].kind != TokKind::Sense ||
          t[pos].sense != Sense::LessEqual) {
        fail();
      }
      ++pos;
      if (pos >= t.size() || t[pos].kind != TokKind::Name) fail();
      const std::string name = t[pos++].text;
      double hi = kInfinity;
      if (pos < t.size()) {
        if (t[pos].kind != TokKind::Sense || t[pos].sense != Sense::LessEqual) fail();
        ++pos;
        hi = read_signed_number(t, pos);
      }
      if (pos != t.size()) fail();
      bounds.push_back({name, lo, hi});
    }
  }
  for (const BoundSpec& b : bounds) var(b.name);

  {
    const std::vector<Token> t =
        tokenize(body[Section::Objective], first_line[Section::Objective]);
    std::size_t pos = 0;
    if (pos < t.size() && t[pos].kind == TokKind::Label) ++pos;
    const std::vector<RawTerm> terms = read_expression(t, pos);
    if (pos != t.size()) throw ParseError("unexpected tokens in objective");
    for (const RawTerm& r : terms) {
      const int id = var(r.var);
      model.objective[static_cast<std::size_t>(id)] += r.coef;
    }
  }

  if (first_line.count(Section::Constraints)) {
    const std::vector<Token> t =
        tokenize(body[Section::Constraints], first_line[Section::Constraints]);
    std::size_t pos = 0;
    while (pos < t.size()) {
      std::string name;
      if (t[pos].kind == TokKind::Label) name = t[pos++].text;
      std::vector<RawTerm> terms = read_expression(t, pos);
      if (pos >= t.size() || t[pos].kind != TokKind::Sense) {
        throw ParseError("constraint '" + name + "' has no relational operator");
      }
      const Sense s = t[pos++].sense;
      const double rhs = read_signed_number(t, pos);
      std::vector<LpTerm> lp_terms;
      for (const RawTerm& r : terms) lp_terms.push_back({var(r.var), r.coef});
      model.add_constraint(name, std::move(lp_terms), s, rhs);
    }
  }

  for (const BoundSpec& b : bounds) {
    LpVariable& v = model.variables[static_cast<std::size_t>(index[b.name])];
    v.lower = b.lower;
    v.upper = b.upper;
  }
  model.validate();
  return model;
}

LpModel read_lp(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_lp(ss.str());
}

}  // namespace wdrmsvm
