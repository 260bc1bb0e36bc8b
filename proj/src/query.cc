// Apache License, Version 2.0, refer to LICENSE.txt

#include "crossmi/query.hh"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <sstream>

#include "json.hpp"

namespace crossmi {

namespace {

// --- Lexer ------------------------------------------------------------------

enum class TokenKind { kIdent, kQuotedIdent, kNumber, kString, kSymbol, kEnd };

struct Token {
  TokenKind kind = TokenKind::kEnd;
  std::string text;   // identifier/string contents or symbol spelling
  double number = 0.0;
  int line = 1;
  int column = 1;
};

std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::toupper(c); });
  return s;
}

const char* const kKeywords[] = {
    "SIMULATE", "ESTIMATE",  "MUTUAL", "INFORMATION", "OF",      "WITH",
    "GIVEN",    "FROM",      "MODELS", "BY",          "PROBABILITY",
    "DEPENDENCE", "SELECT",  "VARIABLES", "WHERE",    "LIMIT",   "USING",
    "SAMPLES"};

bool is_keyword(const std::string& ident) {
  const std::string u = upper(ident);
  for (const char* k : kKeywords) {
    if (u == k) return true;
  }
  return false;
}

std::string describe(const Token& token) {
  switch (token.kind) {
    case TokenKind::kIdent:
      return "'" + token.text + "'";
    case TokenKind::kQuotedIdent:
      return "\"" + token.text + "\"";
    case TokenKind::kNumber:
      return "number " + token.text;
    case TokenKind::kString:
      return "string '" + token.text + "'";
    case TokenKind::kSymbol:
      return "'" + token.text + "'";
    case TokenKind::kEnd:
      return "end of input";
  }
  return "?";
}

class Lexer {
 public:
  explicit Lexer(const std::string& text) : text_(text) {}

  std::vector<Token> run() {
    std::vector<Token> tokens;
    for (;;) {
      skip_space();
      Token token;
      token.line = line_;
      token.column = column_;
      if (pos_ >= text_.size()) {
        tokens.push_back(token);
        return tokens;
      }
      const char c = text_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        token.kind = TokenKind::kIdent;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                text_[pos_] == '_' || text_[pos_] == '.')) {
          token.text += take();
        }
      } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' ||
                 ((c == '-' || c == '+') && pos_ + 1 < text_.size() &&
                  (std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])) ||
                   text_[pos_ + 1] == '.'))) {
        token.kind = TokenKind::kNumber;
        lex_number(token);
      } else if (c == '"') {
        token.kind = TokenKind::kQuotedIdent;
        lex_quoted(token, '"');
      } else if (c == '\'') {
        token.kind = TokenKind::kString;
        lex_quoted(token, '\'');
      } else if (std::strchr("(),=<>;*", c) != nullptr) {
        token.kind = TokenKind::kSymbol;
        token.text = take();
      } else {
        throw SyntaxError(token.line, token.column, "a token",
                          std::string("'") + c + "'");
      }
      tokens.push_back(std::move(token));
    }
  }

 private:
  char take() {
    const char c = text_[pos_++];
    if (c == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    return c;
  }

  void skip_space() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      take();
    }
  }

  void lex_number(Token& token) {
    const int line = token.line;
    const int column = token.column;
    std::string spelling;
    if (text_[pos_] == '-' || text_[pos_] == '+') spelling += take();
    bool digits = false;
    while (pos_ < text_.size() &&
           std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      spelling += take();
      digits = true;
    }
    if (pos_ < text_.size() && text_[pos_] == '.') {
      spelling += take();
      while (pos_ < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        spelling += take();
        digits = true;
      }
    }
    if (!digits) {
      throw SyntaxError(line, column, "a number", "'" + spelling + "'");
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::string exp;
      exp += text_[pos_];
      size_t look = pos_ + 1;
      if (look < text_.size() && (text_[look] == '-' || text_[look] == '+')) {
        exp += text_[look];
        ++look;
      }
      bool exp_digits = false;
      while (look < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[look]))) {
        exp += text_[look];
        ++look;
        exp_digits = true;
      }
      if (exp_digits) {
        for (size_t i = 0; i < exp.size(); ++i) take();
        spelling += exp;
      }
    }
    token.text = spelling;
    token.number = std::strtod(spelling.c_str(), nullptr);
    if (!std::isfinite(token.number)) {
      throw SyntaxError(line, column, "a finite number", spelling);
    }
  }

  void lex_quoted(Token& token, char quote) {
    const int line = token.line;
    const int column = token.column;
    take();  // opening quote
    for (;;) {
      if (pos_ >= text_.size()) {
        throw SyntaxError(line, column, "a closing quote", "end of input");
      }
      const char c = take();
      if (c == quote) {
        if (pos_ < text_.size() && text_[pos_] == quote) {
          token.text += take();  // doubled quote escapes itself
        } else {
          return;
        }
      } else {
        token.text += c;
      }
    }
  }

  const std::string& text_;
  size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

// --- Parser -----------------------------------------------------------------

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  QueryAst parse() {
    QueryAst ast = statement();
    accept_symbol(";");
    expect_end();
    return ast;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }

  const Token& advance() { return tokens_[pos_++]; }

  [[noreturn]] void fail(const std::string& expected) const {
    const Token& t = peek();
    throw SyntaxError(t.line, t.column, expected, describe(t));
  }

  bool at_keyword(const char* keyword) const {
    return peek().kind == TokenKind::kIdent && upper(peek().text) == keyword;
  }

  void expect_keyword(const char* keyword) {
    if (!at_keyword(keyword)) fail(keyword);
    advance();
  }

  bool accept_keyword(const char* keyword) {
    if (!at_keyword(keyword)) return false;
    advance();
    return true;
  }

  void expect_symbol(const char* symbol) {
    if (peek().kind != TokenKind::kSymbol || peek().text != symbol) {
      fail(std::string("'") + symbol + "'");
    }
    advance();
  }

  bool accept_symbol(const char* symbol) {
    if (peek().kind != TokenKind::kSymbol || peek().text != symbol) {
      return false;
    }
    advance();
    return true;
  }

  void expect_end() {
    if (peek().kind != TokenKind::kEnd) fail("end of statement");
  }

  std::string variable_name() {
    if (peek().kind == TokenKind::kQuotedIdent) return advance().text;
    if (peek().kind == TokenKind::kIdent && !is_keyword(peek().text)) {
      return advance().text;
    }
    fail("a variable name");
  }

  double number() {
    if (peek().kind != TokenKind::kNumber) fail("a number");
    return advance().number;
  }

  long positive_integer(const char* what) {
    const Token& t = peek();
    if (t.kind != TokenKind::kNumber || t.number < 1 ||
        t.number != std::floor(t.number) || t.number > 1e15) {
      fail(what);
    }
    advance();
    return static_cast<long>(t.number);
  }

  Threshold::Op comparator() {
    if (accept_symbol("<")) return Threshold::Op::kLess;
    if (accept_symbol(">")) return Threshold::Op::kGreater;
    fail("'<' or '>'");
  }

  std::vector<std::string> variable_list() {
    expect_symbol("(");
    std::vector<std::string> names;
    names.push_back(variable_name());
    while (accept_symbol(",")) names.push_back(variable_name());
    expect_symbol(")");
    return names;
  }

  std::vector<GivenEntry> given_list() {
    expect_symbol("(");
    std::vector<GivenEntry> entries;
    do {
      GivenEntry entry;
      entry.variable = variable_name();
      if (accept_symbol("=")) {
        QueryLiteral literal;
        if (peek().kind == TokenKind::kNumber) {
          literal.is_number = true;
          literal.number = peek().number;
          literal.text = peek().text;
          advance();
        } else if (peek().kind == TokenKind::kString) {
          literal.text = advance().text;
        } else {
          fail("a literal value");
        }
        entry.value = std::move(literal);
      }
      entries.push_back(std::move(entry));
    } while (accept_symbol(","));
    expect_symbol(")");
    return entries;
  }

  // MUTUAL INFORMATION OF (...) WITH (...) [GIVEN (...)], shared between
  // SIMULATE and ESTIMATE PROBABILITY.
  SimulateMiAst mi_core() {
    SimulateMiAst ast;
    expect_keyword("MUTUAL");
    expect_keyword("INFORMATION");
    expect_keyword("OF");
    ast.a = variable_list();
    expect_keyword("WITH");
    ast.b = variable_list();
    if (accept_keyword("GIVEN")) ast.given = given_list();
    return ast;
  }

  std::string models_of() {
    expect_keyword("MODELS");
    expect_keyword("OF");
    if (peek().kind == TokenKind::kQuotedIdent ||
        (peek().kind == TokenKind::kIdent && !is_keyword(peek().text))) {
      return advance().text;
    }
    fail("a model name");
  }

  QueryAst statement() {
    if (accept_keyword("SIMULATE")) {
      if (at_keyword("MUTUAL")) {
        SimulateMiAst ast = mi_core();
        expect_keyword("FROM");
        ast.model = models_of();
        if (accept_keyword("USING")) {
          ast.accuracy = positive_integer("a positive sample count");
          expect_keyword("SAMPLES");
        }
        return ast;
      }
      if (peek().kind == TokenKind::kSymbol && peek().text == "(") {
        return simulate_vars();
      }
      fail("MUTUAL or '('");
    }
    if (accept_keyword("ESTIMATE")) {
      if (accept_keyword("PROBABILITY")) {
        expect_keyword("OF");
        expect_symbol("(");
        EstimateProbMiAst ast;
        ast.inner = mi_core();
        ast.comparator = comparator();
        ast.threshold = number();
        expect_symbol(")");
        expect_keyword("BY");
        ast.inner.model = models_of();
        return ast;
      }
      if (accept_keyword("DEPENDENCE")) {
        expect_keyword("PROBABILITY");
        expect_keyword("OF");
        EstimateDepProbAst ast;
        ast.i = variable_name();
        expect_keyword("WITH");
        ast.j = variable_name();
        expect_keyword("BY");
        ast.model = models_of();
        return ast;
      }
      fail("PROBABILITY or DEPENDENCE");
    }
    fail("SIMULATE or ESTIMATE");
  }

  QueryAst simulate_vars() {
    SimulateVarsAst ast;
    expect_symbol("(");
    expect_keyword("SELECT");
    expect_symbol("*");
    expect_keyword("FROM");
    expect_keyword("VARIABLES");
    expect_keyword("OF");
    ast.model = variable_name();
    if (accept_keyword("WHERE")) {
      VarFilterAst filter;
      expect_keyword("PROBABILITY");
      expect_keyword("OF");
      expect_symbol("(");
      expect_keyword("MUTUAL");
      expect_keyword("INFORMATION");
      expect_keyword("WITH");
      filter.variable = variable_name();
      filter.mi_comparator = comparator();
      filter.mi_threshold = number();
      expect_symbol(")");
      filter.prob_comparator = comparator();
      filter.prob_threshold = number();
      ast.filter = std::move(filter);
    }
    expect_symbol(")");
    expect_keyword("FROM");
    ast.model = variable_name();
    expect_keyword("LIMIT");
    ast.limit = positive_integer("a positive row count");
    return ast;
  }

  std::vector<Token> tokens_;
  size_t pos_ = 0;
};

std::string quote_if_needed(const std::string& name) {
  bool plain = !name.empty() && !is_keyword(name) &&
               (std::isalpha(static_cast<unsigned char>(name[0])) ||
                name[0] == '_');
  for (char c : name) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' ||
          c == '.')) {
      plain = false;
    }
  }
  if (plain) return name;
  std::string out = "\"";
  for (char c : name) {
    out += c;
    if (c == '"') out += c;
  }
  return out + "\"";
}

std::string format_double(double v) { return nlohmann::json(v).dump(); }

std::string print_given(const std::vector<GivenEntry>& given) {
  std::string out = " GIVEN (";
  for (size_t i = 0; i < given.size(); ++i) {
    if (i) out += ", ";
    out += quote_if_needed(given[i].variable);
    if (given[i].value) {
      out += " = ";
      if (given[i].value->is_number) {
        out += format_double(given[i].value->number);
      } else {
        std::string s = "'";
        for (char c : given[i].value->text) {
          s += c;
          if (c == '\'') s += c;
        }
        out += s + "'";
      }
    }
  }
  return out + ")";
}

std::string print_varlist(const std::vector<std::string>& names) {
  std::string out = "(";
  for (size_t i = 0; i < names.size(); ++i) {
    if (i) out += ", ";
    out += quote_if_needed(names[i]);
  }
  return out + ")";
}

std::string print_mi_core(const SimulateMiAst& ast) {
  std::string out = "MUTUAL INFORMATION OF " + print_varlist(ast.a) +
                    " WITH " + print_varlist(ast.b);
  if (!ast.given.empty()) out += print_given(ast.given);
  return out;
}

}  // namespace

QueryAst parse_query(const std::string& text) {
  return Parser(Lexer(text).run()).parse();
}

std::string print_query(const QueryAst& ast) {
  if (const auto* mi = std::get_if<SimulateMiAst>(&ast)) {
    std::string out = "SIMULATE " + print_mi_core(*mi) + " FROM MODELS OF " +
                      quote_if_needed(mi->model);
    if (mi->accuracy) {
      out += " USING " + std::to_string(*mi->accuracy) + " SAMPLES";
    }
    return out;
  }
  if (const auto* prob = std::get_if<EstimateProbMiAst>(&ast)) {
    return "ESTIMATE PROBABILITY OF (" + print_mi_core(prob->inner) +
           (prob->comparator == Threshold::Op::kLess ? " < " : " > ") +
           format_double(prob->threshold) + ") BY MODELS OF " +
           quote_if_needed(prob->inner.model);
  }
  if (const auto* dep = std::get_if<EstimateDepProbAst>(&ast)) {
    return "ESTIMATE DEPENDENCE PROBABILITY OF " + quote_if_needed(dep->i) +
           " WITH " + quote_if_needed(dep->j) + " BY MODELS OF " +
           quote_if_needed(dep->model);
  }
  const auto& vars = std::get<SimulateVarsAst>(ast);
  std::string out = "SIMULATE (SELECT * FROM VARIABLES OF " +
                    quote_if_needed(vars.model);
  if (vars.filter) {
    out += " WHERE PROBABILITY OF (MUTUAL INFORMATION WITH " +
           quote_if_needed(vars.filter->variable) +
           (vars.filter->mi_comparator == Threshold::Op::kLess ? " < " : " > ") +
           format_double(vars.filter->mi_threshold) + ")" +
           (vars.filter->prob_comparator == Threshold::Op::kLess ? " < "
                                                                 : " > ") +
           format_double(vars.filter->prob_threshold);
  }
  out += ") FROM " + quote_if_needed(vars.model) + " LIMIT " +
         std::to_string(vars.limit);
  return out;
}

// --- Planning and execution --------------------------------------------------

namespace {

Cell literal_to_cell(const Schema& schema, int variable,
                     const QueryLiteral& literal) {
  const Variable& var = schema.variable(variable);
  if (var.type == StatType::kNumerical) {
    if (!literal.is_number) {
      throw TypeMismatchError("variable " + var.name + " takes a number");
    }
    return Cell::real(literal.number);
  }
  // Nominal: match the label spelling first (numbers match their raw
  // spelling), then fall back to a bare category index.
  const std::string label = literal.is_number ? literal.text : literal.text;
  if (auto idx = var.category_index(label)) return Cell::category(*idx);
  if (literal.is_number && literal.number == std::floor(literal.number) &&
      literal.number >= 0 && literal.number < var.category_count) {
    return Cell::category(static_cast<int>(literal.number));
  }
  throw TypeMismatchError("no category '" + label + "' for variable " +
                          var.name);
}

CmiQuery build_cmi_query(const Schema& schema, const SimulateMiAst& ast,
                         const ExecOptions& options) {
  CmiQuery query;
  std::vector<int> a, b;
  for (const std::string& name : ast.a) a.push_back(schema.require(name));
  for (const std::string& name : ast.b) b.push_back(schema.require(name));
  query.a = VarSet(std::move(a));
  query.b = VarSet(std::move(b));
  std::vector<int> marginalized;
  for (const GivenEntry& entry : ast.given) {
    const int v = schema.require(entry.variable);
    if (entry.value) {
      query.condition.fixed[v] = literal_to_cell(schema, v, *entry.value);
    } else {
      marginalized.push_back(v);
    }
  }
  query.condition.marginalized = VarSet(std::move(marginalized));
  query.t = ast.accuracy.value_or(options.t);
  query.t_outer = options.t_outer;
  return query;
}

}  // namespace

QueryResult plan_and_execute(const QueryAst& ast, const Ensemble& ensemble,
                             const ExecOptions& options,
                             const RandomStream& rng) {
  const Schema& schema = ensemble.schema();
  if (const auto* mi = std::get_if<SimulateMiAst>(&ast)) {
    const CmiQuery query = build_cmi_query(schema, *mi, options);
    return PosteriorSamplesResult{
        cmi_posterior(ensemble, query, rng, options.jobs)};
  }
  if (const auto* prob = std::get_if<EstimateProbMiAst>(&ast)) {
    const CmiQuery query = build_cmi_query(schema, prob->inner, options);
    const CmiPosterior posterior =
        cmi_posterior(ensemble, query, rng, options.jobs);
    return ScalarResult{
        prob_cmi_in(posterior, {prob->comparator, prob->threshold})};
  }
  if (const auto* dep = std::get_if<EstimateDepProbAst>(&ast)) {
    return ScalarResult{dependence_probability_bound(
        ensemble, schema.require(dep->i), schema.require(dep->j))};
  }

  const auto& vars = std::get<SimulateVarsAst>(ast);
  std::vector<int> selected;
  if (vars.filter) {
    const int target = schema.require(vars.filter->variable);
    const RandomStream filter_rng = rng.child(0);
    for (int v = 0; v < static_cast<int>(schema.size()); ++v) {
      if (v == target) continue;  // a variable is never independent of itself
      CmiQuery query;
      query.a = VarSet::of({v});
      query.b = VarSet::of({target});
      query.t = options.t;
      query.t_outer = options.t_outer;
      const CmiPosterior posterior = cmi_posterior(
          ensemble, query, filter_rng.child(static_cast<uint64_t>(v)),
          options.jobs);
      const double p = prob_cmi_in(
          posterior, {vars.filter->mi_comparator, vars.filter->mi_threshold});
      const Threshold prob_test{vars.filter->prob_comparator,
                                vars.filter->prob_threshold};
      if (prob_test.test(p)) selected.push_back(v);
    }
  } else {
    for (int v = 0; v < static_cast<int>(schema.size()); ++v) {
      selected.push_back(v);
    }
  }
  RowsResult rows;
  rows.variables = selected;
  if (selected.empty()) return rows;  // empty row set, not an error
  const VarSet query_vars(selected);
  const RandomStream rows_rng = rng.child(1);
  for (long i = 0; i < vars.limit; ++i) {
    RandomStream row_rng = rows_rng.child(static_cast<uint64_t>(i));
    const size_t member = row_rng.uniform_index(ensemble.size());
    rows.rows.push_back(
        ensemble.member(member).simulate(query_vars, {}, row_rng));
  }
  return rows;
}

// --- Formatting --------------------------------------------------------------

namespace {

std::string cell_to_text(const Schema& schema, int variable, const Cell& cell) {
  if (cell.is_missing()) return "NA";
  if (cell.is_real()) return format_double(cell.real_value());
  return schema.variable(variable).category_label(cell.category_value());
}

nlohmann::json cell_to_json(const Schema& schema, int variable,
                            const Cell& cell) {
  if (cell.is_missing()) return nullptr;
  if (cell.is_real()) return cell.real_value();
  return schema.variable(variable).category_label(cell.category_value());
}

}  // namespace

std::string format_result(const QueryResult& result, const Schema& schema,
                          OutputFormat format) {
  std::ostringstream out;
  if (const auto* scalar = std::get_if<ScalarResult>(&result)) {
    switch (format) {
      case OutputFormat::kPlain:
        out << format_double(scalar->value);
        break;
      case OutputFormat::kCsv:
        out << "value\n" << format_double(scalar->value) << '\n';
        break;
      case OutputFormat::kJson:
        out << nlohmann::json{{"value", scalar->value}}.dump();
        break;
    }
    return out.str();
  }
  if (const auto* samples = std::get_if<PosteriorSamplesResult>(&result)) {
    switch (format) {
      case OutputFormat::kPlain:
        for (const CmiSample& s : samples->posterior.estimates) {
          out << s.member << '\t' << format_double(s.estimate) << '\n';
        }
        break;
      case OutputFormat::kCsv:
        write_posterior_csv(out, samples->posterior);
        break;
      case OutputFormat::kJson: {
        nlohmann::json arr = nlohmann::json::array();
        for (const CmiSample& s : samples->posterior.estimates) {
          arr.push_back({{"member_id", s.member}, {"cmi_nats", s.estimate}});
        }
        out << nlohmann::json{{"estimates", std::move(arr)}}.dump();
        break;
      }
    }
    return out.str();
  }
  const auto& rows = std::get<RowsResult>(result);
  switch (format) {
    case OutputFormat::kPlain:
    case OutputFormat::kCsv: {
      const char sep = format == OutputFormat::kCsv ? ',' : '\t';
      for (size_t i = 0; i < rows.variables.size(); ++i) {
        if (i) out << sep;
        out << schema.variable(rows.variables[i]).name;
      }
      out << '\n';
      for (const Values& row : rows.rows) {
        for (size_t i = 0; i < rows.variables.size(); ++i) {
          if (i) out << sep;
          out << cell_to_text(schema, rows.variables[i],
                              row.at(rows.variables[i]));
        }
        out << '\n';
      }
      break;
    }
    case OutputFormat::kJson: {
      nlohmann::json arr = nlohmann::json::array();
      for (const Values& row : rows.rows) {
        nlohmann::json obj = nlohmann::json::object();
        for (int v : rows.variables) {
          obj[schema.variable(v).name] = cell_to_json(schema, v, row.at(v));
        }
        arr.push_back(std::move(obj));
      }
      out << arr.dump();
      break;
    }
  }
  return out.str();
}

}  // namespace crossmi
