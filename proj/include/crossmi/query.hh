// Apache License, Version 2.0, refer to LICENSE.txt
//
// SQL-like query language over a fitted ensemble. Four statement forms:
//
//   SIMULATE MUTUAL INFORMATION OF (a...) WITH (b...)
//     [GIVEN (v = lit, w, ...)] FROM MODELS OF name [USING n SAMPLES]
//
//   ESTIMATE PROBABILITY OF (MUTUAL INFORMATION OF (a...) WITH (b...)
//     [GIVEN (...)] < t) BY MODELS OF name
//
//   ESTIMATE DEPENDENCE PROBABILITY OF v WITH w BY MODELS OF name
//
//   SIMULATE (SELECT * FROM VARIABLES OF name
//     [WHERE PROBABILITY OF (MUTUAL INFORMATION WITH v < t) > p])
//     FROM name LIMIT n
//
// Keywords are case-insensitive and reserved; identifiers colliding with a
// keyword must be double-quoted. A GIVEN entry with a value fixes the
// variable; without one the variable is conditioned on but marginalized.

#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "crossmi/cmi.hh"

namespace crossmi {

struct QueryLiteral {
  bool is_number = false;
  double number = 0.0;
  std::string text;  // string literal, or the raw spelling of a number
};

struct GivenEntry {
  std::string variable;
  std::optional<QueryLiteral> value;  // nullopt: marginalized
};

struct SimulateMiAst {
  std::vector<std::string> a;
  std::vector<std::string> b;
  std::vector<GivenEntry> given;
  std::string model;
  std::optional<long> accuracy;
};

struct EstimateProbMiAst {
  SimulateMiAst inner;
  Threshold::Op comparator = Threshold::Op::kLess;
  double threshold = 0.0;
};

struct EstimateDepProbAst {
  std::string i;
  std::string j;
  std::string model;
};

struct VarFilterAst {
  std::string variable;
  Threshold::Op mi_comparator = Threshold::Op::kLess;
  double mi_threshold = 0.0;
  Threshold::Op prob_comparator = Threshold::Op::kGreater;
  double prob_threshold = 0.0;
};

struct SimulateVarsAst {
  std::string model;
  std::optional<VarFilterAst> filter;
  long limit = 0;
};

using QueryAst = std::variant<SimulateMiAst, EstimateProbMiAst,
                              EstimateDepProbAst, SimulateVarsAst>;

// Throws SyntaxError with line/column and the expected token set.
QueryAst parse_query(const std::string& text);

// Canonical single-line spelling; parse(print(ast)) is structurally
// identical to ast.
std::string print_query(const QueryAst& ast);

struct PosteriorSamplesResult {
  CmiPosterior posterior;
};

struct ScalarResult {
  double value = 0.0;
};

struct RowsResult {
  std::vector<int> variables;  // schema indices, ascending
  std::vector<Values> rows;
};

using QueryResult =
    std::variant<PosteriorSamplesResult, ScalarResult, RowsResult>;

struct ExecOptions {
  long t = 1000;        // inner Monte Carlo samples
  long t_outer = 100;   // marginalized-condition draws
  int jobs = 1;
};

QueryResult plan_and_execute(const QueryAst& ast, const Ensemble& ensemble,
                             const ExecOptions& options,
                             const RandomStream& rng);

enum class OutputFormat { kPlain, kCsv, kJson };

std::string format_result(const QueryResult& result, const Schema& schema,
                          OutputFormat format);

}  // namespace crossmi
