// Apache License, Version 2.0, refer to LICENSE.txt

#include "crossmi/bayesnet.hh"

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <map>

#include "json.hpp"

namespace crossmi {

DiscreteBayesNet::DiscreteBayesNet(std::vector<BayesNetVariable> variables)
    : variables_(std::move(variables)) {
  const size_t d = variables_.size();
  for (const BayesNetVariable& v : variables_) {
    if (v.domain < 2) throw Error("domain must have >= 2 values: " + v.name);
    size_t parent_configs = 1;
    for (int p : v.parents) {
      if (p < 0 || static_cast<size_t>(p) >= d) {
        throw Error("parent index out of range in " + v.name);
      }
      parent_configs *= static_cast<size_t>(variables_[static_cast<size_t>(p)].domain);
    }
    if (v.cpt.size() != parent_configs) {
      throw Error("cpt row count does not match parent configurations in " +
                  v.name);
    }
    for (const std::vector<double>& row : v.cpt) {
      if (row.size() != static_cast<size_t>(v.domain)) {
        throw Error("cpt row width does not match domain in " + v.name);
      }
      double total = 0.0;
      for (double p : row) {
        if (p < 0) throw Error("negative cpt entry in " + v.name);
        total += p;
      }
      if (std::fabs(total - 1.0) > 1e-12) {
        throw Error("cpt row does not sum to 1 in " + v.name);
      }
    }
  }
  // Kahn topological sort; rejects cycles.
  std::vector<int> in_degree(d, 0);
  for (size_t i = 0; i < d; ++i) {
    in_degree[i] = static_cast<int>(variables_[i].parents.size());
  }
  std::vector<std::vector<int>> children(d);
  for (size_t i = 0; i < d; ++i) {
    for (int p : variables_[i].parents) {
      children[static_cast<size_t>(p)].push_back(static_cast<int>(i));
    }
  }
  std::vector<int> ready;
  for (size_t i = 0; i < d; ++i) {
    if (in_degree[i] == 0) ready.push_back(static_cast<int>(i));
  }
  while (!ready.empty()) {
    const int v = ready.back();
    ready.pop_back();
    topo_order_.push_back(v);
    for (int c : children[static_cast<size_t>(v)]) {
      if (--in_degree[static_cast<size_t>(c)] == 0) ready.push_back(c);
    }
  }
  if (topo_order_.size() != d) throw Error("network graph has a cycle");
}

namespace {

size_t parent_row(const DiscreteBayesNet& net, const BayesNetVariable& v,
                  const std::vector<int>& config) {
  size_t row = 0;
  for (int p : v.parents) {
    row = row * static_cast<size_t>(
                    net.variables()[static_cast<size_t>(p)].domain) +
          static_cast<size_t>(config[static_cast<size_t>(p)]);
  }
  return row;
}

}  // namespace

double DiscreteBayesNet::joint_prob(const std::vector<int>& config) const {
  assert(config.size() == variables_.size());
  double p = 1.0;
  for (size_t i = 0; i < variables_.size(); ++i) {
    const BayesNetVariable& v = variables_[i];
    p *= v.cpt[parent_row(*this, v, config)][static_cast<size_t>(config[i])];
  }
  return p;
}

std::vector<int> DiscreteBayesNet::sample(RandomStream& rng) const {
  std::vector<int> config(variables_.size(), 0);
  for (int i : topo_order_) {
    const BayesNetVariable& v = variables_[static_cast<size_t>(i)];
    const std::vector<double>& row = v.cpt[parent_row(*this, v, config)];
    config[static_cast<size_t>(i)] = static_cast<int>(rng.categorical(row));
  }
  return config;
}

double DiscreteBayesNet::outcome_space_size() const {
  double total = 1.0;
  for (const BayesNetVariable& v : variables_) total *= v.domain;
  return total;
}

namespace {

constexpr double kMaxOutcomes = 1e6;

// Walks every configuration of `vars` (ascending index order).
template <typename F>
void enumerate(const std::vector<int>& domains, F&& visit) {
  std::vector<int> config(domains.size(), 0);
  for (;;) {
    visit(config);
    size_t i = 0;
    for (; i < domains.size(); ++i) {
      if (++config[i] < domains[i]) break;
      config[i] = 0;
    }
    if (i == domains.size()) return;
  }
}

}  // namespace

double exact_cmi(const DiscreteBayesNet& net, const VarSet& a, const VarSet& b,
                 const std::map<int, int>& condition_fixed) {
  if (a.empty() || b.empty()) throw Error("cmi query sets must be non-empty");
  if (!a.disjoint(b)) throw OverlappingVarSetsError("a and b overlap");
  for (const auto& [v, value] : condition_fixed) {
    if (a.contains(v) || b.contains(v)) {
      throw OverlappingVarSetsError("condition overlaps query sets");
    }
  }
  if (net.outcome_space_size() > kMaxOutcomes) {
    throw StateSpaceTooLargeError("joint outcome space exceeds 1e6");
  }

  // Accumulate the joint over (a, b) restricted to the conditioning event.
  const size_t na = a.size();
  const size_t nb = b.size();
  std::vector<int> domains(net.size());
  for (size_t i = 0; i < net.size(); ++i) {
    domains[i] = net.variables()[i].domain;
  }
  std::map<std::vector<int>, double> joint;
  double z = 0.0;
  enumerate(domains, [&](const std::vector<int>& config) {
    for (const auto& [v, value] : condition_fixed) {
      if (config[static_cast<size_t>(v)] != value) return;
    }
    const double p = net.joint_prob(config);
    if (p == 0.0) return;
    z += p;
    std::vector<int> key;
    key.reserve(na + nb);
    for (int v : a) key.push_back(config[static_cast<size_t>(v)]);
    for (int v : b) key.push_back(config[static_cast<size_t>(v)]);
    joint[key] += p;
  });
  if (z <= 0.0) throw Error("conditioning event has probability zero");

  std::map<std::vector<int>, double> marg_a, marg_b;
  for (const auto& [key, p] : joint) {
    marg_a[std::vector<int>(key.begin(), key.begin() + static_cast<long>(na))] += p;
    marg_b[std::vector<int>(key.begin() + static_cast<long>(na), key.end())] += p;
  }
  double info = 0.0;
  for (const auto& [key, p] : joint) {
    const double pab = p / z;
    if (pab == 0.0) continue;
    const double pa =
        marg_a.at(std::vector<int>(key.begin(), key.begin() + static_cast<long>(na))) / z;
    const double pb =
        marg_b.at(std::vector<int>(key.begin() + static_cast<long>(na), key.end())) / z;
    info += pab * std::log(pab / (pa * pb));
  }
  return info;
}

BayesNetGpm::BayesNetGpm(DiscreteBayesNet net) : net_(std::move(net)) {
  if (net_.outcome_space_size() > kMaxOutcomes) {
    throw StateSpaceTooLargeError("joint outcome space exceeds 1e6");
  }
  std::vector<Variable> vars;
  for (const BayesNetVariable& v : net_.variables()) {
    Variable var;
    var.name = v.name;
    var.type = StatType::kNominal;
    var.category_count = v.domain;
    vars.push_back(std::move(var));
    domains_.push_back(v.domain);
  }
  schema_ = Schema(std::move(vars));
}

double BayesNetGpm::restricted_mass(const Values& fixed) const {
  std::vector<int> domains = domains_;
  double total = 0.0;
  enumerate(domains, [&](const std::vector<int>& config) {
    for (const auto& [v, cell] : fixed) {
      if (config[static_cast<size_t>(v)] != cell.category_value()) return;
    }
    total += net_.joint_prob(config);
  });
  return total;
}

Values BayesNetGpm::simulate(const VarSet& query, const Values& condition,
                             RandomStream& rng) const {
  if (query.empty()) return {};
  if (!query.disjoint(keys_of(condition))) {
    throw OverlappingVarSetsError("query overlaps condition");
  }
  for (const auto& [v, cell] : condition) schema_.check_cell(v, cell);
  // Enumerate the conditional marginal over the query variables, then draw.
  std::map<std::vector<int>, double> table;
  enumerate(domains_, [&](const std::vector<int>& config) {
    for (const auto& [v, cell] : condition) {
      if (config[static_cast<size_t>(v)] != cell.category_value()) return;
    }
    std::vector<int> key;
    for (int v : query) key.push_back(config[static_cast<size_t>(v)]);
    table[key] += net_.joint_prob(config);
  });
  std::vector<double> weights;
  std::vector<const std::vector<int>*> keys;
  for (const auto& [key, p] : table) {
    keys.push_back(&key);
    weights.push_back(p);
  }
  const std::vector<int>& key = *keys[rng.categorical(weights)];
  Values out;
  size_t i = 0;
  for (int v : query) out.emplace(v, Cell::category(key[i++]));
  return out;
}

double BayesNetGpm::logpdf(const Values& target, const Values& condition) const {
  if (target.empty()) throw Error("logpdf target must be non-empty");
  if (!keys_of(target).disjoint(keys_of(condition))) {
    throw OverlappingVarSetsError("target overlaps condition");
  }
  for (const auto& [v, cell] : target) schema_.check_cell(v, cell);
  for (const auto& [v, cell] : condition) schema_.check_cell(v, cell);
  Values both = target;
  for (const auto& [v, cell] : condition) both.emplace(v, cell);
  const double num = restricted_mass(both);
  const double den = condition.empty() ? 1.0 : restricted_mass(condition);
  if (den <= 0.0) throw Error("conditioning event has probability zero");
  return std::log(num) - std::log(den);
}

namespace {

std::shared_ptr<const Dataset> bits_dataset(
    const std::vector<std::array<int, 3>>& samples) {
  std::vector<Variable> vars(3);
  const char* names[3] = {"x1", "x2", "x3"};
  for (size_t i = 0; i < 3; ++i) {
    vars[i].name = names[i];
    vars[i].type = StatType::kNominal;
    vars[i].category_count = 2;
    vars[i].categories = {"0", "1"};
  }
  std::vector<std::vector<Cell>> rows;
  rows.reserve(samples.size());
  for (const auto& s : samples) {
    rows.push_back({Cell::category(s[0]), Cell::category(s[1]),
                    Cell::category(s[2])});
  }
  return std::make_shared<Dataset>(Schema(std::move(vars)), std::move(rows));
}

void check_generator_args(long n, double noise) {
  if (n < 1) throw Error("generator needs n >= 1");
  if (noise < 0.0 || noise >= 0.5) throw Error("noise must be in [0, 0.5)");
}

}  // namespace

std::shared_ptr<const Dataset> gen_vstruct(long n, double noise,
                                           RandomStream& rng) {
  check_generator_args(n, noise);
  std::vector<std::array<int, 3>> samples(static_cast<size_t>(n));
  for (auto& s : samples) {
    s[0] = rng.uniform() < 0.5 ? 0 : 1;
    s[1] = rng.uniform() < 0.5 ? 0 : 1;
    const int parity = s[0] ^ s[1];
    s[2] = rng.uniform() < noise ? 1 - parity : parity;
  }
  return bits_dataset(samples);
}

DiscreteBayesNet vstruct_net(double noise) {
  std::vector<BayesNetVariable> vars(3);
  vars[0] = {"x1", 2, {}, {{0.5, 0.5}}};
  vars[1] = {"x2", 2, {}, {{0.5, 0.5}}};
  vars[2] = {"x3",
             2,
             {0, 1},
             {{1 - noise, noise},
              {noise, 1 - noise},
              {noise, 1 - noise},
              {1 - noise, noise}}};
  return DiscreteBayesNet(std::move(vars));
}

std::shared_ptr<const Dataset> gen_common_cause(long n, double noise,
                                                RandomStream& rng) {
  check_generator_args(n, noise);
  std::vector<std::array<int, 3>> samples(static_cast<size_t>(n));
  for (auto& s : samples) {
    s[0] = rng.uniform() < 0.5 ? 0 : 1;
    s[1] = rng.uniform() < noise ? 1 - s[0] : s[0];
    s[2] = rng.uniform() < noise ? 1 - s[0] : s[0];
  }
  return bits_dataset(samples);
}

DiscreteBayesNet common_cause_net(double noise) {
  std::vector<BayesNetVariable> vars(3);
  vars[0] = {"x1", 2, {}, {{0.5, 0.5}}};
  vars[1] = {"x2", 2, {0}, {{1 - noise, noise}, {noise, 1 - noise}}};
  vars[2] = {"x3", 2, {0}, {{1 - noise, noise}, {noise, 1 - noise}}};
  return DiscreteBayesNet(std::move(vars));
}

DiscreteBayesNet DiscreteBayesNet::from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw SerializationError(std::string("bad network json: ") + e.what());
  }
  std::vector<BayesNetVariable> vars;
  std::map<std::string, int> index;
  for (const auto& jv : doc.at("variables")) {
    BayesNetVariable v;
    v.name = jv.at("name");
    v.domain = jv.at("domain");
    index[v.name] = static_cast<int>(vars.size());
    vars.push_back(std::move(v));
  }
  for (const auto& jv : doc.at("variables")) {
    BayesNetVariable& v = vars[static_cast<size_t>(index.at(jv.at("name")))];
    if (jv.contains("parents")) {
      for (const auto& jp : jv.at("parents")) {
        auto it = index.find(jp.get<std::string>());
        if (it == index.end()) {
          throw SerializationError("unknown parent: " + jp.get<std::string>());
        }
        v.parents.push_back(it->second);
      }
    }
    v.cpt = jv.at("cpt").get<std::vector<std::vector<double>>>();
  }
  return DiscreteBayesNet(std::move(vars));
}

std::string DiscreteBayesNet::to_json() const {
  nlohmann::json jvars = nlohmann::json::array();
  for (const BayesNetVariable& v : variables_) {
    nlohmann::json jv{{"name", v.name}, {"domain", v.domain}, {"cpt", v.cpt}};
    nlohmann::json parents = nlohmann::json::array();
    for (int p : v.parents) parents.push_back(variables_[static_cast<size_t>(p)].name);
    jv["parents"] = std::move(parents);
    jvars.push_back(std::move(jv));
  }
  return nlohmann::json{{"variables", std::move(jvars)}}.dump(2);
}

}  // namespace crossmi
