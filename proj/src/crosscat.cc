// Apache License, Version 2.0, refer to LICENSE.txt

#include "crossmi/crosscat.hh"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "crossmi/mathutil.hh"
#include "json.hpp"

namespace crossmi {

namespace {

// Query variables grouped by block, ordered by smallest member variable so
// nothing depends on block labels.
struct BlockGroup {
  int64_t block_id;
  std::vector<int> variables;  // sorted
};

std::vector<BlockGroup> group_by_block(const std::vector<int64_t>& assignment,
                                       const VarSet& variables) {
  std::vector<BlockGroup> groups;
  for (int v : variables) {  // VarSet iterates in ascending order
    const int64_t block = assignment.at(static_cast<size_t>(v));
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const BlockGroup& g) { return g.block_id == block; });
    if (it == groups.end()) {
      groups.push_back({block, {v}});
    } else {
      it->variables.push_back(v);
    }
  }
  return groups;
}

Values restrict_values(const Values& values, const std::vector<int64_t>& assignment,
                       int64_t block) {
  Values out;
  for (const auto& [v, cell] : values) {
    if (assignment.at(static_cast<size_t>(v)) == block) out.emplace(v, cell);
  }
  return out;
}

}  // namespace

CrossCatState::CrossCatState(std::shared_ptr<const Dataset> data,
                             double outer_alpha,
                             std::vector<int64_t> var_assignment,
                             std::map<int64_t, DpmmState> blocks,
                             std::shared_ptr<const HyperGridSet> grids)
    : data_(std::move(data)),
      outer_alpha_(outer_alpha),
      var_assignment_(std::move(var_assignment)),
      blocks_(std::move(blocks)),
      grids_(std::move(grids)) {
  if (outer_alpha_ <= 0) throw Error("outer alpha must be positive");
  if (var_assignment_.size() != data_->variable_count()) {
    throw Error("variable assignment length does not match schema");
  }
  for (size_t v = 0; v < var_assignment_.size(); ++v) {
    auto it = blocks_.find(var_assignment_[v]);
    if (it == blocks_.end()) {
      throw Error("variable assigned to unknown block");
    }
    if (!std::binary_search(it->second.variables().begin(),
                            it->second.variables().end(),
                            static_cast<int>(v))) {
      throw Error("block does not contain its assigned variable");
    }
    next_block_id_ = std::max(next_block_id_, var_assignment_[v] + 1);
  }
  size_t total_vars = 0;
  for (const auto& [id, block] : blocks_) total_vars += block.variables().size();
  if (total_vars != data_->variable_count()) {
    throw Error("blocks do not partition the variables");
  }
}

CrossCatState::CrossCatState(const CrossCatState& o)
    : data_(o.data_),
      outer_alpha_(o.outer_alpha_),
      var_assignment_(o.var_assignment_),
      blocks_(o.blocks_),
      grids_(o.grids_),
      next_block_id_(o.next_block_id_) {}

CrossCatState& CrossCatState::operator=(const CrossCatState& o) {
  if (this == &o) return *this;
  data_ = o.data_;
  outer_alpha_ = o.outer_alpha_;
  var_assignment_ = o.var_assignment_;
  blocks_ = o.blocks_;
  grids_ = o.grids_;
  next_block_id_ = o.next_block_id_;
  simulate_calls_.store(0);
  logpdf_calls_.store(0);
  return *this;
}

CrossCatState::CrossCatState(CrossCatState&& o) noexcept
    : data_(std::move(o.data_)),
      outer_alpha_(o.outer_alpha_),
      var_assignment_(std::move(o.var_assignment_)),
      blocks_(std::move(o.blocks_)),
      grids_(std::move(o.grids_)),
      next_block_id_(o.next_block_id_) {}

CrossCatState& CrossCatState::operator=(CrossCatState&& o) noexcept {
  data_ = std::move(o.data_);
  outer_alpha_ = o.outer_alpha_;
  var_assignment_ = std::move(o.var_assignment_);
  blocks_ = std::move(o.blocks_);
  grids_ = std::move(o.grids_);
  next_block_id_ = o.next_block_id_;
  simulate_calls_.store(0);
  logpdf_calls_.store(0);
  return *this;
}

CrossCatState CrossCatState::from_prior(std::shared_ptr<const Dataset> data,
                                        std::shared_ptr<const HyperGridSet> grids,
                                        RandomStream& rng) {
  const size_t d = data->variable_count();
  const double outer_alpha = std::max(rng.gamma(1.0), 1e-6);
  std::vector<int64_t> assignment(d);
  std::vector<std::vector<int>> block_vars;
  for (size_t v = 0; v < d; ++v) {
    std::vector<double> weights(block_vars.size() + 1);
    for (size_t k = 0; k < block_vars.size(); ++k) {
      weights[k] = static_cast<double>(block_vars[k].size());
    }
    weights.back() = outer_alpha;
    const size_t k = rng.categorical(weights);
    if (k == block_vars.size()) block_vars.emplace_back();
    block_vars[k].push_back(static_cast<int>(v));
    assignment[v] = static_cast<int64_t>(k);
  }
  std::map<int64_t, DpmmState> blocks;
  for (size_t k = 0; k < block_vars.size(); ++k) {
    blocks.emplace(static_cast<int64_t>(k),
                   DpmmState::from_prior(data, block_vars[k], grids, rng));
  }
  return CrossCatState(std::move(data), outer_alpha, std::move(assignment),
                       std::move(blocks), std::move(grids));
}

int64_t CrossCatState::block_of(int variable) const {
  if (variable < 0 ||
      static_cast<size_t>(variable) >= var_assignment_.size()) {
    throw UnknownVariableError("variable index out of range: " +
                               std::to_string(variable));
  }
  return var_assignment_[static_cast<size_t>(variable)];
}

Values CrossCatState::simulate(const VarSet& query, const Values& condition,
                               RandomStream& rng) const {
  if (query.empty()) return {};
  if (!query.disjoint(keys_of(condition))) {
    throw OverlappingVarSetsError("query overlaps condition");
  }
  for (const auto& [v, cell] : condition) data_->schema().check_cell(v, cell);
  Values out;
  for (const BlockGroup& group : group_by_block(var_assignment_, query)) {
    RandomStream block_rng = rng.child(static_cast<uint64_t>(group.variables[0]));
    const DpmmState& block = blocks_.at(group.block_id);
    const Values block_condition =
        restrict_values(condition, var_assignment_, group.block_id);
    Values drawn = block.simulate(VarSet(group.variables), block_condition,
                                  block_rng);
    simulate_calls_.fetch_add(1, std::memory_order_relaxed);
    out.merge(drawn);
  }
  return out;
}

double CrossCatState::logpdf(const Values& target,
                             const Values& condition) const {
  if (target.empty()) throw Error("logpdf target must be non-empty");
  if (!keys_of(target).disjoint(keys_of(condition))) {
    throw OverlappingVarSetsError("target overlaps condition");
  }
  for (const auto& [v, cell] : condition) data_->schema().check_cell(v, cell);
  double total = 0.0;
  for (const BlockGroup& group : group_by_block(var_assignment_, keys_of(target))) {
    const DpmmState& block = blocks_.at(group.block_id);
    Values block_target;
    for (int v : group.variables) block_target.emplace(v, target.at(v));
    const Values block_condition =
        restrict_values(condition, var_assignment_, group.block_id);
    total += block.logpdf(block_target, block_condition);
    logpdf_calls_.fetch_add(1, std::memory_order_relaxed);
  }
  return total;
}

namespace {

// Forwards one block's queries while tallying the owning state's counters.
class CountingGpm : public Gpm {
 public:
  CountingGpm(const Gpm& inner, std::atomic<long>& sims,
              std::atomic<long>& logps, QueryCounts& local)
      : inner_(inner), sims_(sims), logps_(logps), local_(local) {}

  const Schema& schema() const override { return inner_.schema(); }

  Values simulate(const VarSet& query, const Values& condition,
                  RandomStream& rng) const override {
    sims_.fetch_add(1, std::memory_order_relaxed);
    ++local_.simulate_calls;
    return inner_.simulate(query, condition, rng);
  }

  double logpdf(const Values& target, const Values& condition) const override {
    logps_.fetch_add(1, std::memory_order_relaxed);
    ++local_.logpdf_calls;
    return inner_.logpdf(target, condition);
  }

 private:
  const Gpm& inner_;
  std::atomic<long>& sims_;
  std::atomic<long>& logps_;
  QueryCounts& local_;
};

}  // namespace

CrosscatCmi CrossCatState::cmi(const VarSet& a, const VarSet& b,
                               const Values& condition, long t,
                               RandomStream& rng) const {
  check_cmi_query(data_->schema(), a, b, condition, t);
  CrosscatCmi result;
  const VarSet joint = a.set_union(b);
  for (const BlockGroup& group : group_by_block(var_assignment_, joint)) {
    const VarSet block_vars(group.variables);
    const VarSet a_here = a.intersect(block_vars);
    const VarSet b_here = b.intersect(block_vars);
    if (a_here.empty() || b_here.empty()) continue;  // contributes exactly 0
    const DpmmState& block = blocks_.at(group.block_id);
    const Values block_condition =
        restrict_values(condition, var_assignment_, group.block_id);
    BlockCmi entry;
    entry.block_id = group.block_id;
    CountingGpm counted(block, simulate_calls_, logpdf_calls_, entry.counts);
    RandomStream block_rng = rng.child(static_cast<uint64_t>(group.variables[0]));
    entry.estimate =
        gpm_cmi_estimate(counted, a_here, b_here, block_condition, t, block_rng);
    result.value += entry.estimate.value;
    result.std_error = std::hypot(result.std_error, entry.estimate.std_error);
    result.counts.simulate_calls += entry.counts.simulate_calls;
    result.counts.logpdf_calls += entry.counts.logpdf_calls;
    result.blocks.push_back(std::move(entry));
  }
  return result;
}

void CrossCatState::gibbs_sweep_variables(RandomStream& rng) {
  const size_t d = data_->variable_count();
  for (size_t v = 0; v < d; ++v) {
    const int variable = static_cast<int>(v);
    const int64_t old_block = var_assignment_[v];
    DpmmState& old_state = blocks_.at(old_block);
    const bool was_singleton = old_state.variables().size() == 1;
    Hypers hypers = old_state.remove_variable(variable);

    // Auxiliary empty block: keep the current partition when the variable
    // was alone, otherwise draw one fresh from the prior.
    DpmmState aux = [&]() {
      if (was_singleton) {
        DpmmState moved = std::move(blocks_.at(old_block));
        blocks_.erase(old_block);
        return moved;
      }
      return DpmmState::from_prior(data_, {}, grids_, rng);
    }();

    std::vector<int64_t> ids;
    std::vector<double> log_weights;
    for (const auto& [id, block] : blocks_) {
      ids.push_back(id);
      log_weights.push_back(
          std::log(static_cast<double>(block.variables().size())) +
          block.column_logp(variable, hypers));
    }
    ids.push_back(-1);
    log_weights.push_back(std::log(outer_alpha_) +
                          aux.column_logp(variable, hypers));

    const size_t pick = rng.categorical_log(log_weights);
    int64_t chosen = ids[pick];
    if (chosen == -1) {
      chosen = next_block_id_++;
      aux.add_variable(variable, std::move(hypers));
      blocks_.emplace(chosen, std::move(aux));
    } else {
      blocks_.at(chosen).add_variable(variable, std::move(hypers));
    }
    var_assignment_[v] = chosen;
  }
}

void CrossCatState::infer_hypers(RandomStream& rng) {
  {
    const std::vector<double>& grid = grids_->alpha;
    const double d = static_cast<double>(var_assignment_.size());
    const double k = static_cast<double>(blocks_.size());
    std::vector<double> log_weights(grid.size());
    for (size_t g = 0; g < grid.size(); ++g) {
      const double a = grid[g];
      log_weights[g] =
          -a + k * std::log(a) + std::lgamma(a) - std::lgamma(a + d);
    }
    outer_alpha_ = grid[rng.categorical_log(log_weights)];
  }
  for (auto& [id, block] : blocks_) {
    block.infer_hypers(rng);
  }
}

void CrossCatState::full_sweep(RandomStream& rng) {
  gibbs_sweep_variables(rng);
  for (auto& [id, block] : blocks_) {
    block.gibbs_sweep_rows(rng);
  }
  infer_hypers(rng);
}

QueryCounts CrossCatState::counters() const {
  return {simulate_calls_.load(), logpdf_calls_.load()};
}

void CrossCatState::reset_counters() const {
  simulate_calls_.store(0);
  logpdf_calls_.store(0);
}

Ensemble::Ensemble(std::shared_ptr<const Dataset> data,
                   std::vector<CrossCatState> members,
                   EnsembleProvenance provenance)
    : data_(std::move(data)),
      members_(std::move(members)),
      provenance_(provenance) {
  if (members_.empty()) throw Error("ensemble needs at least one member");
}

void parallel_for(long n, int jobs, const std::function<void(long)>& f) {
  jobs = std::max(1, jobs);
  if (jobs == 1 || n <= 1) {
    for (long i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<long> next{0};
  std::vector<std::thread> workers;
  const int worker_count = static_cast<int>(std::min<long>(jobs, n));
  workers.reserve(static_cast<size_t>(worker_count));
  std::exception_ptr error;
  std::mutex error_mutex;
  for (int w = 0; w < worker_count; ++w) {
    workers.emplace_back([&]() {
      for (;;) {
        const long i = next.fetch_add(1);
        if (i >= n) return;
        try {
          f(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& worker : workers) worker.join();
  if (error) std::rethrow_exception(error);
}

Ensemble fit_ensemble(std::shared_ptr<const Dataset> data, int h, long sweeps,
                      uint64_t seed, int jobs) {
  if (h < 1) throw Error("ensemble size must be >= 1");
  if (sweeps < 0) throw Error("sweeps must be >= 0");
  if (data->row_count() == 0) throw EmptyDatasetError("dataset has no rows");
  auto grids = std::make_shared<const HyperGridSet>(compute_hyper_grids(*data));
  const EnsembleProvenance provenance{seed, sweeps, data->fingerprint()};
  std::vector<std::optional<CrossCatState>> members(static_cast<size_t>(h));
  RandomStream root(seed);
  parallel_for(h, jobs, [&](long i) {
    RandomStream chain = root.child(static_cast<uint64_t>(i));
    CrossCatState state = CrossCatState::from_prior(data, grids, chain);
    for (long s = 0; s < sweeps; ++s) state.full_sweep(chain);
    members[static_cast<size_t>(i)].emplace(std::move(state));
  });
  std::vector<CrossCatState> out;
  out.reserve(static_cast<size_t>(h));
  for (auto& m : members) out.push_back(std::move(*m));
  return Ensemble(std::move(data), std::move(out), provenance);
}

double dependence_probability_bound(const Ensemble& ensemble, int i, int j) {
  if (i == j) throw SameVariableError("dependence probability needs i != j");
  ensemble.schema().variable(i);
  ensemble.schema().variable(j);
  long together = 0;
  for (const CrossCatState& member : ensemble.members()) {
    if (member.block_of(i) == member.block_of(j)) ++together;
  }
  return static_cast<double>(together) /
         static_cast<double>(ensemble.size());
}

DependenceMatrix pairwise_dependence_matrix(const Ensemble& ensemble) {
  const size_t d = ensemble.schema().size();
  DependenceMatrix out;
  out.values.assign(d, std::vector<double>(d, 0.0));
  for (size_t i = 0; i < d; ++i) out.values[i][i] = 1.0;
  for (size_t i = 0; i < d; ++i) {
    for (size_t j = i + 1; j < d; ++j) {
      long together = 0;
      for (const CrossCatState& member : ensemble.members()) {
        ++out.comparisons;
        if (member.block_of(static_cast<int>(i)) ==
            member.block_of(static_cast<int>(j))) {
          ++together;
        }
      }
      const double p = static_cast<double>(together) /
                       static_cast<double>(ensemble.size());
      out.values[i][j] = p;
      out.values[j][i] = p;
    }
  }
  return out;
}

void write_dependence_matrix_csv(std::ostream& out, const Schema& schema,
                                 const DependenceMatrix& matrix) {
  char buf[64];
  out << "variable";
  for (size_t j = 0; j < schema.size(); ++j) {
    out << ',' << schema.variable(static_cast<int>(j)).name;
  }
  out << '\n';
  for (size_t i = 0; i < schema.size(); ++i) {
    out << schema.variable(static_cast<int>(i)).name;
    for (size_t j = 0; j < schema.size(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", matrix.values[i][j]);
      out << ',' << buf;
    }
    out << '\n';
  }
}

// --- JSON persistence ------------------------------------------------------

namespace {

using nlohmann::json;

json hypers_to_json(const Hypers& hypers) {
  if (const auto* num = std::get_if<NumericalHypers>(&hypers)) {
    return json{{"type", "numerical"},
                {"m", num->m},
                {"r", num->r},
                {"s", num->s},
                {"nu", num->nu}};
  }
  const auto& nom = std::get<NominalHypers>(hypers);
  return json{{"type", "nominal"}, {"beta", nom.beta}};
}

Hypers hypers_from_json(const json& j) {
  if (j.at("type") == "numerical") {
    NumericalHypers h;
    h.m = j.at("m");
    h.r = j.at("r");
    h.s = j.at("s");
    h.nu = j.at("nu");
    return h;
  }
  return NominalHypers{j.at("beta")};
}

json stats_to_json(const SuffStats& stats) {
  if (const auto* num = std::get_if<NumericalStats>(&stats)) {
    return json{{"n", num->n}, {"sum", num->sum}, {"sum_sq", num->sum_sq}};
  }
  return json{{"counts", std::get<NominalStats>(stats).counts}};
}

SuffStats stats_from_json(const json& j, const Variable& variable) {
  if (variable.is_nominal()) {
    NominalStats stats;
    stats.counts = j.at("counts").get<std::vector<int64_t>>();
    stats.n = 0;
    for (int64_t c : stats.counts) stats.n += c;
    if (stats.counts.size() != static_cast<size_t>(variable.category_count)) {
      throw SerializationError("category count mismatch in stats");
    }
    return stats;
  }
  NumericalStats stats;
  stats.n = j.at("n");
  stats.sum = j.at("sum");
  stats.sum_sq = j.at("sum_sq");
  return stats;
}

json block_to_json(int64_t id, const DpmmState& block) {
  json clusters = json::array();
  for (const auto& [cid, cluster] : block.clusters()) {
    json stats = json::array();
    for (const SuffStats& s : cluster.stats) stats.push_back(stats_to_json(s));
    clusters.push_back(json{
        {"id", cid}, {"count", cluster.count}, {"stats", std::move(stats)}});
  }
  json hypers = json::array();
  for (int v : block.variables()) {
    hypers.push_back(hypers_to_json(block.hypers_for(v)));
  }
  return json{{"id", id},
              {"alpha", block.alpha()},
              {"variables", block.variables()},
              {"assignments", block.assignments()},
              {"next_cluster_id", block.next_cluster_id()},
              {"hypers", std::move(hypers)},
              {"clusters", std::move(clusters)}};
}

}  // namespace

std::string crosscat_to_json(const CrossCatState& state) {
  json blocks = json::array();
  for (const auto& [id, block] : state.blocks()) {
    blocks.push_back(block_to_json(id, block));
  }
  const json doc{{"format_version", 1},
                 {"outer_alpha", state.outer_alpha()},
                 {"variable_blocks", state.variable_assignment()},
                 {"next_block_id", state.next_block_id()},
                 {"blocks", std::move(blocks)}};
  return doc.dump(2);
}

CrossCatState crosscat_from_json(const std::string& text,
                                 std::shared_ptr<const Dataset> data,
                                 std::shared_ptr<const HyperGridSet> grids) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw SerializationError(std::string("bad state json: ") + e.what());
  }
  if (doc.at("format_version") != 1) {
    throw SerializationError("unsupported state format version");
  }
  std::map<int64_t, DpmmState> blocks;
  for (const json& jb : doc.at("blocks")) {
    std::vector<int> variables = jb.at("variables").get<std::vector<int>>();
    std::vector<Hypers> hypers;
    for (const json& jh : jb.at("hypers")) hypers.push_back(hypers_from_json(jh));
    DpmmState block(data, variables, jb.at("alpha"),
                    jb.at("assignments").get<std::vector<int64_t>>(),
                    std::move(hypers), grids);
    block.set_next_cluster_id(jb.at("next_cluster_id"));
    // The constructor replayed rows to build statistics; install the stored
    // values verbatim so a reloaded state answers queries bit-exactly.
    // set_clusters cross-checks every count against the replay.
    std::map<int64_t, Cluster> stored;
    for (const json& jc : jb.at("clusters")) {
      Cluster cluster;
      cluster.count = jc.at("count");
      size_t d = 0;
      for (const json& js : jc.at("stats")) {
        cluster.stats.push_back(
            stats_from_json(js, data->schema().variable(variables.at(d))));
        ++d;
      }
      stored.emplace(jc.at("id").get<int64_t>(), std::move(cluster));
    }
    block.set_clusters(std::move(stored));
    blocks.emplace(jb.at("id").get<int64_t>(), std::move(block));
  }
  CrossCatState state(data, doc.at("outer_alpha"),
                      doc.at("variable_blocks").get<std::vector<int64_t>>(),
                      std::move(blocks), grids);
  state.next_block_id_ = doc.at("next_block_id");
  return state;
}

void save_ensemble(const Ensemble& ensemble, const std::string& directory) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(directory) / "members");
  json schema = json::array();
  for (const Variable& v : ensemble.schema().variables()) {
    json jv{{"name", v.name},
            {"type", v.is_nominal() ? "nominal" : "numerical"}};
    if (v.is_nominal()) {
      jv["categories"] = v.categories;
      jv["category_count"] = v.category_count;
    }
    schema.push_back(std::move(jv));
  }
  json members = json::array();
  char name[64];
  for (size_t i = 0; i < ensemble.size(); ++i) {
    std::snprintf(name, sizeof(name), "member_%04zu.json", i);
    members.push_back(std::string("members/") + name);
    std::ofstream out(fs::path(directory) / "members" / name);
    out << crosscat_to_json(ensemble.member(i)) << '\n';
    if (!out) throw SerializationError("cannot write member file");
  }
  char fingerprint[32];
  std::snprintf(fingerprint, sizeof(fingerprint), "%016llx",
                static_cast<unsigned long long>(
                    ensemble.provenance().dataset_fingerprint));
  const json manifest{{"format_version", 1},
                      {"h", ensemble.size()},
                      {"seed", ensemble.provenance().seed},
                      {"sweeps", ensemble.provenance().sweeps},
                      {"dataset_fingerprint", std::string(fingerprint)},
                      {"schema", std::move(schema)},
                      {"members", std::move(members)}};
  std::ofstream out(fs::path(directory) / "manifest.json");
  out << manifest.dump(2) << '\n';
  if (!out) throw SerializationError("cannot write manifest");
}

Ensemble load_ensemble(const std::string& directory,
                       std::shared_ptr<const Dataset> data) {
  namespace fs = std::filesystem;
  std::ifstream in(fs::path(directory) / "manifest.json");
  if (!in) throw SerializationError("cannot read manifest in " + directory);
  json manifest;
  try {
    manifest = json::parse(in);
  } catch (const json::exception& e) {
    throw SerializationError(std::string("bad manifest: ") + e.what());
  }
  char fingerprint[32];
  std::snprintf(fingerprint, sizeof(fingerprint), "%016llx",
                static_cast<unsigned long long>(data->fingerprint()));
  if (manifest.at("dataset_fingerprint") != std::string(fingerprint)) {
    throw SerializationError("dataset does not match the fitted ensemble");
  }
  auto grids = std::make_shared<const HyperGridSet>(compute_hyper_grids(*data));
  std::vector<CrossCatState> members;
  for (const json& jm : manifest.at("members")) {
    std::ifstream member_in(fs::path(directory) / jm.get<std::string>());
    if (!member_in) throw SerializationError("cannot read member file");
    std::stringstream buffer;
    buffer << member_in.rdbuf();
    members.push_back(crosscat_from_json(buffer.str(), data, grids));
  }
  EnsembleProvenance provenance;
  provenance.seed = manifest.at("seed");
  provenance.sweeps = manifest.at("sweeps");
  provenance.dataset_fingerprint = data->fingerprint();
  return Ensemble(std::move(data), std::move(members), provenance);
}

}  // namespace crossmi
