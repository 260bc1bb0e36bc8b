// Apache License, Version 2.0, refer to LICENSE.txt

#include "crossmi/dpmm.hh"

#include <algorithm>
#include <cassert>
#include <cmath>

#include "crossmi/mathutil.hh"

namespace crossmi {

DpmmState::DpmmState(std::shared_ptr<const Dataset> data,
                     std::vector<int> variables, double alpha,
                     std::vector<int64_t> assignments,
                     std::vector<Hypers> hypers,
                     std::shared_ptr<const HyperGridSet> grids)
    : data_(std::move(data)),
      variables_(std::move(variables)),
      alpha_(alpha),
      assignments_(std::move(assignments)),
      hypers_(std::move(hypers)),
      grids_(std::move(grids)) {
  if (alpha_ <= 0) throw Error("alpha must be positive");
  if (assignments_.size() != data_->row_count()) {
    throw Error("assignment length does not match dataset");
  }
  std::sort(variables_.begin(), variables_.end());
  for (int v : variables_) data_->schema().variable(v);
  if (hypers_.size() != variables_.size()) {
    throw Error("hypers length does not match variables");
  }
  for (size_t i = 0; i < assignments_.size(); ++i) {
    incorporate_row(i, assignments_[i]);
    next_cluster_id_ = std::max(next_cluster_id_, assignments_[i] + 1);
  }
}

DpmmState DpmmState::from_prior(std::shared_ptr<const Dataset> data,
                                std::vector<int> variables,
                                std::shared_ptr<const HyperGridSet> grids,
                                RandomStream& rng) {
  const double alpha = std::max(rng.gamma(1.0), 1e-6);
  std::vector<int64_t> assignments(data->row_count());
  std::vector<int64_t> sizes;
  for (size_t i = 0; i < assignments.size(); ++i) {
    std::vector<double> weights(sizes.size() + 1);
    for (size_t k = 0; k < sizes.size(); ++k) {
      weights[k] = static_cast<double>(sizes[k]);
    }
    weights.back() = alpha;
    const size_t k = rng.categorical(weights);
    if (k == sizes.size()) {
      sizes.push_back(1);
    } else {
      ++sizes[k];
    }
    assignments[i] = static_cast<int64_t>(k);
  }
  std::sort(variables.begin(), variables.end());
  std::vector<Hypers> hypers;
  hypers.reserve(variables.size());
  for (int v : variables) {
    hypers.push_back(
        sample_grid_hypers(grids->per_variable[static_cast<size_t>(v)], rng));
  }
  return DpmmState(std::move(data), std::move(variables), alpha,
                   std::move(assignments), std::move(hypers),
                   std::move(grids));
}

int DpmmState::local_index(int variable) const {
  auto it = std::lower_bound(variables_.begin(), variables_.end(), variable);
  if (it == variables_.end() || *it != variable) return -1;
  return static_cast<int>(it - variables_.begin());
}

int DpmmState::require_local(int variable) const {
  const int local = local_index(variable);
  if (local < 0) {
    throw UnknownVariableError("variable not in this model: " +
                               std::to_string(variable));
  }
  return local;
}

void DpmmState::incorporate_row(size_t row, int64_t cluster_id) {
  auto [it, inserted] = clusters_.try_emplace(cluster_id);
  Cluster& cluster = it->second;
  if (inserted) {
    cluster.stats.reserve(variables_.size());
    for (int v : variables_) {
      cluster.stats.push_back(empty_stats(data_->schema().variable(v)));
    }
  }
  ++cluster.count;
  for (size_t d = 0; d < variables_.size(); ++d) {
    const Cell& cell = data_->cell(row, variables_[d]);
    if (!cell.is_missing()) stats_add(cluster.stats[d], cell);
  }
  assignments_[row] = cluster_id;
}

void DpmmState::unincorporate_row(size_t row) {
  const int64_t id = assignments_[row];
  auto it = clusters_.find(id);
  assert(it != clusters_.end());
  Cluster& cluster = it->second;
  --cluster.count;
  for (size_t d = 0; d < variables_.size(); ++d) {
    const Cell& cell = data_->cell(row, variables_[d]);
    if (!cell.is_missing()) stats_remove(cluster.stats[d], cell);
  }
  if (cluster.count == 0) clusters_.erase(it);
}

double DpmmState::cluster_logp_of_values(const Cluster* cluster,
                                         const Values& values) const {
  double logp = 0.0;
  for (const auto& [variable, cell] : values) {
    const int local = require_local(variable);
    data_->schema().check_cell(variable, cell);
    if (cell.is_missing()) {
      throw TypeMismatchError("missing value in query");
    }
    if (cluster != nullptr) {
      logp += predictive_logp(hypers_[static_cast<size_t>(local)],
                              cluster->stats[static_cast<size_t>(local)], cell);
    } else {
      const SuffStats fresh =
          empty_stats(data_->schema().variable(variable));
      logp += predictive_logp(hypers_[static_cast<size_t>(local)], fresh, cell);
    }
  }
  return logp;
}

DpmmState::ClusterPosterior DpmmState::cluster_posterior(
    const Values& condition_fixed) const {
  ClusterPosterior out;
  std::vector<double> log_weights;
  for (const auto& [id, cluster] : clusters_) {
    out.ids.push_back(id);
    log_weights.push_back(std::log(static_cast<double>(cluster.count)) +
                          cluster_logp_of_values(&cluster, condition_fixed));
  }
  out.ids.push_back(kFreshCluster);
  log_weights.push_back(std::log(alpha_) +
                        cluster_logp_of_values(nullptr, condition_fixed));
  if (clusters_.empty()) {
    // No data: all mass on the fresh cluster regardless of alpha.
    out.probs = {1.0};
    return out;
  }
  const double lse = logsumexp(log_weights);
  out.probs.resize(log_weights.size());
  double total = 0.0;
  for (size_t i = 0; i < log_weights.size(); ++i) {
    out.probs[i] = std::exp(log_weights[i] - lse);
    total += out.probs[i];
  }
  for (double& p : out.probs) p /= total;
  return out;
}

Values DpmmState::simulate(const VarSet& query, const Values& condition,
                           RandomStream& rng) const {
  if (query.empty()) return {};
  if (!query.disjoint(keys_of(condition))) {
    throw OverlappingVarSetsError("query overlaps condition");
  }
  for (int v : query) require_local(v);
  const ClusterPosterior cp = cluster_posterior(condition);
  const size_t pick = rng.categorical(cp.probs);
  const int64_t id = cp.ids[pick];
  const Cluster* cluster =
      id == kFreshCluster ? nullptr : &clusters_.at(id);
  Values out;
  for (int v : query) {
    const int local = require_local(v);
    Cell cell;
    if (cluster != nullptr) {
      cell = predictive_sample(hypers_[static_cast<size_t>(local)],
                               cluster->stats[static_cast<size_t>(local)], rng);
    } else {
      const SuffStats fresh = empty_stats(data_->schema().variable(v));
      cell = predictive_sample(hypers_[static_cast<size_t>(local)], fresh, rng);
    }
    out.emplace(v, cell);
  }
  return out;
}

double DpmmState::logpdf(const Values& target, const Values& condition) const {
  if (target.empty()) throw Error("logpdf target must be non-empty");
  if (!keys_of(target).disjoint(keys_of(condition))) {
    throw OverlappingVarSetsError("target overlaps condition");
  }
  const ClusterPosterior cp = cluster_posterior(condition);
  std::vector<double> log_terms(cp.ids.size());
  for (size_t i = 0; i < cp.ids.size(); ++i) {
    const Cluster* cluster = cp.ids[i] == kFreshCluster
                                 ? nullptr
                                 : &clusters_.at(cp.ids[i]);
    log_terms[i] =
        std::log(cp.probs[i]) + cluster_logp_of_values(cluster, target);
  }
  return logsumexp(log_terms);
}

void DpmmState::gibbs_sweep_rows(RandomStream& rng) {
  const size_t n = assignments_.size();
  for (size_t row = 0; row < n; ++row) {
    unincorporate_row(row);
    std::vector<int64_t> ids;
    std::vector<double> log_weights;
    ids.reserve(clusters_.size() + 1);
    for (const auto& [id, cluster] : clusters_) {
      double lw = std::log(static_cast<double>(cluster.count));
      for (size_t d = 0; d < variables_.size(); ++d) {
        const Cell& cell = data_->cell(row, variables_[d]);
        if (cell.is_missing()) continue;
        lw += predictive_logp(hypers_[d], cluster.stats[d], cell);
      }
      ids.push_back(id);
      log_weights.push_back(lw);
    }
    double lw_fresh = std::log(alpha_);
    for (size_t d = 0; d < variables_.size(); ++d) {
      const Cell& cell = data_->cell(row, variables_[d]);
      if (cell.is_missing()) continue;
      const SuffStats fresh = empty_stats(data_->schema().variable(variables_[d]));
      lw_fresh += predictive_logp(hypers_[d], fresh, cell);
    }
    ids.push_back(kFreshCluster);
    log_weights.push_back(lw_fresh);

    const size_t pick = rng.categorical_log(log_weights);
    int64_t chosen = ids[pick];
    if (chosen == kFreshCluster) chosen = next_cluster_id_++;
    incorporate_row(row, chosen);
  }
}

void DpmmState::infer_hypers(RandomStream& rng) {
  // Concentration: Gamma(1,1) prior over the grid times the CRP likelihood
  // of the current partition. Cluster-size factorials are constant across
  // the grid and omitted.
  {
    const std::vector<double>& grid = grids_->alpha;
    const double n = static_cast<double>(assignments_.size());
    const double k = static_cast<double>(clusters_.size());
    std::vector<double> log_weights(grid.size());
    for (size_t g = 0; g < grid.size(); ++g) {
      const double a = grid[g];
      double lw = -a;  // log Gamma(1,1) density up to a constant
      if (!clusters_.empty()) {
        lw += k * std::log(a) + std::lgamma(a) - std::lgamma(a + n);
      }
      log_weights[g] = lw;
    }
    alpha_ = grid[rng.categorical_log(log_weights)];
  }

  for (size_t d = 0; d < variables_.size(); ++d) {
    const HyperGrid& grid =
        grids_->per_variable[static_cast<size_t>(variables_[d])];
    const auto column_ml = [&](const Hypers& candidate) {
      double total = 0.0;
      for (const auto& [id, cluster] : clusters_) {
        total += marginal_logp(candidate, cluster.stats[d]);
      }
      return total;
    };
    if (grid.type == StatType::kNominal) {
      NominalHypers h = std::get<NominalHypers>(hypers_[d]);
      std::vector<double> log_weights(grid.beta.size());
      for (size_t g = 0; g < grid.beta.size(); ++g) {
        log_weights[g] = column_ml(NominalHypers{grid.beta[g]});
      }
      h.beta = grid.beta[rng.categorical_log(log_weights)];
      hypers_[d] = h;
    } else {
      NumericalHypers h = std::get<NumericalHypers>(hypers_[d]);
      const auto resample_field = [&](const std::vector<double>& values,
                                      double NumericalHypers::* field) {
        std::vector<double> log_weights(values.size());
        NumericalHypers candidate = h;
        for (size_t g = 0; g < values.size(); ++g) {
          candidate.*field = values[g];
          log_weights[g] = column_ml(candidate);
        }
        h.*field = values[rng.categorical_log(log_weights)];
      };
      resample_field(grid.m, &NumericalHypers::m);
      resample_field(grid.r, &NumericalHypers::r);
      resample_field(grid.s, &NumericalHypers::s);
      resample_field(grid.nu, &NumericalHypers::nu);
      hypers_[d] = h;
    }
  }
}

void DpmmState::add_variable(int variable, Hypers hypers) {
  if (local_index(variable) >= 0) {
    throw Error("variable already in model: " + std::to_string(variable));
  }
  const Variable& var = data_->schema().variable(variable);
  auto it = std::lower_bound(variables_.begin(), variables_.end(), variable);
  const size_t pos = static_cast<size_t>(it - variables_.begin());
  variables_.insert(it, variable);
  hypers_.insert(hypers_.begin() + static_cast<long>(pos), std::move(hypers));
  for (auto& [id, cluster] : clusters_) {
    cluster.stats.insert(cluster.stats.begin() + static_cast<long>(pos),
                         empty_stats(var));
  }
  for (size_t row = 0; row < assignments_.size(); ++row) {
    const Cell& cell = data_->cell(row, variable);
    if (cell.is_missing()) continue;
    stats_add(clusters_.at(assignments_[row]).stats[pos], cell);
  }
}

Hypers DpmmState::remove_variable(int variable) {
  const int local = require_local(variable);
  const size_t pos = static_cast<size_t>(local);
  Hypers out = std::move(hypers_[pos]);
  variables_.erase(variables_.begin() + local);
  hypers_.erase(hypers_.begin() + local);
  for (auto& [id, cluster] : clusters_) {
    cluster.stats.erase(cluster.stats.begin() + local);
  }
  return out;
}

double DpmmState::column_logp(int variable, const Hypers& hypers) const {
  const Variable& var = data_->schema().variable(variable);
  std::map<int64_t, SuffStats> per_cluster;
  for (size_t row = 0; row < assignments_.size(); ++row) {
    const Cell& cell = data_->cell(row, variable);
    if (cell.is_missing()) continue;
    auto [it, inserted] =
        per_cluster.try_emplace(assignments_[row], empty_stats(var));
    stats_add(it->second, cell);
  }
  double total = 0.0;
  for (const auto& [id, stats] : per_cluster) {
    total += marginal_logp(hypers, stats);
  }
  return total;
}

const Hypers& DpmmState::hypers_for(int variable) const {
  return hypers_[static_cast<size_t>(require_local(variable))];
}

void DpmmState::set_hypers(int variable, Hypers hypers) {
  hypers_[static_cast<size_t>(require_local(variable))] = std::move(hypers);
}

void DpmmState::set_clusters(std::map<int64_t, Cluster> clusters) {
  const std::map<int64_t, Cluster> replayed = rebuild_clusters();
  if (clusters.size() != replayed.size()) {
    throw SerializationError("cluster set does not match assignments");
  }
  for (const auto& [id, cluster] : clusters) {
    auto it = replayed.find(id);
    if (it == replayed.end() || it->second.count != cluster.count ||
        cluster.stats.size() != variables_.size()) {
      throw SerializationError("cluster table does not match assignments");
    }
    for (size_t d = 0; d < cluster.stats.size(); ++d) {
      if (stats_count(cluster.stats[d]) != stats_count(it->second.stats[d])) {
        throw SerializationError("per-variable counts do not match replay");
      }
    }
  }
  clusters_ = std::move(clusters);
}

std::map<int64_t, Cluster> DpmmState::rebuild_clusters() const {
  std::map<int64_t, Cluster> out;
  for (size_t row = 0; row < assignments_.size(); ++row) {
    auto [it, inserted] = out.try_emplace(assignments_[row]);
    if (inserted) {
      for (int v : variables_) {
        it->second.stats.push_back(empty_stats(data_->schema().variable(v)));
      }
    }
    ++it->second.count;
    for (size_t d = 0; d < variables_.size(); ++d) {
      const Cell& cell = data_->cell(row, variables_[d]);
      if (!cell.is_missing()) stats_add(it->second.stats[d], cell);
    }
  }
  return out;
}

}  // namespace crossmi
