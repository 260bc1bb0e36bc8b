// Apache License, Version 2.0, refer to LICENSE.txt
//
// Dirichlet process mixture over a subset of dataset variables, collapsed
// over component parameters. One DpmmState is a single posterior sample:
// concentration, row assignments, and per-cluster sufficient statistics.

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <vector>

#include "crossmi/component.hh"
#include "crossmi/data.hh"
#include "crossmi/gpm.hh"
#include "crossmi/rng.hh"

namespace crossmi {

struct Cluster {
  int64_t count = 0;                // rows assigned
  std::vector<SuffStats> stats;     // per local variable, observed cells only
};

class DpmmState : public Gpm {
 public:
  // Explicit construction from a row partition. `variables` are global
  // schema indices; `hypers` runs parallel to them. Cluster ids are taken
  // from the assignment vector.
  DpmmState(std::shared_ptr<const Dataset> data, std::vector<int> variables,
            double alpha, std::vector<int64_t> assignments,
            std::vector<Hypers> hypers,
            std::shared_ptr<const HyperGridSet> grids);

  // Draws alpha ~ Gamma(1,1), assignments ~ CRP(alpha), hypers from the
  // prior grid weights.
  static DpmmState from_prior(std::shared_ptr<const Dataset> data,
                              std::vector<int> variables,
                              std::shared_ptr<const HyperGridSet> grids,
                              RandomStream& rng);

  // Gpm interface. Variables are global schema indices; every query or
  // condition variable must belong to this model.
  const Schema& schema() const override { return data_->schema(); }
  Values simulate(const VarSet& query, const Values& condition,
                  RandomStream& rng) const override;
  double logpdf(const Values& target, const Values& condition) const override;

  struct ClusterPosterior {
    std::vector<int64_t> ids;    // live cluster ids plus kFreshCluster last
    std::vector<double> probs;   // normalized, sums to 1
  };
  static constexpr int64_t kFreshCluster = -1;

  // Posterior over the latent cluster of one new row, given fixed values.
  // The fresh-cluster entry is weighted by alpha and uses prior predictives.
  ClusterPosterior cluster_posterior(const Values& condition_fixed) const;

  // One full collapsed Gibbs scan over rows with a single auxiliary fresh
  // cluster. Empty clusters are garbage-collected; ids are never reused.
  void gibbs_sweep_rows(RandomStream& rng);

  // Griddy Gibbs over the concentration and per-variable hyperparameter
  // grids, weighting grid points by marginal likelihood under the current
  // partition (times the Gamma(1,1) prior for alpha).
  void infer_hypers(RandomStream& rng);

  // Column membership, used by the variable-partition layer.
  void add_variable(int variable, Hypers hypers);
  Hypers remove_variable(int variable);
  // Log marginal likelihood of any dataset column under this state's row
  // partition; the column need not belong to the model.
  double column_logp(int variable, const Hypers& hypers) const;

  double alpha() const { return alpha_; }
  void set_alpha(double a) { alpha_ = a; }
  size_t row_count() const { return assignments_.size(); }
  const std::vector<int>& variables() const { return variables_; }
  const std::vector<int64_t>& assignments() const { return assignments_; }
  const std::map<int64_t, Cluster>& clusters() const { return clusters_; }
  const Hypers& hypers_for(int variable) const;
  void set_hypers(int variable, Hypers hypers);
  const std::shared_ptr<const Dataset>& data() const { return data_; }
  const std::shared_ptr<const HyperGridSet>& grids() const { return grids_; }
  int64_t next_cluster_id() const { return next_cluster_id_; }
  void set_next_cluster_id(int64_t id) { next_cluster_id_ = id; }

  // Recomputes all cluster statistics from the assignment vector; used by
  // tests and the deserializer to cross-check incremental updates.
  std::map<int64_t, Cluster> rebuild_clusters() const;

  // Replaces the cluster table, e.g. with deserialized statistics. Counts
  // must agree with the current assignments.
  void set_clusters(std::map<int64_t, Cluster> clusters);

 private:
  int local_index(int variable) const;  // -1 if absent
  int require_local(int variable) const;
  void incorporate_row(size_t row, int64_t cluster_id);
  void unincorporate_row(size_t row);
  double cluster_logp_of_values(const Cluster* cluster,
                                const Values& values) const;

  std::shared_ptr<const Dataset> data_;
  std::vector<int> variables_;  // sorted global indices
  double alpha_;
  std::vector<int64_t> assignments_;
  std::map<int64_t, Cluster> clusters_;
  std::vector<Hypers> hypers_;
  std::shared_ptr<const HyperGridSet> grids_;
  int64_t next_cluster_id_ = 0;
};

}  // namespace crossmi
