#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "dronho/radio_map.hpp"
#include "dronho/rng.hpp"
#include "dronho/trajectory.hpp"

namespace dronho {

struct HyperParams {
  double alpha = 0.5;
  double lambda = 0.3;
  double epsilon = 0.2;
  std::size_t episodes = 1000;
  double w_ho = 0.5;
  double w_rsrp = 0.5;
  std::size_t k = 3;
  /// false: greedy with probability epsilon, random otherwise (the
  /// published training loop). true: the usual convention, random with
  /// probability epsilon.
  bool conventional_epsilon_greedy = false;

  void validate() const;
};

/// Row i holds the k strongest cells at waypoint i, strongest first.
class CandidateTable {
public:
  CandidateTable() = default;
  CandidateTable(std::size_t k, std::vector<std::vector<RankedCell>> rows);

  std::size_t waypoints() const { return rows_.size(); }
  std::size_t k() const { return k_; }
  const RankedCell& at(std::size_t waypoint, std::size_t rank) const { return rows_[waypoint][rank]; }
  const std::vector<RankedCell>& row(std::size_t waypoint) const { return rows_[waypoint]; }

private:
  std::size_t k_ = 0;
  std::vector<std::vector<RankedCell>> rows_;
};

CandidateTable build_candidates(const RsrpGrid& grid, const Trajectory& trajectory, std::size_t k);

/// Dense (transitions x k x k) array indexed by (transition, from rank, to rank).
template <class Tag>
class Tensor3 {
public:
  Tensor3() = default;
  Tensor3(std::size_t transitions, std::size_t k, double fill = 0.0)
      : transitions_(transitions), k_(k), data_(transitions * k * k, fill) {}

  std::size_t transitions() const { return transitions_; }
  std::size_t k() const { return k_; }

  double& operator()(std::size_t i, std::size_t p, std::size_t q) { return data_[(i * k_ + p) * k_ + q]; }
  double operator()(std::size_t i, std::size_t p, std::size_t q) const {
    return data_[(i * k_ + p) * k_ + q];
  }

  /// Largest entry of row (i, p) and its lowest-index position.
  std::pair<std::size_t, double> row_max(std::size_t i, std::size_t p) const {
    const double* row = &data_[(i * k_ + p) * k_];
    std::size_t best = 0;
    for (std::size_t q = 1; q < k_; ++q)
      if (row[q] > row[best]) best = q;
    return {best, row[best]};
  }

  std::size_t flat_index(std::size_t i, std::size_t p, std::size_t q) const { return (i * k_ + p) * k_ + q; }
  const std::vector<double>& data() const { return data_; }
  bool operator==(const Tensor3&) const = default;

private:
  std::size_t transitions_ = 0;
  std::size_t k_ = 0;
  std::vector<double> data_;
};

struct RewardTag {};
struct QTag {};
struct HoTag {};
using RewardTensor = Tensor3<RewardTag>;
using QTable = Tensor3<QTag>;
/// Entry [i, p, q] is 1 when the p-th candidate at waypoint i and the q-th
/// candidate at waypoint i + 1 are different cells.
using HoIndicator = Tensor3<HoTag>;

struct RewardModel {
  RewardTensor reward;
  HoIndicator handover;
};

/// reward[i, p, q] = w_rsrp * norm RSRP of candidate q at waypoint i+1
///                   - w_ho * handover[i, p, q].
/// Throws DegenerateRouteError for fewer than two waypoints.
RewardModel build_reward(const CandidateTable& candidates, double w_ho, double w_rsrp);

QTable initial_qtable(const RewardTensor& reward);

/// One Q-learning step on entry (i, from, to). The bootstrap term uses the
/// best value of row (i + 1, to) and is zero on the last transition.
void q_update(QTable& q, const RewardTensor& reward, std::size_t i, std::size_t from, std::size_t to,
              double alpha, double lambda);

/// Runs hp.episodes epsilon-greedy sweeps along the route, updating q in place.
/// When visits is given it is resized to q's extent and counts updates per entry.
void train_episodes(QTable& q, const RewardTensor& reward, const HyperParams& hp, Rng& rng,
                    std::vector<std::size_t>* visits = nullptr);

/// Initializes Q to the reward tensor, then trains. Deterministic given seed.
QTable train(const RewardTensor& reward, const HyperParams& hp, std::uint64_t seed);

struct Policy {
  std::vector<std::size_t> ranks;
  std::vector<CellId> cells;
  std::vector<double> norm_rsrp;
  std::vector<double> raw_dbm;

  std::size_t size() const { return ranks.size(); }
  std::size_t handover_count() const;
  bool handover_at(std::size_t waypoint) const {
    return waypoint > 0 && cells[waypoint] != cells[waypoint - 1];
  }
};

Policy policy_from_ranks(const CandidateTable& candidates, std::vector<std::size_t> ranks);

/// Greedy rollout of q from rank 0 at the first waypoint.
Policy extract_policy(const QTable& q, const CandidateTable& candidates);
std::vector<std::size_t> greedy_ranks(const QTable& q);

/// Always the strongest cell.
Policy baseline_policy(const CandidateTable& candidates);

/// sum_i lambda^i reward[i, rank_i, rank_{i+1}].
double discounted_return(const RewardTensor& reward, const std::vector<std::size_t>& ranks,
                         double lambda);

struct DpSolution {
  std::vector<std::size_t> ranks;
  double optimal_return = 0.0;
  /// value[i][p]: best discounted return from rank p at waypoint i.
  std::vector<std::vector<double>> value;
  /// Q*[i, p, q] = reward[i, p, q] + lambda * value[i + 1][q].
  QTable q_star;
};

/// Backward induction over the deterministic route. Ties go to the lower rank.
DpSolution dp_optimal(const RewardTensor& reward, double lambda);

/// `transition,from_rank,to_rank,q_value`
void write_qtable_csv(std::ostream& out, const QTable& q);

/// `waypoint,x_m,y_m,cell_id,rank,norm_rsrp,raw_dbm,ho_flag`
void write_policy_csv(std::ostream& out, const Policy& policy, const Trajectory& trajectory);

}  // namespace dronho
