#include "dronho/qlearn.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include "dronho/csv.hpp"
#include "dronho/errors.hpp"
#include "dronho/rng.hpp"

namespace dronho {

void HyperParams::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in (0, 1]");
  if (!(lambda >= 0.0 && lambda < 1.0)) throw ConfigError("lambda must lie in [0, 1)");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("epsilon must lie in [0, 1]");
  if (!(w_ho >= 0.0) || !(w_rsrp >= 0.0)) throw ConfigError("weights must be nonnegative");
  if (!(w_ho + w_rsrp > 0.0)) throw ConfigError("w_ho and w_rsrp cannot both be zero");
  if (k < 1) throw ConfigError("k must be at least 1");
}

CandidateTable::CandidateTable(std::size_t k, std::vector<std::vector<RankedCell>> rows)
    : k_(k), rows_(std::move(rows)) {
  for (const auto& r : rows_)
    if (r.size() != k_) throw std::invalid_argument("candidate row length differs from k");
}

CandidateTable build_candidates(const RsrpGrid& grid, const Trajectory& trajectory, std::size_t k) {
  std::vector<std::vector<RankedCell>> rows;
  rows.reserve(trajectory.size());
  for (const Position& p : trajectory.waypoints) rows.push_back(grid.top_k_cells(p, k));
  return CandidateTable(k, std::move(rows));
}

RewardModel build_reward(const CandidateTable& candidates, double w_ho, double w_rsrp) {
  const std::size_t l = candidates.waypoints();
  if (l < 2) throw DegenerateRouteError("a route needs at least two waypoints to make a handover decision");
  const std::size_t k = candidates.k();
  RewardModel m{RewardTensor(l - 1, k), HoIndicator(l - 1, k)};
  for (std::size_t i = 0; i + 1 < l; ++i)
    for (std::size_t p = 0; p < k; ++p)
      for (std::size_t q = 0; q < k; ++q) {
        double ho = candidates.at(i, p).cell != candidates.at(i + 1, q).cell ? 1.0 : 0.0;
        m.handover(i, p, q) = ho;
        m.reward(i, p, q) = w_rsrp * candidates.at(i + 1, q).norm - w_ho * ho;
      }
  return m;
}

QTable initial_qtable(const RewardTensor& reward) {
  QTable q(reward.transitions(), reward.k());
  for (std::size_t i = 0; i < reward.transitions(); ++i)
    for (std::size_t p = 0; p < reward.k(); ++p)
      for (std::size_t u = 0; u < reward.k(); ++u) q(i, p, u) = reward(i, p, u);
  return q;
}

void q_update(QTable& q, const RewardTensor& reward, std::size_t i, std::size_t from, std::size_t to,
              double alpha, double lambda) {
  double future = i + 1 < q.transitions() ? q.row_max(i + 1, to).second : 0.0;
  double& entry = q(i, from, to);
  entry = (1.0 - alpha) * entry + alpha * reward(i, from, to) + alpha * lambda * future;
}

void train_episodes(QTable& q, const RewardTensor& reward, const HyperParams& hp, Rng& rng,
                    std::vector<std::size_t>* visits) {
  const std::size_t k = q.k();
  if (visits) visits->assign(q.data().size(), 0);
  for (std::size_t episode = 0; episode < hp.episodes; ++episode) {
    std::size_t j = 0;
    for (std::size_t i = 0; i < q.transitions(); ++i) {
      bool greedy = hp.conventional_epsilon_greedy ? rng.uniform() >= hp.epsilon
                                                   : hp.epsilon > rng.uniform();
      std::size_t next = greedy ? q.row_max(i, j).first : rng.index(k);
      q_update(q, reward, i, j, next, hp.alpha, hp.lambda);
      if (visits) ++(*visits)[q.flat_index(i, j, next)];
      j = next;
    }
  }
}

QTable train(const RewardTensor& reward, const HyperParams& hp, std::uint64_t seed) {
  QTable q = initial_qtable(reward);
  Rng rng(seed);
  train_episodes(q, reward, hp, rng);
  return q;
}

std::size_t Policy::handover_count() const {
  std::size_t n = 0;
  for (std::size_t i = 1; i < cells.size(); ++i)
    if (cells[i] != cells[i - 1]) ++n;
  return n;
}

Policy policy_from_ranks(const CandidateTable& candidates, std::vector<std::size_t> ranks) {
  if (ranks.size() != candidates.waypoints())
    throw std::invalid_argument("rank sequence length differs from route length");
  Policy p;
  p.ranks = std::move(ranks);
  for (std::size_t i = 0; i < p.ranks.size(); ++i) {
    const RankedCell& c = candidates.at(i, p.ranks[i]);
    p.cells.push_back(c.cell);
    p.norm_rsrp.push_back(c.norm);
    p.raw_dbm.push_back(c.raw_dbm);
  }
  return p;
}

std::vector<std::size_t> greedy_ranks(const QTable& q) {
  std::vector<std::size_t> ranks{0};
  for (std::size_t i = 0; i < q.transitions(); ++i) ranks.push_back(q.row_max(i, ranks.back()).first);
  return ranks;
}

Policy extract_policy(const QTable& q, const CandidateTable& candidates) {
  if (candidates.waypoints() < 2) return baseline_policy(candidates);
  if (q.transitions() + 1 != candidates.waypoints() || q.k() != candidates.k())
    throw std::invalid_argument("Q-table shape does not match the candidate table");
  return policy_from_ranks(candidates, greedy_ranks(q));
}

Policy baseline_policy(const CandidateTable& candidates) {
  return policy_from_ranks(candidates, std::vector<std::size_t>(candidates.waypoints(), 0));
}

double discounted_return(const RewardTensor& reward, const std::vector<std::size_t>& ranks,
                         double lambda) {
  if (ranks.size() != reward.transitions() + 1)
    throw std::invalid_argument("rank sequence length differs from route length");
  double total = 0.0;
  double discount = 1.0;
  for (std::size_t i = 0; i < reward.transitions(); ++i) {
    total += discount * reward(i, ranks[i], ranks[i + 1]);
    discount *= lambda;
  }
  return total;
}

DpSolution dp_optimal(const RewardTensor& reward, double lambda) {
  const std::size_t n = reward.transitions();
  const std::size_t k = reward.k();
  DpSolution s;
  s.value.assign(n + 1, std::vector<double>(k, 0.0));
  s.q_star = QTable(n, k);
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t p = 0; p < k; ++p) {
      for (std::size_t q = 0; q < k; ++q)
        s.q_star(i, p, q) = reward(i, p, q) + lambda * s.value[i + 1][q];
      s.value[i][p] = s.q_star.row_max(i, p).second;
    }
  }
  s.ranks = n == 0 ? std::vector<std::size_t>{0} : greedy_ranks(s.q_star);
  s.optimal_return = s.value[0][0];
  return s;
}

void write_qtable_csv(std::ostream& out, const QTable& q) {
  out << "transition,from_rank,to_rank,q_value\n";
  for (std::size_t i = 0; i < q.transitions(); ++i)
    for (std::size_t p = 0; p < q.k(); ++p)
      for (std::size_t u = 0; u < q.k(); ++u)
        out << i << ',' << p << ',' << u << ',' << csv::format(q(i, p, u)) << '\n';
}

void write_policy_csv(std::ostream& out, const Policy& policy, const Trajectory& trajectory) {
  if (policy.size() != trajectory.size())
    throw std::invalid_argument("policy length differs from trajectory length");
  out << "waypoint,x_m,y_m,cell_id,rank,norm_rsrp,raw_dbm,ho_flag\n";
  for (std::size_t i = 0; i < policy.size(); ++i)
    out << i << ',' << csv::format(trajectory.waypoints[i].x) << ','
        << csv::format(trajectory.waypoints[i].y) << ',' << policy.cells[i].value << ','
        << policy.ranks[i] << ',' << csv::format(policy.norm_rsrp[i]) << ','
        << csv::format(policy.raw_dbm[i]) << ',' << (policy.handover_at(i) ? 1 : 0) << '\n';
}

}  // namespace dronho
