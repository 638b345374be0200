#include "opiniongames/harness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <thread>

namespace opg {

ControlPolicy make_equilibrium_policy(std::vector<AgentSolveContext> ctx,
                                      HParams hp) {
  return [ctx = std::move(ctx), hp](int agent, double s, double x) {
    const AgentSolveContext& c = ctx.at(agent);
    GameState st;
    st.s = s;
    st.x_i = x;
    st.x_j = c.x_j;
    st.x0_i = c.x0;
    st.mean_opt = c.mean_opt;
    st.lambda = multiplier_eval(c.multiplier, s);
    return feedback_control(c.regime, st, hp, c.cp);
  };
}

namespace {

// Element-wise left + right, left (lower replica range) first.
void fuse_into(ReplicaBlock& left, const ReplicaBlock& right) {
  for (std::size_t k = 0; k < left.spread_sum.size(); ++k) {
    left.spread_sum[k] += right.spread_sum[k];
  }
  for (std::size_t a = 0; a < left.opinion_sum.size(); ++a) {
    for (std::size_t k = 0; k < left.opinion_sum[a].size(); ++k) {
      left.opinion_sum[a][k] += right.opinion_sum[a][k];
    }
    left.excursions[a] += right.excursions[a];
  }
  left.gap_pairs += right.gap_pairs;
  left.gap_passes += right.gap_passes;
  left.count *= 2;
}

// Inserts a block and fuses siblings bottom-up until none remain. The block
// list stays the canonical binary-counter decomposition of the replica set.
void absorb_block(std::vector<ReplicaBlock>& blocks, ReplicaBlock block) {
  for (;;) {
    const bool is_left = (block.start / block.count) % 2 == 0;
    const uint64_t sibling_start =
        is_left ? block.start + block.count : block.start - block.count;
    auto it = std::find_if(blocks.begin(), blocks.end(),
                           [&](const ReplicaBlock& b) {
                             return b.start == sibling_start &&
                                    b.count == block.count;
                           });
    if (it == blocks.end()) break;
    if (is_left) {
      fuse_into(block, *it);
    } else {
      ReplicaBlock left = std::move(*it);
      fuse_into(left, block);
      block = std::move(left);
    }
    blocks.erase(it);
  }
  const auto pos = std::lower_bound(
      blocks.begin(), blocks.end(), block.start,
      [](const ReplicaBlock& b, uint64_t start) { return b.start < start; });
  blocks.insert(pos, std::move(block));
}

}  // namespace

long EnsembleSummary::replicas() const {
  long total = 0;
  for (const auto& b : blocks) total += static_cast<long>(b.count);
  return total;
}

long EnsembleSummary::gap_pairs() const {
  long total = 0;
  for (const auto& b : blocks) total += b.gap_pairs;
  return total;
}

long EnsembleSummary::gap_passes() const {
  long total = 0;
  for (const auto& b : blocks) total += b.gap_passes;
  return total;
}

double EnsembleSummary::gap_pass_rate() const {
  const long pairs = gap_pairs();
  return pairs == 0 ? 1.0
                    : static_cast<double>(gap_passes()) /
                          static_cast<double>(pairs);
}

std::vector<long> EnsembleSummary::excursion_totals() const {
  std::vector<long> out(agents, 0);
  for (const auto& b : blocks) {
    for (int a = 0; a < agents; ++a) out[a] += b.excursions[a];
  }
  return out;
}

std::vector<double> EnsembleSummary::spread_mean() const {
  std::vector<double> out(static_cast<std::size_t>(grid.steps) + 1, 0.0);
  const long n = replicas();
  if (n == 0) return out;
  for (const auto& b : blocks) {  // blocks are sorted by start
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += b.spread_sum[k];
  }
  for (double& v : out) v /= static_cast<double>(n);
  return out;
}

std::vector<double> EnsembleSummary::spread_quantile(double q) const {
  const std::size_t T = static_cast<std::size_t>(grid.steps) + 1;
  std::vector<double> out(T, 0.0);
  if (spread_rows.empty()) return out;
  std::vector<std::size_t> order(spread_rows.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [this](std::size_t a, std::size_t b) {
    return spread_rows[a].first < spread_rows[b].first;
  });
  std::vector<double> column(order.size());
  for (std::size_t k = 0; k < T; ++k) {
    for (std::size_t i = 0; i < order.size(); ++i) {
      column[i] = spread_rows[order[i]].second[k];
    }
    std::sort(column.begin(), column.end());
    const auto n = static_cast<long>(column.size());
    long rank = static_cast<long>(std::ceil(q * n)) - 1;
    rank = std::clamp(rank, 0L, n - 1);
    out[k] = column[rank];
  }
  return out;
}

std::vector<std::vector<double>> EnsembleSummary::opinion_mean() const {
  const std::size_t T = static_cast<std::size_t>(grid.steps) + 1;
  std::vector<std::vector<double>> out(agents, std::vector<double>(T, 0.0));
  const long n = replicas();
  if (n == 0) return out;
  for (const auto& b : blocks) {
    for (int a = 0; a < agents; ++a) {
      for (std::size_t k = 0; k < T; ++k) out[a][k] += b.opinion_sum[a][k];
    }
  }
  for (auto& row : out) {
    for (double& v : row) v /= static_cast<double>(n);
  }
  return out;
}

EnsembleSummary merge(const EnsembleSummary& a, const EnsembleSummary& b) {
  if (a.blocks.empty()) return b;
  if (b.blocks.empty()) return a;
  if (a.agents != b.agents || a.grid.steps != b.grid.steps ||
      a.grid.t != b.grid.t) {
    fail(ErrorKind::GridMismatch, "merge: summaries from different runs");
  }
  EnsembleSummary out = a;
  for (const ReplicaBlock& block : b.blocks) {
    absorb_block(out.blocks, block);
  }
  out.spread_rows.insert(out.spread_rows.end(), b.spread_rows.begin(),
                         b.spread_rows.end());
  if (b.first_replica < out.first_replica) {
    out.first_replica = b.first_replica;
    out.first_path = b.first_path;
  }
  return out;
}

namespace {

struct UniformParams {
  double k = 0.0;
  double w = 0.0;
};

// The symmetric game assumes a complete graph with one stubbornness and one
// weight; anything else in the config is a contradiction worth an error.
UniformParams derive_uniform(const NetworkSpec& net) {
  UniformParams up;
  up.k = net.stubbornness.front();
  for (double k : net.stubbornness) {
    if (k != up.k) {
      fail(ErrorKind::Config,
           "network.stubbornness: full-consensus regime requires one common "
           "stubbornness value");
    }
  }
  const std::size_t expected =
      static_cast<std::size_t>(net.n) * static_cast<std::size_t>(net.n - 1);
  if (net.edges.size() != expected) {
    std::ostringstream msg;
    msg << "network.edges: full-consensus regime requires the complete "
           "directed graph ("
        << expected << " edges), got " << net.edges.size();
    fail(ErrorKind::Config, msg.str());
  }
  up.w = net.edges.front().weight;
  for (const Edge& e : net.edges) {
    if (e.weight != up.w) {
      fail(ErrorKind::Config,
           "network.edges: full-consensus regime requires one common weight");
    }
  }
  return up;
}

double edge_weight(const NetworkSpec& net, int from, int to) {
  for (const Edge& e : net.edges) {
    if (e.i == from && e.j == to) return e.weight;
  }
  return 0.0;
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0
                   : std::accumulate(v.begin(), v.end(), 0.0) /
                         static_cast<double>(v.size());
}

struct GapPair {
  int pos_i = 0;
  int pos_j = 0;
  std::function<double(double)> c1;
  double sigma = 0.0;
};

struct Plan {
  RegimeKind kind = RegimeKind::FullConsensus;
  std::vector<int> agent_ids;  // 1-based, ascending
  std::vector<double> x0;
  std::vector<AgentSolveContext> contexts;
  EquilibriumSolve eq;
  ControlPolicy policy;
  std::vector<GapPair> gap_pairs;

  FullConsensusDynamics fc;
  LeaderDynamics leader;
  FollowerDynamics followers;
  int leader_pos = -1;
  std::vector<int> follower_pos;
};

// Leader's own equilibrium: feedback control first (the control cubic does
// not depend on u), then the opinion cubic at that control; rational leaders
// take the maximum real root.
std::pair<double, double> solve_leader(const LeaderRegime& regime,
                                       const CoefficientParams& cp,
                                       const HParams& hp,
                                       const MultiplierModel& mult, double x0,
                                       double s0) {
  GameState st;
  st.s = s0;
  st.x_i = x0;
  st.x_j = mean_of(regime.x_tilde);
  st.x0_i = x0;
  st.mean_opt = mean_of(regime.x_tilde);
  st.lambda = multiplier_eval(mult, s0);
  const GameRegime gr = regime;
  const double phi = feedback_control(gr, st, hp, cp);
  st.u_i = phi;
  const double x_star = optimal_opinion(gr, st, hp, cp);
  return {x_star, phi};
}

std::pair<double, double> solve_follower(const FollowerRegime& regime,
                                         const CoefficientParams& cp,
                                         const HParams& hp,
                                         const MultiplierModel& mult, double x0,
                                         double s0) {
  GameState st;
  st.s = s0;
  st.x_i = x0;
  st.x_j = regime.x_bar1;
  st.x0_i = x0;
  st.mean_opt = regime.x_bar1;
  st.lambda = multiplier_eval(mult, s0);
  const GameRegime gr = regime;
  const double phi = feedback_control(gr, st, hp, cp);
  st.u_i = phi;
  const double x_star = optimal_opinion(gr, st, hp, cp);
  return {x_star, phi};
}

Plan build_plan(const ScenarioConfig& cfg) {
  Plan plan;
  plan.kind = cfg.regime.kind;
  const HParams& hp = cfg.h_params;
  const double s0 = cfg.solver.solve_time_or_default(cfg.grid.t);
  const int n = cfg.network.n;

  if (cfg.regime.kind == RegimeKind::FullConsensus) {
    const UniformParams up = derive_uniform(cfg.network);
    CoefficientParams cp;
    cp.k = up.k;
    cp.w = up.w;
    cp.n = n;
    cp.t = cfg.grid.t;
    FullConsensusRegime regime{cfg.regime.sigma};

    std::vector<MeanFieldAgent> agents(n);
    for (int i = 0; i < n; ++i) {
      agents[i] = {cfg.initial_opinions[i], cfg.multipliers[i]};
    }
    MeanFieldResult mf =
        mean_field_fixed_point(agents, regime, hp, cp, s0, cfg.solver.tol,
                               cfg.solver.max_iter);
    const double mean_star = mean_of(mf.x_star);

    plan.agent_ids.resize(n);
    std::iota(plan.agent_ids.begin(), plan.agent_ids.end(), 1);
    plan.x0 = cfg.initial_opinions;
    for (int i = 0; i < n; ++i) {
      plan.contexts.push_back({GameRegime{regime}, cp, cfg.multipliers[i],
                               cfg.initial_opinions[i], mean_star, mean_star});
    }
    plan.eq.agent_ids = plan.agent_ids;
    plan.eq.x_star = mf.x_star;
    plan.eq.phi_star = mf.control;
    plan.eq.mean_field_iterations = mf.iterations;
    plan.fc = FullConsensusDynamics{regime, cp, mf.x_star};
    for (int i = 0; i < n; ++i) {
      for (int jj = i + 1; jj < n; ++jj) {
        plan.gap_pairs.push_back(
            {i, jj, [cp](double s) { return gamma(s, cp); }, regime.sigma});
      }
    }
  } else {
    const int leader_id = *cfg.network.leader_id;
    const bool with_leader = cfg.regime.kind == RegimeKind::Leader;

    LeaderRegime leader_regime{cfg.regime.sigma1, cfg.regime.x_tilde};
    CoefficientParams leader_cp;
    leader_cp.k_1 = cfg.network.stubbornness[leader_id - 1];
    leader_cp.w_bar = cfg.regime.w_bar;
    leader_cp.n = n;
    leader_cp.t = cfg.grid.t;

    double x_bar1 = 0.0;
    double leader_phi = 0.0;
    if (with_leader) {
      auto [xs, phi] =
          solve_leader(leader_regime, leader_cp, hp,
                       cfg.multipliers[leader_id - 1],
                       cfg.initial_opinions[leader_id - 1], s0);
      x_bar1 = xs;
      leader_phi = phi;
    } else {
      x_bar1 = *cfg.regime.x_bar1;
    }
    plan.eq.x_bar1 = x_bar1;

    std::vector<int> follower_ids;
    for (int id = 1; id <= n; ++id) {
      if (id != leader_id) follower_ids.push_back(id);
    }

    plan.followers.regimes.reserve(follower_ids.size());
    plan.followers.cps.reserve(follower_ids.size());
    std::vector<double> follower_x0;
    std::vector<std::pair<double, double>> follower_solution;
    for (int id : follower_ids) {
      CoefficientParams cp;
      cp.k = cfg.network.stubbornness[id - 1];
      cp.w_i1 = edge_weight(cfg.network, id, leader_id);
      cp.n = n;
      cp.t = cfg.grid.t;
      if (!(cp.lambda_tilde() > 0.0)) {
        std::ostringstream msg;
        msg << "network: agent " << id << " has k + w_i1 = 0; the follower "
            << "coefficients are undefined";
        fail(ErrorKind::Config, msg.str());
      }
      FollowerRegime regime{cfg.regime.sigma, x_bar1,
                            cfg.solver.follower_drift_sign};
      follower_solution.push_back(solve_follower(
          regime, cp, hp, cfg.multipliers[id - 1],
          cfg.initial_opinions[id - 1], s0));
      plan.followers.regimes.push_back(regime);
      plan.followers.cps.push_back(cp);
      follower_x0.push_back(cfg.initial_opinions[id - 1]);
    }

    if (with_leader) {
      plan.agent_ids.resize(n);
      std::iota(plan.agent_ids.begin(), plan.agent_ids.end(), 1);
      plan.x0 = cfg.initial_opinions;
      plan.leader = LeaderDynamics{leader_regime, leader_cp};
      plan.leader_pos = leader_id - 1;
    } else {
      plan.agent_ids = follower_ids;
      plan.x0 = follower_x0;
    }

    plan.eq.agent_ids = plan.agent_ids;
    plan.eq.x_star.resize(plan.agent_ids.size());
    plan.eq.phi_star.resize(plan.agent_ids.size());
    plan.contexts.resize(plan.agent_ids.size());
    const double leader_mean = mean_of(leader_regime.x_tilde);
    std::size_t f_idx = 0;
    for (std::size_t pos = 0; pos < plan.agent_ids.size(); ++pos) {
      const int id = plan.agent_ids[pos];
      if (with_leader && id == leader_id) {
        plan.eq.x_star[pos] = x_bar1;
        plan.eq.phi_star[pos] = leader_phi;
        plan.contexts[pos] = {GameRegime{leader_regime}, leader_cp,
                              cfg.multipliers[id - 1],
                              cfg.initial_opinions[id - 1], leader_mean,
                              leader_mean};
      } else {
        plan.eq.x_star[pos] = follower_solution[f_idx].first;
        plan.eq.phi_star[pos] = follower_solution[f_idx].second;
        plan.contexts[pos] = {GameRegime{plan.followers.regimes[f_idx]},
                              plan.followers.cps[f_idx],
                              cfg.multipliers[id - 1],
                              cfg.initial_opinions[id - 1], x_bar1, x_bar1};
        plan.follower_pos.push_back(static_cast<int>(pos));
        ++f_idx;
      }
    }

    // Same-parameter follower pairs share the drift slope xi_hat + k/lt.
    for (std::size_t a = 0; a < plan.follower_pos.size(); ++a) {
      for (std::size_t b = a + 1; b < plan.follower_pos.size(); ++b) {
        const CoefficientParams& ca = plan.followers.cps[a];
        const CoefficientParams& cb = plan.followers.cps[b];
        if (ca.k == cb.k && ca.w_i1 == cb.w_i1) {
          plan.gap_pairs.push_back(
              {plan.follower_pos[a], plan.follower_pos[b],
               [ca](double s) {
                 return xi_hat(s, ca) + ca.k / ca.lambda_tilde();
               },
               cfg.regime.sigma});
        }
      }
    }
  }

  if (cfg.regime.control_policy == "zero") {
    plan.policy = zero_policy();
  } else {
    plan.policy = make_equilibrium_policy(plan.contexts, cfg.h_params);
  }
  return plan;
}

OpinionPath simulate_replica(const Plan& plan, const ScenarioConfig& cfg,
                             uint64_t replica) {
  const NoisePaths noise = NoisePaths::generate(
      cfg.monte_carlo.seed, replica, cfg.network.n, cfg.grid);
  std::vector<int> stream_index(plan.agent_ids.size());
  for (std::size_t pos = 0; pos < plan.agent_ids.size(); ++pos) {
    stream_index[pos] = plan.agent_ids[pos] - 1;
  }

  if (plan.kind == RegimeKind::FullConsensus) {
    return simulate_full_consensus(plan.fc, plan.policy, plan.x0, cfg.grid,
                                   noise.select(stream_index));
  }

  std::vector<int> follower_streams;
  std::vector<double> follower_x0;
  for (int pos : plan.follower_pos) {
    follower_streams.push_back(plan.agent_ids[pos] - 1);
    follower_x0.push_back(plan.x0[pos]);
  }
  const ControlPolicy& global = plan.policy;
  const std::vector<int>& fpos = plan.follower_pos;
  ControlPolicy follower_policy = [&global, &fpos](int local, double s,
                                                   double x) {
    return global(fpos[local], s, x);
  };
  OpinionPath fpath =
      simulate_followers(plan.followers, follower_policy, follower_x0,
                         cfg.grid, noise.select(follower_streams));

  if (plan.kind == RegimeKind::Follower) return fpath;

  const int lpos = plan.leader_pos;
  ControlPolicy leader_policy = [&global, lpos](int, double s, double x) {
    return global(lpos, s, x);
  };
  OpinionPath lpath =
      simulate_leader(plan.leader, leader_policy, plan.x0[lpos], cfg.grid,
                      noise.select({plan.agent_ids[lpos] - 1}));

  OpinionPath out;
  out.grid = cfg.grid;
  out.regime = PathRegime::Leader;
  const std::size_t n = plan.agent_ids.size();
  out.opinions.resize(n);
  out.controls.resize(n);
  out.increments.resize(n);
  out.excursions.assign(n, 0);
  std::size_t f_idx = 0;
  for (std::size_t pos = 0; pos < n; ++pos) {
    if (static_cast<int>(pos) == lpos) {
      out.opinions[pos] = std::move(lpath.opinions[0]);
      out.controls[pos] = std::move(lpath.controls[0]);
      out.increments[pos] = std::move(lpath.increments[0]);
      out.excursions[pos] = lpath.excursions[0];
    } else {
      out.opinions[pos] = std::move(fpath.opinions[f_idx]);
      out.controls[pos] = std::move(fpath.controls[f_idx]);
      out.increments[pos] = std::move(fpath.increments[f_idx]);
      out.excursions[pos] = fpath.excursions[f_idx];
      ++f_idx;
    }
  }
  return out;
}

EnsembleSummary summarize_replica(const Plan& plan, const ScenarioConfig& cfg,
                                  uint64_t replica, const OpinionPath& path) {
  EnsembleSummary s;
  s.grid = cfg.grid;
  s.agents = path.agents();
  s.agent_ids = plan.agent_ids;
  const int T = cfg.grid.steps + 1;

  ReplicaBlock block;
  block.start = replica;
  block.count = 1;
  block.spread_sum.assign(T, 0.0);
  block.opinion_sum.assign(s.agents, std::vector<double>(T, 0.0));
  block.excursions.assign(s.agents, 0);
  for (int k = 0; k < T; ++k) {
    double lo = path.opinions[0][k];
    double hi = lo;
    for (int a = 0; a < s.agents; ++a) {
      const double v = path.opinions[a][k];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      block.opinion_sum[a][k] = v;
    }
    block.spread_sum[k] = hi - lo;
  }
  s.spread_rows.emplace_back(replica, block.spread_sum);
  for (int a = 0; a < s.agents; ++a) {
    block.excursions[a] = path.excursions[a];
  }
  for (const GapPair& pair : plan.gap_pairs) {
    const BoundReport report =
        opinion_gap_bound_check(path, pair.pos_i, pair.pos_j, pair.c1,
                                pair.sigma);
    ++block.gap_pairs;
    if (report.pass) ++block.gap_passes;
  }
  s.blocks.push_back(std::move(block));
  s.x_star = plan.eq.x_star;
  s.phi_star = plan.eq.phi_star;
  s.first_replica = replica;
  s.first_path = path;
  return s;
}

}  // namespace

EquilibriumSolve solve_equilibrium(const ScenarioConfig& cfg) {
  return build_plan(cfg).eq;
}

EnsembleSummary run_scenario(const ScenarioConfig& cfg) {
  const Plan plan = build_plan(cfg);
  const uint64_t first = cfg.monte_carlo.replica_offset;
  const uint64_t count = cfg.monte_carlo.replicas;

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned workers =
      std::min<unsigned>(8u, std::min<uint64_t>(hw, count));

  std::vector<EnsembleSummary> partial(workers);
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        const uint64_t lo = first + count * w / workers;
        const uint64_t hi = first + count * (w + 1) / workers;
        EnsembleSummary acc;
        for (uint64_t r = lo; r < hi; ++r) {
          const OpinionPath path = simulate_replica(plan, cfg, r);
          acc = merge(acc, summarize_replica(plan, cfg, r, path));
        }
        partial[w] = std::move(acc);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }

  EnsembleSummary out;
  for (auto& p : partial) out = merge(out, p);
  return out;
}

}  // namespace opg
