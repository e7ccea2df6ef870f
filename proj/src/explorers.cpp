#include "conbandit/explorers.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "conbandit/rng.hpp"

namespace conbandit {

namespace {
constexpr double kTieTol = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

const char* toString(SamplerKind k) {
  switch (k) {
    case SamplerKind::Ctns: return "ctns";
    case SamplerKind::Cge: return "cge";
    case SamplerKind::Uniform: return "uniform";
    case SamplerKind::Oracle: return "oracle";
    case SamplerKind::Ptns: return "ptns";
  }
  return "?";
}

SamplerKind samplerFromString(const std::string& name) {
  if (name == "ctns") return SamplerKind::Ctns;
  if (name == "cge") return SamplerKind::Cge;
  if (name == "uniform") return SamplerKind::Uniform;
  if (name == "oracle") return SamplerKind::Oracle;
  if (name == "ptns") return SamplerKind::Ptns;
  throw std::invalid_argument("unknown sampler: " + name);
}

double ExplorerState::epsilon() const {
  const double K = numArms();
  return 1.0 / (2.0 * std::sqrt(K * K + static_cast<double>(t)));
}

double cge_radius(long t, RadiusKind kind) {
  const double lt = std::log(std::max<long>(t, 2));
  if (kind == RadiusKind::LogT) return lt;
  return 3.0 * lt + std::log(lt);
}

double stopping_threshold(long t, int num_arms, const StoppingConfig& config) {
  if (config.threshold == ThresholdKind::Heuristic) {
    if (t < 3) return kInf;
    return std::log((1.0 + std::log(std::log(static_cast<double>(t)))) /
                    config.delta);
  }
  if (t < 2) return kInf;
  const double lt = std::log(static_cast<double>(t));
  return config.alpha * lt - std::log(config.delta) +
         num_arms * std::log(lt + 1.0);
}

double glr_statistic(const ExplorerState& state,
                     const FeasiblePolytope& polytope,
                     const RewardFamily& family, const MeanDomain& domain) {
  if (state.t < state.numArms() || state.counts.minCoeff() < 1) return 0.0;
  const VectorXd w = state.counts.cast<double>() / static_cast<double>(state.t);
  try {
    return static_cast<double>(state.t) *
           alt_value(w, state.empirical_means, polytope, family, domain,
                     /*tolerate_ties=*/true)
               .value;
  } catch (const std::runtime_error&) {
    return 0.0;  // transiently degenerate empirical optimum
  }
}

bool should_stop(const ExplorerState& state, const FeasiblePolytope& polytope,
                 const RewardFamily& family, const MeanDomain& domain,
                 const StoppingConfig& config) {
  return glr_statistic(state, polytope, family, domain) >
         stopping_threshold(state.t, state.numArms(), config);
}

namespace {

// Tracks the optimal vertex of a fixed polytope as the means drift: the
// cached vertex stays optimal while every neighbor gap is nonnegative, so the
// LP is re-solved only on a sign change.
class VertexTracker {
 public:
  explicit VertexTracker(const FeasiblePolytope& polytope)
      : polytope_(polytope) {}

  void refresh(const VectorXd& means) {
    if (valid_) {
      min_gap_ = kInf;
      for (const auto& nb : nbrs_->neighbors) {
        min_gap_ = std::min(min_gap_, means.dot(vertex_.pi - nb.vertex.pi));
      }
      if (min_gap_ >= 0.0) return;
    }
    vertex_ = solve_optimal_policy(means, polytope_);
    nbrs_ = &cache_.get(vertex_, polytope_);
    min_gap_ = kInf;
    for (const auto& nb : nbrs_->neighbors) {
      min_gap_ = std::min(min_gap_, means.dot(vertex_.pi - nb.vertex.pi));
    }
    valid_ = true;
  }

  bool tied() const { return min_gap_ <= kTieTol; }
  const VertexPolicy& vertex() const { return vertex_; }
  const NeighborSet& neighbors() const { return *nbrs_; }

 private:
  const FeasiblePolytope& polytope_;
  NeighborCache cache_;
  bool valid_ = false;
  VertexPolicy vertex_;
  const NeighborSet* nbrs_ = nullptr;
  double min_gap_ = 0.0;
};

class Runner {
 public:
  Runner(const BanditInstance& instance, const FeasiblePolytope& polytope,
         Scenario scenario, const RunConfig& config)
      : instance_(instance),
        polytope_(polytope),
        scenario_(scenario),
        config_(config),
        K_(instance.numArms()),
        tracker_(polytope),
        bai_polytope_(FeasiblePolytope::simplexOnly(instance.numArms())),
        bai_tracker_(bai_polytope_) {
    state_.counts.setZero(K_);
    state_.sums.setZero(K_);
    state_.empirical_means.setZero(K_);
    state_.cumulative_targets.setZero(K_);
    true_optimal_ = solve_optimal_policy(instance.means, polytope).pi;

    const bool tracking = config.sampler == SamplerKind::Ctns ||
                          config.sampler == SamplerKind::Cge ||
                          config.sampler == SamplerKind::Ptns;
    min_margin_ = tracking ? kInf : std::numeric_limits<double>::quiet_NaN();

    if (config.sampler == SamplerKind::Uniform) {
      const VectorXd u = VectorXd::Constant(K_, 1.0 / K_);
      fixed_allocation_ =
          scenario == Scenario::Anytime ? euclidean_project(u, polytope) : u;
    } else if (config.sampler == SamplerKind::Oracle) {
      if (config.oracle_allocation.size() == K_) {
        fixed_allocation_ = config.oracle_allocation;
      } else {
        fixed_allocation_ =
            solve_oracle_allocation(instance, polytope, scenario).allocation.w;
      }
    } else if (config.sampler == SamplerKind::Cge) {
      state_.adagrad_iterate =
          projectOntoPi(VectorXd::Constant(K_, 1.0 / K_), 1e-9);
      state_.adagrad_accum.setZero(K_);
    }
    prev_target_ = VectorXd::Constant(K_, 1.0 / K_);
    prev_bai_target_ = prev_target_;
  }

  RunRecord run() {
    const auto start = std::chrono::steady_clock::now();
    RunRecord rec;
    rec.seed = config_.seed;
    rec.sampler = toString(config_.sampler);
    rec.scenario = scenario_;

    bool censored = false;
    while (true) {
      if (state_.t >= K_) {
        tracker_.refresh(state_.empirical_means);
        const double stat = statistic();
        if (stat > stopping_threshold(state_.t, K_, config_.stopping)) {
          rec.final_statistic = stat;
          break;
        }
        if (state_.t >= config_.step_cap) {
          rec.final_statistic = stat;
          censored = true;
          break;
        }
      }
      pull(chooseArm());
      auditTrackingFloor();
    }

    rec.tau = state_.t;
    rec.recommended = solve_optimal_policy(
                          projection_onto_domain(state_.empirical_means,
                                                 instance_.domain),
                          polytope_)
                          .pi;
    rec.correct = censored ? -1
                  : ((rec.recommended - true_optimal_).lpNorm<Eigen::Infinity>() <=
                             1e-6
                         ? 1
                         : 0);
    rec.counts.assign(state_.counts.data(), state_.counts.data() + K_);
    rec.min_tracking_margin = min_margin_;
    rec.max_target_violation = max_violation_;
    rec.final_means = state_.empirical_means;
    rec.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - start)
                      .count();
    return rec;
  }

 private:
  // D(N/t, empirical means, F) * t using the cached vertex and neighbors.
  double statistic() const {
    if (state_.counts.minCoeff() < 1 || tracker_.tied()) return 0.0;
    const VectorXd w =
        state_.counts.cast<double>() / static_cast<double>(state_.t);
    double best = kInf;
    for (const auto& nb : tracker_.neighbors().neighbors) {
      const double v = project_neighbor(w, state_.empirical_means,
                                        tracker_.vertex(), nb.vertex,
                                        instance_.family, instance_.domain)
                           .value;
      best = std::min(best, v);
    }
    return static_cast<double>(state_.t) * best;
  }

  int chooseArm() {
    if (state_.t < K_) return static_cast<int>(state_.t);  // init phase
    switch (config_.sampler) {
      case SamplerKind::Uniform:
      case SamplerKind::Oracle:
        return sampleFrom(fixed_allocation_);
      case SamplerKind::Ctns:
        return trackingArm(ctnsTarget());
      case SamplerKind::Ptns:
        return trackingArm(ptnsTarget());
      case SamplerKind::Cge:
        return trackingArm(cgeTarget());
    }
    return 0;
  }

  // Re-solving the allocation game every round is wasteful: between solves
  // the empirical means barely move and C-tracking follows the cumulative
  // target anyway. Solve lazily -- when the optimal vertex changes or at
  // geometrically spaced times -- and reuse the warm target in between.
  bool solveDue(long& next_solve_t, std::vector<int>& last_basis,
                const VertexPolicy& vertex) const {
    if (state_.t >= next_solve_t || vertex.basis != last_basis) {
      last_basis = vertex.basis;
      return true;
    }
    return false;
  }

  void scheduleNextSolve(long& next_solve_t) {
    next_solve_t = state_.t + 1 + state_.t / 8;
  }

  VectorXd ctnsTarget() {
    if (!tracker_.tied() &&
        solveDue(next_solve_t_, last_solved_basis_, tracker_.vertex())) {
      BanditInstance emp = instance_;
      emp.means = state_.empirical_means;
      SolveOptions opts;
      opts.max_iters = config_.solver_round_cap;
      opts.min_iters = 50;
      opts.rel_gap = 1e-3;
      opts.warm_start = prev_target_;
      try {
        prev_target_ = solve_allocation_game(emp, polytope_, scenario_,
                                             tracker_.vertex(),
                                             tracker_.neighbors(), opts)
                           .allocation.w;
        scheduleNextSolve(next_solve_t_);
      } catch (const std::runtime_error&) {
        // tied / boundary empirical optimum: keep the previous target and
        // retry next round
        next_solve_t_ = state_.t + 1;
      }
    }
    return prev_target_;
  }

  VectorXd ptnsTarget() {
    // Solve the unconstrained identification game over the simplex, then
    // (Anytime) project the resulting target into F.
    bai_tracker_.refresh(state_.empirical_means);
    if (!bai_tracker_.tied() &&
        solveDue(next_bai_solve_t_, last_bai_basis_, bai_tracker_.vertex())) {
      BanditInstance emp = instance_;
      emp.means = state_.empirical_means;
      SolveOptions opts;
      opts.max_iters = config_.solver_round_cap;
      opts.min_iters = 50;
      opts.rel_gap = 1e-3;
      opts.warm_start = prev_bai_target_;
      try {
        prev_bai_target_ =
            solve_allocation_game(emp, bai_polytope_, Scenario::EndOfTime,
                                  bai_tracker_.vertex(),
                                  bai_tracker_.neighbors(), opts)
                .allocation.w;
        scheduleNextSolve(next_bai_solve_t_);
      } catch (const std::runtime_error&) {
        next_bai_solve_t_ = state_.t + 1;
      }
    }
    return prev_bai_target_;
  }

  VectorXd cgeTarget() {
    // Instance player's best response at the current allocation iterate.
    VectorXd lambda = state_.empirical_means;
    if (!tracker_.tied()) {
      double best = kInf;
      for (const auto& nb : tracker_.neighbors().neighbors) {
        ProjectionResult r = project_neighbor(
            state_.adagrad_iterate, state_.empirical_means, tracker_.vertex(),
            nb.vertex, instance_.family, instance_.domain);
        if (r.value < best) {
          best = r.value;
          lambda = std::move(r.lambda);
        }
      }
    }
    if (instance_.family.kind == FamilyKind::Bernoulli) {
      lambda = lambda.array().min(1.0 - 1e-9).max(1e-9);
    }

    // Optimistic per-arm gains from the confidence intervals of radius f(t).
    const double f = cge_radius(state_.t, config_.stopping.cge_radius);
    VectorXd gain(K_);
    for (int a = 0; a < K_; ++a) {
      const auto [alpha, beta] =
          confidence_interval(instance_.family, instance_.domain,
                              state_.empirical_means[a], state_.counts[a], f);
      gain[a] = std::max(f / static_cast<double>(state_.counts[a]),
                         std::max(kl(instance_.family, alpha, lambda[a]),
                                  kl(instance_.family, beta, lambda[a])));
    }

    // Projected AdaGrad ascent step on the linear gain.
    state_.adagrad_accum += gain.cwiseProduct(gain);
    const VectorXd step =
        gain.cwiseQuotient((state_.adagrad_accum.array() + 1e-12).sqrt().matrix());
    state_.adagrad_iterate =
        projectOntoPi(state_.adagrad_iterate + step, 1e-9);
    return state_.adagrad_iterate;
  }

  VectorXd projectOntoPi(const VectorXd& w, double floor) {
    const VectorXd lb = VectorXd::Constant(K_, floor);
    if (scenario_ == Scenario::EndOfTime) return project_to_simplex(w, lb);
    try {
      return euclidean_project(w, polytope_, lb);
    } catch (const std::runtime_error&) {
      return euclidean_project(w, polytope_);
    }
  }

  int trackingArm(const VectorXd& target) {
    const VectorXd floored = projectOntoPi(target, state_.epsilon());
    if (scenario_ == Scenario::Anytime) {
      max_violation_ =
          std::max(max_violation_, polytope_.maxViolation(floored));
    }
    state_.cumulative_targets += floored;
    int arm = 0;
    double best = kInf;
    for (int a = 0; a < K_; ++a) {
      const double deficit =
          static_cast<double>(state_.counts[a]) - state_.cumulative_targets[a];
      if (deficit < best) {
        best = deficit;
        arm = a;
      }
    }
    return arm;
  }

  int sampleFrom(const VectorXd& w) {
    const double u = rng::choice(config_.seed, state_.t) * w.sum();
    double acc = 0.0;
    for (int a = 0; a < K_; ++a) {
      acc += w[a];
      if (u <= acc) return a;
    }
    return K_ - 1;
  }

  void pull(int arm) {
    const std::uint64_t idx = static_cast<std::uint64_t>(state_.counts[arm]);
    double reward;
    if (config_.env_sigmas.size() == K_ &&
        instance_.family.kind == FamilyKind::Gaussian) {
      reward = rng::rewardWithSigma(instance_, config_.env_sigmas[arm],
                                    config_.seed, arm, idx);
    } else {
      reward = rng::reward(instance_, config_.seed, arm, idx);
    }
    state_.sums[arm] += reward;
    state_.counts[arm] += 1;
    state_.t += 1;
    state_.empirical_means[arm] = instance_.domain.clip(
        state_.sums[arm] / static_cast<double>(state_.counts[arm]));
  }

  void auditTrackingFloor() {
    if (std::isnan(min_margin_) || state_.t < K_) return;
    // C-tracking with floor eps_t = 1/(2 sqrt(K^2 + t)) guarantees
    // N_a(t) >= sqrt(t + K^2) - 2K for every arm.
    const double floor =
        std::sqrt(static_cast<double>(state_.t) + K_ * K_) - 2.0 * K_;
    min_margin_ = std::min(
        min_margin_, static_cast<double>(state_.counts.minCoeff()) - floor);
  }

  const BanditInstance& instance_;
  const FeasiblePolytope& polytope_;
  const Scenario scenario_;
  const RunConfig& config_;
  const int K_;

  ExplorerState state_;
  VertexTracker tracker_;
  FeasiblePolytope bai_polytope_;
  VertexTracker bai_tracker_;
  VectorXd true_optimal_;
  VectorXd fixed_allocation_;
  VectorXd prev_target_;
  VectorXd prev_bai_target_;
  long next_solve_t_ = 0;
  long next_bai_solve_t_ = 0;
  std::vector<int> last_solved_basis_;
  std::vector<int> last_bai_basis_;
  double min_margin_ = 0.0;
  double max_violation_ = 0.0;
};

}  // namespace

RunRecord run_explorer(const BanditInstance& instance,
                       const FeasiblePolytope& polytope, Scenario scenario,
                       const RunConfig& config) {
  Runner runner(instance, polytope, scenario, config);
  return runner.run();
}

}  // namespace conbandit
