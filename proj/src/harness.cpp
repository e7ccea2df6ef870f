#include "conbandit/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace conbandit {

namespace {

VectorXd vec(std::initializer_list<double> xs) {
  VectorXd v(static_cast<int>(xs.size()));
  int i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

MatrixXd rows(std::initializer_list<std::initializer_list<double>> rs) {
  const int n = static_cast<int>(rs.size());
  const int k = static_cast<int>(rs.begin()->size());
  MatrixXd m(n, k);
  int i = 0;
  for (const auto& r : rs) {
    int j = 0;
    for (double x : r) m(i, j++) = x;
    ++i;
  }
  return m;
}

ScenarioSpec gaussianScenario(std::string name, std::string description,
                              VectorXd means, double sigma, MeanDomain domain,
                              MatrixXd B, VectorXd c, Scenario scenario,
                              double delta = 0.1, int num_seeds = 1000) {
  ScenarioSpec s;
  s.name = std::move(name);
  s.description = std::move(description);
  s.instance.means = std::move(means);
  s.instance.family = RewardFamily::gaussian(sigma);
  s.instance.domain = domain;
  s.polytope = FeasiblePolytope::fromConstraints(
      static_cast<int>(s.instance.means.size()), B, c);
  s.scenario = scenario;
  s.delta = delta;
  s.num_seeds = num_seeds;
  return s;
}

ScenarioSpec bernoulliScenario(std::string name, std::string description,
                               VectorXd means, MatrixXd B, VectorXd c,
                               Scenario scenario) {
  ScenarioSpec s;
  s.name = std::move(name);
  s.description = std::move(description);
  s.instance.means = std::move(means);
  s.instance.family = RewardFamily::bernoulli();
  s.instance.domain = MeanDomain{0.01, 0.99};
  s.polytope = FeasiblePolytope::fromConstraints(
      static_cast<int>(s.instance.means.size()), B, c);
  s.scenario = scenario;
  return s;
}

ScenarioSpec imdbScenario() {
  // 12 movies: mean rating, per-movie rating spread, and genre flags
  // (action, drama, family). The model treats every arm as Gaussian with the
  // largest spread (1.33); the environment samples with each movie's own.
  struct Movie {
    double mean, sigma;
    int action, drama, family;
  };
  const std::vector<Movie> movies = {
      {3.67, 1.26, 1, 1, 0}, {2.97, 1.30, 0, 0, 1}, {2.94, 1.31, 1, 0, 1},
      {3.52, 1.33, 1, 1, 0}, {3.18, 1.30, 0, 1, 0}, {2.02, 0.93, 0, 0, 0},
      {2.79, 1.22, 1, 0, 0}, {2.97, 1.31, 0, 1, 0}, {2.32, 1.14, 1, 0, 0},
      {2.53, 1.20, 0, 0, 0}, {2.55, 1.19, 0, 1, 0}, {2.54, 1.16, 0, 0, 0}};
  const int K = static_cast<int>(movies.size());

  ScenarioSpec s;
  s.name = "imdb";
  s.description =
      "12-arm Gaussian movie recommendation: at most 0.3 on action, at least "
      "0.3 on drama, at least 0.3 on family";
  s.instance.means.resize(K);
  s.env_sigmas.resize(K);
  MatrixXd B = MatrixXd::Zero(3, K);
  for (int a = 0; a < K; ++a) {
    s.instance.means[a] = movies[a].mean;
    s.env_sigmas[a] = movies[a].sigma;
    B(0, a) = movies[a].action;   //  sum_action pi <= 0.3
    B(1, a) = -movies[a].drama;   // -sum_drama  pi <= -0.3
    B(2, a) = -movies[a].family;  // -sum_family pi <= -0.3
  }
  s.instance.family = RewardFamily::gaussian(1.33);
  s.instance.domain = MeanDomain{1.0, 5.0};
  s.polytope = FeasiblePolytope::fromConstraints(K, B, vec({0.3, -0.3, -0.3}));
  s.scenario = Scenario::Anytime;
  return s;
}

std::vector<ScenarioSpec> catalog() {
  std::vector<ScenarioSpec> all;
  all.push_back(gaussianScenario(
      "fig3-triangle",
      "5 Gaussian arms (1, 0.5, 0.4, 0.4, 0.5), constraints pi1+pi2 <= 0.5 "
      "and pi3+pi4 <= 0.5: easy unconstrained, hard constrained",
      vec({1.0, 0.5, 0.4, 0.4, 0.5}), 1.0, {-2.0, 2.0},
      rows({{1, 1, 0, 0, 0}, {0, 0, 1, 1, 0}}), vec({0.5, 0.5}),
      Scenario::Anytime));
  all.push_back(gaussianScenario(
      "fig3-star",
      "5 Gaussian arms (1, 0.5, 0.4, 0.95, 0.8), constraints pi1+pi2 <= 0.5 "
      "and pi3+pi4 <= 0.5: hard unconstrained, easy constrained",
      vec({1.0, 0.5, 0.4, 0.95, 0.8}), 1.0, {-2.0, 2.0},
      rows({{1, 1, 0, 0, 0}, {0, 0, 1, 1, 0}}), vec({0.5, 0.5}),
      Scenario::Anytime));
  all.push_back(gaussianScenario(
      "fig5",
      "8 Gaussian arms, one constraint 7pi1+7pi2+pi3 <= 0.5; optimal policy "
      "pi3 = pi4 = 0.5; naive projection samplers struggle here",
      vec({1.0, 0.7, 0.3, 0.0, -0.5, -1.0, -2.0, -3.0}), 1.0, {-5.0, 2.0},
      rows({{7, 7, 1, 0, 0, 0, 0, 0}}), vec({0.5}), Scenario::EndOfTime));
  all.push_back(bernoulliScenario(
      "fig8-bernoulli",
      "7 Bernoulli arms (0.8..0.2), constraints pi1+pi2 <= 0.5 and "
      "pi3+pi4 <= 0.5; optimal policy pi1 = pi3 = 0.5",
      vec({0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2}),
      rows({{1, 1, 0, 0, 0, 0, 0}, {0, 0, 1, 1, 0, 0, 0}}), vec({0.5, 0.5}),
      Scenario::Anytime));
  all.push_back(bernoulliScenario(
      "fig9-bernoulli",
      "5 Bernoulli arms (0.8..0.4), constraints 4pi1-pi5 <= 1 and "
      "3pi2-pi4 <= 1; optimal policy (0.25, 0.33, 0.42)",
      vec({0.8, 0.7, 0.6, 0.5, 0.4}),
      rows({{4, 0, 0, 0, -1}, {0, 3, 0, -1, 0}}), vec({1.0, 1.0}),
      Scenario::Anytime));
  all.push_back(gaussianScenario(
      "fig10",
      "7 Gaussian arms, constraints 4pi1+pi2 <= 0.7 and pi2+2pi3 <= 0.5; "
      "optimal policy (0.05, 0.5, 0, 0.45, ...)",
      vec({2.0, 1.5, 1.45, 0.5, 0.3, -1.0, -1.0}), 1.0, {-3.0, 3.0},
      rows({{4, 1, 0, 0, 0, 0, 0}, {0, 1, 2, 0, 0, 0, 0}}), vec({0.7, 0.5}),
      Scenario::Anytime, 1e-4));
  all.push_back(gaussianScenario(
      "fig11",
      "6 Gaussian arms, constraints pi1-pi4-pi5-pi6 <= 0.3 and pi2 <= 0.7; "
      "optimal policy pi1 = 0.65, pi4 = 0.35",
      vec({1.0, 0.5, 0.4, 0.3, 0.2, 0.1}), 1.0, {-2.0, 2.0},
      rows({{1, 0, 0, -1, -1, -1}, {0, 1, 0, 0, 0, 0}}), vec({0.3, 0.7}),
      Scenario::Anytime, 1e-3));
  all.push_back(imdbScenario());
  return all;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> list_scenarios() {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& s : catalog()) out.emplace_back(s.name, s.description);
  return out;
}

ScenarioSpec builtin_scenario(const std::string& name) {
  auto all = catalog();
  for (auto& s : all) {
    if (s.name == name) return std::move(s);
  }
  std::ostringstream msg;
  msg << "unknown scenario '" << name << "'; available:";
  for (const auto& s : all) msg << " " << s.name;
  throw std::invalid_argument(msg.str());
}

ScenarioSpec scenario_from_json(const nlohmann::json& doc) {
  const ProblemSpec prob = problemFromJson(doc);
  ScenarioSpec s;
  s.name = doc.value("name", std::string("custom"));
  s.description = doc.value("description", std::string());
  s.instance = prob.instance;
  s.polytope = prob.polytope;
  s.scenario = prob.scenario;
  s.delta = doc.value("delta", 0.1);
  if (doc.contains("env_sigmas")) {
    const auto es = doc.at("env_sigmas").get<std::vector<double>>();
    s.env_sigmas = Eigen::Map<const VectorXd>(es.data(), es.size());
  }
  return s;
}

std::string csvHeader(int num_arms) {
  std::ostringstream os;
  os << "seed,sampler,scenario,tau,correct";
  for (int a = 0; a < num_arms; ++a) os << ",n_" << a;
  os << ",wall_time_ms";
  return os.str();
}

std::string csvRow(const RunRecord& record) {
  std::ostringstream os;
  os << record.seed << "," << record.sampler << ","
     << toString(record.scenario) << "," << record.tau << "," << record.correct;
  for (long n : record.counts) os << "," << n;
  os << "," << record.wall_ms;
  return os.str();
}

ExperimentSummary summarize(const ScenarioSpec& spec,
                            const std::vector<RunRecord>& records,
                            double characteristic_time,
                            const VectorXd& oracle_allocation) {
  ExperimentSummary sum;
  sum.scenario_name = spec.name;
  sum.scenario = spec.scenario;
  sum.delta = spec.delta;
  sum.characteristic_time = characteristic_time;
  sum.sample_lower_bound =
      characteristic_time * binary_kl(spec.delta, 1.0 - spec.delta);
  sum.oracle_allocation = oracle_allocation;

  for (SamplerKind kind : spec.samplers) {
    SamplerSummary ss;
    ss.sampler = toString(kind);
    std::vector<double> taus, walls;
    for (const auto& r : records) {
      if (r.sampler != ss.sampler) continue;
      ++ss.runs;
      if (r.correct == 0) ++ss.errors;
      if (r.correct == -1) ++ss.censored;
      taus.push_back(static_cast<double>(r.tau));
      walls.push_back(r.wall_ms);
    }
    if (ss.runs == 0) {
      sum.per_sampler.push_back(ss);
      continue;
    }
    const int decided = ss.runs - ss.censored;
    ss.error_rate = decided > 0 ? static_cast<double>(ss.errors) / decided : 0.0;
    double mean = 0.0;
    for (double t : taus) mean += t;
    mean /= taus.size();
    double var = 0.0;
    for (double t : taus) var += (t - mean) * (t - mean);
    ss.mean_tau = mean;
    ss.std_tau = taus.size() > 1 ? std::sqrt(var / (taus.size() - 1)) : 0.0;
    std::sort(taus.begin(), taus.end());
    auto quantile = [&](double q) {
      const size_t i = static_cast<size_t>(
          std::min<double>(taus.size() - 1, std::ceil(q * taus.size()) - 1));
      return taus[std::max<size_t>(i, 0)];
    };
    ss.q10 = quantile(0.10);
    ss.q50 = quantile(0.50);
    ss.q90 = quantile(0.90);
    double wall = 0.0;
    for (double w : walls) wall += w;
    ss.mean_wall_ms = wall / walls.size();
    sum.per_sampler.push_back(ss);
  }
  return sum;
}

ExperimentSummary run_experiment(const ScenarioSpec& spec,
                                 const std::string& out_dir, int jobs,
                                 std::vector<RunRecord>* records_out) {
  const auto oracle =
      solve_oracle_allocation(spec.instance, spec.polytope, spec.scenario);

  std::vector<RunConfig> configs;
  for (SamplerKind kind : spec.samplers) {
    for (int s = 0; s < spec.num_seeds; ++s) {
      RunConfig cfg;
      cfg.sampler = kind;
      cfg.stopping.delta = spec.delta;
      cfg.seed = spec.base_seed + static_cast<std::uint64_t>(s);
      cfg.step_cap = spec.step_cap;
      cfg.oracle_allocation = oracle.allocation.w;
      cfg.env_sigmas = spec.env_sigmas;
      configs.push_back(std::move(cfg));
    }
  }

  std::vector<RunRecord> records(configs.size());
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const size_t i = next.fetch_add(1);
      if (i >= configs.size()) return;
      records[i] =
          run_explorer(spec.instance, spec.polytope, spec.scenario, configs[i]);
    }
  };
  const int nthreads = std::max(1, jobs);
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  ExperimentSummary sum =
      summarize(spec, records, oracle.characteristic_time, oracle.allocation.w);

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::ofstream csv(out_dir + "/runs.csv");
    csv << csvHeader(spec.instance.numArms()) << "\n";
    for (const auto& r : records) csv << csvRow(r) << "\n";
    std::ofstream js(out_dir + "/summary.json");
    js << summaryToJson(sum).dump(2) << "\n";
  }
  if (records_out) *records_out = std::move(records);
  return sum;
}

nlohmann::json summaryToJson(const ExperimentSummary& summary) {
  nlohmann::json doc;
  doc["scenario"] = summary.scenario_name;
  doc["mode"] = toString(summary.scenario);
  doc["delta"] = summary.delta;
  doc["characteristic_time"] = summary.characteristic_time;
  doc["sample_lower_bound"] = summary.sample_lower_bound;
  doc["oracle_allocation"] = std::vector<double>(
      summary.oracle_allocation.begin(), summary.oracle_allocation.end());
  doc["samplers"] = nlohmann::json::array();
  for (const auto& ss : summary.per_sampler) {
    doc["samplers"].push_back({{"sampler", ss.sampler},
                               {"runs", ss.runs},
                               {"errors", ss.errors},
                               {"censored", ss.censored},
                               {"error_rate", ss.error_rate},
                               {"mean_tau", ss.mean_tau},
                               {"std_tau", ss.std_tau},
                               {"q10", ss.q10},
                               {"q50", ss.q50},
                               {"q90", ss.q90},
                               {"mean_wall_ms", ss.mean_wall_ms}});
  }
  return doc;
}

nlohmann::json sweep_grid(const ScenarioSpec& spec, const SweepSpec& sweep) {
  nlohmann::json doc;
  doc["arm_i"] = sweep.arm_i;
  doc["arm_j"] = sweep.arm_j;
  std::vector<double> vi, vj;
  for (int i = 0; i < sweep.steps_i; ++i) {
    vi.push_back(sweep.steps_i == 1 ? sweep.lo_i
                                    : sweep.lo_i + (sweep.hi_i - sweep.lo_i) *
                                                       i / (sweep.steps_i - 1));
  }
  for (int j = 0; j < sweep.steps_j; ++j) {
    vj.push_back(sweep.steps_j == 1 ? sweep.lo_j
                                    : sweep.lo_j + (sweep.hi_j - sweep.lo_j) *
                                                       j / (sweep.steps_j - 1));
  }
  doc["values_i"] = vi;
  doc["values_j"] = vj;
  doc["grid"] = nlohmann::json::array();

  SolveOptions opts;
  opts.max_iters = 4000;
  opts.rel_gap = 1e-3;
  for (double x : vi) {
    nlohmann::json row = nlohmann::json::array();
    for (double y : vj) {
      BanditInstance inst = spec.instance;
      inst.means[sweep.arm_i] = x;
      inst.means[sweep.arm_j] = y;
      try {
        const auto sol =
            solve_oracle_allocation(inst, spec.polytope, spec.scenario, opts);
        row.push_back(std::min(sol.characteristic_time, 1e6));
      } catch (const std::exception&) {
        row.push_back(nullptr);  // non-unique optimum (boundary cell)
      }
    }
    doc["grid"].push_back(std::move(row));
  }
  return doc;
}

}  // namespace conbandit
