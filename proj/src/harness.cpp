#include "rangemon/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <thread>

#include "rangemon/errors.hpp"
#include "rangemon/measurement.hpp"
#include "rangemon/rng.hpp"
#include "rangemon/runtime.hpp"
#include "rangemon/sim_world.hpp"

namespace rangemon {
namespace {

constexpr const char* kToolVersion = "0.1.0";

// JSON has no inf/nan literals; keep them readable instead of null.
nlohmann::ordered_json json_number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

Eigen::VectorXd reconstruction_error(const BlockVec& x_true, const BlockVec& x_recon) {
  if (!x_true.same_layout(x_recon))
    throw ShapeError("reconstruction_error: layout mismatch between truth and reconstruction");
  const int n = x_true.layout_ptr()->num_blocks();
  Eigen::VectorXd out(n);
  for (int i = 0; i < n; ++i) out[i] = (x_true.block(i) - x_recon.block(i)).norm();
  return out;
}

double TrialMetrics::final_precision() const {
  if (confirmed.empty()) return 1.0;
  const auto& det = confirmed.back();
  const auto& truth = attacked.back();
  if (det.empty()) return 1.0;
  int hit = 0;
  for (int r : det)
    if (truth.count(r)) ++hit;
  return static_cast<double>(hit) / static_cast<double>(det.size());
}

double TrialMetrics::final_recall() const {
  if (attacked.empty() || attacked.back().empty()) return 1.0;
  const auto& det = confirmed.empty() ? std::set<int>{} : confirmed.back();
  int hit = 0;
  for (int r : attacked.back())
    if (det.count(r)) ++hit;
  return static_cast<double>(hit) / static_cast<double>(attacked.back().size());
}

TrialMetrics run_trial(const ResolvedScenario& scenario, std::uint64_t trial_seed) {
  const ScenarioConfig& cfg = scenario.cfg;
  const int n = cfg.n_agents;
  const int steps = cfg.steps;

  SolverConfig solver_cfg = cfg.solver;
  solver_cfg.epsilon = scenario.epsilon;

  SimWorld world(cfg.mode, scenario.formation, scenario.model, cfg.noise, scenario.attacks,
                 trial_seed);
  const SwarmGraph* graph = &scenario.schedule.graph_at(0);
  SwarmRuntime runtime(*graph, scenario.layout, scenario.pos_dim, 0, solver_cfg);
  RangeModel range_model(*graph, scenario.layout, scenario.pos_dim, 0);
  RngStream omega_rng(trial_seed, 0xfffffffeu, "omega");
  DetectionConfirmer confirmer(n, cfg.detection.confirm_steps);

  TrialMetrics m;
  m.steps = steps;
  m.n_robots = n;
  m.seed = trial_seed;
  m.epsilon = scenario.epsilon;
  m.first_injection_norm = scenario.attacks.first_injection_norm();
  m.mean_rmse.reserve(steps);
  m.robot_rmse = Eigen::MatrixXd::Zero(n, steps);
  m.robot_chi = Eigen::MatrixXd::Zero(n, steps);

  const double diverge_at = m.first_injection_norm > 0
                                ? 10.0 * m.first_injection_norm
                                : std::numeric_limits<double>::infinity();

  // Last recorded row, repeated verbatim once the trial diverges.
  double row_mean = 0.0, row_std = 0.0, row_chi = 0.0;
  int row_detected = 0;
  char row_alarm = 0;
  Eigen::VectorXd row_robot_rmse = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd row_robot_chi = Eigen::VectorXd::Zero(n);
  std::set<int> row_confirmed;
  bool frozen = false;

  auto push_row = [&](int k) {
    m.mean_rmse.push_back(row_mean);
    m.std_rmse.push_back(row_std);
    m.chi.push_back(row_chi);
    m.n_detected.push_back(row_detected);
    m.swarm_alarm.push_back(row_alarm);
    m.robot_rmse.col(k) = row_robot_rmse;
    m.robot_chi.col(k) = row_robot_chi;
    m.confirmed.push_back(row_confirmed);
  };
  auto mark_diverged = [&](int k) {
    if (!m.diverged) {
      m.diverged = true;
      m.diverged_at_step = k;
    }
    frozen = true;
  };

  for (int k = 0; k < steps; ++k) {
    m.attacked.push_back(
        scenario.attacks.active_faults(k, scenario.layout, scenario.pos_dim, 0).targets);
    if (frozen) {
      push_row(k);
      continue;
    }
    try {
      if (k > 0 && scenario.schedule.changes_at(k)) {
        graph = &scenario.schedule.graph_at(k);
        runtime.set_graph(*graph);
        range_model = RangeModel(*graph, scenario.layout, scenario.pos_dim, 0);
      }
      world.advance(k, *graph);
      const Eigen::VectorXd y = emulate_ranges(range_model, world.p(), cfg.noise, omega_rng);
      BlockVec x_bar(scenario.layout);
      for (int r = 0; r < solver_cfg.scp_rounds_per_step; ++r)
        x_bar = runtime.outer_round(world.p_hat(), y);

      const Eigen::VectorXd err = reconstruction_error(world.x_true(), x_bar);
      const bool finite = all_finite(x_bar) && err.allFinite();
      if (finite) {
        const IntegrityReport report = evaluate(x_bar, scenario.epsilon, k);
        row_confirmed = confirmer.update(report);
        row_mean = err.mean();
        row_std = std::sqrt(std::max(
            0.0, err.array().square().mean() - err.mean() * err.mean()));
        row_chi = report.chi;
        row_detected = static_cast<int>(row_confirmed.size());
        row_alarm = report.swarm_alarm ? 1 : 0;
        row_robot_rmse = err;
        for (int i = 0; i < n; ++i) row_robot_chi[i] = report.chi_i[static_cast<std::size_t>(i)];
        if (row_mean > diverge_at) mark_diverged(k);
      } else {
        mark_diverged(k);  // freeze on the previous row; this one is garbage
      }
      push_row(k);
    } catch (const DegenerateGeometryError&) {
      // Linearization points collapsed — only happens when the accumulated
      // reconstruction has already blown up.
      mark_diverged(k);
      push_row(k);
    } catch (const Error&) {
      const BlockVec snapshot = runtime.x_bar_snapshot();
      const bool blown =
          !all_finite(snapshot) || snapshot.data().cwiseAbs().maxCoeff() > 1e6;
      if (!blown) throw;
      mark_diverged(k);
      push_row(k);
    }
  }

  // First-confirmation latency per ever-attacked robot.
  for (const auto& phase : scenario.attacks.phases()) {
    for (int r : phase.targets) {
      if (m.detection_latency.count(r)) continue;
      int first_start = steps;
      for (const auto& p2 : scenario.attacks.phases())
        if (std::count(p2.targets.begin(), p2.targets.end(), r))
          first_start = std::min(first_start, p2.start_step);
      int latency = -1;
      for (int k = first_start; k < steps && k >= 0; ++k) {
        if (k < static_cast<int>(m.confirmed.size()) && m.confirmed[k].count(r)) {
          latency = k - first_start;
          break;
        }
      }
      m.detection_latency[r] = latency;
    }
  }

  m.solver_seconds = runtime.solver_seconds();
  m.outer_rounds = runtime.outer_rounds_run();
  return m;
}

// ---------------------------------------------------------------------------
// Centralized reference

CentralizedSolver::CentralizedSolver(const SwarmGraph& graph, LayoutPtr layout, int pos_dim,
                                     int pos_offset, const SolverConfig& cfg)
    : graph_(graph),
      layout_(std::move(layout)),
      pos_dim_(pos_dim),
      pos_offset_(pos_offset),
      cfg_(cfg),
      x_bar_(layout_) {
  cfg_.validate();
  if (layout_->num_blocks() != graph_.num_vertices())
    throw ShapeError("CentralizedSolver: layout does not match the graph");
  const int n = graph_.num_vertices();
  w_.resize(n);
  mu_.resize(n);
  lambda_.resize(n);
  cold_flag_.assign(n, false);
  for (int i = 0; i < n; ++i) {
    const auto& nbs = graph_.neighbors(i);
    w_[i].resize(nbs.size());
    mu_[i].resize(nbs.size());
    for (std::size_t o = 0; o < nbs.size(); ++o) {
      w_[i][o] = Eigen::VectorXd::Zero(layout_->block_dim(nbs[o]));
      mu_[i][o] = Eigen::VectorXd::Zero(layout_->block_dim(i));
    }
    lambda_[i].assign(graph_.incident_edges(i).size(), 0.0);
  }
}

BlockVec CentralizedSolver::outer_round(const BlockVec& p_hat, const Eigen::VectorXd& y_hat) {
  if (!p_hat.same_layout(x_bar_)) throw ShapeError("CentralizedSolver: p_hat layout mismatch");
  if (y_hat.size() != graph_.num_edges())
    throw ShapeError("CentralizedSolver: expected one measured range per edge");
  const int n = graph_.num_vertices();
  const auto pos = [&](const auto& v) { return v.segment(pos_offset_, pos_dim_); };
  const auto ordinal_of = [&](int node, int nb) {
    const auto& nbs = graph_.neighbors(node);
    return static_cast<int>(std::lower_bound(nbs.begin(), nbs.end(), nb) - nbs.begin());
  };

  // Per-node linearization, matching the node-local arithmetic bit for bit.
  std::vector<std::vector<Eigen::VectorXd>> dir(n);
  std::vector<std::vector<double>> z(n);
  std::vector<std::vector<double>> sign(n);
  std::vector<std::vector<int>> edge_ord(n);  // neighbor ordinal per incident edge
  for (int i = 0; i < n; ++i) {
    const auto& incident = graph_.incident_edges(i);
    const Eigen::VectorXd own_point =
        pos(p_hat.block(i)).eval() + pos(x_bar_.block(i)).eval();
    for (int eid : incident) {
      const auto& [ea, eb] = graph_.edge(eid);
      const int j = ea == i ? eb : ea;
      const double s = ea == i ? 1.0 : -1.0;
      const Eigen::VectorXd nb_point =
          pos(p_hat.block(j)).eval() + pos(x_bar_.block(j)).eval();
      Eigen::VectorXd diff = s > 0 ? (own_point - nb_point).eval() : (nb_point - own_point).eval();
      const double dist = diff.norm();
      if (dist < cfg_.delta_min)
        throw DegenerateGeometryError("range gradient undefined on edge " + std::to_string(eid) +
                                      ": robots " + std::to_string(i) + " and " +
                                      std::to_string(j) + " are closer than " +
                                      std::to_string(cfg_.delta_min));
      dir[i].push_back(diff / dist);
      z[i].push_back(y_hat[eid] - dist);
      sign[i].push_back(s);
      edge_ord[i].push_back(ordinal_of(i, j));
    }
  }

  // Per-round x-quadratics, eigendecomposed once like the node cache.
  std::vector<Eigen::VectorXd> q_vals(n);
  std::vector<Eigen::MatrixXd> q_vecs(n);
  for (int i = 0; i < n; ++i) {
    const int dim = layout_->block_dim(i);
    const int deg = static_cast<int>(graph_.neighbors(i).size());
    Eigen::MatrixXd pos_part = Eigen::MatrixXd::Zero(pos_dim_, pos_dim_);
    for (const auto& d : dir[i]) pos_part += d * d.transpose();
    Eigen::MatrixXd Q = static_cast<double>(deg) * Eigen::MatrixXd::Identity(dim, dim);
    Q.block(pos_offset_, pos_offset_, pos_dim_, pos_dim_) += pos_part;
    Q *= cfg_.rho;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q);
    if (es.info() != Eigen::Success)
      throw Error("CentralizedSolver: eigendecomposition of Q failed");
    q_vals[i] = es.eigenvalues();
    q_vecs[i] = es.eigenvectors();
    for (auto& w : w_[i]) w.setZero();
  }

  std::vector<Eigen::VectorXd> x_hat(n);
  for (int i = 0; i < n; ++i) x_hat[i] = Eigen::VectorXd::Zero(layout_->block_dim(i));

  for (int it = 0; it < cfg_.n_admm; ++it) {
    // x-updates (Jacobi): reads only w/mu/lambda state from the previous phase.
    for (int i = 0; i < n; ++i) {
      const int dim = layout_->block_dim(i);
      const auto& nbs = graph_.neighbors(i);
      Eigen::VectorXd g = Eigen::VectorXd::Zero(dim);
      for (std::size_t k = 0; k < dir[i].size(); ++k) {
        const double along_xbar = dir[i][k].dot(pos(x_bar_.block(i)));
        const double along_w = dir[i][k].dot(pos(w_[i][edge_ord[i][k]]));
        const double coef = cfg_.rho * (along_xbar + along_w) +
                            sign[i][k] * (cfg_.rho * z[i][k] - lambda_[i][k]);
        g.segment(pos_offset_, pos_dim_) += coef * dir[i][k];
      }
      for (std::size_t o = 0; o < nbs.size(); ++o) {
        const Eigen::VectorXd w_recv = w_[nbs[o]][ordinal_of(nbs[o], i)];
        g += cfg_.rho * (x_bar_.block(i).eval() + w_recv) - mu_[i][o];
      }
      const Eigen::VectorXd u =
          prox_l2_quadratic_eig(q_vals[i], q_vecs[i], g, cfg_.prox_tol, cfg_.max_prox_iter);
      x_hat[i] = u - x_bar_.block(i);
    }

    // w-updates: i refreshes its copies of every neighbor j from j's fresh
    // primal and j's dual for that copy.
    for (int i = 0; i < n; ++i) {
      const auto& nbs = graph_.neighbors(i);
      for (std::size_t o = 0; o < nbs.size(); ++o) {
        const int j = nbs[o];
        const int nd = layout_->block_dim(j);
        Eigen::VectorXd b = cfg_.rho * x_hat[j] + mu_[j][ordinal_of(j, i)];
        Eigen::MatrixXd A = Eigen::MatrixXd::Identity(nd, nd);
        for (std::size_t k = 0; k < dir[i].size(); ++k) {
          if (edge_ord[i][k] != static_cast<int>(o)) continue;
          const double own_range = sign[i][k] * dir[i][k].dot(pos(x_hat[i]));
          const double beta = cfg_.rho * (own_range - z[i][k]) + lambda_[i][k];
          b.segment(pos_offset_, pos_dim_) += sign[i][k] * beta * dir[i][k];
          A.block(pos_offset_, pos_offset_, pos_dim_, pos_dim_) +=
              dir[i][k] * dir[i][k].transpose();
        }
        A *= cfg_.rho;
        w_[i][o] = Eigen::LDLT<Eigen::MatrixXd>(A).solve(b);
      }
    }

    // Dual ascent at the fresh primal pair.
    for (int i = 0; i < n; ++i) {
      const auto& nbs = graph_.neighbors(i);
      bool over = false;
      for (std::size_t k = 0; k < dir[i].size(); ++k) {
        const double c = sign[i][k] * dir[i][k].dot(pos(x_hat[i])) -
                         sign[i][k] * dir[i][k].dot(pos(w_[i][edge_ord[i][k]])) - z[i][k];
        lambda_[i][k] += cfg_.rho * c;
        if (std::abs(lambda_[i][k]) > cfg_.dual_threshold) over = true;
      }
      for (std::size_t o = 0; o < nbs.size(); ++o) {
        const Eigen::VectorXd w_recv = w_[nbs[o]][ordinal_of(nbs[o], i)];
        mu_[i][o] += cfg_.rho * (x_hat[i] - w_recv);
        if (mu_[i][o].norm() > cfg_.dual_threshold) over = true;
      }
      if (over) cold_flag_[i] = true;
    }
  }

  for (int i = 0; i < n; ++i) {
    x_bar_.block(i) += x_hat[i];
    if (!cfg_.warm_start || cold_flag_[i]) {
      std::fill(lambda_[i].begin(), lambda_[i].end(), 0.0);
      for (auto& mu : mu_[i]) mu.setZero();
      cold_flag_[i] = false;
    }
  }
  return x_bar_;
}

BlockVec centralized_oracle(const BlockVec& p_hat, const Eigen::VectorXd& y_hat,
                            const SwarmGraph& graph, LayoutPtr layout, int pos_dim, int pos_offset,
                            const SolverConfig& cfg, int rounds) {
  if (graph.num_vertices() > 30)
    throw ConfigError("centralized_oracle: meant for small instances (max 30 robots)");
  CentralizedSolver ref(graph, std::move(layout), pos_dim, pos_offset, cfg);
  BlockVec out = ref.x_bar();
  for (int r = 0; r < rounds; ++r) out = ref.outer_round(p_hat, y_hat);
  return out;
}

// ---------------------------------------------------------------------------
// Aggregation

VariantAggregate aggregate_trials(const std::string& label, const ResolvedScenario& scenario,
                                  const std::vector<TrialMetrics>& metrics) {
  VariantAggregate a;
  a.label = label;
  a.trials = static_cast<int>(metrics.size());
  a.steps = scenario.cfg.steps;
  a.n_robots = scenario.cfg.n_agents;
  a.epsilon = scenario.epsilon;
  if (metrics.empty()) return a;

  std::vector<int> chosen;
  for (int t = 0; t < a.trials; ++t) {
    const TrialMetrics& m = metrics[static_cast<std::size_t>(t)];
    a.trial_diverged.push_back(m.diverged ? 1 : 0);
    if (m.diverged)
      a.diverged_trials.push_back(t);
    else
      chosen.push_back(t);
    a.trial_final_mean_rmse.push_back(m.mean_rmse.empty() ? 0.0 : m.mean_rmse.back());
    a.trial_precision.push_back(m.final_precision());
    a.trial_recall.push_back(m.final_recall());
    for (char flag : m.swarm_alarm) a.swarm_alarm_steps += flag ? 1 : 0;
    a.solver_seconds += m.solver_seconds;
    a.outer_rounds += m.outer_rounds;
  }
  a.divergence_rate = static_cast<double>(a.diverged_trials.size()) / a.trials;
  a.robot_rounds = static_cast<long>(a.n_robots) * a.outer_rounds;
  if (chosen.empty()) {
    a.curves_include_divergent = true;
    for (int t = 0; t < a.trials; ++t) chosen.push_back(t);
  }

  const int steps = a.steps;
  const double m_count = static_cast<double>(chosen.size());
  a.mean_rmse.assign(steps, 0.0);
  a.std_rmse.assign(steps, 0.0);
  a.chi.assign(steps, 0.0);
  a.n_detected.assign(steps, 0.0);
  a.robot_rmse = Eigen::MatrixXd::Zero(a.n_robots, steps);
  a.robot_chi = Eigen::MatrixXd::Zero(a.n_robots, steps);
  for (int k = 0; k < steps; ++k) {
    double s = 0.0, ss = 0.0;
    for (int t : chosen) {
      const double v = metrics[static_cast<std::size_t>(t)].mean_rmse[k];
      s += v;
      ss += v * v;
      a.chi[k] += metrics[static_cast<std::size_t>(t)].chi[k];
      a.n_detected[k] += metrics[static_cast<std::size_t>(t)].n_detected[k];
    }
    const double mean = s / m_count;
    a.mean_rmse[k] = mean;
    a.std_rmse[k] = std::sqrt(std::max(0.0, ss / m_count - mean * mean));
    a.chi[k] /= m_count;
    a.n_detected[k] /= m_count;
  }
  for (int t : chosen) {
    a.robot_rmse += metrics[static_cast<std::size_t>(t)].robot_rmse;
    a.robot_chi += metrics[static_cast<std::size_t>(t)].robot_chi;
  }
  a.robot_rmse /= m_count;
  a.robot_chi /= m_count;

  std::vector<double> final_converged, final_all;
  for (int t = 0; t < a.trials; ++t) {
    final_all.push_back(a.trial_final_mean_rmse[static_cast<std::size_t>(t)]);
    if (!a.trial_diverged[static_cast<std::size_t>(t)])
      final_converged.push_back(a.trial_final_mean_rmse[static_cast<std::size_t>(t)]);
  }
  a.final_mean_rmse_converged = mean_of(final_converged);
  a.final_mean_rmse_all = mean_of(final_all);
  a.mean_precision = mean_of(a.trial_precision);
  a.mean_recall = mean_of(a.trial_recall);

  std::vector<double> latencies;
  for (const TrialMetrics& m : metrics)
    for (const auto& [robot, lat] : m.detection_latency)
      if (lat >= 0) latencies.push_back(static_cast<double>(lat));
  a.mean_detection_latency = mean_of(latencies);
  return a;
}

nlohmann::ordered_json VariantAggregate::summary_json() const {
  nlohmann::ordered_json j;
  j["label"] = label;
  j["trials"] = trials;
  j["steps"] = steps;
  j["n_robots"] = n_robots;
  j["epsilon"] = epsilon;
  j["divergence_rate"] = divergence_rate;
  j["diverged_trials"] = diverged_trials;
  j["curves_include_divergent"] = curves_include_divergent;
  j["final_mean_rmse_converged"] = json_number(final_mean_rmse_converged);
  j["final_mean_rmse_all"] = json_number(final_mean_rmse_all);
  j["mean_precision"] = json_number(mean_precision);
  j["mean_recall"] = json_number(mean_recall);
  j["mean_detection_latency"] = json_number(mean_detection_latency);
  j["swarm_alarm_steps"] = swarm_alarm_steps;
  auto finals = nlohmann::ordered_json::array();
  for (double v : trial_final_mean_rmse) finals.push_back(json_number(v));
  j["trial_final_mean_rmse"] = finals;
  j["trial_precision"] = trial_precision;
  j["trial_recall"] = trial_recall;
  std::vector<int> div(trial_diverged.begin(), trial_diverged.end());
  j["trial_diverged"] = div;
  return j;
}

std::vector<VariantAggregate> monte_carlo(const ScenarioConfig& cfg, int threads) {
  if (cfg.trials < 1) throw ConfigError("monte_carlo: trials must be >= 1");
  std::vector<VariantAggregate> out;
  for (const auto& [label, vcfg] : expand_variants(cfg)) {
    const ResolvedScenario scenario = resolve(vcfg, label);
    std::vector<TrialMetrics> metrics(static_cast<std::size_t>(vcfg.trials));
    const int workers = std::max(1, std::min(threads, vcfg.trials));
    if (workers <= 1) {
      for (int t = 0; t < vcfg.trials; ++t)
        metrics[static_cast<std::size_t>(t)] =
            run_trial(scenario, vcfg.master_seed + static_cast<std::uint64_t>(t));
    } else {
      std::atomic<int> next{0};
      std::exception_ptr first_error;
      std::mutex error_mutex;
      std::vector<std::thread> pool;
      pool.reserve(static_cast<std::size_t>(workers));
      for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
          try {
            for (int t = next.fetch_add(1); t < vcfg.trials; t = next.fetch_add(1))
              metrics[static_cast<std::size_t>(t)] =
                  run_trial(scenario, vcfg.master_seed + static_cast<std::uint64_t>(t));
          } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
          }
        });
      for (auto& th : pool) th.join();
      if (first_error) std::rethrow_exception(first_error);
    }
    out.push_back(aggregate_trials(label, scenario, metrics));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Export

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string csv_header(int n_robots, bool per_robot) {
  std::string h = "step,mean_rmse,std_rmse,chi,n_detected";
  if (per_robot) {
    for (int i = 0; i < n_robots; ++i) h += ",rmse_" + std::to_string(i);
    for (int i = 0; i < n_robots; ++i) h += ",chi_" + std::to_string(i);
  }
  return h + "\n";
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw IoError("failed while writing " + path);
}

}  // namespace

void write_trial_csv(const std::string& path, const TrialMetrics& m, bool per_robot_columns) {
  std::string text = csv_header(m.n_robots, per_robot_columns);
  for (int k = 0; k < static_cast<int>(m.mean_rmse.size()); ++k) {
    text += std::to_string(k);
    text += ',' + format_double(m.mean_rmse[k]);
    text += ',' + format_double(m.std_rmse[k]);
    text += ',' + format_double(m.chi[k]);
    text += ',' + std::to_string(m.n_detected[k]);
    if (per_robot_columns) {
      for (int i = 0; i < m.n_robots; ++i) text += ',' + format_double(m.robot_rmse(i, k));
      for (int i = 0; i < m.n_robots; ++i) text += ',' + format_double(m.robot_chi(i, k));
    }
    text += '\n';
  }
  write_text(path, text);
}

void write_aggregate_csv(const std::string& path, const VariantAggregate& a,
                         bool per_robot_columns) {
  std::string text = csv_header(a.n_robots, per_robot_columns);
  for (int k = 0; k < static_cast<int>(a.mean_rmse.size()); ++k) {
    text += std::to_string(k);
    text += ',' + format_double(a.mean_rmse[k]);
    text += ',' + format_double(a.std_rmse[k]);
    text += ',' + format_double(a.chi[k]);
    text += ',' + format_double(a.n_detected[k]);
    if (per_robot_columns) {
      for (int i = 0; i < a.n_robots; ++i) text += ',' + format_double(a.robot_rmse(i, k));
      for (int i = 0; i < a.n_robots; ++i) text += ',' + format_double(a.robot_chi(i, k));
    }
    text += '\n';
  }
  write_text(path, text);
}

void write_json(const std::string& path, const nlohmann::ordered_json& j) {
  write_text(path, j.dump(2) + "\n");
}

nlohmann::ordered_json run_metadata(const ResolvedScenario& scenario, int trials) {
  nlohmann::ordered_json j;
  j["tool"] = "rangemon";
  j["version"] = kToolVersion;
  const nlohmann::ordered_json meta = scenario.metadata();
  for (const auto& [key, value] : meta.items()) j[key] = value;
  j["trials"] = trials;
  auto seeds = nlohmann::ordered_json::array();
  for (int t = 0; t < trials; ++t)
    seeds.push_back(scenario.cfg.master_seed + static_cast<std::uint64_t>(t));
  j["trial_seeds"] = seeds;
  return j;
}

}  // namespace rangemon
