#include "road/road.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <iostream>
#include <random>
#include <string>
#include <vector>

namespace {

using road::GaussianPair;
using road::MatrixXd;
using road::VectorXd;
using road::io::format_double;

std::string join_vector(const VectorXd& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i > 0) out += ',';
    out += format_double(v[i]);
  }
  return out;
}

std::string join_matrix(const MatrixXd& m) {
  std::string out;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    if (r > 0) out += "; ";
    out += join_vector(m.row(r).transpose().eval());
  }
  return out;
}

VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const VectorXd>(v.data(), Eigen::Index(v.size()));
}

road::RoadSolution solve_with(const road::RoadProblem& prob, const std::string& method,
                              double tol, int max_iter) {
  if (method == "exact") return road::solve_exact(prob);
  if (method == "pg") return road::solve_projected_gradient(prob, tol, max_iter);
  return prob.dim() <= 12 ? road::solve_exact(prob)
                          : road::solve_projected_gradient(prob, tol, max_iter);
}

void print_solution(const road::RoadSolution& sol) {
  std::cout << "w: " << join_vector(sol.w) << '\n'
            << "objective: " << format_double(sol.objective) << '\n'
            << "l1: " << format_double(sol.l1) << '\n'
            << "l1_active: " << (sol.l1_active ? 1 : 0) << '\n'
            << "kkt_residual: " << format_double(sol.kkt_residual) << '\n'
            << "method: " << (sol.method == road::SolveMethod::exact ? "exact" : "pg") << '\n'
            << "converged: " << (sol.converged ? 1 : 0) << '\n';
}

GaussianPair correlated_pair_model() {
  VectorXd mu1(2), mu2(2);
  mu1 << 1, 0;
  mu2 << -1, 0;
  MatrixXd sigma(2, 2);
  sigma << 1, 1, 1, 2;
  return GaussianPair(mu1, mu2, sigma);
}

struct SectionTally {
  int bad = 0;
  int total = 0;
};

void report_section(const std::string& name, const SectionTally& tally, const char* unit,
                    int& violations) {
  if (tally.bad == 0) {
    std::cout << name << ": ok (" << tally.total << " " << unit << ")\n";
  } else {
    std::cout << name << ": VIOLATION (" << tally.bad << " of " << tally.total << " " << unit
              << ")\n";
    violations += tally.bad;
  }
}

double log_spaced(double lo, double hi, int i, int count) {
  return lo * std::pow(hi / lo, double(i) / double(count - 1));
}

void run_prove_check(const GaussianPair& model, double c, std::uint64_t seed, int reps) {
  if (reps < 1) throw road::Error("prove-check: --reps must be at least 1");
  int violations = 0;

  SectionTally scale;
  for (int i = 0; i < 100; ++i) {
    const double a = log_spaced(0.01, 10.0, i, 100);
    for (int j = 0; j < 50; ++j) {
      const double mag = log_spaced(0.001, 0.9, j, 50);
      for (const double eps : {-mag, mag}) {
        ++scale.total;
        if (!road::check_tail_scale_bound(a, eps).holds) ++scale.bad;
      }
    }
  }
  report_section("tail_scale", scale, "points", violations);

  SectionTally shift;
  for (int i = 0; i < 100; ++i) {
    const double a = log_spaced(0.01, 100.0, i, 100);
    for (int j = 0; j < 50; ++j) {
      const double frac = log_spaced(0.001, 3.0, j, 50);
      for (const double eps : {-frac / (1 + frac) * a, frac * a}) {
        ++shift.total;
        if (!road::check_tail_shift_bound(a, eps).holds) ++shift.bad;
      }
    }
  }
  report_section("tail_shift", shift, "points", violations);

  const VectorXd mu_d = model.mu_d();
  const Eigen::Index p = model.dim();
  const double margin = c - road::min_l1_on_hyperplane(mu_d);
  if (!(margin > 0))
    throw road::InfeasibleError("prove-check: budget c leaves no slack over 1/linf(mu_d)");
  const double cap = 0.3 * margin / (c * c);

  SectionTally transform;
  {
    auto eng = road::make_engine(seed, 1);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unif(-cap, cap);
    for (int r = 0; r < reps; ++r) {
      VectorXd v(p);
      for (Eigen::Index i = 0; i < p; ++i) v[i] = normal(eng);
      const VectorXd w = road::project_intersection(v, mu_d, c);
      VectorXd mu_hat = mu_d;
      for (Eigen::Index i = 0; i < p; ++i) mu_hat[i] += unif(eng);
      if (std::abs(w.dot(mu_d) - 1) > 1e-10 || road::l1_norm(w) > c + 1e-10) continue;
      ++transform.total;
      const road::TransformReport fwd =
          road::carry_to_perturbed_set(w, mu_d, mu_hat, c, model.sigma);
      const road::TransformReport rev =
          road::carry_to_perturbed_set(fwd.w_carried, mu_hat, mu_d, c, model.sigma);
      bool ok = true;
      for (const road::TransformReport* t : {&fwd, &rev}) {
        ok = ok && t->shrink > 0 && t->shrink <= 1;
        ok = ok && std::abs(t->w_rebalanced.dot(t == &fwd ? mu_d : mu_hat) - 1) <= 1e-10;
        ok = ok && road::l1_norm(t->w_rebalanced) <= c + 1e-10;
        ok = ok && std::abs(t->w_carried.dot(t == &fwd ? mu_hat : mu_d) - 1) <= 1e-10;
        ok = ok && road::l1_norm(t->w_carried) <= c + 1e-9;
        ok = ok && t->rebalance_gap.holds && t->carry_gap.holds;
      }
      if (!ok) ++transform.bad;
    }
  }
  report_section("transform_carry", transform, "runs", violations);

  SectionTally gap;
  {
    auto eng = road::make_engine(seed, 2);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unif(0, 1);
    for (int r = 0; r < 500; ++r) {
      const Eigen::Index q = 2 + r % 5;
      MatrixXd a(q, q);
      for (Eigen::Index i = 0; i < q; ++i)
        for (Eigen::Index j = 0; j < q; ++j) a(i, j) = normal(eng);
      const MatrixXd sigma = ((a * a.transpose() + a.transpose() * a) / 2).eval();
      VectorXd w(q), u(q);
      for (Eigen::Index i = 0; i < q; ++i) {
        w[i] = normal(eng);
        u[i] = normal(eng);
      }
      const double budget = 1.5;
      w *= budget * unif(eng) / road::l1_norm(w);
      u *= budget * unif(eng) / road::l1_norm(u);
      ++gap.total;
      if (!road::quadratic_gap_bound(w, u, sigma, budget).holds) ++gap.bad;
    }
  }
  report_section("quadratic_gap", gap, "pairs", violations);

  SectionTally chain;
  for (int i = 0; i < 5; ++i) {
    ++chain.total;
    const road::SampleEstimates est =
        road::fit_estimates(road::gen_synthetic(model, 2000, road::mix64(seed + 100 + i)));
    if (!road::error_chain_audit(model, est, c).all_hold()) ++chain.bad;
  }
  report_section("error_chain", chain, "fits", violations);

  if (violations > 0)
    throw road::Error("prove-check: " + std::to_string(violations) + " violation(s) found");
  std::cout << "all checks passed\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Budgeted linear discriminant toolkit: solvers, rate audits and experiments"};
  app.require_subcommand(1);

  const std::vector<std::string> methods{"auto", "exact", "pg"};

  auto* gen = app.add_subcommand("gen-data", "Sample a labeled dataset from a model file");
  std::string gen_model, gen_out;
  int gen_n = 100;
  std::uint64_t gen_seed = 0;
  gen->add_option("--model", gen_model, "model JSON with mu1, mu2, sigma")->required();
  gen->add_option("--n", gen_n, "observations per group")->required();
  gen->add_option("--seed", gen_seed, "RNG seed");
  gen->add_option("--out", gen_out, "output dataset CSV")->required();
  gen->callback([&] {
    const GaussianPair model = road::io::read_model_json(gen_model);
    const road::LabeledDataset data = road::gen_synthetic(model, gen_n, gen_seed);
    road::io::atomic_write_text(gen_out, road::io::dataset_csv(data));
    std::cout << "observations: " << data.n() << '\n' << "wrote: " << gen_out << '\n';
  });

  auto* fit = app.add_subcommand("fit", "Estimate group means and pooled covariance");
  std::string fit_data, fit_save;
  fit->add_option("--data", fit_data, "dataset CSV")->required();
  fit->add_option("--save-model", fit_save, "write the fitted model as JSON");
  fit->callback([&] {
    const road::SampleEstimates est =
        road::fit_estimates(road::io::read_dataset_csv(fit_data));
    std::cout << "n1: " << est.n1 << '\n'
              << "n2: " << est.n2 << '\n'
              << "mu1_hat: " << join_vector(est.mu1_hat) << '\n'
              << "mu2_hat: " << join_vector(est.mu2_hat) << '\n'
              << "mu_d_hat: " << join_vector(est.mu_d_hat) << '\n'
              << "sigma_hat: " << join_matrix(est.sigma_hat) << '\n';
    if (!fit_save.empty()) {
      const GaussianPair fitted(est.mu1_hat, est.mu2_hat, est.sigma_hat);
      road::io::atomic_write_text(fit_save, road::io::model_json(fitted));
      std::cout << "wrote: " << fit_save << '\n';
    }
  });

  auto* cls = app.add_subcommand("classify", "Label a dataset with the rule fitted to a model");
  std::string cls_data, cls_model, cls_method = "auto", cls_out;
  double cls_c = 0, cls_tol = 1e-9;
  int cls_max_iter = 100000;
  cls->add_option("--data", cls_data, "dataset CSV")->required();
  cls->add_option("--model", cls_model, "model JSON")->required();
  cls->add_option("--c", cls_c, "l1 budget")->required();
  cls->add_option("--method", cls_method, "solver: auto, exact or pg")
      ->check(CLI::IsMember(methods));
  cls->add_option("--tol", cls_tol, "iterative solver tolerance");
  cls->add_option("--max-iter", cls_max_iter, "iterative solver iteration cap");
  cls->add_option("--out", cls_out, "write predicted labels CSV");
  cls->callback([&] {
    const road::LabeledDataset data = road::io::read_dataset_csv(cls_data);
    const GaussianPair model = road::io::read_model_json(cls_model);
    if (data.dim() != model.dim())
      throw road::DimensionError("classify: dataset and model disagree on the dimension");
    const road::RoadProblem prob(model.sigma, model.mu_d(), cls_c);
    const road::RoadSolution sol = solve_with(prob, cls_method, cls_tol, cls_max_iter);
    const VectorXd center = model.mu_a();
    std::vector<int> predicted;
    predicted.reserve(std::size_t(data.n()));
    Eigen::Index wrong = 0;
    for (Eigen::Index i = 0; i < data.n(); ++i) {
      const int label = road::classify(data.x.row(i).transpose().eval(), sol.w, center);
      predicted.push_back(label);
      if (label != data.labels[std::size_t(i)]) ++wrong;
    }
    std::cout << "w: " << join_vector(sol.w) << '\n'
              << "objective: " << format_double(sol.objective) << '\n'
              << "analytic_rate: "
              << format_double(road::conditional_error_rates(sol.w, center, model).average)
              << '\n'
              << "empirical_error: " << format_double(double(wrong) / double(data.n())) << '\n'
              << "n: " << data.n() << '\n';
    if (!cls_out.empty()) {
      road::io::atomic_write_text(cls_out, road::io::labels_csv(predicted));
      std::cout << "wrote: " << cls_out << '\n';
    }
  });

  auto* solve = app.add_subcommand("solve", "Minimize w' sigma w under the two constraints");
  std::string solve_sigma, solve_sigma_file, solve_method = "auto";
  std::vector<double> solve_mud;
  double solve_c = 0, solve_tol = 1e-9;
  int solve_max_iter = 100000;
  auto* opt_sigma =
      solve->add_option("--sigma", solve_sigma, "covariance: a matrix CSV path, or a scalar s "
                                                "for the 2x2 family [[1,1],[1,s]]");
  auto* opt_sigma_file = solve->add_option("--sigma-file", solve_sigma_file, "matrix CSV path");
  opt_sigma->excludes(opt_sigma_file);
  solve->add_option("--mud", solve_mud, "mean half-difference, comma separated")
      ->required()
      ->delimiter(',');
  solve->add_option("--c", solve_c, "l1 budget")->required();
  solve->add_option("--method", solve_method, "solver: auto, exact or pg")
      ->check(CLI::IsMember(methods));
  solve->add_option("--tol", solve_tol, "iterative solver tolerance");
  solve->add_option("--max-iter", solve_max_iter, "iterative solver iteration cap");
  solve->callback([&] {
    MatrixXd sigma;
    if (!solve_sigma_file.empty()) {
      sigma = road::io::read_matrix_csv(solve_sigma_file);
    } else if (!solve_sigma.empty()) {
      try {
        sigma = road::ce_sigma_matrix(road::io::parse_double(solve_sigma));
      } catch (const road::io::ParseError&) {
        sigma = road::io::read_matrix_csv(solve_sigma);
      }
    } else {
      throw CLI::RequiredError("--sigma or --sigma-file");
    }
    const road::RoadProblem prob(sigma, to_vector(solve_mud), solve_c);
    print_solution(solve_with(prob, solve_method, solve_tol, solve_max_iter));
  });

  auto* oracle = app.add_subcommand("oracle", "Solve at the true model and report its rate");
  std::string oracle_model;
  double oracle_c = 0;
  oracle->add_option("--model", oracle_model, "model JSON")->required();
  oracle->add_option("--c", oracle_c, "l1 budget")->required();
  oracle->callback([&] {
    const GaussianPair model = road::io::read_model_json(oracle_model);
    const road::RoadProblem prob(model.sigma, model.mu_d(), oracle_c);
    const road::RoadSolution sol = solve_with(prob, "auto", 1e-9, 100000);
    print_solution(sol);
    std::cout << "rate: " << format_double(road::oracle_rate(sol.w, model)) << '\n';
  });

  auto* prove = app.add_subcommand("prove-check", "Audit every inequality and construction");
  std::string prove_model;
  double prove_c = 1.25;
  std::uint64_t prove_seed = 0;
  int prove_reps = 1000;
  prove->add_option("--model", prove_model, "model JSON (default: built-in 2x2 family)");
  prove->add_option("--c", prove_c, "l1 budget for the transform and chain sections");
  prove->add_option("--seed", prove_seed, "RNG seed");
  prove->add_option("--reps", prove_reps, "randomized transform runs");
  prove->callback([&] {
    const GaussianPair model =
        prove_model.empty() ? correlated_pair_model() : road::io::read_model_json(prove_model);
    run_prove_check(model, prove_c, prove_seed, prove_reps);
  });

  auto* ce = app.add_subcommand("counterexample",
                                "Monte Carlo of the first-order comparison on the 2x2 family");
  road::CounterexampleConfig ce_cfg;
  std::string ce_out;
  ce->add_option("--sigma", ce_cfg.sigma, "family parameter, must exceed 1");
  ce->add_option("--eps", ce_cfg.eps, "budget excess, c = 1 + eps");
  ce->add_option("--tau", ce_cfg.tau, "perturbation scale");
  ce->add_option("--reps", ce_cfg.reps, "draw count");
  ce->add_option("--seed", ce_cfg.seed, "RNG seed");
  ce->add_option("--out", ce_out, "write per-draw CSV");
  ce->callback([&] {
    const road::CeReport rep = road::ce_violation_mc(ce_cfg);
    std::cout << "draws: " << rep.draws.size() << '\n'
              << "violation_fraction: " << format_double(rep.violation_fraction) << '\n'
              << "sign_agreement: " << format_double(rep.sign_agreement) << '\n'
              << "max_expansion_error: " << format_double(rep.max_expansion_error) << '\n';
    if (!ce_out.empty()) {
      road::io::atomic_write_text(ce_out, road::io::draws_csv(rep.draws));
      std::cout << "wrote: " << ce_out << '\n';
    }
  });

  auto* conv = app.add_subcommand("convergence",
                                  "Regret of the fitted rule against the oracle across n");
  std::string conv_model, conv_out, conv_summary, conv_plot;
  std::vector<int> conv_grid;
  double conv_c = 0;
  int conv_reps = 100, conv_threads = 0;
  std::uint64_t conv_seed = 0;
  conv->add_option("--model", conv_model, "model JSON")->required();
  conv->add_option("--c", conv_c, "l1 budget")->required();
  conv->add_option("--n-grid", conv_grid, "per-group sample sizes, comma separated")
      ->required()
      ->delimiter(',');
  conv->add_option("--reps", conv_reps, "replicates per grid point");
  conv->add_option("--seed", conv_seed, "RNG seed");
  conv->add_option("--threads", conv_threads, "worker cap, 0 = all hardware threads");
  conv->add_option("--out", conv_out, "write per-replicate CSV")->required();
  conv->add_option("--summary", conv_summary, "write per-n summary CSV");
  conv->add_option("--plot", conv_plot, "write a log-log SVG of median regret vs n");
  conv->callback([&] {
    const GaussianPair model = road::io::read_model_json(conv_model);
    road::ConvergenceConfig cfg{model,     conv_c,    conv_grid,
                                conv_reps, conv_seed, road::effective_threads(conv_threads)};
    const std::vector<road::RegretRecord> records = road::run_convergence(cfg);
    road::io::atomic_write_text(conv_out, road::io::records_csv(records));
    const std::vector<road::ConvergenceSummary> summary = road::summarize(records);
    for (const auto& s : summary) {
      std::cout << "n=" << s.n << ": median_abs_regret=" << format_double(s.median_abs_regret)
                << " q90_abs_regret=" << format_double(s.q90_abs_regret)
                << " d_n=" << format_double(s.d_n)
                << " fail_frac=" << format_double(s.fail_frac) << '\n';
    }
    std::string slope_text = "n/a";
    try {
      slope_text = format_double(road::fit_slope(records));
    } catch (const road::Error&) {
    }
    std::cout << "slope: " << slope_text << '\n';
    std::cout << "wrote: " << conv_out << '\n';
    if (!conv_summary.empty()) {
      road::io::atomic_write_text(conv_summary, road::io::summary_csv(summary));
      std::cout << "wrote: " << conv_summary << '\n';
    }
    if (!conv_plot.empty()) {
      road::svg::Series med{"median_abs_regret", {}, {}};
      road::svg::Series env{"d_n", {}, {}};
      for (const auto& s : summary) {
        med.x.push_back(double(s.n));
        med.y.push_back(s.median_abs_regret);
        env.x.push_back(double(s.n));
        env.y.push_back(s.d_n);
      }
      road::io::atomic_write_text(
          conv_plot, road::svg::loglog_plot({med, env}, "n per group", "abs regret",
                                            "fitted-rule regret against the oracle"));
      std::cout << "wrote: " << conv_plot << '\n';
    }
  });

  try {
    app.parse(argc, argv);
    return 0;
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  } catch (const road::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
