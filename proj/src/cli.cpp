#include "assist/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "assist/bench.hpp"
#include "assist/completion.hpp"
#include "assist/io.hpp"
#include "assist/loss.hpp"
#include "assist/model.hpp"
#include "assist/simgen.hpp"
#include "assist/tuning.hpp"

namespace assist {
namespace {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  out.flush();
  if (!out) throw std::runtime_error(path + ": write failed");
}

// Solver parameters shared by the fitting subcommands: an optional JSON
// config file plus one flag per field; flags override file values.
struct SolverArgs {
  Hyperparams flags;
  std::string loss_name = "hinge";
  std::string config_path;

  CLI::Option* config = nullptr;
  CLI::Option* r = nullptr;
  CLI::Option* s1 = nullptr;
  CLI::Option* s2 = nullptr;
  CLI::Option* h = nullptr;
  CLI::Option* lambda = nullptr;
  CLI::Option* loss = nullptr;
  CLI::Option* rho0 = nullptr;
  CLI::Option* rho_growth = nullptr;
  CLI::Option* max_admm = nullptr;
  CLI::Option* max_inner = nullptr;
  CLI::Option* primal_tol = nullptr;
  CLI::Option* n_starts = nullptr;
  CLI::Option* seed = nullptr;

  void attach(CLI::App* cmd) {
    config = cmd->add_option("--config", config_path,
                             "JSON config file mirroring the solver "
                             "parameter names; flags override it");
    r = cmd->add_option("--r", flags.r, "rank budget");
    s1 = cmd->add_option("--s1", flags.s1, "row support budget");
    s2 = cmd->add_option("--s2", flags.s2, "column support budget");
    h = cmd->add_option("--H", flags.H, "level resolution (2H+1 levels)");
    lambda = cmd->add_option("--lambda", flags.lambda, "ridge penalty");
    loss = cmd->add_option("--loss", loss_name, "surrogate loss")
               ->check(CLI::IsMember({"hinge", "psi"}));
    rho0 = cmd->add_option("--rho0", flags.rho0, "initial tether strength");
    rho_growth = cmd->add_option("--rho-growth", flags.rho_growth,
                                 "tether growth factor per outer iteration");
    max_admm = cmd->add_option("--max-admm-iters", flags.max_admm_iters,
                               "outer iteration cap");
    max_inner = cmd->add_option("--max-inner-iters", flags.max_inner_iters,
                                "inner iteration cap");
    primal_tol = cmd->add_option("--primal-tol", flags.primal_tol,
                                 "relative primal residual tolerance");
    n_starts = cmd->add_option("--starts", flags.n_starts,
                               "random restarts per level");
    seed = cmd->add_option("--seed", flags.seed, "base random seed");
  }

  Hyperparams resolve() const {
    Hyperparams hp;
    if (*config) hp = load_config(config_path);
    if (*r) hp.r = flags.r;
    if (*s1) hp.s1 = flags.s1;
    if (*s2) hp.s2 = flags.s2;
    if (*h) hp.H = flags.H;
    if (*lambda) hp.lambda = flags.lambda;
    if (*loss) hp.loss = parse_loss_kind(loss_name);
    if (*rho0) hp.rho0 = flags.rho0;
    if (*rho_growth) hp.rho_growth = flags.rho_growth;
    if (*max_admm) hp.max_admm_iters = flags.max_admm_iters;
    if (*max_inner) hp.max_inner_iters = flags.max_inner_iters;
    if (*primal_tol) hp.primal_tol = flags.primal_tol;
    if (*n_starts) hp.n_starts = flags.n_starts;
    if (*seed) hp.seed = flags.seed;
    return hp;
  }
};

// Per-level aggregate of the solver's diagnostic stream.
struct LevelDiag {
  int records = 0;
  double objective = std::numeric_limits<double>::quiet_NaN();
  double residual = std::numeric_limits<double>::quiet_NaN();
};

std::string diagnostics_csv(const LevelGrid& grid,
                            const std::vector<LevelDiag>& diag) {
  std::ostringstream out;
  out << "level_index,level,records,last_objective,last_residual\n";
  for (std::size_t k = 0; k < diag.size(); ++k) {
    out << k << "," << fmt17(grid.levels[k]) << "," << diag[k].records << ","
        << fmt17(diag[k].objective) << "," << fmt17(diag[k].residual)
        << "\n";
  }
  return out.str();
}

CvMetric metric_from_name(const std::string& name) {
  if (name == "l1") return CvMetric::l1;
  if (name == "misclass") return CvMetric::misclass_at_half;
  return CvMetric::mae;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{
      "Level-aggregation estimators for matrix-predictor regression and "
      "matrix completion"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  // ---- fit ----------------------------------------------------------------
  auto* fit_cmd = app.add_subcommand(
      "fit", "Fit a sign-series regression model from a dataset file");
  struct {
    std::string data, out = "model.json", diagnostics;
    SolverArgs solver;
    bool auto_h = false;
    CLI::Option* diag_opt = nullptr;
  } fit_args;
  fit_cmd->add_option("--data", fit_args.data, "dataset CSV")->required();
  fit_cmd->add_option("--out", fit_args.out, "model output path");
  fit_args.diag_opt = fit_cmd->add_option("--diagnostics",
                                          fit_args.diagnostics,
                                          "per-level diagnostics CSV path");
  fit_args.solver.attach(fit_cmd);
  fit_cmd->add_flag("--auto-h", fit_args.auto_h,
                    "set the level resolution from the sample count");
  fit_cmd->callback([&] {
    Dataset data = load_dataset(fit_args.data);
    Hyperparams hp = fit_args.solver.resolve();
    if (fit_args.auto_h) hp.H = default_hyperparams(data.n()).H;
    std::vector<LevelDiag> diag(LevelGrid(hp.H).levels.size());
    LevelIterSink sink;
    if (*fit_args.diag_opt) {
      sink = [&diag](int level_idx, const AdmmIterRecord& rec) {
        LevelDiag& d = diag[level_idx];
        ++d.records;
        d.objective = rec.objective;
        d.residual = rec.primal_residual;
      };
    }
    SignSeriesModel model = fit(data, hp, sink);
    save_model(model, fit_args.out);
    if (*fit_args.diag_opt) {
      write_text(fit_args.diagnostics, diagnostics_csv(model.grid, diag));
    }
    std::printf("fitted levels=%d model=%s\n",
                static_cast<int>(model.grid.levels.size()),
                fit_args.out.c_str());
  });

  // ---- predict ------------------------------------------------------------
  auto* predict_cmd = app.add_subcommand(
      "predict", "Evaluate a saved regression model on a dataset file");
  struct {
    std::string model, data, out = "predictions.csv";
  } predict_args;
  predict_cmd->add_option("--model", predict_args.model, "model JSON")
      ->required();
  predict_cmd->add_option("--data", predict_args.data, "dataset CSV")
      ->required();
  predict_cmd->add_option("--out", predict_args.out,
                          "predictions output path");
  predict_cmd->callback([&] {
    SignSeriesModel model = load_sign_model(predict_args.model);
    Dataset data = load_dataset(predict_args.data);
    if (model.d1 != data.d1 || model.d2 != data.d2 || model.p != data.p) {
      throw std::runtime_error(
          "model/data shape mismatch: model expects d1=" +
          std::to_string(model.d1) + " d2=" + std::to_string(model.d2) +
          " p=" + std::to_string(model.p));
    }
    std::vector<double> preds;
    preds.reserve(data.samples.size());
    for (const Sample& s : data.samples) {
      preds.push_back(predict(model, s.predictor, s.covariates));
    }
    save_values(preds, predict_args.out);
    std::printf("predicted n=%d values=%s\n", data.n(),
                predict_args.out.c_str());
  });

  // ---- complete -----------------------------------------------------------
  auto* complete_cmd = app.add_subcommand(
      "complete", "Fit a completion model from an observed-entry file");
  struct {
    std::string triplets, out = "completion.json";
    SolverArgs solver;
    bool auto_h = false;
  } complete_args;
  complete_cmd->add_option("--triplets", complete_args.triplets,
                           "observed-entry CSV")
      ->required();
  complete_cmd->add_option("--out", complete_args.out, "model output path");
  complete_args.solver.attach(complete_cmd);
  complete_cmd->add_flag(
      "--auto-h", complete_args.auto_h,
      "set the level resolution from the observation density");
  complete_cmd->callback([&] {
    ObservedMatrix obs = load_triplets(complete_args.triplets);
    Hyperparams hp = complete_args.solver.resolve();
    if (complete_args.auto_h) {
      hp.H = completion_resolution(obs.entries.size(),
                                   std::min(obs.d1, obs.d2), hp.r);
    }
    CompletionModel model = fit_completion(obs, hp);
    save_model(model, complete_args.out);
    std::printf("completed levels=%d model=%s\n",
                static_cast<int>(model.grid.levels.size()),
                complete_args.out.c_str());
  });

  // ---- impute -------------------------------------------------------------
  auto* impute_cmd = app.add_subcommand(
      "impute",
      "Fit a completion model and write the imputed matrix; report MAE "
      "against a truth matrix when given");
  struct {
    std::string triplets, out = "imputed.csv", truth;
    SolverArgs solver;
    bool auto_h = false;
    CLI::Option* truth_opt = nullptr;
  } impute_args;
  impute_cmd->add_option("--triplets", impute_args.triplets,
                         "observed-entry CSV")
      ->required();
  impute_cmd->add_option("--out", impute_args.out, "matrix output path");
  impute_args.truth_opt = impute_cmd->add_option(
      "--truth", impute_args.truth, "full truth matrix CSV for MAE");
  impute_args.solver.attach(impute_cmd);
  impute_cmd->add_flag(
      "--auto-h", impute_args.auto_h,
      "set the level resolution from the observation density");
  impute_cmd->callback([&] {
    ObservedMatrix obs = load_triplets(impute_args.triplets);
    Hyperparams hp = impute_args.solver.resolve();
    if (impute_args.auto_h) {
      hp.H = completion_resolution(obs.entries.size(),
                                   std::min(obs.d1, obs.d2), hp.r);
    }
    CompletionModel model = fit_completion(obs, hp);
    DenseMatrix estimate = impute(model);
    save_matrix(estimate, impute_args.out);
    if (*impute_args.truth_opt) {
      DenseMatrix truth = load_matrix(impute_args.truth);
      std::printf("mae=%s\n",
                  fmt17(completion_mae(estimate, truth)).c_str());
    }
    std::printf("imputed d1=%d d2=%d matrix=%s\n", obs.d1, obs.d2,
                impute_args.out.c_str());
  });

  // ---- tune ---------------------------------------------------------------
  auto* tune_cmd = app.add_subcommand(
      "tune", "Cross-validate a square support grid and select a row");
  struct {
    std::string data, out = "cv.csv", selected, metric = "l1";
    SolverArgs solver;
    int folds = 5;
    int increment = 5;
    bool one_se = true;
    std::uint64_t fold_seed = 0;
    CLI::Option* selected_opt = nullptr;
  } tune_args;
  tune_cmd->add_option("--data", tune_args.data, "dataset CSV")->required();
  tune_cmd->add_option("--out", tune_args.out, "CV table CSV output path");
  tune_args.selected_opt = tune_cmd->add_option(
      "--selected", tune_args.selected,
      "write the selected row as a config JSON here");
  tune_cmd->add_option("--folds", tune_args.folds, "cross-validation folds");
  tune_cmd->add_option("--metric", tune_args.metric, "validation metric")
      ->check(CLI::IsMember({"l1", "misclass", "mae"}));
  tune_cmd->add_option("--increment", tune_args.increment,
                       "support grid increment");
  tune_cmd->add_flag("--one-se,!--no-one-se", tune_args.one_se,
                     "select by the one-standard-error rule (default) or "
                     "plain best mean");
  tune_cmd->add_option("--fold-seed", tune_args.fold_seed,
                       "seed of the fold partition");
  tune_args.solver.attach(tune_cmd);
  tune_cmd->callback([&] {
    Dataset data = load_dataset(tune_args.data);
    Hyperparams base = tune_args.solver.resolve();
    std::vector<Hyperparams> grid = square_support_grid(
        base, std::min(data.d1, data.d2), tune_args.increment);
    CvTable table =
        cross_validate(data, grid, tune_args.folds,
                       metric_from_name(tune_args.metric),
                       tune_args.fold_seed);
    write_text(tune_args.out, cv_table_csv(table));
    Hyperparams chosen;
    if (tune_args.one_se) {
      chosen = one_se_rule(table);
    } else {
      const CvRow* best = nullptr;
      for (const CvRow& row : table) {
        if (row.failed) continue;
        if (best == nullptr || row.mean < best->mean) best = &row;
      }
      if (best == nullptr) {
        throw std::runtime_error("tune: every grid row failed");
      }
      chosen = best->hp;
    }
    double mean = std::numeric_limits<double>::quiet_NaN();
    double se = std::numeric_limits<double>::quiet_NaN();
    for (const CvRow& row : table) {
      if (row.hp.r == chosen.r && row.hp.s1 == chosen.s1 &&
          row.hp.s2 == chosen.s2) {
        mean = row.mean;
        se = row.se;
        break;
      }
    }
    if (*tune_args.selected_opt) save_config(chosen, tune_args.selected);
    std::printf("selected r=%d s1=%d s2=%d mean=%s se=%s\n", chosen.r,
                chosen.s1, chosen.s2, fmt17(mean).c_str(),
                fmt17(se).c_str());
  });

  // ---- simulate -----------------------------------------------------------
  auto* sim_cmd = app.add_subcommand(
      "simulate", "Generate a synthetic dataset (and its truth samples)");
  struct {
    std::string generator, out = "sim_data.csv", truth_out;
    std::string link = "smooth", response = "continuous", pattern = "cross";
    int d = 20, r = 2, s = 2, n = 100;
    double noise = 0.1, sigma = 0.5;
    std::uint64_t seed = 1, g_seed = 1;
    CLI::Option* truth_opt = nullptr;
  } sim_args;
  sim_cmd->add_option("--generator", sim_args.generator, "generator family")
      ->required()
      ->check(CLI::IsMember({"regression", "network"}));
  sim_cmd->add_option("--out", sim_args.out, "dataset output path");
  sim_args.truth_opt = sim_cmd->add_option(
      "--truth-out", sim_args.truth_out,
      "truth sample values output path (regression only)");
  sim_cmd->add_option("--d", sim_args.d, "predictor dimension");
  sim_cmd->add_option("--r", sim_args.r, "coefficient rank (regression)");
  sim_cmd->add_option("--s", sim_args.s, "coefficient support (regression)");
  sim_cmd->add_option("--n", sim_args.n, "sample count");
  sim_cmd->add_option("--link", sim_args.link, "link kind (regression)")
      ->check(CLI::IsMember({"smooth", "step"}));
  sim_cmd->add_option("--response", sim_args.response,
                      "response kind (regression)")
      ->check(CLI::IsMember({"continuous", "binary"}));
  sim_cmd->add_option("--noise", sim_args.noise,
                      "noise standard deviation (regression)");
  sim_cmd->add_option("--pattern", sim_args.pattern,
                      "active pattern (network)")
      ->check(CLI::IsMember({"cross", "block", "star", "circle"}));
  sim_cmd->add_option("--sigma", sim_args.sigma,
                      "entry noise standard deviation (network)");
  sim_cmd->add_option("--seed", sim_args.seed, "generator seed");
  sim_cmd->add_option("--g-seed", sim_args.g_seed,
                      "connectivity-library seed (network)");
  sim_cmd->callback([&] {
    if (sim_args.generator == "regression") {
      RegressionSim sim = gen_regression(
          sim_args.d, sim_args.r, sim_args.s, sim_args.n,
          sim_args.response == "continuous" ? ResponseKind::continuous
                                            : ResponseKind::binary,
          sim_args.link == "smooth" ? LinkKind::smooth : LinkKind::step,
          sim_args.noise, sim_args.seed);
      save_dataset(sim.data, sim_args.out);
      if (*sim_args.truth_opt) {
        std::vector<double> truth_values;
        truth_values.reserve(sim.data.samples.size());
        for (const Sample& s : sim.data.samples) {
          truth_values.push_back(sim.truth.f(s.predictor));
        }
        save_values(truth_values, sim_args.truth_out);
      }
    } else {
      if (*sim_args.truth_opt) {
        throw CLI::ValidationError(
            "--truth-out", "only the regression generator has an evaluable "
                           "truth oracle");
      }
      NetworkPattern pattern = NetworkPattern::cross;
      if (sim_args.pattern == "block") pattern = NetworkPattern::block;
      if (sim_args.pattern == "star") pattern = NetworkPattern::star;
      if (sim_args.pattern == "circle") pattern = NetworkPattern::circle;
      Dataset data =
          gen_network_latent(sim_args.d, pattern, sim_args.sigma, sim_args.n,
                             sim_args.seed, sim_args.g_seed);
      save_dataset(data, sim_args.out);
    }
    std::printf("simulated n=%d data=%s\n", sim_args.n, sim_args.out.c_str());
  });

  // ---- rankdemo -----------------------------------------------------------
  auto* rank_cmd = app.add_subcommand(
      "rankdemo",
      "Numerical-rank growth of logistic transforms of low-rank matrices");
  struct {
    std::vector<double> c = {1.0, 5.0, 10.0, 20.0};
    int d = 50, r = 5, seeds = 10;
    std::string out = "ranks.csv";
  } rank_args;
  rank_cmd->add_option("--c", rank_args.c, "sharpness values");
  rank_cmd->add_option("--d", rank_args.d, "matrix dimension");
  rank_cmd->add_option("--r", rank_args.r, "base matrix rank");
  rank_cmd->add_option("--seeds", rank_args.seeds, "seed count");
  rank_cmd->add_option("--out", rank_args.out, "CSV output path");
  rank_cmd->callback([&] {
    write_text(rank_args.out, run_fig1a(rank_args.c, rank_args.d,
                                        rank_args.seeds, rank_args.r));
    std::printf("ranks=%s\n", rank_args.out.c_str());
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}

}  // namespace assist
