#include "assist/bench.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "assist/completion.hpp"
#include "assist/model.hpp"
#include "assist/rng.hpp"
#include "assist/simgen.hpp"

namespace assist {
namespace {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

// mean and standard error (sample standard deviation over sqrt(count)) of a
// batch of scores; a single score has zero standard error
std::pair<double, double> mean_se(const std::vector<double>& scores) {
  double mean = 0.0;
  for (double s : scores) mean += s;
  mean /= static_cast<double>(scores.size());
  if (scores.size() < 2) return {mean, 0.0};
  double var = 0.0;
  for (double s : scores) var += (s - mean) * (s - mean);
  var /= static_cast<double>(scores.size() - 1);
  return {mean, std::sqrt(var / static_cast<double>(scores.size()))};
}

}  // namespace

Hyperparams bench_fit_defaults() {
  Hyperparams hp;
  hp.H = 10;
  // Dense regression fits need a weak tether and a light ridge: the margin
  // scale the hinge demands is reached by accumulating many small proximal
  // steps, so the consensus penalty starts small and grows slowly, and the
  // ridge weight is sized for mid-hundreds sample counts (heavier weights
  // stall every classifier at a constant sign).
  hp.lambda = 0.001;
  hp.rho0 = 0.01;
  hp.rho_growth = 1.02;
  hp.n_starts = 2;
  hp.max_admm_iters = 120;
  hp.max_inner_iters = 150;
  return hp;
}

Hyperparams bench_completion_defaults() {
  Hyperparams hp;
  hp.H = 10;
  hp.lambda = 0.05;
  hp.n_starts = 2;
  hp.max_admm_iters = 30;
  hp.max_inner_iters = 150;
  return hp;
}

std::string run_fig5(int seeds, const std::vector<int>& n_list, int d,
                     const std::vector<std::pair<int, int>>& rs_list,
                     const Hyperparams& base, double noise_sd,
                     int eval_draws) {
  if (seeds < 1 || n_list.empty() || rs_list.empty() || d < 2 ||
      eval_draws < 1 || noise_sd < 0.0) {
    throw std::invalid_argument("run_fig5: invalid arguments");
  }
  std::ostringstream out;
  out << "n,r,s,mean,se\n";
  int point = 0;
  for (const auto& [r, s] : rs_list) {
    for (int n : n_list) {
      std::vector<double> scores;
      for (int seed_idx = 0; seed_idx < seeds; ++seed_idx) {
        std::uint64_t run_seed = hash64(hash64(0xF150, point), seed_idx);
        RegressionSim sim =
            gen_regression(d, r, s, n, ResponseKind::continuous,
                           LinkKind::smooth, noise_sd, run_seed);
        Hyperparams hp = base;
        hp.r = r;
        hp.s1 = s;
        hp.s2 = s;
        hp.seed = hash64(run_seed, 1);
        SignSeriesModel model = fit(sim.data, hp);
        scores.push_back(
            l1_error(model, sim.truth, eval_draws, hash64(run_seed, 2)));
      }
      auto [mean, se] = mean_se(scores);
      out << n << "," << r << "," << s << "," << fmt17(mean) << ","
          << fmt17(se) << "\n";
      ++point;
    }
  }
  return out.str();
}

std::string run_fig5(int seeds, const std::vector<int>& n_list, int d,
                     const std::vector<std::pair<int, int>>& rs_list) {
  return run_fig5(seeds, n_list, d, rs_list, bench_fit_defaults());
}

std::string run_fig1a(const std::vector<double>& c_list, int d, int seeds,
                      int rank) {
  if (c_list.empty() || d < 2 || seeds < 1 || rank < 1 || rank > d) {
    throw std::invalid_argument("run_fig1a: invalid arguments");
  }
  std::ostringstream out;
  out << "c,seed,rank\n";
  for (int seed_idx = 0; seed_idx < seeds; ++seed_idx) {
    Rng rng(hash64(0xF1A0, seed_idx));
    DenseMatrix u(d, rank), v(d, rank);
    for (double& x : u.values) x = rng.normal();
    for (double& x : v.values) x = rng.normal();
    DenseMatrix b(d, d);
    const double scale = 1.0 / std::sqrt(static_cast<double>(rank));
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        double acc = 0.0;
        for (int k = 0; k < rank; ++k) acc += u(i, k) * v(j, k);
        b(i, j) = acc * scale;
      }
    }
    for (double c : c_list) {
      int nrank = numerical_rank(gen_monotone_transform(b, c));
      out << fmt17(c) << "," << seed_idx << "," << nrank << "\n";
    }
  }
  return out.str();
}

std::string run_completion_bench(const DenseMatrix& fixture,
                                 double missing_frac,
                                 const std::vector<int>& r_list, int seeds,
                                 const Hyperparams& base,
                                 int baseline_iters) {
  if (!(missing_frac >= 0.0 && missing_frac < 1.0) || r_list.empty() ||
      seeds < 1 || baseline_iters < 0) {
    throw std::invalid_argument("run_completion_bench: invalid arguments");
  }
  std::ostringstream out;
  out << "r,seed,assist_mae,baseline_mae\n";
  for (int r : r_list) {
    for (int seed_idx = 0; seed_idx < seeds; ++seed_idx) {
      std::uint64_t run_seed = hash64(hash64(0xC0B0, r), seed_idx);
      ObservedMatrix obs =
          sample_observed(fixture, 1.0 - missing_frac, run_seed);
      Hyperparams hp = base;
      hp.r = r;
      hp.seed = hash64(run_seed, 1);
      CompletionModel model = fit_completion(obs, hp);
      double assist_mae = completion_mae(impute(model), fixture);
      double baseline_mae =
          completion_mae(svd_impute_baseline(obs, r, baseline_iters), fixture);
      out << r << "," << seed_idx << "," << fmt17(assist_mae) << ","
          << fmt17(baseline_mae) << "\n";
    }
  }
  return out.str();
}

std::string run_completion_bench(const DenseMatrix& fixture,
                                 double missing_frac,
                                 const std::vector<int>& r_list, int seeds) {
  return run_completion_bench(fixture, missing_frac, r_list, seeds,
                              bench_completion_defaults());
}

}  // namespace assist
