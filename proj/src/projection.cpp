#include "assist/projection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "eigen_bridge.hpp"

namespace assist {
namespace {

using Eigen::MatrixXd;

struct Support {
  std::vector<int> rows;  // sorted ascending
  std::vector<int> cols;

  bool operator==(const Support& o) const {
    return rows == o.rows && cols == o.cols;
  }
};

// Top-k indices by score, largest first, lowest index winning ties; returned
// sorted ascending.
std::vector<int> top_indices(const std::vector<double>& score, int k) {
  std::vector<int> idx(score.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (score[a] != score[b]) return score[a] > score[b];
    return a < b;
  });
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

MatrixXd submatrix(const MatrixXd& m, const Support& s) {
  MatrixXd sub(s.rows.size(), s.cols.size());
  for (std::size_t a = 0; a < s.rows.size(); ++a) {
    for (std::size_t b = 0; b < s.cols.size(); ++b) {
      sub(a, b) = m(s.rows[a], s.cols[b]);
    }
  }
  return sub;
}

// Sum of the top-r squared singular values of m restricted to the support:
// the Frobenius mass captured by the best rank-r approximation there. Small
// supports go through the analytic symmetric eigensolver on the Gram matrix
// (allocation-free); the general case falls back to a full SVD.
double support_gain(const MatrixXd& m, const Support& s, int r) {
  if (s.rows.empty() || s.cols.empty()) return 0.0;
  MatrixXd sub = submatrix(m, s);
  int full = static_cast<int>(std::min(sub.rows(), sub.cols()));
  if (full <= r) return sub.squaredNorm();
  if (full <= 3) {
    // Eigenvalues of the smaller Gram matrix are the squared singular values;
    // zero padding keeps the padded dimensions at the bottom of the spectrum.
    Eigen::Matrix3d gram = Eigen::Matrix3d::Zero();
    if (sub.rows() <= sub.cols()) {
      gram.topLeftCorner(full, full) = sub * sub.transpose();
    } else {
      gram.topLeftCorner(full, full) = sub.transpose() * sub;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig;
    eig.computeDirect(gram, Eigen::EigenvaluesOnly);
    double gain = 0.0;
    for (int k = 0; k < r; ++k) gain += eig.eigenvalues()(2 - k);
    return gain;
  }
  Eigen::JacobiSVD<MatrixXd> svd(sub);
  double gain = 0.0;
  for (int k = 0; k < r; ++k) {
    gain += svd.singularValues()(k) * svd.singularValues()(k);
  }
  return gain;
}

// One alternating reselection pass: rows scored against the current column
// support, then columns against the fresh rows. Euclidean-norm scoring with
// lowest-index tie-breaks keeps the walk deterministic.
Support reselect(const MatrixXd& m, const Support& cur, int s1, int s2) {
  std::vector<double> row_score(m.rows(), 0.0);
  for (int i = 0; i < m.rows(); ++i) {
    for (int j : cur.cols) row_score[i] += m(i, j) * m(i, j);
  }
  Support next;
  next.rows = top_indices(row_score, s1);
  std::vector<double> col_score(m.cols(), 0.0);
  for (int j = 0; j < m.cols(); ++j) {
    for (int i : next.rows) col_score[j] += m(i, j) * m(i, j);
  }
  next.cols = top_indices(col_score, s2);
  return next;
}

Support support_from_norms(const MatrixXd& m, int s1, int s2) {
  Support all;
  all.cols.resize(m.cols());
  std::iota(all.cols.begin(), all.cols.end(), 0);
  return reselect(m, all, s1, s2);
}

Support support_from_rank_r(const MatrixXd& m, int r, int s1, int s2) {
  Eigen::JacobiSVD<MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  int keep = std::min<int>(r, svd.singularValues().size());
  MatrixXd approx = svd.matrixU().leftCols(keep) *
                    svd.singularValues().head(keep).asDiagonal() *
                    svd.matrixV().leftCols(keep).transpose();
  return support_from_norms(approx, s1, s2);
}

// Greedy cover by entry magnitude: walk entries from largest |m_ij| down,
// admitting new rows/columns until both budgets are filled.
Support support_greedy_entries(const MatrixXd& m, int s1, int s2) {
  std::vector<int> order(m.size());
  std::iota(order.begin(), order.end(), 0);
  int cols = static_cast<int>(m.cols());
  auto mag = [&](int flat) {
    return std::abs(m(flat / cols, flat % cols));
  };
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    double ma = mag(a), mb = mag(b);
    if (ma != mb) return ma > mb;
    return a < b;
  });
  std::vector<char> row_in(m.rows(), 0), col_in(m.cols(), 0);
  int nr = 0, nc = 0;
  for (int flat : order) {
    if (nr == s1 && nc == s2) break;
    int i = flat / cols, j = flat % cols;
    if (nr < s1 && !row_in[i]) {
      row_in[i] = 1;
      ++nr;
    }
    if (nc < s2 && !col_in[j]) {
      col_in[j] = 1;
      ++nc;
    }
  }
  // Degenerate all-zero matrices may not fill the budgets from entries alone.
  for (int i = 0; i < m.rows() && nr < s1; ++i) {
    if (!row_in[i]) {
      row_in[i] = 1;
      ++nr;
    }
  }
  for (int j = 0; j < m.cols() && nc < s2; ++j) {
    if (!col_in[j]) {
      col_in[j] = 1;
      ++nc;
    }
  }
  Support s;
  for (int i = 0; i < m.rows(); ++i) {
    if (row_in[i]) s.rows.push_back(i);
  }
  for (int j = 0; j < m.cols(); ++j) {
    if (col_in[j]) s.cols.push_back(j);
  }
  return s;
}

// Steepest swap move. Single row or column replacements always; when
// `paired` is set, simultaneous row+column replacements as well (needed to
// escape saddle supports where no single move improves, e.g. tight 1x2
// budgets whose optimum differs in both coordinates). Returns true on a move.
bool steepest_swap(const MatrixXd& m, int r, Support& sup, double& gain,
                   bool paired) {
  Support best = sup;
  double best_gain = gain;
  auto consider = [&](const Support& cand) {
    double g = support_gain(m, cand, r);
    if (g > best_gain) {
      best_gain = g;
      best = cand;
    }
  };
  std::vector<char> row_in(m.rows(), 0), col_in(m.cols(), 0);
  for (int i : sup.rows) row_in[i] = 1;
  for (int j : sup.cols) col_in[j] = 1;
  auto row_moves = [&](auto&& with) {
    for (std::size_t a = 0; a < sup.rows.size(); ++a) {
      for (int i = 0; i < m.rows(); ++i) {
        if (row_in[i]) continue;
        Support cand = sup;
        cand.rows[a] = i;
        std::sort(cand.rows.begin(), cand.rows.end());
        with(cand);
      }
    }
  };
  row_moves([&](const Support& cand) { consider(cand); });
  for (std::size_t b = 0; b < sup.cols.size(); ++b) {
    for (int j = 0; j < m.cols(); ++j) {
      if (col_in[j]) continue;
      Support cand = sup;
      cand.cols[b] = j;
      std::sort(cand.cols.begin(), cand.cols.end());
      consider(cand);
    }
  }
  if (paired) {
    row_moves([&](const Support& rowc) {
      for (std::size_t b = 0; b < sup.cols.size(); ++b) {
        for (int j = 0; j < m.cols(); ++j) {
          if (col_in[j]) continue;
          Support cand = rowc;
          cand.cols[b] = j;
          std::sort(cand.cols.begin(), cand.cols.end());
          consider(cand);
        }
      }
    });
    // Same-axis double swaps: replace two rows (or two columns) at once.
    auto double_axis = [&](const std::vector<int>& members,
                           const std::vector<char>& in, int limit,
                           auto&& rebuild) {
      for (std::size_t a = 0; a + 1 < members.size(); ++a) {
        for (std::size_t b = a + 1; b < members.size(); ++b) {
          for (int i1 = 0; i1 < limit; ++i1) {
            if (in[i1]) continue;
            for (int i2 = i1 + 1; i2 < limit; ++i2) {
              if (in[i2]) continue;
              std::vector<int> next = members;
              next[a] = i1;
              next[b] = i2;
              std::sort(next.begin(), next.end());
              rebuild(next);
            }
          }
        }
      }
    };
    double_axis(sup.rows, row_in, static_cast<int>(m.rows()),
                [&](const std::vector<int>& rows) {
                  Support cand = sup;
                  cand.rows = rows;
                  consider(cand);
                });
    double_axis(sup.cols, col_in, static_cast<int>(m.cols()),
                [&](const std::vector<int>& cols) {
                  Support cand = sup;
                  cand.cols = cols;
                  consider(cand);
                });
  }
  if (best_gain > gain) {
    sup = best;
    gain = best_gain;
    return true;
  }
  return false;
}

void apply_sign_convention(MatrixXd& u, MatrixXd& v) {
  for (int k = 0; k < u.cols(); ++k) {
    int arg = 0;
    double mag = -1.0;
    bool in_u = true;
    for (int i = 0; i < u.rows(); ++i) {
      if (std::abs(u(i, k)) > mag) {
        mag = std::abs(u(i, k));
        arg = i;
        in_u = true;
      }
    }
    for (int i = 0; i < v.rows(); ++i) {
      if (std::abs(v(i, k)) > mag) {
        mag = std::abs(v(i, k));
        arg = i;
        in_u = false;
      }
    }
    double lead = in_u ? u(arg, k) : v(arg, k);
    if (lead < 0.0) {
      u.col(k) = -u.col(k);
      v.col(k) = -v.col(k);
    }
  }
}

// Builds the final projected matrix and factors for a chosen support.
SparseLowRank assemble(const DenseMatrix& m, const MatrixXd& em, int r,
                       const Support& sup) {
  SparseLowRank out;
  out.row_support = sup.rows;
  out.col_support = sup.cols;
  int rr = static_cast<int>(sup.rows.size());
  int cc = static_cast<int>(sup.cols.size());
  int rank = std::min({r, rr, cc});
  out.matrix = DenseMatrix(m.rows, m.cols, 0.0);
  out.u = DenseMatrix(m.rows, rank, 0.0);
  out.v = DenseMatrix(m.cols, rank, 0.0);
  if (rank > 0) {
    MatrixXd sub = submatrix(em, sup);
    Eigen::JacobiSVD<MatrixXd> svd(sub,
                                   Eigen::ComputeThinU | Eigen::ComputeThinV);
    MatrixXd tu = svd.matrixU().leftCols(rank);
    MatrixXd tv = svd.matrixV().leftCols(rank);
    apply_sign_convention(tu, tv);
    for (int k = 0; k < rank; ++k) {
      double s = svd.singularValues()(k);
      for (int a = 0; a < rr; ++a) out.u(sup.rows[a], k) = tu(a, k) * s;
      for (int b = 0; b < cc; ++b) out.v(sup.cols[b], k) = tv(b, k);
    }
    MatrixXd rec = tu * svd.singularValues().head(rank).asDiagonal() *
                   tv.transpose();
    for (int a = 0; a < rr; ++a) {
      for (int b = 0; b < cc; ++b) {
        out.matrix(sup.rows[a], sup.cols[b]) = rec(a, b);
      }
    }
  }
  double dist2 = 0.0;
  for (int i = 0; i < m.rows; ++i) {
    for (int j = 0; j < m.cols; ++j) {
      double diff = out.matrix(i, j) - m(i, j);
      dist2 += diff * diff;
    }
  }
  out.distance = std::sqrt(dist2);
  return out;
}

}  // namespace

TruncatedSvd truncated_svd(const DenseMatrix& m, int r) {
  if (r < 1 || r > std::min(m.rows, m.cols)) {
    throw std::invalid_argument("truncated_svd: rank out of range");
  }
  check_finite(m, "truncated_svd input");
  MatrixXd em = to_eigen(m);
  Eigen::JacobiSVD<MatrixXd> svd(em, Eigen::ComputeThinU | Eigen::ComputeThinV);
  MatrixXd u = svd.matrixU().leftCols(r);
  MatrixXd v = svd.matrixV().leftCols(r);
  apply_sign_convention(u, v);
  TruncatedSvd out;
  out.u = from_eigen(u);
  out.v = from_eigen(v);
  out.singular_values.assign(svd.singularValues().data(),
                             svd.singularValues().data() + r);
  return out;
}

SparseLowRank project_sparse_lowrank_factored(const DenseMatrix& m, int r,
                                              int s1, int s2, int iters) {
  if (r < 1 || r > std::min(s1, s2) || s1 > m.rows || s2 > m.cols) {
    throw std::invalid_argument("project_sparse_lowrank: infeasible budgets");
  }
  if (iters < 1) {
    throw std::invalid_argument("project_sparse_lowrank: iters must be >= 1");
  }
  check_finite(m, "project_sparse_lowrank input");
  MatrixXd em = to_eigen(m);
  double total_norm = em.norm();

  // A feasible input is its own best approximation: return it untouched so
  // the projection is exactly idempotent.
  {
    Support nz;
    for (int i = 0; i < m.rows; ++i) {
      for (int j = 0; j < m.cols; ++j) {
        if (m(i, j) != 0.0) {
          nz.rows.push_back(i);
          break;
        }
      }
    }
    for (int j = 0; j < m.cols; ++j) {
      for (int i = 0; i < m.rows; ++i) {
        if (m(i, j) != 0.0) {
          nz.cols.push_back(j);
          break;
        }
      }
    }
    if (static_cast<int>(nz.rows.size()) <= s1 &&
        static_cast<int>(nz.cols.size()) <= s2) {
      double tail = 0.0;
      int rr = static_cast<int>(nz.rows.size());
      int cc = static_cast<int>(nz.cols.size());
      if (std::min(rr, cc) > r) {
        Eigen::JacobiSVD<MatrixXd> svd(submatrix(em, nz));
        for (int k = r; k < svd.singularValues().size(); ++k) {
          tail += svd.singularValues()(k) * svd.singularValues()(k);
        }
        tail = std::sqrt(tail);
      }
      if (tail <= 1e-12 * std::max(1.0, total_norm)) {
        SparseLowRank out = assemble(m, em, r, nz);
        out.matrix = m;  // bit-exact passthrough
        out.distance = 0.0;
        return out;
      }
    }
  }

  if (s1 == m.rows && s2 == m.cols) {
    // No support selection: plain truncation.
    Support all;
    all.rows.resize(m.rows);
    std::iota(all.rows.begin(), all.rows.end(), 0);
    all.cols.resize(m.cols);
    std::iota(all.cols.begin(), all.cols.end(), 0);
    return assemble(m, em, r, all);
  }

  // Small support spaces are searched exhaustively: support selection is a
  // combinatorial maximization, and below a few thousand candidates the exact
  // scan is both optimal and cheaper than any clever search. Lexicographic
  // order with strict improvement keeps the winner deterministic.
  auto combination_count = [](int n, int k) {
    double c = 1.0;
    for (int i = 1; i <= k; ++i) c *= static_cast<double>(n - k + i) / i;
    return c;
  };
  if (combination_count(m.rows, s1) * combination_count(m.cols, s2) <= 3000.0) {
    auto each_combo = [](int n, int k, auto&& fn) {
      std::vector<char> mask(n, 0);
      std::fill(mask.begin(), mask.begin() + k, 1);
      do {
        std::vector<int> idx;
        idx.reserve(k);
        for (int i = 0; i < n; ++i) {
          if (mask[i]) idx.push_back(i);
        }
        fn(idx);
      } while (std::prev_permutation(mask.begin(), mask.end()));
    };
    std::vector<std::vector<int>> col_sets;
    each_combo(m.cols, s2,
               [&](const std::vector<int>& cs) { col_sets.push_back(cs); });
    Support exact_best;
    double exact_gain = -1.0;
    each_combo(m.rows, s1, [&](const std::vector<int>& rs) {
      Support cand;
      cand.rows = rs;
      for (const auto& cs : col_sets) {
        cand.cols = cs;
        double g = support_gain(em, cand, r);
        if (g > exact_gain) {
          exact_gain = g;
          exact_best = cand;
        }
      }
    });
    return assemble(m, em, r, exact_best);
  }

  // Candidate supports from deterministic starts, each refined by alternating
  // norm-based reselection; exact rank-r scoring throughout. The first three
  // starts look at the whole matrix; the anchored ones seed from a single row
  // or column, which rescues dominant blocks that global scores average away.
  std::vector<Support> starts = {support_from_norms(em, s1, s2),
                                 support_from_rank_r(em, r, s1, s2),
                                 support_greedy_entries(em, s1, s2)};
  const std::size_t rich = starts.size();
  for (int i = 0; i < m.rows; ++i) {
    std::vector<double> score(m.cols);
    for (int j = 0; j < m.cols; ++j) score[j] = em(i, j) * em(i, j);
    Support seed;
    seed.cols = top_indices(score, s2);
    starts.push_back(seed);
  }
  for (int j = 0; j < m.cols; ++j) {
    Support seed;
    seed.cols.push_back(j);
    starts.push_back(reselect(em, seed, s1, s2));
  }
  Support best;
  double best_gain = -1.0;
  auto consider = [&](const Support& s) {
    double g = support_gain(em, s, r);
    if (g > best_gain) {
      best_gain = g;
      best = s;
    }
  };
  for (std::size_t si = 0; si < starts.size(); ++si) {
    Support cur = starts[si];
    if (!cur.rows.empty()) consider(cur);
    for (int round = 0; round < iters; ++round) {
      Support next = reselect(em, cur, s1, s2);
      if (next == cur) break;
      cur = next;
      consider(cur);
    }
    if (si >= rich) continue;
    // Polish the whole-matrix starts' endpoints: the alternation can stall on
    // a suboptimal support, and distinct starts stall in distinct basins.
    Support polished = cur;
    double polished_gain = support_gain(em, polished, r);
    for (int round = 0; round < iters; ++round) {
      if (!steepest_swap(em, r, polished, polished_gain, false)) break;
    }
    if (polished_gain > best_gain) {
      best_gain = polished_gain;
      best = polished;
    }
  }
  // Escape remaining single-move traps with paired row+column swaps, then
  // re-polish, within the same round budget.
  for (int round = 0; round < iters; ++round) {
    if (!steepest_swap(em, r, best, best_gain, true)) break;
  }
  return assemble(m, em, r, best);
}

DenseMatrix project_sparse_lowrank(const DenseMatrix& m, int r, int s1, int s2,
                                   int iters) {
  return project_sparse_lowrank_factored(m, r, s1, s2, iters).matrix;
}

}  // namespace assist
