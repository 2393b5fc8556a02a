#pragma once

#include <vector>

#include <Eigen/Cholesky>

#include "gptraj/types.h"

namespace gptraj {

/// Symmetric block-tridiagonal normal-equation system over 3-vector states.
/// diag[i] couples station i with itself, upper[i] couples (i, i+1).
struct BlockTridiagonal {
  std::vector<Mat3> diag;
  std::vector<Mat3> upper;
  std::vector<Vec3> rhs;

  void resize(std::size_t n) {
    diag.assign(n, Mat3::Zero());
    upper.assign(n > 0 ? n - 1 : 0, Mat3::Zero());
    rhs.assign(n, Vec3::Zero());
  }
  std::size_t size() const { return diag.size(); }
};

/// Forward elimination state (block Thomas, first station to last). The
/// per-station conditionals only depend on stations at or before their index,
/// so adding factors at station k and re-running from k reproduces the same
/// suffix a full elimination would.
class ChainElimination {
 public:
  void reset(std::size_t n) {
    info_.assign(n, Mat3::Zero());
    rhs_.assign(n, Vec3::Zero());
    ldlt_.assign(n, Eigen::LDLT<Mat3>());
  }

  std::size_t size() const { return info_.size(); }

  /// Re-eliminates stations [from, n); stations before `from` keep their
  /// stored conditionals. Returns the number of stations eliminated.
  int eliminate_suffix(const BlockTridiagonal& sys, int from) {
    const int n = static_cast<int>(sys.size());
    int count = 0;
    for (int i = std::max(from, 0); i < n; ++i) {
      if (i == 0) {
        info_[0] = sys.diag[0];
        rhs_[0] = sys.rhs[0];
      } else {
        const Mat3 k = ldlt_[i - 1].solve(sys.upper[i - 1]);
        const Vec3 w = ldlt_[i - 1].solve(rhs_[i - 1]);
        info_[i] = sys.diag[i] - sys.upper[i - 1].transpose() * k;
        rhs_[i] = sys.rhs[i] - sys.upper[i - 1].transpose() * w;
      }
      ldlt_[i].compute(info_[i]);
      ++count;
    }
    return count;
  }

  /// Back substitution over the whole chain (cheap relative to elimination).
  void back_substitute(const BlockTridiagonal& sys,
                       std::vector<Vec3>* delta) const {
    const int n = static_cast<int>(sys.size());
    delta->assign(n, Vec3::Zero());
    if (n == 0) return;
    (*delta)[n - 1] = ldlt_[n - 1].solve(rhs_[n - 1]);
    for (int i = n - 2; i >= 0; --i) {
      (*delta)[i] = ldlt_[i].solve(rhs_[i] - sys.upper[i] * (*delta)[i + 1]);
    }
  }

  const Mat3& conditional_info(int i) const { return info_[i]; }
  const Vec3& conditional_rhs(int i) const { return rhs_[i]; }

 private:
  std::vector<Mat3> info_;
  std::vector<Vec3> rhs_;
  std::vector<Eigen::LDLT<Mat3>> ldlt_;
};

/// One-shot solve of the full system.
inline bool block_thomas_solve(const BlockTridiagonal& sys,
                               std::vector<Vec3>* delta) {
  ChainElimination elim;
  elim.reset(sys.size());
  elim.eliminate_suffix(sys, 0);
  elim.back_substitute(sys, delta);
  for (const Vec3& d : *delta) {
    if (!d.allFinite()) return false;
  }
  return true;
}

}  // namespace gptraj
