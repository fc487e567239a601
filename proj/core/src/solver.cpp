#include "fibersolve/solver.hpp"

#include <umfpack.h>

#include <algorithm>
#include <cmath>
#include <map>

namespace fibersolve {

VecX solve_sparse(const SpMatR& K, const VecX& b) {
  const int n = static_cast<int>(K.rows());
  if (n == 0) return VecX();
  SpMatR copy;
  if (!K.isCompressed()) copy = K, copy.makeCompressed();
  const SpMatR& A = K.isCompressed() ? K : copy;
  // CSR of A is the CSC of A^T; solving with A^T^T recovers A x = b.
  const int* Ap = A.outerIndexPtr();
  const int* Ai = A.innerIndexPtr();
  const double* Ax = A.valuePtr();
  double control[UMFPACK_CONTROL], info[UMFPACK_INFO];
  umfpack_di_defaults(control);
  // The pattern is symmetric apart from the coupling rows; nested dissection on
  // A + A^T keeps the fill of the 3D spline stiffness manageable.
  control[UMFPACK_STRATEGY] = UMFPACK_STRATEGY_SYMMETRIC;
  control[UMFPACK_ORDERING] = UMFPACK_ORDERING_METIS;
  void *symbolic = nullptr, *numeric = nullptr;
  int status = umfpack_di_symbolic(n, n, Ap, Ai, Ax, &symbolic, control, info);
  if (status != UMFPACK_OK) throw Error(ErrorCode::SingularLinearSystem, "sparse symbolic factorization failed");
  status = umfpack_di_numeric(Ap, Ai, Ax, symbolic, &numeric, control, info);
  umfpack_di_free_symbolic(&symbolic);
  if (status != UMFPACK_OK) {
    if (numeric) umfpack_di_free_numeric(&numeric);
    throw Error(ErrorCode::SingularLinearSystem, "singular tangent");
  }
  VecX x(n);
  status = umfpack_di_solve(UMFPACK_At, Ap, Ai, Ax, x.data(), b.data(), numeric, control, info);
  umfpack_di_free_numeric(&numeric);
  if (status != UMFPACK_OK || !x.allFinite()) throw Error(ErrorCode::SingularLinearSystem, "sparse solve failed");
  return x;
}

BlockReduction::BlockReduction(const ReducedSystem& sys) {
  const SpMatR& K = sys.K;
  n_free_ = static_cast<int>(sys.R.size());
  e0_ = sys.start[PHIT];
  e1_ = sys.start[QUAT];
  const int q0 = sys.start[QUAT], q1 = sys.start[MUN];
  const VecX b = -sys.R;

  // Owner fiber and role (0 centerline, 1 force, 2 moment) of every eliminated column.
  std::vector<int> owner(e1_ - e0_, -1), role(e1_ - e0_, -1);
  parts_.resize(sys.fibers.size());
  for (size_t f = 0; f < sys.fibers.size(); ++f) {
    const auto& r = sys.fibers[f];
    auto& P = parts_[f];
    P.p0 = r.phit[0], P.np = r.phit[1] - r.phit[0];
    P.n0 = r.force[0], P.nn = r.force[1] - r.force[0];
    P.m0 = r.moment[0], P.nm = r.moment[1] - r.moment[0];
    const int lo[3] = {P.p0, P.n0, P.m0}, cnt[3] = {P.np, P.nn, P.nm};
    for (int k = 0; k < 3; ++k)
      for (int i = lo[k]; i < lo[k] + cnt[k]; ++i) owner[i - e0_] = static_cast<int>(f), role[i - e0_] = k;
  }
  for (int i = 0; i < e1_ - e0_; ++i)
    if (owner[i] < 0) throw Error(ErrorCode::InvalidArgument, "eliminated unknown without fiber");

  auto forbidden = [](const char* what) {
    throw Error(ErrorCode::InvalidArgument, std::string("condensation requires a zero ") + what + " block");
  };

  // Rows of the eliminated blocks.
  std::vector<MatX> Mp(parts_.size()), Mn(parts_.size()), Mm(parts_.size());
  std::vector<std::map<int, int>> cphi(parts_.size()), cquat(parts_.size());
  for (size_t f = 0; f < parts_.size(); ++f) {
    Mp[f] = MatX::Zero(parts_[f].np, parts_[f].np);
    Mn[f] = MatX::Zero(parts_[f].nn, parts_[f].nn);
    Mm[f] = MatX::Zero(parts_[f].nm, parts_[f].nm);
  }
  // First pass collects column sets, second fills.
  for (int pass = 0; pass < 2; ++pass) {
    if (pass == 1)
      for (size_t f = 0; f < parts_.size(); ++f) {
        auto& P = parts_[f];
        int k = 0;
        for (auto& [c, idx] : cphi[f]) idx = k++, P.cphi.push_back(c);
        k = 0;
        for (auto& [c, idx] : cquat[f]) idx = k++, P.cquat.push_back(c);
        P.Kpf = MatX::Zero(P.np, P.cphi.size());
        P.Knp = MatX::Zero(P.nn, P.np);
        P.Knq = MatX::Zero(P.nn, P.cquat.size());
        P.Kmq = MatX::Zero(P.nm, P.cquat.size());
        P.bp = b.segment(P.p0, P.np);
        P.bn = b.segment(P.n0, P.nn);
        P.bm = b.segment(P.m0, P.nm);
      }
    for (int r = e0_; r < e1_; ++r) {
      const int f = owner[r - e0_], rr = role[r - e0_];
      auto& P = parts_[f];
      for (SpMatR::InnerIterator it(K, r); it; ++it) {
        const int c = static_cast<int>(it.col());
        const double v = it.value();
        if (v == 0.0) continue;
        const bool is_phi = c < e0_, is_quat = c >= q0 && c < q1, is_elim = c >= e0_ && c < e1_;
        const int cf = is_elim ? owner[c - e0_] : -1, cr = is_elim ? role[c - e0_] : -1;
        if (rr == 0) {
          if (is_phi) {
            if (pass == 0) cphi[f][c] = 0;
            else P.Kpf(r - P.p0, cphi[f][c]) += v;
          } else if (cf == f && cr == 0) {
            if (pass == 1) Mp[f](r - P.p0, c - P.p0) += v;
          } else
            forbidden("centerline coupling");
        } else if (rr == 1) {
          if (is_quat) {
            if (pass == 0) cquat[f][c] = 0;
            else P.Knq(r - P.n0, cquat[f][c]) += v;
          } else if (cf == f && cr == 0) {
            if (pass == 1) P.Knp(r - P.n0, c - P.p0) += v;
          } else if (cf == f && cr == 1) {
            if (pass == 1) Mn[f](r - P.n0, c - P.n0) += v;
          } else
            forbidden("force coupling");
        } else {
          if (is_quat) {
            if (pass == 0) cquat[f][c] = 0;
            else P.Kmq(r - P.m0, cquat[f][c]) += v;
          } else if (cf == f && cr == 2) {
            if (pass == 1) Mm[f](r - P.m0, c - P.m0) += v;
          } else
            forbidden("moment coupling");
        }
      }
    }
  }
  for (size_t f = 0; f < parts_.size(); ++f) {
    parts_[f].Mp = BandedLU(Mp[f]);
    parts_[f].Mn = BandedLU(Mn[f]);
    parts_[f].Mm = BandedLU(Mm[f]);
  }

  // Rows of the kept blocks: eliminated columns may appear only in matrix rows.
  struct Coupling {
    int f;
    std::vector<int> rows;  // free row indices
    MatX Kfp, Kfn, Kfm;
  };
  std::vector<std::map<int, int>> rowmap(parts_.size());
  for (int r = 0; r < n_free_; ++r) {
    if (r >= e0_ && r < e1_) continue;
    for (SpMatR::InnerIterator it(K, r); it; ++it) {
      const int c = static_cast<int>(it.col());
      if (c < e0_ || c >= e1_ || it.value() == 0.0) continue;
      if (r >= e0_) forbidden("quaternion or multiplier coupling to eliminated");
      rowmap[owner[c - e0_]][r] = 0;
    }
  }
  std::vector<Coupling> cpl(parts_.size());
  for (size_t f = 0; f < parts_.size(); ++f) {
    auto& P = parts_[f];
    auto& C = cpl[f];
    C.f = static_cast<int>(f);
    int k = 0;
    for (auto& [r, idx] : rowmap[f]) idx = k++, C.rows.push_back(r);
    C.Kfp = MatX::Zero(k, P.np);
    C.Kfn = MatX::Zero(k, P.nn);
    C.Kfm = MatX::Zero(k, P.nm);
    for (int i = 0; i < k; ++i)
      for (SpMatR::InnerIterator it(K, C.rows[i]); it; ++it) {
        const int c = static_cast<int>(it.col());
        if (c < e0_ || c >= e1_ || owner[c - e0_] != static_cast<int>(f)) continue;
        const int cr = role[c - e0_];
        if (cr == 0) C.Kfp(i, c - P.p0) += it.value();
        if (cr == 1) C.Kfn(i, c - P.n0) += it.value();
        if (cr == 2) C.Kfm(i, c - P.m0) += it.value();
      }
  }

  // Reduced right-hand side and per-row corrections.
  const int nred = n_free_ - (e1_ - e0_);
  b_.resize(nred);
  for (int r = 0; r < n_free_; ++r)
    if (r < e0_ || r >= e1_) b_(to_reduced(r)) = b(r);
  std::vector<std::vector<std::pair<int, double>>> extra(e0_);
  for (size_t f = 0; f < parts_.size(); ++f) {
    auto& P = parts_[f];
    auto& C = cpl[f];
    if (C.rows.empty()) continue;
    const MatX MpKpf = P.Mp.solve(P.Kpf);
    const VecX Mpbp = P.Mp.solve(P.bp);
    const MatX MnKnp = P.Mn.solve(P.Knp);
    const MatX MnKnq = P.Mn.solve(P.Knq);
    const MatX MmKmq = P.Mm.solve(P.Kmq);
    const VecX Mnbn = P.Mn.solve(P.bn);
    const VecX Mmbm = P.Mm.solve(P.bm);
    const MatX A = C.Kfp - C.Kfn * MnKnp;
    const MatX Cpp = A * MpKpf;
    const MatX Cpq = C.Kfn * MnKnq + C.Kfm * MmKmq;
    const VecX db = A * Mpbp + C.Kfn * Mnbn + C.Kfm * Mmbm;
    for (size_t i = 0; i < C.rows.size(); ++i) {
      const int r = C.rows[i];
      b_(to_reduced(r)) -= db(i);
      for (size_t j = 0; j < P.cphi.size(); ++j)
        if (Cpp(i, j) != 0.0) extra[r].emplace_back(to_reduced(P.cphi[j]), -Cpp(i, j));
      for (size_t j = 0; j < P.cquat.size(); ++j)
        if (Cpq(i, j) != 0.0) extra[r].emplace_back(to_reduced(P.cquat[j]), -Cpq(i, j));
    }
  }

  // Merge kept entries with the corrections row by row.
  std::vector<int> rowptr(nred + 1, 0), cols;
  std::vector<double> vals;
  cols.reserve(K.nonZeros());
  vals.reserve(K.nonZeros());
  std::vector<std::pair<int, double>> row;
  for (int r = 0; r < n_free_; ++r) {
    if (r >= e0_ && r < e1_) continue;
    row.clear();
    for (SpMatR::InnerIterator it(K, r); it; ++it) {
      const int c = static_cast<int>(it.col());
      if (c >= e0_ && c < e1_) continue;
      row.emplace_back(to_reduced(c), it.value());
    }
    if (r < e0_ && !extra[r].empty()) {
      row.insert(row.end(), extra[r].begin(), extra[r].end());
      std::sort(row.begin(), row.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    }
    for (size_t k = 0; k < row.size(); ++k) {
      if (!cols.empty() && static_cast<int>(cols.size()) > rowptr[to_reduced(r)] && cols.back() == row[k].first)
        vals.back() += row[k].second;
      else
        cols.push_back(row[k].first), vals.push_back(row[k].second);
    }
    rowptr[to_reduced(r) + 1] = static_cast<int>(cols.size());
  }
  K_.resize(nred, nred);
  K_.resizeNonZeros(cols.size());
  std::copy(rowptr.begin(), rowptr.end(), K_.outerIndexPtr());
  std::copy(cols.begin(), cols.end(), K_.innerIndexPtr());
  std::copy(vals.begin(), vals.end(), K_.valuePtr());
}

VecX BlockReduction::expand(const VecX& y) const {
  VecX d = VecX::Zero(n_free_);
  for (int r = 0; r < n_free_; ++r)
    if (r < e0_ || r >= e1_) d(r) = y(to_reduced(r));
  for (const auto& P : parts_) {
    VecX xphi(P.cphi.size()), xq(P.cquat.size());
    for (size_t j = 0; j < P.cphi.size(); ++j) xphi(j) = d(P.cphi[j]);
    for (size_t j = 0; j < P.cquat.size(); ++j) xq(j) = d(P.cquat[j]);
    const VecX dp = P.Mp.solve(VecX(P.bp - P.Kpf * xphi));
    const VecX dn = P.Mn.solve(VecX(P.bn - P.Knp * dp - P.Knq * xq));
    const VecX dm = P.Mm.solve(VecX(P.bm - P.Kmq * xq));
    d.segment(P.p0, P.np) = dp;
    d.segment(P.n0, P.nn) = dn;
    d.segment(P.m0, P.nm) = dm;
  }
  return d;
}

VecX newton_update(ReducedSystem sys, bool condense) {
  if (!condense) return solve_sparse(sys.K, -sys.R);
  const BlockReduction red(sys);
  sys.K = SpMatR();  // release before factorization
  return red.expand(solve_sparse(red.matrix(), red.rhs()));
}

double residual_norm(const Model& model, const VecX& R) {
  const DofMap& map = model.dofs();
  double total = 0.0;
  for (int b = 0; b < NUM_BLOCKS; ++b) {
    double s = 0.0;
    int n = 0;
    for (int i = map.start[b]; i < map.start[b + 1]; ++i)
      if (map.free_index[i] >= 0) s += R(i) * R(i), ++n;
    if (n > 0) total += s / n;
  }
  return std::sqrt(total);
}

double reference_load_scale(const Model& model) {
  VecX x = model.reference_state();
  const double floor = residual_norm(model, model.assemble(x, 0.0, false).R);
  model.apply_boundary_values(x, 1.0);
  const double s = residual_norm(model, model.assemble(x, 1.0, false).R);
  // Loads lost in the reference round-off count as no load.
  return s > 100.0 * floor && s > 0.0 ? s : 1.0;
}

StepResult newton_solve(const Model& model, VecX& x, double lambda, double load_scale) {
  const NewtonConfig& nc = model.config().solver.newton;
  const bool condense = model.config().solver.coupling == CouplingMode::Full;
  const DofMap& map = model.dofs();
  StepResult out;
  model.apply_boundary_values(x, lambda);
  for (int it = 0; it <= nc.max_iters; ++it) {
    ReducedSystem red;
    {
      const BlockSystem sys = model.assemble(x, lambda, true);
      const double r = residual_norm(model, sys.R);
      out.residuals.push_back(r);
      out.iterations = it + 1;
      if (!std::isfinite(r)) return out;
      if (r <= nc.abs_tol * load_scale || r <= nc.rel_tol * out.residuals.front()) {
        out.converged = true;
        return out;
      }
      if (it == nc.max_iters) break;
      red = apply_dirichlet(sys, model);
    }
    const VecX d = newton_update(std::move(red), condense);
    for (int i = 0; i < map.size(); ++i)
      if (map.free_index[i] >= 0) x(i) += d(map.free_index[i]);
  }
  return out;
}

Vec3 tip_displacement(const Model& model, const VecX& x, int fiber) {
  const auto& fm = model.fibers().at(fiber);
  return model.sample(x, fiber, fm.L).phi - fm.reference_position(fm.L);
}

SolveReport load_stepper(const Model& model, VecX& x, std::vector<VecX>* states) {
  const NewtonConfig& nc = model.config().solver.newton;
  SolveReport rep;
  try {
    rep.load_scale = reference_load_scale(model);
    for (int step = 1; step <= nc.n_load_steps; ++step) {
      const double lambda = static_cast<double>(step) / nc.n_load_steps;
      const StepResult sr = newton_solve(model, x, lambda, rep.load_scale);
      rep.iterations.push_back(sr.iterations);
      rep.residuals.push_back(sr.residuals);
      if (!sr.converged) {
        rep.failed_step = step;
        rep.message = "load step " + std::to_string(step) + " did not converge";
        return rep;
      }
      if (states) states->push_back(x);
    }
    rep.converged = true;
  } catch (const Error& e) {
    rep.failed_step = static_cast<int>(rep.iterations.size()) + 1;
    rep.message = "load step " + std::to_string(rep.failed_step) + ": " + e.what();
    return rep;
  }
  if (!model.fibers().empty()) {
    rep.tip_displacement = tip_displacement(model, x);
    rep.tip_magnitude = rep.tip_displacement.norm();
  }
  return rep;
}

}  // namespace fibersolve
