#include "fibersolve/assembly.hpp"

#include <unsupported/Eigen/AutoDiff>
#include <algorithm>
#include <cmath>

#include "fibersolve/coupling.hpp"

namespace fibersolve {

namespace {

constexpr int NZ = 35;  // quadrature point primitives
constexpr int NY = 46;  // kernel outputs

// Primitive layout.
enum Z { Z_PHIC = 0, Z_F = 3, Z_PHIT = 12, Z_DPHIT = 15, Z_Q = 18, Z_DQ = 22, Z_N = 26, Z_M = 29, Z_MU = 32 };
// Output layout.
enum Y {
  Y_S = 0,       // 9: line stress contracted with grad R^A
  Y_V = 9,       // 6: v_a = 1/2 P_a m, contracted with D_a . H^A D3
  Y_RN = 15,     // 3: force constitutive residual
  Y_RM = 18,     // 3: moment constitutive residual
  Y_POS = 21,    // 3: position constraint
  Y_TAU = 24,    // 3: torque constraint
  Y_UNITY = 27,  // 1: quaternion unity
  Y_AREA = 28,   // 3: pressure/shear constraint
  Y_MOUT = 31,   // 3: moment (position-only moment balance, tested with R~')
  Y_TOUT = 34,   // 3: -(phi~' x n + m_bar) (position-only moment balance, tested with R~)
  Y_SEND = 37,   // 9: endpoint moment stress
};

using ADScalar = Eigen::AutoDiffScalar<Eigen::Matrix<double, NZ, 1>>;

struct KernelConst {
  Directors D;
  Mat3 K1, K2;
  double C = 0.0;
  Vec3 mbar = Vec3::Zero();
  Vec3 m_end = Vec3::Zero();
  bool position_only = false;
  bool area = true;
};

template <class T>
void line_kernel(const T* z, const KernelConst& kc, T* y) {
  V3<T> phic(z[Z_PHIC], z[Z_PHIC + 1], z[Z_PHIC + 2]);
  M3<T> F;
  for (int i = 0; i < 9; ++i) F(i / 3, i % 3) = z[Z_F + i];
  V3<T> phit(z[Z_PHIT], z[Z_PHIT + 1], z[Z_PHIT + 2]);
  V3<T> dphit(z[Z_DPHIT], z[Z_DPHIT + 1], z[Z_DPHIT + 2]);
  Eigen::Matrix<T, 4, 1> q(z[Z_Q], z[Z_Q + 1], z[Z_Q + 2], z[Z_Q + 3]);
  Eigen::Matrix<T, 4, 1> dq(z[Z_DQ], z[Z_DQ + 1], z[Z_DQ + 2], z[Z_DQ + 3]);
  V3<T> n(z[Z_N], z[Z_N + 1], z[Z_N + 2]);
  V3<T> m(z[Z_M], z[Z_M + 1], z[Z_M + 2]);
  V3<T> mu(z[Z_MU], z[Z_MU + 1], z[Z_MU + 2]);

  const M3<T> R = quat_to_rotation<T>(q);
  const M3<T> dR = quat_rotation_derivative<T>(q, dq);
  const CouplingFrameT<T> f = build_frame<T>(R, dR, kc.D, kc.C);
  const auto [gamma, kappa] = beam_strains<T>(R, dphit, dR, kc.D.D[2]);

  const V3<T> rn = R * (kc.K1.cast<T>() * gamma) - n;
  const V3<T> rm = R * (kc.K2.cast<T>() * kappa) - m;

  M3<T> S = n * kc.D.D[2].cast<T>().transpose();
  V3<T> v[2] = {V3<T>::Zero(), V3<T>::Zero()};
  if (!kc.position_only) {
    S += stress_Pm<T>(f, n, m, dphit, kc.mbar);
    if (kc.area) S += T(0.5 * kc.C) * F * mu_n_sym_reference<T>(kc.D, mu);
    for (int a = 0; a < 2; ++a) v[a] = T(0.5) * f.P[a] * m;
  }
  const V3<T> gpos = phic - phit;
  const V3<T> gtau = tau_density<T>(f, F);
  const T unity = q.dot(q) - T(1);
  const V3<T> garea = area_density<T>(kc.D, F);
  const V3<T> tout = -(dphit.cross(n) + kc.mbar.cast<T>());
  const M3<T> Send = endpoint_moment_stress<T>(f, kc.m_end);

  for (int i = 0; i < 9; ++i) y[Y_S + i] = S(i / 3, i % 3);
  for (int a = 0; a < 2; ++a)
    for (int i = 0; i < 3; ++i) y[Y_V + 3 * a + i] = v[a](i);
  for (int i = 0; i < 3; ++i) {
    y[Y_RN + i] = rn(i);
    y[Y_RM + i] = rm(i);
    y[Y_POS + i] = gpos(i);
    y[Y_TAU + i] = gtau(i);
    y[Y_AREA + i] = garea(i);
    y[Y_MOUT + i] = m(i);
    y[Y_TOUT + i] = tout(i);
  }
  y[Y_UNITY] = unity;
  for (int i = 0; i < 9; ++i) y[Y_SEND + i] = Send(i / 3, i % 3);
}

// Evaluates outputs and their Jacobian with respect to the primitives.
void eval_kernel(const Eigen::Matrix<double, NZ, 1>& z, const KernelConst& kc, bool jac,
                 Eigen::Matrix<double, NY, 1>& y, Eigen::Matrix<double, NY, NZ>& dy) {
  if (!jac) {
    line_kernel<double>(z.data(), kc, y.data());
    return;
  }
  ADScalar za[NZ], ya[NY];
  for (int k = 0; k < NZ; ++k) za[k] = ADScalar(z(k), NZ, k);
  line_kernel<ADScalar>(za, kc, ya);
  for (int o = 0; o < NY; ++o) {
    y(o) = ya[o].value();
    if (ya[o].derivatives().size() == NZ)
      dy.row(o) = ya[o].derivatives().transpose();
    else
      dy.row(o).setZero();
  }
}

int face_mask_kind(const CaseConfig& cfg, int face) {
  for (int f : cfg.matrix.fixed_faces)
    if (f == face) return 3;
  for (int f : cfg.matrix.gradient_faces)
    if (f == face) return 2;
  for (int f : cfg.matrix.displaced_faces)
    if (f == face) return 1;
  return 0;
}

}  // namespace

SpMatR BlockSystem::tangent() const {
  SpMatR B(Kvol.rows(), Kvol.cols());
  B.setFromTriplets(triplets.begin(), triplets.end());
  SpMatR K = Kvol + B;
  K.makeCompressed();
  return K;
}

Model::Model(const CaseConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  const int p = cfg_.solver.orders.matrix();
  for (int d = 0; d < 3; ++d) patch_.kv[d] = open_knot_vector(p, cfg_.matrix.elements[d], 0.0, 1.0);
  patch_.origin = cfg_.matrix.origin;
  patch_.jac = cfg_.matrix.edges;
  map_ = build_dof_map(cfg_);
  endpoint_rows_ = cfg_.endpoint_rows();
  for (const auto& fc : cfg_.fibers)
    fibers_.push_back(build_fiber(fc, cfg_.solver.orders, endpoint_rows_, cfg_.solver.beam_quadrature, patch_));

  volume_rule_ = gauss_legendre(p + 1);
  for (int d = 0; d < 3; ++d) {
    const auto br = patch_.kv[d].breaks();
    table_[d].resize(br.size() - 1);
    for (size_t e = 0; e + 1 < br.size(); ++e) {
      const double a = br[e], h = 0.5 * (br[e + 1] - br[e]);
      elen_[d].push_back(br[e + 1] - br[e]);
      for (double t : volume_rule_.points) table_[d][e].push_back(eval_basis(patch_.kv[d], a + h * (t + 1.0), 1));
    }
  }
  build_volume_pattern();
}

void Model::build_volume_pattern() {
  const int p = cfg_.solver.orders.matrix();
  const auto c = patch_.counts();
  const int nphi = 3 * map_.n_cp;
  vol_rowptr_.assign(nphi + 1, 0);
  for (int a = 0; a < map_.n_cp; ++a) {
    const auto ijk = patch_.cp_ijk(a);
    int w = 1;
    for (int d = 0; d < 3; ++d) w *= std::min(c[d] - 1, ijk[d] + p) - std::max(0, ijk[d] - p) + 1;
    for (int i = 0; i < 3; ++i) vol_rowptr_[3 * a + i + 1] = 3 * w;
  }
  for (int r = 0; r < nphi; ++r) vol_rowptr_[r + 1] += vol_rowptr_[r];
  vol_cols_.resize(vol_rowptr_[nphi]);
  for (int a = 0; a < map_.n_cp; ++a) {
    const auto ijk = patch_.cp_ijk(a);
    int lo[3], hi[3];
    for (int d = 0; d < 3; ++d) lo[d] = std::max(0, ijk[d] - p), hi[d] = std::min(c[d] - 1, ijk[d] + p);
    for (int i = 0; i < 3; ++i) {
      int k = vol_rowptr_[3 * a + i];
      for (int x = lo[0]; x <= hi[0]; ++x)
        for (int y = lo[1]; y <= hi[1]; ++y)
          for (int z = lo[2]; z <= hi[2]; ++z)
            for (int comp = 0; comp < 3; ++comp) vol_cols_[k++] = 3 * patch_.cp_index(x, y, z) + comp;
    }
  }
}

VecX Model::reference_state() const {
  VecX x = VecX::Zero(map_.size());
  for (int a = 0; a < map_.n_cp; ++a) x.segment<3>(3 * a) = patch_.control_point(a);
  for (size_t f = 0; f < fibers_.size(); ++f) {
    const auto& fm = fibers_[f];
    const auto& fd = map_.fibers[f];
    for (int a = 0; a < fd.n_R; ++a) {
      x.segment<3>(fd.phit + 3 * a) = fm.reference_position(fm.kvR.greville(a));
      x(fd.quat + 4 * a) = 1.0;
    }
  }
  return x;
}

void Model::apply_boundary_values(VecX& x, double lambda) const {
  const auto c = patch_.counts();
  const Vec3 center = patch_.map(Vec3::Constant(0.5));
  const Mat3 G = Mat3::Identity() + lambda * (cfg_.matrix.boundary_gradient - Mat3::Identity());
  for (int a = 0; a < map_.n_cp; ++a) {
    const auto ijk = patch_.cp_ijk(a);
    int kind = 0;
    for (int d = 0; d < 3; ++d) {
      if (ijk[d] == 0) kind = std::max(kind, face_mask_kind(cfg_, 2 * d));
      if (ijk[d] == c[d] - 1) kind = std::max(kind, face_mask_kind(cfg_, 2 * d + 1));
    }
    const Vec3 X = patch_.control_point(a);
    if (kind == 3) x.segment<3>(3 * a) = X;
    if (kind == 2) x.segment<3>(3 * a) = center + G * (X - center);
    if (kind == 1) x.segment<3>(3 * a) = X + lambda * cfg_.matrix.displacement;
  }
  for (size_t f = 0; f < fibers_.size(); ++f) {
    const auto& fm = fibers_[f];
    const auto& fd = map_.fibers[f];
    for (int a : {0, fd.n_R - 1}) {
      if (!map_.fixed[fd.phit + 3 * a]) continue;
      x.segment<3>(fd.phit + 3 * a) = fm.reference_position(fm.kvR.greville(a));
      x.segment<4>(fd.quat + 4 * a) = Vec4(1, 0, 0, 0);
    }
    if (fd.n_N > 0) x.segment<3>(fd.mun).setZero();
  }
}

BlockSystem Model::assemble(const VecX& x, double lambda, bool with_tangent) const {
  BlockSystem sys;
  sys.R = VecX::Zero(map_.size());
  sys.has_tangent = with_tangent;
  if (with_tangent) {
    const int n = map_.size(), nphi = 3 * map_.n_cp;
    sys.Kvol.resize(n, n);
    sys.Kvol.resizeNonZeros(vol_cols_.size());
    std::copy(vol_rowptr_.begin(), vol_rowptr_.end(), sys.Kvol.outerIndexPtr());
    std::fill(sys.Kvol.outerIndexPtr() + nphi + 1, sys.Kvol.outerIndexPtr() + n + 1, vol_rowptr_[nphi]);
    std::copy(vol_cols_.begin(), vol_cols_.end(), sys.Kvol.innerIndexPtr());
    std::fill(sys.Kvol.valuePtr(), sys.Kvol.valuePtr() + vol_cols_.size(), 0.0);
  }
  assemble_volume(x, lambda, sys, with_tangent);
  for (size_t f = 0; f < fibers_.size(); ++f) assemble_fiber(x, lambda, static_cast<int>(f), sys, with_tangent);
  return sys;
}

void Model::assemble_volume(const VecX& x, double lambda, BlockSystem& sys, bool with_tangent) const {
  const int p = cfg_.solver.orders.matrix();
  const int nb1 = p + 1, nb = nb1 * nb1 * nb1;
  const int nq1 = static_cast<int>(volume_rule_.points.size()), nq = nq1 * nq1 * nq1;
  const Mat3 Jinv = patch_.jac.inverse();
  const double detJ = patch_.jac.determinant();
  const auto c = patch_.counts();
  const MaterialModel& mat = cfg_.matrix.material;
  const Vec3 body = lambda * cfg_.matrix.body_force;
  const bool has_body = body.squaredNorm() > 0.0;

  Eigen::Matrix<double, Eigen::Dynamic, 3> xloc(nb, 3), G(nb, 3), Gp(nb, 3), Rloc(nb, 3);
  VecX N(nb);
  MatX Gbig, T[6];
  MatX Kik;
  std::vector<int> cps(nb);
  if (with_tangent) {
    Gbig.resize(nb, 3 * nq);
    for (auto& t : T) t.resize(3 * nq, nb);
  }
  static const int pairs[6][2] = {{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}, {2, 2}};
  double* vals = with_tangent ? sys.Kvol.valuePtr() : nullptr;

  const int ne0 = table_[0].size(), ne1 = table_[1].size(), ne2 = table_[2].size();
  for (int e0 = 0; e0 < ne0; ++e0)
    for (int e1 = 0; e1 < ne1; ++e1)
      for (int e2 = 0; e2 < ne2; ++e2) {
        const auto& t0 = table_[0][e0];
        const auto& t1 = table_[1][e1];
        const auto& t2 = table_[2][e2];
        const int f0 = t0[0].first, f1 = t1[0].first, f2 = t2[0].first;
        const double vol = detJ * element_volume(e0, e1, e2);
        {
          int a = 0;
          for (int i = 0; i < nb1; ++i)
            for (int j = 0; j < nb1; ++j)
              for (int k = 0; k < nb1; ++k, ++a) {
                cps[a] = patch_.cp_index(f0 + i, f1 + j, f2 + k);
                xloc.row(a) = x.segment<3>(3 * cps[a]).transpose();
              }
        }
        Rloc.setZero();
        int qi = 0;
        for (int q0 = 0; q0 < nq1; ++q0)
          for (int q1 = 0; q1 < nq1; ++q1)
            for (int q2 = 0; q2 < nq1; ++q2, ++qi) {
              const auto &b0 = t0[q0], &b1 = t1[q1], &b2 = t2[q2];
              const double w = vol * volume_rule_.weights[q0] * volume_rule_.weights[q1] * volume_rule_.weights[q2];
              int a = 0;
              for (int i = 0; i < nb1; ++i)
                for (int j = 0; j < nb1; ++j)
                  for (int k = 0; k < nb1; ++k, ++a) {
                    const double v0 = b0.values[i], v1 = b1.values[j], v2 = b2.values[k];
                    N(a) = v0 * v1 * v2;
                    Gp(a, 0) = b0.d1[i] * v1 * v2;
                    Gp(a, 1) = v0 * b1.d1[j] * v2;
                    Gp(a, 2) = v0 * v1 * b2.d1[k];
                  }
              G.noalias() = Gp * Jinv;
              const Mat3 F = xloc.transpose() * G;
              Mat3 P;
              Tensor4 A;
              stress_and_tangent(mat, F, P, A);
              Rloc.noalias() += w * G * P.transpose();
              if (has_body) Rloc.noalias() -= w * N * body.transpose();
              if (with_tangent) {
                Gbig.middleCols(3 * qi, 3) = G;
                for (int pi = 0; pi < 6; ++pi) {
                  const int ii = pairs[pi][0], kk = pairs[pi][1];
                  const Mat3 M = w * A.block<3, 3>(3 * ii, 3 * kk);
                  T[pi].middleRows(3 * qi, 3).noalias() = M * G.transpose();
                }
              }
            }
        for (int a = 0; a < nb; ++a) sys.R.segment<3>(3 * cps[a]) += Rloc.row(a).transpose();
        if (!with_tangent) continue;

        for (int pi = 0; pi < 6; ++pi) {
          const int ii = pairs[pi][0], kk = pairs[pi][1];
          Kik.noalias() = Gbig * T[pi];
          int a = 0;
          for (int i = 0; i < nb1; ++i)
            for (int j = 0; j < nb1; ++j)
              for (int k = 0; k < nb1; ++k, ++a) {
                const int ai = f0 + i, aj = f1 + j, ak = f2 + k;
                const int lo0 = std::max(0, ai - p), lo1 = std::max(0, aj - p), lo2 = std::max(0, ak - p);
                const int w1 = std::min(c[1] - 1, aj + p) - lo1 + 1, w2 = std::min(c[2] - 1, ak + p) - lo2 + 1;
                const int base_i = vol_rowptr_[3 * cps[a] + ii];
                const int base_k = vol_rowptr_[3 * cps[a] + kk];
                int b = 0;
                for (int bi = 0; bi < nb1; ++bi)
                  for (int bj = 0; bj < nb1; ++bj)
                    for (int bk = 0; bk < nb1; ++bk, ++b) {
                      const int pos = 3 * (((f0 + bi - lo0) * w1 + (f1 + bj - lo1)) * w2 + (f2 + bk - lo2));
                      vals[base_i + pos + kk] += Kik(a, b);
                      if (ii != kk) vals[base_k + pos + ii] += Kik(b, a);
                    }
              }
        }
      }
}

void Model::assemble_fiber(const VecX& x, double lambda, int f, BlockSystem& sys, bool with_tangent) const {
  const FiberModel& fm = fibers_[f];
  const FiberDofs& fd = map_.fibers[f];
  const bool position_only = cfg_.solver.coupling == CouplingMode::PositionOnly;
  const bool area = fd.n_N > 0;
  const double C = fm.section.circumference();
  const auto& fc = fm.cfg;

  // Fiber-local numbering: touched matrix dofs, then the fiber's own unknowns.
  std::vector<int> glob;
  glob.reserve(3 * fm.touched_cps.size() + 16 * fd.n_R);
  for (int cp : fm.touched_cps)
    for (int c = 0; c < 3; ++c) glob.push_back(3 * cp + c);
  const int own_begin = static_cast<int>(glob.size());
  auto add_range = [&](int off, int n) {
    for (int i = 0; i < n; ++i) glob.push_back(off + i);
  };
  add_range(fd.phit, 3 * fd.n_R);
  add_range(fd.force, 3 * fd.n_M);
  add_range(fd.moment, 3 * fd.n_M);
  add_range(fd.quat, 4 * fd.n_R);
  add_range(fd.mun, 3 * fd.n_N);
  const int nloc = static_cast<int>(glob.size());
  auto local_of = [&](int g) -> int {
    if (g < 3 * map_.n_cp) {
      auto it = std::lower_bound(fm.touched_cps.begin(), fm.touched_cps.end(), g / 3);
      return 3 * static_cast<int>(it - fm.touched_cps.begin()) + g % 3;
    }
    if (g >= fd.phit && g < fd.phit + 3 * fd.n_R) return own_begin + (g - fd.phit);
    int base = own_begin + 3 * fd.n_R;
    if (g >= fd.force && g < fd.force + 3 * fd.n_M) return base + (g - fd.force);
    base += 3 * fd.n_M;
    if (g >= fd.moment && g < fd.moment + 3 * fd.n_M) return base + (g - fd.moment);
    base += 3 * fd.n_M;
    if (g >= fd.quat && g < fd.quat + 4 * fd.n_R) return base + (g - fd.quat);
    base += 4 * fd.n_R;
    return base + (g - fd.mun);
  };

  MatX Kf;
  if (with_tangent) Kf = MatX::Zero(nloc, nloc);

  KernelConst kc;
  kc.D = fm.D;
  kc.K1 = fm.section.K1(fm.D);
  kc.K2 = fm.section.K2(fm.D);
  kc.C = C;
  kc.mbar = lambda * fc.line_moment;
  kc.position_only = position_only;
  kc.area = area;
  const Vec3 nbar = lambda * fc.line_force;

  Eigen::Matrix<double, NZ, 1> z;
  Eigen::Matrix<double, NY, 1> y;
  Eigen::Matrix<double, NY, NZ> dy;
  MatX Zm, W;
  std::vector<int> cols;
  Eigen::Matrix<double, 1, NY> coef;

  // Primitive values and their linear dependence on the point's local unknowns.
  auto gather = [&](const BeamPoint& bp) {
    const auto& pe = bp.matrix;
    const int nA = pe.index.size();
    const int nR = bp.R.values.size(), nM = bp.M.values.size(), nN = area ? bp.N.values.size() : 0;
    const int ncol = 3 * nA + 3 * nR + 4 * nR + 6 * nM + 3 * nN;
    cols.resize(ncol);
    z.setZero();
    if (with_tangent) Zm = MatX::Zero(NZ, ncol);
    int col = 0;
    for (int a = 0; a < nA; ++a) {
      const Vec3 xa = x.segment<3>(3 * pe.index[a]);
      for (int k = 0; k < 3; ++k) {
        z(Z_PHIC + k) += pe.values[a] * xa(k);
        for (int L = 0; L < 3; ++L) z(Z_F + 3 * k + L) += xa(k) * pe.grads[a](L);
        cols[col] = local_of(3 * pe.index[a] + k);
        if (with_tangent) {
          Zm(Z_PHIC + k, col) = pe.values[a];
          for (int L = 0; L < 3; ++L) Zm(Z_F + 3 * k + L, col) = pe.grads[a](L);
        }
        ++col;
      }
    }
    for (int b = 0; b < nR; ++b) {
      const int B = bp.R.first + b;
      const double v = bp.R.values[b], d = bp.R.d1[b];
      for (int k = 0; k < 3; ++k) {
        const double c = x(fd.phit + 3 * B + k);
        z(Z_PHIT + k) += v * c;
        z(Z_DPHIT + k) += d * c;
        cols[col] = own_begin + 3 * B + k;
        if (with_tangent) Zm(Z_PHIT + k, col) = v, Zm(Z_DPHIT + k, col) = d;
        ++col;
      }
      for (int k = 0; k < 4; ++k) {
        const double c = x(fd.quat + 4 * B + k);
        z(Z_Q + k) += v * c;
        z(Z_DQ + k) += d * c;
        cols[col] = local_of(fd.quat + 4 * B + k);
        if (with_tangent) Zm(Z_Q + k, col) = v, Zm(Z_DQ + k, col) = d;
        ++col;
      }
    }
    for (int b = 0; b < nM; ++b) {
      const int B = bp.M.first + b;
      const double v = bp.M.values[b];
      for (int k = 0; k < 3; ++k) {
        z(Z_N + k) += v * x(fd.force + 3 * B + k);
        cols[col] = local_of(fd.force + 3 * B + k);
        if (with_tangent) Zm(Z_N + k, col) = v;
        ++col;
        z(Z_M + k) += v * x(fd.moment + 3 * B + k);
        cols[col] = local_of(fd.moment + 3 * B + k);
        if (with_tangent) Zm(Z_M + k, col) = v;
        ++col;
      }
    }
    for (int b = 0; b < nN; ++b) {
      const int B = bp.N.first + b;
      const double v = bp.N.values[b];
      for (int k = 0; k < 3; ++k) {
        z(Z_MU + k) += v * x(fd.mun + 3 * B + k);
        cols[col] = local_of(fd.mun + 3 * B + k);
        if (with_tangent) Zm(Z_MU + k, col) = v;
        ++col;
      }
    }
  };

  // Adds coef . y to R[row] and coef . dy/dx to the tangent row.
  auto emit = [&](int row) {
    sys.R(row) += coef.dot(y);
    if (!with_tangent) return;
    const int lr = local_of(row);
    const Eigen::Matrix<double, 1, Eigen::Dynamic> g = coef * W;
    for (int j = 0; j < g.size(); ++j) Kf(lr, cols[j]) += g(j);
  };

  auto evaluate = [&](const BeamPoint& bp) {
    gather(bp);
    eval_kernel(z, kc, with_tangent, y, dy);
    if (with_tangent) W.noalias() = dy * Zm;
  };

  for (const BeamPoint& bp : fm.points) {
    kc.m_end.setZero();
    evaluate(bp);
    const double w = bp.w;
    const auto& pe = bp.matrix;
    // Matrix rows.
    for (size_t a = 0; a < pe.index.size(); ++a) {
      const Vec3& g = pe.grads[a];
      const Mat3& H = pe.hessians[a];
      const double h0 = fm.D.D[0].dot(H * fm.D.D[2]), h1 = fm.D.D[1].dot(H * fm.D.D[2]);
      for (int i = 0; i < 3; ++i) {
        coef.setZero();
        for (int J = 0; J < 3; ++J) coef(Y_S + 3 * i + J) = w * g(J);
        coef(Y_V + i) = w * h0;
        coef(Y_V + 3 + i) = w * h1;
        const int row = 3 * pe.index[a] + i;
        emit(row);
        sys.R(row) -= w * pe.values[a] * nbar(i);
      }
    }
    // Mean-load rows tied to the centerline coefficients.
    for (size_t t = 0; t < bp.bar.rows.size(); ++t)
      for (int i = 0; i < 3; ++i) {
        coef.setZero();
        coef(Y_POS + i) = w * C * bp.bar.vals[t];
        emit(fd.phit + 3 * bp.bar.rows[t] + i);
      }
    // Resultant constitutive rows.
    for (size_t t = 0; t < bp.M.values.size(); ++t)
      for (int i = 0; i < 3; ++i) {
        const int B = bp.M.first + static_cast<int>(t);
        coef.setZero();
        coef(Y_RN + i) = w * bp.M.values[t];
        emit(fd.force + 3 * B + i);
        coef.setZero();
        coef(Y_RM + i) = w * bp.M.values[t];
        emit(fd.moment + 3 * B + i);
      }
    // Quaternion rows: unity plus torque constraint (or moment balance in position-only mode).
    for (size_t t = 0; t < bp.R.values.size(); ++t) {
      const int B = bp.R.first + static_cast<int>(t);
      if (cfg_.solver.newton.unity_mode == UnityMode::Weak) {
        coef.setZero();
        coef(Y_UNITY) = w * bp.R.values[t];
        emit(fd.quat + 4 * B);
      }
      if (position_only)
        for (int i = 0; i < 3; ++i) {
          coef.setZero();
          coef(Y_MOUT + i) = w * bp.R.d1[t];
          coef(Y_TOUT + i) = w * bp.R.values[t];
          emit(fd.quat + 4 * B + 1 + i);
        }
    }
    if (!position_only)
      for (size_t t = 0; t < bp.tau.rows.size(); ++t)
        for (int i = 0; i < 3; ++i) {
          coef.setZero();
          coef(Y_TAU + i) = w * C * bp.tau.vals[t];
          emit(fd.quat + 4 * bp.tau.rows[t] + 1 + i);
        }
    if (area)
      for (size_t t = 0; t < bp.N.values.size(); ++t)
        for (int i = 0; i < 3; ++i) {
          coef.setZero();
          coef(Y_AREA + i) = w * C * bp.N.values[t];
          emit(fd.mun + 3 * (bp.N.first + static_cast<int>(t)) + i);
        }
  }

  // End points: external loads with the f(L) - f(0) convention, optional explicit constraints.
  for (int e = 0; e < 2; ++e) {
    const BeamPoint& bp = fm.ends[e];
    const double sign = e == 1 ? 1.0 : -1.0;
    const Vec3 n_ext = lambda * (e == 1 ? fc.n_ext_end : fc.n_ext_start);
    const Vec3 m_ext = lambda * (e == 1 ? fc.m_ext_end : fc.m_ext_start);
    kc.m_end = m_ext;
    evaluate(bp);
    const auto& pe = bp.matrix;
    for (size_t a = 0; a < pe.index.size(); ++a)
      for (int i = 0; i < 3; ++i) {
        const int row = 3 * pe.index[a] + i;
        sys.R(row) -= sign * pe.values[a] * n_ext(i);
        if (!position_only && m_ext.squaredNorm() > 0.0) {
          coef.setZero();
          for (int J = 0; J < 3; ++J) coef(Y_SEND + 3 * i + J) = -sign * pe.grads[a](J);
          emit(row);
        }
      }
    if (position_only)
      for (size_t t = 0; t < bp.R.values.size(); ++t)
        for (int i = 0; i < 3; ++i)
          sys.R(fd.quat + 4 * (bp.R.first + static_cast<int>(t)) + 1 + i) -= sign * bp.R.values[t] * m_ext(i);
    if (endpoint_rows_) {
      const int a = e == 0 ? 0 : fd.n_R - 1;
      for (int i = 0; i < 3; ++i) {
        coef.setZero();
        coef(Y_POS + i) = C;
        emit(fd.phit + 3 * a + i);
        if (!position_only) {
          coef.setZero();
          coef(Y_TAU + i) = C;
          emit(fd.quat + 4 * a + 1 + i);
        }
      }
    }
  }

  if (cfg_.solver.newton.unity_mode == UnityMode::Direct)
    for (int a = 0; a < fd.n_R; ++a) {
      const Vec4 q = x.segment<4>(fd.quat + 4 * a);
      const int row = fd.quat + 4 * a;
      sys.R(row) += q.squaredNorm() - 1.0;
      if (with_tangent)
        for (int c = 0; c < 4; ++c) Kf(local_of(row), local_of(row + c)) += 2.0 * q(c);
    }

  if (!with_tangent) return;
  for (int j = 0; j < nloc; ++j)
    for (int i = 0; i < nloc; ++i)
      if (Kf(i, j) != 0.0) sys.triplets.emplace_back(glob[i], glob[j], Kf(i, j));
}

void Model::matrix_point(const VecX& x, const Vec3& X, Vec3& phi, Mat3& F) const {
  const PatchEval pe = eval_patch(patch_, locate_point(patch_, X), 1);
  phi.setZero();
  F.setZero();
  for (size_t a = 0; a < pe.index.size(); ++a) {
    const Vec3 xa = x.segment<3>(3 * pe.index[a]);
    phi += pe.values[a] * xa;
    F += xa * pe.grads[a].transpose();
  }
}

double Model::element_volume(int e0, int e1, int e2) const {
  return elen_[0][e0] * elen_[1][e1] * elen_[2][e2] / 8.0;
}

// Calls fn(w, F) at every volume quadrature point.
template <class Fn>
void Model::for_each_volume_point(const VecX& x, Fn&& fn) const {
  const Mat3 Jinv = patch_.jac.inverse();
  const double detJ = patch_.jac.determinant();
  const int nb1 = cfg_.solver.orders.matrix() + 1;
  const int nq1 = volume_rule_.points.size();
  const auto& wq = volume_rule_.weights;
  for (size_t e0 = 0; e0 < table_[0].size(); ++e0)
    for (size_t e1 = 0; e1 < table_[1].size(); ++e1)
      for (size_t e2 = 0; e2 < table_[2].size(); ++e2) {
        const auto &t0 = table_[0][e0], &t1 = table_[1][e1], &t2 = table_[2][e2];
        const double vol = detJ * element_volume(e0, e1, e2);
        for (int q0 = 0; q0 < nq1; ++q0)
          for (int q1 = 0; q1 < nq1; ++q1)
            for (int q2 = 0; q2 < nq1; ++q2) {
              Mat3 F = Mat3::Zero();
              for (int i = 0; i < nb1; ++i)
                for (int j = 0; j < nb1; ++j)
                  for (int k = 0; k < nb1; ++k) {
                    const double v0 = t0[q0].values[i], v1 = t1[q1].values[j], v2 = t2[q2].values[k];
                    const Vec3 gp(t0[q0].d1[i] * v1 * v2, v0 * t1[q1].d1[j] * v2, v0 * v1 * t2[q2].d1[k]);
                    const int cp = patch_.cp_index(t0[q0].first + i, t1[q1].first + j, t2[q2].first + k);
                    F += x.segment<3>(3 * cp) * (Jinv.transpose() * gp).transpose();
                  }
              fn(vol * wq[q0] * wq[q1] * wq[q2], F);
            }
      }
}

double Model::matrix_energy(const VecX& x) const {
  const MaterialModel& mat = cfg_.matrix.material;
  const double psi0 = fibersolve::energy(mat, Mat3::Identity());
  double total = 0.0;
  for_each_volume_point(x, [&](double w, const Mat3& F) { total += w * (fibersolve::energy(mat, F) - psi0); });
  return total;
}

EnergySplit Model::energy(const VecX& x) const {
  EnergySplit e;
  e.matrix = matrix_energy(x);
  for (size_t f = 0; f < fibers_.size(); ++f) {
    const auto& fm = fibers_[f];
    const auto& fd = map_.fibers[f];
    for (const auto& bp : fm.points) {
      Vec3 dphi = Vec3::Zero();
      Vec4 q = Vec4::Zero(), dq = Vec4::Zero();
      for (size_t b = 0; b < bp.R.values.size(); ++b) {
        const int B = bp.R.first + static_cast<int>(b);
        dphi += bp.R.d1[b] * x.segment<3>(fd.phit + 3 * B);
        q += bp.R.values[b] * x.segment<4>(fd.quat + 4 * B);
        dq += bp.R.d1[b] * x.segment<4>(fd.quat + 4 * B);
      }
      const Mat3 R = quat_to_rotation<double>(q);
      const Mat3 dR = quat_rotation_derivative<double>(q, dq);
      const auto [g, k] = beam_strains(R, dphi, dR, fm.D.D[2]);
      e.beams += bp.w * beam_energy(g, k, fm.section, fm.D);
    }
  }
  return e;
}

Mat3 Model::average_piola(const VecX& x) const {
  const MaterialModel& mat = cfg_.matrix.material;
  Mat3 total = Mat3::Zero();
  double volume = 0.0;
  for_each_volume_point(x, [&](double w, const Mat3& F) {
    total += w * first_pk(mat, F);
    volume += w;
  });
  return total / volume;
}

Model::CenterlineSample Model::sample(const VecX& x, int f, double s) const {
  const auto& fm = fibers_[f];
  const auto& fd = map_.fibers[f];
  CenterlineSample out{s, Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec4::Zero()};
  const BasisEval R = eval_basis(fm.kvR, s, 0), M = eval_basis(fm.kvM, s, 0);
  for (size_t b = 0; b < R.values.size(); ++b) {
    const int B = R.first + static_cast<int>(b);
    out.phi += R.values[b] * x.segment<3>(fd.phit + 3 * B);
    out.q += R.values[b] * x.segment<4>(fd.quat + 4 * B);
  }
  for (size_t b = 0; b < M.values.size(); ++b) {
    const int B = M.first + static_cast<int>(b);
    out.n += M.values[b] * x.segment<3>(fd.force + 3 * B);
    out.m += M.values[b] * x.segment<3>(fd.moment + 3 * B);
  }
  if (fd.n_N > 0) {
    const BasisEval N = eval_basis(fm.kvN, s, 0);
    for (size_t b = 0; b < N.values.size(); ++b)
      out.mun += N.values[b] * x.segment<3>(fd.mun + 3 * (N.first + static_cast<int>(b)));
  }
  return out;
}

std::vector<Model::PointConstraint> Model::constraint_report(const VecX& x, int f) const {
  const auto& fm = fibers_[f];
  const auto& fd = map_.fibers[f];
  std::vector<PointConstraint> out;
  for (const auto& bp : fm.points) {
    Vec3 phic = Vec3::Zero(), phit = Vec3::Zero();
    Mat3 F = Mat3::Zero();
    for (size_t a = 0; a < bp.matrix.index.size(); ++a) {
      const Vec3 xa = x.segment<3>(3 * bp.matrix.index[a]);
      phic += bp.matrix.values[a] * xa;
      F += xa * bp.matrix.grads[a].transpose();
    }
    Vec4 q = Vec4::Zero();
    for (size_t b = 0; b < bp.R.values.size(); ++b) {
      const int B = bp.R.first + static_cast<int>(b);
      phit += bp.R.values[b] * x.segment<3>(fd.phit + 3 * B);
      q += bp.R.values[b] * x.segment<4>(fd.quat + 4 * B);
    }
    const CouplingFrame fr = build_frame(quat_to_rotation(q), Mat3::Zero(), fm.D, fm.section.circumference());
    const ConstraintDensities g = constraint_densities(fr, phic, phit, F);
    out.push_back({bp.s, g.pos, g.tau, g.area});
  }
  return out;
}

Mat3 average_piola(const Model& model, const VecX& x) { return model.average_piola(x); }

ReducedSystem apply_dirichlet(const BlockSystem& sys, const Model& model) {
  const DofMap& map = model.dofs();
  ReducedSystem red;
  red.start = map.free_start;
  const int nf = map.num_free();
  red.R.resize(nf);
  for (int i = 0; i < map.size(); ++i)
    if (map.free_index[i] >= 0) red.R(map.free_index[i]) = sys.R(i);

  if (sys.has_tangent) {
    // Merge the volume CSR with the sorted line triplets, keeping free rows and columns only.
    SpMatR B(sys.Kvol.rows(), sys.Kvol.cols());
    B.setFromTriplets(sys.triplets.begin(), sys.triplets.end());
    const SpMatR& A = sys.Kvol;
    std::vector<int> rowptr(nf + 1, 0);
    std::vector<int> cols;
    std::vector<double> vals;
    cols.reserve(A.nonZeros() + B.nonZeros());
    vals.reserve(A.nonZeros() + B.nonZeros());
    for (int r = 0; r < A.outerSize(); ++r) {
      const int fr = map.free_index[r];
      if (fr < 0) continue;
      SpMatR::InnerIterator ia(A, r), ib(B, r);
      while (ia || ib) {
        int c;
        double v;
        if (ia && (!ib || ia.col() < ib.col())) {
          c = ia.col(), v = ia.value(), ++ia;
        } else if (ib && (!ia || ib.col() < ia.col())) {
          c = ib.col(), v = ib.value(), ++ib;
        } else {
          c = ia.col(), v = ia.value() + ib.value(), ++ia, ++ib;
        }
        const int fc = map.free_index[c];
        if (fc < 0) continue;
        cols.push_back(fc);
        vals.push_back(v);
      }
      rowptr[fr + 1] = static_cast<int>(cols.size());
    }
    red.K.resize(nf, nf);
    red.K.resizeNonZeros(cols.size());
    std::copy(rowptr.begin(), rowptr.end(), red.K.outerIndexPtr());
    std::copy(cols.begin(), cols.end(), red.K.innerIndexPtr());
    std::copy(vals.begin(), vals.end(), red.K.valuePtr());
  }

  auto free_range = [&](int off, int n, int out[2]) {
    int lo = -1, hi = -1;
    for (int i = off; i < off + n; ++i)
      if (map.free_index[i] >= 0) {
        if (lo < 0) lo = map.free_index[i];
        hi = map.free_index[i] + 1;
      }
    out[0] = lo < 0 ? 0 : lo;
    out[1] = lo < 0 ? 0 : hi;
  };
  for (const auto& fd : map.fibers) {
    ReducedSystem::FiberRanges fr;
    free_range(fd.phit, 3 * fd.n_R, fr.phit);
    free_range(fd.force, 3 * fd.n_M, fr.force);
    free_range(fd.moment, 3 * fd.n_M, fr.moment);
    red.fibers.push_back(fr);
  }
  return red;
}

}  // namespace fibersolve
