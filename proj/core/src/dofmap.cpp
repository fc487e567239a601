#include "fibersolve/dofmap.hpp"

#include <algorithm>

namespace fibersolve {

const char* block_name(int b) {
  static const char* names[] = {"phi", "phi_t", "force", "moment", "quat", "mu_n"};
  return names[b];
}

int DofMap::block_of(int dof) const {
  for (int b = 0; b < NUM_BLOCKS; ++b)
    if (dof < start[b + 1]) return b;
  return NUM_BLOCKS - 1;
}

void DofMap::finalize() {
  free_index.assign(size(), -1);
  int k = 0;
  for (int b = 0; b < NUM_BLOCKS; ++b) {
    free_start[b] = k;
    for (int i = start[b]; i < start[b + 1]; ++i)
      if (!fixed[i]) free_index[i] = k++;
  }
  free_start[NUM_BLOCKS] = k;
}

RowEval FiberModel::interior_rows(const KnotVector& kv, double s) const {
  BasisEval b = eval_basis(kv, s, 1);
  RowEval r;
  const int shift = endpoint_rows ? 1 : 0;
  for (size_t i = 0; i < b.values.size(); ++i) {
    r.rows.push_back(b.first + static_cast<int>(i) + shift);
    r.vals.push_back(b.values[i]);
    r.ders.push_back(b.d1[i]);
  }
  return r;
}

FiberModel build_fiber(const FiberConfig& cfg, const OrderLadder& orders, bool endpoint_rows, int quad_points,
                       const Patch3D& patch) {
  FiberModel f;
  f.cfg = cfg;
  f.L = cfg.length();
  f.X0 = cfg.start;
  f.axis = (cfg.end - cfg.start) / f.L;
  f.D = cfg.d1 ? Directors::from_axis(f.axis, *cfg.d1) : Directors::from_axis(f.axis);
  f.section = BeamSection::circular(cfg.E, cfg.nu, cfg.radius);
  f.endpoint_rows = endpoint_rows;
  const int p = orders.centerline();
  f.kvR = open_knot_vector(p, cfg.elements, 0.0, f.L);
  f.kvM = open_knot_vector(orders.force(), cfg.elements, 0.0, f.L);
  f.kvBar = open_knot_vector(orders.mu_bar(), cfg.elements, 0.0, f.L);
  f.kvTau = open_knot_vector(orders.mu_tau(), cfg.elements, 0.0, f.L);
  f.kvN = open_knot_vector(orders.mu_n(), cfg.elements, 0.0, f.L);

  auto make_point = [&](double s, double w) {
    BeamPoint bp;
    bp.s = s;
    bp.w = w;
    bp.R = eval_basis(f.kvR, s, 1);
    bp.M = eval_basis(f.kvM, s, 0);
    bp.N = eval_basis(f.kvN, s, 0);
    bp.bar = f.interior_rows(f.kvBar, s);
    bp.tau = f.interior_rows(f.kvTau, s);
    Vec3 xi;
    try {
      xi = locate_point(patch, f.reference_position(s), 1e-9);
    } catch (const Error&) {
      throw Error(ErrorCode::FiberOutsidePatch, "fiber point at s = " + std::to_string(s) + " lies outside the matrix");
    }
    bp.matrix = eval_patch(patch, xi, 2);
    return bp;
  };

  const int nq = quad_points > 0 ? quad_points : p + 1;
  const QuadratureRule q = gauss_legendre(nq);
  const auto br = f.kvR.breaks();
  for (size_t e = 0; e + 1 < br.size(); ++e) {
    const double a = br[e], b = br[e + 1], h = 0.5 * (b - a);
    for (int k = 0; k < nq; ++k) f.points.push_back(make_point(a + h * (q.points[k] + 1.0), h * q.weights[k]));
  }
  f.ends[0] = make_point(0.0, 1.0);
  f.ends[1] = make_point(f.L, 1.0);

  std::vector<int> cps;
  for (const auto& bp : f.points) cps.insert(cps.end(), bp.matrix.index.begin(), bp.matrix.index.end());
  for (const auto& bp : f.ends) cps.insert(cps.end(), bp.matrix.index.begin(), bp.matrix.index.end());
  std::sort(cps.begin(), cps.end());
  cps.erase(std::unique(cps.begin(), cps.end()), cps.end());
  f.touched_cps = std::move(cps);
  return f;
}

DofMap build_dof_map(const CaseConfig& cfg) {
  cfg.validate();
  const auto& o = cfg.solver.orders;
  const bool with_mun = cfg.solver.coupling == CouplingMode::Full && cfg.solver.area_constraint;
  DofMap map;
  const auto& me = cfg.matrix.elements;
  const int c0 = me[0] + o.matrix(), c1 = me[1] + o.matrix(), c2 = me[2] + o.matrix();
  map.n_cp = c0 * c1 * c2;

  const int p = o.centerline();
  for (const auto& fc : cfg.fibers) {
    FiberDofs fd;
    fd.n_R = fc.elements + p;
    fd.n_M = fc.elements + o.force();
    fd.n_bar = fc.elements + o.mu_bar();
    fd.n_tau = fc.elements + o.mu_tau();
    fd.n_N = with_mun ? fc.elements + o.mu_n() : 0;
    map.fibers.push_back(fd);
  }
  // Block-major layout: all fibers' coefficients of a kind are contiguous.
  int k = 0;
  map.start[PHI] = k;
  k += 3 * map.n_cp;
  map.start[PHIT] = k;
  for (auto& fd : map.fibers) fd.phit = k, k += 3 * fd.n_R;
  map.start[FORCE] = k;
  for (auto& fd : map.fibers) fd.force = k, k += 3 * fd.n_M;
  map.start[MOMENT] = k;
  for (auto& fd : map.fibers) fd.moment = k, k += 3 * fd.n_M;
  map.start[QUAT] = k;
  for (auto& fd : map.fibers) fd.quat = k, k += 4 * fd.n_R;
  map.start[MUN] = k;
  for (auto& fd : map.fibers) fd.mun = k, k += 3 * fd.n_N;
  map.start[NUM_BLOCKS] = k;
  map.fixed.assign(k, 0);

  auto on_face = [&](int i, int j, int kk, int face) {
    const int idx[3] = {i, j, kk};
    const int cnt[3] = {c0, c1, c2};
    const int d = face / 2;
    return (face % 2 == 0) ? idx[d] == 0 : idx[d] == cnt[d] - 1;
  };
  std::vector<int> faces = cfg.matrix.fixed_faces;
  faces.insert(faces.end(), cfg.matrix.displaced_faces.begin(), cfg.matrix.displaced_faces.end());
  faces.insert(faces.end(), cfg.matrix.gradient_faces.begin(), cfg.matrix.gradient_faces.end());
  for (int i = 0; i < c0; ++i)
    for (int j = 0; j < c1; ++j)
      for (int kk = 0; kk < c2; ++kk)
        for (int face : faces)
          if (on_face(i, j, kk, face)) {
            const int a = (i * c1 + j) * c2 + kk;
            for (int c = 0; c < 3; ++c) map.set_fixed(3 * a + c);
          }

  for (size_t f = 0; f < cfg.fibers.size(); ++f) {
    const auto& fc = cfg.fibers[f];
    const auto& fd = map.fibers[f];
    auto clamp = [&](int a) {
      for (int c = 0; c < 3; ++c) map.set_fixed(fd.phit + 3 * a + c);
      for (int c = 0; c < 4; ++c) map.set_fixed(fd.quat + 4 * a + c);
    };
    if (fc.clamp_start) clamp(0);
    if (fc.clamp_end) clamp(fd.n_R - 1);
    if (fd.n_N > 0)
      for (int c = 0; c < 3; ++c) map.set_fixed(fd.mun + c);
  }
  map.finalize();
  return map;
}

}  // namespace fibersolve
