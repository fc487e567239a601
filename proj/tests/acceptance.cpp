// Acceptance run: prints one PASS/FAIL line per criterion, exits non-zero if any fails.
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "fd_check.hpp"
#include "fibersolve/beam.hpp"
#include "fibersolve/coupling.hpp"
#include "fibersolve/runner.hpp"
#include "fibersolve/solver.hpp"

using namespace fibersolve;
using namespace fibersolve::test;

namespace {

constexpr double kTipTarget = 0.19078898128;
constexpr std::array<int, 8> kEndpointLadder = {4, 4, 4, 3, 3, 2, 2, 2};
constexpr std::array<int, 8> kCondensedLadder = {4, 4, 4, 3, 3, 4, 4, 2};

std::map<int, std::pair<bool, std::string>> results;

void verdict(int id, bool pass, const std::string& detail) {
  results[id] = {pass, detail};
  std::fprintf(stderr, "criterion %d %s\n", id, pass ? "PASS" : "FAIL");
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Solved {
  CaseConfig cfg;
  std::unique_ptr<Model> model;
  VecX x;
  SolveReport report;
  double seconds = 0.0;
};

Solved solve(const CaseConfig& c) {
  Solved s;
  s.cfg = c;
  const auto t0 = std::chrono::steady_clock::now();
  s.model = std::make_unique<Model>(c);
  s.x = s.model->reference_state();
  s.report = load_stepper(*s.model, s.x);
  s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::fprintf(stderr, "  solved %s %dx%dx%d in %.1f s, converged %d %s\n", c.output.name.c_str(), c.matrix.elements[0],
               c.matrix.elements[1], c.matrix.elements[2], s.seconds, s.report.converged, s.report.message.c_str());
  return s;
}

CaseConfig bending_mesh(int nx, int ny) {
  CaseConfig c = presets::bending();
  c.matrix.elements = {nx, ny, ny};
  c.fibers[0].elements = nx;
  return c;
}

void guarded(int id, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    verdict(id, false, std::string("exception: ") + e.what());
  }
}

void criterion_1_2_5_6() {
  Solved base;
  guarded(1, [&] {
    base = solve(bending_mesh(20, 4));
    const Solved fine = solve(bending_mesh(40, 8));
    const double t1 = base.report.tip_magnitude, t2 = fine.report.tip_magnitude;
    const double e1 = std::abs(t1 - kTipTarget) / kTipTarget, e2 = std::abs(t2 - kTipTarget) / kTipTarget;
    const bool ok = base.report.converged && fine.report.converged && e1 <= 0.02 && e2 < e1;
    verdict(1, ok, fmt("tip 4x4x20 = %.8f (%.3f%% off), 8x8x40 = %.8f (%.3f%% off), target %.8f", t1, 100 * e1, t2,
                       100 * e2, kTipTarget));
  });

  guarded(2, [&] {
    if (!base.model) base = solve(bending_mesh(20, 4));
    CaseConfig direct = base.cfg;
    direct.solver.newton.unity_mode = UnityMode::Direct;
    CaseConfig cond = base.cfg;
    cond.solver.orders.p = kCondensedLadder;
    const Solved d = solve(direct), c = solve(cond);
    const double t0 = base.report.tip_magnitude;
    const double dd = 100 * std::abs(d.report.tip_magnitude - t0) / t0;
    const double dc = 100 * std::abs(c.report.tip_magnitude - t0) / t0;
    const bool ok = base.report.converged && d.report.converged && c.report.converged && dd <= 5e-3 && dc <= 5e-3;
    verdict(2, ok, fmt("weak/EP %.10f, direct %.10f (%.2e %%), condensed %.10f (%.2e %%)", t0, d.report.tip_magnitude,
                       dd, c.report.tip_magnitude, dc));
  });

  guarded(5, [&] {
    if (!base.report.converged) throw std::runtime_error("bending benchmark did not converge");
    const auto& r = base.report.residuals.back();
    if (r.size() < 3) throw std::runtime_error("too few iterations to fit a rate");
    const double rk = r[r.size() - 2], rk1 = r.back();
    const double C = rk1 / (rk * rk), bound = 1e2 / r.front();
    std::string hist;
    for (double v : r) hist += fmt(" %.2e", v);
    verdict(5, C <= bound, fmt("C = %.3e <= %.3e; history%s", C, bound, hist.c_str()));
  });

  guarded(6, [&] {
    if (!base.report.converged) throw std::runtime_error("bending benchmark did not converge");
    const double L = base.model->fibers()[0].L;
    double pos = 0, tau = 0, area = 0;
    for (const auto& p : base.model->constraint_report(base.x, 0)) {
      pos = std::max(pos, p.pos.norm());
      tau = std::max(tau, p.tau.cwiseAbs().maxCoeff());
      area = std::max(area, p.area.cwiseAbs().maxCoeff());
    }
    const bool ok = pos <= 1e-9 * L && tau <= 1e-8 && area <= 1e-8;
    verdict(6, ok, fmt("max |phi_c - phi~| = %.2e (bound %.2e), tau density %.2e, area density %.2e (bound 1e-8)", pos,
                       1e-9 * L, tau, area));
  });
}

void criterion_3() {
  guarded(3, [&] {
    const CaseConfig base = small_coupled_case();  // 4x2x2 elements along the fiber, one fiber
    std::vector<std::pair<std::string, CaseConfig>> variants;
    CaseConfig cond = base;
    cond.solver.orders.p = kCondensedLadder;
    variants.push_back({"condensed", cond});
    CaseConfig ep = base;
    ep.solver.orders.p = kEndpointLadder;
    variants.push_back({"endpoint", ep});
    CaseConfig direct = ep;
    direct.solver.newton.unity_mode = UnityMode::Direct;
    variants.push_back({"direct unity", direct});
    double worst = 0;
    std::string where;
    for (const auto& [name, c] : variants) {
      const Model m(c);
      std::string w;
      const double e = max_block_error(tangent_block_errors(m, perturbed_state(m)), &w);
      if (e >= worst) worst = e, where = name + " " + w;
    }
    verdict(3, worst <= 1e-6, fmt("worst relative block error %.2e (%s)", worst, where.c_str()));
  });
}

void criterion_4() {
  guarded(4, [&] {
    double worst = 0;
    int largest = 0;
    CaseConfig c = small_coupled_case();
    c.matrix.elements = {2, 1, 1};
    for (auto ladder : {std::array<int, 8>{3, 3, 3, 2, 2, 3, 3, 1}, std::array<int, 8>{3, 3, 3, 2, 2, 1, 1, 1},
                        std::array<int, 8>{4, 4, 4, 3, 3, 2, 2, 2}}) {
      c.solver.orders.p = ladder;
      for (int nf : {2, 3}) {
        c.fibers[0].elements = nf;
        const Model m(c);
        if (m.dofs().num_free() > 500) continue;
        const ReducedSystem r = apply_dirichlet(m.assemble(perturbed_state(m), 1.0), m);
        const VecX direct = MatX(r.K).partialPivLu().solve(-r.R);
        const VecX red = newton_update(r, true);
        worst = std::max(worst, (red - direct).cwiseAbs().maxCoeff() / std::max(1.0, direct.cwiseAbs().maxCoeff()));
        largest = std::max(largest, m.dofs().num_free());
      }
    }
    verdict(4, largest > 0 && worst <= 1e-10,
            fmt("max |reduced - dense| = %.2e relative, largest instance %d dofs", worst, largest));
  });
}

void criterion_7() {
  guarded(7, [&] {
    CaseConfig c = presets::torsion();
    const Solved on = solve(c);
    c.solver.coupling = CouplingMode::PositionOnly;
    const Solved off = solve(c);
    if (!on.report.converged || !off.report.converged) throw std::runtime_error("torsion did not converge");
    const double e_on = on.model->matrix_energy(on.x), e_off = off.model->matrix_energy(off.x);
    const double L = on.model->fibers()[0].L;
    const double m1 = on.model->sample(on.x, 0, L).m[0];
    double lateral = 0;
    for (int i = 0; i <= 100; ++i) {
      const auto s = on.model->sample(on.x, 0, L * i / 100.0);
      const double l = std::max({std::abs(s.n[1]), std::abs(s.n[2]), std::abs(s.m[1]), std::abs(s.m[2])});
      lateral = std::max(lateral, l / std::abs(s.m[0]));
    }
    const double ratio = e_off / e_on, m1err = std::abs(m1 - 0.9) / 0.9;
    const bool ok = ratio <= 1e-10 && m1err <= 1e-6 && lateral <= 1e-6;
    verdict(7, ok, fmt("energy ratio %.2e, m1(L) = %.10f (rel err %.2e), max lateral/|m1| = %.2e", ratio, m1, m1err,
                       lateral));
  });
}

// Richardson-extrapolated central difference, O(h^4).
template <class Fn>
Mat3 derivative(Fn&& f, double s, double h = 2e-3) {
  auto c = [&](double k) { return Mat3((f(s + k) - f(s - k)) / (2 * k)); };
  return (4.0 * c(h / 2) - c(h)) / 3.0;
}

void criterion_8() {
  guarded(8, [&] {
    const int n = 1000;
    double e_sigma = 0, e_axl = 0, e_sym = 0, e_dP = 0, e_defg = 0;
    for (int t = 0; t < n; ++t) {
      const Directors D = Directors::from_axis(random_vec());
      const Mat3 R0 = random_rotation();
      const Vec3 w = random_vec(), w2 = random_vec();
      auto R = [&](double s) { return Mat3(R0 * Mat3(s * spin(w) + s * s * spin(w2)).exp()); };
      const double s = uniform();
      const Mat3 dR = derivative(R, s);
      const CouplingFrame f = build_frame(R(s), dR, D, 1.0);

      const Vec3 tau = random_vec(), mu = random_vec();
      const Mat3 S = sigma_assemble(f, tau, mu);
      e_sigma = std::max(e_sigma, rel_err_mat(S, sigma_matrix_form(f, tau, mu)));
      Mat3 d;
      for (int i = 0; i < 3; ++i) d.col(i) = f.d[i];
      e_axl = std::max(e_axl, (d.transpose() * axl(Mat3(S * f.R.transpose())) - tau).cwiseAbs().maxCoeff());

      const Mat3 sym = mu_n_sym(f, mu);
      e_sym = std::max({e_sym, (sym - sym.transpose()).cwiseAbs().maxCoeff(),
                        rel_err_mat(sym, mu_n_sym_reference<double>(f.D, mu))});

      for (int a = 0; a < 2; ++a) {
        auto P = [&](double r) { return build_frame(R(r), Mat3::Zero(), D, 1.0).P[a]; };
        e_dP = std::max(e_dP, rel_err_mat(derivative(P, s), f.dP[a]));
      }

      const Vec3 dphi = random_vec();
      const Eigen::Vector2d th(uniform(), uniform());
      auto [g, k] = beam_strains(R(s), dphi, dR, D.D[2]);
      e_defg = std::max(e_defg, rel_err_mat(beam_def_gradient(g, k, th, R(s), D),
                                            beam_def_gradient_direct(dphi, R(s), dR, th, D)));
    }
    const double worst = std::max({e_sigma, e_axl, e_sym, e_dP, e_defg});
    verdict(8, worst <= 1e-10,
            fmt("%d trials: sigma %.1e, axl %.1e, mu_n sym %.1e, dP %.1e, beam F %.1e", n, e_sigma, e_axl, e_sym, e_dP,
                e_defg));
  });
}

void criterion_9() {
  guarded(9, [&] {
    // Constant-field oracle on a fiber-free patch.
    CaseConfig plain = presets::rve();
    plain.fibers.clear();
    plain.matrix.elements = {2, 2, 2};
    const Solved p = solve(plain);
    const Mat3 Fb = plain.matrix.boundary_gradient;
    const Mat3 P0 = first_pk(plain.matrix.material, Fb);
    const double e_const = (p.model->average_piola(p.x) - P0).cwiseAbs().maxCoeff() / P0.cwiseAbs().maxCoeff();

    const Solved r = solve(presets::rve());
    const Mat3 P = r.model->average_piola(r.x);
    // Small-strain shear response follows the symmetric part of the applied gradient.
    const Mat3 eps = 0.5 * (Fb + Fb.transpose()) - Mat3::Identity();
    int matched = 0;
    std::string signs;
    for (auto [i, j] : {std::pair{0, 1}, std::pair{0, 2}, std::pair{1, 2}}) {
      const bool same = (P(i, j) > 0) == (eps(i, j) > 0) && (P(j, i) > 0) == (eps(i, j) > 0);
      matched += same;
      signs += fmt(" P%d%d=%+.3e/P%d%d=%+.3e vs %+.1e", i + 1, j + 1, P(i, j), j + 1, i + 1, P(j, i), eps(i, j));
    }
    const bool ok = p.report.converged && r.report.converged && e_const <= 1e-9 && matched == 3;
    verdict(9, ok, fmt("6^3/3-fiber run converged %d in %d iterations; constant-field error %.2e; shear signs%s",
                       r.report.converged, r.report.iterations.empty() ? 0 : r.report.iterations.back(), e_const,
                       signs.c_str()));
  });
}

void criterion_10() {
  guarded(10, [&] {
    const CaseConfig c = bending_mesh(10, 2);
    const Mat3 Q = random_rotation();
    const Solved a = solve(c), b = solve(rotate_case(c, Q));
    if (!a.report.converged || !b.report.converged) throw std::runtime_error("bending did not converge");
    const double ea = a.model->energy(a.x).total(), eb = b.model->energy(b.x).total();
    const double de = std::abs(ea - eb) / std::abs(ea);
    const double dt = std::abs(a.report.tip_magnitude - b.report.tip_magnitude) / a.report.tip_magnitude;
    verdict(10, de <= 1e-9 && dt <= 1e-9,
            fmt("energy %.12e vs %.12e (%.1e), tip %.12f vs %.12f (%.1e)", ea, eb, de, a.report.tip_magnitude,
                b.report.tip_magnitude, dt));
  });
}

}  // namespace

int main() {
  criterion_1_2_5_6();
  criterion_3();
  criterion_4();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  int failures = 0;
  for (int id = 1; id <= 10; ++id) {
    const auto it = results.find(id);
    const bool pass = it != results.end() && it->second.first;
    std::printf("criterion %2d %s: %s\n", id, pass ? "PASS" : "FAIL",
                it != results.end() ? it->second.second.c_str() : "not evaluated");
    failures += !pass;
  }
  std::printf("%d of 10 criteria passed\n", 10 - failures);
  return failures == 0 ? 0 : 1;
}
