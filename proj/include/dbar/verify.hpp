#pragma once

// The machine-checkable invariant battery behind the `verify` command. Each
// check measures one number and compares it against a fixed threshold; the
// table serializes to CSV and any failure flips the exit code.

#include <complex>

#include "dbar/csv.hpp"
#include "dbar/random_fields.hpp"
#include "dbar/spectrum.hpp"

namespace dbar {

struct CheckRow {
  std::string suite, name;
  double value = 0, threshold = 0;
  bool pass = false;
  bool less_than = true;  // pass means value < threshold (or >= for lower bounds)
};

class CheckTable {
 public:
  void expect_below(const std::string& suite, const std::string& name,
                    double value, double threshold) {
    rows_.push_back({suite, name, value, threshold, value < threshold, true});
  }
  void expect_above(const std::string& suite, const std::string& name,
                    double value, double threshold) {
    rows_.push_back({suite, name, value, threshold, value > threshold, false});
  }
  void expect_true(const std::string& suite, const std::string& name, bool ok) {
    rows_.push_back({suite, name, ok ? 1.0 : 0.0, 0.5, ok, false});
  }
  bool all_pass() const {
    for (const CheckRow& r : rows_)
      if (!r.pass) return false;
    return true;
  }
  const std::vector<CheckRow>& rows() const { return rows_; }

  void write_csv(std::ostream& os, const std::vector<std::string>& meta) const {
    write_provenance(os, meta);
    os << "suite,check,value,threshold,status\n";
    for (const CheckRow& r : rows_)
      os << r.suite << ',' << r.name << ',' << fmt(r.value) << ','
         << fmt(r.threshold) << ',' << (r.pass ? "pass" : "FAIL") << '\n';
  }

 private:
  std::vector<CheckRow> rows_;
};

// real 4x4 representation of a random element of U(2) acting on C² = R⁴
inline Mat random_unitary4(SplitMix64& rng) {
  using C = std::complex<double>;
  C a(rng.gaussian(), rng.gaussian()), c(rng.gaussian(), rng.gaussian());
  const double n1 = std::sqrt(std::norm(a) + std::norm(c));
  a /= n1;
  c /= n1;
  C b(rng.gaussian(), rng.gaussian()), d(rng.gaussian(), rng.gaussian());
  const C proj = std::conj(a) * b + std::conj(c) * d;
  b -= proj * a;
  d -= proj * c;
  const double n2 = std::sqrt(std::norm(b) + std::norm(d));
  b /= n2;
  d /= n2;
  Mat U(4, 4);
  auto put = [&](int bi, int bj, C z) {
    U[2 * bi][2 * bj] = z.real();
    U[2 * bi][2 * bj + 1] = -z.imag();
    U[2 * bi + 1][2 * bj] = z.imag();
    U[2 * bi + 1][2 * bj + 1] = z.real();
  };
  put(0, 0, a);
  put(0, 1, b);
  put(1, 0, c);
  put(1, 1, d);
  return U;
}

inline MapField apply_linear_to_field(const MapField& f, const Mat& U) {
  MapField g = f;
  g.analytic_tangent = nullptr;
  for (int is = 0; is < f.grid.n_s; ++is)
    for (int ith = 0; ith < f.grid.n_theta; ++ith)
      g.set_node(is, ith, matvec(U, f.node(is, ith)));
  return g;
}

namespace verify_detail {

inline double max_abs_diff(const Ten3& a, const Ten3& b) {
  double m = 0;
  for (int i = 0; i < a.n; ++i)
    for (int j = 0; j < a.n; ++j)
      for (int k = 0; k < a.n; ++k)
        m = std::max(m, std::fabs(a(i, j, k) - b(i, j, k)));
  return m;
}

inline Vec random_hopf_point(SplitMix64& rng) {
  Vec y(4);
  do {
    for (int i = 0; i < 4; ++i) y[i] = rng.uniform(-2.0, 2.0);
  } while (y.norm() < 0.3);
  return y;
}

inline void geom_suite(CheckTable& t, SplitMix64& rng, int npoints) {
  struct Entry {
    std::string name;
    ChartGeometry geom;
    std::function<Vec()> sample;
    bool curved;
  };
  const ModelPtr hopf = hopf_surface_target(2.0);
  const ModelPtr sphere = round_sphere_model(1.0);
  std::vector<Entry> entries;
  entries.push_back({"euclidean4", euclidean_model(4)->geom,
                     [&rng] {
                       Vec y(4);
                       for (int i = 0; i < 4; ++i) y[i] = rng.uniform(-2, 2);
                       return y;
                     },
                     false});
  entries.push_back({"hopf_surface", hopf->geom,
                     [&rng] { return random_hopf_point(rng); }, true});
  entries.push_back({"round_sphere", sphere->geom,
                     [&rng] {
                       Vec x(2);
                       for (int i = 0; i < 2; ++i) x[i] = rng.uniform(-2, 2);
                       return x;
                     },
                     true});
  entries.push_back({"sphere_polar", sphere_polar_chart(1.0),
                     [&rng] {
                       return Vec{rng.uniform(0.3, 2.8), rng.uniform(0.0, 6.2)};
                     },
                     true});
  entries.push_back({"hopf_torus", hopf_torus_source(2.0)->geom,
                     [&rng] {
                       return Vec{rng.uniform(0.0, 0.69), rng.uniform(0.0, 6.2)};
                     },
                     false});

  for (const Entry& e : entries) {
    double j2 = 0, compat = 0, skew = 0, bianchi = 0, dstar2d = 0;
    double min_eig = 1e300;
    for (int k = 0; k < npoints; ++k) {
      const Vec p = e.sample();
      const Mat g = e.geom.metric_at(p), J = e.geom.J_at(p);
      const Mat JJ = matmul(J, J);
      for (int i = 0; i < e.geom.dim; ++i)
        for (int j = 0; j < e.geom.dim; ++j)
          j2 = std::max(j2, std::fabs(JJ[i][j] + (i == j ? 1.0 : 0.0)));
      compat = std::max(compat, max_abs(matmul(transpose(J), matmul(g, J)) - g));
      const Mat w = fundamental_form(e.geom, p);
      skew = std::max(skew, max_abs(w + transpose(w)));
      if (e.curved && k < npoints / 5 + 1) {
        const Ten4 R = riemann(e.geom, p);
        for (int i = 0; i < e.geom.dim; ++i)
          for (int j = 0; j < e.geom.dim; ++j)
            for (int a = 0; a < e.geom.dim; ++a)
              for (int b = 0; b < e.geom.dim; ++b)
                bianchi = std::max(bianchi, std::fabs(R(i, j, a, b) +
                                                      R(i, a, b, j) +
                                                      R(i, b, j, a)));
      }
      if (e.geom.dim == 2) {
        const Vec ds = d_star_omega(e.geom, p);
        for (int i = 0; i < 2; ++i) dstar2d = std::max(dstar2d, std::fabs(ds[i]));
      }
      min_eig = std::min(min_eig, min_eigenvalue_sym(g));
    }
    t.expect_above("geom", e.name + ".metric_positive_definite", min_eig, 0.0);
    t.expect_below("geom", e.name + ".J_squared", j2, 1e-12);
    t.expect_below("geom", e.name + ".compatibility", compat, 1e-12);
    t.expect_below("geom", e.name + ".omega_skew", skew, 1e-12);
    if (e.curved) t.expect_below("geom", e.name + ".bianchi", bianchi, 1e-10);
    if (e.geom.dim == 2)
      t.expect_below("geom", e.name + ".d_star_omega_surface", dstar2d, 1e-12);
  }

  // dω on the Hopf covering: closed-form value, FD convergence, oracle match
  {
    const ChartGeometry& g = hopf->geom;
    const Vec y0{1, 0, 0, 0};
    const Ten3 dw = d_omega(g, y0);
    t.expect_below("geom", "hopf.d_omega_134", std::fabs(dw(0, 2, 3) + 2.0), 1e-12);
    const Vec p = random_hopf_point(rng);
    const Ten3 exact = d_omega(g, p);
    const double e1 = max_abs_diff(exact, d_omega_fd(g, p, 1e-2));
    const double e2 = max_abs_diff(exact, d_omega_fd(g, p, 5e-3));
    t.expect_true("geom", "hopf.d_omega_fd_order",
                  e2 > 0 && e1 / e2 > 3.5 && e1 / e2 < 4.5);
    double worst = 0, closed = 0;
    for (int k = 0; k < 10; ++k) {
      const Vec y = random_hopf_point(rng);
      const Vec a = d_star_omega(g, y);
      const Vec b = d_star_omega_fd(g, y, 3e-5);
      for (int i = 0; i < 4; ++i) worst = std::max(worst, std::fabs(a[i] - b[i]));
      // closed form on this metric: (d*ω)_j = 2ρ⁻² (Jy)_j
      const double r2 = y.norm2();
      const Vec Jy = matvec(rotation_J(4), y);
      for (int i = 0; i < 4; ++i)
        closed = std::max(closed, std::fabs(a[i] - 2.0 * Jy[i] / r2));
    }
    t.expect_below("geom", "hopf.d_star_vs_fd_divergence", worst, 1e-8);
    t.expect_below("geom", "hopf.d_star_closed_form", closed, 1e-10);
  }

  // curvature against finite-difference jets
  {
    const ChartGeometry sfd = with_fd_jets(round_sphere_model(1.0)->geom);
    const ChartGeometry s = round_sphere_model(1.0)->geom;
    double worst = 0;
    for (int k = 0; k < 5; ++k) {
      Vec x{rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)};
      worst = std::max(worst, max_abs(ricci(s, x) - ricci(sfd, x)));
    }
    t.expect_below("geom", "sphere.ricci_vs_fd_jets", worst, 1e-6);
  }
}

inline void models_suite(CheckTable& t, SplitMix64& rng) {
  const double alpha = 2.0;
  const ModelPtr src = hopf_torus_source(alpha);
  const ModelPtr tgt = hopf_surface_target(alpha);

  {  // fundamental-domain volume
    GridSpec grid = GridSpec::make(64, 64, *src);
    std::vector<double> one(static_cast<std::size_t>(grid.nodes()), 1.0);
    const double V = integrate(one, *src, grid);
    t.expect_below("models", "hopf_torus.volume",
                   std::fabs(V - family_volume(alpha)), 1e-10);
  }

  {  // invariance of h and ω_N under U(2) and under the deck scaling
    double worst_u = 0, worst_deck = 0;
    for (int k = 0; k < 20; ++k) {
      const Vec y = random_hopf_point(rng);
      const Mat U = random_unitary4(rng);
      const Vec Uy = matvec(U, y);
      const Mat lhs = matmul(transpose(U), matmul(tgt->geom.metric_at(Uy), U));
      worst_u = std::max(worst_u, max_abs(lhs - tgt->geom.metric_at(y)));
      const Mat wU = matmul(transpose(U), matmul(fundamental_form(tgt->geom, Uy), U));
      worst_u = std::max(worst_u, max_abs(wU - fundamental_form(tgt->geom, y)));

      Vec ay = y;
      for (int i = 0; i < 4; ++i) ay[i] *= alpha;
      const Mat hd = alpha * alpha * tgt->geom.metric_at(ay);
      worst_deck = std::max(worst_deck, max_abs(hd - tgt->geom.metric_at(y)));
      const Ten3 dwa = d_omega(tgt->geom, ay);
      const Ten3 dw = d_omega(tgt->geom, y);
      const double a3 = alpha * alpha * alpha;
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
          for (int l = 0; l < 4; ++l)
            worst_deck = std::max(
                worst_deck, std::fabs(a3 * dwa(i, j, l) - dw(i, j, l)));
    }
    t.expect_below("models", "hopf_surface.unitary_invariance", worst_u, 1e-10);
    t.expect_below("models", "hopf_surface.deck_invariance", worst_deck, 1e-10);
  }

  {  // ω_N componentwise: ω₁₂ = ρ⁻² (value 1/4 at ρ = 2)
    const Mat w = fundamental_form(tgt->geom, Vec{2, 0, 0, 0});
    t.expect_below("models", "hopf_surface.omega12_at_rho2",
                   std::fabs(w[0][1] - 0.25), 1e-14);
  }

  {  // round sphere: Rc = (1/r²) g, Gauss curvature, chart transition
    for (double radius : {1.0, 2.0}) {
      const ModelPtr sp = round_sphere_model(radius);
      double worst = 0, worst_gauss = 0;
      for (int k = 0; k < 50; ++k) {
        const Vec x{rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)};
        const Mat rc = ricci(sp->geom, x);
        const Mat g = sp->geom.metric_at(x);
        worst = std::max(worst,
                         max_abs(rc - (1.0 / (radius * radius)) * g));
        const Ten4 R = riemann(sp->geom, x);
        double r1212 = 0;
        for (int i = 0; i < 2; ++i) r1212 += g[0][i] * R(i, 1, 0, 1);
        worst_gauss = std::max(
            worst_gauss, std::fabs(r1212 / det(g) - 1.0 / (radius * radius)));
      }
      const std::string nm = "round_sphere_r" + std::to_string(int(radius));
      t.expect_below("models", nm + ".ricci_constant", worst, 1e-8);
      t.expect_below("models", nm + ".gauss_curvature", worst_gauss, 1e-8);
    }
    // transition: north metric pulled back through x ↦ r²(x¹,-x²)/|x|²
    const double r = 1.0;
    const ModelPtr sp = round_sphere_model(r);
    double worst_tr = 0;
    for (int k = 0; k < 20; ++k) {
      Vec x{rng.uniform(0.7, 2.0), rng.uniform(0.7, 2.0)};
      const double u = x.norm2();
      Mat Jac(2, 2);
      Jac[0][0] = r * r * (u - 2 * x[0] * x[0]) / (u * u);
      Jac[0][1] = r * r * (-2 * x[0] * x[1]) / (u * u);
      Jac[1][0] = -r * r * (-2 * x[1] * x[0]) / (u * u);
      Jac[1][1] = -r * r * (u - 2 * x[1] * x[1]) / (u * u);
      const Vec xn = sphere_transition_south_to_north(r, x);
      const Mat gn = sp->geom.metric_at(xn);  // same conformal law both charts
      const Mat pull = matmul(transpose(Jac), matmul(gn, Jac));
      worst_tr = std::max(worst_tr, max_abs(pull - sp->geom.metric_at(x)));
    }
    t.expect_below("models", "round_sphere.chart_transition", worst_tr, 1e-10);
    // polar chart against the stereographic one
    double worst_polar = 0;
    for (int k = 0; k < 20; ++k) {
      const Vec pol{rng.uniform(0.3, 2.8), rng.uniform(0.0, 6.2)};
      bool north = false;
      const double h = 1e-6;
      Mat Jac(2, 2);
      const Vec x0 = sphere_polar_to_stereo(r, pol, &north);
      for (int c = 0; c < 2; ++c) {
        Vec pp = pol, pm = pol;
        pp[c] += h;
        pm[c] -= h;
        bool n2;
        const Vec xp = sphere_polar_to_stereo(r, pp, &n2);
        const Vec xm = sphere_polar_to_stereo(r, pm, &n2);
        for (int i = 0; i < 2; ++i) Jac[i][c] = (xp[i] - xm[i]) / (2 * h);
      }
      const Mat gs = sp->geom.metric_at(x0);
      const Mat pull = matmul(transpose(Jac), matmul(gs, Jac));
      const Mat gp = sphere_polar_chart(r).metric_at(pol);
      worst_polar = std::max(worst_polar, max_abs(pull - gp));
    }
    t.expect_below("models", "round_sphere.polar_chart_consistency",
                   worst_polar, 1e-6);
  }

  {  // parameter validation
    bool named = false;
    try {
      build_model(ModelSpec{.name = "hopf_surface", .alpha = 0.5});
    } catch (const config_error& e) {
      named = e.key == "alpha";
    }
    t.expect_true("models", "build_model.alpha_validation", named);
  }
}

inline void grid_suite(CheckTable& t, SplitMix64& rng) {
  const double alpha = 2.0;
  const FrameState fr = make_frame(Vec{1, 0, 0, 0}, Vec{0, 1, 0, 0}, alpha);
  const MapField fam = family_map(fr, 64, 64);

  {  // wrap consistency across the twisted seam
    double worst = 0;
    for (int ith = 0; ith < 64; ith += 7) {
      const Vec a = fam.fetch(64, ith);  // one full wrap in s
      const Vec b = fam.fetch(0, ith);
      for (int c = 0; c < 4; ++c)
        worst = std::max(worst, std::fabs(a[c] - alpha * b[c]) /
                                    (1.0 + std::fabs(alpha * b[c])));
    }
    t.expect_below("grid", "wrap_consistency", worst, 1e-14);
  }

  {  // derivative exactness and order
    const ModelPtr fsrc = flat_torus_source();
    const ModelPtr ftgt = flat_torus_target();
    const MapField cst = constant_map(fsrc, ftgt, 16, 16, Vec{0.25, -0.5});
    double worst = 0;
    for (int is = 0; is < 16; ++is)
      for (int ith = 0; ith < 16; ++ith)
        worst = std::max(worst, max_abs(derivative_at(cst, is, ith)));
    t.expect_below("grid", "derivative_constant", worst, 1e-14);

    const MapField id = identity_map(fsrc, ftgt, 16, 16);
    worst = 0;
    for (int is = 0; is < 16; ++is)
      for (int ith = 0; ith < 16; ++ith)
        worst = std::max(
            worst, max_abs(derivative_at(id, is, ith) - Mat::identity(2)));
    t.expect_below("grid", "derivative_identity", worst, 1e-13);

    auto fd_err = [&](int n) {
      MapField f = family_map(fr, n, n);
      double w = 0;
      for (int is = 0; is < n; is += 3)
        for (int ith = 0; ith < n; ith += 3)
          w = std::max(w, max_abs(derivative_at(f, is, ith) -
                                  f.analytic_tangent(is, ith)));
      return w;
    };
    const double e1 = fd_err(32), e2 = fd_err(64);
    t.expect_true("grid", "derivative_family_order",
                  e2 > 0 && e1 / e2 > 3.5 && e1 / e2 < 4.5);
  }

  {  // quadrature
    const ModelPtr fsrc = flat_torus_source();
    GridSpec grid = GridSpec::make(64, 64, *fsrc);
    std::vector<double> d(static_cast<std::size_t>(grid.nodes()));
    for (int is = 0; is < 64; ++is)
      for (int ith = 0; ith < 64; ++ith) {
        const double th = 2.0 * 3.14159265358979323846 * ith / 64.0;
        d[static_cast<std::size_t>(is) * 64 + ith] = std::sin(th) * std::sin(th);
      }
    t.expect_below("grid", "integrate_sin2",
                   std::fabs(integrate(d, *fsrc, grid) - 0.5), 1e-10);
  }

  {  // dump round trip preserves doubles bit-exactly
    SplitMix64 local(rng.next_u64());
    MapField f = perturbed_family_map(fr, 16, 16, local, 0.05);
    std::stringstream ss;
    write_field(ss, f);
    const MapField g = read_field(ss, f.source, f.target);
    bool same = g.values.size() == f.values.size();
    for (std::size_t i = 0; same && i < f.values.size(); ++i)
      same = f.values[i] == g.values[i];
    t.expect_true("grid", "field_dump_roundtrip", same);
  }

  {  // homotopy endpoints and twist mismatch
    const ModelPtr fsrc = flat_torus_source();
    const ModelPtr ftgt = flat_torus_target();
    SplitMix64 local(7);
    const MapField f0 = random_flat_torus_map(local, fsrc, ftgt, 16, 16,
                                              TwistData{1, 0}, 0.2);
    const MapField f1 = random_flat_torus_map(local, fsrc, ftgt, 16, 16,
                                              TwistData{1, 0}, 0.2);
    t.expect_true("grid", "homotopy_endpoints",
                  homotopy_path(f0, f1, 0.0).values == f0.values &&
                      homotopy_path(f0, f1, 1.0).values == f1.values);
    bool raised = false;
    try {
      const MapField f2 = random_flat_torus_map(local, fsrc, ftgt, 16, 16,
                                                TwistData{2, 0}, 0.2);
      homotopy_path(f0, f2, 0.5);
    } catch (const homotopy_error&) {
      raised = true;
    }
    t.expect_true("grid", "homotopy_twist_mismatch", raised);
  }
}

inline void functionals_suite(CheckTable& t, SplitMix64& rng,
                              bool negative_control) {
  const double alpha = 2.0;
  const double V = family_volume(alpha);

  {  // closed-form energies on the family
    const FrameState holo = make_frame(Vec{1, 0, 0, 0}, Vec{0, 1, 0, 0}, alpha);
    const MapField f = family_map(holo, 128, 128);
    const EnergyReport r = energy(f, 1.0);
    t.expect_below("functionals", "family_holo.K_closed_form",
                   std::fabs(r.K + V) / V, 1e-10);
    t.expect_below("functionals", "family_holo.E_plus_zero", r.E_plus, 1e-10);
    t.expect_below("functionals", "family_holo.two_route",
                   std::fabs(r.E_plus - r.e_plus_direct), 1e-10 * (1 + r.E_plus));

    const FrameState mixd = make_frame(Vec{1, 0, 0, 0}, Vec{0, 0, 1, 0}, alpha);
    const EnergyReport m = energy(family_map(mixd, 128, 128), 1.0);
    t.expect_below("functionals", "family_e1e3.K_zero", std::fabs(m.K), 1e-10);
    t.expect_below("functionals", "family_e1e3.E_volume",
                   std::fabs(m.E - V) / V, 1e-12);
  }

  {  // algebraic decomposition identities (negative control flips the target)
    SplitMix64 local(rng.next_u64());
    const ModelPtr fsrc = flat_torus_source();
    const ModelPtr ftgt =
        negative_control ? fixture_skew_j_target() : flat_torus_target();
    const MapField f =
        random_flat_torus_map(local, fsrc, ftgt, 24, 24, TwistData{1, 1}, 0.3);
    const DecompositionReport rep = decomposition_check(f);
    t.expect_below("functionals", "decomposition.orthogonality",
                   rep.orthogonality, 1e-10);
    t.expect_below("functionals", "decomposition.norm_identity",
                   rep.norm_identity, 1e-10);
  }

  {  // tension examples
    const ModelPtr fsrc = flat_torus_source();
    const ModelPtr ftgt = flat_torus_target();
    const MapField id = identity_map(fsrc, ftgt, 32, 32);
    const TensionField tf = tension(id);
    t.expect_below("functionals", "tension.flat_linear",
                   tf.tau_plus_sup, 1e-10);

    const FrameState holo = make_frame(Vec{1, 0, 0, 0}, Vec{0, 1, 0, 0}, alpha);
    const TensionField th = tension(family_map(holo, 64, 64));
    t.expect_below("functionals", "tension.family_holo_sup", th.tau_plus_sup,
                   5e-3);

    const FrameState mixd = make_frame(Vec{1, 0, 0, 0}, Vec{0, 0, 1, 0}, alpha);
    const MapField fm = family_map(mixd, 64, 64);
    const TensionField tm = tension(fm);
    t.expect_above("functionals", "tension.family_e1e3_A_nonzero", tm.A_sup, 0.1);
    double worst = 0;
    for (int is = 0; is < 64; is += 5)
      for (int ith = 0; ith < 64; ith += 5) {
        const Vec A = tm.A_at(is, ith);
        const Mat h = fm.target->geom.metric_at(fm.node(is, ith));
        const Mat Tf = fm.analytic_tangent(is, ith);
        for (int al = 0; al < 2; ++al) {
          double s = 0;
          for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) s += h[i][j] * A[i] * Tf[j][al];
          worst = std::max(worst, std::fabs(s));
        }
      }
    t.expect_below("functionals", "tension.family_e1e3_A_perp_Tf", worst, 1e-8);
  }

  {  // conformal invariance of the surface energies
    SplitMix64 local(rng.next_u64());
    const FrameState fr = random_frame(local, alpha);
    const MapField f = perturbed_family_map(fr, 32, 32, local, 0.05);
    const EnergyReport r0 = energy(f, 0.5);
    MapField g = f;
    g.source = conformal_rescale_source(f.source, 0.4);
    const EnergyReport r1 = energy(g, 0.5);
    const double worst =
        std::max({std::fabs(r0.E - r1.E), std::fabs(r0.K - r1.K),
                  std::fabs(r0.E_plus - r1.E_plus),
                  std::fabs(r0.E_minus - r1.E_minus)});
    t.expect_below("functionals", "conformal_invariance", worst,
                   1e-10 * (1 + std::fabs(r0.E)));
  }

  {  // K is a homotopy invariant between flat Kähler models
    SplitMix64 local(rng.next_u64());
    const ModelPtr fsrc = flat_torus_source();
    const ModelPtr ftgt = flat_torus_target();
    const MapField f0 =
        random_flat_torus_map(local, fsrc, ftgt, 32, 32, TwistData{1, 1}, 0.3);
    const MapField f1 =
        random_flat_torus_map(local, fsrc, ftgt, 32, 32, TwistData{1, 1}, 0.3);
    const double K0 = energy(f0, 1.0).K;
    double worst = 0;
    for (int k = 1; k < 20; ++k) {
      const double tt = k / 20.0;
      worst = std::max(worst,
                       std::fabs(energy(homotopy_path(f0, f1, tt), 1.0).K - K0));
    }
    t.expect_below("functionals", "lichnerowicz_K_invariance", worst,
                   1e-8 * (1 + std::fabs(K0)));
  }

  {  // E₊ invariance under the unitary group of the Hopf target
    SplitMix64 local(rng.next_u64());
    const FrameState fr = random_frame(local, alpha);
    const MapField f = perturbed_family_map(fr, 32, 32, local, 0.05);
    const double e0 = energy(f, 1.0).e_plus_direct;
    double worst = 0;
    for (int k = 0; k < 5; ++k) {
      const Mat U = random_unitary4(local);
      const double e1 = energy(apply_linear_to_field(f, U), 1.0).e_plus_direct;
      worst = std::max(worst, std::fabs(e1 - e0));
    }
    t.expect_below("functionals", "unitary_invariance_E_plus", worst,
                   1e-10 * (1 + e0));
  }

  {  // frame vector field: fixed points and the closed-form oracle
    const FrameVelocity z1 = frame_vector_field(
        make_frame(Vec{1, 0, 0, 0}, Vec{0, 1, 0, 0}, alpha));
    const FrameVelocity z2 = frame_vector_field(
        make_frame(Vec{1, 0, 0, 0}, Vec{0, -1, 0, 0}, alpha));
    t.expect_below("functionals", "frame_field.holo_fixed",
                   std::sqrt(z1.du.norm2() + z1.dv.norm2()), 1e-8);
    t.expect_below("functionals", "frame_field.antiholo_fixed",
                   std::sqrt(z2.du.norm2() + z2.dv.norm2()), 1e-8);
    const FrameState e13 = make_frame(Vec{1, 0, 0, 0}, Vec{0, 0, 1, 0}, alpha);
    const FrameVelocity w = frame_vector_field(e13);
    t.expect_above("functionals", "frame_field.e1e3_nonzero",
                   std::sqrt(w.du.norm2() + w.dv.norm2()), 0.5);
  }
}

}  // namespace verify_detail

inline CheckTable run_verification(std::uint64_t seed, int npoints,
                                   bool negative_control) {
  CheckTable t;
  SplitMix64 rng(seed);
  verify_detail::geom_suite(t, rng, npoints);
  verify_detail::models_suite(t, rng);
  verify_detail::grid_suite(t, rng);
  verify_detail::functionals_suite(t, rng, negative_control);
  return t;
}

}  // namespace dbar
