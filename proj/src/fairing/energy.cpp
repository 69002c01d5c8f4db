#include "holefill/fairing/energy.hpp"

#include <cmath>
#include <fstream>
#include <iostream>

#include <Eigen/Cholesky>

namespace holefill::fairing {

std::vector<JetTerm> bending_terms() {
  return {{2, 0, 1.0}, {1, 1, 2.0}, {0, 2, 1.0},
          {3, 0, 1.0}, {2, 1, 3.0}, {1, 2, 3.0}, {0, 3, 1.0}};
}

int flatten_index(int i, int j, int rows, int cols) {
  if (i < 0 || i >= rows || j < 0 || j >= cols)
    throw std::out_of_range("flatten_index: grid index out of range");
  return i * cols + j;
}

namespace {

// Gauss-Legendre nodes/weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pk = 0.0, dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      pk = 1.0;
      double pkm1 = 0.0;
      for (int k = 0; k < n; ++k) {
        const double pkp1 = ((2 * k + 1) * t * pk - k * pkm1) / (k + 1);
        pkm1 = pk;
        pk = pkp1;
      }
      dp = n * (t * pk - pkm1) / (t * t - 1.0);
      const double dt = pk / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    nodes[i] = -t;
    nodes[n - 1 - i] = t;
    weights[i] = weights[n - 1 - i] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
}

std::vector<std::pair<double, double>> knot_spans(const geom::KnotVector& kv) {
  std::vector<std::pair<double, double>> spans;
  for (int s = kv.degree; s < kv.control_count(); ++s)
    if (kv.values[s + 1] > kv.values[s] + 1e-14)
      spans.push_back({kv.values[s], kv.values[s + 1]});
  return spans;
}

geom::BSplineSurface surface_from(const SurfaceLayout& layout,
                                  const std::vector<Vec3>& control_points) {
  geom::BSplineSurface s;
  s.knots_u = layout.knots_u;
  s.knots_v = layout.knots_v;
  s.control_points = control_points;
  return s;
}

}  // namespace

Eigen::MatrixXd assemble_fairness(const SurfaceLayout& layout, int quadrature_order,
                                  const std::vector<JetTerm>& terms) {
  const int degree = std::max(layout.knots_u.degree, layout.knots_v.degree);
  const int required = degree + 1;  // exact for squared derivative products
  if (quadrature_order < required)
    std::cerr << "warning: quadrature order " << quadrature_order
              << " is below the exactness requirement " << required << " for degree " << degree
              << "\n";

  const int nu = layout.count_u(), nv = layout.count_v();
  const int K = nu * nv;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(K, K);

  std::vector<double> gx, gw;
  gauss_legendre(quadrature_order, gx, gw);
  const auto spans_u = knot_spans(layout.knots_u);
  const auto spans_v = knot_spans(layout.knots_v);

  const int wu = layout.knots_u.degree + 1;
  const int wv = layout.knots_v.degree + 1;
  std::vector<double> B(wu * wv);
  std::vector<int> idx(wu * wv);

  for (const auto& su : spans_u) {
    const double mu = 0.5 * (su.first + su.second), hu = 0.5 * (su.second - su.first);
    for (const auto& sv : spans_v) {
      const double mv = 0.5 * (sv.first + sv.second), hv = 0.5 * (sv.second - sv.first);
      for (int qi = 0; qi < quadrature_order; ++qi) {
        const double u = mu + hu * gx[qi];
        const geom::BasisWindow bu = geom::basis_functions(layout.knots_u, u, 3);
        for (int qj = 0; qj < quadrature_order; ++qj) {
          const double v = mv + hv * gx[qj];
          const geom::BasisWindow bv = geom::basis_functions(layout.knots_v, v, 3);
          const double wq = gw[qi] * gw[qj] * hu * hv;
          for (int a = 0; a < wu; ++a)
            for (int b = 0; b < wv; ++b)
              idx[a * wv + b] = flatten_index(bu.first + a, bv.first + b, nu, nv);
          for (const auto& term : terms) {
            for (int a = 0; a < wu; ++a)
              for (int b = 0; b < wv; ++b)
                B[a * wv + b] = bu.ders(term.du, a) * bv.ders(term.dv, b);
            const double cw = wq * term.weight;
            for (int r = 0; r < wu * wv; ++r) {
              const double br = cw * B[r];
              if (br == 0.0) continue;
              for (int c = 0; c < wu * wv; ++c) A(idx[r], idx[c]) += br * B[c];
            }
          }
        }
      }
    }
  }
  return A;
}

ContinuityTargets make_targets(const param::HoleBoundary& boundary, const param::PCurve& pcurve,
                               const geom::BSplineSurface* projection_surface) {
  const int n = boundary.size();
  if (pcurve.size() != n)
    throw std::invalid_argument("make_targets: boundary and pcurve sample counts differ");

  ContinuityTargets t;
  t.positions = boundary.samples;
  if (boundary.has_normals()) t.normals = boundary.normals;
  if (boundary.has_curvatures()) t.curvatures = boundary.curvatures;
  t.cross_dirs.resize(n, Vec2::Zero());
  t.metric_scale.resize(n, 1.0);

  for (int k = 0; k < n; ++k) {
    const Vec2 dp = pcurve.params[(k + 1) % n] - pcurve.params[(k + n - 1) % n];
    const double len = dp.norm();
    if (len < 1e-14) continue;  // degenerate segment, marked by a zero direction
    const Vec2 tangent = dp / len;
    t.cross_dirs[k] = Vec2(-tangent.y(), tangent.x());
    if (projection_surface) {
      const geom::SurfaceJet jet =
          projection_surface->jet(pcurve.params[k].x(), pcurve.params[k].y());
      const double E = jet.du.dot(jet.du), F = jet.du.dot(jet.dv), G = jet.dv.dot(jet.dv);
      const double a = t.cross_dirs[k].x(), b = t.cross_dirs[k].y();
      t.metric_scale[k] = E * a * a + 2.0 * F * a * b + G * b * b;
    } else {
      const double db =
          (boundary.samples[(k + 1) % n] - boundary.samples[(k + n - 1) % n]).norm();
      const double ratio = db / len;
      t.metric_scale[k] = ratio * ratio;  // isotropic estimate
    }
  }
  return t;
}

void assemble_constraints(const SurfaceLayout& layout, const param::PCurve& pcurve,
                          const ContinuityTargets& targets, const EnergyWeights& weights,
                          EnergySystem& system) {
  const int n = pcurve.size();
  if (targets.size() != n)
    throw std::invalid_argument("assemble_constraints: pcurve and targets misaligned");
  const int nu = layout.count_u(), nv = layout.count_v();
  const int K = nu * nv;
  const bool coupled = weights.coupled();

  system.coupled = coupled;
  system.weights = weights;
  system.constant = 0.0;
  system.constraint_free = weights.all_zero();
  if (coupled) {
    system.constraints = Eigen::MatrixXd::Zero(3 * K, 3 * K);
    system.rhs = Eigen::MatrixXd::Zero(3 * K, 1);
  } else {
    system.constraints = Eigen::MatrixXd::Zero(K, K);
    system.rhs = Eigen::MatrixXd::Zero(K, 3);
  }
  if (system.constraint_free) {
    std::cerr << "warning: all constraint weights are zero; system is constraint-free\n";
    return;
  }

  const bool use_g1 = weights.normal > 0.0 && targets.has_normals();
  const bool use_g2 = weights.curvature > 0.0 && targets.has_normals() &&
                      targets.has_curvatures();
  const double wt = 1.0 / n;  // closed-loop trapezoid weights are uniform

  const int wu = layout.knots_u.degree + 1;
  const int wv = layout.knots_v.degree + 1;
  const int win = wu * wv;
  std::vector<int> idx(win);
  std::vector<double> B0(win), Bu(win), Bv(win), Bdd(win);

  int skipped = 0;
  for (int k = 0; k < n; ++k) {
    const Vec2 d = targets.cross_dirs[k];
    if ((use_g1 || use_g2) && d.squaredNorm() == 0.0) {
      ++skipped;
      continue;  // zero-length pcurve segment: no usable direction
    }
    const double u = pcurve.params[k].x(), v = pcurve.params[k].y();
    const geom::BasisWindow bu = geom::basis_functions(layout.knots_u, u, 2);
    const geom::BasisWindow bv = geom::basis_functions(layout.knots_v, v, 2);
    for (int a = 0; a < wu; ++a) {
      for (int b = 0; b < wv; ++b) {
        const int r = a * wv + b;
        idx[r] = flatten_index(bu.first + a, bv.first + b, nu, nv);
        B0[r] = bu.ders(0, a) * bv.ders(0, b);
        Bu[r] = bu.ders(1, a) * bv.ders(0, b);
        Bv[r] = bu.ders(0, a) * bv.ders(1, b);
        Bdd[r] = d.x() * d.x() * bu.ders(2, a) * bv.ders(0, b) +
                 2.0 * d.x() * d.y() * bu.ders(1, a) * bv.ders(1, b) +
                 d.y() * d.y() * bu.ders(0, a) * bv.ders(2, b);
      }
    }

    const Vec3& q = targets.positions[k];
    const double wpos = weights.position * wt;
    if (wpos > 0.0) {
      if (!coupled) {
        for (int r = 0; r < win; ++r) {
          const double br = wpos * B0[r];
          for (int c = 0; c < win; ++c) system.constraints(idx[r], idx[c]) += br * B0[c];
          for (int coord = 0; coord < 3; ++coord) system.rhs(idx[r], coord) += br * q[coord];
        }
      } else {
        for (int coord = 0; coord < 3; ++coord) {
          const int off = coord * K;
          for (int r = 0; r < win; ++r) {
            const double br = wpos * B0[r];
            for (int c = 0; c < win; ++c)
              system.constraints(off + idx[r], off + idx[c]) += br * B0[c];
            system.rhs(off + idx[r], 0) += br * q[coord];
          }
        }
      }
      system.constant += wpos * q.squaredNorm();
    }

    if (use_g1) {
      const Vec3& nrm = targets.normals[k];
      const double wn = weights.normal * wt;
      // Tangent-plane rows (S_u . n) and (S_v . n); targets are zero.
      for (const auto& Bd : {Bu, Bv}) {
        for (int r = 0; r < win; ++r) {
          for (int cr = 0; cr < 3; ++cr) {
            const double vr = wn * nrm[cr] * Bd[r];
            if (vr == 0.0) continue;
            for (int c = 0; c < win; ++c)
              for (int cc = 0; cc < 3; ++cc)
                system.constraints(cr * K + idx[r], cc * K + idx[c]) +=
                    vr * nrm[cc] * Bd[c];
          }
        }
      }
    }

    if (use_g2) {
      const Vec3& nrm = targets.normals[k];
      const double wc = weights.curvature * wt;
      const double target = targets.curvatures[k] * targets.metric_scale[k];
      for (int r = 0; r < win; ++r) {
        for (int cr = 0; cr < 3; ++cr) {
          const double vr = nrm[cr] * Bdd[r];
          if (vr == 0.0) continue;
          for (int c = 0; c < win; ++c)
            for (int cc = 0; cc < 3; ++cc)
              system.constraints(cr * K + idx[r], cc * K + idx[c]) +=
                  wc * vr * nrm[cc] * Bdd[c];
          system.rhs(cr * K + idx[r], 0) += wc * vr * target;
        }
      }
      system.constant += wc * target * target;
    }
  }
  if (skipped > 0)
    std::cerr << "warning: skipped " << skipped
              << " constraint samples with zero-length pcurve segments\n";
}

EnergySystem assemble_system(const SurfaceLayout& layout, const param::PCurve& pcurve,
                             const ContinuityTargets& targets, const EnergyWeights& weights,
                             int quadrature_order) {
  EnergySystem system;
  system.quadrature_order = quadrature_order;
  system.fairness = assemble_fairness(layout, quadrature_order, system.terms);
  assemble_constraints(layout, pcurve, targets, weights, system);
  return system;
}

Eigen::MatrixXd solve_filling(const EnergySystem& system, SolveInfo* info) {
  const int K = static_cast<int>(system.fairness.rows());

  Eigen::MatrixXd M;
  Eigen::MatrixXd rhs;
  if (system.coupled) {
    M = system.constraints;
    for (int c = 0; c < 3; ++c) M.block(c * K, c * K, K, K) += system.fairness;
    rhs = system.rhs;
  } else {
    M = system.fairness + system.constraints;
    rhs = system.rhs;
  }

  const double mnorm = M.cwiseAbs().maxCoeff();
  for (double eps : {0.0, 1e-12, 1e-10, 1e-8}) {
    Eigen::MatrixXd shifted = M;
    if (eps > 0.0) shifted.diagonal().array() += eps * std::max(mnorm, 1.0);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(shifted);
    if (ldlt.info() != Eigen::Success) continue;
    Eigen::MatrixXd x = ldlt.solve(rhs);
    if (!x.allFinite()) continue;
    const double resid = (shifted * x - rhs).norm();
    const double scale = mnorm * x.norm() + rhs.norm() + 1e-300;
    if (resid > 1e-8 * scale) continue;
    if (info) {
      info->epsilon = eps;
      info->success = true;
    }
    if (!system.coupled) return x;  // K x 3
    Eigen::MatrixXd out(K, 3);
    for (int c = 0; c < 3; ++c) out.col(c) = x.block(c * K, 0, K, 1);
    return out;
  }
  if (info) info->success = false;
  throw std::runtime_error("solve_filling: factorization failed at the largest Tikhonov shift");
}

double fairness_energy(const Eigen::MatrixXd& A, const std::vector<Vec3>& control_points) {
  const int K = static_cast<int>(A.rows());
  if (static_cast<int>(control_points.size()) != K)
    throw std::invalid_argument("fairness_energy: control point count mismatch");
  double e = 0.0;
  for (int coord = 0; coord < 3; ++coord) {
    Eigen::VectorXd cp(K);
    for (int k = 0; k < K; ++k) cp(k) = control_points[k][coord];
    e += cp.dot(A * cp);
  }
  return e;
}

double direct_energy(const SurfaceLayout& layout, const std::vector<Vec3>& control_points,
                     const param::PCurve& pcurve, const ContinuityTargets& targets,
                     const EnergyWeights& weights, int quadrature_order) {
  const geom::BSplineSurface s = surface_from(layout, control_points);

  std::vector<double> gx, gw;
  gauss_legendre(quadrature_order, gx, gw);
  const auto terms = bending_terms();
  double fair = 0.0;
  for (const auto& su : knot_spans(layout.knots_u)) {
    const double mu = 0.5 * (su.first + su.second), hu = 0.5 * (su.second - su.first);
    for (const auto& sv : knot_spans(layout.knots_v)) {
      const double mv = 0.5 * (sv.first + sv.second), hv = 0.5 * (sv.second - sv.first);
      for (int qi = 0; qi < quadrature_order; ++qi) {
        for (int qj = 0; qj < quadrature_order; ++qj) {
          const geom::SurfaceJet jet = s.jet(mu + hu * gx[qi], mv + hv * gx[qj]);
          double val = 0.0;
          for (const auto& term : terms) val += term.weight * jet.deriv(term.du, term.dv).squaredNorm();
          fair += gw[qi] * gw[qj] * hu * hv * val;
        }
      }
    }
  }

  double cons = 0.0;
  const int n = pcurve.size();
  const double wt = 1.0 / n;
  const bool use_g1 = weights.normal > 0.0 && targets.has_normals();
  const bool use_g2 = weights.curvature > 0.0 && targets.has_normals() &&
                      targets.has_curvatures();
  for (int k = 0; k < n; ++k) {
    const Vec2 d = targets.cross_dirs[k];
    if ((use_g1 || use_g2) && d.squaredNorm() == 0.0) continue;
    const geom::SurfaceJet jet = s.jet(pcurve.params[k].x(), pcurve.params[k].y());
    cons += weights.position * wt * (jet.position - targets.positions[k]).squaredNorm();
    if (use_g1) {
      const Vec3& nrm = targets.normals[k];
      cons += weights.normal * wt *
              (std::pow(jet.du.dot(nrm), 2) + std::pow(jet.dv.dot(nrm), 2));
    }
    if (use_g2) {
      const Vec3& nrm = targets.normals[k];
      const Vec3 sdd = d.x() * d.x() * jet.duu + 2.0 * d.x() * d.y() * jet.duv +
                       d.y() * d.y() * jet.dvv;
      const double target = targets.curvatures[k] * targets.metric_scale[k];
      cons += weights.curvature * wt * std::pow(sdd.dot(nrm) - target, 2);
    }
  }
  return fair + cons;
}

BoundaryErrors boundary_error_and_str(const geom::BSplineSurface& filled,
                                      const param::PCurve& pcurve,
                                      const ContinuityTargets& targets, const Tolerances& tol) {
  const int n = pcurve.size();
  BoundaryErrors out;
  const bool eval_g1 = targets.has_normals();
  const bool eval_g2 = targets.has_normals() && targets.has_curvatures();
  if (!eval_g1) out.g1 = std::numeric_limits<double>::quiet_NaN();
  if (!eval_g2) out.g2 = std::numeric_limits<double>::quiet_NaN();

  for (int k = 0; k < n; ++k) {
    const double u = pcurve.params[k].x(), v = pcurve.params[k].y();
    const geom::SurfaceJet jet = filled.jet(u, v);
    out.g0 = std::max(out.g0, (jet.position - targets.positions[k]).norm());
    if (eval_g1) {
      double angle;
      try {
        const Vec3 nrm = geom::unit_normal(jet);
        const Vec3& tn = targets.normals[k];
        angle = std::atan2(nrm.cross(tn).norm(), nrm.dot(tn));
      } catch (const SingularityError&) {
        angle = M_PI;
      }
      out.g1 = std::max(out.g1, angle);
    }
    if (eval_g2 && targets.cross_dirs[k].squaredNorm() > 0.0) {
      double dev;
      try {
        const double kappa = geom::normal_curvature_from_jet(jet, targets.cross_dirs[k]).kappa;
        dev = std::abs(kappa - targets.curvatures[k]);
      } catch (const SingularityError&) {
        dev = std::numeric_limits<double>::infinity();
      }
      out.g2 = std::max(out.g2, dev);
    }
  }
  out.pass_g0 = out.g0 < tol.position;
  out.pass_g1 = eval_g1 && out.g1 < tol.normal;
  out.pass_g2 = eval_g2 && out.g2 < tol.curvature;
  return out;
}

void dump_energy_system(const EnergySystem& system, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write energy dump: " + path);
  out.precision(16);
  out << std::scientific;
  auto dump = [&out](const char* name, const Eigen::MatrixXd& m) {
    out << name << " " << m.rows() << " " << m.cols() << "\n";
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? " " : "") << m(r, c);
      out << "\n";
    }
  };
  dump("A", system.fairness);
  dump("D", system.constraints);
  dump("b", system.rhs);
  out << "C 1 1\n" << system.constant << "\n";
}

}  // namespace holefill::fairing
