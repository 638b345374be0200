#include "opiniongames/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace opg {

namespace {

void check_state(const GameState& st, const CoefficientParams& cp) {
  const double slack = 4.0 * cp.t * std::numeric_limits<double>::epsilon();
  if (!(st.s >= -slack && st.s <= cp.t + slack)) {
    std::ostringstream msg;
    msg << "state time s=" << st.s << " outside [0," << cp.t << "]";
    fail(ErrorKind::Domain, msg.str());
  }
  if (!(st.x0_i >= 0.0 && st.x0_i <= 1.0)) {
    std::ostringstream msg;
    msg << "initial opinion x0=" << st.x0_i << " outside [0,1]";
    fail(ErrorKind::Domain, msg.str());
  }
}

double follower_sign(FollowerDriftSign sign) {
  return sign == FollowerDriftSign::Statement ? 1.0 : -1.0;
}

/// Regime view of the opinion-side equation: the pull coefficient, its time
/// derivative and the aggregate the drift references.
struct OpinionTerms {
  double pull = 0.0;      // gamma | gamma_hat
  double pull_s = 0.0;
  double aggregate = 0.0; // mean-field / assigned-opinion mean
  double sigma = 0.0;
  double w_sum = 0.0;     // n w | n w_bar
  double k_own = 0.0;     // k | k_1
};

OpinionTerms opinion_terms(const GameRegime& regime, const GameState& st,
                           const CoefficientParams& cp) {
  OpinionTerms ot;
  if (const auto* fc = std::get_if<FullConsensusRegime>(&regime)) {
    ot.pull = gamma(st.s, cp);
    ot.pull_s = gamma_prime(st.s, cp);
    ot.aggregate = st.mean_opt;
    ot.sigma = fc->sigma;
    ot.w_sum = cp.n * cp.w;
    ot.k_own = cp.k;
  } else if (const auto* ld = std::get_if<LeaderRegime>(&regime)) {
    ot.pull = gamma_hat(st.s, cp);
    ot.pull_s = gamma_hat_prime(st.s, cp);
    ot.aggregate = st.mean_opt;
    ot.sigma = ld->sigma1;
    ot.w_sum = cp.n * cp.w_bar;
    ot.k_own = cp.k_1;
  } else {
    fail(ErrorKind::Domain, "opinion_terms: follower handled separately");
  }
  return ot;
}

}  // namespace

DriftTerms drift_terms(const GameRegime& regime, const GameState& st,
                       const CoefficientParams& cp) {
  DriftTerms d;
  if (const auto* fl = std::get_if<FollowerRegime>(&regime)) {
    const double lt = cp.lambda_tilde();
    const double xi = xi_hat(st.s, cp);
    const double xi_s = xi_hat_prime(st.s, cp);
    const double sgn = follower_sign(fl->drift_sign);
    d.weight_disagree = cp.w_i1;
    d.weight_stubborn = cp.k;
    d.sigma = fl->sigma;
    d.c1 = xi + cp.k / lt;
    d.c0 = (sgn * cp.w_i1 / lt - xi) * fl->x_bar1;
    d.c1_s = xi_s;
    d.c0_s = -xi_s * fl->x_bar1;
  } else {
    const OpinionTerms ot = opinion_terms(regime, st, cp);
    d.weight_disagree = ot.w_sum;
    d.weight_stubborn = ot.k_own;
    d.sigma = ot.sigma;
    d.c1 = ot.pull;
    d.c0 = (1.0 - ot.pull) * ot.aggregate;
    d.c1_s = ot.pull_s;
    d.c0_s = -ot.pull_s * ot.aggregate;
  }
  return d;
}

DerivBundle f_derivatives(const GameRegime& regime, const GameState& st,
                          const HParams& hp, const CoefficientParams& cp) {
  check_state(st, cp);
  const LambdaBundle& lam = st.lambda;
  if (std::abs(lam.value) <= 1e-12) {
    fail(ErrorKind::DegenerateMultiplier,
         "f_derivatives: |lambda| <= 1e-12 at the state");
  }

  const DriftTerms d = drift_terms(regime, st, cp);
  const double s = st.s;
  const double b = hp.b;
  const double x = st.x_i;
  const double u = st.u_i;
  const double h = h_exact(s, x, hp);
  const double lv = lam.value;
  const double l1 = lam.d1;

  const double sb = s * b;
  const double drift0 = d.c0 + d.c1 * x;  // drift with the control removed

  DerivBundle out;
  out.C1 = sb * lv * h;
  out.C2 = sb * sb * sb * lv * h;
  out.C3 = sb * sb * lv * h;

  // u-free brace of f_x: lam(1+sbx) + s lam' + s^2 b lam D0 + s lam c1
  //                      + s^3 b^2 sigma lam
  const double brace = lv * (1.0 + sb * x) + s * l1 + s * s * b * lv * drift0 +
                       s * lv * d.c1 + s * s * s * b * b * d.sigma * lv;

  const double dx_j = x - st.x_j;
  const double dx_0 = x - st.x0_i;
  out.A1 = d.weight_disagree * dx_j + d.weight_stubborn * dx_0 + b * h * brace;
  out.A2 = d.weight_disagree + d.weight_stubborn + s * b * b * h * brace +
           s * b * b * lv * h * (1.0 + s * d.c1);

  out.f = 0.5 * d.weight_disagree * dx_j * dx_j +
          0.5 * d.weight_stubborn * dx_0 * dx_0 + 0.5 * u * u +
          b * lv * x * h + l1 * h + sb * lv * h * (drift0 - u) +
          s * s * b * b * d.sigma * lv * h;
  out.f_x = out.A1 - out.C3 * u;
  out.f_xx = out.A2 - out.C2 * u;
  out.f_u = u - out.C1;
  out.f_xu = -out.C3;
  return out;
}

namespace {

// Exact expansion of f_u f_xx^2 - 2 f_x f_xu in powers of u.
CubicPoly control_cubic_from(const DerivBundle& db) {
  CubicPoly p;
  p.c3 = db.C2 * db.C2;
  p.c2 = -(2.0 * db.A2 * db.C2 + db.C1 * db.C2 * db.C2);
  p.c1 = db.A2 * db.A2 + 2.0 * db.A2 * db.C1 * db.C2 - 2.0 * db.C3 * db.C3;
  p.c0 = 2.0 * db.A1 * db.C3 - db.C1 * db.A2 * db.A2;
  return p;
}

}  // namespace

CubicPoly control_cubic(const GameRegime& regime, const GameState& st,
                        const HParams& hp, const CoefficientParams& cp) {
  const DerivBundle db = f_derivatives(regime, st, hp, cp);
  if (db.C2 == 0.0) {
    fail(ErrorKind::DegenerateCubic,
         "control cubic degenerate (s=0: every C coefficient vanishes); "
         "the control is the u=0 limit of the quadratic penalty");
  }
  return control_cubic_from(db);
}

double stationarity_residual(const GameRegime& regime, const GameState& st,
                             const HParams& hp, const CoefficientParams& cp,
                             double u) {
  GameState at = st;
  at.u_i = u;
  const DerivBundle db = f_derivatives(regime, at, hp, cp);
  return std::abs(db.f_u * db.f_xx * db.f_xx - 2.0 * db.f_x * db.f_xu);
}

double feedback_control(const GameRegime& regime, const GameState& st,
                        const HParams& hp, const CoefficientParams& cp) {
  if (st.s == 0.0) {
    check_state(st, cp);
    return 0.0;  // f reduces to g with f_u = u; the penalty's own minimum
  }
  const DerivBundle db = f_derivatives(regime, st, hp, cp);
  const CubicPoly cubic = control_cubic_from(db);
  const RootSet roots = solve_cubic_real(cubic);

  const auto residual_at = [&](double u) {
    const double fxx = db.A2 - db.C2 * u;
    return std::abs((u - db.C1) * fxx * fxx +
                    2.0 * db.C3 * (db.A1 - db.C3 * u));
  };

  const double scale = std::max(1.0, cubic.max_abs_coeff());
  double best_u = roots.roots.front();
  double best_res = residual_at(best_u);
  for (std::size_t i = 1; i < roots.roots.size(); ++i) {
    const double u = roots.roots[i];
    const double res = residual_at(u);
    const bool tie = std::abs(res - best_res) <= 1e-9 * scale;
    if ((tie && std::abs(u) < std::abs(best_u)) || (!tie && res < best_res)) {
      best_u = u;
      best_res = res;
    }
  }
  if (best_res > 1e-6 * scale) {
    std::ostringstream msg;
    msg << "stationarity failure: best residual " << best_res
        << " over " << roots.roots.size() << " real root(s), scale " << scale;
    fail(ErrorKind::StationarityFailure, msg.str());
  }
  return best_u;
}

namespace {

/// x^2, x and constant collectors of the brace of the opinion equation
/// b h {...} = (W+K) x - A3 (full-consensus/leader form) or
/// h {...} = (k+w) x - A3 (follower form, b factors kept inside).
struct OpinionBraces {
  double g2 = 0.0;
  double g1 = 0.0;
  double g0 = 0.0;
  double wk = 0.0;   // W + K
  double a3 = 0.0;   // W x_j + K x0
  bool b_outside = false;  // true when the prefactor is b*h, not h
};

OpinionBraces consensus_braces(const OpinionTerms& ot, const GameState& st,
                               const HParams& hp) {
  const double s = st.s;
  const double b = hp.b;
  const double u = st.u_i;
  const double lv = st.lambda.value;
  const double l1 = st.lambda.d1;
  const double l2 = st.lambda.d2;
  const double g = ot.pull;
  const double gs = ot.pull_s;
  const double M = ot.aggregate;
  const double sg = ot.sigma;
  const double sb = s * b;

  const double a4 = lv + s * l1 + s * s * b * lv * ((1.0 - g) * M - u) +
                    s * lv * (g + s * s * b * sg);

  OpinionBraces ob;
  ob.b_outside = true;
  ob.g2 = s * b * b * lv;
  ob.g1 = lv * (2.0 + s * g + s * s * b * gs + sg * sb * sb * sb -
                sb * (1.0 + s * g)) +
          l1 * (sb + g * (1.0 + b + sb + s * sb));
  ob.g0 = s * l2 + l1 + (1.0 + b + sb + s * sb) * l1 * ((1.0 - g) * M - u) +
          g * (lv + s * l1) + s * lv * (1.0 - sb * M) * gs +
          sg * sb * sb * (3.0 * lv + l1) - a4;
  ob.wk = ot.w_sum + ot.k_own;
  ob.a3 = ot.w_sum * st.x_j + ot.k_own * st.x0_i;
  return ob;
}

OpinionBraces follower_braces(const FollowerRegime& fl, const GameState& st,
                              const HParams& hp, const CoefficientParams& cp) {
  const double s = st.s;
  const double b = hp.b;
  const double u = st.u_i;
  const double lv = st.lambda.value;
  const double l1 = st.lambda.d1;
  const double l2 = st.lambda.d2;
  const double sg = fl.sigma;
  const double xb = fl.x_bar1;
  const double lt = cp.lambda_tilde();
  const double xi = xi_hat(st.s, cp);
  const double xi_s = xi_hat_prime(st.s, cp);
  const double sgn = follower_sign(fl.drift_sign);
  const double pull = xi + cp.k / lt;                  // drift slope
  const double drift0 = (sgn * cp.w_i1 / lt - xi) * xb;  // u-free constant
  const double sb = s * b;

  const double a4 = lv + s * l1 + s * s * b * lv * (drift0 - u) +
                    s * lv * (pull + s * s * b * b * b * sg);

  OpinionBraces ob;
  ob.b_outside = false;
  ob.g2 = s * b * b * b * lv;
  ob.g1 = 2.0 * b * lv + s * b * b * l1 +
          s * (1.0 + s * b * b * l1 + b * lv * (1.0 + b + sb)) * pull +
          s * s * b * b * lv * xi_s + s * s * s * b * b * b * b * sg * lv -
          s * b * b * lv * (1.0 + s * pull);
  ob.g0 = sb * l2 + b * l1 +
          sb * (sb * l1 + lv * (1.0 + b + sb)) * (drift0 - u) +
          pull * b * (lv + l1) + sb * lv * (1.0 - sb * xb) * xi_s +
          s * s * b * b * b * sg * lv * (1.0 + 2.0 * s + s * l1) - b * a4;
  ob.wk = cp.k + cp.w_i1;
  ob.a3 = cp.w_i1 * st.x_j + cp.k * st.x0_i;
  return ob;
}

OpinionBraces opinion_braces(const GameRegime& regime, const GameState& st,
                             const HParams& hp, const CoefficientParams& cp) {
  if (const auto* fl = std::get_if<FollowerRegime>(&regime)) {
    return follower_braces(*fl, st, hp, cp);
  }
  return consensus_braces(opinion_terms(regime, st, cp), st, hp);
}

}  // namespace

CubicPoly opinion_cubic(const GameRegime& regime, const GameState& st,
                        const HParams& hp, const CoefficientParams& cp) {
  check_state(st, cp);
  const OpinionBraces ob = opinion_braces(regime, st, hp, cp);
  const double e = hp.e();
  const double b = hp.b;
  const double s = st.s;
  // Prefactor b*h ~ be + s b^2 x  (consensus/leader) or  h ~ e + s b x
  // (follower, whose braces keep their own b factors).
  const double p0 = ob.b_outside ? b * e : e;
  const double p1 = ob.b_outside ? s * b * b : s * b;

  CubicPoly p;
  p.c3 = p1 * ob.g2;
  p.c2 = p0 * ob.g2 + p1 * ob.g1;
  p.c1 = p0 * ob.g1 + p1 * ob.g0 - ob.wk;
  p.c0 = p0 * ob.g0 + ob.a3;
  if (p.c3 == 0.0) {
    fail(ErrorKind::DegenerateCubic,
         "opinion cubic degenerate: leading coefficient vanishes at s=0");
  }
  return p;
}

double opinion_residual(const GameRegime& regime, const GameState& st,
                        const HParams& hp, const CoefficientParams& cp,
                        double x) {
  const OpinionBraces ob = opinion_braces(regime, st, hp, cp);
  const double h = h_exact(st.s, x, hp);
  const double pre = ob.b_outside ? hp.b * h : h;
  const double brace = (ob.g2 * x + ob.g1) * x + ob.g0;
  return pre * brace - ob.wk * x + ob.a3;
}

double select_opinion_root(const GameRegime& regime, const RootSet& roots,
                           const GameState& st, const HParams& hp,
                           const CoefficientParams& cp) {
  if (roots.roots.empty()) {
    fail(ErrorKind::StationarityFailure, "opinion root set is empty");
  }
  if (std::holds_alternative<LeaderRegime>(regime)) {
    return *std::max_element(roots.roots.begin(), roots.roots.end());
  }
  double best = roots.roots.front();
  double best_res = std::abs(opinion_residual(regime, st, hp, cp, best));
  for (std::size_t i = 1; i < roots.roots.size(); ++i) {
    const double x = roots.roots[i];
    const double res = std::abs(opinion_residual(regime, st, hp, cp, x));
    if (res < best_res) {
      best = x;
      best_res = res;
    }
  }
  return best;
}

double optimal_opinion(const GameRegime& regime, const GameState& st,
                       const HParams& hp, const CoefficientParams& cp) {
  const CubicPoly p = opinion_cubic(regime, st, hp, cp);
  const RootSet roots = solve_cubic_real(p);
  return select_opinion_root(regime, roots, st, hp, cp);
}

MeanFieldResult mean_field_fixed_point(const std::vector<MeanFieldAgent>& agents,
                                       const FullConsensusRegime& regime,
                                       const HParams& hp,
                                       const CoefficientParams& cp, double s0,
                                       double tol, int max_iter,
                                       const std::vector<double>* initial,
                                       double damping) {
  if (agents.empty()) fail(ErrorKind::Domain, "mean field: no agents");
  if (!(tol > 0.0)) fail(ErrorKind::Domain, "mean field: tol must be > 0");
  const GameRegime gr = regime;

  std::vector<double> profile;
  if (initial) {
    profile = *initial;
  } else {
    profile.reserve(agents.size());
    for (const auto& a : agents) profile.push_back(a.x0);
  }
  if (profile.size() != agents.size()) {
    fail(ErrorKind::DimensionMismatch, "mean field: initial profile size");
  }

  MeanFieldResult result;
  result.control.assign(agents.size(), 0.0);
  for (int iter = 1; iter <= max_iter; ++iter) {
    const double mean =
        std::accumulate(profile.begin(), profile.end(), 0.0) / profile.size();
    std::vector<double> next(profile.size());
    double change = 0.0;
    for (std::size_t i = 0; i < agents.size(); ++i) {
      GameState st;
      st.s = s0;
      st.x_i = profile[i];
      st.x_j = mean;
      st.x0_i = agents[i].x0;
      st.mean_opt = mean;
      st.lambda = multiplier_eval(agents[i].multiplier, s0);
      const double u = feedback_control(gr, st, hp, cp);
      st.u_i = u;
      const double target = optimal_opinion(gr, st, hp, cp);
      next[i] = (1.0 - damping) * profile[i] + damping * target;
      change = std::max(change, std::abs(next[i] - profile[i]));
      result.control[i] = u;
    }
    profile = std::move(next);
    result.iterations = iter;
    result.residual = change;
    if (change < tol) {
      result.x_star = profile;
      return result;
    }
  }
  std::ostringstream msg;
  msg << "mean-field iteration did not converge after " << max_iter
      << " sweeps; last residual " << result.residual << ", last profile [";
  for (std::size_t i = 0; i < profile.size(); ++i) {
    if (i) msg << ", ";
    msg << profile[i];
  }
  msg << "]";
  fail(ErrorKind::NonConvergence, msg.str());
}

}  // namespace opg
