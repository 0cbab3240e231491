#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qpt/probe.hpp"

using namespace qpt;
using namespace qpt::num;
using namespace qpt::probe;
using qpt::measures::DistanceKind;
using qpt::measures::MeasureKind;
using qpt::measures::MeasureTag;
using qpt::states::IncoherentBasis;
using qpt::states::PureState;

namespace {

// Radial two-spin curve: delta = lambda sin(theta), h = lambda cos(theta);
// the level crossing sits at lambda = 1 for every angle.
CurveContext radial_context(double theta, double lo = 0.1, double hi = 2.0) {
  ModelSystem sys;
  sys.type = ModelSystem::Type::XyTwoSpin;
  sys.n_sites = 2;
  model::CurveSpec curve;
  char buf[64];
  std::snprintf(buf, sizeof buf, "lambda*sin(%.17g)", theta);
  curve.delta_expr = expr::parse_expression(buf);
  std::snprintf(buf, sizeof buf, "lambda*cos(%.17g)", theta);
  curve.h_expr = expr::parse_expression(buf);
  curve.lambda_min = lo;
  curve.lambda_max = hi;
  return CurveContext(std::move(sys), std::move(curve));
}

CurveContext constant_context(double delta, double h) {
  ModelSystem sys;
  sys.type = ModelSystem::Type::XyTwoSpin;
  model::CurveSpec curve;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", delta);
  curve.delta_expr = expr::parse_expression(buf);
  std::snprintf(buf, sizeof buf, "%.17g", h);
  curve.h_expr = expr::parse_expression(buf);
  curve.lambda_min = 0.0;
  curve.lambda_max = 10.0;
  return CurveContext(std::move(sys), std::move(curve));
}

MeasureKind coherence_l1_in(std::shared_ptr<const IncoherentBasis> basis) {
  MeasureKind m;
  m.tag = MeasureTag::CoherenceL1;
  m.basis = std::move(basis);
  return m;
}

PureState two_spin_ground(double delta, double h) {
  return states::ground_state(model::build_xy_two_spin(delta, h)).state;
}

}  // namespace

TEST_CASE("line_element_rate: constant, step, and smooth segments") {
  SUBCASE("constant curve gives zero rate") {
    const CurveContext ctx = constant_context(0.4, 0.3);
    for (double lam : {0.5, 1.0, 5.0}) {
      const auto est = line_element_rate(ctx, lam, 1e-2, DistanceKind::Trace);
      CHECK(std::abs(est.value) <= 1e-10);
    }
  }
  SUBCASE("crossing window scales like 1/step") {
    const CurveContext ctx = radial_context(std::numbers::pi / 3.0);
    const double dl = 1e-2;
    // window (1 - dl/2, 1 + dl/2] straddles the crossing
    const auto est = line_element_rate(ctx, 1.0 - dl / 2.0, dl, DistanceKind::Trace);
    // g- and g+ are orthogonal, so their trace distance is 1
    CHECK(est.value >= 0.5 / dl);
  }
  SUBCASE("smooth segment stable under halving") {
    // A ray at fixed angle has an exactly constant ground state, so use a
    // curve whose angle varies to get a genuinely nonzero smooth rate.
    ModelSystem sys;
    sys.type = ModelSystem::Type::XyTwoSpin;
    model::CurveSpec curve;
    curve.delta_expr = expr::parse_expression("0.3 + 0.4*lambda");
    curve.h_expr = expr::parse_expression("1.2");
    curve.lambda_min = 0.0;
    curve.lambda_max = 2.0;
    const CurveContext ctx(std::move(sys), std::move(curve));
    const auto coarse = line_element_rate(ctx, 1.4, 1e-2, DistanceKind::Trace);
    const auto fine = line_element_rate(ctx, 1.4, 5e-3, DistanceKind::Trace);
    CHECK(coarse.value > 0.01);
    CHECK(std::abs(fine.value - coarse.value) <= 0.05 * std::abs(coarse.value));
    CHECK_FALSE(coarse.crossing);
  }
  SUBCASE("degeneracy flag propagates at the crossing") {
    const CurveContext ctx = radial_context(std::numbers::pi / 3.0);
    const auto est = line_element_rate(ctx, 1.0, 1e-2, DistanceKind::Trace);
    CHECK(est.crossing);
  }
  SUBCASE("out of range throws") {
    const CurveContext ctx = radial_context(std::numbers::pi / 3.0);
    CHECK_THROWS_AS(line_element_rate(ctx, 1.999, 1e-2, DistanceKind::Trace), Error);
    CHECK_THROWS_AS(line_element_rate(ctx, 1.0, -1e-2, DistanceKind::Trace), Error);
  }
}

TEST_CASE("measure_susceptibility: step magnitude and entanglement blindness") {
  SUBCASE("l1 coherence step at theta = pi/4") {
    const CurveContext ctx = radial_context(std::numbers::pi / 4.0);
    const auto comp = std::make_shared<IncoherentBasis>(IncoherentBasis::computational(4));
    const double dl = 1e-2;
    const auto est = measure_susceptibility(ctx, coherence_l1_in(comp), 1.0, dl);
    const double want = (std::sin(std::numbers::pi / 4.0) - 1.0) / (2.0 * dl);
    CHECK(est.value == doctest::Approx(want).epsilon(1e-6));
  }
  SUBCASE("entanglement stays bounded across the h = 0 crossing") {
    const CurveContext ctx = radial_context(std::numbers::pi / 2.0);  // h = 0 ray
    MeasureKind ent;
    ent.tag = MeasureTag::GeometricEntanglement;
    ent.split = Bipartition{2, {1}};
    for (double dl : {1e-2, 5e-3, 2.5e-3}) {
      const auto est = measure_susceptibility(ctx, ent, 1.0, dl);
      CHECK(std::abs(est.value) <= 1.0);
    }
  }
  SUBCASE("constant curve gives zero susceptibility") {
    const CurveContext ctx = constant_context(0.8, 0.7);
    const auto comp = std::make_shared<IncoherentBasis>(IncoherentBasis::computational(4));
    const auto est = measure_susceptibility(ctx, coherence_l1_in(comp), 2.0, 1e-2);
    CHECK(std::abs(est.value) <= 1e-10);
  }
}

TEST_CASE("second_susceptibility: flat along the ray where the measure is constant") {
  // Along a fixed-angle ray the ground state depends only on the side of the
  // crossing, so every measure is locally constant in lambda.
  const CurveContext ctx = radial_context(std::numbers::pi / 4.0);
  const auto comp = std::make_shared<IncoherentBasis>(IncoherentBasis::computational(4));
  const auto est = second_susceptibility(ctx, coherence_l1_in(comp), 1.5, 1e-2);
  CHECK(std::abs(est.value) <= 1e-8);
}

TEST_CASE("classify_divergence: spec examples") {
  auto make = [](double lambda, double dl, double v) {
    return SusceptibilityEstimate{lambda, dl, v, EstimateKind::MeasureFirst, false, false};
  };
  SUBCASE("doubling first differences mark a step") {
    const auto rep = classify_divergence(
        {make(1.0, 1e-2, 100.0), make(1.0, 5e-3, 200.0), make(1.0, 2.5e-3, 400.0)});
    CHECK(rep.classification == Classification::Divergent);
    CHECK(rep.first_ratios.size() == 2);
    CHECK(rep.first_ratios[0] == doctest::Approx(2.0));
  }
  SUBCASE("bounded first with doubling second marks a cusp") {
    const auto rep = classify_divergence(
        {make(1.0, 1e-2, 5.0), make(1.0, 5e-3, 5.0), make(1.0, 2.5e-3, 5.0)},
        {{1.0, 1e-2, 50.0, EstimateKind::MeasureSecond, false, false},
         {1.0, 5e-3, 100.0, EstimateKind::MeasureSecond, false, false},
         {1.0, 2.5e-3, 200.0, EstimateKind::MeasureSecond, false, false}});
    CHECK(rep.classification == Classification::Cusp);
  }
  SUBCASE("stable values are finite") {
    const auto rep = classify_divergence(
        {make(1.0, 1e-2, 5.0), make(1.0, 5e-3, 5.1), make(1.0, 2.5e-3, 5.05)});
    CHECK(rep.classification == Classification::Finite);
  }
  SUBCASE("fewer than three levels is an error") {
    CHECK_THROWS_AS(classify_divergence({make(1.0, 1e-2, 1.0), make(1.0, 5e-3, 2.0)}), Error);
  }
  SUBCASE("mismatched lambda is an error") {
    CHECK_THROWS_AS(classify_divergence(
                        {make(1.0, 1e-2, 1.0), make(1.1, 5e-3, 2.0), make(1.0, 2.5e-3, 4.0)}),
                    Error);
  }
}

TEST_CASE("classify_divergence: randomized synthetic profiles") {
  // step -> divergent, kink -> cusp, smooth -> finite, evaluated at the
  // feature point with randomized magnitudes and backgrounds.
  struct Profile {
    double jump, slope, quad;
    double operator()(double x, double xc, int shape) const {
      switch (shape) {
        case 0: return (x < xc ? 0.0 : jump) + slope * x;           // step
        case 1: return jump * std::abs(x - xc) + slope * x;         // kink
        default: return quad * (x - xc) * (x - xc) + slope * x;     // smooth
      }
    }
  };

  std::mt19937 rng(4242);
  std::uniform_real_distribution<double> mag(0.4, 2.0);
  std::uniform_real_distribution<double> bg(-0.3, 0.3);
  std::uniform_real_distribution<double> pos(0.5, 1.5);
  int correct = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const Profile prof{mag(rng), bg(rng), mag(rng)};
    const double lambda_c = pos(rng);
    const std::vector<double> dls{1e-2, 5e-3, 2.5e-3};

    auto run = [&](int shape) {
      std::vector<SusceptibilityEstimate> first, second;
      for (double dl : dls) {
        auto f = [&](double x) { return prof(x, lambda_c, shape); };
        first.push_back({lambda_c, dl, (f(lambda_c + dl) - f(lambda_c - dl)) / (2.0 * dl),
                         EstimateKind::MeasureFirst, false, false});
        second.push_back({lambda_c, dl,
                          (f(lambda_c + dl) - 2.0 * f(lambda_c) + f(lambda_c - dl)) / (dl * dl),
                          EstimateKind::MeasureSecond, false, false});
      }
      return classify_divergence(first, second).classification;
    };
    const bool ok = run(0) == Classification::Divergent && run(1) == Classification::Cusp &&
                    run(2) == Classification::Finite;
    if (ok) ++correct;
  }
  CHECK(correct == 50);
}

TEST_CASE("berry_phase: closed-form values and cyclicity") {
  const ComplexMatrix half_mag = model::magnetization_z(2, 0.5);

  SUBCASE("odd ground state accumulates nothing") {
    const auto res = berry_phase(two_spin_ground(0.5, 0.5), half_mag);
    CHECK(std::abs(res.analytic) <= 1e-12);
    CHECK(std::abs(res.integrated) <= 1e-10);
    CHECK(std::abs(res.analytic - res.integrated) <= 1e-8);
  }
  SUBCASE("even ground state at theta = pi/4 gives 2 pi cos(pi/4)") {
    const auto res = berry_phase(two_spin_ground(1.0, 1.0), half_mag);
    const double want = 2.0 * std::numbers::pi * std::cos(std::numbers::pi / 4.0);
    CHECK(res.analytic == doctest::Approx(want).epsilon(1e-10));
    CHECK(std::abs(res.analytic - res.integrated) <= 1e-8);
  }
  SUBCASE("zero generator gives zero phase") {
    const auto res = berry_phase(two_spin_ground(1.0, 1.0), ComplexMatrix(4, 4));
    CHECK(res.analytic == 0.0);
    CHECK(std::abs(res.integrated) <= 1e-12);
  }
  SUBCASE("half-integer spectrum violates cyclicity") {
    ComplexMatrix halfz(2, 2);
    halfz(0, 0) = 0.5;
    halfz(1, 1) = -0.5;
    CVector up(2, Complex{0.0, 0.0});
    up[0] = 1.0;
    CHECK_THROWS_AS(berry_phase(PureState(up), halfz), Error);
  }
}

TEST_CASE("order_parameter_expectation: magnetization jump values") {
  const ComplexMatrix mag = model::magnetization_z(2);
  CHECK(std::abs(order_parameter_expectation(two_spin_ground(0.5, 0.5), mag)) <= 1e-12);
  CHECK(order_parameter_expectation(two_spin_ground(1.0, 1.0), mag) ==
        doctest::Approx(2.0 * std::cos(std::numbers::pi / 4.0)).epsilon(1e-10));

  CVector zz(4, Complex{0.0, 0.0});
  zz[0] = 1.0;  // |00> is the +2 eigenstate
  CHECK(order_parameter_expectation(PureState(zz), mag) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("theorem3_basis: both proof branches") {
  const double inv = 1.0 / std::sqrt(2.0);

  SUBCASE("partial overlap in dimension 2") {
    CVector zero(2, Complex{0.0, 0.0});
    zero[0] = 1.0;
    CVector plus(2, Complex{inv, 0.0});
    const IncoherentBasis basis = theorem3_basis(PureState(zero), PureState(plus));
    const auto rho_before = states::DensityMatrix::from_pure(PureState(zero));
    const auto rho_after = states::DensityMatrix::from_pure(PureState(plus));
    CHECK(measures::coherence_l1(rho_before, basis) <= 1e-12);
    CHECK(measures::coherence_l1(rho_after, basis) == doctest::Approx(1.0).epsilon(1e-10));
  }
  SUBCASE("orthogonal branch in dimension 3") {
    CVector zero(3, Complex{0.0, 0.0}), one(3, Complex{0.0, 0.0});
    zero[0] = 1.0;
    one[1] = 1.0;
    const IncoherentBasis basis = theorem3_basis(PureState(zero), PureState(one));
    // e1 = (|1> + |2>)/sqrt2, e2 = (|1> - |2>)/sqrt2
    CHECK(std::abs(basis.columns()(1, 1) - Complex{inv, 0.0}) <= 1e-12);
    CHECK(std::abs(basis.columns()(2, 1) - Complex{inv, 0.0}) <= 1e-12);
    CHECK(std::abs(basis.columns()(2, 2) - Complex{-inv, 0.0}) <= 1e-12);
    const auto rho_after = states::DensityMatrix::from_pure(PureState(one));
    CHECK(measures::coherence_l1(rho_after, basis) == doctest::Approx(1.0).epsilon(1e-10));
  }
  SUBCASE("orthogonal ground states across r = 1, dimension 4") {
    const PureState before = two_spin_ground(0.99 * std::sin(std::numbers::pi / 2.0), 0.0);
    const PureState after = two_spin_ground(1.01 * std::sin(std::numbers::pi / 2.0), 0.0);
    const IncoherentBasis basis = theorem3_basis(before, after);
    CHECK(measures::coherence_l1(states::DensityMatrix::from_pure(before), basis) <= 1e-10);
    CHECK(measures::coherence_l1(states::DensityMatrix::from_pure(after), basis) ==
          doctest::Approx(1.0).epsilon(1e-8));
  }
  SUBCASE("identical states and tiny dimensions are rejected") {
    CVector zero(2, Complex{0.0, 0.0});
    zero[0] = 1.0;
    CHECK_THROWS_AS(theorem3_basis(PureState(zero), PureState(zero)), Error);
    CVector one(2, Complex{0.0, 0.0});
    one[1] = 1.0;
    try {
      theorem3_basis(PureState(zero), PureState(one));
      FAIL("expected DimensionTooSmall");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::DimensionTooSmall);
    }
  }
}

TEST_CASE("parity_fourier_basis: two-spin sectors and the bell-basis comparison") {
  const PureState gm = two_spin_ground(0.5, 0.5);   // odd sector
  const PureState gp = two_spin_ground(1.2, 0.0);   // even sector (r > 1)

  const IncoherentBasis basis = parity_fourier_basis(2, gm, gp);
  const auto rho_m = states::DensityMatrix::from_pure(gm);
  const auto rho_p = states::DensityMatrix::from_pure(gp);
  CHECK(measures::coherence_l1(rho_m, basis) <= 1e-10);
  CHECK(measures::coherence_l1(rho_p, basis) == doctest::Approx(1.0).epsilon(1e-8));

  // the fixed bell-type basis sees the same step
  const IncoherentBasis bell = IncoherentBasis::bell_type_2q();
  CHECK(measures::coherence_l1(rho_m, bell) <= 1e-10);
  CHECK(measures::coherence_l1(rho_p, bell) == doctest::Approx(1.0).epsilon(1e-8));

  SUBCASE("error paths") {
    CVector mixed(4, Complex{0.0, 0.0});
    mixed[0] = mixed[1] = 1.0 / std::sqrt(2.0);  // even+odd superposition
    try {
      parity_fourier_basis(2, PureState(mixed), gp);
      FAIL("expected NotParityEigenstates");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::NotParityEigenstates);
    }
    CVector zz(4, Complex{0.0, 0.0}), oo(4, Complex{0.0, 0.0});
    zz[0] = 1.0;
    oo[3] = 1.0;  // both even parity
    try {
      parity_fourier_basis(2, PureState(zz), PureState(oo));
      FAIL("expected SameParity");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::SameParity);
    }
  }
}

TEST_CASE("parity_fourier_basis: N = 4 chain across the factorizing field") {
  const auto before = states::ground_state(
      model::build_xy_chain(4, 0.6, 0.75, model::Boundary::Periodic));
  const auto after = states::ground_state(
      model::build_xy_chain(4, 0.6, 0.85, model::Boundary::Periodic));
  const IncoherentBasis basis = parity_fourier_basis(4, before.state, after.state);
  CHECK(measures::coherence_l1(states::DensityMatrix::from_pure(before.state), basis) <= 1e-8);
  CHECK(measures::coherence_l1(states::DensityMatrix::from_pure(after.state), basis) > 0.1);
}

TEST_CASE("verify_theorem1_bound: holds on smooth segments and across the step") {
  const CurveContext ctx = radial_context(std::numbers::pi / 3.0);
  const auto comp = std::make_shared<IncoherentBasis>(IncoherentBasis::computational(4));

  for (auto kind : {DistanceKind::L1Entrywise, DistanceKind::Trace, DistanceKind::HilbertSchmidt}) {
    MeasureKind m;
    m.tag = MeasureTag::GeometricCoherence;
    m.dist = kind;
    m.basis = comp;
    for (double lam : {0.5, 1.4}) {  // smooth segments
      const auto chk = verify_theorem1_bound(ctx, m, lam, 1e-2, kind);
      CHECK(chk.lhs <= chk.rhs + 1e-10);
    }
    const auto across = verify_theorem1_bound(ctx, m, 1.0 - 5e-3, 1e-2, kind);
    CHECK(across.lhs <= across.rhs + 1e-10);
    CHECK(across.rhs > 0.1);  // both sides are order one at the step
  }

  SUBCASE("constant curve gives 0 <= 0") {
    const CurveContext flat = constant_context(0.3, 0.4);
    MeasureKind m = coherence_l1_in(comp);
    const auto chk = verify_theorem1_bound(flat, m, 1.0, 1e-2, DistanceKind::L1Entrywise);
    CHECK(chk.lhs <= 1e-12);
    CHECK(chk.rhs <= 1e-12);
  }
  SUBCASE("distance mismatch is rejected") {
    MeasureKind m = coherence_l1_in(comp);
    CHECK_THROWS_AS(verify_theorem1_bound(ctx, m, 0.5, 1e-2, DistanceKind::Trace), Error);
  }
}

TEST_CASE("curve context: memoized states and thermal mode") {
  const CurveContext ctx = radial_context(std::numbers::pi / 4.0);
  const auto a = ctx.state_at(0.5);
  const auto b = ctx.state_at(0.5);
  CHECK(a.get() == b.get());  // cache hit returns the same object
  CHECK(a->psi.has_value());

  ModelSystem sys;
  sys.type = ModelSystem::Type::XyTwoSpin;
  model::CurveSpec curve;
  curve.delta_expr = expr::parse_expression("lambda");
  curve.h_expr = expr::parse_expression("0.2");
  curve.beta_expr = expr::parse_expression("50");
  curve.lambda_min = 0.0;
  curve.lambda_max = 2.0;
  const CurveContext thermal(std::move(sys), std::move(curve));
  const auto t = thermal.state_at(0.5);
  CHECK_FALSE(t->psi.has_value());
  CHECK_FALSE(t->point.zero_temperature);
  CHECK(std::abs(num::trace(t->rho.matrix()).real() - 1.0) <= 1e-12);
}
