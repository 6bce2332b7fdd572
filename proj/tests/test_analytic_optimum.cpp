#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "qkdprobe/analytic_optimum.hpp"
#include "qkdprobe/stationarity.hpp"

using namespace qkdprobe;

TEST(OptimalOverlap, Examples) {
  for (double a : {pi / 12.0, pi / 8.0, pi / 5.0}) {
    const auto o = optimal_overlap(0.0, SignalGeometry(a));
    EXPECT_DOUBLE_EQ(o.overlap, 1.0);
    EXPECT_DOUBLE_EQ(o.renyi_bits, 0.0);
  }
  const auto o = optimal_overlap(0.2, SignalGeometry::standard());
  EXPECT_NEAR(o.overlap, 0.5, 1e-14);
  EXPECT_NEAR(o.renyi_bits, std::log2(1.75), 1e-14);
  EXPECT_EQ(o.branch, Branch::CscBranch);
  EXPECT_EQ(optimal_overlap(0.05, SignalGeometry(pi / 5.0)).branch, Branch::SecBranch);
}

TEST(OptimalOverlap, StandardClosedForm) {
  const auto g = SignalGeometry::standard();
  for (int i = 0; i < 50; ++i) {
    const double E = 0.49 * i / 49.0;
    EXPECT_NEAR(optimal_overlap(E, g).overlap, std::max(-1.0, 3.0 - 2.0 / (1.0 - E)), 1e-12);
  }
}

TEST(OptimalOverlap, DomainErrors) {
  const auto g = SignalGeometry(pi / 12.0);  // E_max = sin^2(pi/6) = 1/4
  EXPECT_NO_THROW(optimal_overlap(0.25, g));
  try {
    optimal_overlap(0.3, g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OutOfDomain);
  }
  EXPECT_THROW(optimal_overlap(-0.01, g), Error);
  EXPECT_THROW(optimal_overlap(0.5, SignalGeometry::standard()), Error);
}

TEST(OptimalOverlap, ReachesMinusOneAtMaxError) {
  for (double a : {pi / 12.0, pi / 10.0, pi / 7.0, pi / 5.0}) {
    const SignalGeometry g(a);
    const double emax = max_error_rate(g);
    if (emax >= 0.5) continue;
    EXPECT_NEAR(optimal_overlap(emax, g).overlap, -1.0, 1e-12);
  }
}

TEST(BranchFormulas, Examples) {
  EXPECT_NEAR(csc_branch_overlap(1.0 / 3.0, SignalGeometry::standard()), 0.0, 1e-15);
  EXPECT_NEAR(csc_branch_overlap(0.3, SignalGeometry(pi / 5.0)), 0.909509, 1e-6);
  EXPECT_DOUBLE_EQ(sec_branch_overlap(0.0, SignalGeometry(0.3)), 1.0);
  EXPECT_NEAR(csc_branch_overlap(0.2, SignalGeometry::standard()),
              sec_branch_overlap(0.2, SignalGeometry::standard()), 1e-15);
}

TEST(BranchFormulas, InterchangeSymmetry) {
  std::mt19937_64 eng(41);
  std::uniform_real_distribution<double> ua(0.01, pi / 8.0);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const double a = ua(eng);
    // admissible range, where |Q| <= 1
    const double E = u01(eng) * std::min(max_error_rate(SignalGeometry(a)), 0.49);
    EXPECT_NEAR(csc_branch_overlap(E, SignalGeometry(a)),
                sec_branch_overlap(E, SignalGeometry(pi / 4.0 - a)), 1e-12);
  }
}

TEST(RenyiOptimum, MonotoneInErrorRate) {
  for (double a : {pi / 12.0, pi / 9.0, pi / 8.0, pi / 6.0}) {
    const SignalGeometry g(a);
    const double emax = std::min(max_error_rate(g), 0.4999);
    double prev = -1.0;
    for (int i = 0; i <= 200; ++i) {
      const double E = emax * i / 200.0;
      const double q = optimal_overlap(E, g).overlap;
      const double I = optimal_renyi_info(E, g);
      // I rises with E while Q >= 0
      if (q >= 0.0) {
        EXPECT_GE(I, prev - 1e-15);
        prev = I;
      }
      EXPECT_NEAR(I, renyi_info(q), 0.0);
    }
  }
}

TEST(RenyiOptimum, SmallerAlphaLowersOverlap) {
  // Q_opt decreases as csc^2 2alpha grows, i.e. as alpha shrinks on CscBranch
  for (double E : {0.05, 0.1, 0.2}) {
    EXPECT_LT(optimal_overlap(E, SignalGeometry(pi / 9.0)).overlap,
              optimal_overlap(E, SignalGeometry::standard()).overlap);
  }
}

TEST(Families, ListingAtStandardAndOff) {
  const auto fs = optimal_parameter_families(0.1, SignalGeometry::standard());
  ASSERT_EQ(fs.size(), 3u);
  EXPECT_EQ(fs[0].tag, FamilyTag::SetE);
  EXPECT_EQ(fs[1].tag, FamilyTag::SetH);
  EXPECT_EQ(fs[2].tag, FamilyTag::SetPhiNeg);
  EXPECT_NEAR(fs[0].rhs, 0.6, 1e-15);
  EXPECT_NEAR(fs[2].rhs, 0.6, 1e-15);
  EXPECT_EQ(optimal_parameter_families(0.1, SignalGeometry(pi / 9.0)).size(), 2u);
  const auto sec = optimal_parameter_families(0.05, SignalGeometry(pi / 5.0));
  EXPECT_EQ(sec[0].branch, Branch::SecBranch);
  EXPECT_NE(sec[0].constraint.find("sec^2"), std::string::npos);
}

TEST(Families, SampleExamples) {
  const auto g = SignalGeometry::standard();
  const auto fs = optimal_parameter_families(0.1, g);
  FreeChoices fc;
  fc.theta = 0.3 * pi;
  fc.phi = 0.9 * pi;
  const auto se = sample_params(fs[0], 0.1, g, fc);
  EXPECT_NEAR(std::sin(2.0 * se.params.mu), 0.6, 1e-14);
  EXPECT_NEAR(overlap(coefficients(se.params), g), 3.0 - 2.0 / 0.9, 1e-12);

  const auto fs0 = optimal_parameter_families(0.0, g);
  const auto sh = sample_params(fs0[1], 0.0, g, FreeChoices{});
  EXPECT_NEAR(sh.params.theta, 0.0, 0.0);
  EXPECT_NEAR(std::sin(2.0 * sh.params.phi), 1.0, 1e-15);
  EXPECT_NEAR(overlap(coefficients(sh.params), g), 1.0, 1e-12);

  const auto fs2 = optimal_parameter_families(0.2, g);
  FreeChoices pl;
  pl.lambda = pi / 2.0;
  const auto sp = sample_params(fs2[2], 0.2, g, pl);
  EXPECT_NEAR(overlap(coefficients(sp.params), g), 0.5, 1e-12);
  const auto sp1 = sample_params(fs[2], 0.1, g, pl);
  EXPECT_NEAR(std::sin(2.0 * sp1.params.mu), 0.6, 1e-14);
}

TEST(Families, RandomDrawsReproduceOptimum) {
  std::mt19937_64 eng(43);
  std::uniform_real_distribution<double> u(0.0, pi);
  for (double a : {pi / 12.0, pi / 9.0, pi / 8.0, pi / 6.0, pi / 5.0}) {
    const SignalGeometry g(a);
    for (double E : {0.02, 0.05, 0.1}) {
      if (E > max_error_rate(g)) continue;
      for (const auto& fam : optimal_parameter_families(E, g)) {
        int ok = 0;
        for (int i = 0; i < 50 && ok < 10; ++i) {
          FreeChoices fc{u(eng), u(eng), u(eng), u(eng),
                         i % 2 ? MuBranch::Upper : MuBranch::Lower};
          FamilySample s;
          try {
            s = sample_params(fam, E, g, fc);
          } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::OutOfDomain);
            continue;
          }
          ++ok;
          EXPECT_TRUE(s.params.in_domain());
          const auto k = coefficients(s.params);
          EXPECT_NEAR(error_rate(k, s.frame), E, 1e-10);
          EXPECT_NEAR(overlap(k, s.frame), optimal_overlap(E, g).overlap, 1e-9);
          EXPECT_LT(stationarity_residuals(s.params, s.frame).max_abs(), 1e-9);
        }
        EXPECT_GT(ok, 0) << to_string(fam.tag) << " alpha=" << a << " E=" << E;
      }
    }
  }
}

TEST(Families, SecBranchDirectFrame) {
  // In the protocol frame for alpha > pi/8 the optimum is reached at
  // theta = pi/2, phi = 3pi/4, mu = pi/4, cos 2lambda = 2E sec^2(2alpha) - 1.
  for (double a : {pi / 6.0, pi / 5.0}) {
    const SignalGeometry g(a);
    for (double E : {0.02, 0.05, 0.1}) {
      const double c2l = 2.0 * E * g.sec2a_sq() - 1.0;
      if (std::abs(c2l) > 1.0) continue;
      const ProbeParams p{0.5 * std::acos(c2l), pi / 4.0, pi / 2.0, 3.0 * pi / 4.0};
      const auto k = coefficients(p);
      EXPECT_NEAR(error_rate(k, g), E, 1e-12);
      EXPECT_NEAR(overlap(k, g), sec_branch_overlap(E, g), 1e-12);
    }
  }
}

TEST(Families, SampleErrors) {
  const auto g = SignalGeometry(pi / 12.0);
  const auto fam = optimal_parameter_families(0.05, g)[0];
  EXPECT_THROW(sample_params(fam, 0.3, g, {}), Error);
  auto phineg = optimal_parameter_families(0.05, SignalGeometry::standard())[2];
  try {
    sample_params(phineg, 0.05, g, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OutOfDomain);
  }
}
