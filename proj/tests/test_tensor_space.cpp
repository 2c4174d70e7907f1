#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "rmiga/tensor_space.hpp"

using namespace rmiga;

namespace {

// Value of scalar basis function s at (x, y) from the 1D global recursion.
double tensor_value(const DiscreteSpace& space, int s, double x, double y) {
  const auto idx = space.tensor_index(s);
  return basis_function(space.knots(0), idx[0], x) * basis_function(space.knots(1), idx[1], y);
}

std::vector<std::pair<double, double>> boundary_points(int count, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> t(0.0, 1.0);
  std::vector<std::pair<double, double>> pts;
  for (int i = 0; i < count; ++i) {
    const double s = t(rng);
    switch (i % 4) {
      case 0: pts.emplace_back(s, 0.0); break;
      case 1: pts.emplace_back(1.0, s); break;
      case 2: pts.emplace_back(s, 1.0); break;
      default: pts.emplace_back(0.0, s); break;
    }
  }
  return pts;
}

}  // namespace

TEST(ScalarSpace, QuadraticDirichletCounts) {
  const DiscreteSpace s = make_scalar_space(5, 2, 1, Boundary::homogeneous_dirichlet);
  EXPECT_EQ(s.dof_count(), 49);
  EXPECT_EQ(s.free_dof_count(), 25);
  EXPECT_EQ(static_cast<int>(std::count(s.dirichlet_mask().begin(), s.dirichlet_mask().end(), true)), 24);
}

TEST(ScalarSpace, SingleConstant) {
  const DiscreteSpace s = make_scalar_space(1, 0, -1, Boundary::none);
  EXPECT_EQ(s.dof_count(), 1);
  EXPECT_EQ(s.free_dof_count(), 1);
}

TEST(ScalarSpace, BrokenLinearCount) {
  const DiscreteSpace s = make_scalar_space(5, 1, -1, Boundary::none);
  EXPECT_EQ(s.dof_count(), 100);
  for (bool m : s.dirichlet_mask()) EXPECT_FALSE(m);
}

TEST(ScalarSpace, DirichletOnBrokenSpaceRejected) {
  EXPECT_THROW(make_scalar_space(5, 2, -1, Boundary::homogeneous_dirichlet), ConfigError);
}

TEST(ScalarSpace, InvalidParametersRejected) {
  EXPECT_THROW(make_scalar_space(5, 2, 2, Boundary::none), ConfigError);
  EXPECT_THROW(make_scalar_space(0, 2, 1, Boundary::none), ConfigError);
  const int four[4] = {2, 2, 2, 2};
  EXPECT_THROW(make_scalar_space(four, 1, 0, Boundary::none), ConfigError);
}

TEST(ScalarSpace, OneAndThreeDimensional) {
  const int one[1] = {4};
  EXPECT_EQ(make_scalar_space(one, 2, 1, Boundary::homogeneous_dirichlet).free_dof_count(), 4);
  const int three[3] = {2, 3, 4};
  const DiscreteSpace s = make_scalar_space(three, 1, 0, Boundary::none);
  EXPECT_EQ(s.dof_count(), 3 * 4 * 5);
  EXPECT_EQ(s.dof_map().element_count, 24);
  EXPECT_EQ(s.dof_map().local_count, 8);
}

TEST(VectorSpace, Counts) {
  EXPECT_EQ(make_vector_space(5, 2, 1).dof_count(), 98);
  EXPECT_EQ(make_vector_space(1, 0, -1).dof_count(), 2);
  EXPECT_EQ(make_vector_space(5, 1, 0).dof_count(), 72);
}

TEST(VectorSpace, ComponentMajorOrdering) {
  const DiscreteSpace v = make_vector_space(3, 1, 0);
  const DofMap map = v.dof_map();
  const int half = map.local_count / 2;
  for (int e = 0; e < map.element_count; ++e) {
    const auto idx = map.element(e);
    for (int a = 0; a < half; ++a) {
      EXPECT_LT(idx[static_cast<std::size_t>(a)], v.scalar_dof_count());
      EXPECT_EQ(idx[static_cast<std::size_t>(a + half)], idx[static_cast<std::size_t>(a)] + v.scalar_dof_count());
    }
  }
}

TEST(DimensionConstraint, Examples) {
  const DiscreteSpace trial = make_scalar_space(5, 2, 1, Boundary::homogeneous_dirichlet);
  const DiscreteSpace broken = make_scalar_space(5, 2, -1, Boundary::none);
  EXPECT_EQ(broken.dof_count(), 225);
  EXPECT_TRUE(check_dimension_constraint(trial, broken));
  EXPECT_TRUE(check_dimension_constraint(trial, trial));
  const DiscreteSpace cubic = make_scalar_space(5, 3, 2, Boundary::homogeneous_dirichlet);
  const DiscreteSpace linear = make_scalar_space(5, 1, 0, Boundary::homogeneous_dirichlet);
  EXPECT_EQ(cubic.dof_count(), 64);
  EXPECT_EQ(cubic.free_dof_count(), 36);
  EXPECT_EQ(linear.free_dof_count(), 16);
  EXPECT_FALSE(check_dimension_constraint(cubic, linear));
}

TEST(SpaceProperties, TensorPartitionOfUnity) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> t(0.0, 1.0);
  for (int p = 0; p <= 3; ++p)
    for (int k = -1; k <= p - 1; ++k) {
      const DiscreteSpace s = make_scalar_space(4, p, k, Boundary::none);
      for (int i = 0; i < 30; ++i) {
        const double x = t(rng), y = t(rng);
        double sum = 0.0;
        for (int d = 0; d < s.dof_count(); ++d) sum += tensor_value(s, d, x, y);
        EXPECT_NEAR(sum, 1.0, 1e-12);
      }
    }
}

TEST(SpaceProperties, MaskMatchesBoundaryTrace) {
  const auto pts = boundary_points(200, 17);
  for (int p = 1; p <= 4; ++p)
    for (int k = 0; k <= p - 1; ++k) {
      const DiscreteSpace s = make_scalar_space(3, p, k, Boundary::homogeneous_dirichlet);
      for (int d = 0; d < s.dof_count(); ++d) {
        double trace = 0.0;
        for (const auto& [x, y] : pts) trace = std::max(trace, std::abs(tensor_value(s, d, x, y)));
        if (s.dirichlet_mask()[static_cast<std::size_t>(d)])
          EXPECT_GT(trace, 1e-3) << "masked function " << d << " should be active on the boundary";
        else
          EXPECT_LT(trace, 1e-14) << "free function " << d << " is nonzero on the boundary";
      }
    }
}

TEST(SpaceProperties, FreeIndexIsBijection) {
  const DiscreteSpace s = make_scalar_space(4, 3, 1, Boundary::homogeneous_dirichlet);
  const auto f2g = s.free_to_global();
  const auto fi = s.free_index();
  for (std::size_t i = 0; i < f2g.size(); ++i) EXPECT_EQ(fi[static_cast<std::size_t>(f2g[i])], static_cast<int>(i));
  for (std::size_t g = 0; g < fi.size(); ++g)
    EXPECT_EQ(fi[g] < 0, static_cast<bool>(s.dirichlet_mask()[g]));
}

TEST(SpaceProperties, DofMapCoversAllDofs) {
  for (int p = 0; p <= 3; ++p)
    for (int k = -1; k <= p - 1; ++k) {
      const DiscreteSpace s = make_vector_space(3, p, k);
      const DofMap map = s.dof_map();
      int local_scalar = (p + 1) * (p + 1);
      EXPECT_EQ(map.local_count, 2 * local_scalar);
      std::set<int> seen(map.indices.begin(), map.indices.end());
      EXPECT_EQ(static_cast<int>(seen.size()), s.dof_count());
      EXPECT_EQ(*seen.begin(), 0);
      EXPECT_EQ(*seen.rbegin(), s.dof_count() - 1);
      for (int e = 0; e < map.element_count; ++e) {
        const auto idx = map.element(e);
        EXPECT_EQ(std::set<int>(idx.begin(), idx.end()).size(), idx.size());
      }
    }
}

TEST(SpaceProperties, NeighbourSharing) {
  // x-neighbours share (p+1)*(k+1) scalar functions: the k+1 columns that overlap
  for (int p = 1; p <= 3; ++p)
    for (int k = -1; k <= p - 1; ++k) {
      const DiscreteSpace s = make_scalar_space(4, p, k, Boundary::none);
      const DofMap map = s.dof_map();
      for (int ey = 0; ey < 4; ++ey)
        for (int ex = 0; ex + 1 < 4; ++ex) {
          const auto a = map.element(ex + 4 * ey), b = map.element(ex + 1 + 4 * ey);
          std::set<int> sa(a.begin(), a.end()), shared;
          for (int g : b)
            if (sa.count(g)) shared.insert(g);
          EXPECT_EQ(static_cast<int>(shared.size()), (p + 1) * (k + 1)) << "p=" << p << " k=" << k;
          // the shared functions are exactly those nonzero on both elements
          const double xa = (ex + 0.5) / 4.0, xb = (ex + 1.5) / 4.0, y = (ey + 0.5) / 4.0;
          for (int g = 0; g < s.dof_count(); ++g) {
            const bool both = tensor_value(s, g, xa, y) > 0.0 && tensor_value(s, g, xb, y) > 0.0;
            EXPECT_EQ(both, shared.count(g) == 1) << "dof " << g;
          }
        }
    }
}
