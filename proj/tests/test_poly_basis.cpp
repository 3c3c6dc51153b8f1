#include <nlgraph/poly_basis.hpp>

#include <gtest/gtest.h>

#include <functional>
#include <set>

using namespace nlgraph;

namespace
{

// Brute force: every exponent tuple in [0, r]^p with total order in 1..r.
std::size_t brute_force_count(int p, int r)
{
	std::size_t n = 0;
	std::vector<int> e(static_cast<std::size_t>(p), 0);
	std::function<void(int, int)> rec = [&](int d, int used) {
		if (d == p)
		{
			n += used >= 1 ? 1 : 0;
			return;
		}
		for (int a = 0; a + used <= r; ++a)
			rec(d + 1, used + a);
	};
	rec(0, 0);
	return n;
}

} // namespace

TEST(MultiIndex, BasicProperties)
{
	const MultiIndex m({2, 0, 1});
	EXPECT_EQ(m.order(), 3);
	EXPECT_EQ(m.dimension(), 3);
	EXPECT_EQ(m.label(), "2_0_1");
	EXPECT_EQ(m.dimensions(), (std::vector<int>{0, 0, 2}));
	EXPECT_DOUBLE_EQ(m.factorial(), 2.0);
	EXPECT_EQ(MultiIndex::from_dimensions(3, {2, 0, 0}), m);
	EXPECT_THROW(MultiIndex({1, -1}), DomainError);
	EXPECT_THROW(MultiIndex::from_dimensions(2, {2}), DomainError);
	Eigen::Vector3d z(2.0, 5.0, 3.0);
	EXPECT_DOUBLE_EQ(m.monomial(z), 12.0);
}

TEST(Enumerate, ReferenceCounts)
{
	EXPECT_EQ(enumerate_multi_indices(2, 3).size(), 9u);
	EXPECT_EQ(enumerate_multi_indices(3, 2).size(), 9u);
	const auto one = enumerate_multi_indices(1, 3);
	ASSERT_EQ(one.size(), 3u);
	for (int k = 0; k < 3; ++k)
		EXPECT_EQ(one[static_cast<std::size_t>(k)], MultiIndex({k + 1}));
}

TEST(Enumerate, GradedLexOrder)
{
	const auto s = enumerate_multi_indices(2, 3);
	const std::vector<std::vector<int>> expect{{1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}, {3, 0}, {2, 1}, {1, 2}, {0, 3}};
	ASSERT_EQ(s.size(), expect.size());
	for (std::size_t i = 0; i < expect.size(); ++i)
		EXPECT_EQ(s[i].exponents(), expect[i]) << i;
}

TEST(Enumerate, MatchesBruteForceAndClosedForm)
{
	for (int p = 1; p <= 4; ++p)
		for (int r = 0; r <= 6; ++r)
		{
			const auto s = enumerate_multi_indices(p, r);
			EXPECT_EQ(s.size(), brute_force_count(p, r)) << p << "," << r;
			EXPECT_EQ(count_constraints(p, r), s.size());
			std::set<std::vector<int>> distinct;
			for (const auto& m : s.indices)
				distinct.insert(m.exponents());
			EXPECT_EQ(distinct.size(), s.size());
		}
}

TEST(CountConstraints, Examples)
{
	EXPECT_EQ(count_constraints(2, 3), 9u);
	for (int r = 0; r <= 8; ++r)
		EXPECT_EQ(count_constraints(1, r), static_cast<std::uint64_t>(r));
	EXPECT_EQ(count_constraints(2, 2), 5u);
}

TEST(CountConstraints, NonUniqueDominatesUnique)
{
	for (int p = 1; p <= 4; ++p)
		for (int r = 1; r <= 5; ++r)
		{
			const auto u = count_constraints(p, r, CountingMode::unique);
			const auto n = count_constraints(p, r, CountingMode::non_unique);
			EXPECT_EQ(enumerate_multi_indices(p, r, CountingMode::non_unique).size(), n);
			if (p == 1 || r == 1) // only first-order indices: counts agree
				EXPECT_EQ(n, u);
			else
				EXPECT_GT(n, u);
		}
	// p^1 + p^2 for p = 2, r = 2.
	EXPECT_EQ(count_constraints(2, 2, CountingMode::non_unique), 6u);
}

TEST(MomentSystem, OneDimensionalSymmetric)
{
	const double h = 0.3;
	Eigen::MatrixXd z(2, 1);
	z << -h, h;
	const auto sys = assemble_moment_system(z, 0, enumerate_multi_indices(1, 2));
	Eigen::MatrixXd expect(2, 2);
	expect << 1, -h, 1, h;
	EXPECT_TRUE(sys.matrix.isApprox(expect, 1e-15));
	EXPECT_EQ(sys.rhs, Eigen::Vector2d(1, 0));
}

TEST(MomentSystem, TwoDimensionalRowByHand)
{
	const double h = 0.25;
	Eigen::MatrixXd z(1, 2);
	z << h, 0;
	const auto sys = assemble_moment_system(z, 0, enumerate_multi_indices(2, 3));
	Eigen::RowVectorXd expect(9);
	expect << 1, 0, h, 0, 0, h * h, 0, 0, 0;
	EXPECT_TRUE(sys.matrix.row(0).isApprox(expect, 1e-15));
	EXPECT_EQ(sys.rhs(0), 1.0);
	EXPECT_EQ(sys.rhs.sum(), 1.0);
}

TEST(MomentSystem, AlignmentErrorNamesNeighbor)
{
	Eigen::MatrixXd z(3, 2);
	z << 1, 1, 0, 2, 1, -1;
	try
	{
		assemble_moment_system(z, 0, enumerate_multi_indices(2, 1));
		FAIL();
	}
	catch (const AlignmentError& e)
	{
		EXPECT_EQ(e.row(), 1u);
	}
}

TEST(MomentSystem, VandermondeFullRankForDistinctOffsets)
{
	for (int r = 1; r <= 6; ++r)
	{
		Eigen::MatrixXd z(r, 1);
		for (int i = 0; i < r; ++i)
			z(i, 0) = (i % 2 ? -1.0 : 1.0) * (1 + i / 2);
		const auto sys = assemble_moment_system(z, 0, enumerate_multi_indices(1, r));
		EXPECT_EQ(Eigen::FullPivLU<Eigen::MatrixXd>(sys.matrix).rank(), r);
	}
}

TEST(MomentSystem, ScalingLeavesSolutionInvariant)
{
	Eigen::MatrixXd z(5, 2);
	z << 0.1, 0.2, -0.3, 0.1, 0.2, -0.2, 0.4, 0.3, -0.1, -0.4;
	const auto set = enumerate_multi_indices(2, 2);
	const auto a = assemble_moment_system(z, 0, set);
	const auto b = assemble_moment_system(z, 0, set, 0.2);
	const Eigen::VectorXd wa = a.matrix.transpose().fullPivLu().solve(a.rhs);
	const Eigen::VectorXd wb = b.matrix.transpose().fullPivLu().solve(b.rhs);
	EXPECT_TRUE(wa.isApprox(wb, 1e-12));
}
