#include <nlgraph/point_cloud.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

using namespace nlgraph;

namespace
{

std::vector<double> coords(const PointCloud& c, const std::vector<VertexId>& ids)
{
	std::vector<double> out;
	for (VertexId i : ids)
		out.push_back(c.points()(static_cast<Eigen::Index>(i), 0));
	return out;
}

csv::Table parse(const std::string& text)
{
	std::istringstream in(text);
	return csv::read(in);
}

} // namespace

TEST(InterlacedMesh, OneDimensionalSpacingTwo)
{
	const auto c = generate_interlaced_mesh(1, 2, 4.0);
	EXPECT_EQ(coords(c, c.train_ids()), (std::vector<double>{0, 2, 4}));
	EXPECT_EQ(coords(c, c.test_ids()), (std::vector<double>{1, 3}));
	EXPECT_DOUBLE_EQ(*c.length_scale(), 1.0);
}

TEST(InterlacedMesh, SmallestTwoDimensional)
{
	const auto c = generate_interlaced_mesh(2, 1, 2.0);
	ASSERT_EQ(c.train_ids().size(), 4u);
	ASSERT_EQ(c.test_ids().size(), 1u);
	const auto centre = c.point(c.test_ids()[0]);
	EXPECT_DOUBLE_EQ(centre(0), 1.0);
	EXPECT_DOUBLE_EQ(centre(1), 1.0);
	for (VertexId v : c.train_ids())
		for (int d = 0; d < 2; ++d)
			EXPECT_TRUE(c.point(v)(d) == 0.0 || c.point(v)(d) == 2.0);
}

TEST(InterlacedMesh, CountsAndOffsets)
{
	const auto c = generate_interlaced_mesh(1, 4, 1.0);
	EXPECT_EQ(c.train_ids().size() + c.test_ids().size(), 9u);
	EXPECT_DOUBLE_EQ(*c.length_scale(), 0.125);
	const auto test = coords(c, c.test_ids());
	for (std::size_t j = 0; j < test.size(); ++j)
		EXPECT_DOUBLE_EQ(test[j], 0.125 + 0.25 * static_cast<double>(j));
}

TEST(InterlacedMesh, BitExactAndHalving)
{
	const auto a = generate_interlaced_mesh(2, 8, 1.0);
	const auto b = generate_interlaced_mesh(2, 8, 1.0);
	EXPECT_TRUE(a.points() == b.points());
	const auto coarse = generate_interlaced_mesh(2, 4, 1.0);
	EXPECT_EQ(*coarse.length_scale(), 2.0 * *a.length_scale());
}

TEST(InterlacedMesh, CapacityAndDomainErrors)
{
	EXPECT_THROW(generate_interlaced_mesh(3, 100, 1.0, 1000), CapacityError);
	EXPECT_THROW(generate_interlaced_mesh(0, 4, 1.0), DomainError);
	EXPECT_THROW(generate_interlaced_mesh(1, 0, 1.0), DomainError);
	EXPECT_THROW(generate_interlaced_mesh(1, 4, -1.0), DomainError);
}

TEST(LoadPointCloud, ThreeRowsTwoColumns)
{
	const auto d = load_point_cloud(parse("x0,x1\n0,0\n1,0\n0,1\n"));
	EXPECT_EQ(d.cloud.size(), 3u);
	EXPECT_EQ(d.cloud.dimension(), 2);
	EXPECT_EQ(d.cloud.train_ids().size(), 3u);
}

TEST(LoadPointCloud, NonNumericCellNamesLine)
{
	try
	{
		load_point_cloud(parse("x0,x1\n0,0\n1,abc\n"));
		FAIL() << "expected a parse error";
	}
	catch (const ParseError& e)
	{
		EXPECT_EQ(e.line(), 3u);
	}
}

TEST(LoadPointCloud, InconsistentColumnCount)
{
	EXPECT_THROW(load_point_cloud(parse("x0,x1\n0,0\n1\n")), SchemaError);
}

TEST(LoadPointCloud, RolesAndFieldsPassThrough)
{
	const auto d = load_point_cloud(parse("x0,role,u\n0,train,1.5\n0.5,test,2\n1,train,3\n"));
	EXPECT_EQ(d.cloud.train_ids(), (std::vector<VertexId>{0, 2}));
	EXPECT_EQ(d.cloud.test_ids(), (std::vector<VertexId>{1}));
	ASSERT_EQ(d.fields.count("u"), 1u);
	EXPECT_DOUBLE_EQ(d.fields.at("u")(1), 2.0);
	EXPECT_THROW(load_point_cloud(parse("x0,role\n0,validation\n")), ParseError);
}

TEST(LoadPointCloud, WriteReadRoundTrip)
{
	const auto c = generate_interlaced_mesh(2, 3, 0.7);
	std::ostringstream out;
	write_point_cloud(out, c);
	const auto back = load_point_cloud(parse(out.str()));
	EXPECT_TRUE(back.cloud.points() == c.points());
	EXPECT_EQ(back.cloud.roles(), c.roles());
}

TEST(SortedNeighbors, OneDimensional)
{
	Eigen::MatrixXd p(3, 1);
	p << 0, 1, 3;
	const auto q = sorted_neighbors(PointCloud(p), 1);
	EXPECT_EQ(q.candidate_order, (std::vector<VertexId>{0, 2}));
	EXPECT_DOUBLE_EQ(q.distances[0], 1.0);
	EXPECT_DOUBLE_EQ(q.distances[1], 2.0);
}

TEST(SortedNeighbors, CornerOfGridAndTies)
{
	const auto c = generate_interlaced_mesh(2, 2, 2.0); // train lattice spacing 1
	const auto q = sorted_neighbors(c, 0);
	// (0,1) has id 1 and (1,0) has id 3: equidistant, lower id first.
	EXPECT_EQ(q.candidate_order[0], 1u);
	EXPECT_EQ(q.candidate_order[1], 3u);
	EXPECT_DOUBLE_EQ(q.distances[0], 1.0);
}

TEST(SortedNeighbors, PermutationOfTrainVertices)
{
	const auto c = generate_interlaced_mesh(2, 4, 1.0);
	for (VertexId base : {VertexId{0}, VertexId{7}, c.test_ids()[3]})
	{
		auto q = sorted_neighbors(c, base);
		EXPECT_TRUE(std::is_sorted(q.distances.begin(), q.distances.end()));
		std::vector<VertexId> expect;
		for (VertexId v : c.train_ids())
			if (v != base)
				expect.push_back(v);
		std::sort(q.candidate_order.begin(), q.candidate_order.end());
		EXPECT_EQ(q.candidate_order, expect);
	}
	EXPECT_THROW(sorted_neighbors(c, c.size()), DomainError);
}
