#pragma once

#include "csv.hpp"
#include "errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace nlgraph
{

using VertexId = std::size_t;

enum class Role
{
	train,
	test
};

inline const char* to_string(Role r) { return r == Role::train ? "train" : "test"; }

/// Vertices of the graph, embedded as points in R^p, each tagged train or test.
/// Immutable after construction.
class PointCloud
{
public:
	PointCloud(Eigen::MatrixXd points, std::vector<Role> roles, std::optional<double> h = std::nullopt)
		: points_(std::move(points)), roles_(std::move(roles)), h_(h)
	{
		if (points_.rows() < 1 || points_.cols() < 1)
			throw DomainError("point cloud needs n >= 1 points and p >= 1 dimensions");
		if (static_cast<Eigen::Index>(roles_.size()) != points_.rows())
			throw DomainError("one role tag required per point");
		if (!points_.allFinite())
			throw DomainError("point coordinates must be finite");
		if (h_ && !(*h_ > 0.0))
			throw DomainError("length scale h must be positive");
		for (VertexId i = 0; i < roles_.size(); ++i)
			(roles_[i] == Role::train ? train_ : test_).push_back(i);
	}

	/// All points tagged train.
	explicit PointCloud(Eigen::MatrixXd points)
		: PointCloud(points, std::vector<Role>(static_cast<std::size_t>(points.rows()), Role::train))
	{
	}

	std::size_t size() const noexcept { return roles_.size(); }
	int dimension() const noexcept { return static_cast<int>(points_.cols()); }
	const Eigen::MatrixXd& points() const noexcept { return points_; }
	auto point(VertexId i) const { return points_.row(static_cast<Eigen::Index>(i)); }
	Role role(VertexId i) const { return roles_[i]; }
	const std::vector<Role>& roles() const noexcept { return roles_; }
	std::optional<double> length_scale() const noexcept { return h_; }

	const std::vector<VertexId>& train_ids() const noexcept { return train_; }
	const std::vector<VertexId>& test_ids() const noexcept { return test_; }

private:
	Eigen::MatrixXd points_;
	std::vector<Role> roles_;
	std::optional<double> h_;
	std::vector<VertexId> train_;
	std::vector<VertexId> test_;
};

inline constexpr std::size_t default_max_points = 20'000'000;

/// Training lattice of (m+1)^p points at spacing 2h covering [0, L]^p, interlaced
/// with m^p test points offset by h along every dimension; h = L / (2m).
/// Train vertices come first, both blocks in row-major lattice order
/// (dimension 0 varies slowest).
inline PointCloud generate_interlaced_mesh(int p, long m, double L,
	std::size_t max_points = default_max_points)
{
	if (p < 1 || m < 1 || !(L > 0.0) || !std::isfinite(L))
		throw DomainError("interlaced mesh requires p >= 1, m >= 1, L > 0");

	auto checked_pow = [&](long base) {
		std::size_t n = 1;
		for (int d = 0; d < p; ++d)
		{
			if (n > max_points / static_cast<std::size_t>(base))
				throw CapacityError("interlaced mesh with p=" + std::to_string(p) + ", m=" +
					std::to_string(m) + " exceeds the maximum of " + std::to_string(max_points) + " points");
			n *= static_cast<std::size_t>(base);
		}
		return n;
	};
	const std::size_t n_train = checked_pow(m + 1);
	const std::size_t n_test = checked_pow(m);
	if (n_train + n_test > max_points)
		throw CapacityError("interlaced mesh exceeds the maximum of " + std::to_string(max_points) + " points");

	const double h = L / (2.0 * static_cast<double>(m));
	Eigen::MatrixXd pts(static_cast<Eigen::Index>(n_train + n_test), p);
	std::vector<Role> roles;
	roles.reserve(n_train + n_test);

	auto fill = [&](std::size_t count, long per_dim, double offset, Eigen::Index row0, Role role) {
		std::vector<long> j(static_cast<std::size_t>(p), 0);
		for (std::size_t c = 0; c < count; ++c)
		{
			for (int d = 0; d < p; ++d)
				pts(row0 + static_cast<Eigen::Index>(c), d) = offset + 2.0 * h * static_cast<double>(j[d]);
			roles.push_back(role);
			for (int d = p - 1; d >= 0; --d)
			{
				if (++j[d] < per_dim)
					break;
				j[d] = 0;
			}
		}
	};
	fill(n_train, m + 1, 0.0, 0, Role::train);
	fill(n_test, m, h, static_cast<Eigen::Index>(n_train), Role::test);
	return PointCloud(std::move(pts), std::move(roles), h);
}

/// A point cloud read from CSV together with any extra numeric columns.
struct CloudData
{
	PointCloud cloud;
	std::map<std::string, Eigen::VectorXd> fields;
};

/// Reads `x0..x{p-1}` coordinate columns, an optional `role` column (train/test)
/// and any further numeric columns as named fields.
inline CloudData load_point_cloud(const csv::Table& table)
{
	std::vector<int> coord_cols;
	for (int d = 0;; ++d)
	{
		const int c = table.column("x" + std::to_string(d));
		if (c < 0)
			break;
		coord_cols.push_back(c);
	}
	if (coord_cols.empty())
		throw SchemaError("point cloud CSV needs coordinate columns x0..x{p-1}");
	const int role_col = table.column("role");
	std::vector<int> field_cols;
	for (int c = 0; c < static_cast<int>(table.header.size()); ++c)
		if (c != role_col && std::find(coord_cols.begin(), coord_cols.end(), c) == coord_cols.end())
			field_cols.push_back(c);

	const auto n = static_cast<Eigen::Index>(table.rows.size());
	if (n == 0)
		throw SchemaError("point cloud CSV has no data rows");
	Eigen::MatrixXd pts(n, static_cast<Eigen::Index>(coord_cols.size()));
	std::vector<Role> roles(static_cast<std::size_t>(n), Role::train);
	std::map<std::string, Eigen::VectorXd> fields;
	for (int c : field_cols)
		fields[table.header[static_cast<std::size_t>(c)]] = Eigen::VectorXd(n);

	for (Eigen::Index i = 0; i < n; ++i)
	{
		const auto& row = table.rows[static_cast<std::size_t>(i)];
		const std::size_t line = table.lines[static_cast<std::size_t>(i)];
		for (std::size_t d = 0; d < coord_cols.size(); ++d)
			pts(i, static_cast<Eigen::Index>(d)) = csv::parse_real(row[static_cast<std::size_t>(coord_cols[d])], line);
		if (role_col >= 0)
		{
			const auto& tag = row[static_cast<std::size_t>(role_col)];
			if (tag == "train")
				roles[static_cast<std::size_t>(i)] = Role::train;
			else if (tag == "test")
				roles[static_cast<std::size_t>(i)] = Role::test;
			else
				throw ParseError("role must be 'train' or 'test', got '" + tag + "'", line);
		}
		for (int c : field_cols)
			fields[table.header[static_cast<std::size_t>(c)]](i) =
				csv::parse_real(row[static_cast<std::size_t>(c)], line);
	}
	return CloudData{PointCloud(std::move(pts), std::move(roles)), std::move(fields)};
}

inline CloudData load_point_cloud(const std::string& path)
{
	return load_point_cloud(csv::read_file(path));
}

inline void write_point_cloud(std::ostream& out, const PointCloud& cloud,
	const std::map<std::string, Eigen::VectorXd>& fields = {})
{
	std::vector<std::string> header;
	for (int d = 0; d < cloud.dimension(); ++d)
		header.push_back("x" + std::to_string(d));
	header.emplace_back("role");
	for (const auto& [name, _] : fields)
		header.push_back(name);
	csv::Writer w(out);
	w.header(header);
	for (VertexId i = 0; i < cloud.size(); ++i)
	{
		std::vector<std::string> row;
		for (int d = 0; d < cloud.dimension(); ++d)
			row.push_back(csv::format_real(cloud.points()(static_cast<Eigen::Index>(i), d)));
		row.emplace_back(to_string(cloud.role(i)));
		for (const auto& [_, values] : fields)
			row.push_back(csv::format_real(values(static_cast<Eigen::Index>(i))));
		w.row(row);
	}
}

/// Train vertices other than `base`, ordered by Euclidean distance to `base`.
struct NeighborQuery
{
	VertexId base_index;
	std::vector<VertexId> candidate_order;
	std::vector<double> distances;
};

/// Exact sort of all train vertices (except the base) by distance; equidistant
/// vertices are ordered by ascending id.
inline NeighborQuery sorted_neighbors(const PointCloud& cloud, VertexId base)
{
	if (base >= cloud.size())
		throw DomainError("vertex id " + std::to_string(base) + " out of range");
	const auto& ids = cloud.train_ids();
	const auto x = cloud.point(base);
	std::vector<std::pair<double, VertexId>> keyed;
	keyed.reserve(ids.size());
	for (VertexId j : ids)
		if (j != base)
			keyed.emplace_back((cloud.point(j) - x).squaredNorm(), j);
	std::sort(keyed.begin(), keyed.end());

	NeighborQuery q{base, {}, {}};
	q.candidate_order.reserve(keyed.size());
	q.distances.reserve(keyed.size());
	for (const auto& [d2, j] : keyed)
	{
		q.candidate_order.push_back(j);
		q.distances.push_back(std::sqrt(d2));
	}
	return q;
}

} // namespace nlgraph
