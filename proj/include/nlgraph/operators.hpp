#pragma once

#include "csv.hpp"
#include "errors.hpp"
#include "point_cloud.hpp"
#include "poly_basis.hpp"
#include "stencil.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

namespace nlgraph
{

/// Scalar samples u(x) aligned with the vertex ids of a cloud.
struct FieldSamples
{
	Eigen::VectorXd values;
	std::string name = "u";
};

/// Values of a non-local derivative. `values` has one entry per cloud vertex;
/// entries without a stencil (test vertices, skipped failures) are NaN.
struct DerivativeField
{
	/// Dimensions in application order, left to right.
	std::vector<int> dimensions;
	MultiIndex index;
	Eigen::VectorXd values;
	std::vector<VertexId> vertices;
	int nominal_accuracy = 0;

	int order() const noexcept { return static_cast<int>(dimensions.size()); }
};

namespace detail
{

inline Eigen::VectorXd apply_first(const StencilSet& s, const Eigen::VectorXd& u, int mu)
{
	if (mu < 0 || mu >= s.dimension())
		throw DomainError("derivative dimension " + std::to_string(mu) + " out of range");
	Eigen::VectorXd out = Eigen::VectorXd::Constant(u.size(), std::numeric_limits<double>::quiet_NaN());
	for (VertexId v : s.bases())
	{
		if (!s.has(v, mu))
			continue;
		const Stencil& st = s.at(v, mu);
		const auto& nb = st.neighborhood;
		const double u0 = u(static_cast<Eigen::Index>(v));
		double acc = 0.0;
		for (std::size_t i = 0; i < nb.size(); ++i)
		{
			const auto ii = static_cast<Eigen::Index>(i);
			acc += (u(static_cast<Eigen::Index>(nb.members[i])) - u0) / nb.offsets(ii, mu) * st.weights(ii);
		}
		out(static_cast<Eigen::Index>(v)) = acc;
	}
	return out;
}

inline void check_field(const StencilSet& s, const Eigen::VectorXd& u)
{
	if (static_cast<std::size_t>(u.size()) != s.vertex_count())
		throw DomainError("field has " + std::to_string(u.size()) + " samples, cloud has " +
			std::to_string(s.vertex_count()));
}

} // namespace detail

/// sum over N^mu(x) of (u(y) - u(x)) a^mu(y - x) / (y^mu - x^mu).
inline DerivativeField first_derivative(const StencilSet& stencils, const FieldSamples& u, int mu)
{
	detail::check_field(stencils, u.values);
	return DerivativeField{{mu}, MultiIndex::unit(stencils.dimension(), mu),
		detail::apply_first(stencils, u.values, mu), stencils.bases(), stencils.accuracy()};
}

/// Applies the first derivative once per entry of `dims`, left to right, reusing
/// the same stencil set at every step.
inline DerivativeField higher_derivative(const StencilSet& stencils, const FieldSamples& u, const std::vector<int>& dims)
{
	detail::check_field(stencils, u.values);
	if (dims.empty())
		throw DomainError("derivative needs at least one dimension");
	Eigen::VectorXd cur = u.values;
	for (int mu : dims)
		cur = detail::apply_first(stencils, cur, mu);
	const int l = static_cast<int>(dims.size());
	return DerivativeField{dims, MultiIndex::from_dimensions(stencils.dimension(), dims), std::move(cur),
		stencils.bases(), stencils.accuracy() + 1 - l};
}

inline DerivativeField higher_derivative(const StencilSet& stencils, const FieldSamples& u, const MultiIndex& index)
{
	return higher_derivative(stencils, u, index.dimensions());
}

/// Variant with an independent stencil set for each recursion step; step i
/// (0-based) uses `per_step[i]`.
inline DerivativeField higher_derivative(const std::vector<const StencilSet*>& per_step, const FieldSamples& u,
	const std::vector<int>& dims)
{
	if (per_step.size() < dims.size() || dims.empty())
		throw DomainError("one stencil set required per derivative step");
	Eigen::VectorXd cur = u.values;
	for (std::size_t i = 0; i < dims.size(); ++i)
	{
		detail::check_field(*per_step[i], cur);
		cur = detail::apply_first(*per_step[i], cur, dims[i]);
	}
	const auto& last = *per_step[dims.size() - 1];
	return DerivativeField{dims, MultiIndex::from_dimensions(last.dimension(), dims), std::move(cur), last.bases(),
		last.accuracy() + 1 - static_cast<int>(dims.size())};
}

/// Nodal-coefficient matrix over all cloud vertices; rows without a stencil are empty.
struct SparseOperator
{
	Eigen::SparseMatrix<double, Eigen::RowMajor> matrix;
	std::vector<int> dimensions;

	Eigen::VectorXd apply(const Eigen::VectorXd& u) const { return matrix * u; }
};

/// Matrix of one first-derivative step: entry (x, y) = a / z^mu, diagonal = -sum.
inline Eigen::SparseMatrix<double, Eigen::RowMajor> first_derivative_matrix(const StencilSet& s, int mu)
{
	const auto n = static_cast<Eigen::Index>(s.vertex_count());
	std::vector<Eigen::Triplet<double>> trip;
	for (VertexId v : s.bases())
	{
		if (!s.has(v, mu))
			continue;
		const Stencil& st = s.at(v, mu);
		const auto& nb = st.neighborhood;
		double diag = 0.0;
		for (std::size_t i = 0; i < nb.size(); ++i)
		{
			const auto ii = static_cast<Eigen::Index>(i);
			const double c = st.weights(ii) / nb.offsets(ii, mu);
			trip.emplace_back(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(nb.members[i]), c);
			diag -= c;
		}
		trip.emplace_back(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(v), diag);
	}
	Eigen::SparseMatrix<double, Eigen::RowMajor> m(n, n);
	m.setFromTriplets(trip.begin(), trip.end());
	return m;
}

/// Composition of first-derivative matrices in the order of `dims`: the first
/// entry acts on u first, so the product is D_{last} ... D_{first}.
inline SparseOperator as_sparse_operator(const StencilSet& stencils, const std::vector<int>& dims)
{
	if (dims.empty())
		throw DomainError("operator needs at least one dimension");
	Eigen::SparseMatrix<double, Eigen::RowMajor> m = first_derivative_matrix(stencils, dims.front());
	for (std::size_t i = 1; i < dims.size(); ++i)
	{
		Eigen::SparseMatrix<double, Eigen::RowMajor> next = first_derivative_matrix(stencils, dims[i]) * m;
		m = std::move(next);
	}
	m.makeCompressed();
	return SparseOperator{std::move(m), dims};
}

inline SparseOperator as_sparse_operator(const StencilSet& stencils, const MultiIndex& index)
{
	return as_sparse_operator(stencils, index.dimensions());
}

/// Coordinate-triplet CSV: row,col,value.
inline void write_triplets(std::ostream& out, const SparseOperator& op)
{
	csv::Writer w(out);
	w.header({"row", "col", "value"});
	for (Eigen::Index r = 0; r < op.matrix.outerSize(); ++r)
		for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(op.matrix, r); it; ++it)
			out << it.row() << ',' << it.col() << ',' << csv::format_real(it.value()) << '\n';
}

// ---------------------------------------------------------------------------
// Edge-level vector calculus: gradient, contraction and unit vectors.

/// Values on directed edges (x, y), x != y, of a graph with `vertex_count` vertices.
/// Row x holds the edges leaving x.
struct EdgeField
{
	Eigen::SparseMatrix<double, Eigen::RowMajor> values;
	std::size_t vertex_count = 0;
};

namespace detail
{

inline void check_nonnegative(const EdgeField& w)
{
	for (Eigen::Index r = 0; r < w.values.outerSize(); ++r)
		for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(w.values, r); it; ++it)
			if (it.value() < 0.0)
				throw DomainError("negative edge weight on (" + std::to_string(it.row()) + ", " +
					std::to_string(it.col()) + ")");
}

} // namespace detail

/// [u(y) - u(x)] sqrt(w(x, y)) on every stored edge.
inline EdgeField nonlocal_gradient(const Eigen::VectorXd& u, const EdgeField& w)
{
	detail::check_nonnegative(w);
	EdgeField g{w.values, w.vertex_count};
	for (Eigen::Index r = 0; r < g.values.outerSize(); ++r)
		for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(g.values, r); it; ++it)
			it.valueRef() = (u(it.col()) - u(it.row())) * std::sqrt(it.value());
	return g;
}

/// Gradient of the coordinate x^mu.
inline EdgeField unit_vector(const Eigen::MatrixXd& points, const EdgeField& w, int mu)
{
	return nonlocal_gradient(points.col(mu), w);
}

/// (1 / (n - 1)) sum over y != x of va(x, y) vb(x, y).
inline double dot(const EdgeField& va, const EdgeField& vb, VertexId x)
{
	if (va.vertex_count < 2)
		throw DomainError("contraction needs at least two vertices");
	const auto r = static_cast<Eigen::Index>(x);
	double s = 0.0;
	for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(va.values, r); it; ++it)
		if (it.col() != r)
			s += it.value() * vb.values.coeff(r, it.col());
	return s / static_cast<double>(va.vertex_count - 1);
}

/// Contraction of the gradient of u with the mu unit vector written as a single
/// sum, (1 / (n - 1)) sum (u(y) - u(x)) (y^mu - x^mu) w(x, y). Unlike the
/// factored form it accepts signed weights.
inline double contract_gradient(const Eigen::VectorXd& u, const Eigen::MatrixXd& points, const EdgeField& w, int mu,
	VertexId x)
{
	if (w.vertex_count < 2)
		throw DomainError("contraction needs at least two vertices");
	const auto r = static_cast<Eigen::Index>(x);
	double s = 0.0;
	for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(w.values, r); it; ++it)
		if (it.col() != r)
			s += (u(it.col()) - u(r)) * (points(it.col(), mu) - points(r, mu)) * it.value();
	return s / static_cast<double>(w.vertex_count - 1);
}

/// Edge weights realizing a stencil set's mu-derivative through the contraction:
/// w(x, y) = (n - 1) a / (y^mu - x^mu)^2 with n the number of train vertices.
/// The local form normalizes by |N(x)| and folds it into w; here the factor
/// |N| is replaced by the graph-wide n - 1 so the two definitions coincide.
inline EdgeField stencil_edge_weights(const StencilSet& s, std::size_t train_count, int mu)
{
	const auto n = static_cast<Eigen::Index>(s.vertex_count());
	std::vector<Eigen::Triplet<double>> trip;
	const double scale = static_cast<double>(train_count) - 1.0;
	for (VertexId v : s.bases())
	{
		if (!s.has(v, mu))
			continue;
		const Stencil& st = s.at(v, mu);
		for (std::size_t i = 0; i < st.neighborhood.size(); ++i)
		{
			const auto ii = static_cast<Eigen::Index>(i);
			const double z = st.neighborhood.offsets(ii, mu);
			trip.emplace_back(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(st.neighborhood.members[i]),
				scale * st.weights(ii) / (z * z));
		}
	}
	EdgeField w{Eigen::SparseMatrix<double, Eigen::RowMajor>(n, n), train_count};
	w.values.setFromTriplets(trip.begin(), trip.end());
	return w;
}

/// Gaussian weights of one dimension as an edge field over cloud vertex ids.
inline EdgeField gaussian_edge_weights(const GaussianWeights& g, std::size_t cloud_size, int mu)
{
	std::vector<Eigen::Triplet<double>> trip;
	const auto& w = g.weights.at(static_cast<std::size_t>(mu));
	for (Eigen::Index i = 0; i < w.rows(); ++i)
		for (Eigen::Index j = 0; j < w.cols(); ++j)
			if (i != j && w(i, j) != 0.0)
				trip.emplace_back(static_cast<Eigen::Index>(g.vertices[static_cast<std::size_t>(i)]),
					static_cast<Eigen::Index>(g.vertices[static_cast<std::size_t>(j)]), w(i, j));
	const auto n = static_cast<Eigen::Index>(cloud_size);
	EdgeField e{Eigen::SparseMatrix<double, Eigen::RowMajor>(n, n), g.vertices.size()};
	e.values.setFromTriplets(trip.begin(), trip.end());
	return e;
}

/// First derivative along mu from Gaussian weights, at every train vertex.
inline Eigen::VectorXd gaussian_first_derivative(const PointCloud& cloud, const GaussianWeights& g,
	const Eigen::VectorXd& u, int mu)
{
	Eigen::VectorXd out = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(cloud.size()),
		std::numeric_limits<double>::quiet_NaN());
	const auto& w = g.weights.at(static_cast<std::size_t>(mu));
	const double norm = 1.0 / static_cast<double>(g.vertices.size() - 1);
	for (std::size_t i = 0; i < g.vertices.size(); ++i)
	{
		const auto xi = static_cast<Eigen::Index>(g.vertices[i]);
		double s = 0.0;
		for (std::size_t j = 0; j < g.vertices.size(); ++j)
		{
			const auto yj = static_cast<Eigen::Index>(g.vertices[j]);
			s += (u(yj) - u(xi)) * (cloud.points()(yj, mu) - cloud.points()(xi, mu)) *
				w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
		}
		out(xi) = s * norm;
	}
	return out;
}

} // namespace nlgraph
