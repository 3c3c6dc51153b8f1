#pragma once

#include "errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

namespace nlgraph
{

/// Exponent tuple (a_0, ..., a_{p-1}) of a monomial x^a; its order is the sum.
class MultiIndex
{
public:
	MultiIndex() = default;
	explicit MultiIndex(std::vector<int> exponents) : exps_(std::move(exponents))
	{
		for (int a : exps_)
			if (a < 0)
				throw DomainError("multi-index exponents must be non-negative");
	}

	/// The order-1 index along dimension mu.
	static MultiIndex unit(int p, int mu)
	{
		std::vector<int> e(static_cast<std::size_t>(p), 0);
		e[static_cast<std::size_t>(mu)] = 1;
		return MultiIndex(std::move(e));
	}

	/// Builds the index of a derivative taken along the listed dimensions.
	static MultiIndex from_dimensions(int p, const std::vector<int>& dims)
	{
		std::vector<int> e(static_cast<std::size_t>(p), 0);
		for (int d : dims)
		{
			if (d < 0 || d >= p)
				throw DomainError("derivative dimension " + std::to_string(d) + " out of range");
			++e[static_cast<std::size_t>(d)];
		}
		return MultiIndex(std::move(e));
	}

	int dimension() const noexcept { return static_cast<int>(exps_.size()); }
	int order() const noexcept { return std::accumulate(exps_.begin(), exps_.end(), 0); }
	int operator[](int mu) const { return exps_[static_cast<std::size_t>(mu)]; }
	const std::vector<int>& exponents() const noexcept { return exps_; }

	/// Dimensions in canonical (ascending) order, one entry per unit of order:
	/// (2, 1) -> {0, 0, 1}.
	std::vector<int> dimensions() const
	{
		std::vector<int> out;
		for (int d = 0; d < dimension(); ++d)
			for (int k = 0; k < exps_[static_cast<std::size_t>(d)]; ++k)
				out.push_back(d);
		return out;
	}

	/// a_0! a_1! ... a_{p-1}!
	double factorial() const
	{
		double f = 1.0;
		for (int a : exps_)
			for (int k = 2; k <= a; ++k)
				f *= k;
		return f;
	}

	/// Monomial value z^a.
	template <typename Vec>
	double monomial(const Vec& z) const
	{
		double v = 1.0;
		for (int d = 0; d < dimension(); ++d)
			for (int k = 0; k < exps_[static_cast<std::size_t>(d)]; ++k)
				v *= z(d);
		return v;
	}

	/// "2_0_1" style label used in CSV headers.
	std::string label() const
	{
		std::string s;
		for (std::size_t d = 0; d < exps_.size(); ++d)
			s += (d ? "_" : "") + std::to_string(exps_[d]);
		return s;
	}

	friend bool operator==(const MultiIndex&, const MultiIndex&) = default;

private:
	std::vector<int> exps_;
};

enum class CountingMode
{
	unique,
	non_unique
};

/// Ordered monomial exponents of orders 1..r (constant excluded).
struct MultiIndexSet
{
	std::vector<MultiIndex> indices;
	int p = 0;
	int r = 0;
	CountingMode mode = CountingMode::unique;

	std::size_t size() const noexcept { return indices.size(); }
	const MultiIndex& operator[](std::size_t i) const { return indices[i]; }

	/// Position of `m`, or -1.
	int find(const MultiIndex& m) const
	{
		for (std::size_t i = 0; i < indices.size(); ++i)
			if (indices[i] == m)
				return static_cast<int>(i);
		return -1;
	}
};

namespace detail
{

// All exponent tuples of total order k, in descending lexicographic order
// (x^k first, then x^{k-1}y, ...).
inline void graded_block(int p, int k, std::vector<int>& cur, int dim, std::vector<MultiIndex>& out)
{
	if (dim == p - 1)
	{
		cur[static_cast<std::size_t>(dim)] = k;
		out.emplace_back(cur);
		return;
	}
	for (int a = k; a >= 0; --a)
	{
		cur[static_cast<std::size_t>(dim)] = a;
		graded_block(p, k - a, cur, dim + 1, out);
	}
}

// Every ordered tuple (mu_0..mu_{k-1}) of dimensions, each mapped to its exponents.
inline void ordered_block(int p, int k, std::vector<int>& dims, std::vector<MultiIndex>& out)
{
	if (static_cast<int>(dims.size()) == k)
	{
		out.push_back(MultiIndex::from_dimensions(p, dims));
		return;
	}
	for (int d = 0; d < p; ++d)
	{
		dims.push_back(d);
		ordered_block(p, k, dims, out);
		dims.pop_back();
	}
}

inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k)
{
	if (k > n)
		return 0;
	k = std::min(k, n - k);
	std::uint64_t b = 1;
	for (std::uint64_t i = 1; i <= k; ++i)
		b = b * (n - k + i) / i;
	return b;
}

} // namespace detail

/// Graded order: all order-1 indices, then order 2, ... up to r. Within an order
/// the exponent tuples run in descending lexicographic order. In non-unique mode
/// every ordering of the derivative dimensions appears separately.
inline MultiIndexSet enumerate_multi_indices(int p, int r, CountingMode mode = CountingMode::unique)
{
	if (p < 1 || r < 0)
		throw DomainError("multi-index enumeration requires p >= 1 and r >= 0");
	MultiIndexSet set{{}, p, r, mode};
	for (int k = 1; k <= r; ++k)
	{
		if (mode == CountingMode::unique)
		{
			std::vector<int> cur(static_cast<std::size_t>(p), 0);
			detail::graded_block(p, k, cur, 0, set.indices);
		}
		else
		{
			std::vector<int> dims;
			detail::ordered_block(p, k, dims, set.indices);
		}
	}
	return set;
}

/// Number of constraints (monomials of order 1..r, constant excluded).
/// unique: C(p+r, r) - 1. non-unique: (p^{r+1} - 1)/(p - 1) - 1, or r when p = 1.
inline std::uint64_t count_constraints(int p, int r, CountingMode mode = CountingMode::unique)
{
	if (p < 1 || r < 0)
		throw DomainError("constraint count requires p >= 1 and r >= 0");
	if (mode == CountingMode::unique)
		return detail::binomial(static_cast<std::uint64_t>(p + r), static_cast<std::uint64_t>(r)) - 1;
	if (p == 1)
		return static_cast<std::uint64_t>(r);
	std::uint64_t pw = 1;
	for (int i = 0; i <= r; ++i)
		pw *= static_cast<std::uint64_t>(p);
	return (pw - 1) / static_cast<std::uint64_t>(p - 1) - 1;
}

/// Moment constraints for the reduced weights along dimension mu: row i holds
/// z_i^s / z_i^mu for every index s of the set, rhs selects the unit index of mu.
struct MomentSystem
{
	Eigen::MatrixXd matrix; // d x q
	Eigen::VectorXd rhs;    // q
	int mu = 0;
};

/// Value of z^s / z^mu, computed without division whenever s contains mu.
template <typename Vec>
double monomial_ratio(const MultiIndex& s, const Vec& z, int mu)
{
	double v = 1.0;
	for (int d = 0; d < s.dimension(); ++d)
	{
		const int e = s[d] - (d == mu ? 1 : 0);
		for (int k = 0; k < e; ++k)
			v *= z(d);
	}
	if (s[mu] == 0)
		v /= z(mu);
	return v;
}

/// Assembles V_mu from offsets z (d x p). `scale` divides the offsets first; a
/// column of order k then carries a factor scale^{-(k-1)}, which leaves the
/// solution of V^T a = e_mu unchanged (the rhs lives in the order-1 block).
inline MomentSystem assemble_moment_system(const Eigen::MatrixXd& z, int mu, const MultiIndexSet& set,
	double scale = 1.0)
{
	if (mu < 0 || mu >= set.p || z.cols() != set.p)
		throw DomainError("moment system dimension mismatch");
	MomentSystem sys{Eigen::MatrixXd(z.rows(), static_cast<Eigen::Index>(set.size())),
		Eigen::VectorXd::Zero(static_cast<Eigen::Index>(set.size())), mu};
	for (Eigen::Index i = 0; i < z.rows(); ++i)
	{
		if (z(i, mu) == 0.0)
			throw AlignmentError("neighbor " + std::to_string(i) + " has zero offset along dimension " +
					std::to_string(mu),
				static_cast<std::size_t>(i));
		const Eigen::VectorXd zi = z.row(i).transpose() / scale;
		for (std::size_t s = 0; s < set.size(); ++s)
			sys.matrix(i, static_cast<Eigen::Index>(s)) = monomial_ratio(set[s], zi, mu);
	}
	const int unit = set.find(MultiIndex::unit(set.p, mu));
	if (unit < 0)
		throw DomainError("index set lacks the order-1 index of dimension " + std::to_string(mu));
	sys.rhs(unit) = 1.0;
	return sys;
}

} // namespace nlgraph
