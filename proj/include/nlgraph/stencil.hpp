#pragma once

#include "csv.hpp"
#include "errors.hpp"
#include "point_cloud.hpp"
#include "poly_basis.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace nlgraph
{

/// Members chosen around `base` for derivatives along `mu`, with offsets z = x - x_base.
struct Neighborhood
{
	VertexId base = 0;
	std::vector<VertexId> members;
	Eigen::MatrixXd offsets; // d x p
	int mu = 0;

	std::size_t size() const noexcept { return members.size(); }
};

/// Reduced weights a^mu over a neighborhood. The edge weight follows as
/// w = |N| a / (z^mu)^2 and the first derivative as sum (u(x) - u(base)) a / z^mu.
struct Stencil
{
	Neighborhood neighborhood;
	Eigen::VectorXd weights;
	int accuracy = 0;
	/// max-norm of V^T a - e_mu on unscaled offsets.
	double residual = 0.0;
};

struct StencilOptions
{
	/// Multiplies the rank threshold max(d, q) eps sigma_max; > 1 is stricter.
	double rank_factor = 1.0;
	/// Members added beyond q; > 0 gives the minimum-norm solve.
	std::size_t extra_neighbors = 0;
	double residual_tolerance = 1e-9;
	CountingMode mode = CountingMode::unique;
	/// Record failing (vertex, mu) pairs instead of throwing.
	bool skip_failures = false;
};

namespace detail
{

inline double median_distance(const Eigen::MatrixXd& z)
{
	std::vector<double> d(static_cast<std::size_t>(z.rows()));
	for (Eigen::Index i = 0; i < z.rows(); ++i)
		d[static_cast<std::size_t>(i)] = z.row(i).norm();
	if (d.empty())
		return 1.0;
	auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
	std::nth_element(d.begin(), mid, d.end());
	return *mid > 0.0 ? *mid : 1.0;
}

inline std::size_t numerical_rank(const Eigen::MatrixXd& m, double factor)
{
	if (m.size() == 0)
		return 0;
	Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
	const auto& s = svd.singularValues();
	if (s.size() == 0 || s(0) == 0.0)
		return 0;
	const double tau = factor * static_cast<double>(std::max(m.rows(), m.cols())) *
		std::numeric_limits<double>::epsilon() * s(0);
	std::size_t rank = 0;
	for (Eigen::Index i = 0; i < s.size(); ++i)
		if (s(i) > tau)
			++rank;
	return rank;
}

} // namespace detail

/// Walks train vertices by distance from `base`, skipping those with zero offset
/// along mu, and keeps a candidate only when it raises the numerical rank of the
/// moment matrix. Stops at q members (plus `extra_neighbors` nearest after full rank).
inline Neighborhood grow_neighborhood(const PointCloud& cloud, VertexId base, int mu,
	const MultiIndexSet& set, const StencilOptions& opt = {})
{
	if (mu < 0 || mu >= cloud.dimension())
		throw DomainError("derivative dimension " + std::to_string(mu) + " out of range");
	const std::size_t q = set.size();
	const int p = cloud.dimension();
	const NeighborQuery nq = sorted_neighbors(cloud, base);
	const auto x0 = cloud.point(base);

	// Rank tests run on offsets scaled by the nearest usable distance.
	double scale = 0.0;
	Eigen::MatrixXd accepted(0, static_cast<Eigen::Index>(q));
	Neighborhood nb{base, {}, Eigen::MatrixXd(0, p), mu};
	std::vector<Eigen::RowVectorXd> rows;
	std::size_t rank = 0;
	const std::size_t target = q + opt.extra_neighbors;

	for (std::size_t c = 0; c < nq.candidate_order.size() && nb.members.size() < target; ++c)
	{
		const VertexId j = nq.candidate_order[c];
		const Eigen::RowVectorXd z = cloud.point(j) - x0;
		if (z(mu) == 0.0)
			continue;
		if (scale == 0.0)
			scale = nq.distances[c];
		if (rank == q)
		{
			rows.push_back(z);
			nb.members.push_back(j);
			continue;
		}
		Eigen::MatrixXd trial(static_cast<Eigen::Index>(rows.size() + 1), static_cast<Eigen::Index>(q));
		const Eigen::RowVectorXd zs = z / scale;
		for (std::size_t s = 0; s < q; ++s)
			trial(trial.rows() - 1, static_cast<Eigen::Index>(s)) = monomial_ratio(set[s], zs.transpose(), mu);
		if (accepted.rows() > 0)
			trial.topRows(accepted.rows()) = accepted;
		const std::size_t new_rank = detail::numerical_rank(trial, opt.rank_factor);
		if (new_rank > rank)
		{
			rank = new_rank;
			accepted = std::move(trial);
			rows.push_back(z);
			nb.members.push_back(j);
		}
	}
	if (rank < q)
		throw DegenerateGeometryError("vertex " + std::to_string(base) + ", dimension " + std::to_string(mu) +
				": moment matrix reached rank " + std::to_string(rank) + " of " + std::to_string(q),
			base, rank, q);
	nb.offsets.resize(static_cast<Eigen::Index>(rows.size()), p);
	for (std::size_t i = 0; i < rows.size(); ++i)
		nb.offsets.row(static_cast<Eigen::Index>(i)) = rows[i];
	return nb;
}

/// Solves V_mu^T a = e_mu on median-distance-scaled offsets. Square systems use a
/// pivoted QR, wider neighborhoods the minimum-norm complete orthogonal solve.
inline Stencil solve_weights(const Neighborhood& nb, const MultiIndexSet& set, const StencilOptions& opt = {})
{
	const std::size_t q = set.size();
	if (nb.size() < q)
		throw ConditioningError("vertex " + std::to_string(nb.base) + ": " + std::to_string(nb.size()) +
			" neighbors cannot satisfy " + std::to_string(q) + " moment constraints");
	const double scale = detail::median_distance(nb.offsets);
	const MomentSystem scaled = assemble_moment_system(nb.offsets, nb.mu, set, scale);
	const Eigen::MatrixXd At = scaled.matrix.transpose(); // q x d

	Eigen::VectorXd a;
	if (nb.size() == q)
		a = At.colPivHouseholderQr().solve(scaled.rhs);
	else
		a = At.completeOrthogonalDecomposition().solve(scaled.rhs);

	const MomentSystem raw = assemble_moment_system(nb.offsets, nb.mu, set);
	const double res_raw = (raw.matrix.transpose() * a - raw.rhs).lpNorm<Eigen::Infinity>();
	const double res_scaled = (At * a - scaled.rhs).lpNorm<Eigen::Infinity>();
	const double residual = std::max(res_raw, res_scaled);
	if (!a.allFinite() || !(residual <= opt.residual_tolerance))
		throw ConditioningError("vertex " + std::to_string(nb.base) + ", dimension " + std::to_string(nb.mu) +
				": moment residual " + csv::format_real(residual) + " exceeds tolerance",
			residual);
	return Stencil{nb, std::move(a), set.r, res_raw};
}

/// A failed (vertex, mu) pair recorded in skip mode.
struct StencilFailure
{
	VertexId vertex;
	int mu;
	std::string message;
};

/// One stencil per (train vertex, dimension), all sharing a single accuracy order.
class StencilSet
{
public:
	StencilSet(int p, int r, std::size_t n_vertices) : p_(p), r_(r), slot_(n_vertices, npos) {}

	int dimension() const noexcept { return p_; }
	int accuracy() const noexcept { return r_; }
	std::size_t vertex_count() const noexcept { return slot_.size(); }

	bool has(VertexId v, int mu) const
	{
		return v < slot_.size() && slot_[v] != npos && stencils_[slot_[v] + static_cast<std::size_t>(mu)].has_value();
	}
	const Stencil& at(VertexId v, int mu) const
	{
		if (!has(v, mu))
			throw DomainError("no stencil for vertex " + std::to_string(v) + ", dimension " + std::to_string(mu));
		return *stencils_[slot_[v] + static_cast<std::size_t>(mu)];
	}

	/// Vertices with a slot, in insertion (ascending id) order.
	const std::vector<VertexId>& bases() const noexcept { return bases_; }
	const std::vector<StencilFailure>& failures() const noexcept { return failures_; }
	std::size_t size() const
	{
		return static_cast<std::size_t>(std::count_if(stencils_.begin(), stencils_.end(),
			[](const auto& s) { return s.has_value(); }));
	}

	void insert(Stencil s)
	{
		const VertexId v = s.neighborhood.base;
		const int mu = s.neighborhood.mu;
		if (v >= slot_.size() || mu < 0 || mu >= p_)
			throw DomainError("stencil outside the set's range");
		ensure_slot(v);
		stencils_[slot_[v] + static_cast<std::size_t>(mu)] = std::move(s);
	}
	void record_failure(StencilFailure f)
	{
		ensure_slot(f.vertex);
		failures_.push_back(std::move(f));
	}

private:
	static constexpr std::size_t npos = static_cast<std::size_t>(-1);

	void ensure_slot(VertexId v)
	{
		if (slot_[v] != npos)
			return;
		slot_[v] = stencils_.size();
		stencils_.resize(stencils_.size() + static_cast<std::size_t>(p_));
		bases_.push_back(v);
	}

	int p_;
	int r_;
	std::vector<std::size_t> slot_;
	std::vector<std::optional<Stencil>> stencils_;
	std::vector<VertexId> bases_;
	std::vector<StencilFailure> failures_;
};

/// Grows and solves every (train vertex, mu) pair. Each pair is independent of
/// the others. The first failure is rethrown unless `skip_failures` is set.
inline StencilSet build_stencil_set(const PointCloud& cloud, int r, const StencilOptions& opt = {})
{
	if (r < 1)
		throw DomainError("accuracy order r must be >= 1");
	const MultiIndexSet set = enumerate_multi_indices(cloud.dimension(), r, opt.mode);
	StencilSet out(cloud.dimension(), r, cloud.size());
	for (VertexId v : cloud.train_ids())
	{
		for (int mu = 0; mu < cloud.dimension(); ++mu)
		{
			try
			{
				out.insert(solve_weights(grow_neighborhood(cloud, v, mu, set, opt), set, opt));
			}
			catch (const NumericalError& e)
			{
				if (!opt.skip_failures)
					throw;
				out.record_failure({v, mu, e.what()});
			}
		}
	}
	return out;
}

/// Dense globally supported Gaussian edge weights exp(-|x - y|^2 / sigma^2) over
/// train vertices, rescaled per base and dimension so that the contraction of
/// the mu unit vector with itself is 1. Entry (mu)(i, j) is w^mu(x_i, x_j) for
/// the i-th and j-th train vertices; the diagonal is zero.
struct GaussianWeights
{
	std::vector<VertexId> vertices;
	std::vector<Eigen::MatrixXd> weights; // one per dimension
	double sigma = 1.0;
};

inline GaussianWeights gaussian_weight_baseline(const PointCloud& cloud, double sigma)
{
	if (!(sigma > 0.0) || !std::isfinite(sigma))
		throw DomainError("Gaussian bandwidth must be positive");
	const auto& ids = cloud.train_ids();
	const auto n = static_cast<Eigen::Index>(ids.size());
	if (n < 2)
		throw DomainError("Gaussian baseline needs at least two train vertices");
	GaussianWeights g{ids, {}, sigma};
	Eigen::MatrixXd base(n, n);
	for (Eigen::Index i = 0; i < n; ++i)
		for (Eigen::Index j = 0; j < n; ++j)
			base(i, j) = i == j ? 0.0 :
				std::exp(-(cloud.point(ids[static_cast<std::size_t>(i)]) - cloud.point(ids[static_cast<std::size_t>(j)]))
						.squaredNorm() / (sigma * sigma));
	const double norm = 1.0 / static_cast<double>(n - 1);
	for (int mu = 0; mu < cloud.dimension(); ++mu)
	{
		Eigen::MatrixXd w = base;
		for (Eigen::Index i = 0; i < n; ++i)
		{
			double s = 0.0;
			for (Eigen::Index j = 0; j < n; ++j)
			{
				const double z = cloud.points()(static_cast<Eigen::Index>(ids[static_cast<std::size_t>(j)]), mu) -
					cloud.points()(static_cast<Eigen::Index>(ids[static_cast<std::size_t>(i)]), mu);
				s += z * z * w(i, j);
			}
			s *= norm;
			if (!(s > 0.0))
				throw DegenerateGeometryError("vertex " + std::to_string(ids[static_cast<std::size_t>(i)]) +
						": no spread along dimension " + std::to_string(mu),
					ids[static_cast<std::size_t>(i)], 0, 1);
			w.row(i) /= s;
		}
		g.weights.push_back(std::move(w));
	}
	return g;
}

} // namespace nlgraph
