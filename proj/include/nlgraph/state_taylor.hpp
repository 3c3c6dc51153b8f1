#pragma once

#include "errors.hpp"
#include "operators.hpp"
#include "point_cloud.hpp"
#include "poly_basis.hpp"
#include "regress.hpp"
#include "state_series.hpp"
#include "stencil.hpp"
#include "taylor.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace nlgraph
{

/// Taylor representation of a state functional between time levels: with
/// x the chosen state coordinates and i -> j consecutive levels of one series,
///   Psi(x_j) - Psi(x_i) = sum_a gamma_a D^a Psi(x_i) (x_j - x_i)^a / a!.
/// Non-local derivatives come from stencils on the cloud of all states.
struct StateTaylorOptions
{
	std::vector<std::string> coordinates;
	std::string target = "Psi";
	int max_order = 4;
	/// Accuracy of the state-cloud stencils.
	int r = 2;
};

struct StateTaylorDesigns
{
	/// designs[k - 1] holds the order-k model; orders share the same rows, so
	/// every design's columns contain the previous design's columns.
	std::vector<regress::Design> designs;
	/// (series, time index) of the base level of every row.
	std::vector<std::pair<std::size_t, std::size_t>> rows;
	std::size_t dropped = 0;
};

inline StateTaylorDesigns state_taylor_designs(const std::vector<StateSeries>& series, const StateTaylorOptions& opt)
{
	if (series.empty())
		throw DomainError("the Taylor pipeline needs at least one state series");
	if (opt.coordinates.empty())
		throw DomainError("the Taylor pipeline needs at least one state coordinate");
	if (opt.max_order < 1)
		throw DomainError("Taylor order must be at least 1");

	const auto p = static_cast<int>(opt.coordinates.size());
	std::size_t total = 0;
	for (const auto& s : series)
	{
		s.validate();
		total += s.size();
	}
	Eigen::MatrixXd points(static_cast<Eigen::Index>(total), p);
	Eigen::VectorXd psi(static_cast<Eigen::Index>(total));
	std::vector<std::size_t> offset;
	Eigen::Index at = 0;
	for (const auto& s : series)
	{
		offset.push_back(static_cast<std::size_t>(at));
		for (int c = 0; c < p; ++c)
			points.block(at, c, static_cast<Eigen::Index>(s.size()), 1) = s.column(opt.coordinates[static_cast<std::size_t>(c)]);
		psi.segment(at, static_cast<Eigen::Index>(s.size())) = s.column(opt.target);
		at += static_cast<Eigen::Index>(s.size());
	}

	const PointCloud cloud(points);
	StencilOptions so;
	so.skip_failures = true;
	const StencilSet stencils = build_stencil_set(cloud, opt.r, so);
	const MultiIndexSet set = enumerate_multi_indices(p, opt.max_order);
	const Eigen::MatrixXd derivs = derivative_table(stencils, FieldSamples{psi, opt.target}, set);

	StateTaylorDesigns out;
	std::vector<Eigen::RowVectorXd> full_rows;
	std::vector<double> target;
	std::vector<int> groups;
	for (std::size_t si = 0; si < series.size(); ++si)
	{
		for (std::size_t i = 0; i + 1 < series[si].size(); ++i)
		{
			const auto a = static_cast<Eigen::Index>(offset[si] + i);
			if (!derivs.row(a).allFinite())
			{
				++out.dropped;
				continue;
			}
			const Eigen::RowVectorXd dx = points.row(a + 1) - points.row(a);
			full_rows.push_back(detail::taylor_row(set, dx, derivs.row(a)));
			target.push_back(psi(a + 1) - psi(a));
			groups.push_back(static_cast<int>(si));
			out.rows.emplace_back(si, i);
		}
	}
	if (full_rows.empty())
		throw NumericalError("no base state has finite derivatives up to order " + std::to_string(opt.max_order));

	const auto n = static_cast<Eigen::Index>(full_rows.size());
	for (int k = 1; k <= opt.max_order; ++k)
	{
		std::vector<int> cols;
		for (std::size_t s = 0; s < set.size(); ++s)
			if (set[s].order() <= k)
				cols.push_back(static_cast<int>(s));
		regress::Design d{Eigen::MatrixXd(n, static_cast<Eigen::Index>(cols.size())), Eigen::VectorXd(n), {}, groups};
		for (Eigen::Index i = 0; i < n; ++i)
		{
			d.y(i) = target[static_cast<std::size_t>(i)];
			for (std::size_t j = 0; j < cols.size(); ++j)
				d.X(i, static_cast<Eigen::Index>(j)) = full_rows[static_cast<std::size_t>(i)](cols[j]);
		}
		for (int c : cols)
			d.labels.push_back("D^" + set[static_cast<std::size_t>(c)].label());
		d.validate();
		out.designs.push_back(std::move(d));
	}
	return out;
}

/// Training loss of the full model at every order 1..max_order.
inline std::vector<double> state_taylor_losses(const StateTaylorDesigns& d, const regress::LossSpec& loss,
	const regress::Solver& solver)
{
	std::vector<double> out;
	for (const auto& design : d.designs)
	{
		const Eigen::VectorXd g = regress::fit(design, solver);
		out.push_back(regress::evaluate_loss(
			regress::residuals(design, regress::detail::all_columns(design.cols()), g), loss));
	}
	return out;
}

} // namespace nlgraph
