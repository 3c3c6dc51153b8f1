#pragma once

#include "errors.hpp"
#include "operators.hpp"
#include "point_cloud.hpp"
#include "poly_basis.hpp"
#include "polynomial.hpp"
#include "stencil.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace nlgraph
{

/// Non-local derivatives of u for every index of `set`, one column per index,
/// one row per cloud vertex (NaN where undefined). Each index is applied in its
/// canonical dimension order.
inline Eigen::MatrixXd derivative_table(const StencilSet& stencils, const FieldSamples& u, const MultiIndexSet& set)
{
	Eigen::MatrixXd t(u.values.size(), static_cast<Eigen::Index>(set.size()));
	for (std::size_t s = 0; s < set.size(); ++s)
		t.col(static_cast<Eigen::Index>(s)) = higher_derivative(stencils, u, set[s]).values;
	return t;
}

/// Analytic counterpart of derivative_table.
inline Eigen::MatrixXd derivative_table(const Polynomial& u, const Eigen::MatrixXd& points, const MultiIndexSet& set)
{
	Eigen::MatrixXd t(points.rows(), static_cast<Eigen::Index>(set.size()));
	for (std::size_t s = 0; s < set.size(); ++s)
		t.col(static_cast<Eigen::Index>(s)) = u.derivative(set[s]).evaluate(points);
	return t;
}

/// Modified Taylor series about each base point x~:
///   u_k(x | x~) = u(x~) + sum_a gamma_a(x~) D^a u(x~) (x - x~)^a / a!
/// with gamma_0 = 1 implied.
struct TaylorSurrogate
{
	int k = 0;
	MultiIndexSet indices;
	std::vector<VertexId> base_points;
	Eigen::MatrixXd base_coordinates; // one row per base point
	Eigen::VectorXd base_values;
	Eigen::MatrixXd gamma;       // base x coefficient
	Eigen::MatrixXd derivatives; // base x coefficient
	std::size_t fit_neighborhood = 0;

	std::size_t coefficient_count() const noexcept { return indices.size(); }
};

struct TaylorFitOptions
{
	/// Neighbors used per base point; 0 selects twice the coefficient count,
	/// capped at the number of other train vertices.
	std::size_t fit_neighborhood = 0;
	/// Use every other train vertex, whatever `fit_neighborhood` says.
	bool full_dataset = false;
};

namespace detail
{

inline Eigen::RowVectorXd taylor_row(const MultiIndexSet& set, const Eigen::RowVectorXd& z,
	const Eigen::RowVectorXd& derivs)
{
	Eigen::RowVectorXd row(static_cast<Eigen::Index>(set.size()));
	for (std::size_t s = 0; s < set.size(); ++s)
	{
		const auto ss = static_cast<Eigen::Index>(s);
		row(ss) = derivs(ss) * set[s].monomial(z) / set[s].factorial();
	}
	return row;
}

} // namespace detail

/// Local least-squares fit of gamma at each train vertex with finite derivatives.
/// The regression solves for gamma - 1 against y = u(x) - u(x~) - X 1 on
/// equilibrated columns with a pivoted QR; columns that vanish identically keep
/// gamma = 1.
inline TaylorSurrogate fit_surrogate(const PointCloud& cloud, const FieldSamples& u, const Eigen::MatrixXd& derivs,
	const MultiIndexSet& set, const TaylorFitOptions& opt = {})
{
	const std::size_t q = set.size();
	if (static_cast<std::size_t>(derivs.cols()) != q || derivs.rows() != u.values.size() ||
		static_cast<std::size_t>(u.values.size()) != cloud.size())
		throw DomainError("derivative table does not match the cloud and index set");
	const std::size_t n_train = cloud.train_ids().size();
	std::size_t d = opt.full_dataset ? n_train - 1 : (opt.fit_neighborhood ? opt.fit_neighborhood : std::min(2 * q, n_train - 1));
	if (d < q)
		throw DomainError("fit neighborhood of " + std::to_string(d) + " is smaller than the " +
			std::to_string(q) + " coefficients");
	if (d > n_train - 1)
		throw DomainError("fit neighborhood of " + std::to_string(d) + " exceeds the " +
			std::to_string(n_train - 1) + " available train vertices");

	TaylorSurrogate model;
	model.k = set.r;
	model.indices = set;
	model.fit_neighborhood = d;
	std::vector<Eigen::RowVectorXd> gam, der;

	for (VertexId b : cloud.train_ids())
	{
		const auto bi = static_cast<Eigen::Index>(b);
		const Eigen::RowVectorXd db = derivs.row(bi);
		if (!db.allFinite())
			continue;
		const NeighborQuery nq = sorted_neighbors(cloud, b);
		Eigen::MatrixXd X(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(q));
		Eigen::VectorXd y(static_cast<Eigen::Index>(d));
		for (std::size_t j = 0; j < d; ++j)
		{
			const VertexId v = nq.candidate_order[j];
			const Eigen::RowVectorXd z = cloud.point(v) - cloud.point(b);
			X.row(static_cast<Eigen::Index>(j)) = detail::taylor_row(set, z, db);
			y(static_cast<Eigen::Index>(j)) = u.values(static_cast<Eigen::Index>(v)) - u.values(bi);
		}
		const Eigen::VectorXd target = y - X.rowwise().sum();

		std::vector<Eigen::Index> active;
		Eigen::VectorXd norms = X.colwise().norm();
		for (Eigen::Index c = 0; c < X.cols(); ++c)
			if (norms(c) > 0.0)
				active.push_back(c);
		Eigen::RowVectorXd g = Eigen::RowVectorXd::Ones(static_cast<Eigen::Index>(q));
		if (!active.empty())
		{
			Eigen::MatrixXd Xa(X.rows(), static_cast<Eigen::Index>(active.size()));
			for (std::size_t c = 0; c < active.size(); ++c)
				Xa.col(static_cast<Eigen::Index>(c)) = X.col(active[c]) / norms(active[c]);
			Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xa);
			if (qr.rank() < Xa.cols())
				throw ConditioningError("Taylor fit at base point " + std::to_string(b) + " has rank " +
					std::to_string(qr.rank()) + " of " + std::to_string(Xa.cols()));
			const Eigen::VectorXd dg = qr.solve(target);
			for (std::size_t c = 0; c < active.size(); ++c)
				g(active[c]) += dg(static_cast<Eigen::Index>(c)) / norms(active[c]);
		}
		model.base_points.push_back(b);
		gam.push_back(g);
		der.push_back(db);
	}

	const auto nb = static_cast<Eigen::Index>(model.base_points.size());
	if (nb == 0)
		throw DomainError("no train vertex has a complete set of derivatives");
	model.base_coordinates.resize(nb, cloud.dimension());
	model.base_values.resize(nb);
	model.gamma.resize(nb, static_cast<Eigen::Index>(q));
	model.derivatives.resize(nb, static_cast<Eigen::Index>(q));
	for (Eigen::Index i = 0; i < nb; ++i)
	{
		const auto b = model.base_points[static_cast<std::size_t>(i)];
		model.base_coordinates.row(i) = cloud.point(b);
		model.base_values(i) = u.values(static_cast<Eigen::Index>(b));
		model.gamma.row(i) = gam[static_cast<std::size_t>(i)];
		model.derivatives.row(i) = der[static_cast<std::size_t>(i)];
	}
	return model;
}

/// Convenience overload computing the derivative table from a stencil set.
inline TaylorSurrogate fit_surrogate(const PointCloud& cloud, const StencilSet& stencils, const FieldSamples& u, int k,
	const TaylorFitOptions& opt = {})
{
	const MultiIndexSet set = enumerate_multi_indices(cloud.dimension(), k);
	return fit_surrogate(cloud, u, derivative_table(stencils, u, set), set, opt);
}

/// Position (row in the model) of the base point nearest to x; ties go to the
/// lower vertex id.
template <typename Vec>
Eigen::Index nearest_base(const TaylorSurrogate& model, const Vec& x)
{
	Eigen::Index best = 0;
	double best_d = std::numeric_limits<double>::infinity();
	for (Eigen::Index i = 0; i < model.base_coordinates.rows(); ++i)
	{
		const double dist = (model.base_coordinates.row(i) - x).squaredNorm();
		if (dist < best_d)
		{
			best_d = dist;
			best = i;
		}
	}
	return best;
}

/// u_k(x | x~) at the nearest base point x~.
template <typename Vec>
double evaluate_surrogate(const TaylorSurrogate& model, const Vec& x)
{
	const Eigen::Index b = nearest_base(model, x);
	const Eigen::RowVectorXd z = x - model.base_coordinates.row(b);
	double v = model.base_values(b);
	for (std::size_t s = 0; s < model.indices.size(); ++s)
	{
		const auto ss = static_cast<Eigen::Index>(s);
		const MultiIndex& a = model.indices[s];
		if (a.order() == 0)
			continue;
		v += model.gamma(b, ss) * model.derivatives(b, ss) * a.monomial(z) / a.factorial();
	}
	return v;
}

// ---------------------------------------------------------------------------
// Error studies.

/// Signed mean, absolute mean and maximum of a set of local errors.
struct ErrorSummary
{
	double signed_mean = 0.0;
	double abs_mean = 0.0;
	double max_abs = 0.0;

	static ErrorSummary of(const std::vector<double>& e)
	{
		ErrorSummary s;
		if (e.empty())
			return s;
		for (double v : e)
		{
			s.signed_mean += v;
			s.abs_mean += std::abs(v);
			s.max_abs = std::max(s.max_abs, std::abs(v));
		}
		s.signed_mean /= static_cast<double>(e.size());
		s.abs_mean /= static_cast<double>(e.size());
		return s;
	}
};

struct ErrorReport
{
	double h = 0.0;
	long m = 0;
	/// e(x | x~) at every test vertex.
	std::vector<double> model_local;
	ErrorSummary model;
	/// eps(x~) per derivative index at every base point.
	std::vector<std::vector<double>> derivative_local;
	std::vector<ErrorSummary> derivative;
	/// gamma - 1 per derivative index at every base point.
	std::vector<std::vector<double>> gamma_local;
	std::vector<ErrorSummary> gamma;
	/// gamma - 1 pooled over all indices of each order l = 1..k.
	std::vector<ErrorSummary> gamma_order;
};

struct ErrorStudyConfig
{
	int p = 1;
	int k = 5;
	int r = 6;
	int K = 8;
	double L = 1.0;
	std::vector<long> meshes{8, 16, 32, 64, 128};
	std::uint64_t seed = 1;
	TaylorFitOptions fit;
	StencilOptions stencil;
};

/// Which local-error summary a slope is fitted through.
enum class ErrorNorm
{
	abs_mean,
	max_abs,
	signed_mean
};

inline double pick(const ErrorSummary& s, ErrorNorm n)
{
	switch (n)
	{
	case ErrorNorm::abs_mean: return s.abs_mean;
	case ErrorNorm::max_abs: return s.max_abs;
	case ErrorNorm::signed_mean: return s.signed_mean;
	}
	return s.abs_mean;
}

/// Least-squares slope of log|error| against log h, skipping points whose
/// error is below `floor`. NaN when fewer than two points survive.
inline double fit_slope(const std::vector<double>& h, const std::vector<double>& err, double floor = 1e-12)
{
	std::vector<double> xs, ys;
	for (std::size_t i = 0; i < h.size() && i < err.size(); ++i)
	{
		const double e = std::abs(err[i]);
		if (e >= floor && std::isfinite(e) && h[i] > 0.0)
		{
			xs.push_back(std::log(h[i]));
			ys.push_back(std::log(e));
		}
	}
	if (xs.size() < 2)
		return std::numeric_limits<double>::quiet_NaN();
	const double n = static_cast<double>(xs.size());
	double mx = 0, my = 0;
	for (std::size_t i = 0; i < xs.size(); ++i)
	{
		mx += xs[i];
		my += ys[i];
	}
	mx /= n;
	my /= n;
	double sxy = 0, sxx = 0;
	for (std::size_t i = 0; i < xs.size(); ++i)
	{
		sxy += (xs[i] - mx) * (ys[i] - my);
		sxx += (xs[i] - mx) * (xs[i] - mx);
	}
	return sxy / sxx;
}

/// Runs one mesh of an error study against an analytic polynomial.
inline ErrorReport error_report(const Polynomial& u, const ErrorStudyConfig& cfg, long m)
{
	const PointCloud cloud = generate_interlaced_mesh(cfg.p, m, cfg.L);
	const StencilSet stencils = build_stencil_set(cloud, cfg.r, cfg.stencil);
	const MultiIndexSet set = enumerate_multi_indices(cfg.p, cfg.k);
	const FieldSamples samples{u.evaluate(cloud.points()), "u"};
	const Eigen::MatrixXd approx = derivative_table(stencils, samples, set);
	const Eigen::MatrixXd exact = derivative_table(u, cloud.points(), set);
	const TaylorSurrogate model = fit_surrogate(cloud, samples, approx, set, cfg.fit);

	ErrorReport rep;
	rep.h = *cloud.length_scale();
	rep.m = m;
	for (VertexId t : cloud.test_ids())
		rep.model_local.push_back(evaluate_surrogate(model, cloud.point(t)) - samples.values(static_cast<Eigen::Index>(t)));
	rep.model = ErrorSummary::of(rep.model_local);

	rep.derivative_local.resize(set.size());
	rep.gamma_local.resize(set.size());
	std::vector<std::vector<double>> by_order(static_cast<std::size_t>(cfg.k));
	for (std::size_t s = 0; s < set.size(); ++s)
	{
		const auto ss = static_cast<Eigen::Index>(s);
		for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(model.base_points.size()); ++i)
		{
			const auto b = static_cast<Eigen::Index>(model.base_points[static_cast<std::size_t>(i)]);
			rep.derivative_local[s].push_back(approx(b, ss) - exact(b, ss));
			rep.gamma_local[s].push_back(model.gamma(i, ss) - 1.0);
			by_order[static_cast<std::size_t>(set[s].order() - 1)].push_back(model.gamma(i, ss) - 1.0);
		}
		rep.derivative.push_back(ErrorSummary::of(rep.derivative_local[s]));
		rep.gamma.push_back(ErrorSummary::of(rep.gamma_local[s]));
	}
	for (const auto& g : by_order)
		rep.gamma_order.push_back(ErrorSummary::of(g));
	return rep;
}

/// Random polynomial of order K with alpha ~ U[-1, 1] drawn from the study seed.
inline Polynomial study_polynomial(const ErrorStudyConfig& cfg)
{
	Rng rng(cfg.seed, 0x706f6c79); // stream "poly"
	return Polynomial::random(cfg.p, cfg.K, rng);
}

inline std::vector<ErrorReport> error_study(const Polynomial& u, const ErrorStudyConfig& cfg)
{
	if (cfg.meshes.size() < 2)
		throw DomainError("error study needs at least two meshes");
	std::vector<ErrorReport> out;
	for (long m : cfg.meshes)
		out.push_back(error_report(u, cfg, m));
	return out;
}

/// Fitted slopes of a study: model error, each derivative index, each gamma order.
struct StudySlopes
{
	double model = 0.0;
	std::vector<double> derivative;
	std::vector<double> gamma_order;
};

inline StudySlopes study_slopes(const std::vector<ErrorReport>& reports, ErrorNorm model_norm,
	ErrorNorm derivative_norm, ErrorNorm gamma_norm, double floor = 1e-12)
{
	StudySlopes s;
	std::vector<double> h, e;
	for (const auto& r : reports)
	{
		h.push_back(r.h);
		e.push_back(pick(r.model, model_norm));
	}
	s.model = fit_slope(h, e, floor);
	const std::size_t nd = reports.front().derivative.size();
	for (std::size_t i = 0; i < nd; ++i)
	{
		e.clear();
		for (const auto& r : reports)
			e.push_back(pick(r.derivative[i], derivative_norm));
		s.derivative.push_back(fit_slope(h, e, floor));
	}
	for (std::size_t l = 0; l < reports.front().gamma_order.size(); ++l)
	{
		e.clear();
		for (const auto& r : reports)
			e.push_back(pick(r.gamma_order[l], gamma_norm));
		s.gamma_order.push_back(fit_slope(h, e, floor));
	}
	return s;
}

} // namespace nlgraph
