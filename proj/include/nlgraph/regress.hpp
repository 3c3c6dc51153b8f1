#pragma once

#include "errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace nlgraph::regress
{

/// Named values of one observation (a state record).
using Record = std::map<std::string, double>;

struct ModelTerm
{
	std::string label;
	std::function<double(const Record&)> evaluate;
};

/// Observations by rows, model terms by columns.
struct Design
{
	Eigen::MatrixXd X;
	Eigen::VectorXd y;
	std::vector<std::string> labels;
	/// Trajectory id of every row.
	std::vector<int> groups;

	Eigen::Index rows() const noexcept { return X.rows(); }
	Eigen::Index cols() const noexcept { return X.cols(); }
	bool underdetermined() const noexcept { return X.rows() < X.cols(); }

	void validate() const
	{
		if (y.size() != X.rows())
			throw DomainError("target length does not match the design rows");
		if (static_cast<Eigen::Index>(labels.size()) != X.cols())
			throw DomainError("one label required per design column");
		if (!groups.empty() && static_cast<Eigen::Index>(groups.size()) != X.rows())
			throw DomainError("one group id required per design row");
		if (!X.allFinite() || !y.allFinite())
			throw DomainError("design contains non-finite entries");
	}

	/// Sub-design restricted to `cols`.
	Design select(const std::vector<int>& cols) const
	{
		Design d{Eigen::MatrixXd(X.rows(), static_cast<Eigen::Index>(cols.size())), y, {}, groups};
		for (std::size_t j = 0; j < cols.size(); ++j)
		{
			d.X.col(static_cast<Eigen::Index>(j)) = X.col(cols[j]);
			d.labels.push_back(labels[static_cast<std::size_t>(cols[j])]);
		}
		return d;
	}
};

/// Evaluates every term on every record.
inline Design build_design(const std::vector<Record>& records, const std::vector<ModelTerm>& terms,
	const std::function<double(const Record&)>& target, const std::vector<int>& groups = {})
{
	Design d{Eigen::MatrixXd(static_cast<Eigen::Index>(records.size()), static_cast<Eigen::Index>(terms.size())),
		Eigen::VectorXd(static_cast<Eigen::Index>(records.size())), {}, groups};
	for (const auto& t : terms)
		d.labels.push_back(t.label);
	for (std::size_t i = 0; i < records.size(); ++i)
	{
		for (std::size_t j = 0; j < terms.size(); ++j)
			d.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = terms[j].evaluate(records[i]);
		d.y(static_cast<Eigen::Index>(i)) = target(records[i]);
	}
	d.validate();
	return d;
}

// ---------------------------------------------------------------------------
// Losses.

/// l = w1 l_1 + w2 l_2 + winf l_inf. With `per_sample` each norm is divided by
/// n^{1/chi} (mean absolute, root mean square, max); otherwise raw norms.
struct LossSpec
{
	double w1 = 0.0;
	double w2 = 1.0;
	double winf = 0.0;
	bool per_sample = true;

	void validate() const
	{
		if (!(w1 >= 0.0 && w2 >= 0.0 && winf >= 0.0) || !std::isfinite(w1 + w2 + winf))
			throw SpecError("loss weights must be finite and non-negative");
		if (w1 + w2 + winf <= 0.0)
			throw SpecError("at least one loss weight must be positive");
	}
};

inline double evaluate_loss(const Eigen::VectorXd& r, const LossSpec& spec)
{
	spec.validate();
	if (!r.allFinite())
		throw DomainError("residuals must be finite");
	if (r.size() == 0)
		return 0.0;
	const double n = static_cast<double>(r.size());
	double l = 0.0;
	if (spec.w1 > 0.0)
		l += spec.w1 * r.lpNorm<1>() / (spec.per_sample ? n : 1.0);
	if (spec.w2 > 0.0)
		l += spec.w2 * r.norm() / (spec.per_sample ? std::sqrt(n) : 1.0);
	if (spec.winf > 0.0)
		l += spec.winf * r.lpNorm<Eigen::Infinity>();
	return l;
}

// ---------------------------------------------------------------------------
// Solvers.

struct Solver
{
	enum class Kind
	{
		ols,
		ridge
	};
	Kind kind = Kind::ols;
	double lambda = 0.0;
	/// Ridge penalizes coefficients of columns scaled to unit root mean square.
	bool scale_columns = true;

	static Solver ols() { return {}; }
	static Solver ridge(double lambda, bool scale = true) { return {Kind::ridge, lambda, scale}; }
	double effective_lambda() const { return kind == Kind::ridge ? lambda : 0.0; }
};

namespace detail
{

inline double column_scale(const Eigen::VectorXd& col, Eigen::Index n)
{
	const double s = col.norm() / std::sqrt(static_cast<double>(std::max<Eigen::Index>(n, 1)));
	return s > 0.0 ? s : 1.0;
}

/// min ||b - A g||^2 + lambda ||D g||^2 through a pivoted QR of [A; sqrt(lambda) D].
inline Eigen::VectorXd penalized_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, double lambda,
	const Eigen::VectorXd& scale)
{
	const Eigen::Index m = A.rows(), k = A.cols();
	if (k == 0)
		return Eigen::VectorXd(0);
	Eigen::MatrixXd As = A;
	for (Eigen::Index j = 0; j < k; ++j)
		As.col(j) /= scale(j);
	Eigen::VectorXd g;
	if (lambda > 0.0)
	{
		Eigen::MatrixXd aug(m + k, k);
		aug.topRows(m) = As;
		aug.bottomRows(k) = std::sqrt(lambda) * Eigen::MatrixXd::Identity(k, k);
		Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m + k);
		rhs.head(m) = b;
		g = aug.colPivHouseholderQr().solve(rhs);
	}
	else
	{
		Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(As);
		if (qr.rank() < k)
			throw ConditioningError("least-squares design has rank " + std::to_string(qr.rank()) + " of " +
				std::to_string(k));
		g = qr.solve(b);
	}
	return g.cwiseQuotient(scale);
}

} // namespace detail

/// Solves column subsets of one design through a single QR factorization:
/// with X = Q R the subset problem on columns S reduces to R_S against Q^T y.
class SubsetSolver
{
public:
	SubsetSolver(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, Solver solver)
		: solver_(solver), n_(X.rows())
	{
		if (solver.kind == Solver::Kind::ridge && !(solver.lambda >= 0.0))
			throw DomainError("ridge parameter must be non-negative");
		scale_ = Eigen::VectorXd::Ones(X.cols());
		if (solver.kind == Solver::Kind::ridge && solver.scale_columns)
			for (Eigen::Index j = 0; j < X.cols(); ++j)
				scale_(j) = detail::column_scale(X.col(j), X.rows());
		if (X.rows() >= X.cols())
		{
			Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
			R_ = qr.matrixQR().topRows(X.cols()).triangularView<Eigen::Upper>();
			qty_ = (qr.householderQ().transpose() * y).head(X.cols());
		}
		else
		{
			R_ = X;
			qty_ = y;
		}
	}

	Eigen::VectorXd solve(const std::vector<int>& cols) const
	{
		Eigen::MatrixXd A(R_.rows(), static_cast<Eigen::Index>(cols.size()));
		Eigen::VectorXd s(static_cast<Eigen::Index>(cols.size()));
		for (std::size_t j = 0; j < cols.size(); ++j)
		{
			A.col(static_cast<Eigen::Index>(j)) = R_.col(cols[j]);
			s(static_cast<Eigen::Index>(j)) = scale_(cols[j]);
		}
		return detail::penalized_solve(A, qty_, solver_.effective_lambda(), s);
	}

private:
	Solver solver_;
	Eigen::Index n_;
	Eigen::MatrixXd R_;
	Eigen::VectorXd qty_;
	Eigen::VectorXd scale_;
};

/// Minimizes ||y - X g||_2; rank deficiency raises ConditioningError.
inline Eigen::VectorXd fit_ols(const Design& d)
{
	d.validate();
	return detail::penalized_solve(d.X, d.y, 0.0, Eigen::VectorXd::Ones(d.cols()));
}

/// Minimizes ||y - X g||^2 + lambda ||S g||^2, S the column root-mean-square
/// scales (identity when `scale_columns` is false). lambda = 0 is OLS.
inline Eigen::VectorXd fit_ridge(const Design& d, double lambda, bool scale_columns = true)
{
	d.validate();
	if (!(lambda >= 0.0) || !std::isfinite(lambda))
		throw DomainError("ridge parameter must be finite and non-negative");
	Eigen::VectorXd s = Eigen::VectorXd::Ones(d.cols());
	if (scale_columns)
		for (Eigen::Index j = 0; j < d.cols(); ++j)
			s(j) = detail::column_scale(d.X.col(j), d.rows());
	return detail::penalized_solve(d.X, d.y, lambda, s);
}

inline Eigen::VectorXd fit(const Design& d, const Solver& s)
{
	return s.kind == Solver::Kind::ols ? fit_ols(d) : fit_ridge(d, s.lambda, s.scale_columns);
}

inline Eigen::VectorXd residuals(const Design& d, const std::vector<int>& cols, const Eigen::VectorXd& g)
{
	Eigen::VectorXd r = d.y;
	for (std::size_t j = 0; j < cols.size(); ++j)
		r -= g(static_cast<Eigen::Index>(j)) * d.X.col(cols[j]);
	return r;
}

// ---------------------------------------------------------------------------
// Cross-validation.

struct CrossValidation
{
	std::vector<int> groups;
	std::vector<double> fold_losses;
	double mean = 0.0;
};

namespace detail
{

inline std::vector<int> distinct_groups(const Design& d)
{
	std::set<int> g(d.groups.begin(), d.groups.end());
	return {g.begin(), g.end()};
}

struct Fold
{
	Design train;
	Design held;
};

inline Fold split(const Design& d, int group)
{
	std::vector<Eigen::Index> tr, te;
	for (Eigen::Index i = 0; i < d.rows(); ++i)
		(d.groups[static_cast<std::size_t>(i)] == group ? te : tr).push_back(i);
	auto take = [&](const std::vector<Eigen::Index>& idx) {
		Design s{Eigen::MatrixXd(static_cast<Eigen::Index>(idx.size()), d.cols()),
			Eigen::VectorXd(static_cast<Eigen::Index>(idx.size())), d.labels, {}};
		for (std::size_t i = 0; i < idx.size(); ++i)
		{
			s.X.row(static_cast<Eigen::Index>(i)) = d.X.row(idx[i]);
			s.y(static_cast<Eigen::Index>(i)) = d.y(idx[i]);
			s.groups.push_back(d.groups[static_cast<std::size_t>(idx[i])]);
		}
		return s;
	};
	return {take(tr), take(te)};
}

inline std::vector<int> all_columns(Eigen::Index k)
{
	std::vector<int> c(static_cast<std::size_t>(k));
	for (int j = 0; j < static_cast<int>(k); ++j)
		c[static_cast<std::size_t>(j)] = j;
	return c;
}

} // namespace detail

/// Leave-one-trajectory-out: for each group fit on the others and evaluate the
/// loss on the held-out rows, using the columns `cols` (all when empty).
inline CrossValidation cross_validate(const Design& d, const LossSpec& loss, const Solver& solver,
	std::vector<int> cols = {})
{
	d.validate();
	loss.validate();
	if (cols.empty())
		cols = detail::all_columns(d.cols());
	const auto groups = detail::distinct_groups(d);
	if (d.groups.empty() || groups.size() < 2)
		throw GroupingError("cross-validation needs at least two trajectories");
	CrossValidation cv{groups, {}, 0.0};
	for (int g : groups)
	{
		const auto f = detail::split(d, g);
		const SubsetSolver sol(f.train.X, f.train.y, solver);
		const Eigen::VectorXd coef = sol.solve(cols);
		cv.fold_losses.push_back(evaluate_loss(residuals(f.held, cols, coef), loss));
	}
	for (double l : cv.fold_losses)
		cv.mean += l;
	cv.mean /= static_cast<double>(cv.fold_losses.size());
	return cv;
}

// ---------------------------------------------------------------------------
// Backward stepwise elimination.

struct StepwiseStep
{
	std::vector<int> columns;
	std::vector<std::string> terms;
	Eigen::VectorXd coefficients;
	double loss = 0.0;
	/// Mean held-out loss when cross-validation was requested.
	std::optional<double> cv_loss;
	std::vector<double> cv_fold_losses;
};

struct StepwiseResult
{
	std::vector<StepwiseStep> path; // full model first, one term last
	Solver solver;
	LossSpec loss;

	/// The path entry with `n` active terms, or nullptr.
	const StepwiseStep* with_terms(std::size_t n) const
	{
		for (const auto& s : path)
			if (s.columns.size() == n)
				return &s;
		return nullptr;
	}
};

struct StepwiseOptions
{
	bool cross_validate = false;
};

/// Greedy backward elimination: every step refits each single-term removal and
/// drops the term whose removal gives the lowest training loss (ties drop the
/// lower column index).
inline StepwiseResult stepwise_eliminate(const Design& d, const LossSpec& loss, const Solver& solver,
	const StepwiseOptions& opt = {})
{
	d.validate();
	loss.validate();
	if (d.cols() < 1)
		throw DomainError("stepwise regression needs at least one term");
	const SubsetSolver full(d.X, d.y, solver);

	std::vector<detail::Fold> folds;
	std::vector<SubsetSolver> fold_solvers;
	if (opt.cross_validate)
	{
		const auto groups = detail::distinct_groups(d);
		if (d.groups.empty() || groups.size() < 2)
			throw GroupingError("cross-validation needs at least two trajectories");
		for (int g : groups)
		{
			folds.push_back(detail::split(d, g));
			fold_solvers.emplace_back(folds.back().train.X, folds.back().train.y, solver);
		}
	}

	auto record = [&](const std::vector<int>& cols, const Eigen::VectorXd& coef, double l) {
		StepwiseStep s{cols, {}, coef, l, std::nullopt, {}};
		for (int c : cols)
			s.terms.push_back(d.labels[static_cast<std::size_t>(c)]);
		if (opt.cross_validate)
		{
			double mean = 0.0;
			for (std::size_t f = 0; f < folds.size(); ++f)
			{
				const double fl = evaluate_loss(residuals(folds[f].held, cols, fold_solvers[f].solve(cols)), loss);
				s.cv_fold_losses.push_back(fl);
				mean += fl;
			}
			s.cv_loss = mean / static_cast<double>(folds.size());
		}
		return s;
	};

	StepwiseResult out{{}, solver, loss};
	std::vector<int> active = detail::all_columns(d.cols());
	Eigen::VectorXd coef = full.solve(active);
	out.path.push_back(record(active, coef, evaluate_loss(residuals(d, active, coef), loss)));

	while (active.size() > 1)
	{
		double best = std::numeric_limits<double>::infinity();
		std::size_t drop = 0;
		Eigen::VectorXd best_coef;
		for (std::size_t i = 0; i < active.size(); ++i)
		{
			std::vector<int> trial = active;
			trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(i));
			Eigen::VectorXd c;
			try
			{
				c = full.solve(trial);
			}
			catch (const ConditioningError&)
			{
				continue;
			}
			const double l = evaluate_loss(residuals(d, trial, c), loss);
			if (l < best)
			{
				best = l;
				drop = i;
				best_coef = std::move(c);
			}
		}
		if (!std::isfinite(best))
			throw ConditioningError("every single-term removal from a " + std::to_string(active.size()) +
				"-term model is rank deficient");
		active.erase(active.begin() + static_cast<std::ptrdiff_t>(drop));
		out.path.push_back(record(active, best_coef, best));
	}
	return out;
}

} // namespace nlgraph::regress
