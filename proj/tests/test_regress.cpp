#include <nlgraph/random.hpp>
#include <nlgraph/regress.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace nlgraph;
using namespace nlgraph::regress;

namespace
{

/// n x k Gaussian-ish random design (sum of uniforms).
Eigen::MatrixXd random_matrix(Eigen::Index n, Eigen::Index k, Rng& rng)
{
	Eigen::MatrixXd X(n, k);
	for (Eigen::Index i = 0; i < n; ++i)
		for (Eigen::Index j = 0; j < k; ++j)
			X(i, j) = rng.uniform(-1, 1) + rng.uniform(-1, 1) + rng.uniform(-1, 1);
	return X;
}

Design make_design(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::vector<int> groups = {})
{
	Design d{X, y, {}, std::move(groups)};
	for (Eigen::Index j = 0; j < X.cols(); ++j)
		d.labels.push_back("x" + std::to_string(j));
	return d;
}

} // namespace

TEST(Loss, RawAndPerSampleNorms)
{
	const Eigen::Vector2d r(3.0, 4.0);
	LossSpec raw{0.0, 1.0, 0.0, false};
	EXPECT_DOUBLE_EQ(evaluate_loss(r, raw), 5.0);
	LossSpec mixed{1.0, 0.0, 2.0, false};
	EXPECT_DOUBLE_EQ(evaluate_loss(r, mixed), 7.0 + 8.0);
	LossSpec mean{1.0, 1.0, 0.0, true};
	EXPECT_DOUBLE_EQ(evaluate_loss(r, mean), 3.5 + 5.0 / std::sqrt(2.0));
	EXPECT_THROW(evaluate_loss(r, LossSpec{0.0, 0.0, 0.0, true}), SpecError);
	EXPECT_THROW(evaluate_loss(r, LossSpec{-1.0, 1.0, 0.0, true}), SpecError);
}

TEST(BuildDesign, EvaluatesTermsOnRecords)
{
	std::vector<Record> rec{{{"a", 1.0}, {"b", 2.0}}, {{"a", -1.0}, {"b", 0.5}}};
	std::vector<ModelTerm> terms{{"a", [](const Record& r) { return r.at("a"); }},
		{"a*b", [](const Record& r) { return r.at("a") * r.at("b"); }}};
	const auto d = build_design(rec, terms, [](const Record& r) { return r.at("b"); }, {0, 1});
	EXPECT_EQ(d.labels, (std::vector<std::string>{"a", "a*b"}));
	EXPECT_DOUBLE_EQ(d.X(1, 1), -0.5);
	EXPECT_DOUBLE_EQ(d.y(0), 2.0);
	EXPECT_THROW(build_design(rec, terms, [](const Record&) { return NAN; }), DomainError);
}

TEST(Solvers, OlsRecoversExactCoefficients)
{
	Rng rng(11);
	const Eigen::MatrixXd X = random_matrix(40, 4, rng);
	const Eigen::Vector4d g(1.0, -2.0, 0.5, 3.0);
	const auto d = make_design(X, X * g);
	EXPECT_TRUE(fit_ols(d).isApprox(g, 1e-12));
	EXPECT_TRUE(fit_ridge(d, 0.0).isApprox(g, 1e-12));
	EXPECT_TRUE(fit(d, Solver::ols()).isApprox(g, 1e-12));
}

TEST(Solvers, RankDeficiencyRaises)
{
	Rng rng(12);
	Eigen::MatrixXd X = random_matrix(20, 3, rng);
	X.col(2) = 2.0 * X.col(0) - X.col(1);
	EXPECT_THROW(fit_ols(make_design(X, X.col(0))), ConditioningError);
	EXPECT_NO_THROW(fit_ridge(make_design(X, X.col(0)), 1e-3));
}

TEST(Solvers, OlsIsPermutationEquivariant)
{
	Rng rng(13);
	const Eigen::MatrixXd X = random_matrix(30, 5, rng);
	Eigen::VectorXd y(30);
	for (Eigen::Index i = 0; i < 30; ++i)
		y(i) = rng.uniform(-1, 1);
	const auto g = fit_ols(make_design(X, y));
	const std::vector<int> perm{3, 0, 4, 1, 2};
	const auto gp = fit_ols(make_design(X, y).select(perm));
	for (std::size_t j = 0; j < perm.size(); ++j)
		EXPECT_NEAR(gp(static_cast<Eigen::Index>(j)), g(perm[j]), 1e-12);
}

TEST(Solvers, OlsScalesWithTarget)
{
	Rng rng(14);
	const Eigen::MatrixXd X = random_matrix(25, 3, rng);
	Eigen::VectorXd y(25);
	for (Eigen::Index i = 0; i < 25; ++i)
		y(i) = rng.uniform(-1, 1);
	EXPECT_TRUE(fit_ols(make_design(X, -3.0 * y)).isApprox(-3.0 * fit_ols(make_design(X, y)), 1e-12));
}

TEST(Solvers, RidgeShrinksMonotonically)
{
	Rng rng(15);
	const Eigen::MatrixXd X = random_matrix(30, 4, rng);
	Eigen::VectorXd y = X * Eigen::Vector4d(2, -1, 0.5, 1);
	for (Eigen::Index i = 0; i < 30; ++i)
		y(i) += 0.1 * rng.uniform(-1, 1);
	const auto d = make_design(X, y);
	double prev = std::numeric_limits<double>::infinity();
	for (double l : {0.0, 0.1, 1.0, 10.0, 100.0})
	{
		const auto g = fit_ridge(d, l, false);
		EXPECT_LE(g.norm(), prev + 1e-12);
		prev = g.norm();
	}
	EXPECT_THROW(fit_ridge(d, -1.0), DomainError);
}

TEST(Solvers, NestedModelsNeverFitWorse)
{
	Rng rng(16);
	const Eigen::MatrixXd X = random_matrix(50, 6, rng);
	Eigen::VectorXd y(50);
	for (Eigen::Index i = 0; i < 50; ++i)
		y(i) = std::sin(static_cast<double>(i));
	const auto d = make_design(X, y);
	const LossSpec l2;
	double prev = std::numeric_limits<double>::infinity();
	for (int k = 1; k <= 6; ++k)
	{
		std::vector<int> cols(static_cast<std::size_t>(k));
		for (int j = 0; j < k; ++j)
			cols[static_cast<std::size_t>(j)] = j;
		const auto sub = d.select(cols);
		const double l = evaluate_loss(residuals(sub, detail::all_columns(k), fit_ols(sub)), l2);
		EXPECT_LE(l, prev * (1 + 1e-12));
		prev = l;
	}
}

TEST(Stepwise, RecoversTwoOfTwentyTerms)
{
	Rng rng(17);
	const Eigen::MatrixXd X = random_matrix(200, 20, rng);
	Eigen::VectorXd y = 1.5 * X.col(4) - 0.8 * X.col(13);
	for (Eigen::Index i = 0; i < y.size(); ++i)
		y(i) += 1e-3 * rng.uniform(-1, 1);
	std::vector<int> groups(200);
	for (std::size_t i = 0; i < groups.size(); ++i)
		groups[i] = static_cast<int>(i / 40);
	const auto d = make_design(X, y, groups);
	StepwiseOptions opt;
	opt.cross_validate = true;
	const auto r = stepwise_eliminate(d, LossSpec{}, Solver::ols(), opt);
	ASSERT_EQ(r.path.size(), 20u);
	EXPECT_EQ(r.path.front().columns.size(), 20u);
	for (std::size_t i = 1; i < r.path.size(); ++i)
		EXPECT_GE(r.path[i].loss, r.path[i - 1].loss * (1 - 1e-12));
	const auto* two = r.with_terms(2);
	ASSERT_NE(two, nullptr);
	EXPECT_EQ(two->terms, (std::vector<std::string>{"x4", "x13"}));
	EXPECT_NEAR(two->coefficients(0), 1.5, 1e-3);
	EXPECT_NEAR(two->coefficients(1), -0.8, 1e-3);
	// Dropping a true term raises the loss by orders of magnitude.
	EXPECT_GT(r.with_terms(1)->loss, 100.0 * two->loss);
	ASSERT_TRUE(two->cv_loss.has_value());
	EXPECT_EQ(two->cv_fold_losses.size(), 5u);
	EXPECT_EQ(r.with_terms(21), nullptr);
}

TEST(Stepwise, TiesDropLowerColumnIndex)
{
	// Two identical irrelevant columns: removing either gives the same loss.
	Rng rng(18);
	Eigen::MatrixXd X = random_matrix(30, 3, rng);
	Eigen::VectorXd noise(30);
	for (Eigen::Index i = 0; i < 30; ++i)
		noise(i) = rng.uniform(-1, 1);
	X.col(1) = X.col(0);
	X.col(2) = noise;
	const auto d = make_design(X, 2.0 * X.col(2));
	// Full model is rank deficient for OLS, so use a small ridge.
	const auto r = stepwise_eliminate(d, LossSpec{}, Solver::ridge(1e-12), {});
	EXPECT_EQ(r.path[1].columns, (std::vector<int>{1, 2}));
}

TEST(CrossValidation, LeaveOneGroupOut)
{
	Rng rng(19);
	const Eigen::MatrixXd X = random_matrix(30, 2, rng);
	const Eigen::VectorXd y = X * Eigen::Vector2d(1.0, 2.0);
	std::vector<int> groups(30);
	for (std::size_t i = 0; i < 30; ++i)
		groups[i] = static_cast<int>(i % 3);
	const auto cv = cross_validate(make_design(X, y, groups), LossSpec{}, Solver::ols());
	EXPECT_EQ(cv.groups, (std::vector<int>{0, 1, 2}));
	EXPECT_EQ(cv.fold_losses.size(), 3u);
	EXPECT_LT(cv.mean, 1e-12);
	EXPECT_THROW(cross_validate(make_design(X, y), LossSpec{}, Solver::ols()), GroupingError);
	EXPECT_THROW(cross_validate(make_design(X, y, std::vector<int>(30, 4)), LossSpec{}, Solver::ols()),
		GroupingError);
}
